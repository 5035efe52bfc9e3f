import json
import math

import numpy as np
import pytest

from sifs.fileio import load_config, load_map, load_space
from sifs.fixtures import fixture_dir, four_n_sample

E1_POINTS = [(0, 0), (4, 0), (0, 4), (4, 5), (5, 4)]


def _fixture(name):
    return json.loads((fixture_dir() / f"{name}.json").read_text())


@pytest.fixture
def e1():
    doc = _fixture("e1")
    return load_space(doc["space"]), load_map(doc["map"])


@pytest.fixture
def halving():
    doc = _fixture("halving")
    return load_space(doc["space"]), load_map(doc["map"])


@pytest.fixture
def four_n():
    doc = _fixture("four_n")
    return load_space(doc["space"]), load_map(doc["map"]), four_n_sample(101, 25)


@pytest.fixture
def cantor_config():
    return _fixture("cantor")


@pytest.fixture
def sierpinski_config():
    return _fixture("sierpinski")


@pytest.fixture
def cantor(cantor_config):
    return load_config(cantor_config)


@pytest.fixture
def sierpinski(sierpinski_config):
    return load_config(sierpinski_config)


SIERPINSKI_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
