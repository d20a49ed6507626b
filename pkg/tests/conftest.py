import os
import sys
from pathlib import Path

import numpy as np
import pytest

from vidmark.keying import derive_key
from vidmark.synthetic import random_mark, synthetic_video

DATA = Path(__file__).parent / "data"


@pytest.fixture(autouse=True)
def _isolated_trials(tmp_path, monkeypatch):
    # never touch a real ./.wm_trials
    monkeypatch.setenv("WM_TRIALS_PATH", str(tmp_path / "trials"))
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def smooth30():
    return synthetic_video(30, 128, 128, seed=7)


@pytest.fixture(scope="session")
def conditioned30():
    return synthetic_video(30, 128, 128, seed=7, kind="conditioned")


@pytest.fixture(scope="session")
def mark8():
    return random_mark(8, 8, seed=3)


@pytest.fixture(scope="session")
def key():
    return derive_key("correct horse")


def load_matrix(name):
    from vidmark.linalg import parse_matrix_text

    return parse_matrix_text((DATA / name).read_text())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in mod.RESULTS:
        terminalreporter.write_line(mod.format_line(name, ok, detail))
