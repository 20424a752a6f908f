from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

# fixed example generation so repeated runs check the same cases
settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data" / "ucr"

ACCEPTANCE_LINES = []


def ucr_path(name, split):
    return DATA / name / f"{name}_{split}.tsv"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
