from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make ``oracles`` importable

from coopmag.params import derive_scales, dimensionless_config, yig_nv  # noqa: E402

FROZEN = json.loads((Path(__file__).parent / "frozen_oracles.json").read_text())


@pytest.fixture(scope="session")
def frozen():
    return FROZEN


@pytest.fixture(scope="session")
def preset():
    return yig_nv()


@pytest.fixture(scope="session")
def scales(preset):
    return derive_scales(*preset)


@pytest.fixture(scope="session")
def cfg(preset, scales):
    return dimensionless_config(scales, preset[1])


# -- acceptance reporting ------------------------------------------------------------

ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[num])
