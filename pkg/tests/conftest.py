"""
Shared fixtures: the two shipped bundles, parsed and built once per session,
plus golden-file comparison.
"""

import os
import pytest

from src.bundles import get_bundle
from src.pipeline import build, load_system

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")


@pytest.fixture(scope="session")
def smart_building():
    return get_bundle("smart-building")


@pytest.fixture(scope="session")
def fire_detection():
    return get_bundle("fire-detection")


@pytest.fixture(scope="session")
def sb_system(smart_building):
    return load_system(*smart_building.spec_paths)


@pytest.fixture(scope="session")
def fd_system(fire_detection):
    return load_system(*fire_detection.spec_paths)


@pytest.fixture(scope="session")
def sb_build(sb_system):
    return build(sb_system, seed=42)


@pytest.fixture(scope="session")
def fd_build(fd_system):
    return build(fd_system, seed=42)


@pytest.fixture
def golden():
    """Compares text with tests/golden/<name>; UPDATE_GOLDEN=1 rewrites the file instead."""

    def check(name: str, text: str) -> None:
        path = os.path.join(GOLDEN_DIR, name)
        if os.getenv("UPDATE_GOLDEN") == "1":
            os.makedirs(GOLDEN_DIR, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)
            return
        if not os.path.exists(path):
            pytest.fail(f"golden file {name} is missing; rerun with UPDATE_GOLDEN=1 to record it")
        with open(path, encoding="utf-8", newline="") as handle:
            assert text == handle.read(), f"output differs from golden file {name}"

    return check
