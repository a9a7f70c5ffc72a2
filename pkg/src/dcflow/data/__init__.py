"""Bundled demo suite and scripted-backend fixtures."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def bundled_suite_path() -> Path:
    """Path of the bundled benchmark suite manifest."""
    return Path(str(resources.files("dcflow.data") / "cases" / "suite.json"))


def bundled_script_path(name: str) -> Path:
    """Path of a bundled scripted-backend script, by stem name."""
    return Path(str(resources.files("dcflow.data") / "scripts" / f"{name}.json"))
