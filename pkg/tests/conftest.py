"""Shared fixtures."""

from __future__ import annotations

import pytest

from dcflow import load_table
from dcflow.data import bundled_script_path, bundled_suite_path

# The loan/city demo grid used across the prompt and query tests.
QUALITY_DEMO_CSV = b"""LoanAmount,City,State,Zip
30333,Honolulu,HI,96814
149900,Honolulu,HI,
148100,Honolulu,HI,96814
334444,,IL,
120,Urbana,IL,61802
100000,Chicago,IL,
1000.,Champaign,IL,61820
"""


@pytest.fixture
def quality_demo_table():
    return load_table(QUALITY_DEMO_CSV)


@pytest.fixture(scope="session")
def suite_path():
    return bundled_suite_path()


@pytest.fixture(scope="session")
def cases_dir():
    return bundled_suite_path().parent


@pytest.fixture(scope="session")
def script_path():
    return bundled_script_path
