from __future__ import annotations

import pytest

from darkgram.classify import stratified_split, train_baseline
from helpers import generate_corpus


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        print(f"\n[acceptance] {name}: {status}")


@pytest.fixture(scope="session")
def fixture_corpus():
    """6-class template corpus, 1000 items per class, 70:30 stratified split."""
    corpus = generate_corpus(1000, seed=42)
    return stratified_split(corpus, 0.70, seed=42)


@pytest.fixture(scope="session")
def baseline_model(fixture_corpus):
    return train_baseline(fixture_corpus, seed=7)
