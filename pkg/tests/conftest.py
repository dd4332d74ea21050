from __future__ import annotations

import os

import pytest
from hypothesis import HealthCheck, settings

import acceptance_log
from ecf import Identity, export_descriptor
from ecf.rng import SeededRandomness

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", parent=settings.get_profile("default"), max_examples=50)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    if not acceptance_log.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in acceptance_log.RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


@pytest.fixture
def make_identity():
    made = []

    def make(seed=None) -> Identity:
        ident = Identity.generate(None if seed is None else SeededRandomness(seed))
        made.append(ident)
        return ident

    yield make
    for ident in made:
        ident.destroy()


@pytest.fixture
def alice(make_identity):
    return make_identity("alice")


@pytest.fixture
def bob(make_identity):
    return make_identity("bob")


@pytest.fixture
def charlie(make_identity):
    return make_identity("charlie")


@pytest.fixture
def alice_desc(alice):
    return export_descriptor(alice, "Alice")


@pytest.fixture
def bob_desc(bob):
    return export_descriptor(bob, "Bob")
