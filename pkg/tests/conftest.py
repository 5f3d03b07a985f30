from __future__ import annotations

from pathlib import Path

import pytest

from sitcalc.acs import ACS_DOMAIN, BLOCKS_DOMAIN, LOOP_DOMAIN, acs_engine, acs_spec
from sitcalc.interpreter import Engine, GroundAction
from sitcalc.parser import parse_domain

TESTS = Path(__file__).parent
FIXTURES = TESTS / "fixtures"
GOLDEN = TESTS / "golden"


def load(path: Path):
    return parse_domain(path.read_text(), path.name)


def ids(values) -> list[str]:
    return sorted(v["id"] for v in values)


def df_ids(sit) -> tuple[list[str], list[str]]:
    return ids(sit["agenda_list"]), ids(sit["tempagn_list"])


@pytest.fixture(scope="session")
def acs():
    return acs_spec()


@pytest.fixture(scope="session")
def engine():
    return acs_engine()


@pytest.fixture(scope="session")
def ev(engine):
    """The four named calendar events, by suffix: ev["003"]."""
    return {n[-3:]: engine.evaluator.const_value(n) for n in ("ev001", "ev002", "ev003", "ev004")}


@pytest.fixture(scope="session")
def s0(engine):
    return engine.initial()


@pytest.fixture(scope="session")
def s1(engine, s0, ev):
    return engine.step(GroundAction("add_to_tempagn_list", (ev["003"],)), s0)


@pytest.fixture(scope="session")
def s2(engine, s1, ev):
    return engine.step(GroundAction("add_to_tempagn_list", (ev["004"],)), s1)


@pytest.fixture(scope="session")
def blocks():
    return load(BLOCKS_DOMAIN)


@pytest.fixture(scope="session")
def loop():
    return load(LOOP_DOMAIN)


@pytest.fixture(scope="session")
def adversarial():
    return load(FIXTURES / "adversarial.domain")


@pytest.fixture(scope="session")
def acs_logged():
    return load(FIXTURES / "acs_logged.domain")


@pytest.fixture(scope="session")
def blocks_engine(blocks):
    return Engine(blocks)
