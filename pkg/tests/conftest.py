import pytest
from hypothesis import settings

from pitpn.models import load_model, net3
from pitpn.net import instantiate
from pitpn.smt import open_solver

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def solver():
    s = open_solver()
    yield s
    s.close()


@pytest.fixture
def pc():
    return load_model("producer_consumer")


@pytest.fixture
def fig1():
    return load_model("fig1")


@pytest.fixture
def fig1_pi():
    return load_model("fig1_pi")


@pytest.fixture
def n34():
    return net3(3, 4)


@pytest.fixture
def n23():
    return net3(2, 3)


@pytest.fixture
def pc3(pc):
    return instantiate(pc, {"a": 3})


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, text): acceptance criterion covered by a test")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and rep.passed:
        return
    label, text = mark.args
    ok, _ = item.config._criteria.get(label, (True, text))
    item.config._criteria[label] = (ok and rep.passed, text)


def pytest_terminal_summary(terminalreporter, config):
    crit = getattr(config, "_criteria", {})
    if not crit:
        return
    terminalreporter.section("acceptance criteria")
    def order(label):
        head = "".join(ch for ch in label if ch.isdigit())
        return int(head), label
    for label in sorted(crit, key=order):
        ok, text = crit[label]
        terminalreporter.write_line(f"criterion {label:<4} {'PASS' if ok else 'FAIL'}  {text}")
