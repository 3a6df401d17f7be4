import pytest

from cmcrates.montecarlo import MCConfig

SEED = 20240607

# criterion number -> list of (test id, outcome, seconds)
_ACCEPTANCE = {}
# criterion number -> runtime budget in seconds for all of its cases together
_BUDGETS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, budget=seconds): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number = marker.args[0]
    if "budget" in marker.kwargs:
        _BUDGETS[number] = marker.kwargs["budget"]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE.setdefault(number, []).append((item.name, report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        cases = _ACCEPTANCE[number]
        failed = [name for name, outcome, _ in cases if outcome != "passed"]
        seconds = sum(d for _, _, d in cases)
        budget = _BUDGETS.get(number)
        over = budget is not None and seconds > budget
        status = "PASS" if not failed and not over else "FAIL"
        detail = f"{len(cases) - len(failed)}/{len(cases)} cases, {seconds:.1f} s"
        if budget is not None:
            detail += f" of {budget:g} s budget"
        if over:
            detail += "; over budget"
        if failed:
            detail += "; failing: " + ", ".join(failed)
        terminalreporter.write_line(f"criterion {number}: {status} ({detail})")


@pytest.fixture
def cfg():
    return MCConfig(replications=100_000, seed=SEED, n_max=30)


@pytest.fixture
def small_cfg():
    return MCConfig(replications=20_000, seed=SEED, n_max=20)
