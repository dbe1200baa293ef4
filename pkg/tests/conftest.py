import pytest

_outcomes = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion a test belongs to")
    config.stash[_outcomes] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or rep.failed or rep.skipped:
        checks = item.config.stash[_outcomes].setdefault(mark.args[0], {})
        name = item.name.split("[", 1)[-1].rstrip("]") if "[" in item.name else item.name
        if rep.skipped:
            checks.setdefault(name, "skipped")
        elif rep.failed:
            checks[name] = "failed"
        else:
            checks.setdefault(name, "passed")


def pytest_terminal_summary(terminalreporter, config):
    outcomes = config.stash[_outcomes]
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(outcomes):
        checks = outcomes[n]
        bad = [k for k, v in checks.items() if v != "passed"]
        verdict = "PASS" if not bad else "FAIL"
        line = f"criterion {n:>2}: {verdict} ({len(checks) - len(bad)}/{len(checks)} checks)"
        if bad:
            line += "; not passing: " + ", ".join(f"{k} [{checks[k]}]" for k in bad)
        terminalreporter.write_line(line)
