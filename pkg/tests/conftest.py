import pytest

_outcomes = {}
_details = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    key = mark.args
    if rep.when == "call" or rep.failed or rep.skipped:
        ok = rep.passed and not rep.skipped
        prev = _outcomes.get(key, True)
        _outcomes[key] = prev and ok
        notes = [str(v) for k, v in item.user_properties if k == "measured"]
        if notes:
            _details.setdefault(key, []).extend(notes)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), ok in sorted(_outcomes.items()):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {num:2d}: {title}"
        if key_notes := _details.get((num, title)):
            line += f"  [{'; '.join(key_notes)}]"
        terminalreporter.write_line(line)
