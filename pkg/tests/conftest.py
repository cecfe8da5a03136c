"""Collects ``@pytest.mark.acceptance(n, title)`` outcomes into one summary line per criterion."""

import pytest

_RESULTS: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    number, title = mark.args
    entry = _RESULTS.setdefault(number, {"title": title, "passed": True, "details": []})
    entry["passed"] &= rep.passed
    entry["details"].extend(v for k, v in item.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS):
        e = _RESULTS[number]
        tr.write_line(f"criterion {number}: {'PASS' if e['passed'] else 'FAIL'}  {e['title']}")
        for d in e["details"]:
            tr.write_line(f"    {d}")


@pytest.fixture
def detail(request):
    """Attach a measurement line to the acceptance summary."""

    def add(text: str) -> None:
        request.node.user_properties.append(("detail", text))

    return add
