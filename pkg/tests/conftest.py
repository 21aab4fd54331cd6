import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    number, title = marker.args
    detail = getattr(item, "acceptance_detail", "")
    _criteria[number] = (title, rep.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok, detail = _criteria[number]
        line = f"{'PASS' if ok else 'FAIL'}  {number:>2}. {title}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)


@pytest.fixture
def detail(request):
    """Attach a one-line measurement to the acceptance summary."""

    def record(text):
        request.node.acceptance_detail = text

    return record
