import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def step_signal(n=1024, at=512):
    f = np.zeros(n)
    f[at:] = 1.0
    return f


_ACCEPTANCE: list[str] = []


@pytest.fixture
def report(request):
    """Print one acceptance line through the terminal reporter, then assert."""
    tr = request.config.pluginmanager.get_plugin("terminalreporter")

    def _report(n: int, ok: bool, detail: str) -> None:
        line = f"[C{n}] {'PASS' if ok else 'FAIL'}: {detail}"
        _ACCEPTANCE.append(line)
        if tr is not None:
            tr.write_line("")
            tr.write_line(line)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s[2 : s.index("]")])):
            terminalreporter.write_line(line)
