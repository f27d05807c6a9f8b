import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sarbandits import kernels  # noqa: E402


@pytest.fixture(params=kernels.available_backends())
def backend_name(request):
    previous = kernels.backend()
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
