import numpy as np
import pytest

# Source state from the -2.95 dB / +4.15 dB squeezing levels.
V_S = 10 ** (-2.95 / 10)
V_AS = 10 ** (4.15 / 10)

_ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail):
    status = "PASS" if passed else "FAIL"
    _ACCEPTANCE_LINES.append(f"[{status}] criterion {number}: {title} -- {detail}")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def squeezed():
    from cvcoherence import make_squeezed_state

    return make_squeezed_state(V_S, V_AS)


@pytest.fixture
def epr():
    from cvcoherence import make_epr_state

    return make_epr_state(V_S, V_AS)


@pytest.fixture
def rng():
    return np.random.default_rng(20211)
