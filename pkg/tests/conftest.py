import numpy as np
import pytest

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)

CASES = [
    ("distinguishable", 2, 2),
    ("distinguishable", 3, 3),
    ("distinguishable", 3, 2),
    ("distinguishable", 2, 4),
    ("bosonic", 2, 2),
    ("bosonic", 3, 3),
    ("fermionic", 4, 4),
    ("fermionic", 5, 5),
]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def hermitian_onb(d):
    """Orthonormal (Frobenius) basis of the real space of Hermitian d x d matrices."""
    out = []
    for i in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[i, i] = 1
        out.append(m)
    for i in range(d):
        for j in range(i + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[i, j] = m[j, i] = 1 / np.sqrt(2)
            out.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[i, j], m[j, i] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            out.append(m)
    return out


def realify(m):
    m = np.asarray(m)
    return np.concatenate([m.real.ravel(), m.imag.ravel()])


# -- acceptance reporting -------------------------------------------------------

ACCEPTANCE: dict = {}


def record(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_runtest_logreport(report):
    # a criterion that crashed before recording still gets a FAIL line
    if report.when == "call" and report.failed and "test_acceptance.py::test_criterion_" in report.nodeid:
        num = int(report.nodeid.rsplit("_", 1)[-1].split("[")[0])
        ACCEPTANCE.setdefault(num, f"criterion {num:2d} FAIL  error: {report.longrepr.reprcrash.message if hasattr(report.longrepr, 'reprcrash') else 'see traceback'}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for num in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[num])
