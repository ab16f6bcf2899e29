import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("dfex", max_examples=60, deadline=None)
settings.load_profile("dfex")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def direct_dft(f):
    """Explicit double loop over n and k; reference for every spectrum."""
    f = np.asarray(f, dtype=np.complex128)
    if f.ndim == 1:
        n = f.size
        return np.array([sum(f[m] * np.exp(-2j * np.pi * k * m / n) for m in range(n)) for k in range(n)])
    n = f.shape[0]
    out = np.zeros_like(f)
    for k1 in range(n):
        for k2 in range(n):
            s = 0j
            for m1 in range(n):
                for m2 in range(n):
                    s += f[m1, m2] * np.exp(-2j * np.pi * (k1 * m1 + k2 * m2) / n)
            out[k1, k2] = s
    return out


def direct_conv(f, g):
    """(f * g)[n] = sum_k f[k] g[n - k] by literal summation."""
    f = np.asarray(f, dtype=np.complex128)
    g = np.asarray(g, dtype=np.complex128)
    n = f.shape[0]
    if f.ndim == 1:
        return np.array([sum(f[k] * g[(i - k) % n] for k in range(n)) for i in range(n)])
    out = np.zeros_like(f)
    for i in range(n):
        for j in range(n):
            s = 0j
            for a in range(n):
                for b in range(n):
                    s += f[a, b] * g[(i - a) % n, (j - b) % n]
            out[i, j] = s
    return out


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
