import os
import subprocess
import sys

import numpy as np
import pytest

from ncenoise import _kernels
from ncenoise._kernels import _fallback


def _random_inputs(n, seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=n)
    pd = np.abs(rng.normal(size=n)) + 1e-12
    pn = np.abs(rng.normal(size=n))
    pn[rng.random(n) < 0.1] = 0.0  # exercise the vanishing-noise branch
    w = np.abs(rng.normal(size=n))
    return g, pd, pn, w


def test_backend_name_is_valid():
    assert _kernels.BACKEND in ("cython", "numpy")


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_active_backend_matches_fallback(seed):
    g, pd, pn, w = _random_inputs(50000, seed)
    nu = 1.7
    m_a, i_a = _kernels.weighted_moments(g, pd, pn, w, nu)
    m_b, i_b = _fallback.weighted_moments(g, pd, pn, w, nu)
    assert m_a == pytest.approx(m_b, rel=1e-12, abs=1e-15)
    assert i_a == pytest.approx(i_b, rel=1e-12, abs=1e-15)
    dm_a, di_a = _kernels.moment_partials(g, pd, pn, w, nu)
    dm_b, di_b = _fallback.moment_partials(g, pd, pn, w, nu)
    np.testing.assert_allclose(dm_a, dm_b, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(di_a, di_b, rtol=1e-12, atol=1e-15)


def test_env_var_forces_pure_python():
    env = dict(os.environ, NCENOISE_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from ncenoise._kernels import BACKEND; print(BACKEND)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_compiled_extension_available():
    """The package ships a compiled kernel; this guards against silently
    falling back in a fresh environment."""
    if os.environ.get("NCENOISE_PURE_PYTHON") == "1":
        pytest.skip("pure-python mode requested")
    assert _kernels.BACKEND == "cython"
