"""The compiled kernel and the pure lane must agree bit-for-bit."""

import numpy as np
import pytest

from simbridge import _fallback

_kernels = pytest.importorskip("simbridge._kernels")


@pytest.mark.parametrize("seed", range(25))
def test_lanes_bit_equal(seed):
    rng = np.random.default_rng(seed)
    n = 48
    q = rng.uniform(-3, 3, n)
    qd = rng.uniform(-5, 5, n)
    qd[rng.random(n) < 0.3] = 0.0   # exercise the stiction latch
    u = rng.uniform(-10, 10, n)
    ext = rng.uniform(-2, 2, n)
    inertia = rng.uniform(0.01, 2, n)
    damping = rng.uniform(0, 5, n)
    coulomb = rng.uniform(0, 0.5, n)
    stiction = coulomb + rng.uniform(0, 0.5, n)
    gravity = rng.uniform(0, 2, n)
    gear = rng.uniform(0.5, 100, n)
    tl = rng.uniform(1, 50, n)
    pmin = rng.uniform(-4, -3, n)
    pmax = rng.uniform(3, 4, n)

    qa, qda, aa = q.copy(), qd.copy(), np.zeros(n)
    qb, qdb, ab = q.copy(), qd.copy(), np.zeros(n)
    for _ in range(50):
        _fallback.step_joints(qa, qda, aa, u, ext, 0.001, inertia, damping,
                              coulomb, stiction, gravity, gear, tl, pmin, pmax, 1e-3)
        _kernels.step_joints(qb, qdb, ab, u, ext, 0.001, inertia, damping,
                             coulomb, stiction, gravity, gear, tl, pmin, pmax, 1e-3)
    assert np.array_equal(qa, qb)
    assert np.array_equal(qda, qdb)
    assert np.array_equal(aa, ab)
