import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rdpgmap.errors import InputError
from rdpgmap.symmat import (
    dykstra_warm,
    eigh,
    nearest_psd_with_diag,
    nearest_psd_with_offdiag_box,
    numerical_rank,
    offdiag_mask,
    project_fixed_diag,
    project_offdiag_box,
    project_psd,
    project_psd_fixed_diag_exact,
    require_symmetric,
    spectral_norm,
    symmetrize,
)

sym_entries = st.floats(-5.0, 5.0, allow_nan=False, allow_infinity=False)


def sym_matrices(n_max=8):
    return st.integers(2, n_max).flatmap(
        lambda n: arrays(np.float64, (n, n), elements=sym_entries)
    ).map(symmetrize)


def test_eigh_reconstruction():
    rng = np.random.default_rng(3)
    for n in (2, 5, 30, 100):
        m = symmetrize(rng.standard_normal((n, n)))
        w, v = eigh(m)
        assert np.max(np.abs((v * w) @ v.T - m)) < 1e-10
        assert np.max(np.abs(v.T @ v - np.eye(n))) < 1e-10


def test_require_symmetric_rejects():
    with pytest.raises(InputError):
        require_symmetric(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(InputError):
        require_symmetric(np.zeros((2, 3)))


@given(sym_matrices())
def test_project_psd_properties(m):
    x = project_psd(m)
    w = np.linalg.eigvalsh(x)
    assert w.min() > -1e-9 * max(1.0, spectral_norm(m))
    # projection residual is orthogonal to the result
    assert abs(np.sum(x * (m - x))) < 1e-7 * max(1.0, np.sum(m * m))


def test_fixed_diag_and_box():
    m = np.array([[3.0, 2.0], [2.0, -1.0]])
    d = project_fixed_diag(m, 0.5)
    assert np.allclose(np.diag(d), 0.5)
    assert d[0, 1] == 2.0
    b = project_offdiag_box(np.array([[0.0, 0.9], [0.9, 0.0]]), 0.25, 0.75)
    assert b[0, 1] == 0.75 and b[0, 0] == 0.0


def test_diag_projection_oracle():
    # hand-solvable instance: nearest unit-diagonal PSD matrix to
    # [[0,-2],[-2,0]] pins the off-diagonal at the PSD boundary
    m = np.array([[0.0, -2.0], [-2.0, 0.0]])
    target = np.array([[1.0, -1.0], [-1.0, 1.0]])
    x = nearest_psd_with_diag(m, 1.0, tol=1e-12)
    assert np.max(np.abs(x - target)) < 1e-6
    x2, info2 = project_psd_fixed_diag_exact(m, 1.0)
    assert np.max(np.abs(x2 - target)) < 1e-9
    assert info2.converged


def test_box_psd_oracle():
    # minimize over b in [.25,.75]: 2b^2 + 2(b-.9)^2 has vertex b=.45
    m = np.array([[0.0, 0.9], [0.9, 0.0]])
    x = nearest_psd_with_offdiag_box(m, 0.25, 0.75, tol=1e-12)
    assert np.max(np.abs(x - np.full((2, 2), 0.45))) < 1e-6


@given(sym_matrices(6), st.floats(0.5, 4.0))
def test_exact_projection_is_feasible_and_optimal(m, c):
    x, info = project_psd_fixed_diag_exact(m, c)
    n = m.shape[0]
    assert np.allclose(np.diag(x), c)
    assert np.linalg.eigvalsh(x).min() > -1e-7 * max(1.0, spectral_norm(m))
    # no feasible competitor may be closer; try a few deterministic ones
    rng = np.random.default_rng(0)
    dist = np.linalg.norm(m - x)
    for _ in range(5):
        z = project_psd(symmetrize(rng.standard_normal((n, n))))
        z = z - np.diag(np.diag(z)) + c * np.eye(n)
        if np.linalg.eigvalsh(z).min() < 0:
            continue
        assert np.linalg.norm(m - z) >= dist - 1e-6 * max(1.0, dist)


def test_warm_start_matches_cold():
    rng = np.random.default_rng(11)
    n = 12
    m = symmetrize(rng.standard_normal((n, n)))
    proj = lambda x: project_fixed_diag(x, 2.0)
    cold, _, state = dykstra_warm(m, proj, tol=1e-11)
    drift = m + 1e-3 * symmetrize(rng.standard_normal((n, n)))
    warm, info_w, _ = dykstra_warm(drift, proj, state, tol=1e-11)
    cold2, info_c, _ = dykstra_warm(drift, proj, tol=1e-11)
    assert np.max(np.abs(warm - cold2)) < 1e-7
    assert info_w.cycles <= info_c.cycles


def test_exact_agrees_with_dykstra():
    rng = np.random.default_rng(5)
    for n in (4, 9):
        m = symmetrize(rng.standard_normal((n, n)))
        a, _, _ = dykstra_warm(
            m, lambda x: project_fixed_diag(x, 1.5), tol=1e-12,
            max_iter=20000,
        )
        b, _ = project_psd_fixed_diag_exact(m, 1.5)
        assert np.max(np.abs(a - b)) < 1e-6


def test_numerical_rank_thresholds():
    m = np.diag([2.0, 1e-2, 1e-8, 0.0])
    assert numerical_rank(m, 1e-3) == 2
    assert numerical_rank(m, 1e-10) == 3
    assert numerical_rank(np.zeros((3, 3)), 1e-3) == 0


def test_spectral_norm_matches_numpy(rng):
    m = symmetrize(rng.standard_normal((7, 7)))
    assert abs(spectral_norm(m) - np.linalg.norm(m, 2)) < 1e-10


def test_offdiag_mask():
    mask = offdiag_mask(3)
    assert mask.sum() == 6 and not mask.diagonal().any()
