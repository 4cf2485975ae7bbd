import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from torsionlab import aedecomp as ae
from torsionlab import witten
from torsionlab.aedecomp import FamilyError


def test_constant_family_spectrum_is_shifted():
    fam = ae.preset_family("constant", 32)
    base = np.linalg.eigvalsh(fam.A)
    for t in (0.0, 1.5, 7.0):
        np.testing.assert_allclose(fam.eigenvalues(t), base + t * t, rtol=1e-12, atol=1e-9)


def test_circulant_eigenvalues():
    N = 16
    fam = ae.build_family_1d(N, 2 * math.pi, lambda x: 0 * x, lambda x: 0 * x)
    h = 2 * math.pi / N
    expect = np.sort(4 * np.sin(math.pi * np.arange(N) / N) ** 2 / h ** 2)
    np.testing.assert_allclose(np.linalg.eigvalsh(fam.A), expect, atol=1e-10)
    np.testing.assert_allclose(fam.eigenvalues(0.0), expect, atol=1e-10)


def test_flat_arc_degenerate_set():
    fam = ae.preset_family("flat-arc", 128, arc=0.5)
    expect = np.flatnonzero(np.abs(fam.x - fam.length / 2) <= 0.5)
    np.testing.assert_array_equal(fam.degenerate_set, expect)


def test_family_rejections():
    with pytest.raises(FamilyError, match="negative"):
        ae.build_family_1d(32, 2 * math.pi, lambda x: 0 * x, np.cos)
    with pytest.raises(FamilyError):
        ae.preset_family("constant", 8)
    with pytest.raises(FamilyError):
        ae.preset_family("no-such", 32)


@given(st.sampled_from(ae.PRESETS), st.floats(-30, 30), st.integers(16, 80))
def test_banded_eigenvalues_match_dense(preset, t, N):
    fam = ae.preset_family(preset, N)
    dense = np.linalg.eigvalsh(fam.matrix(t))
    np.testing.assert_allclose(fam.eigenvalues(t), dense, atol=1e-9 * max(1.0, np.abs(dense).max()))


def test_projector_examples():
    pd = ae.projector_above_one(np.diag([0.5, 2.0, 3.0]), 0.0)
    assert pd.m == 1
    np.testing.assert_allclose(pd.projector, np.diag([0.0, 1.0, 1.0]), atol=1e-14)
    assert ae.projector_above_one(ae.preset_family("constant", 32), 5.0).m == 0
    with pytest.raises(FamilyError):
        ae.projector_above_one(np.diag([1.0 + 1e-9, 3.0]), 0.0)


def test_projector_idempotent_self_adjoint(rng):
    H = ae.random_spd_instance(rng, 20)
    P = ae.projector_above_one(H, 0.0).projector
    np.testing.assert_allclose(P @ P, P, atol=1e-10)
    np.testing.assert_allclose(P, P.T, atol=1e-12)


def test_witten_family_corank_matches_split(witten_circle):
    fam = ae.preset_family("cosine-well", 256)
    c, w = witten_circle
    for t in (10.0, 20.0, 40.0, 60.0):
        assert ae.projector_above_one(fam, t).m == 1
        assert witten.spectral_split(c, w, t).cluster_counts[0] == 1


def test_aedel_examples():
    r = ae.aedel_decomposition(np.array([[4.0]]), 1.0, 1)
    assert r.lhs == pytest.approx(math.log(4), abs=1e-15)
    assert r.three_way <= 1e-13
    r = ae.aedel_decomposition(np.diag([2.0, 3.0]), 1.5, 2)
    assert r.three_way <= 1e-8


@given(st.integers(0, 2 ** 31), st.integers(1, 3), st.sampled_from([2.0, 5.0, 10.0]))
def test_aedel_random(seed, k, t):
    H = ae.random_spd_instance(np.random.default_rng(seed), 30)
    assert ae.aedel_decomposition(H, t, k).three_way <= 1e-8


def test_aedel_witten_family_k3():
    fam = ae.preset_family("cosine-well", 256, k=3)
    r = ae.aedel_decomposition(fam, 10.0)
    assert r.m == 1
    assert r.three_way <= 1e-8


def test_quadrature_reports_nonconvergence():
    with pytest.raises(FamilyError, match="converge"):
        ae.adaptive_gauss_legendre(lambda x: 1.0 / math.sqrt(x) if x > 0 else 0.0, 0.0, 1.0,
                                   rel_tol=1e-15, max_depth=3)
    val, err, _ = ae.adaptive_gauss_legendre(math.exp, 0.0, 1.0)
    assert val == pytest.approx(math.e - 1, rel=1e-14)


def test_trace_bound_examples():
    tb = ae.trace_bound_check(np.diag([2.0, 3.0]), 1, [0.0, 1e-3, 1.0], [0.0, 1.0])
    assert tb.max_trace <= 0.5 + 1 / 3 + 1e-15
    fam = ae.preset_family("constant", 64)
    tb = ae.trace_bound_check(fam, 1, [1e-6, 1.0], np.linspace(2, 20, 10))
    assert np.all(np.diff(tb.sup_over_eps) < 0)


def test_trace_bound_witten_family():
    fam = ae.preset_family("cosine-well", 256, k=3)
    tb = ae.trace_bound_check(fam, 3, np.geomspace(1e-6, 1, 7), np.linspace(10, 60, 11))
    assert tb.bounded
    assert np.isfinite(tb.max_trace)


def test_projector_bookkeeping_decays_on_witten_laplacian(witten_circle):
    c, w = witten_circle
    op = lambda t: witten._orthonormal_laplacian(witten.deform(c, w, t), 0)  # noqa: E731
    vals = [abs(ae.ld_dp_defect(op, t, 3)[0]) for t in (5.0, 10.0, 20.0, 40.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-40


def test_projector_bookkeeping_plateau_is_lattice_error():
    # the difference-stencil family has a ground state ~ -c t² h², so the
    # bookkeeping defect levels off at O(h^{2k}) instead of decaying
    coarse = ae.preset_family("cosine-well", 256)
    fine = ae.preset_family("cosine-well", 1024)
    for t in (10.0, 40.0):
        ratio = ae.ld_dp_defect(coarse, t, 1)[0] / ae.ld_dp_defect(fine, t, 1)[0]
        assert ratio == pytest.approx(16.0, rel=0.05)


def test_corank_locally_constant():
    fam = ae.preset_family("cosine-well", 256)
    ms = {s: {ae.projector_above_one(fam, s * t).m for t in np.geomspace(8, 64, 9)} for s in (1, -1)}
    assert all(len(v) == 1 for v in ms.values())


def test_threshold_independence():
    fam = ae.preset_family("cosine-well", 256, k=2)
    t = 20.0
    lam = fam.eigenvalues(t)
    assert not np.any((lam >= 1.0) & (lam <= 1.1))
    a, b = ae.aedel_decomposition(fam, t, threshold=1.0), ae.aedel_decomposition(fam, t, threshold=1.1)
    assert abs(a.lhs - b.lhs) <= 1e-10 and abs(a.rhs_closed - b.rhs_closed) <= 1e-10
    assert ae.lattice_log_det_prime(fam, t, 1.0) == ae.lattice_log_det_prime(fam, t, 1.1)
    assert ae.ld_dp_defect(fam, t, 2, 1.0) == ae.ld_dp_defect(fam, t, 2, 1.1)


def test_shifted_operator_examples(rng):
    fam = ae.preset_family("cosine-well", 32)
    A, Av = ae.shifted_operators(fam, 3.0, 0.5, np.zeros(32), eps=0.5)
    np.testing.assert_array_equal(A, Av)
    A, _ = ae.shifted_operators(fam, 1.0, 0.0, np.zeros(32), eps=0.5)
    np.testing.assert_allclose(A, fam.matrix(1.0) + np.eye(32), atol=1e-12)
    with pytest.raises(FamilyError):
        ae.shifted_operators(fam, 1.0, 0.0, np.full(32, 1.2))
    with pytest.raises(FamilyError):
        ae.shifted_operators(fam, 1.0, 0.0, np.full(32, -0.1), eps=0.5)


@given(st.integers(0, 2 ** 31), st.integers(1, 2), st.floats(1.0, 10.0), st.floats(0.0, 1.0))
def test_resolvent_identity(seed, k, t, tau):
    rng = np.random.default_rng(seed)
    H = ae.random_spd_instance(rng, 12)
    v = rng.uniform(0, 0.9, 12)
    A, Av = ae.shifted_operators(H, t, tau, v, k)
    Ai, Avi = np.linalg.inv(A), np.linalg.inv(Av)
    c = t ** (2 * k)
    lhs = Ai - Avi
    scale = max(1.0, np.abs(lhs).max())
    assert np.abs(lhs - Ai @ np.diag(v * v * c) @ Avi).max() <= 1e-9 * scale
    assert np.abs(lhs - Avi @ np.diag(v * v * c) @ Ai).max() <= 1e-9 * scale


def well_pair(N=256):
    A = ae.preset_family("tanh-well", N, 2 * math.pi)
    B = ae.preset_family("tanh-well", N * 3 // 2, 3 * math.pi, bump_amp=1.0,
                         bump_center=3 * math.pi - 1.2, bump_width=0.8)
    return A, B


def test_trace_difference_identical_families_vanish():
    A, _ = well_pair()
    v = ae.smoothstep_cutoff(A, 0.5, 1.5, 2.5)
    r = ae.trace_difference_experiment(A, A, v, v, [8.0, 16.0], window=2.6)
    assert np.all(r.scaled == 0.0)


def test_trace_difference_decays_for_matched_pair():
    A, B = well_pair()
    vA, vB = ae.smoothstep_cutoff(A, 0.5, 1.5, 2.5), ae.smoothstep_cutoff(B, 0.5, 1.5, 2.5)
    r = ae.trace_difference_experiment(A, B, vA, vB, np.geomspace(8, 64, 9), window=2.6)
    assert r.decays
    assert r.resolved >= 3


def test_trace_difference_window_mismatch():
    A, B = well_pair()
    vA, vB = ae.smoothstep_cutoff(A, 0.5, 1.5, 2.5), ae.smoothstep_cutoff(B, 0.5, 1.5, 2.5)
    with pytest.raises(FamilyError, match="window-mismatch"):
        ae.trace_difference_experiment(A, B, vA, vB, [8.0], window=3.0)  # reaches the bump
    C = ae.preset_family("tanh-well", 300, 2 * math.pi)
    with pytest.raises(FamilyError, match="spacing"):
        ae.trace_difference_experiment(A, C, vA, ae.smoothstep_cutoff(C, 0.5, 1.5, 2.5), [8.0])
    D = ae.preset_family("flat-arc", 384, 3 * math.pi, arc=0.2)
    with pytest.raises(FamilyError):
        ae.trace_difference_experiment(A, D, vA, ae.smoothstep_cutoff(D, 0.5, 1.5, 2.5), [8.0],
                                       window=2.6)


def test_constant_cutoff_on_positive_potential_is_order_t_minus_2k():
    # finite grids: t^{2k}·Tr[A^{-1} - A_v^{-1}] -> N ε² / ((1+τ)(1+τ+ε²)), bounded but nonzero
    N, eps, tau = 64, 0.5, 0.5
    fam = ae.preset_family("constant", N, level=1.0)
    v = np.full(N, eps)
    limit = N * eps ** 2 / ((1 + tau) * (1 + tau + eps ** 2))
    vals = []
    for t in (1e2, 1e3, 1e4):
        A, Av = ae.shifted_operators(fam, t, tau, v)
        vals.append(t * t * np.trace(np.linalg.inv(A) - np.linalg.inv(Av)))
    errs = [abs(x - limit) for x in vals]
    assert errs[-1] < 1e-2 * limit and errs[2] < errs[0]


def test_fit_synthetic_examples():
    t = np.concatenate([np.geomspace(8, 64, 17), -np.geomspace(8, 64, 17)])
    f = ae.fit_nice_expansion(t, 2 * t + 3 * np.log(np.abs(t)) + 1)
    for s in (1, -1):
        assert f.a_coeffs[s][1] == pytest.approx(2, abs=1e-6)
        assert f.b_coeffs[s][0] == pytest.approx(3, abs=1e-6)
        assert f.a_coeffs[s][0] == pytest.approx(1, abs=1e-6)
    f = ae.fit_nice_expansion(t, t ** 2)
    assert f.a_coeffs[1][2] == pytest.approx(1, abs=1e-6)
    assert f.a_coeffs[-1][2] == pytest.approx(1, abs=1e-6)
    assert abs(f.free_term_sum) <= 1e-6


def test_fit_preconditions():
    t = np.concatenate([np.geomspace(8, 64, 17), -np.geomspace(8, 64, 17)])
    with pytest.raises(FamilyError, match="samples"):
        ae.fit_nice_expansion(t[::4], t[::4])
    narrow = np.concatenate([np.linspace(8, 9, 17), -np.linspace(8, 9, 17)])
    with pytest.raises(FamilyError, match="widen"):
        ae.fit_nice_expansion(narrow, narrow)
    with pytest.raises(FamilyError, match="condition"):
        ae.fit_nice_expansion(t, t, cond_max=10.0)


def test_fit_constant_family_log_det():
    fam = ae.preset_family("constant", 256)
    mags = ae.default_t_grid()
    ts = np.concatenate([mags, -mags])
    vals = []
    for t in ts:
        lam = fam.eigenvalues(t)
        vals.append(float(np.sum(np.log(lam[lam > 1] + t * t))))
    f = ae.fit_nice_expansion(ts, vals)
    assert f.residual <= 0.01 * abs(f.a_coeffs[1][0])


def test_comparison_identical_families():
    fam = ae.preset_family("cosine-well", 64)
    r = ae.comparison_theorem_experiment(fam, fam)
    assert np.all(r.values == 0.0)
    assert r.fit.residual == 0.0 and r.fit.free_term_sum == 0.0 and r.passed


def test_comparison_requires_common_spacing():
    with pytest.raises(FamilyError):
        ae.comparison_theorem_experiment(ae.preset_family("tanh-well", 64),
                                         ae.preset_family("tanh-well", 100))
