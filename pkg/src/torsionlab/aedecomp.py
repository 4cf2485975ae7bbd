"""Operator families ``H_t = A + tB + t²V`` on periodic 1-D grids.

Covers the spectral projector onto eigenvalues above 1, the determinant
decomposition ``k log det'(H P) = log det'((H^k + t^{2k}) P) - t^{2k} ∫₀¹
Tr[(H^k + τ t^{2k})^{-1} P] dτ``, the v-shifted resolvents, and fits of
``Σ a_j t^j + Σ b_j t^j log|t|`` expansions.
"""
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

COLLISION_TOL = 1e-8


class FamilyError(ValueError):
    pass


# --- families ---------------------------------------------------------------

@dataclass
class ParametricOperatorFamily:
    N: int
    length: float
    B: np.ndarray
    V: np.ndarray
    k: int = 1
    f: np.ndarray = None
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.N < 16:
            raise FamilyError("N >= 16 required")
        self.B = np.asarray(self.B, dtype=float)
        self.V = np.asarray(self.V, dtype=float)
        if self.B.shape != (self.N,) or self.V.shape != (self.N,):
            raise FamilyError("B and V need one sample per grid point")
        if np.any(self.V < 0):
            raise FamilyError(f"V has negative samples (min {self.V.min():.3g})")
        if self.k < 1:
            raise FamilyError("k >= 1 required")

    @property
    def h(self):
        return self.length / self.N

    @property
    def x(self):
        return np.arange(self.N) * self.h

    @property
    def center(self):
        """Grid index used to align local windows between families."""
        return self.N // 2

    @property
    def local_x(self):
        return (np.arange(self.N) - self.center) * self.h

    @property
    def degenerate_set(self):
        """Grid indices where V vanishes (relative to its maximum)."""
        vmax = float(self.V.max()) if self.V.size else 0.0
        return np.flatnonzero(self.V <= 1e-12 * max(vmax, 1e-300))

    @property
    def A(self):
        """Periodic second difference ``(2u_j - u_{j-1} - u_{j+1}) / h²`` (dense)."""
        N, h = self.N, self.h
        A = 2.0 * np.eye(N)
        idx = np.arange(N)
        A[idx, (idx + 1) % N] -= 1.0
        A[idx, (idx - 1) % N] -= 1.0
        return A / (h * h)

    def matrix(self, t):
        t = float(t)
        return self.A + np.diag(t * self.B + t * t * self.V)

    def eigenvalues(self, t):
        """Eigenvalues of H_t (ascending) from the banded zig-zag reordering."""
        return _periodic_tridiag_eigvals(2.0 / self.h ** 2 + t * self.B + t * t * self.V,
                                         -1.0 / self.h ** 2)

    def critical_structure(self):
        """``[(index, f)]`` at the zeros of V: index 0 where B < 0 (a well), else 1."""
        if self.f is None:
            return None
        out = []
        for j in self.degenerate_set:
            out.append((0 if self.B[j] < 0 else 1, float(self.f[j])))
        return out


def _zigzag(N):
    order = [0]
    a, b = 1, N - 1
    while a <= b:
        order.append(a)
        if a != b:
            order.append(b)
        a += 1
        b -= 1
    return np.array(order)


def _periodic_tridiag_eigvals(diag, off):
    """Eigenvalues of the symmetric periodic tridiagonal matrix, via bandwidth 2."""
    N = len(diag)
    order = _zigzag(N)
    pos = np.empty(N, dtype=int)
    pos[order] = np.arange(N)
    ab = np.zeros((3, N))
    ab[0] = diag[order]
    for j in range(N):
        p, q = sorted((pos[j], pos[(j + 1) % N]))
        ab[q - p, p] = off
    return sla.eigvals_banded(ab, lower=True)


def build_family_1d(N, length, b_fn, v_fn, k=1, f_fn=None, name="", params=None):
    """Sample ``B = b_fn(x)``, ``V = v_fn(x)`` on ``x_j = j h``, ``h = length / N``."""
    h = length / N
    x = np.arange(N) * h
    f = None if f_fn is None else np.asarray(f_fn(x), dtype=float)
    return ParametricOperatorFamily(int(N), float(length), np.asarray(b_fn(x), float)
                                    * np.ones(N), np.asarray(v_fn(x), float) * np.ones(N),
                                    int(k), f, name, dict(params or {}))


def bump(x, center, width):
    """Smooth compactly supported bump with peak 1 at ``center``."""
    y = (np.asarray(x, dtype=float) - center) / width
    out = np.zeros_like(y)
    inside = np.abs(y) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - y[inside] ** 2))
    return out


PRESETS = ("constant", "cosine-well", "flat-arc", "tanh-well")


def preset_family(preset, N, length=2 * math.pi, k=1, **opts):
    """Named families.

    constant     V ≡ level (default 1), B ≡ 0.
    cosine-well  f = cos(ωx), ω = 2π/length: V = f'², B = -f''.
    flat-arc     V = 0 on ``|x - c| <= arc`` and tanh²(distance beyond it) outside, B ≡ 0.
    tanh-well    f = log cosh(x - c) + f_offset with c = length/2: V = tanh², B = -sech².

    Every preset accepts an added B bump: ``bump_amp``, ``bump_center``
    (absolute coordinate), ``bump_width``.
    """
    c = length / 2
    amp = float(opts.get("bump_amp", 0.0))
    bc = float(opts.get("bump_center", c))
    bw = float(opts.get("bump_width", 1.0))
    off = float(opts.get("f_offset", 0.0))

    def with_bump(bfn):
        return lambda x: bfn(x) + amp * bump(x, bc, bw)

    if preset == "constant":
        level = float(opts.get("level", 1.0))
        b, v, f = (lambda x: 0.0 * x), (lambda x: level + 0.0 * x), None
    elif preset == "cosine-well":
        w = 2 * math.pi / length
        b = lambda x: w * w * np.cos(w * x)  # noqa: E731
        v = lambda x: (w * np.sin(w * x)) ** 2  # noqa: E731
        f = lambda x: np.cos(w * x) + off  # noqa: E731
    elif preset == "flat-arc":
        arc = float(opts.get("arc", 0.5))
        b = lambda x: 0.0 * x  # noqa: E731
        v = lambda x: np.tanh(np.maximum(np.abs(x - c) - arc, 0.0)) ** 2  # noqa: E731
        f = None
    elif preset == "tanh-well":
        b = lambda x: -1.0 / np.cosh(x - c) ** 2  # noqa: E731
        v = lambda x: np.tanh(x - c) ** 2  # noqa: E731
        f = lambda x: np.log(np.cosh(x - c)) + off  # noqa: E731
    else:
        raise FamilyError(f"unknown preset {preset!r}; choose from {PRESETS}")
    params = {"preset": preset, "N": N, "length": length, "k": k, **opts}
    return build_family_1d(N, length, with_bump(b), v, k, f, preset, params)


# --- projector --------------------------------------------------------------

@dataclass
class ProjectorData:
    t: float
    threshold: float
    projector: np.ndarray
    m: int
    eigenvalues: np.ndarray


def _as_matrix(op, t):
    """``op`` is a family, a callable ``t -> H_t`` or a fixed symmetric matrix."""
    if isinstance(op, ParametricOperatorFamily):
        return op.matrix(t)
    if callable(op):
        return np.asarray(op(t), dtype=float)
    return np.asarray(op, dtype=float)


def _eigenvalues(op, t):
    if isinstance(op, ParametricOperatorFamily):
        return op.eigenvalues(t)
    H = _as_matrix(op, t)
    return np.linalg.eigvalsh(0.5 * (H + H.T))


def projector_above_one(op, t, threshold=1.0):
    """Orthogonal projector onto eigenvectors of H_t with eigenvalue > ``threshold``."""
    H = _as_matrix(op, t)
    lam, U = np.linalg.eigh(0.5 * (H + H.T))
    near = lam[np.abs(lam - threshold) <= COLLISION_TOL]
    if near.size:
        raise FamilyError(f"eigenvalue {near[0]!r} within {COLLISION_TOL} of {threshold} at t={t}")
    keep = lam > threshold
    Uk = U[:, keep]
    return ProjectorData(float(t), float(threshold), Uk @ Uk.T, int((~keep).sum()), lam)


# --- determinant decomposition ----------------------------------------------

_GL = {n: np.polynomial.legendre.leggauss(n) for n in (10, 20)}


def _gl(fn, a, b, n):
    x, w = _GL[n]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * sum(wi * fn(mid + half * xi) for xi, wi in zip(x, w))


def adaptive_gauss_legendre(fn, a, b, rel_tol=1e-10, max_depth=60):
    """Integrate by 10/20-point Gauss–Legendre with interval bisection.

    An interval is accepted when the two rules agree to ``rel_tol`` relative
    to the running total; returns ``(value, error_estimate, evaluations)``.
    """
    total = 0.0
    err = 0.0
    evals = 0
    stack = [(a, b, 0)]
    coarse_scale = abs(_gl(fn, a, b, 20))
    evals += 20
    while stack:
        lo, hi, depth = stack.pop()
        g10 = _gl(fn, lo, hi, 10)
        g20 = _gl(fn, lo, hi, 20)
        evals += 30
        diff = abs(g20 - g10)
        scale = max(coarse_scale, abs(total) + abs(g20), 1e-300)
        if diff <= rel_tol * scale or depth >= max_depth:
            if depth >= max_depth and diff > rel_tol * scale:
                raise FamilyError(f"quadrature did not converge on [{lo}, {hi}] (err {diff:.3g})")
            total += g20
            err += diff
        else:
            m = 0.5 * (lo + hi)
            stack.append((m, hi, depth + 1))
            stack.append((lo, m, depth + 1))
    return total, err, evals


@dataclass
class AedelResult:
    lhs: float
    rhs: float
    rhs_closed: float
    residual: float
    quad_error: float
    m: int

    @property
    def three_way(self):
        return max(abs(self.lhs - self.rhs), abs(self.lhs - self.rhs_closed),
                   abs(self.rhs - self.rhs_closed))


def aedel_decomposition(op, t, k=None, quad_tol=1e-10, threshold=1.0):
    """Both sides of the determinant decomposition at ``t``.

    ``lhs`` is the direct eigen-sum ``k Σ log λ`` over eigenvalues above the
    threshold.  ``rhs`` uses adaptive quadrature of the resolvent trace
    computed by Cholesky solves; ``rhs_closed`` uses the exact integral
    ``t^{-2k} Σ log((λ^k + t^{2k}) / λ^k)``.
    """
    if k is None:
        k = op.k if isinstance(op, ParametricOperatorFamily) else 1
    H = _as_matrix(op, t)
    pd = projector_above_one(H, t, threshold)
    lam = pd.eigenvalues[pd.eigenvalues > threshold]
    c = float(t) ** (2 * k)
    lhs = k * float(np.sum(np.log(lam)))
    head = float(np.sum(np.log(lam ** k + c)))
    closed = float(np.sum(np.log1p(c / lam ** k)))
    P = pd.projector
    n = H.shape[0]
    # H^k on range(P), identity on its complement: SPD, and the trace on range(P) is unchanged
    K = np.linalg.matrix_power(0.5 * (H + H.T), k) @ P + (np.eye(n) - P)
    K = 0.5 * (K + K.T)

    def trace_at(tau):
        cf = sla.cho_factor(K + tau * c * np.eye(n))
        return float(np.trace(sla.cho_solve(cf, P)))

    integral, qerr, _ = adaptive_gauss_legendre(trace_at, 0.0, 1.0, quad_tol)
    rhs = head - c * integral
    rhs_closed = head - closed
    res = abs(lhs - rhs)
    return AedelResult(lhs, rhs, rhs_closed, res, c * qerr, pd.m)


def random_spd_instance(rng, n, low=0.05, high=50.0):
    """Random SPD matrix with log-uniform spectrum kept away from 1."""
    lam = np.exp(rng.uniform(math.log(low), math.log(high), n))
    lam[np.abs(lam - 1.0) < 1e-3] += 2e-3
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    H = (q * lam) @ q.T
    return 0.5 * (H + H.T)


# --- trace bound --------------------------------------------------------------

@dataclass
class TraceBound:
    max_trace: float
    sup_over_eps: np.ndarray
    t_grid: np.ndarray
    slope: float

    @property
    def bounded(self):
        return self.slope <= 0.0


def trace_bound_check(op, k, eps_grid, t_grid, threshold=1.0):
    """``Tr[(H_t^k + ε)^{-1} P_t]`` over the grids; slope of the ε-sup against t."""
    t_grid = np.asarray(t_grid, dtype=float)
    sups = []
    for t in t_grid:
        lam = _eigenvalues(op, t)
        lam = lam[lam > threshold]
        sups.append(max(float(np.sum(1.0 / (lam ** k + e))) for e in eps_grid))
    sups = np.array(sups)
    slope = float(np.polyfit(t_grid, sups, 1)[0]) if len(t_grid) > 1 else 0.0
    return TraceBound(float(sups.max()), sups, t_grid, slope)


# --- projector bookkeeping ------------------------------------------------------

def ld_dp_defect(op, t, k=None, threshold=1.0):
    """``log det'[(H^k+t^{2k})P] - log det(H^k+t^{2k}) + 2k m log|t|``."""
    if k is None:
        k = op.k if isinstance(op, ParametricOperatorFamily) else 1
    lam = _eigenvalues(op, t)
    small = lam[lam <= threshold]
    c = float(t) ** (2 * k)
    # the large-eigenvalue terms cancel exactly; what is left is -Σ_small log(1 + λ^k/c)
    return float(-np.sum(np.log1p(small ** k / c))), len(small)


# --- shifted operators ------------------------------------------------------

def shifted_operators(op, t, tau, v_cutoff, k=None, eps=None):
    """``A_{t,τ} = H^k + τ t^{2k} + |t|^{-k}`` and ``A_{t,τ,v} = A_{t,τ} + v² t^{2k}``."""
    if k is None:
        k = op.k if isinstance(op, ParametricOperatorFamily) else 1
    v = np.asarray(v_cutoff, dtype=float)
    eps = float(v.max()) if eps is None else float(eps)
    if eps >= 1.0 or np.any(v < 0) or np.any(v > eps):
        raise FamilyError("v_cutoff must satisfy 0 <= v <= eps < 1")
    H = _as_matrix(op, t)
    c = abs(float(t)) ** (2 * k)
    A = np.linalg.matrix_power(H, k) + (tau * c + abs(float(t)) ** (-k)) * np.eye(H.shape[0])
    Av = A + np.diag(v * v * c)
    return A, Av


def smoothstep_cutoff(fam, eps, inner, outer):
    """``v = eps`` on ``|x_loc| <= inner``, smoothstep down to 0 at ``outer``."""
    r = np.abs(fam.local_x)
    s = np.clip((outer - r) / (outer - inner), 0.0, 1.0)
    return eps * s * s * (3.0 - 2.0 * s)


@dataclass
class TraceDifference:
    t_grid: np.ndarray
    tau_grid: np.ndarray
    scaled: np.ndarray  # shape (len(t), len(tau))
    noise_floor: np.ndarray  # per t, rounding level of the scaled difference
    slope: float

    @property
    def envelope(self):
        return np.abs(self.scaled).max(axis=1)

    @property
    def resolved(self):
        """Number of t values whose envelope sits above the rounding floor."""
        return int(np.sum(self.envelope > self.noise_floor))

    @property
    def decays(self):
        return self.slope < 0.0 and self.resolved >= 2


def _window_trace(A, Av, v, c):
    S = np.flatnonzero(v)
    if S.size == 0:
        return 0.0
    n = A.shape[0]
    E = np.zeros((n, S.size))
    E[S, np.arange(S.size)] = 1.0
    # lattice H_t can dip slightly below zero, so A need not be definite
    X = sla.lu_solve(sla.lu_factor(A), E)
    Y = sla.lu_solve(sla.lu_factor(Av), E)
    # Tr[A^{-1} v² c A_v^{-1}] = c Σ_j v_j² (A^{-1} e_j)·(A_v^{-1} e_j)
    return c * float(np.sum(v[S] ** 2 * np.einsum("ij,ij->j", X, Y)))


NOISE_FACTOR = 100.0


def check_window(famA, famB, window, vA, vB, tol=1e-12):
    """The two families must agree on the local window ``|x_loc| <= window``."""
    if abs(famA.h - famB.h) > 1e-14 * famA.h:
        raise FamilyError("window-mismatch: grid spacings differ")
    ia = np.flatnonzero(np.abs(famA.local_x) <= window + 1e-12)
    ib = np.flatnonzero(np.abs(famB.local_x) <= window + 1e-12)
    if ia.size != ib.size:
        raise FamilyError("window-mismatch: windows cover different numbers of points")
    for name, a, b in (("B", famA.B, famB.B), ("V", famA.V, famB.V), ("v", vA, vB)):
        if np.max(np.abs(a[ia] - b[ib])) > tol:
            raise FamilyError(f"window-mismatch: {name} differs on the common window")
    for name, fam, v, idx in (("A", famA, vA, ia), ("B", famB, vB, ib)):
        outside = np.setdiff1d(np.arange(fam.N), idx)
        if np.any(v[outside] != 0):
            raise FamilyError(f"window-mismatch: v of family {name} leaks outside the window")
        if np.any(fam.V[outside] <= 0):
            raise FamilyError(f"window-mismatch: V of family {name} vanishes outside the window")


DEFAULT_TAU = (0.05, 0.25, 0.5, 1.0)


def trace_difference_experiment(famA, famB, vA, vB, t_grid, tau_grid=DEFAULT_TAU, window=1.0, k=1):
    """``t^{2k}(Tr[A^{-1} - A_v^{-1}] - Tr[Ã^{-1} - Ã_v^{-1}])`` over (t, τ).

    ``slope`` is the log-log slope of the τ-maximum over the last decade of t.
    The default τ grid avoids τ = 0, where the lattice ground state of H_t
    (of size ~t²h², below zero) can cancel the ``|t|^{-k}`` shift.
    """
    check_window(famA, famB, window, vA, vB)
    t_grid = np.asarray(t_grid, dtype=float)
    tau_grid = np.asarray(tau_grid, dtype=float)
    out = np.zeros((len(t_grid), len(tau_grid)))
    floor = np.zeros(len(t_grid))
    eps = np.finfo(float).eps
    for a, t in enumerate(t_grid):
        c = abs(t) ** (2 * k)
        for b, tau in enumerate(tau_grid):
            AA, AAv = shifted_operators(famA, t, tau, vA, k)
            BB, BBv = shifted_operators(famB, t, tau, vB, k)
            ta, tb = _window_trace(AA, AAv, vA, c), _window_trace(BB, BBv, vB, c)
            out[a, b] = c * (ta - tb)
            floor[a] = max(floor[a], NOISE_FACTOR * eps * c * (abs(ta) + abs(tb)))
    env = np.maximum(np.abs(out).max(axis=1), np.maximum(floor, 1e-300))
    last = np.abs(t_grid) >= np.abs(t_grid).max() / 10.0
    if last.sum() >= 2:
        slope = float(np.polyfit(np.log(np.abs(t_grid[last])), np.log(env[last]), 1)[0])
    else:
        slope = 0.0
    return TraceDifference(t_grid, tau_grid, out, floor, slope)


# --- expansion fitting ------------------------------------------------------

@dataclass
class AsymptoticFit:
    a_coeffs: dict
    b_coeffs: dict
    residual: float
    J: int
    remainder_coeffs: dict = field(default_factory=dict)
    condition: float = 0.0
    dominant: float = 0.0

    @property
    def free_term_sum(self):
        return float(self.a_coeffs[1][0] + self.a_coeffs[-1][0])


def _design(t, J, R):
    at = np.abs(t)
    cols = [np.ones_like(t)] + [t ** j for j in range(1, J + 1)]
    cols += [t ** j * np.log(at) for j in range(J + 1)]
    cols += [at ** (-q) for q in range(1, R + 1)]
    return np.array(cols).T


MIN_SPAN = 8.0


def fit_nice_expansion(t, values, J=3, remainder_powers=0, cond_max=1e12):
    """Least-squares ``Σ_{j≤J} a_j(σ) t^j + Σ_{j≤J} b_j(σ) t^j log|t|`` per sign σ.

    ``remainder_powers = R`` adds nuisance columns ``|t|^{-1..R}`` that absorb
    the decaying remainder; they are reported but are not part of ``a_j``.
    Columns are scaled to unit max before solving.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(values, dtype=float)
    npar = 2 * (J + 1) + remainder_powers
    a, b, r = {}, {}, {}
    resid = 0.0
    cond = 0.0
    for sgn in (1, -1):
        sel = np.sign(t) == sgn
        ts, ys = t[sel], y[sel]
        if ts.size < max(2 * (J + 1) + 2, npar + 2):
            raise FamilyError(f"need at least {max(2 * (J + 1) + 2, npar + 2)} samples per sign")
        span = np.abs(ts).max() / np.abs(ts).min()
        if span < MIN_SPAN:
            raise FamilyError(f"|t| spans a factor {span:.3g} < {MIN_SPAN}; widen the window")
        M = _design(ts, J, remainder_powers)
        sc = np.abs(M).max(axis=0)
        Ms = M / sc
        cs = np.linalg.cond(Ms)
        cond = max(cond, float(cs))
        if cs > cond_max:
            raise FamilyError(f"design matrix condition {cs:.3g} > {cond_max:.3g}; widen the t range")
        coef, *_ = np.linalg.lstsq(Ms, ys, rcond=None)
        coef = coef / sc
        resid = max(resid, float(np.max(np.abs(M @ coef - ys))) if ys.size else 0.0)
        a[sgn] = coef[:J + 1]
        b[sgn] = coef[J + 1:2 * (J + 1)]
        r[sgn] = coef[2 * (J + 1):]
    dominant = float(np.max(np.abs(y))) if y.size else 0.0
    return AsymptoticFit(a, b, resid, J, r, cond, dominant)


# --- comparison -----------------------------------------------------------------

def lattice_log_det_prime(fam, t, threshold=1.0, normalize="lattice"):
    """``Σ log(h² λ)`` over eigenvalues above the threshold (``"raw"``: ``Σ log λ``)."""
    lam = fam.eigenvalues(t)
    keep = lam[lam > threshold]
    if normalize == "lattice":
        val = float(np.sum(np.log(fam.h ** 2 * keep)))
    elif normalize == "raw":
        val = float(np.sum(np.log(keep)))
    else:
        raise FamilyError(f"unknown normalization {normalize!r}")
    return val, int(lam.size - keep.size)


@dataclass
class ComparisonResult:
    fit: AsymptoticFit
    t: np.ndarray
    values: np.ndarray
    m_A: dict
    m_B: dict
    residual_ok: bool
    free_term_ok: bool
    free_term_scale: float

    @property
    def passed(self):
        return self.residual_ok and self.free_term_ok


def default_t_grid(t_min=8.0, t_max=64.0, points=17):
    return np.geomspace(t_min, t_max, points)


def comparison_theorem_experiment(famA, famB, t_grid=None, J=3, remainder_powers=2,
                                  normalize="lattice", threshold=1.0,
                                  residual_frac=0.02, free_frac=0.05):
    """Fit ``log det'(H_t P_t) - log det'(H̃_t P̃_t)`` over ``±t_grid``.

    The ``lattice`` normalization scales each operator by ``h²`` (common
    spacing required) so the determinants carry no per-mode ``log h`` term.
    """
    if normalize == "lattice" and abs(famA.h - famB.h) > 1e-14 * famA.h:
        raise FamilyError("lattice normalization needs a common grid spacing")
    mags = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    ts = np.concatenate([mags, -mags])
    vals = np.zeros(ts.size)
    mA = {1: set(), -1: set()}
    mB = {1: set(), -1: set()}
    for i, t in enumerate(ts):
        if famA is famB:
            vals[i] = 0.0
            a_m = b_m = lattice_log_det_prime(famA, t, threshold, normalize)[1]
        else:
            va, a_m = lattice_log_det_prime(famA, t, threshold, normalize)
            vb, b_m = lattice_log_det_prime(famB, t, threshold, normalize)
            vals[i] = va - vb
        mA[int(np.sign(t))].add(a_m)
        mB[int(np.sign(t))].add(b_m)
    fit = fit_nice_expansion(ts, vals, J, remainder_powers)
    scale = max(abs(float(fit.a_coeffs[1][0])), 1e-6)
    res_ok = fit.residual <= residual_frac * fit.dominant or fit.residual <= 1e-12
    free_ok = abs(fit.free_term_sum) <= free_frac * scale
    return ComparisonResult(fit, ts, vals, mA, mB, res_ok, free_ok, scale)
