"""Witten deformation ``d_t = e^{-tf} d e^{tf}``, spectral splitting and torsion factorization."""
import math
from dataclasses import dataclass, field

import numpy as np

from .complex_core import (CochainComplex, ComplexError, laplacian, spectrum, torsion,
                           with_grams)
from . import morse

OVERFLOW_GUARD = 300.0
COLLISION_REL = 1e-6
INVARIANCE_TOL = 1e-9


class SplitError(ValueError):
    """Threshold collides with the spectrum, or the split fails a consistency check."""


@dataclass
class MorseWeighting:
    """Per-degree values of ``f`` on basis vectors, with optional critical flags.

    ``multiplicity`` is the number of basis vectors per cell (2 for a
    realified rank-one twist); counts ``m_i`` are per cell.
    """
    values: list
    critical_flags: list = None
    multiplicity: int = 1

    def __post_init__(self):
        self.values = [np.asarray(v, dtype=float) for v in self.values]
        if self.critical_flags is not None:
            self.critical_flags = [np.asarray(c, dtype=bool) for c in self.critical_flags]
            if [len(c) for c in self.critical_flags] != [len(v) for v in self.values]:
                raise ValueError("critical flags must match values in every degree")
            if any(int(c.sum()) % self.multiplicity for c in self.critical_flags):
                raise ValueError("critical flags must cover whole cells")

    @property
    def counts(self):
        if self.critical_flags is None:
            return None
        return [int(c.sum()) // self.multiplicity for c in self.critical_flags]

    def negated(self):
        return MorseWeighting([-v for v in self.values], self.critical_flags, self.multiplicity)

    def check(self, c):
        if [len(v) for v in self.values] != c.dims:
            raise ValueError(
                f"weighting lengths {[len(v) for v in self.values]} do not match dims {c.dims}"
            )


def deform(c, w, t):
    """Complex with ``d^i_t = E_{i+1}^{-t} d^i E_i^{t}``, ``E_i = diag(e^{f})``; Grams unchanged."""
    w.check(c)
    t = float(t)
    worst = max((float(np.abs(t * v).max()) for v in w.values if v.size), default=0.0)
    if worst > OVERFLOW_GUARD:
        raise ValueError(f"|t f| = {worst:.4g} exceeds {OVERFLOW_GUARD}; rescale f or t")
    if t == 0.0:
        return c
    diffs = []
    for i, d in enumerate(c.d):
        diffs.append(np.exp(-t * w.values[i + 1])[:, None] * d * np.exp(t * w.values[i])[None, :])
    # diagonal conjugation preserves ranks exactly; inherit them
    return CochainComplex(c.dims, diffs, c.grams, c.rank_divisor, validate=False, ranks=c.ranks)


def witten_laplacian(c, w, t, i):
    return laplacian(deform(c, w, t), i)


def conjugated_laplacian_check(c, w, t):
    """Max relative spectral gap between Δ_{f,t} and the Laplacian of (d, e^{-2tf} g)."""
    ct = deform(c, w, t)
    grams = []
    for i, g in enumerate(c.grams):
        e = np.exp(-float(t) * w.values[i])
        grams.append(e[:, None] * g * e[None, :])
    cg = with_grams(c, grams)
    worst = 0.0
    for i in range(c.n + 1):
        a = spectrum(ct, i).eigenvalues
        b = spectrum(cg, i).eigenvalues
        den = np.maximum(np.abs(a), np.abs(b))
        rel = np.where(den > 0, np.abs(a - b) / np.where(den > 0, den, 1.0), 0.0)
        if rel.size:
            worst = max(worst, float(rel.max()))
    return worst


@dataclass
class SpectralSplit:
    threshold: float
    t: float
    small: list
    large: list
    projector_small: list
    projector_large: list
    gap_ratio: list
    invariance_residual: float
    kernel_dims: list = field(default_factory=list)
    small_singular_values: list = field(default_factory=list)
    _bases: list = field(default_factory=list, repr=False)

    @property
    def cluster_counts(self):
        return [len(s) for s in self.small]

    @property
    def global_gap_ratio(self):
        """min over degrees of large eigenvalues / max over degrees of small ones."""
        smalls = [float(s.max()) for s in self.small if s.size]
        larges = [float(s.min()) for s in self.large if s.size]
        if not smalls or not larges:
            return math.inf
        top = max(smalls)
        return math.inf if top == 0.0 else min(larges) / top


def _orthonormal_laplacian(ct, i):
    lap = np.zeros((ct.dims[i], ct.dims[i]))
    if i > 0:
        D = ct.orthonormal_differential(i - 1)
        lap += D @ D.T
    if i < ct.n:
        D = ct.orthonormal_differential(i)
        lap += D.T @ D
    return 0.5 * (lap + lap.T)


def spectral_split(c, w, t, threshold=1.0):
    """Split each degree's Witten-Laplacian spectrum at ``threshold``.

    Eigenvalues (and the cluster sizes) come from the accurate singular-value
    route; the spectral subspaces come from a symmetric eigendecomposition.
    """
    if threshold <= 0:
        raise SplitError("threshold must be positive")
    ct = deform(c, w, t)
    small, large, psm, pla, gaps, kdims, bases = [], [], [], [], [], [], []
    collisions = []
    for i in range(c.n + 1):
        sp = spectrum(ct, i)
        ev = sp.eigenvalues
        near = ev[np.abs(ev - threshold) <= COLLISION_REL * threshold]
        if near.size:
            collisions.append((i, near.tolist()))
        small.append(ev[ev < threshold])
        large.append(ev[ev >= threshold])
        kdims.append(sp.kernel_dim)
    if collisions:
        raise SplitError(f"threshold {threshold} collides with eigenvalues at t={t}: {collisions}")
    for i in range(c.n + 1):
        ns = len(small[i])
        n = c.dims[i]
        if n == 0:
            Q = np.zeros((0, 0))
        else:
            vals, vecs = np.linalg.eigh(_orthonormal_laplacian(ct, i))
            Q = vecs[:, :ns]
        bases.append(Q)
        Pt = Q @ Q.T
        L = ct._chol(i) if n else np.zeros((0, 0))
        if n:
            Psm = np.linalg.solve(L.T, Pt @ L.T)
        else:
            Psm = np.zeros((0, 0))
        psm.append(Psm)
        pla.append(np.eye(n) - Psm)
        if small[i].size and large[i].size:
            top = float(small[i].max())
            gaps.append(math.inf if top == 0.0 else float(large[i].min()) / top)
        else:
            gaps.append(math.inf)
    resid = 0.0
    for i in range(c.n):
        D = ct.orthonormal_differential(i)
        if D.size == 0:
            continue
        Q0, Q1 = bases[i], bases[i + 1]
        leak = D @ Q0 - Q1 @ (Q1.T @ (D @ Q0))
        scale = max(1.0, float(np.linalg.norm(D, 2)))
        if leak.size:
            resid = max(resid, float(np.linalg.norm(leak, 2)) / scale)
    if resid > INVARIANCE_TOL:
        raise SplitError(f"small subspace is not d_t-invariant (residual {resid:.3g})")
    svs = []
    for i in range(c.n):
        s, _ = ct.singular_values(i)
        svs.append(s[s * s < threshold])
    return SpectralSplit(float(threshold), float(t), small, large, psm, pla, gaps, resid,
                         kdims, svs, bases)


@dataclass
class SplitTorsions:
    log_rho_sm: float
    log_rho_la: float
    log_rho_total: float

    @property
    def residual(self):
        return abs(self.log_rho_total - (self.log_rho_sm + self.log_rho_la))


def small_complex_adapted(c, split):
    """The small subcomplex in the singular-vector basis.

    In degree ``i`` the basis is kernel, then left vectors of the small
    singular values of ``D^{i-1}``, then right vectors of those of ``D^i``;
    the differential is diagonal with the small singular values.
    """
    n = c.n
    s = split.small_singular_values
    dims = []
    for i in range(n + 1):
        a = len(s[i - 1]) if i > 0 else 0
        b = len(s[i]) if i < n else 0
        dims.append(split.kernel_dims[i] + a + b)
    diffs = []
    for i in range(n):
        D = np.zeros((dims[i + 1], dims[i]))
        k = len(s[i])
        r0 = split.kernel_dims[i + 1]
        c0 = dims[i] - k
        D[r0:r0 + k, c0:c0 + k] = np.diag(s[i])
        diffs.append(D)
    return CochainComplex(dims, diffs, rank_divisor=c.rank_divisor, validate=False,
                          ranks=[len(v) for v in s])


def small_complex_explicit(c, w, t, split):
    """The small subcomplex by restricting ``d_t`` to eigenvector bases (cross-check)."""
    ct = deform(c, w, t)
    B = split._bases
    diffs = [B[i + 1].T @ ct.orthonormal_differential(i) @ B[i] for i in range(c.n)]
    return CochainComplex([b.shape[1] for b in B], diffs, rank_divisor=c.rank_divisor,
                          validate=False, ranks=[len(v) for v in split.small_singular_values])


def split_torsions(c, w, t, split):
    """``(log ρ_sm, log ρ_la, log ρ_total)`` at ``t`` for the given split."""
    ct = deform(c, w, t)
    total = torsion(ct).log_rho
    la = 0.0
    for i, lv in enumerate(split.large):
        la += 0.5 * (-1) ** i * i * float(np.sum(np.log(lv)))
    la /= c.rank_divisor
    sm = torsion(small_complex_adapted(c, split)).log_rho
    return SplitTorsions(sm, la, total)


def morse_supertrace(w, rk=1):
    """``(Σ_B (-1)^{ind} f(x), rk Σ_B (-1)^{ind} ind)`` over critical cells."""
    if w.critical_flags is None:
        raise ValueError("critical flags required for the Morse supertrace")
    tr = 0.0
    chi = 0
    for i, (vals, flags) in enumerate(zip(w.values, w.critical_flags)):
        tr += (-1) ** i * float(vals[flags].sum()) / w.multiplicity
        chi += (-1) ** i * i * int(flags.sum()) // w.multiplicity
    return tr, rk * chi


def circle_weighting(N, fn=np.cos, rank=1, length=2 * math.pi):
    """Weighting ``f`` sampled at vertices and edge midpoints of the N-cell circle.

    Critical flags come from the descending vertex gradient.
    """
    xv, xe = morse.circle_sample_points(N, length)
    fv, fe = fn(xv), fn(xe)
    cc = morse.circle_cell_complex(N, 0.0, 1)
    dm = morse.graph_gradient_matching(cc, fv)
    flags = [np.zeros(N, bool), np.zeros(N, bool)]
    for k, i in dm.critical_cells:
        flags[k][i] = True
    rep = lambda a: np.repeat(a, rank)  # noqa: E731
    return MorseWeighting([rep(fv), rep(fe)], [rep(flags[0]), rep(flags[1])], rank)


def witten_circle(N=256, alpha=0.5, rank=1, fn=np.cos, length=2 * math.pi):
    """Twisted circle with lattice Grams and a cell-sampled weighting."""
    c = morse.circle_complex(N, alpha, rank, metric="geometric", length=length)
    return c, circle_weighting(N, fn, rank, length)
