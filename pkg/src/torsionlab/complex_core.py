"""Finite cochain complexes with inner products, Laplacians and torsion."""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import kernels

DD_TOL = 1e-12
SPD_TOL = 0.0


class ComplexError(ValueError):
    """Malformed or inconsistent complex data."""


@dataclass
class ValidationReport:
    valid: bool
    max_dd_violation: float
    messages: list = field(default_factory=list)


@dataclass
class LaplacianSpectrum:
    degree: int
    eigenvalues: np.ndarray
    kernel_dim: int


@dataclass
class TorsionValue:
    log_rho: float
    per_degree_logdets: list


class CochainComplex:
    """Differentials ``d[i]: V^i -> V^{i+1}`` and Gram matrices ``G_i``.

    ``rank_divisor`` records that the real complex is a realification: a
    complex of dimension ``k`` over C realified to R^{2k} has divisor 2, and
    torsion and Euler characteristic are reported over the original field.
    ``ranks`` may be supplied when the differentials are a rank-preserving
    rescaling of a complex whose ranks are already known.
    Construct through ``CochainComplex(...)``; the instance is validated and
    treated as immutable afterwards.
    """

    def __init__(self, dims, differentials, grams=None, rank_divisor=1, validate=True,
                 ranks=None):
        self.dims = [int(n) for n in dims]
        if any(n < 0 for n in self.dims):
            raise ComplexError("negative dimension")
        if len(differentials) != max(len(self.dims) - 1, 0):
            raise ComplexError(
                f"expected {max(len(self.dims) - 1, 0)} differentials, got {len(differentials)}"
            )
        self.d = []
        for i, m in enumerate(differentials):
            m = np.array(m, dtype=float).reshape(self.dims[i + 1], self.dims[i]) \
                if np.size(m) == 0 else np.array(m, dtype=float)
            if m.shape != (self.dims[i + 1], self.dims[i]):
                raise ComplexError(
                    f"differential {i} has shape {m.shape}, expected {(self.dims[i + 1], self.dims[i])}"
                )
            self.d.append(m)
        if grams is None:
            self.grams = [np.eye(n) for n in self.dims]
        else:
            if len(grams) != len(self.dims):
                raise ComplexError("one Gram matrix per degree required")
            self.grams = []
            for i, g in enumerate(grams):
                g = np.array(g, dtype=float)
                if g.size == 0:
                    g = g.reshape(self.dims[i], self.dims[i])
                if g.shape != (self.dims[i], self.dims[i]):
                    raise ComplexError(
                        f"Gram {i} has shape {g.shape}, expected {(self.dims[i], self.dims[i])}"
                    )
                self.grams.append(g)
        self.rank_divisor = int(rank_divisor)
        self._ranks = None if ranks is None else [int(r) for r in ranks]
        self._cache = {}
        if validate:
            rep = validate_complex(self)
            if not rep.valid:
                raise ComplexError("; ".join(rep.messages))

    @property
    def n(self):
        """Top degree."""
        return len(self.dims) - 1

    def _chol(self, i):
        key = ("chol", i)
        if key not in self._cache:
            if self.dims[i] == 0:
                self._cache[key] = np.zeros((0, 0))
            else:
                self._cache[key] = np.linalg.cholesky(self.grams[i])
        return self._cache[key]

    def orthonormal_differential(self, i):
        """``L_{i+1}^T d^i L_i^{-T}``: the differential in G-orthonormal coordinates."""
        key = ("D", i)
        if key not in self._cache:
            d = self.d[i]
            if d.size == 0:
                D = d.copy()
            else:
                L0 = self._chol(i)
                L1 = self._chol(i + 1)
                D = sla.solve_triangular(L0, (L1.T @ d).T, lower=True).T
            self._cache[key] = D
        return self._cache[key]

    def rank(self, i):
        """Rank of ``d^i``, from the raw matrix (or as inherited at construction)."""
        if i < 0 or i >= self.n:
            return 0
        if self._ranks is None:
            self._ranks = [kernels.numerical_rank(d) for d in self.d]
        return self._ranks[i]

    @property
    def ranks(self):
        return [self.rank(i) for i in range(self.n)]

    def singular_values(self, i):
        """Nonzero singular values of the orthonormalized ``d^i`` (descending)."""
        key = ("sv", i)
        if key not in self._cache:
            if i < 0 or i >= self.n:
                self._cache[key] = (np.zeros(0), 0)
            else:
                self._cache[key] = kernels.singular_values(
                    self.orthonormal_differential(i), rank=self.rank(i)
                )
        return self._cache[key]

    def __repr__(self):
        return f"CochainComplex(dims={self.dims}, rank_divisor={self.rank_divisor})"


def _is_spd(g):
    if g.size == 0:
        return True
    if not np.allclose(g, g.T, rtol=0, atol=1e-12 * max(1.0, np.abs(g).max())):
        return False
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        return False
    return np.linalg.eigvalsh(g).min() > SPD_TOL


def validate_complex(c) -> ValidationReport:
    """Check shapes, Gram positivity and ``d∘d = 0`` (relative to entry scale)."""
    msgs = []
    for i, g in enumerate(c.grams):
        if g.shape != (c.dims[i], c.dims[i]):
            msgs.append(f"Gram {i} has shape {g.shape}, expected {(c.dims[i], c.dims[i])}")
        elif not _is_spd(g):
            msgs.append(f"Gram {i} is not symmetric positive definite")
    worst = 0.0
    for i in range(len(c.d) - 1):
        a, b = c.d[i], c.d[i + 1]
        if a.size == 0 or b.size == 0:
            continue
        prod = b @ a
        scale = np.abs(b) @ np.abs(a)
        smax = scale.max()
        if smax == 0:
            continue
        viol = np.abs(prod).max() / smax
        worst = max(worst, float(viol))
        if viol > DD_TOL:
            msgs.append(f"d^{i + 1} d^{i} != 0 (relative violation {viol:.3g})")
    if c.rank_divisor < 1 or any(n % c.rank_divisor for n in c.dims):
        msgs.append("rank_divisor must divide every dimension")
    return ValidationReport(not msgs, worst, msgs)


def _check_degree(c, i, top_exclusive=False):
    hi = c.n - 1 if top_exclusive else c.n
    if not 0 <= i <= hi:
        raise IndexError(f"degree {i} out of range 0..{hi}")


def adjoint_differential(c, i):
    """``(d^i)* = G_i^{-1} (d^i)^T G_{i+1}``."""
    _check_degree(c, i, top_exclusive=True)
    d = c.d[i]
    if d.size == 0:
        return d.T.copy()
    return np.linalg.solve(c.grams[i], d.T @ c.grams[i + 1])


def laplacian(c, i):
    """``Δ^i = d^{i-1}(d^{i-1})* + (d^i)* d^i`` in the original coordinates."""
    _check_degree(c, i)
    lap = np.zeros((c.dims[i], c.dims[i]))
    if i > 0:
        lap += c.d[i - 1] @ adjoint_differential(c, i - 1)
    if i < c.n:
        lap += adjoint_differential(c, i) @ c.d[i]
    return lap


def spectrum(c, i) -> LaplacianSpectrum:
    """Eigenvalues of Δ^i from the singular values of the adjacent differentials.

    The nonzero spectrum is ``σ(D^{i-1})² ∪ σ(D^i)²``; the kernel dimension is
    ``dim V^i - rank d^i - rank d^{i-1}`` and those zeros are inserted exactly.
    """
    _check_degree(c, i)
    s_in, r_in = c.singular_values(i - 1) if i > 0 else (np.zeros(0), 0)
    s_out, r_out = c.singular_values(i) if i < c.n else (np.zeros(0), 0)
    kdim = c.dims[i] - r_in - r_out
    if kdim < 0:
        raise ComplexError(f"rank inconsistency in degree {i}: d∘d is not numerically zero")
    ev = np.concatenate([np.zeros(kdim), s_in ** 2, s_out ** 2])
    ev.sort()
    return LaplacianSpectrum(i, ev, kdim)


def det_prime(s: LaplacianSpectrum, rel_tol=1e-9):
    """Sum of logs of the eigenvalues above the first ``kernel_dim``."""
    ev = np.asarray(s.eigenvalues, dtype=float)
    kept = ev[s.kernel_dim:]
    if kept.size == 0:
        return 0.0
    scale = max(float(np.abs(ev).max()), 1.0)
    if np.any(kept <= 0):
        bad = kept[kept <= 0]
        raise ComplexError(
            f"retained eigenvalue {bad[0]:.3g} <= 0 (relative {abs(bad[0]) / scale:.3g} vs tol {rel_tol})"
        )
    return float(np.sum(np.log(kept)))


def torsion(c) -> TorsionValue:
    """``log ρ = ½ Σ_i (-1)^i i log det'Δ^i`` (natural log, per-field scale)."""
    w = 1.0 / c.rank_divisor
    logdets = [w * det_prime(spectrum(c, i)) for i in range(c.n + 1)]
    log_rho = 0.5 * sum((-1) ** i * i * ld for i, ld in enumerate(logdets))
    return TorsionValue(float(log_rho), logdets)


def torsion_via_bases(c):
    """Independent torsion evaluation by explicit orthonormal bases.

    For each degree, orthonormal bases of the coimage and image of the
    orthonormalized differential are taken from pivoted QR; the restriction
    of ``d^i`` between them is square and invertible, and its log |det|
    enters with sign ``(-1)^{i+1}``.  This sign agrees with ``torsion`` on
    ``0 -> R -> R -> 0``.
    """
    total = 0.0
    for i in range(c.n):
        D = c.orthonormal_differential(i)
        if D.size == 0:
            continue
        r = np.linalg.matrix_rank(D, tol=1e-10 * max(np.abs(D).max(), 1e-300))
        if r == 0:
            continue
        q_img, _, _ = sla.qr(D, pivoting=True, mode="economic")
        q_coim, _, _ = sla.qr(D.T, pivoting=True, mode="economic")
        block = q_img[:, :r].T @ D @ q_coim[:, :r]
        sign, logabs = np.linalg.slogdet(block)
        if sign == 0:
            raise ComplexError(f"restricted differential {i} is singular")
        total += (-1) ** (i + 1) * logabs
    return float(total / c.rank_divisor)


def euler_characteristic(c):
    total = sum((-1) ** i * n for i, n in enumerate(c.dims))
    return total // c.rank_divisor


def tensor_product(c, e):
    """Total complex of ``c ⊗ e`` with Koszul signs and Kronecker Grams.

    Basis of total degree ``k`` is ordered by ``i`` ascending over blocks
    ``c^i ⊗ e^{k-i}``; each block uses ``np.kron`` ordering.
    """
    dims = []
    blocks = []  # per total degree: list of (i, j, offset, size)
    for k in range(c.n + e.n + 1):
        off = 0
        bl = []
        for i in range(max(0, k - e.n), min(c.n, k) + 1):
            j = k - i
            sz = c.dims[i] * e.dims[j]
            bl.append((i, j, off, sz))
            off += sz
        blocks.append(bl)
        dims.append(off)
    diffs = []
    for k in range(len(dims) - 1):
        D = np.zeros((dims[k + 1], dims[k]))
        tgt = {(i, j): (o, s) for i, j, o, s in blocks[k + 1]}
        for i, j, o, s in blocks[k]:
            if (i + 1, j) in tgt and s:
                to, ts = tgt[(i + 1, j)]
                D[to:to + ts, o:o + s] += np.kron(c.d[i], np.eye(e.dims[j]))
            if (i, j + 1) in tgt and s:
                to, ts = tgt[(i, j + 1)]
                D[to:to + ts, o:o + s] += (-1) ** i * np.kron(np.eye(c.dims[i]), e.d[j])
        diffs.append(D)
    grams = []
    for k, bl in enumerate(blocks):
        G = np.zeros((dims[k], dims[k]))
        for i, j, o, s in bl:
            G[o:o + s, o:o + s] = np.kron(c.grams[i], e.grams[j])
        grams.append(G)
    return CochainComplex(dims, diffs, grams, rank_divisor=c.rank_divisor * e.rank_divisor)


def change_of_basis(c, mats):
    """Transport ``c`` along invertible ``S_i`` (new coordinates ``x' = S_i x``)."""
    diffs = [mats[i + 1] @ c.d[i] @ np.linalg.inv(mats[i]) for i in range(c.n)]
    grams = []
    for i, g in enumerate(c.grams):
        Si = np.linalg.inv(mats[i])
        gi = Si.T @ g @ Si
        grams.append(0.5 * (gi + gi.T))
    return CochainComplex(c.dims, diffs, grams, c.rank_divisor)


def with_grams(c, grams):
    return CochainComplex(c.dims, [d.copy() for d in c.d], grams, c.rank_divisor,
                          ranks=c.ranks)


def random_spd(rng, n, cond=10.0):
    """Random SPD matrix with eigenvalues log-uniform in ``[1, cond]``."""
    if n == 0:
        return np.zeros((0, 0))
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = np.exp(rng.uniform(0.0, np.log(cond), n))
    g = (q * lam) @ q.T
    return 0.5 * (g + g.T)


def random_complex(rng, max_dim=8, max_degree=4, spd_grams=True, acyclic=False):
    """Random complex ``d^i = S_{i+1} N_i S_i^{-1}`` with known ranks.

    ``N_i`` maps a coordinate block of ``V^i`` onto a block of ``V^{i+1}`` by a
    random invertible matrix, so ranks and cohomology are controlled exactly.
    """
    n = int(rng.integers(1, max_degree + 1))
    dims = [int(rng.integers(1, max_dim + 1)) for _ in range(n + 1)]
    if acyclic:
        dims = _acyclic_dims(rng, n, max_dim)
    ranks = []
    prev = 0
    for i in range(n):
        hi = min(dims[i] - prev, dims[i + 1])
        if acyclic:
            r = dims[i] - prev
        else:
            r = int(rng.integers(0, hi + 1)) if hi > 0 else 0
        ranks.append(r)
        prev = r
    diffs = []
    S = [np.eye(k) + 0.5 * rng.standard_normal((k, k)) / np.sqrt(max(k, 1)) for k in dims]
    r_prev = 0
    for i in range(n):
        r = ranks[i]
        Nm = np.zeros((dims[i + 1], dims[i]))
        if r:
            blk = rng.standard_normal((r, r)) + 2.0 * np.eye(r)
            # columns after the image of d^{i-1}; rows at the start of V^{i+1}
            Nm[:r, r_prev:r_prev + r] = blk
        diffs.append(S[i + 1] @ Nm @ np.linalg.inv(S[i]))
        r_prev = r
    grams = [random_spd(rng, k) for k in dims] if spd_grams else None
    return CochainComplex(dims, diffs, grams)


def _acyclic_dims(rng, n, max_dim):
    ranks = [int(rng.integers(1, max(2, max_dim // 2) + 1)) for _ in range(n)]
    dims = []
    prev = 0
    for i in range(n + 1):
        r = ranks[i] if i < n else 0
        dims.append(prev + r)
        prev = r
    return dims
