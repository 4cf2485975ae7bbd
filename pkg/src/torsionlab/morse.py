"""Cell complexes with a flat twist, discrete Morse matchings and Morse complexes.

Cells are addressed as ``(dim, index)``.  A twisted incidence of the
coboundary is a sum of terms ``coeff * T**exponent`` where ``T`` is the
holonomy: the rotation ``R(2πα)`` for rank 2 (realified unitary line) or the
scalar ``cos 2πα ∈ {±1}`` for rank 1.
"""
import math
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter

import numpy as np

from .complex_core import CochainComplex, ComplexError, torsion


class MorseError(ValueError):
    pass


def holonomy_block(alpha, rank, exponent):
    if rank == 1:
        return np.array([[float(round(math.cos(2 * math.pi * alpha))) ** exponent]])
    th = 2 * math.pi * alpha * exponent
    c, s = math.cos(th), math.sin(th)
    return np.array([[c, -s], [s, c]])


@dataclass
class CellComplexWithTwist:
    """Cells per dimension and twisted boundary terms.

    ``terms[k]`` lists ``(face, cell, coeff, exponent)`` for the boundary of
    ``k+1``-cells: ``face`` indexes a ``k``-cell, ``cell`` a ``(k+1)``-cell.
    """
    cells: list
    terms: list
    alpha: float = 0.0
    rank: int = 2
    f: list = None

    def __post_init__(self):
        self.cells = [int(n) for n in self.cells]
        if self.rank not in (1, 2):
            raise MorseError("rank must be 1 or 2")
        if self.rank == 1 and not _near_real(self.alpha):
            raise MorseError("rank-1 twist needs alpha in {0, 1/2}")
        if len(self.terms) != max(len(self.cells) - 1, 0):
            raise MorseError("one term list per boundary map required")
        for k, tl in enumerate(self.terms):
            for face, cell, coeff, exp in tl:
                if not (0 <= face < self.cells[k] and 0 <= cell < self.cells[k + 1]):
                    raise MorseError(f"boundary term out of range in dimension {k + 1}")
        if self.f is not None and [len(v) for v in self.f] != self.cells:
            raise MorseError("f needs one value per cell")
        for k in range(len(self.terms) - 1):
            if np.any(self.boundary(k + 1) @ self.boundary(k + 2)):
                raise MorseError(f"integer boundary fails ∂∘∂ = 0 in dimension {k + 2}")

    @property
    def top(self):
        return len(self.cells) - 1

    def boundary(self, k):
        """Untwisted integer boundary ``∂_k`` of shape ``(n_{k-1}, n_k)``."""
        B = np.zeros((self.cells[k - 1], self.cells[k]), dtype=np.int64)
        for face, cell, coeff, _ in self.terms[k - 1]:
            B[face, cell] += coeff
        return B

    def faces(self, k):
        """Set of incident ``(face, cell)`` pairs between dims ``k`` and ``k+1``."""
        return {(face, cell) for face, cell, coeff, _ in self.terms[k] if coeff}

    def incidence_block(self, k, face, cell):
        """Twisted coboundary block from ``(k, face)`` to ``(k+1, cell)``."""
        r = self.rank
        blk = np.zeros((r, r))
        for fc, ce, coeff, exp in self.terms[k]:
            if fc == face and ce == cell:
                blk += coeff * holonomy_block(self.alpha, r, exp)
        return blk

    def twisted_coboundary(self, k):
        r = self.rank
        D = np.zeros((self.cells[k + 1] * r, self.cells[k] * r))
        for face, cell, coeff, exp in self.terms[k]:
            D[cell * r:(cell + 1) * r, face * r:(face + 1) * r] += \
                coeff * holonomy_block(self.alpha, r, exp)
        return D


def _near_real(alpha):
    return abs(math.sin(2 * math.pi * alpha)) < 1e-15


def cochain_complex(cc, grams=None):
    """The twisted cochain complex of ``cc`` (cell basis, identity Grams by default)."""
    diffs = [cc.twisted_coboundary(k) for k in range(cc.top)]
    dims = [n * cc.rank for n in cc.cells]
    return CochainComplex(dims, diffs, grams, rank_divisor=cc.rank if cc.rank == 2 else 1)


def circle_cell_complex(N, alpha, rank=2, f=None):
    """N vertices ``v_j`` and edges ``e_j = [v_j, v_{j+1}]``; the wrap edge carries T."""
    if N < 1:
        raise MorseError("N >= 1 required")
    terms = []
    for j in range(N):
        tail, head = j, (j + 1) % N
        terms.append((tail, j, -1, 0))
        terms.append((head, j, 1, 1 if j == N - 1 else 0))
    return CellComplexWithTwist([N, N], [terms], alpha, rank, f)


def circle_complex(N, alpha, rank=2, metric="identity", length=2 * math.pi):
    """Twisted circle cochain complex ``0 -> R^{rN} -> R^{rN} -> 0``.

    ``metric="geometric"`` uses the lattice inner products ``G_0 = h I`` on
    vertices and ``G_1 = I/h`` on edges with ``h = length / N``.
    """
    cc = circle_cell_complex(N, alpha, rank)
    dims = [N * rank, N * rank]
    if metric == "identity":
        grams = None
    elif metric == "geometric":
        h = length / N
        grams = [h * np.eye(dims[0]), np.eye(dims[1]) / h]
    else:
        raise MorseError(f"unknown metric {metric!r}")
    return cochain_complex(cc, grams)


def circle_sample_points(N, length=2 * math.pi):
    """Vertex and edge-midpoint coordinates for the N-cell circle."""
    h = length / N
    xv = np.arange(N) * h
    return xv, xv + 0.5 * h


def circle_f_values(N, fn, length=2 * math.pi, edge="max"):
    """Per-cell f on the N-cell circle: vertex samples and, on edges, the larger
    endpoint value (``edge="max"``, a discrete Morse extension) or the midpoint sample."""
    xv, xe = circle_sample_points(N, length)
    fv = np.asarray(fn(xv), dtype=float)
    if edge == "max":
        fe = np.maximum(fv, np.roll(fv, -1))
    elif edge == "midpoint":
        fe = np.asarray(fn(xe), dtype=float)
    else:
        raise MorseError(f"unknown edge rule {edge!r}")
    return [fv.tolist(), fe.tolist()]


def is_acyclic_complex(c):
    return all(c.dims[i] - c.rank(i) - c.rank(i - 1) == 0 for i in range(c.n + 1))


def betti_numbers(c):
    return [(c.dims[i] - c.rank(i) - c.rank(i - 1)) // c.rank_divisor for i in range(c.n + 1)]


# --- matchings ------------------------------------------------------------

@dataclass
class DiscreteMorseData:
    matching: list  # [((k, i), (k+1, j)), ...]
    critical_cells: list = field(default_factory=list)


def _check_matching(cc, pairs):
    seen = set()
    for low, high in pairs:
        (k, i), (k1, j) = low, high
        if k1 != k + 1:
            raise MorseError(f"pair {low}-{high} does not join adjacent dimensions")
        if (i, j) not in cc.faces(k):
            raise MorseError(f"{low} is not a face of {high}")
        if low in seen or high in seen:
            raise MorseError(f"cell in more than one pair: {low if low in seen else high}")
        blk = cc.incidence_block(k, i, j)
        if abs(np.linalg.det(blk)) < 1e-12:
            raise MorseError(f"matched incidence {low}-{high} is not invertible")
        seen.add(low)
        seen.add(high)
    return seen


def find_v_cycle(cc, pairs):
    """Return a closed V-path (list of cells) or None."""
    up = {low: high for low, high in pairs}
    for k in range(cc.top):
        ts = TopologicalSorter()
        for face, cell in cc.faces(k):
            a, b = (k, face), (k + 1, cell)
            if up.get(a) == b:
                ts.add(b, a)  # matched edges point up
            else:
                ts.add(a, b)  # other incidences point down
        try:
            ts.prepare()
        except CycleError as err:
            return list(err.args[1])
    return None


def make_morse_data(cc, pairs):
    pairs = [(tuple(lo), tuple(hi)) for lo, hi in pairs]
    seen = _check_matching(cc, pairs)
    cyc = find_v_cycle(cc, pairs)
    if cyc is not None:
        raise MorseError(f"matching is not acyclic; closed V-path {cyc}")
    crit = [(k, i) for k, n in enumerate(cc.cells) for i in range(n) if (k, i) not in seen]
    return DiscreteMorseData(pairs, crit)


def empty_matching(cc):
    return make_morse_data(cc, [])


def graph_gradient_matching(cc, f_vertex):
    """Descending gradient on a 1-dimensional complex from vertex values.

    Each vertex with a strictly lower neighbour is paired with the edge to its
    lowest neighbour (ties broken by index).  Along any V-path ``f`` strictly
    decreases, so the matching is acyclic.
    """
    if cc.top != 1:
        raise MorseError("graph_gradient_matching needs a 1-dimensional complex")
    f_vertex = np.asarray(f_vertex, dtype=float)
    best = {}
    for face, edge in sorted(cc.faces(0)):
        ends = [fc for fc, ce in cc.faces(0) if ce == edge]
        other = [v for v in ends if v != face]
        if not other:
            continue  # a loop edge has no lower neighbour
        w = other[0]
        if f_vertex[w] < f_vertex[face]:
            key = (f_vertex[w], w, edge)
            if face not in best or key < best[face]:
                best[face] = key
    pairs = [((0, v), (1, key[2])) for v, key in sorted(best.items())]
    return make_morse_data(cc, pairs)


def random_acyclic_matching(cc, rng, attempts=None):
    """Greedy random acyclic matching over unimodular incidences."""
    cand = []
    for k in range(cc.top):
        for face, cell in cc.faces(k):
            blk = cc.incidence_block(k, face, cell)
            if abs(abs(np.linalg.det(blk)) - 1.0) < 1e-12:
                cand.append(((k, face), (k + 1, cell)))
    order = rng.permutation(len(cand))
    pairs = []
    used = set()
    for idx in order:
        lo, hi = cand[idx]
        if lo in used or hi in used:
            continue
        trial = pairs + [(lo, hi)]
        if find_v_cycle(cc, trial) is None:
            pairs = trial
            used.update((lo, hi))
    return make_morse_data(cc, pairs)


def morse_complex(cc, dm):
    """Cochain complex on critical cells with the eliminated differential.

    Per degree, with ``Φ`` the block of ``d^k`` from the upward-matched
    ``k``-cells to their partners,
    ``d_M = d[K', K] - d[K', D] Φ^{-1} d[U', K]``.
    Identity Grams; same field scale as ``cc``.
    """
    cyc = find_v_cycle(cc, dm.matching)
    if cyc is not None:
        raise MorseError(f"matching is not acyclic; closed V-path {cyc}")
    r = cc.rank
    up = {lo: hi for lo, hi in dm.matching}
    crit = {k: [i for (kk, i) in dm.critical_cells if kk == k] for k in range(len(cc.cells))}

    def idx(cells):
        return np.array([i * r + q for i in cells for q in range(r)], dtype=np.intp)

    diffs = []
    for k in range(cc.top):
        d = cc.twisted_coboundary(k)
        lows = sorted(i for (kk, i) in up if kk == k)
        highs = [up[(k, i)][1] for i in lows]
        K, Kp = idx(crit[k]), idx(crit[k + 1])
        Dm, Up = idx(lows), idx(highs)
        dM = d[np.ix_(Kp, K)]
        if len(lows):
            phi = d[np.ix_(Up, Dm)]
            dM = dM - d[np.ix_(Kp, Dm)] @ np.linalg.solve(phi, d[np.ix_(Up, K)])
        diffs.append(dM)
    dims = [len(crit[k]) * r for k in range(len(cc.cells))]
    return CochainComplex(dims, diffs, rank_divisor=cc.rank if cc.rank == 2 else 1)


@dataclass
class MilnorComparison:
    log_rho_morse: float
    log_rho_full: float
    difference: float
    acyclic: bool


def milnor_vs_full_torsion(cc, dm):
    """Torsion of the Morse complex against the full cell complex (identity Grams)."""
    full = cochain_complex(cc)
    mc = morse_complex(cc, dm)
    acyclic = is_acyclic_complex(full) and is_acyclic_complex(mc)
    a = torsion(mc).log_rho
    b = torsion(full).log_rho
    return MilnorComparison(a, b, abs(a - b), acyclic)


def critical_structure(dm, f):
    if f is None:
        raise MorseError("critical-point comparison needs f-values")
    out = []
    for k, i in dm.critical_cells:
        try:
            out.append((k, float(f[k][i])))
        except (IndexError, TypeError):
            raise MorseError(f"missing f-value for critical cell {(k, i)}") from None
    return sorted(out)


def critical_point_structure_match(dmA, dmB, fA, fB, tol=1e-12):
    """True iff the multisets {(index, f)} over critical cells agree within ``tol``."""
    a = critical_structure(dmA, fA)
    b = critical_structure(dmB, fB)
    return match_structures(a, b, tol)


def match_structures(a, b, tol=1e-12):
    if len(a) != len(b):
        return False
    return all(ka == kb and abs(fa - fb) <= tol for (ka, fa), (kb, fb) in zip(sorted(a), sorted(b)))


# --- products -------------------------------------------------------------

def _cell_list(cc):
    return [(k, i) for k, n in enumerate(cc.cells) for i in range(n)]


def product_cell_complex(A, B):
    """Product cell complex with ``∂(a×b) = ∂a×b + (-1)^{|a|} a×∂b``.

    At most one factor may carry a nontrivial twist (or both the same ``α``);
    exponents add.  Total-degree ordering matches ``tensor_product``: blocks by
    dimension of the first factor, then first-factor index major.
    """
    twA = A.alpha % 1.0 != 0.0 and any(e for tl in A.terms for *_, e in tl)
    twB = B.alpha % 1.0 != 0.0 and any(e for tl in B.terms for *_, e in tl)
    if twA and twB and (A.alpha != B.alpha or A.rank != B.rank):
        raise MorseError("both factors twisted with different holonomies")
    alpha, rank = (A.alpha, A.rank) if twA or not twB else (B.alpha, B.rank)
    if not twA and not twB:
        alpha, rank = 0.0, 1 if 1 in (A.rank, B.rank) else 2
    top = A.top + B.top
    index = {}
    cells = []
    for k in range(top + 1):
        n = 0
        for i in range(max(0, k - B.top), min(A.top, k) + 1):
            j = k - i
            for a in range(A.cells[i]):
                for b in range(B.cells[j]):
                    index[((i, a), (j, b))] = n
                    n += 1
        cells.append(n)
    terms = [[] for _ in range(top)]
    for ((i, a), (j, b)), pos in index.items():
        k = i + j
        if i > 0:
            for face, cell, coeff, exp in A.terms[i - 1]:
                if cell == a:
                    terms[k - 1].append((index[((i - 1, face), (j, b))], pos, coeff, exp))
        if j > 0:
            for face, cell, coeff, exp in B.terms[j - 1]:
                if cell == b:
                    terms[k - 1].append((index[((i, a), (j - 1, face))], pos,
                                         (-1) ** i * coeff, exp))
    f = None
    if A.f is not None and B.f is not None:
        f = [[0.0] * n for n in cells]
        for ((i, a), (j, b)), pos in index.items():
            f[i + j][pos] = A.f[i][a] + B.f[j][b]
    out = CellComplexWithTwist(cells, terms, alpha, rank, f)
    out.product_index = index
    return out


def product_matching(P, dmA, dmB):
    """Pair ``(σ,τ)`` along the first factor's matching, else along the second's.

    Critical cells of the product are products of critical cells.
    """
    partA = {}
    for lo, hi in dmA.matching:
        partA[lo] = hi
        partA[hi] = lo
    partB = {}
    for lo, hi in dmB.matching:
        partB[lo] = hi
        partB[hi] = lo
    pairs = set()
    for (sa, sb), pos in P.product_index.items():
        if sa in partA:
            other = (partA[sa], sb)
        elif sb in partB:
            other = (sa, partB[sb])
        else:
            continue
        here = (sa[0] + sb[0], pos)
        there = (other[0][0] + other[1][0], P.product_index[other])
        pairs.add(tuple(sorted((here, there))))
    return make_morse_data(P, sorted(pairs))


# --- JSON ------------------------------------------------------------------

def cell_complex_from_dict(obj):
    """``{"cells", "boundary", "holonomy", "twist"?, "rank"?, "f"?, "matching"?}``."""
    try:
        cells = [int(n) for n in obj["cells"]]
        bmats = obj["boundary"]
    except (KeyError, TypeError, ValueError) as err:
        raise MorseError(f"cell complex needs 'cells' and 'boundary': {err}") from None
    alpha = float(obj.get("holonomy", 0.0))
    rank = int(obj.get("rank", 2 if alpha not in (0.0, 0.5) else 1))
    twist = obj.get("twist")
    if len(bmats) != len(cells) - 1:
        raise MorseError("one boundary matrix per positive dimension required")
    if twist is None and not _near_real(alpha) and alpha != 0.0:
        raise MorseError("nonzero holonomy needs a 'twist' exponent matrix per boundary map")
    terms = []
    for k, M in enumerate(bmats):
        M = np.array(M, dtype=np.int64).reshape(cells[k], cells[k + 1])
        E = np.zeros_like(M) if twist is None else np.array(twist[k], dtype=np.int64).reshape(M.shape)
        tl = []
        for face in range(M.shape[0]):
            for cell in range(M.shape[1]):
                if M[face, cell]:
                    tl.append((face, cell, int(M[face, cell]), int(E[face, cell])))
        terms.append(tl)
    cc = CellComplexWithTwist(cells, terms, alpha, rank, obj.get("f"))
    dm = None
    if "matching" in obj:
        dm = make_morse_data(cc, [(tuple(a), tuple(b)) for a, b in obj["matching"]])
    return cc, dm


def cell_complex_to_dict(cc, dm=None):
    bmats, twist = [], []
    for k in range(1, cc.top + 1):
        M = np.zeros((cc.cells[k - 1], cc.cells[k]), dtype=np.int64)
        E = np.zeros_like(M)
        for face, cell, coeff, exp in cc.terms[k - 1]:
            if M[face, cell]:
                raise MorseError("multi-term incidences cannot be written in matrix form")
            M[face, cell] = coeff
            E[face, cell] = exp
        bmats.append(M.tolist())
        twist.append(E.tolist())
    out = {"cells": cc.cells, "boundary": bmats, "holonomy": cc.alpha, "rank": cc.rank,
           "twist": twist}
    if cc.f is not None:
        out["f"] = cc.f
    if dm is not None:
        out["matching"] = [[list(a), list(b)] for a, b in dm.matching]
    return out


__all__ = [
    "CellComplexWithTwist", "DiscreteMorseData", "MorseError", "ComplexError",
    "circle_complex", "circle_cell_complex", "cochain_complex", "morse_complex",
    "milnor_vs_full_torsion", "critical_point_structure_match", "graph_gradient_matching",
    "random_acyclic_matching", "empty_matching", "make_morse_data", "product_cell_complex",
    "product_matching", "betti_numbers",
]
