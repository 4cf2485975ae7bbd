"""Pure numpy versions of the compiled kernels (same in-place interface)."""
import numpy as np

NAME = "numpy"


def gecp_inplace(A, rows, cols, abs_tol, max_rank):
    """Gaussian elimination with complete pivoting, in place (same contract)."""
    m, n = A.shape
    rank = 0
    for i in range(min(m, n, max_rank)):
        absub = np.abs(A[i:, i:])
        p, q = divmod(int(np.argmax(absub)), n - i)
        amax = absub[p, q]
        if amax <= abs_tol or amax == 0.0:
            break
        p += i
        q += i
        if p != i:
            A[[i, p]] = A[[p, i]]
            rows[[i, p]] = rows[[p, i]]
        if q != i:
            A[:, [i, q]] = A[:, [q, i]]
            cols[[i, q]] = cols[[q, i]]
        A[i + 1:, i] /= A[i, i]
        A[i + 1:, i + 1:] -= np.outer(A[i + 1:, i], A[i, i + 1:])
        rank += 1
    return rank


def _round_robin(r):
    """Pairings for a round-robin tournament on ``r`` players (padded to even)."""
    players = list(range(r)) + ([-1] if r % 2 else [])
    half = len(players) // 2
    rounds = []
    for _ in range(len(players) - 1):
        pairs = [(players[j], players[-1 - j]) for j in range(half)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a >= 0 and b >= 0]
        if pairs:
            rounds.append(np.array(pairs, dtype=np.intp).T)
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_rows_inplace(X, tol, max_sweeps):
    """One-sided Jacobi on the rows of ``X`` using parallel round-robin order."""
    r = X.shape[0]
    rounds = _round_robin(r)
    for sweep in range(max_sweeps):
        rotated = 0
        for p, q in rounds:
            xp = X[p]
            xq = X[q]
            a = np.einsum("ij,ij->i", xp, xp)
            b = np.einsum("ij,ij->i", xq, xq)
            g = np.einsum("ij,ij->i", xp, xq)
            act = (g != 0.0) & (np.abs(g) > tol * np.sqrt(a) * np.sqrt(b))
            if not act.any():
                continue
            rotated += int(act.sum())
            p, q, a, b, g = p[act], q[act], a[act], b[act], g[act]
            with np.errstate(over="ignore"):
                zeta = (b - a) / (2.0 * g)
                t = np.sign(zeta) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            big = np.abs(zeta) > 1e150
            t[big] = 0.5 / zeta[big]
            t[zeta == 0.0] = 1.0
            cs = 1.0 / np.sqrt(1.0 + t * t)
            sn = cs * t
            xp = X[p]
            xq = X[q]
            X[p] = cs[:, None] * xp - sn[:, None] * xq
            X[q] = sn[:, None] * xp + cs[:, None] * xq
        if rotated == 0:
            return sweep + 1
    return -1
