"""Zeta-regularized determinants: finite spectra and the twisted flat circle."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import bernoulli

from .complex_core import LaplacianSpectrum, det_prime

_B = bernoulli(80)  # B_0 .. B_80
MAX_ORDER = 35


class ZetaError(ValueError):
    pass


@dataclass
class ExplicitSpectrum:
    kind: str  # "finite" or "circle_holonomy"
    eigenvalues: list = field(default_factory=list)
    alpha: float = 0.5
    kernel_dim: int = 0

    def __post_init__(self):
        if self.kind == "circle_holonomy":
            if not 0.0 < self.alpha < 1.0:
                raise ZetaError("circle holonomy needs alpha in (0, 1)")
            if self.kernel_dim:
                raise ZetaError("acyclic circle spectrum has no kernel")
        elif self.kind == "finite":
            ev = np.asarray(self.eigenvalues, dtype=float)
            if ev.size and (np.any(np.diff(ev) < 0) or ev[0] < 0):
                raise ZetaError("finite spectrum must be sorted and nonnegative")
        else:
            raise ZetaError(f"unknown spectrum kind {self.kind!r}")


@dataclass
class ZetaDetResult:
    log_det_prime: float
    method: str
    error_estimate: float


def _pochhammer(s, n):
    out = 1.0
    for k in range(n):
        out *= s + k
    return out


def _em_cutoff(s, a, tol):
    # large enough that the asymptotic tail converges fast; x = M + a
    return max(int(math.ceil(abs(s))) + 12, int(math.ceil(-math.log10(tol))) + 2)


def hurwitz_zeta(s, a, tol=1e-14, return_error=False):
    """ζ_H(s, a) = Σ_{n≥0} (n+a)^{-s} by Euler–Maclaurin, analytically continued.

    The tail after ``M`` direct terms is summed with Bernoulli corrections up
    to the first one below ``tol``; that next term bounds the remainder for
    real ``s > -(2p+1)``.
    """
    if s == 1:
        raise ZetaError("pole at s = 1")
    if a <= 0:
        raise ZetaError("a must be positive")
    s = float(s)
    M = _em_cutoff(s, a, tol)
    while True:
        x = M + a
        head = math.fsum((n + a) ** (-s) for n in range(M))
        total = head + x ** (1 - s) / (s - 1) + 0.5 * x ** (-s)
        err = float("inf")
        for j in range(1, MAX_ORDER + 1):
            term = _B[2 * j] / math.factorial(2 * j) * _pochhammer(s, 2 * j - 1) * x ** (-s - 2 * j + 1)
            nxt = _B[2 * j + 2] / math.factorial(2 * j + 2) * _pochhammer(s, 2 * j + 1) \
                * x ** (-s - 2 * j - 1)
            total += term
            err = abs(nxt)
            if err <= tol * max(1.0, abs(total)) or term == 0.0:
                break
        if err <= tol * max(1.0, abs(total)):
            total, err = float(total), float(err)
            return (total, err) if return_error else total
        M *= 2
        if M > 10 ** 6:
            raise ZetaError(f"Euler–Maclaurin did not reach tol {tol} (err {err:.3g})")


def hurwitz_zeta_deriv0(a, tol=1e-14, return_error=False):
    """∂_s ζ_H(s, a) at s = 0, from the term-wise differentiated expansion."""
    if a <= 0:
        raise ZetaError("a must be positive")
    M = _em_cutoff(0.0, a, tol)
    while True:
        x = M + a
        total = -math.fsum(math.log(n + a) for n in range(M))
        total += x * math.log(x) - x - 0.5 * math.log(x)
        err = float("inf")
        for j in range(1, MAX_ORDER + 1):
            total += _B[2 * j] / ((2 * j) * (2 * j - 1)) * x ** (1 - 2 * j)
            err = abs(_B[2 * j + 2] / ((2 * j + 2) * (2 * j + 1)) * x ** (-1 - 2 * j))
            if err <= tol:
                break
        if err <= tol:
            total, err = float(total), float(err)
            return (total, err) if return_error else total
        M *= 2


def lerch_value(a):
    """log Γ(a) - ½ log 2π, the closed form of ∂_s ζ_H(0, a)."""
    return math.lgamma(a) - 0.5 * math.log(2 * math.pi)


def lerch_discrepancy(a):
    return abs(hurwitz_zeta_deriv0(a) - lerch_value(a))


def circle_log_det_prime(alpha, tol=1e-14) -> ZetaDetResult:
    """log det′ of the spectrum {(n+α)² : n ∈ Z} on the circle of length 2π.

    ζ(s) = ζ_H(2s, α) + ζ_H(2s, 1-α), so log det′ = -ζ′(0)
    = -2[∂_sζ_H(0, α) + ∂_sζ_H(0, 1-α)].
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ZetaError(
            "alpha must lie in (0, 1); at the endpoints the circle has a zero mode, "
            "use the finite-kernel pathway (finite_spectrum_log_det)"
        )
    d1, e1 = hurwitz_zeta_deriv0(alpha, tol, return_error=True)
    d2, e2 = hurwitz_zeta_deriv0(1.0 - alpha, tol, return_error=True)
    return ZetaDetResult(-2.0 * (d1 + d2), "hurwitz", 2.0 * (e1 + e2))


def circle_log_det_closed_form(alpha):
    return math.log(4.0 * math.sin(math.pi * alpha) ** 2)


def circle_analytic_torsion(alpha):
    """Analytic torsion of the twisted circle: -½ log det′Δ¹ (natural log)."""
    return -0.5 * circle_log_det_prime(alpha).log_det_prime


def finite_spectrum_log_det(s: ExplicitSpectrum) -> ZetaDetResult:
    if s.kind != "finite":
        raise ZetaError("finite_spectrum_log_det needs a finite spectrum")
    ls = LaplacianSpectrum(0, np.asarray(s.eigenvalues, dtype=float), s.kernel_dim)
    return ZetaDetResult(det_prime(ls), "direct_sum", 0.0)


def zeta_log_det(s: ExplicitSpectrum) -> ZetaDetResult:
    if s.kind == "finite":
        return finite_spectrum_log_det(s)
    return circle_log_det_prime(s.alpha)
