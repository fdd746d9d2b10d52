"""Scalar special functions used by the discrete-ordinates solver.

Covers the unit-normalized associated Legendre functions, the normalized
Chandrasekhar polynomials generated by the transport three-term recurrence,
Wigner d-matrices analytically continued to imaginary polar angle, and the
Bessel J0 pieces needed by the oscillatory inversion integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0 as _scipy_j0

from .errors import NumericalSingularityError

__all__ = [
    "PhaseFunction",
    "ChandrasekharTable",
    "normalized_plm",
    "normalized_plm_table",
    "chandrasekhar_g",
    "wigner_d_continued",
    "bessel_j0",
    "bessel_remainder_d",
]


@dataclass(frozen=True)
class PhaseFunction:
    """Truncated phase-function expansion with moments g**l, l <= degree.

    The recurrence coefficients h_l fold in the single-scattering albedo:
    h_l = (2l+1)(1 - albedo * g**l) up to the truncation degree and
    h_l = 2l+1 beyond it.
    """

    anisotropy: float
    degree: int
    albedo: float

    def __post_init__(self):
        if not 0.0 <= self.anisotropy <= 1.0:
            raise ValueError("anisotropy must be in [0, 1]")
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        if not 0.0 < self.albedo < 1.0:
            raise ValueError("albedo must be in (0, 1)")

    def moment(self, l: int) -> float:
        return self.anisotropy**l if l <= self.degree else 0.0

    def h(self, l: int) -> float:
        if l <= self.degree:
            return (2 * l + 1) * (1.0 - self.albedo * self.anisotropy**l)
        return float(2 * l + 1)


@dataclass(frozen=True)
class ChandrasekharTable:
    """Values g_l^m(nu) for |m| <= l <= l_cut at a single eigen-argument."""

    order: int
    nu: float
    values: np.ndarray = field(repr=False)  # index l - |m|

    @property
    def l_cut(self) -> int:
        return abs(self.order) + len(self.values) - 1

    def value(self, l: int) -> float:
        if not abs(self.order) <= l <= self.l_cut:
            raise ValueError(f"l={l} outside table range")
        return float(self.values[l - abs(self.order)])


def _plm_seed(m: int) -> float:
    """p_|m|^|m| = sqrt((2m)!)/(2^m m!), computed as a stable product."""
    m = abs(m)
    out = 1.0
    for k in range(1, m + 1):
        out *= math.sqrt((2 * k - 1) / (2 * k))
    return out


def normalized_plm_table(l_max: int, m: int, mu) -> np.ndarray:
    """Unit-normalized associated Legendre values p_l^m(mu), l = |m| .. l_max.

    The (1-mu^2)^(-|m|/2) prefactor of the definition cancels analytically;
    the upward recurrence in l never forms it, so |mu| = 1 is safe.
    """
    am = abs(m)
    if l_max < am:
        raise ValueError("l_max must be >= |m|")
    mu = np.asarray(mu, dtype=float)
    sign = (-1) ** am if m < 0 else 1
    table = np.empty((l_max - am + 1,) + mu.shape)
    p_prev = np.zeros_like(mu)
    p_curr = np.full_like(mu, sign * _plm_seed(am))
    table[0] = p_curr
    for l in range(am, l_max):
        c_next = math.sqrt((l + 1) ** 2 - am * am)
        c_prev = math.sqrt(l * l - am * am)
        p_next = ((2 * l + 1) * mu * p_curr - c_prev * p_prev) / c_next
        p_prev, p_curr = p_curr, p_next
        table[l - am + 1] = p_curr
    return table


def normalized_plm(l: int, m: int, mu: float) -> float:
    """p_l^m(mu) for a single (l, m, mu)."""
    if abs(m) > l:
        raise ValueError(f"|m|={abs(m)} exceeds l={l}")
    return float(normalized_plm_table(l, m, mu)[-1])


def chandrasekhar_g(
    m: int, nu: float, phase: PhaseFunction, l_cut: int
) -> ChandrasekharTable:
    """Normalized Chandrasekhar polynomials g_l^m(nu) for |m| <= l <= l_cut.

    Forward recurrence for |nu| <= 1.  For |nu| > 1 the forward recurrence
    admits an exponentially growing contaminant, so the table is built from
    backward ratios seeded with zero at large l and rebuilt upward from the
    fixed g_|m|^m value.
    """
    if nu == 0.0:
        raise ValueError("nu must be nonzero")
    am = abs(m)
    if l_cut < max(am, phase.degree):
        raise ValueError("l_cut must cover the phase-function degree")
    sign = (-1) ** am if m < 0 else 1
    g0 = sign * _plm_seed(am)

    values = np.empty(l_cut - am + 1)
    values[0] = g0
    if l_cut == am:
        return ChandrasekharTable(order=m, nu=nu, values=values)

    if abs(nu) <= 1.0:
        g_prev, g_curr = 0.0, g0
        for l in range(am, l_cut):
            c_next = math.sqrt((l + 1) ** 2 - am * am)
            c_prev = math.sqrt(l * l - am * am)
            g_next = (nu * phase.h(l) * g_curr - c_prev * g_prev) / c_next
            g_prev, g_curr = g_curr, g_next
            values[l - am + 1] = g_curr
    else:
        # Ratio seeding error decays geometrically in l; 40 guard levels
        # above the requested table are ample for double precision.
        l_seed = max(l_cut, 8) + 40
        ratio = 0.0
        ratios = {}
        for l in range(l_seed, am, -1):
            denom = nu * phase.h(l) - math.sqrt((l + 1) ** 2 - am * am) * ratio
            if abs(denom) < 1e-14 * max(1.0, abs(nu * phase.h(l))):
                raise NumericalSingularityError(
                    f"backward-ratio denominator vanished at l={l}, nu={nu}"
                )
            ratio = math.sqrt(l * l - am * am) / denom
            ratios[l - 1] = ratio
        g_curr = g0
        for l in range(am, l_cut):
            g_curr = ratios[l] * g_curr
            values[l - am + 1] = g_curr
    return ChandrasekharTable(order=m, nu=nu, values=values)


def _half_angle(tau: float) -> tuple[float, complex]:
    """cos and sin of the half angle for cos(theta) = sqrt(1 + tau^2)."""
    cos_theta = math.sqrt(1.0 + tau * tau)
    c = math.sqrt((1.0 + cos_theta) / 2.0)
    s = 1j * tau / (2.0 * c)  # sin(theta)/(2 cos(theta/2)) with sin = i*tau
    return c, s


def _wigner_seed(l: int, m1: int, m2: int, c: float, s: complex) -> complex:
    """d^l_{m1 m2} by the factorial sum; used only at l = max(|m1|, |m2|)."""
    pref = math.sqrt(
        math.factorial(l + m1)
        * math.factorial(l - m1)
        * math.factorial(l + m2)
        * math.factorial(l - m2)
    )
    out = 0.0 + 0.0j
    k_min = max(0, m2 - m1)
    k_max = min(l + m2, l - m1)
    for k in range(k_min, k_max + 1):
        denom = (
            math.factorial(l + m2 - k)
            * math.factorial(k)
            * math.factorial(m1 - m2 + k)
            * math.factorial(l - m1 - k)
        )
        out += (
            (-1) ** (m1 - m2 + k)
            / denom
            * c ** (2 * l + m2 - m1 - 2 * k)
            * s ** (m1 - m2 + 2 * k)
        )
    return pref * out


def wigner_d_continued(l: int, m1: int, m2: int, tau: float) -> complex:
    """Wigner d^l_{m1 m2} at the continued angle with sin(theta) = i*tau.

    Built by the three-term recurrence in l from the closed-form seed at
    l0 = max(|m1|, |m2|); only cos(theta) and sin(theta) enter, so the
    analytic continuation off the real angle is automatic.
    """
    if abs(m1) > l or abs(m2) > l:
        raise ValueError("need |m1| <= l and |m2| <= l")
    x = math.sqrt(1.0 + tau * tau)  # cos(theta) >= 1
    c, s = _half_angle(tau)
    l0 = max(abs(m1), abs(m2))
    d_prev = 0.0 + 0.0j
    d_curr = _wigner_seed(l0, m1, m2, c, s)
    if l0 == 0 and l >= 1:
        # The l -> l+1 step carries a factor l; start one level up.
        d_prev, d_curr = d_curr, complex(x)
        l0 = 1
    for ll in range(l0, l):
        c_next = ll * math.sqrt(
            ((ll + 1) ** 2 - m1 * m1) * ((ll + 1) ** 2 - m2 * m2)
        )
        c_prev = (ll + 1) * math.sqrt((ll * ll - m1 * m1) * (ll * ll - m2 * m2))
        d_next = (
            (2 * ll + 1) * (ll * (ll + 1) * x - m1 * m2) * d_curr
            - c_prev * d_prev
        ) / c_next
        d_prev, d_curr = d_curr, d_next
    return d_curr


def bessel_j0(x: float) -> float:
    """Bessel function J0.

    Delegates to the cephes routine (power series below, rational/asymptotic
    forms above a fixed crossover), which is accurate to ~1e-15 absolute.
    """
    return float(_scipy_j0(x))


def bessel_remainder_d(q, rho_star):
    """q*J0(q*rho_star) minus its 4-term large-argument asymptotic form.

    The remainder decays like (q*rho_star)^(-9/2) and is integrated by an
    ordinary rule, while the subtracted oscillatory part is handled by
    double-exponential quadrature.
    """
    q = np.asarray(q, dtype=float)
    x = q * rho_star
    amp = np.sqrt(2.0 * q / (np.pi * rho_star))
    cos_part = (1.0 - 9.0 / (128.0 * x * x)) * np.cos(x - np.pi / 4.0)
    sin_part = (1.0 / (8.0 * x) - 75.0 / (1024.0 * x**3)) * np.sin(x - np.pi / 4.0)
    out = q * _scipy_j0(x) - amp * (cos_part + sin_part)
    if out.ndim == 0:
        return float(out)
    return out
