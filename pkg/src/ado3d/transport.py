"""Fourier-space solution pieces: fundamental solution and the F kernel.

Given the per-order eigensystems, this module assembles the fundamental
solution of the transverse-Fourier transport problem, the scattered
intensity for the pencil-beam source, and the axisymmetric kernel F(q, z)
whose Fourier-Bessel inversion yields the energy density.  Lengths here are
in scaled units (distances multiplied by the transport coefficient).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_legendre

from .errors import AssemblyError
from .spectral import (
    EigenSystem,
    MediumParams,
    WaveVector,
    _signed_gl,
    normalization_factor,
    rotated_mode,
)
from .special import wigner_d_continued

__all__ = [
    "exp_diff_C",
    "GreenCoefficients",
    "greens_function",
    "scattered_intensity_hat",
    "f_kernel",
    "FourierKernel",
    "SpectralField",
]

# Relative width of the degenerate-denominator switch in exp_diff_C.
_C_EPS_REL = 1e-7
_F_IMAG_TOL = 1e-8


def exp_diff_C(tau: float, zeta: float, eta: float) -> float:
    """Difference quotient C(tau; zeta, eta) = (e^{-tau/zeta} - e^{-tau/eta}) / (zeta - eta).

    Near the removable singularity zeta = eta the analytic limit
    (tau/eta^2) e^{-tau/eta} is substituted together with its first-order
    correction in (zeta - eta), which keeps the jump across the switch
    second-order small in the switch width.
    """
    if zeta == 0.0 or eta == 0.0:
        raise ValueError("zeta and eta must be nonzero")
    eps = _C_EPS_REL * max(abs(zeta), abs(eta))
    diff = zeta - eta
    if abs(diff) <= eps:
        slope = tau * tau / (2.0 * eta**4) - tau / eta**3
        return (tau / (eta * eta) + diff * slope) * math.exp(-tau / eta)
    # expm1 keeps the difference of exponentials fully accurate when the
    # exponents nearly coincide just outside the switch; for well-separated
    # exponents the plain difference is safe and avoids overflow of expm1.
    arg = tau * diff / (zeta * eta)
    if abs(arg) <= 1.0:
        return math.exp(-tau / eta) * math.expm1(arg) / diff
    return (math.exp(-tau / zeta) - math.exp(-tau / eta)) / diff


def _exp_diff_c_array(tau: float, zeta: float, eta: np.ndarray) -> np.ndarray:
    """Vectorized exp_diff_C over an array of eta with scalar tau, zeta."""
    eta = np.asarray(eta, dtype=float)
    eps = _C_EPS_REL * np.maximum(abs(zeta), np.abs(eta))
    diff = zeta - eta
    degenerate = np.abs(diff) <= eps
    safe = np.where(degenerate, 1.0, diff)
    arg = tau * safe / (zeta * eta)
    near = np.abs(arg) <= 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        accurate = np.exp(-tau / eta) * np.expm1(np.where(near, arg, 0.0))
        plain = np.exp(-tau / zeta) - np.exp(-tau / eta)
    generic = np.where(near, accurate, plain) / safe
    slope = tau * tau / (2.0 * eta**4) - tau / eta**3
    limit = (tau / (eta * eta) + diff * slope) * np.exp(-tau / eta)
    return np.where(degenerate, limit, generic)


@dataclass(frozen=True)
class GreenCoefficients:
    """Mode coefficients of the fundamental solution for a point source.

    The source sits at the quadrature direction `source_index` with azimuth
    `phi0`; coefficient `a` weights the decaying modes above the source
    plane and `b` the decaying modes below it.
    """

    medium: MediumParams
    systems: dict[int, EigenSystem]

    def _source_factor(
        self, m: int, n: int, nu_sign: int, q: float, source_index: int,
        phi0: float, phi_q: float,
    ) -> complex:
        system = self.systems[abs(m)]
        quad = system.quad
        mu0 = float(quad.nodes[source_index])
        nu = nu_sign * float(system.eigenvalues[n])
        wave = WaveVector(nu=nu, q=q, phi_q=phi_q)
        # The conjugated mode of order m is the mode of order -m.
        return rotated_mode(system, n, wave, mu0, phi0, order=-m)

    def a(self, m: int, n: int, q: float, source_index: int, phi0: float,
          phi_q: float = 0.0) -> complex:
        system = self.systems[abs(m)]
        w0 = float(system.quad.weights[source_index])
        norm = normalization_factor(system, n, q)
        return w0 / norm * self._source_factor(m, n, +1, q, source_index, phi0, phi_q)

    def b(self, m: int, n: int, q: float, source_index: int, phi0: float,
          phi_q: float = 0.0) -> complex:
        # The normalization factor is antisymmetric in nu, so the leading
        # minus sign of the jump-condition solution cancels against it.
        system = self.systems[abs(m)]
        w0 = float(system.quad.weights[source_index])
        norm = normalization_factor(system, n, q)
        return w0 / norm * self._source_factor(m, n, -1, q, source_index, phi0, phi_q)


def greens_function(
    medium: MediumParams,
    systems: dict[int, EigenSystem],
    q: float,
    z: float,
    mu: float,
    phi: float,
    z_source: float,
    source_index: int,
    phi0: float,
    phi_q: float = 0.0,
) -> complex:
    """Fundamental solution G_q(z, s; z', s_{i0}) away from the jump plane.

    Above the source plane only the modes decaying upward contribute, below
    it only those decaying downward; z = z_source is excluded because the
    solution jumps there.
    """
    if z == z_source:
        raise ValueError("greens_function is undefined on the jump plane")
    coeffs = GreenCoefficients(medium=medium, systems=systems)
    degree = medium.degree
    total = 0.0 + 0.0j
    for m in range(-degree, degree + 1):
        system = systems[abs(m)]
        for n in range(system.n_modes):
            nu = float(system.eigenvalues[n])
            kz = math.sqrt(1.0 + (nu * q) ** 2)
            if z > z_source:
                amp = coeffs.a(m, n, q, source_index, phi0, phi_q)
                wave = WaveVector(nu=nu, q=q, phi_q=phi_q)
                decay = math.exp(-kz * (z - z_source) / nu)
            else:
                amp = coeffs.b(m, n, q, source_index, phi0, phi_q)
                wave = WaveVector(nu=-nu, q=q, phi_q=phi_q)
                decay = math.exp(kz * (z - z_source) / nu)
            mode = rotated_mode(system, n, wave, mu, phi, order=m)
            total += amp * mode * decay
    return total


def _beam_sums(
    system: EigenSystem, m: int, n: int, tau: float
) -> tuple[complex, complex]:
    """Sums over l of (2l+1) g^l g_l^m(+-nu) d^l_{0m} at the continued angle.

    These carry the pencil-beam direction into the mode expansion; the plus
    and minus variants differ by the parity of the Chandrasekhar values.
    """
    phase = system.phase
    am = abs(m)
    ls = np.arange(am, phase.degree + 1)
    d0m = np.array([wigner_d_continued(l, 0, m, tau) for l in ls])
    coeff = (2 * ls + 1) * phase.anisotropy ** ls.astype(float)
    gl_pos = _signed_gl(system, n, m, +1)
    gl_neg = _signed_gl(system, n, m, -1)
    return complex((coeff * gl_pos) @ d0m), complex((coeff * gl_neg) @ d0m)


def scattered_intensity_hat(
    medium: MediumParams,
    systems: dict[int, EigenSystem],
    q: float,
    phi_q: float,
    z: float,
    mu: float,
    phi: float,
) -> complex:
    """Scattered intensity in transverse-Fourier space for the +z pencil beam.

    The three exponential pieces cover transmission through the source
    plane, direct decay above it, and decay below it; at z = 0 the branches
    agree, and the z >= 0 branch is used there.
    """
    albedo = medium.albedo
    mu_t = medium.mu_t
    total = 0.0 + 0.0j
    for m in range(-medium.degree, medium.degree + 1):
        system = systems[abs(m)]
        for n in range(system.n_modes):
            nu = float(system.eigenvalues[n])
            kz = math.sqrt(1.0 + (nu * q) ** 2)
            tau = abs(nu * q)
            s_plus, s_minus = _beam_sums(system, m, n, tau)
            norm = normalization_factor(system, n, q)
            wave_neg = WaveVector(nu=-nu, q=q, phi_q=phi_q)
            mode_neg = rotated_mode(system, n, wave_neg, mu, phi, order=m)
            if z >= 0.0:
                wave_pos = WaveVector(nu=nu, q=q, phi_q=phi_q)
                mode_pos = rotated_mode(system, n, wave_pos, mu, phi, order=m)
                psi1 = exp_diff_C(z, 1.0, nu / kz) * mode_pos * s_plus
                psi2 = math.exp(-z) * kz / (nu + kz) * mode_neg * s_minus
                bracket = psi1 + psi2
            else:
                bracket = (
                    math.exp(kz * z / nu) * kz / (nu + kz) * mode_neg * s_minus
                )
            total += (-1) ** m * nu / (norm * kz) * bracket
    return 0.5 * albedo * mu_t**2 * total


def f_kernel(
    medium: MediumParams, system_m0: EigenSystem, q: float, z_star: float
) -> float:
    """Axisymmetric kernel F(q, z) built from the m = 0 eigensystem.

    Assembled through the analytically continued rotation factors and
    checked to be real; use FourierKernel for grid evaluation, which
    exploits that those factors reduce to Legendre polynomials at m = 0.
    """
    if system_m0.order != 0:
        raise ValueError("f_kernel requires the m = 0 eigensystem")
    phase = system_m0.phase
    ls = np.arange(0, phase.degree + 1)
    coeff = (2 * ls + 1) * phase.anisotropy ** ls.astype(float)
    total = 0.0 + 0.0j
    for n in range(system_m0.n_modes):
        nu = float(system_m0.eigenvalues[n])
        kz = math.sqrt(1.0 + (nu * q) ** 2)
        tau = abs(nu * q)
        d00 = np.array([wigner_d_continued(l, 0, 0, tau) for l in ls])
        # The recurrence-built moments keep the large-q cancellation of the
        # l-sums intact (see EigenSystem docstring).
        gl = system_m0.gl_recurrence[n]
        s_plus = complex((coeff * gl) @ d00)
        s_minus = complex((coeff * gl * (-1.0) ** ls) @ d00)
        norm = normalization_factor(system_m0, n, q)
        if z_star >= 0.0:
            val = (
                exp_diff_C(z_star, 1.0, nu / kz) / kz * s_plus
                + math.exp(-z_star) / (kz + nu) * s_minus
            )
        else:
            val = math.exp(kz * z_star / nu) / (kz + nu) * s_minus
        total += nu / norm * val
    if abs(total.imag) > _F_IMAG_TOL * max(abs(total.real), 1e-300):
        raise AssemblyError(
            f"F(q={q}, z={z_star}) has imaginary residue {total.imag}"
        )
    return total.real


class FourierKernel:
    """Vectorized F(q, z) over a fixed q grid.

    The m = 0 rotation factors equal Legendre polynomials of the continued
    cosine kz, so all q-dependent mode tables are precomputed once; each z
    evaluation is then a cheap weighted sum of exponentials.
    """

    def __init__(
        self, medium: MediumParams, system_m0: EigenSystem, q: np.ndarray
    ):
        if system_m0.order != 0:
            raise ValueError("FourierKernel requires the m = 0 eigensystem")
        q = np.asarray(q, dtype=float)
        if np.any(q < 0):
            raise ValueError("q grid must be nonnegative")
        self.medium = medium
        self.system = system_m0
        self.q = q

        phase = system_m0.phase
        ls = np.arange(0, phase.degree + 1)
        coeff = (2 * ls + 1) * phase.anisotropy ** ls.astype(float)
        nu = system_m0.eigenvalues  # (N,)
        kz = np.sqrt(1.0 + (nu[:, None] * q[None, :]) ** 2)  # (N, Q)
        # d^l_{00} at the continued angle is P_l(kz).
        pl = np.stack([eval_legendre(int(l), kz) for l in ls])  # (L, N, Q)
        # Recurrence-built moments: the discrete-sum table breaks the
        # delicate large-q cancellation of these l-sums.
        gl = system_m0.gl_recurrence  # (N, L)
        self._s_plus = np.einsum("l,nl,lnq->nq", coeff, gl, pl)
        self._s_minus = np.einsum("l,nl,lnq->nq", coeff * (-1.0) ** ls, gl, pl)
        norm = 2.0 * np.pi * kz * system_m0.norm_sums[:, None]  # N(nu, q)
        self._nu = nu
        self._kz = kz
        self._amp = nu[:, None] / norm

    def values(self, z_star: float) -> np.ndarray:
        """F(q, z_star) over the stored q grid."""
        nu = self._nu[:, None]
        kz = self._kz
        if z_star >= 0.0:
            c = _exp_diff_c_array(z_star, 1.0, nu / kz) / kz
            per_mode = c * self._s_plus + (
                math.exp(-z_star) / (kz + nu)
            ) * self._s_minus
        else:
            per_mode = np.exp(kz * z_star / nu) / (kz + nu) * self._s_minus
        return np.sum(self._amp * per_mode, axis=0)


@dataclass(frozen=True)
class SpectralField:
    """F sampled on a (z, q) grid; values[i, j] = F(q_grid[j], z_grid[i])."""

    q_grid: np.ndarray = field(repr=False)
    z_grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        q = np.asarray(self.q_grid, dtype=float)
        z = np.asarray(self.z_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(z), len(q)):
            raise ValueError("values must have shape (len(z_grid), len(q_grid))")
        if not np.all(np.isfinite(v)):
            raise ValueError("F values must be finite")
        if len(z) > 1 and not np.all(np.diff(z) > 0):
            raise ValueError("z grid must be strictly increasing")
        object.__setattr__(self, "q_grid", q)
        object.__setattr__(self, "z_grid", z)
        object.__setattr__(self, "values", v)

    @classmethod
    def compute(
        cls,
        medium: MediumParams,
        system_m0: EigenSystem,
        q_grid: np.ndarray,
        z_grid: np.ndarray,
    ) -> "SpectralField":
        kernel = FourierKernel(medium, system_m0, np.asarray(q_grid))
        rows = [kernel.values(float(z)) for z in np.asarray(z_grid)]
        return cls(q_grid=np.asarray(q_grid), z_grid=np.asarray(z_grid),
                   values=np.vstack(rows))
