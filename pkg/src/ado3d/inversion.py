"""Fourier-Bessel inversion of the F kernel to the energy density U(rho, z).

The semi-infinite oscillatory q-integral is split into a finite head, a
rapidly decaying remainder after subtracting the large-argument Bessel
asymptotics, and two oscillatory tail integrals handled by a
double-exponential variable transformation tuned to the cos/sin zeros.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InversionFailureError
from .spectral import EigenSystem, MediumParams
from .special import bessel_remainder_d
from .transport import FourierKernel

__all__ = [
    "InversionParams",
    "DensityField",
    "de_phi",
    "energy_density",
    "density_curve",
]

_NEGATIVE_CLAMP_REL = 1e-12


@dataclass(frozen=True)
class InversionParams:
    """Quadrature controls for the split inversion integral."""

    de_step: float = 0.01
    de_halfwidth: int = 400
    trapezoids: int = 10_000
    segment2_upper: float = 1.0

    def __post_init__(self):
        if self.de_step <= 0:
            raise ValueError("de_step must be positive")
        if self.de_halfwidth < 1:
            raise ValueError("de_halfwidth must be >= 1")
        if self.trapezoids < 2:
            raise ValueError("trapezoids must be >= 2")
        if self.segment2_upper <= 0:
            raise ValueError("segment2_upper must be positive")


@dataclass(frozen=True)
class DensityField:
    """Energy density samples along z at fixed rho (user units, mm)."""

    rho: float
    z: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    provenance: str = "ADO"
    stderr: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        v = np.asarray(self.values, dtype=float).copy()
        if self.rho < 0:
            raise ValueError("rho must be >= 0")
        if z.ndim != 1 or v.shape != z.shape:
            raise ValueError("z and values must be matching 1-d arrays")
        if len(z) > 1 and not np.all(np.diff(z) > 0):
            raise ValueError("z grid must be strictly increasing")
        peak = np.max(np.abs(v)) if len(v) else 0.0
        negative = v < 0.0
        if np.any(v < -_NEGATIVE_CLAMP_REL * peak):
            raise ValueError("density values are negative beyond tolerance")
        if np.any(negative):
            warnings.warn(
                "clamping tiny negative density values to zero",
                stacklevel=2,
            )
            v[negative] = 0.0
        if self.stderr is not None:
            err = np.asarray(self.stderr, dtype=float)
            if err.shape != z.shape:
                raise ValueError("stderr must match the z grid")
            object.__setattr__(self, "stderr", err)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "values", v)


def de_phi(t: float) -> tuple[float, float]:
    """Double-exponential node map phi(t) = t / (1 - e^{-6 sinh t}) and phi'.

    The removable singularity at t = 0 is bridged by the Taylor series
    phi = 1/6 + t/2 + (17/36) t^2 + O(t^3), phi' = 1/2 + (17/18) t + O(t^2).
    """
    if abs(t) < 1e-5:
        return (
            1.0 / 6.0 + 0.5 * t + (17.0 / 36.0) * t * t,
            0.5 + (17.0 / 18.0) * t,
        )
    s = math.sinh(t)
    if 6.0 * s < -700.0:
        # Deep negative tail: 1 - e^{-6 sinh t} ~ -e^{-6 sinh t}, and both
        # phi and phi' underflow towards +0 like e^{6 sinh t}.
        e6 = math.exp(6.0 * s)
        return -t * e6, -6.0 * t * math.cosh(t) * e6
    e = math.exp(-6.0 * s)
    denom = 1.0 - e
    phi = t / denom
    dphi = (1.0 - (1.0 + 6.0 * t * math.cosh(t)) * e) / (denom * denom)
    return phi, dphi


def _de_nodes(params: InversionParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """phi and phi' on the half-offset and integer DE abscissas."""
    h = params.de_step
    k = np.arange(-params.de_halfwidth, params.de_halfwidth + 1)
    t_half = k * h + 0.5 * h
    t_int = k * h
    ph = np.array([de_phi(float(t)) for t in t_half])
    pi_ = np.array([de_phi(float(t)) for t in t_int])
    return ph, pi_, k


class _SplitIntegrator:
    """Shared q-grids and F kernels for one (medium, eigensystem, rho)."""

    def __init__(
        self,
        medium: MediumParams,
        system_m0: EigenSystem,
        rho: float,
        params: InversionParams,
    ):
        if rho <= 0:
            raise ValueError("rho must be positive (on-axis point excluded)")
        self.medium = medium
        self.params = params
        self.rho = rho
        self.rho_star = medium.mu_t * rho
        self.a = math.pi / (4.0 * self.rho_star)

        n_trap = params.trapezoids
        # Segment 1: [0, a] with q J0(q rho*) F.
        self.q1 = np.linspace(0.0, self.a, n_trap + 1)
        # Segment 2: [a, a + upper] with the asymptotic remainder d(q, rho*).
        self.q2 = np.linspace(
            self.a, self.a + params.segment2_upper, n_trap + 1
        )
        # Segment 3: DE nodes for the two oscillatory tails, s = q - a.
        half, integer, _ = _de_nodes(params)
        scale = math.pi / (params.de_step * self.rho_star)
        # phi > 0 analytically but underflows to +0 deep in the negative
        # tail (where phi' underflows too); clamp so s stays positive.
        tiny = np.finfo(float).tiny
        self.s_half = np.maximum(scale * half[:, 0], tiny)
        self.w_half = half[:, 1]
        self.s_int = np.maximum(scale * integer[:, 0], tiny)
        self.w_int = integer[:, 1]
        if np.any(self.s_half <= 0.0) or np.any(self.s_int <= 0.0):
            raise InversionFailureError("DE node map produced nonpositive s")

        self.kernel1 = FourierKernel(medium, system_m0, self.q1)
        self.kernel2 = FourierKernel(medium, system_m0, self.q2)
        self.kernel3h = FourierKernel(medium, system_m0, self.s_half + self.a)
        self.kernel3i = FourierKernel(medium, system_m0, self.s_int + self.a)

        from scipy.special import j0

        self.bessel1 = self.q1 * j0(self.q1 * self.rho_star)
        with np.errstate(divide="ignore", invalid="ignore"):
            self.remainder2 = bessel_remainder_d(self.q2, self.rho_star)
        # q = a > 0 strictly, so no singular entries are expected.
        if not np.all(np.isfinite(self.remainder2)):
            raise InversionFailureError("non-finite Bessel remainder on segment 2")

        x_half = self.s_half * self.rho_star + math.pi / 4.0
        self.env1 = (
            np.sqrt(self.s_half + self.a)
            * (1.0 - 9.0 / (128.0 * x_half**2))
            * np.cos(self.s_half * self.rho_star)
        )
        x_int = self.s_int * self.rho_star + math.pi / 4.0
        self.env2 = (
            np.sqrt(self.s_int + self.a)
            * (1.0 / (8.0 * x_int) - 75.0 / (1024.0 * x_int**3))
            * np.sin(self.s_int * self.rho_star)
        )

    def evaluate(self, z_star: float) -> float:
        medium = self.medium
        f1 = self.kernel1.values(z_star)
        f2 = self.kernel2.values(z_star)
        f3h = self.kernel3h.values(z_star)
        f3i = self.kernel3i.values(z_star)
        for name, arr in (("segment1", f1), ("segment2", f2),
                          ("tail-cos", f3h), ("tail-sin", f3i)):
            if not np.all(np.isfinite(arr)):
                bad = np.argwhere(~np.isfinite(arr))[0, 0]
                raise InversionFailureError(
                    f"non-finite F in {name} at node index {bad}"
                )
        pref = 0.5 * medium.albedo * medium.mu_t**2
        seg1 = pref * np.trapezoid(self.bessel1 * f1, self.q1)
        seg2 = pref * np.trapezoid(self.remainder2 * f2, self.q2)
        de_scale = math.pi / self.rho_star
        tail = (
            medium.albedo
            * medium.mu_t**2
            / math.sqrt(2.0 * math.pi * self.rho_star)
            * de_scale
            * (
                float(np.sum(self.env1 * f3h * self.w_half))
                + float(np.sum(self.env2 * f3i * self.w_int))
            )
        )
        return seg1 + seg2 + tail


def energy_density(
    medium: MediumParams,
    system_m0: EigenSystem,
    rho: float,
    z: float,
    params: InversionParams | None = None,
) -> float:
    """Energy density U(rho, z) in 1/mm^3 per unit source power; mm inputs."""
    params = params or InversionParams()
    integrator = _SplitIntegrator(medium, system_m0, rho, params)
    return integrator.evaluate(medium.mu_t * z)


def density_curve(
    medium: MediumParams,
    system_m0: EigenSystem,
    rho: float,
    z_grid: np.ndarray,
    params: InversionParams | None = None,
) -> DensityField:
    """U(rho, z) over a strictly increasing z grid, reusing all q tables."""
    z_grid = np.asarray(z_grid, dtype=float)
    if z_grid.size == 0:
        raise ValueError("z grid must be nonempty")
    if len(z_grid) > 1 and not np.all(np.diff(z_grid) > 0):
        raise ValueError("z grid must be strictly increasing")
    params = params or InversionParams()
    integrator = _SplitIntegrator(medium, system_m0, rho, params)
    values = np.array(
        [integrator.evaluate(medium.mu_t * float(z)) for z in z_grid]
    )
    return DensityField(rho=rho, z=z_grid, values=values, provenance="ADO")
