"""Per-azimuthal-order eigenproblem of the discrete-ordinates method.

For each order m the scattering kernel couples the N positive and N negative
direction cosines through a pair of N x N matrices; the separation constants
nu and the mode shapes follow from a small nonsymmetric eigenproblem.  Modes
are evaluated either in the beam frame or in a frame rotated to a complex
unit vector, which is where the analytically continued Wigner d-matrices
come in.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateModeError,
    NormalizationFailureError,
    PoleProximityError,
    SpectralFailureError,
)
from .quadrature import QuadratureSet
from .special import (
    PhaseFunction,
    ChandrasekharTable,
    chandrasekhar_g,
    normalized_plm_table,
    wigner_d_continued,
)

__all__ = [
    "MediumParams",
    "WaveVector",
    "EigenSystem",
    "build_w_matrices",
    "solve_eigensystem",
    "solve_all_orders",
    "eigenmode_phi",
    "eigenmode_phi_closed_form",
    "rotated_mode",
    "normalization_factor",
]

_IMAG_TOL = 1e-8  # relative imaginary part allowed on eigenvalues of 1/nu^2
_NODE_CLEARANCE = 1e-10
_POLE_TOL = 1e-12


@dataclass(frozen=True)
class MediumParams:
    """Homogeneous optical medium; the beam direction is fixed to +z."""

    mu_a: float  # 1/mm
    mu_s: float  # 1/mm
    anisotropy: float
    degree: int

    def __post_init__(self):
        if self.mu_a <= 0 or self.mu_s <= 0:
            raise ValueError("mu_a and mu_s must be positive")
        if not 0.0 <= self.anisotropy <= 1.0:
            raise ValueError("anisotropy must be in [0, 1]")
        if self.degree < 0:
            raise ValueError("degree must be >= 0")

    @property
    def mu_t(self) -> float:
        return self.mu_a + self.mu_s

    @property
    def albedo(self) -> float:
        return self.mu_s / self.mu_t

    @property
    def phase(self) -> PhaseFunction:
        return PhaseFunction(
            anisotropy=self.anisotropy, degree=self.degree, albedo=self.albedo
        )


@dataclass(frozen=True)
class WaveVector:
    """Complex unit vector k(nu, q) addressed by its defining parameters."""

    nu: float
    q: float
    phi_q: float = 0.0

    def __post_init__(self):
        if self.q < 0:
            raise ValueError("q must be >= 0")

    @property
    def kz(self) -> float:
        return math.sqrt(1.0 + (self.nu * self.q) ** 2)

    @property
    def tau(self) -> float:
        return abs(self.nu * self.q)

    @property
    def phi_k(self) -> float:
        # Continued azimuth: the transverse components are -i*nu*q, so the
        # azimuth picks up pi when nu > 0.
        return self.phi_q + math.pi if self.nu > 0 else self.phi_q

    def s_dot_k(self, mu: float, phi: float) -> complex:
        root = math.sqrt(max(0.0, 1.0 - mu * mu))
        return (
            -1j * self.nu * self.q * root * math.cos(phi - self.phi_q)
            + self.kz * mu
        )

    def self_dot(self) -> complex:
        """k . k under the complex bilinear dot product (identically 1)."""
        return (-1j * self.nu * self.q) ** 2 + self.kz**2


def build_w_matrices(
    m: int, quad: QuadratureSet, phase: PhaseFunction
) -> tuple[np.ndarray, np.ndarray]:
    """Scattering coupling matrices (W_+, W_-) for azimuthal order m.

    {W_+-}_{ij} = w_j sum_l (2l+1) g^l p_l^m(+-mu_i) p_l^m(mu_j) (1-mu_j^2)^|m|.
    Orders above the phase-function degree give empty sums, hence zeros.
    """
    am = abs(m)
    n = quad.half_order
    if am > phase.degree:
        z = np.zeros((n, n))
        return z, z.copy()
    mu = quad.positive_nodes
    w = quad.positive_weights
    p = normalized_plm_table(phase.degree, am, mu)  # (l - am, i)
    coeff = np.array(
        [(2 * l + 1) * phase.moment(l) for l in range(am, phase.degree + 1)]
    )
    # p_l^m(-mu) = (-1)^(l+m) p_l^m(mu)
    parity = np.array([(-1) ** (l + am) for l in range(am, phase.degree + 1)])
    col = p * (1.0 - mu * mu) ** am * w  # rows l, cols j
    w_plus = np.einsum("l,li,lj->ij", coeff, p, col)
    w_minus = np.einsum("l,l,li,lj->ij", coeff, parity, p, col)
    return w_plus, w_minus


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues and mode shapes of the order-m discrete eigenproblem.

    phi_plus[n, i] = phi^m(nu_n, +mu_i), phi_minus[n, i] = phi^m(nu_n, -mu_i)
    for the N positive cosines mu_i.  gl[n] holds the Chandrasekhar moments
    of mode n computed from the eigenvector itself (discrete sums), which
    keeps the pole closed form exact at the quadrature nodes.

    gl_recurrence[n] holds the same moments rebuilt directly from the
    three-term recurrence at nu_n.  The two tables agree to quadrature
    accuracy, but only the recurrence values satisfy the recurrence to
    machine precision; the beam-frame kernel sums combine them with
    Legendre polynomials of arguments that grow like q, and the resulting
    cancellation at large q amplifies any recurrence defect by q**l, so
    those sums must use the recurrence table.
    """

    order: int
    quad: QuadratureSet
    phase: PhaseFunction
    eigenvalues: np.ndarray = field(repr=False)
    phi_plus: np.ndarray = field(repr=False)
    phi_minus: np.ndarray = field(repr=False)
    gl: np.ndarray = field(repr=False)  # (n, l - |m|), l up to phase.degree
    gl_recurrence: np.ndarray = field(repr=False)  # same shape as gl
    norm_sums: np.ndarray = field(repr=False)  # sum_i w_i mu_i |Phi|^2 per mode

    @property
    def n_modes(self) -> int:
        return len(self.eigenvalues)

    def chandrasekhar_table(self, n: int) -> ChandrasekharTable:
        return ChandrasekharTable(
            order=self.order, nu=float(self.eigenvalues[n]), values=self.gl[n]
        )

    def phi_at_node(self, n: int, node_index: int) -> float:
        """phi^m(nu_n, mu) at quadrature node node_index (positive nodes
        first, then their negatives, matching QuadratureSet ordering)."""
        half = self.quad.half_order
        if node_index < half:
            return float(self.phi_plus[n, node_index])
        return float(self.phi_minus[n, node_index - half])


def _signed_gl(system: EigenSystem, n: int, m: int, nu_sign: int) -> np.ndarray:
    """Chandrasekhar moments for signed order m and signed eigenvalue."""
    am = abs(m)
    ls = np.arange(am, system.phase.degree + 1)
    gl = system.gl[n].copy()
    if m < 0:
        gl *= (-1) ** am
    if nu_sign < 0:
        gl *= (-1.0) ** (ls - am)
    return gl


def solve_eigensystem(
    m: int, quad: QuadratureSet, medium: MediumParams
) -> EigenSystem:
    """Solve the order-m eigenproblem and assemble the normalized modes."""
    am = abs(m)
    phase = medium.phase
    if am > phase.degree:
        raise ValueError("order |m| must not exceed the phase-function degree")
    n = quad.half_order
    mu = quad.positive_nodes
    w = quad.positive_weights
    albedo = phase.albedo

    w_plus, w_minus = build_w_matrices(am, quad, phase)
    inv_xi = np.diag(1.0 / mu)
    e_plus = (np.eye(n) - 0.5 * albedo * (w_plus + w_minus)) @ inv_xi
    e_minus = (np.eye(n) - 0.5 * albedo * (w_plus - w_minus)) @ inv_xi

    lam, vecs = np.linalg.eig(e_minus @ e_plus)
    bad = np.abs(lam.imag) > _IMAG_TOL * np.abs(lam.real)
    if np.any(bad):
        raise SpectralFailureError(
            f"complex eigenvalue of 1/nu^2 at m={m}, N={n}: {lam[bad][0]}"
        )
    lam = lam.real
    keep = lam > 0.0
    if np.count_nonzero(keep) != n:
        raise SpectralFailureError(
            f"expected {n} positive eigenvalues at m={m}, found "
            f"{np.count_nonzero(keep)}"
        )
    nus = 1.0 / np.sqrt(lam[keep])
    order_idx = np.argsort(-nus)
    nus = nus[order_idx]
    vecs = vecs[:, keep][:, order_idx].real

    if np.min(np.abs(nus[:, None] - quad.nodes[None, :])) <= _NODE_CLEARANCE:
        raise SpectralFailureError(
            f"an eigenvalue coincides with a quadrature node at m={m}"
        )

    lhs = np.eye(n) - 0.5 * albedo * (w_plus - w_minus)
    weight_m = w * (1.0 - mu * mu) ** am

    phi_plus = np.empty((n, n))
    phi_minus = np.empty((n, n))
    for k in range(n):
        u = vecs[:, k] / mu  # eigenvector of E-E+ is Xi @ U
        try:
            v = np.linalg.solve(lhs, (mu * u) / nus[k])
        except np.linalg.LinAlgError as exc:
            raise DegenerateModeError(
                f"singular mode completion at m={m}, n={k}"
            ) from exc
        scale = float(weight_m @ u)
        if abs(scale) < 1e-13:
            raise NormalizationFailureError(
                f"vanishing normalization sum at m={m}, n={k}"
            )
        u /= scale
        v /= scale
        phi_plus[k] = 0.5 * (u + v)
        phi_minus[k] = 0.5 * (u - v)

    # Discrete Chandrasekhar moments of each mode:
    # g_l = sum_i w_i phi(nu, mu_i) p_l^m(mu_i) (1 - mu_i^2)^|m|
    p = normalized_plm_table(phase.degree, am, mu)  # (l - am, i)
    parity = np.array([(-1) ** (l + am) for l in range(am, phase.degree + 1)])
    gl = np.einsum("li,ni,i->nl", p, phi_plus, weight_m) + np.einsum(
        "l,li,ni,i->nl", parity, p, phi_minus, weight_m
    )
    gl_rec = np.stack(
        [
            chandrasekhar_g(am, float(nu_k), phase, phase.degree).values
            for nu_k in nus
        ]
    )

    # mu-weighted quadratic norm over all 2N nodes (q-independent part of
    # the mode normalization factor).
    sq = (1.0 - mu * mu) ** am
    norm_sums = np.einsum("i,i,ni->n", w * mu, sq, phi_plus**2) - np.einsum(
        "i,i,ni->n", w * mu, sq, phi_minus**2
    )

    return EigenSystem(
        order=am,
        quad=quad,
        phase=phase,
        eigenvalues=nus,
        phi_plus=phi_plus,
        phi_minus=phi_minus,
        gl=gl,
        gl_recurrence=gl_rec,
        norm_sums=norm_sums,
    )


def solve_all_orders(
    quad: QuadratureSet, medium: MediumParams
) -> dict[int, EigenSystem]:
    """EigenSystems for m = 0 .. degree; negative m follows by symmetry."""
    return {
        m: solve_eigensystem(m, quad, medium)
        for m in range(medium.degree + 1)
    }


def eigenmode_phi(system: EigenSystem, n: int, mu: float) -> float:
    """Stored eigenvector entry phi^m(nu_n, mu) at a quadrature node."""
    nu = float(system.eigenvalues[n])
    if abs(nu - mu) < _NODE_CLEARANCE:
        raise PoleProximityError(f"nu={nu} too close to node mu={mu}")
    idx = np.argmin(np.abs(system.quad.nodes - mu))
    if abs(system.quad.nodes[idx] - mu) > 1e-12:
        raise ValueError(f"mu={mu} is not a quadrature node")
    return system.phi_at_node(n, int(idx))


def eigenmode_phi_closed_form(system: EigenSystem, n: int, mu: float) -> float:
    """Pole closed form (albedo*nu/2) g^m(nu, mu) / (nu - mu)."""
    nu = float(system.eigenvalues[n])
    if abs(nu - mu) < _NODE_CLEARANCE:
        raise PoleProximityError(f"nu={nu} too close to mu={mu}")
    am = system.order
    phase = system.phase
    p = normalized_plm_table(phase.degree, am, mu)
    coeff = np.array(
        [(2 * l + 1) * phase.moment(l) for l in range(am, phase.degree + 1)]
    )
    gsum = float(coeff @ (p * system.gl[n]))
    return 0.5 * phase.albedo * nu * gsum / (nu - mu)


def _sph_harm_factors(phase: PhaseFunction, m: int, mu: float) -> np.ndarray:
    """Y_lm(mu, 0) for l = |m| .. degree (real azimuth-free part)."""
    am = abs(m)
    p = normalized_plm_table(phase.degree, m, mu)
    ls = np.arange(am, phase.degree + 1)
    return np.sqrt((2 * ls + 1) / (4.0 * np.pi)) * (-1) ** m * p * (
        1.0 - mu * mu
    ) ** (am / 2.0)


def rotated_mode(
    system: EigenSystem,
    n: int,
    wave: WaveVector,
    mu: float,
    phi: float,
    order: int | None = None,
) -> complex:
    """Mode of eigenvalue wave.nu evaluated in the frame rotated to k(nu, q).

    `order` selects the signed azimuthal order (default +system.order); the
    conjugated mode of order m equals the mode of order -m, which is how the
    Green's-function source factors are formed.
    """
    m = system.order if order is None else order
    if abs(m) != system.order:
        raise ValueError("order must be +-system.order")
    nu = wave.nu
    nu_n = float(system.eigenvalues[n])
    if not math.isclose(abs(nu), nu_n, rel_tol=1e-12):
        raise ValueError("wave.nu must match the selected eigenvalue")
    sk = wave.s_dot_k(mu, phi)
    if abs(nu - sk) < _POLE_TOL:
        raise PoleProximityError(f"complex pole at nu={nu}, s.k={sk}")

    phase = system.phase
    am = abs(m)
    gl = _signed_gl(system, n, m, 1 if nu > 0 else -1)
    ls = np.arange(am, phase.degree + 1)
    coeff = np.sqrt((2 * ls + 1) * np.pi) * phase.anisotropy**ls * gl

    if wave.q == 0.0:
        # k = z-hat exactly; the rotation is the identity.
        ylm = _sph_harm_factors(phase, m, mu) * cmath.exp(1j * m * phi)
        total = complex(coeff @ ylm)
    else:
        tau = wave.tau
        phi_k = wave.phi_k
        total = 0.0 + 0.0j
        for li, l in enumerate(ls):
            rot = 0.0 + 0.0j
            for mp in range(-l, l + 1):
                d = wigner_d_continued(l, mp, m, tau)
                ylmp = _sph_harm_factors(phase, mp, mu)[l - abs(mp)]
                rot += (
                    cmath.exp(-1j * mp * phi_k)
                    * d
                    * ylmp
                    * cmath.exp(1j * mp * phi)
                )
            total += coeff[li] * rot
    return (-1) ** m * phase.albedo * nu / (nu - sk) * total


def normalization_factor(system: EigenSystem, n: int, q: float) -> float:
    """Diagonal value of the mu-weighted bilinear form, order nu_n > 0.

    N(nu, q) = 2*pi*kz(nu*q) * sum_i w_i mu_i |Phi|^2; the extension to
    negative eigenvalues is antisymmetric, N(-nu, q) = -N(nu, q).
    """
    nu = float(system.eigenvalues[n])
    kz = math.sqrt(1.0 + (nu * q) ** 2)
    value = 2.0 * math.pi * kz * float(system.norm_sums[n])
    if value <= 0.0:
        raise NormalizationFailureError(
            f"non-positive normalization at m={system.order}, n={n}"
        )
    return value
