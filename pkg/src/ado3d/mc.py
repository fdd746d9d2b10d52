"""Monte Carlo photon-transport oracle for an infinite scattering medium.

An independent estimator of the energy density around a pencil beam:
photons take exponential free paths, scatter by the Henyey-Greenstein
phase function with implicit capture, and deposit absorbed weight into
cylindrical shell bins.  Per-bin standard errors come from the sample
variance over photon batches, so the estimate carries its own error bars
when compared against the deterministic solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .inversion import DensityField
from .spectral import MediumParams

__all__ = ["McConfig", "sample_hg", "run_mc", "run_mc_fields"]

_ROULETTE_SURVIVAL = 0.1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


@dataclass(frozen=True)
class McConfig:
    """Photon budget, RNG seed, and cylindrical-shell binning (mm units)."""

    photons: int
    seed: int
    rho_edges: np.ndarray = field(repr=False)
    z_edges: np.ndarray = field(repr=False)
    weight_cutoff: float = 1e-4
    batches: int = 100

    def __post_init__(self):
        if self.photons < 1:
            raise ValueError("photons must be >= 1")
        rho = np.asarray(self.rho_edges, dtype=float)
        z = np.asarray(self.z_edges, dtype=float)
        for name, edges in (("rho_edges", rho), ("z_edges", z)):
            if edges.ndim != 1 or len(edges) < 2:
                raise ValueError(f"{name} needs at least two edges")
            if not np.all(np.diff(edges) > 0):
                raise ValueError(f"{name} must be strictly increasing")
        if rho[0] < 0:
            raise ValueError("rho_edges must be nonnegative")
        if not 0.0 < self.weight_cutoff < 1.0:
            raise ValueError("weight_cutoff must be in (0, 1)")
        if not 1 <= self.batches <= self.photons:
            raise ValueError("batches must be in [1, photons]")
        object.__setattr__(self, "rho_edges", rho)
        object.__setattr__(self, "z_edges", z)

    @property
    def shell_volumes(self) -> np.ndarray:
        """Bin volumes in mm^3, shape (n_rho_bins, n_z_bins)."""
        area = math.pi * np.diff(self.rho_edges**2)
        dz = np.diff(self.z_edges)
        return area[:, None] * dz[None, :]


def sample_hg(g: float, u: float) -> float:
    """Inverse-CDF sample of cos(theta) from the Henyey-Greenstein kernel.

    The isotropic case takes its own branch; for g > 0 the standard closed
    form applies.  The result lies in [-1, 1] for u in [0, 1).
    """
    if not 0.0 <= g < 1.0:
        raise ValueError("g must be in [0, 1)")
    if g == 0.0:
        return 2.0 * u - 1.0
    frac = (1.0 - g * g) / (1.0 - g + 2.0 * g * u)
    cos_t = (1.0 + g * g - frac * frac) / (2.0 * g)
    return min(1.0, max(-1.0, cos_t))


@njit(cache=True, inline="always")
def _mix64(x):
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


@njit(cache=True, inline="always")
def _u01(state, counter):
    """Uniform deviate in [0, 1) from a photon state and draw counter."""
    bits = _mix64(state + counter * _GOLDEN)
    return (bits >> np.uint64(11)) * 1.1102230246251565e-16  # 2^-53


@njit(cache=True, fastmath=True)
def _flight_batch(
    first_photon,
    n_photons,
    seed,
    mu_t,
    albedo,
    g,
    rho2_edges,
    z_edges,
    z_uniform,
    cutoff,
    hist,
):
    """Propagate one batch and accumulate absorbed weight into hist."""
    n_rho = len(rho2_edges) - 1
    n_z = len(z_edges) - 1
    inv_mu_t = 1.0 / mu_t
    absorb_frac = 1.0 - albedo
    r2_max = rho2_edges[n_rho]
    r2_min = rho2_edges[0]
    z_lo = z_edges[0]
    z_hi = z_edges[n_z]
    inv_dz = (n_z / (z_hi - z_lo)) if z_uniform else 0.0
    one = np.uint64(1)
    total = 0.0
    for i in range(n_photons):
        state = _mix64(np.uint64(seed) + np.uint64(first_photon + i) * _GOLDEN)
        counter = np.uint64(0)
        x = 0.0
        y = 0.0
        z = 0.0
        ux = 0.0
        uy = 0.0
        uz = 1.0
        w = 1.0
        alive = True
        while alive:
            counter += one
            step = -math.log(1.0 - _u01(state, counter)) * inv_mu_t
            x += ux * step
            y += uy * step
            z += uz * step

            deposit = w * absorb_frac
            total += deposit
            r2 = x * x + y * y
            if r2_min <= r2 < r2_max and z_lo <= z < z_hi:
                ir = 0
                while rho2_edges[ir + 1] <= r2:
                    ir += 1
                if z_uniform:
                    iz = int((z - z_lo) * inv_dz)
                else:
                    lo = 0
                    hi = n_z
                    while hi - lo > 1:
                        mid = (lo + hi) // 2
                        if z_edges[mid] <= z:
                            lo = mid
                        else:
                            hi = mid
                    iz = lo
                hist[ir, iz] += deposit
            w *= albedo

            if w < cutoff:
                counter += one
                if _u01(state, counter) < _ROULETTE_SURVIVAL:
                    w /= _ROULETTE_SURVIVAL
                else:
                    alive = False
                    continue

            counter += one
            u = _u01(state, counter)
            if g == 0.0:
                cos_t = 2.0 * u - 1.0
            else:
                frac = (1.0 - g * g) / (1.0 - g + 2.0 * g * u)
                cos_t = (1.0 + g * g - frac * frac) / (2.0 * g)
                cos_t = min(1.0, max(-1.0, cos_t))
            # Uniform azimuth via unit-disk rejection: the trigonometry of
            # the sampled angle is read off the accepted point, and the
            # factor sin(theta)/|v| folds both normalizations into one sqrt.
            vx = 1.0
            vy = 0.0
            v2 = 2.0
            while v2 > 1.0 or v2 == 0.0:
                counter += one
                vx = 2.0 * _u01(state, counter) - 1.0
                counter += one
                vy = 2.0 * _u01(state, counter) - 1.0
                v2 = vx * vx + vy * vy
            scale = math.sqrt(max(0.0, 1.0 - cos_t * cos_t) / v2)
            st_cp = scale * vx
            st_sp = scale * vy
            # The update preserves unit length analytically; the double
            # precision drift over a photon lifetime is far below the bin
            # resolution, so no renormalization is applied.
            if abs(uz) > 0.99999:
                ux = st_cp
                uy = st_sp
                uz = cos_t * (1.0 if uz >= 0.0 else -1.0)
            else:
                denom = math.sqrt(1.0 - uz * uz)
                nx = (ux * uz * st_cp - uy * st_sp) / denom + ux * cos_t
                ny = (uy * uz * st_cp + ux * st_sp) / denom + uy * cos_t
                nz = -st_cp * denom + uz * cos_t
                ux = nx
                uy = ny
                uz = nz
    return total


def _run_histogram(
    medium: MediumParams, config: McConfig
) -> tuple[np.ndarray, np.ndarray, float]:
    """Absorbed-weight U estimate, standard error, and total absorbed weight."""
    volumes = config.shell_volumes
    if np.any(volumes <= 0.0):
        raise ValueError("binning produced a zero-volume bin")
    rho2_edges = config.rho_edges**2
    z_edges = config.z_edges
    dz = np.diff(z_edges)
    z_uniform = bool(np.max(np.abs(dz - dz[0])) <= 1e-12 * abs(dz[0]))

    bounds = np.linspace(0, config.photons, config.batches + 1).astype(np.int64)
    mean = np.zeros(volumes.shape)
    m2 = np.zeros(volumes.shape)
    total_absorbed = 0.0
    n_batches = 0
    for b in range(config.batches):
        first, last = int(bounds[b]), int(bounds[b + 1])
        if last == first:
            continue
        hist = np.zeros(volumes.shape)
        total_absorbed += _flight_batch(
            first,
            last - first,
            np.uint64(config.seed),
            medium.mu_t,
            medium.albedo,
            medium.anisotropy,
            rho2_edges,
            z_edges,
            z_uniform,
            config.weight_cutoff,
            hist,
        )
        # Welford update over per-photon batch means.
        batch_mean = hist / (last - first)
        n_batches += 1
        delta = batch_mean - mean
        mean += delta / n_batches
        m2 += delta * (batch_mean - mean)

    scale = 1.0 / (medium.mu_a * volumes)
    u = mean * scale
    if n_batches > 1:
        stderr = np.sqrt(m2 / (n_batches - 1) / n_batches) * scale
    else:
        stderr = np.full(volumes.shape, np.nan)
    return u, stderr, total_absorbed


def run_mc_fields(
    medium: MediumParams, config: McConfig
) -> list[DensityField]:
    """One DensityField per rho shell, all scored in a single photon flight."""
    u, stderr, _ = _run_histogram(medium, config)
    centers_z = 0.5 * (config.z_edges[:-1] + config.z_edges[1:])
    centers_r = 0.5 * (config.rho_edges[:-1] + config.rho_edges[1:])
    return [
        DensityField(
            rho=float(centers_r[i]),
            z=centers_z,
            values=u[i],
            provenance="MC",
            stderr=stderr[i],
        )
        for i in range(len(centers_r))
    ]


def run_mc(medium: MediumParams, config: McConfig) -> DensityField:
    """Energy density profile for a single-shell configuration.

    For several shells use run_mc_fields, which shares the photon flight
    across all of them.
    """
    if len(config.rho_edges) != 2:
        raise ValueError("run_mc expects exactly one rho shell")
    return run_mc_fields(medium, config)[0]
