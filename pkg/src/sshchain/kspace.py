"""Bloch-space quantities of the extended SSH model.

The off-diagonal Bloch function is taken as

    h(k) = v + w e^{ik} + z e^{-ik} = h_x(k) + i h_y(k),
    h_x = v + (w + z) cos k,   h_y = (w - z) sin k,

so that a counter-clockwise loop (zeta = +1) corresponds to w > z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import Boundary, HamiltonianMatrix

SINGULAR_ATOL = 1e-12
MAX_NK = 2**20


class SingularPointError(ValueError):
    """Winding number is undefined: h(k) touches the origin."""


class ResolutionError(RuntimeError):
    """Numerical winding did not settle on an integer."""


@dataclass(frozen=True)
class BlochVector:
    hx: float
    hy: float
    phi: float | None  # None where hx = hy = 0

    @property
    def complex(self) -> complex:
        return complex(self.hx, self.hy)

    @property
    def singular(self) -> bool:
        return self.phi is None


@dataclass(frozen=True)
class WindingResult:
    zeta: int
    method: str
    n_k: int | None = None
    raw: float | None = None

    @property
    def berry_phase(self) -> float:
        return math.pi * self.zeta

    @property
    def polarization(self) -> float:
        return self.zeta / 2


def band_energy(v: float, w: float, z: float, k):
    """Return ``(eps_minus, eps_plus)``; ``k`` may be scalar or array."""
    k = np.asarray(k, dtype=float)
    rad = v * v + w * w + z * z + 2 * v * (w + z) * np.cos(k) + 2 * w * z * np.cos(2 * k)
    if np.any(rad < -1e-12):
        raise ValueError("negative radicand in band energy; check inputs")
    eps = np.sqrt(np.clip(rad, 0.0, None))
    if eps.ndim == 0:
        eps = float(eps)
    return -eps, eps


def h_complex(v: float, w: float, z: float, k):
    k = np.asarray(k, dtype=float)
    return v + w * np.exp(1j * k) + z * np.exp(-1j * k)


def bloch_vector(v: float, w: float, z: float, k: float) -> BlochVector:
    hx = v + (w + z) * math.cos(k)
    hy = (w - z) * math.sin(k)
    if math.hypot(hx, hy) < SINGULAR_ATOL:
        return BlochVector(hx, hy, None)
    return BlochVector(hx, hy, math.atan2(hy, hx))


def winding_analytic(v: float, w: float, z: float) -> WindingResult:
    """Closed-form winding number for non-negative hoppings.

    Raises SingularPointError on the transition manifolds v = w + z and
    (inside v < w + z) w = z.
    """
    if min(v, w, z) < 0:
        raise ValueError("closed-form winding assumes non-negative hoppings")
    if abs(v - (w + z)) <= SINGULAR_ATOL:
        what = "v = w" if z == 0 else "v = w + z"
        raise SingularPointError(f"undefined at TPT: {what}")
    if v > w + z:
        return WindingResult(0, "analytic")
    if abs(w - z) <= SINGULAR_ATOL:
        raise SingularPointError("undefined at TPT: w = z")
    return WindingResult(1 if w > z else -1, "analytic")


def _winding_of_samples(h: np.ndarray) -> tuple[float, float]:
    steps = np.angle(np.roll(h, -1) / h)
    return float(steps.sum() / (2 * math.pi)), float(np.abs(steps).max())


def winding_numeric(
    v: float, w: float, z: float, n_k: int = 1024, adaptive: bool = True
) -> WindingResult:
    """Winding of h(k) over the Brillouin zone by summing phase increments.

    Each increment is the principal argument of h(k_{j+1}) / h(k_j).  The
    sampling is refined (doubling ``n_k``) while an increment exceeds
    pi/2 or the sum misses an integer by 0.01 or more.
    """
    if n_k < 64:
        raise ValueError("n_k must be >= 64")
    while True:
        k = -math.pi + 2 * math.pi * np.arange(n_k) / n_k
        h = h_complex(v, w, z, k)
        if np.abs(h).min() < SINGULAR_ATOL:
            raise SingularPointError("h(k) vanishes on the sampled Brillouin zone: on/near singularity")
        raw, worst = _winding_of_samples(h)
        zeta = round(raw)
        if abs(raw - zeta) < 0.01 and worst <= math.pi / 2:
            return WindingResult(int(zeta), "numeric", n_k, raw)
        if not adaptive or 2 * n_k > MAX_NK:
            raise ResolutionError(
                f"insufficient resolution at n_k={n_k} (raw={raw:.4f}); increase n_k"
            )
        n_k *= 2


def hopping_profile(h: HamiltonianMatrix) -> dict[int, float]:
    """Couplings <m, B| H |0, A> of a periodic chain keyed by cell offset m."""
    if h.params.boundary is not Boundary.PERIODIC:
        raise ValueError("hopping profile requires a periodic chain")
    n = h.n_cells
    out = {}
    for m in range(n):
        amp = float(h.matrix[2 * m + 1, 0])
        if amp != 0.0:
            d = m if m <= n // 2 else m - n
            out[d] = amp
    return out


def winding_from_hamiltonian(h: HamiltonianMatrix, n_k: int = 1024) -> WindingResult:
    """Winding of the Bloch function read off a periodic real-space matrix.

    Cross-checks the real-space construction against the k-space
    convention: h(k) = sum_m <m,B|H|0,A> e^{-ikm}.
    """
    profile = hopping_profile(h)
    k = -math.pi + 2 * math.pi * np.arange(n_k) / n_k
    hk = np.zeros(n_k, dtype=complex)
    for d, amp in profile.items():
        hk += amp * np.exp(-1j * k * d)
    if np.abs(hk).min() < SINGULAR_ATOL:
        raise SingularPointError("h(k) vanishes on the sampled Brillouin zone")
    raw, _ = _winding_of_samples(hk)
    return WindingResult(int(round(raw)), "numeric", n_k, raw)
