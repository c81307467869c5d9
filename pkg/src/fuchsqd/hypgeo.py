"""Hyperbolic geometry of the unit disc.

The metric is ``|dz|^2 / (1 - |z|^2)^2`` (curvature -4).  With this
normalisation ``d(0, z) = artanh|z|``, a ball of radius ``R`` has volume
``pi sinh(R)^2`` and the volume element in geodesic polar coordinates
around the origin is ``2 pi sinh(t) cosh(t) dt dtheta / (2 pi)``.

Readers used to curvature -1 should note that every distance here is half
the curvature -1 distance; constants downstream are not rescaled.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

#: points with ``|z| >= 1 - BOUNDARY_GUARD`` are rejected
BOUNDARY_GUARD = 1e-12
BELOW_ONE = float(np.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class DiscPoint:
    """A point of the open unit disc."""

    z: complex

    def __post_init__(self):
        z = complex(self.z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ValueError(f"non-finite disc point {z!r}")
        if abs(z) >= 1.0 - BOUNDARY_GUARD:
            raise ValueError(f"|z| = {abs(z)!r} is not inside the disc (guard {BOUNDARY_GUARD})")
        object.__setattr__(self, "z", z)

    @property
    def conformal(self) -> float:
        """``1 - |z|^2``, the inverse of the metric's conformal factor."""
        return 1.0 - abs(self.z) ** 2

    @property
    def radius(self) -> float:
        """Hyperbolic distance to the origin."""
        return math.atanh(abs(self.z))

    @classmethod
    def from_polar(cls, d: float, theta: float = 0.0) -> "DiscPoint":
        """Point at hyperbolic distance ``d`` from 0 in direction ``theta``."""
        return cls(math.tanh(d) * cmath.exp(1j * theta))


def _as_complex(p) -> complex:
    return p.z if isinstance(p, DiscPoint) else complex(p)


def pseudo_distance(p, q):
    """``|p - q| / |1 - conj(q) p|``; works elementwise on arrays."""
    p = np.asarray(p)
    q = np.asarray(q)
    return np.abs(p - q) / np.abs(1.0 - np.conj(q) * p)


def hyp_distance(p, q) -> float:
    """Hyperbolic distance between two disc points (or complex numbers)."""
    a, b = _as_complex(p), _as_complex(q)
    rho = abs(a - b) / abs(1.0 - b.conjugate() * a)
    return math.atanh(min(rho, BELOW_ONE))


def hyp_distance_array(p, q) -> np.ndarray:
    """Vectorised :func:`hyp_distance` with numpy broadcasting."""
    return np.arctanh(np.minimum(pseudo_distance(p, q), BELOW_ONE))


def pairwise_distances(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return hyp_distance_array(z[:, None], z[None, :])


@dataclass(frozen=True)
class DiscAutomorphism:
    """The disc automorphism ``z -> exp(i theta) (z - a) / (1 - conj(a) z)``."""

    a: complex = 0j
    theta: float = 0.0

    def __post_init__(self):
        a = complex(self.a)
        if not abs(a) < 1.0:
            raise ValueError(f"|a| = {abs(a)!r} must be < 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def rotation(self) -> complex:
        return cmath.exp(1j * self.theta)

    def __call__(self, z):
        """Apply to a complex number, array or :class:`DiscPoint`."""
        if isinstance(z, DiscPoint):
            return DiscPoint(self(z.z))
        a = self.a
        return self.rotation * (z - a) / (1.0 - np.conj(a) * z)

    def derivative(self, z):
        if isinstance(z, DiscPoint):
            z = z.z
        a = self.a
        return self.rotation * (1.0 - abs(a) ** 2) / (1.0 - np.conj(a) * z) ** 2

    def inverse(self) -> "DiscAutomorphism":
        return DiscAutomorphism(-self.a * self.rotation, -self.theta)

    def matrix(self) -> np.ndarray:
        """Representative in SU(1,1), defined up to sign."""
        a = self.a
        h = cmath.exp(0.5j * self.theta)
        s = math.sqrt(1.0 - abs(a) ** 2)
        return np.array([[h, -a * h], [-a.conjugate() / h, 1.0 / h]]) / s

    @classmethod
    def from_matrix(cls, m) -> "DiscAutomorphism":
        """Inverse of :meth:`matrix` for ``[[alpha, beta], [conj(beta), conj(alpha)]]``."""
        alpha, beta = complex(m[0][0]), complex(m[0][1])
        return cls(-beta / alpha, cmath.phase(alpha / alpha.conjugate()))

    def compose(self, other: "DiscAutomorphism") -> "DiscAutomorphism":
        """``self o other``."""
        return DiscAutomorphism.from_matrix(self.matrix() @ other.matrix())

    def __matmul__(self, other: "DiscAutomorphism") -> "DiscAutomorphism":
        return self.compose(other)

    @classmethod
    def identity(cls) -> "DiscAutomorphism":
        return cls(0j, 0.0)

    @classmethod
    def translation(cls, distance: float, direction: float = 0.0) -> "DiscAutomorphism":
        """Hyperbolic translation along the diameter at angle ``direction``.

        Moves the origin a hyperbolic distance ``distance`` towards
        ``exp(i direction)``.
        """
        return cls(-math.tanh(distance) * cmath.exp(1j * direction), 0.0)

    @classmethod
    def rotation_about_zero(cls, angle: float) -> "DiscAutomorphism":
        return cls(0j, angle)


def automorphism_to_zero(x) -> DiscAutomorphism:
    """Automorphism with zero rotation sending ``x`` to the origin."""
    return DiscAutomorphism(_as_complex(x), 0.0)


def ball_volume(R: float) -> float:
    if R < 0:
        raise ValueError("radius must be non-negative")
    return math.pi * math.sinh(R) ** 2


def circumference(R: float) -> float:
    return math.pi * math.sinh(2.0 * R)


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested accuracy."""


def integrate_radial(f: Callable[[float], float], R_lo: float, R_hi: float,
                     rtol: float = 1e-9) -> float:
    """Integral of a radial profile ``f(d)`` against the hyperbolic volume.

    Computes ``int_{R_lo}^{R_hi} f(t) 2 pi sinh(t) cosh(t) dt``.  Pass
    ``math.inf`` for ``R_hi`` to use the cutoff :data:`RADIAL_CUTOFF`.
    """
    if R_lo > R_hi:
        raise ValueError("need R_lo <= R_hi")
    if math.isinf(R_hi):
        R_hi = max(RADIAL_CUTOFF, R_lo)
    if R_hi == R_lo:
        return 0.0

    def integrand(t):
        return f(t) * math.pi * math.sinh(2.0 * t)

    # Split into unit panels so the sinh growth does not hide the mass.
    edges = np.linspace(R_lo, R_hi, max(2, int(math.ceil(R_hi - R_lo)) + 1))
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=rtol * 1e-2, limit=200)
        total += val
        err += e
    if err > rtol * max(abs(total), 1e-300):
        raise QuadratureError(f"radial quadrature error estimate {err:.3e} exceeds rtol {rtol}")
    return total


#: radial cutoff standing in for infinity in improper integrals
RADIAL_CUTOFF = 30.0


@dataclass(frozen=True)
class PolarQuadratureGrid:
    """Tensor grid on the hyperbolic ball ``B(0, R_max)``.

    Radial nodes are composite Gauss-Legendre in the hyperbolic radius,
    angular nodes are uniform (trapezoid rule, spectrally accurate for
    smooth periodic integrands).  ``weights`` integrate against the
    hyperbolic volume ``dv_g``.
    """

    radii: np.ndarray
    radial_weights: np.ndarray
    n_theta: int
    R_max: float

    @classmethod
    def build(cls, R_max: float, n_panels: int | None = None, order: int = 16,
              n_theta: int = 128) -> "PolarQuadratureGrid":
        if R_max <= 0:
            raise ValueError("R_max must be positive")
        if n_panels is None:
            n_panels = max(1, int(math.ceil(R_max / 0.5)))
        x, w = np.polynomial.legendre.leggauss(order)
        edges = np.linspace(0.0, R_max, n_panels + 1)
        lo, hi = edges[:-1, None], edges[1:, None]
        t = (0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)).ravel()
        wt = (0.5 * (hi - lo) * w[None, :]).ravel()
        # dv_g = pi sinh(2t) dt  (angular mean taken below)
        return cls(t, wt * np.pi * np.sinh(2.0 * t), int(n_theta), float(R_max))

    @property
    def thetas(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta

    @property
    def points(self) -> np.ndarray:
        """Complex node coordinates, shape ``(n_radii, n_theta)``."""
        return np.tanh(self.radii)[:, None] * np.exp(1j * self.thetas)[None, :]

    @property
    def conformal(self) -> np.ndarray:
        """``1 - |z|^2`` at each node, computed without cancellation."""
        c = 1.0 / np.cosh(self.radii) ** 2
        return np.broadcast_to(c[:, None], (self.radii.size, self.n_theta))

    @property
    def weights(self) -> np.ndarray:
        return np.broadcast_to(self.radial_weights[:, None] / self.n_theta,
                               (self.radii.size, self.n_theta))

    def total_weight(self) -> float:
        return float(self.radial_weights.sum())

    def integrate(self, values) -> float:
        """Integrate node values (shape ``(n_radii, n_theta)``) against ``dv_g``."""
        return float(np.sum(np.asarray(values).mean(axis=1) * self.radial_weights))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["d", "theta", "weight"])
            wt = self.radial_weights / self.n_theta
            for d, weight in zip(self.radii, wt):
                for th in self.thetas:
                    w.writerow([f"{d:.17g}", f"{th:.17g}", f"{weight:.17g}"])


def sup_grid(R_max: float, step: float = 0.05, n_theta: int = 256,
             centers=(), local_radius: float = 0.5, local_rings: int = 6,
             local_theta: int = 24) -> tuple[np.ndarray, np.ndarray]:
    """Evaluation points for measuring a grid sup on ``B(0, R_max)``.

    Rings every ``step`` hyperbolic units plus small polar patches around
    each point of ``centers`` (local refinement near support points).
    Returns flat arrays ``(z, 1 - |z|^2)``; the second is computed from
    hyperbolic radii so it keeps full relative precision near the boundary.
    """
    n_rings = max(1, int(math.ceil(R_max / step)))
    radii = np.linspace(0.0, R_max, n_rings + 1)[1:]
    th = 2.0 * np.pi * np.arange(n_theta) / n_theta
    pts = [np.array([0j]), (np.tanh(radii)[:, None] * np.exp(1j * th)[None, :]).ravel()]
    conf = [np.array([1.0]), np.repeat(1.0 / np.cosh(radii) ** 2, n_theta)]
    centers = np.asarray(list(centers), dtype=complex)
    if centers.size:
        rr = np.linspace(0.0, local_radius, local_rings + 1)[1:]
        tl = 2.0 * np.pi * np.arange(local_theta) / local_theta
        patch = np.concatenate([[0j], (np.tanh(rr)[:, None] * np.exp(1j * tl)[None, :]).ravel()])
        pconf = np.concatenate([[1.0], np.repeat(1.0 / np.cosh(rr) ** 2, local_theta)])
        # w -> (w + c) / (1 + conj(c) w) moves the patch from 0 to c
        c = centers[:, None]
        den = 1.0 + np.conj(c) * patch[None, :]
        pts.append(((patch[None, :] + c) / den).ravel())
        conf.append((pconf[None, :] * (1.0 - np.abs(c) ** 2) / np.abs(den) ** 2).ravel())
    z, w = np.concatenate(pts), np.concatenate(conf)
    keep = np.abs(z) < 1.0 - BOUNDARY_GUARD
    return z[keep], w[keep]
