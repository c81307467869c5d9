"""Fuchsian series over separated supports and their explicit constants.

With the area-mean-value constant ``A(r) = 1 / (pi tanh(r)^2)`` the
constants of the convergence estimates are

    C(r) = pi A(r/2) = 1 / tanh(r/2)^2
    B(R) = pi / cosh(R)^2               (tail mass of a unit extension)
    D(r) = A(r/2) B(r/2) = 1 / sinh(r/2)^2

and ``D(r) < 1`` exactly when ``r > R_STAR = 2 asinh(1)``.  Sharper
choices of ``A`` exist; nothing downstream hard-codes these numbers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .hypgeo import (
    DiscPoint,
    ball_volume,
    hyp_distance_array,
    pairwise_distances,
    sup_grid,
)
from .quaddiff import QDSample, extension_kernel, tail_mass

R_STAR = 2.0 * math.asinh(1.0)


# -- support sets -----------------------------------------------------------

class SeparationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SeparatedSet:
    """Finite set of disc points with pairwise hyperbolic distance ``>= r``."""

    points: tuple[DiscPoint, ...]
    r: float

    def __post_init__(self):
        pts = tuple(p if isinstance(p, DiscPoint) else DiscPoint(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if not self.r > 0:
            raise ValueError("separation r must be positive")
        z = np.array([p.z for p in pts], dtype=complex)
        object.__setattr__(self, "z", z)
        if len(pts) > 1:
            d = pairwise_distances(z)
            np.fill_diagonal(d, np.inf)
            i, j = np.unravel_index(np.argmin(d), d.shape)
            if d[i, j] < self.r:
                raise SeparationError(
                    f"points {i} and {j} are {d[i, j]:.6g} apart, less than r = {self.r}")

    def __len__(self):
        return len(self.points)

    def min_separation(self) -> float:
        if len(self) < 2:
            return math.inf
        d = pairwise_distances(self.z)
        np.fill_diagonal(d, np.inf)
        return float(d.min())


@dataclass(frozen=True, eq=False)
class QDData:
    """A quadratic differential on a separated support: one coefficient per point."""

    support: SeparatedSet
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.size != len(self.support):
            raise ValueError(f"{c.size} coefficients for {len(self.support)} support points")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "sup_norm", float(self.hyp_norms.max()) if c.size else 0.0)

    @property
    def z(self) -> np.ndarray:
        return self.support.z

    @property
    def r(self) -> float:
        return self.support.r

    @property
    def conformal(self) -> np.ndarray:
        return 1.0 - np.abs(self.z) ** 2

    @property
    def hyp_values(self) -> np.ndarray:
        """Coefficients in the normalised frame, ``c_t (1 - |t|^2)^2``."""
        return self.coeffs * self.conformal ** 2

    @property
    def hyp_norms(self) -> np.ndarray:
        return np.abs(self.hyp_values)

    def samples(self) -> list[QDSample]:
        return [QDSample(p, c) for p, c in zip(self.support.points, self.coeffs)]

    def with_coeffs(self, coeffs) -> "QDData":
        return QDData(self.support, coeffs)

    @classmethod
    def from_hyp_values(cls, support: SeparatedSet, values) -> "QDData":
        conf = 1.0 - np.abs(support.z) ** 2
        return cls(support, np.asarray(values, dtype=complex) / conf ** 2)

    def to_json(self) -> dict:
        return {"r": self.r,
                "points": [[w.real, w.imag] for w in self.z],
                "coeffs": [[c.real, c.imag] for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj: dict) -> "QDData":
        pts = [complex(a, b) for a, b in obj["points"]]
        cs = [complex(a, b) for a, b in obj["coeffs"]]
        return cls(SeparatedSet(tuple(DiscPoint(w) for w in pts), float(obj["r"])), cs)

    def dumps(self) -> str:
        from .serialize import dumps
        return dumps(self.to_json())

    @classmethod
    def loads(cls, text: str) -> "QDData":
        return cls.from_json(json.loads(text))


def interaction_matrix(z_eval, support) -> np.ndarray:
    """Hyperbolically normalised kernel ``N[s, t]`` with ``|N[s, t]| = sech(d(s, t))^4``.

    ``sum_t N[s, t] h_t`` is the normalised value of ``sigma(q)`` at ``s``
    when ``h_t`` are the normalised coefficients of ``q``.
    """
    zs = np.asarray(z_eval, dtype=complex)[:, None]
    zt = np.asarray(support, dtype=complex)[None, :]
    return ((1.0 - np.abs(zs) ** 2) * (1.0 - np.abs(zt) ** 2)) ** 2 / (1.0 - np.conj(zt) * zs) ** 4


# -- the series -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FuchsianSeries:
    """``sigma(q)``: the sum of the minimal extensions of the data values."""

    data: QDData

    def __call__(self, z):
        """Coefficient of ``dz^2`` at ``z`` (scalar or array)."""
        if isinstance(z, DiscPoint):
            z = z.z
        z = np.asarray(z, dtype=complex)
        out = self._evaluate(z.reshape(-1)).reshape(z.shape)
        return complex(out) if out.ndim == 0 else out

    def _evaluate(self, z: np.ndarray, chunk: int = 4096) -> np.ndarray:
        t, c = self.data.z, self.data.coeffs
        out = np.zeros(z.shape, dtype=complex)
        if t.size == 0:
            return out
        for k in range(0, z.size, chunk):
            zz = z[k:k + chunk]
            terms = c[None, :] * extension_kernel(t[None, :], zz[:, None])
            # nearest terms last: numpy's pairwise reduction then adds the
            # large contributions to already-accumulated small ones
            order = np.argsort(-np.abs(terms), axis=1, kind="stable")
            out[k:k + chunk] = np.take_along_axis(terms, order, axis=1).sum(axis=1)
        return out

    def hyp_norm(self, z, conformal=None) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if conformal is None:
            conformal = 1.0 - np.abs(z) ** 2
        return np.abs(self(z)) * np.asarray(conformal) ** 2

    def evaluate_truncated(self, z, R: float):
        """Sum over support points within hyperbolic distance ``R`` of ``z`` only."""
        if isinstance(z, DiscPoint):
            z = z.z
        keep = hyp_distance_array(self.data.z, z) <= R
        t, c = self.data.z[keep], self.data.coeffs[keep]
        return complex(np.sum(c * extension_kernel(t, z)))


def evaluate_series(s: FuchsianSeries, z) -> complex:
    """Value of ``sigma(q)`` at a single point as an exact finite sum."""
    if isinstance(z, DiscPoint):
        z = z.z
    return complex(s(complex(z)))


# -- constants --------------------------------------------------------------

def cauchy_constant_A(r: float) -> float:
    """``1 / (pi tanh(r)^2)``: bounds ``|tau(x)|_hyp`` by ``A(r)`` times the
    L1 mass of ``tau`` on ``B(x, r)``.  ``A(inf) = 1 / pi``."""
    if not r > 0:
        raise ValueError("r must be positive")
    if math.isinf(r):
        return 1.0 / math.pi
    return 1.0 / (math.pi * math.tanh(r) ** 2)


@dataclass(frozen=True)
class ConstantTable:
    r: float
    A_half: float
    B_half: float
    C: float
    D: float

    @property
    def E(self) -> float:
        """Extension constant ``C / (1 - D)``; infinite when ``D >= 1``."""
        return self.C / (1.0 - self.D) if self.D < 1.0 else math.inf

    @property
    def admissible(self) -> bool:
        return self.r > R_STAR

    def as_dict(self) -> dict:
        return {"r": self.r, "A(r/2)": self.A_half, "B(r/2)": self.B_half,
                "C": self.C, "D": self.D, "E": self.E}


def constant_table(r: float) -> ConstantTable:
    if not r > 0:
        raise ValueError("r must be positive")
    A = cauchy_constant_A(r / 2.0)
    B = tail_mass(r / 2.0)
    # closed forms avoid the rounding of pi * (1/pi) products
    C = 1.0 / math.tanh(r / 2.0) ** 2
    D = 1.0 / math.sinh(r / 2.0) ** 2
    return ConstantTable(r, A, B, C, D)


def truncation_bound(r: float, R: float) -> float:
    """Bound, per unit ``|q|_inf``, on the hyperbolic norm at ``x`` of the terms
    with ``d(x, t) > R``: their ``r/2``-balls lie outside ``B(x, R - r/2)``."""
    if not R > r / 2.0:
        raise ValueError("truncation radius must exceed r/2")
    return cauchy_constant_A(r / 2.0) * tail_mass(R - r / 2.0)


# -- the two estimates ------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    measured: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.measured <= self.bound

    def as_dict(self) -> dict:
        return {"measured": self.measured, "bound": self.bound, "ok": self.ok}


class BoundViolation(AssertionError):
    """A proven inequality failed numerically: an implementation bug."""


def measure_sup(s: FuchsianSeries, R_max: float, step: float = 0.05,
                n_theta: int = 256) -> float:
    """Grid sup of the hyperbolic norm of ``sigma(q)`` on ``B(0, R_max)``."""
    z, conf = sup_grid(R_max, step=step, n_theta=n_theta, centers=s.data.z)
    return float(np.max(s.hyp_norm(z, conf))) if z.size else 0.0


def sup_bound_check(s: FuchsianSeries, R_max: float | None = None, step: float = 0.05,
                    n_theta: int = 256, strict: bool = True) -> BoundReport:
    """Compare the measured sup with ``C(r) |q|_{inf,T}`` on a ball of radius ``>= 2r``."""
    r = s.data.r
    if R_max is None:
        R_max = 2.0 * r
    if R_max < 2.0 * r:
        raise ValueError("grid must cover a ball of radius at least 2r")
    rep = BoundReport(measure_sup(s, R_max, step, n_theta), constant_table(r).C * s.data.sup_norm)
    if strict and not rep.ok:
        raise BoundViolation(f"sup {rep.measured!r} exceeds C(r)|q| = {rep.bound!r}")
    return rep


def residual_norms(data: QDData, values=None) -> np.ndarray:
    """Hyperbolic norms of ``sigma(q) - q`` on the support."""
    if values is None:
        values = data.hyp_values
    N = interaction_matrix(data.z, data.z)
    return np.abs(N @ values - data.hyp_values)


def residual_check(s: FuchsianSeries, strict: bool = True) -> BoundReport:
    data = s.data
    meas = float(residual_norms(data).max()) if len(data.support) else 0.0
    rep = BoundReport(meas, constant_table(data.r).D * data.sup_norm)
    if strict and not rep.ok:
        raise BoundViolation(f"residual {rep.measured!r} exceeds D(r)|q| = {rep.bound!r}")
    return rep


# -- test-data generation ---------------------------------------------------

def _random_points(rng: np.random.Generator, R: float, n: int,
                   radial: str = "volume") -> np.ndarray:
    """``n`` random points of ``B(0, R)``.

    ``radial="volume"`` is uniform for the hyperbolic volume (almost all
    points land near the rim); ``"uniform"`` draws the hyperbolic radius
    uniformly, which keeps the interior populated.
    """
    u = rng.random(n)
    if radial == "volume":
        t = np.arcsinh(math.sinh(R) * np.sqrt(u))
    elif radial == "uniform":
        t = R * u
    else:
        raise ValueError(f"unknown radial law {radial!r}")
    th = rng.random(n) * 2.0 * np.pi
    return np.tanh(t) * np.exp(1j * th)


def _greedy_thin(cands: np.ndarray, r: float, n_max: int | None) -> list[complex]:
    kept: list[complex] = []
    arr = np.empty(0, dtype=complex)
    for w in cands:
        if arr.size and np.min(hyp_distance_array(w, arr)) < r:
            continue
        kept.append(complex(w))
        arr = np.asarray(kept)
        if n_max is not None and len(kept) >= n_max:
            break
    return kept


def make_separated_set(kind: str, r: float, R: float, seed: int = 0,
                       proposals: int | None = None, n_max: int | None = None,
                       radial: str = "volume") -> SeparatedSet:
    """Deterministic ``r``-separated test set inside ``B(0, R)``.

    ``greedy-random`` draws a Poisson number of volume-uniform proposals and
    keeps each one that is ``r``-far from everything kept so far.
    ``lattice-orbit`` thins the (2,3,7) orbit of the origin, visiting orbit
    points in a seeded order.
    """
    if not (r > 0 and R > 0):
        raise ValueError("r and R must be positive")
    rng = np.random.default_rng(seed)
    if kind == "greedy-random":
        if proposals is None:
            ratio = ball_volume(R + r / 2.0) / ball_volume(r / 2.0)
            proposals = int(min(4000, 20 * ratio + 20))
        n = int(rng.poisson(proposals))
        cands = _random_points(rng, R, n, radial)
    elif kind == "lattice-orbit":
        from .groups import orbit_points, triangle_237
        pts = orbit_points(triangle_237(), 0j, R)
        order = np.lexsort((np.angle(pts), np.round(np.abs(pts), 12)))
        pts = pts[order]
        cands = np.concatenate([pts[:1], pts[1:][rng.permutation(pts.size - 1)]])
    else:
        raise ValueError(f"unknown set kind {kind!r}")
    kept = _greedy_thin(cands, r, n_max)
    return SeparatedSet(tuple(DiscPoint(w) for w in kept), r)
