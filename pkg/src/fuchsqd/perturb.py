"""Continuity of the series map under perturbation of its data.

Data are compared with the distance ``d(q1, q2) = |q1~ - q2~|_L1`` between
minimal extensions.  A perturbation ``p`` of ``q`` lies in the neighbourhood
``U(K, alpha, q)`` (``K`` the closed ball ``B(0, R)``) when, for each support
point in ``K`` of either one, there is at most one support point of the
other within ``alpha``, unmatched values have norm below ``alpha`` and
matched values are ``alpha``-close in ``d``.  For such ``p`` the difference
``sigma(p) - sigma(q)`` on the unit ball is bounded by

    C * [ 2 alpha vol B(R + r/2) / vol B(r/2)
          + A(r/2) (B(R - alpha - 1 - r/2) + B(R - 2 alpha - 1 - r/2)) ]

where ``C`` bounds the data.  The first term counts the (at most twice a
packing number of) close pairs, each contributing at most ``alpha``; the
other two are the usual packing tails of the unmatched far terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fuchsian import (
    FuchsianSeries,
    QDData,
    SeparatedSet,
    cauchy_constant_A,
    make_separated_set,
)
from .hypgeo import (
    BELOW_ONE,
    DiscPoint,
    PolarQuadratureGrid,
    ball_volume,
    hyp_distance_array,
    sup_grid,
)
from .quaddiff import QDSample, tail_mass


@dataclass(frozen=True, eq=False)
class DQElement:
    """Data whose values are bounded by ``C_bound`` in hyperbolic norm."""

    data: QDData
    C_bound: float

    def __post_init__(self):
        if not self.C_bound > 0:
            raise ValueError("C_bound must be positive")
        if self.data.sup_norm > self.C_bound * (1 + 1e-12):
            raise ValueError(f"data norm {self.data.sup_norm} exceeds bound {self.C_bound}")

    @property
    def r(self) -> float:
        return self.data.r


@dataclass(frozen=True)
class PerturbationSpec:
    R: float
    alpha: float

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("R must be positive")
        if not self.alpha >= 0:
            raise ValueError("alpha must be non-negative")

    def validate(self, r: float) -> None:
        if not 0 < self.alpha < r / 2.0:
            raise ValueError(f"alpha = {self.alpha} must lie in (0, r/2) = (0, {r / 2})")


# -- the distance between values -------------------------------------------

def _frame(t1, c1, t2, c2):
    """Move two values so their base points sit at ``-u`` and ``+u`` (``u >= 0`` real).

    Returns ``(u, h1, h2)``, the normalised values ``c (1 - |t|^2)^2`` after
    the move.  A pushforward by ``F`` multiplies a normalised value by the
    unit factor ``(|F'| / F')^2``; L1 distances are unchanged.
    """
    t1, t2 = np.asarray(t1, complex), np.asarray(t2, complex)
    # phi sends t1 to 0 and t2 to w = rho e
    w = (t2 - t1) / (1.0 - np.conj(t1) * t2)
    rho = np.abs(w)
    # phases via angle(): w / |w| misbehaves for subnormal w
    e = np.exp(1j * np.angle(w))
    u = np.tanh(0.5 * np.arctanh(np.minimum(rho, BELOW_ONE)))
    m = u * e
    # psi(z) = conj(e) (z - m) / (1 - conj(m) z) sends m to 0, 0 to -u, w to u

    def unit(der):
        return np.exp(-2j * np.angle(der))

    dphi1 = 1.0 / (1.0 - np.abs(t1) ** 2)
    dphi2 = (1.0 - np.abs(t1) ** 2) / (1.0 - np.conj(t1) * t2) ** 2
    dpsi0 = np.conj(e) * (1.0 - u ** 2)
    dpsiw = np.conj(e) * (1.0 - u ** 2) / (1.0 - np.conj(m) * w) ** 2
    h1 = c1 * (1.0 - np.abs(t1) ** 2) ** 2 * unit(dphi1 * dpsi0)
    h2 = c2 * (1.0 - np.abs(t2) ** 2) ** 2 * unit(dphi2 * dpsiw)
    return u, h1, h2


def _qd_grid(d_max: float, coarse: bool) -> PolarQuadratureGrid:
    if coarse:
        return PolarQuadratureGrid.build(9.0, n_panels=18, order=8, n_theta=32)
    n_theta = int(128 * math.ceil(1.0 + 2.0 * math.sinh(d_max)))
    R = 12.0 + d_max
    return PolarQuadratureGrid.build(R, n_panels=int(3 * R), order=16, n_theta=min(n_theta, 8192))


def qd_distance_many(t1, c1, t2, c2, coarse: bool = False) -> np.ndarray:
    """Batched :func:`qd_distance` for arrays of base points and coefficients."""
    t1, c1, t2, c2 = (np.atleast_1d(np.asarray(x, complex)) for x in (t1, c1, t2, c2))
    u, h1, h2 = _frame(t1, c1, t2, c2)
    d_max = float(np.max(2.0 * np.arctanh(u))) if u.size else 0.0
    grid = _qd_grid(d_max, coarse)
    z = grid.points.ravel()
    conf = grid.conformal.ravel()
    out = np.empty(u.size)
    for i in range(u.size):
        # values at -u and +u: normalised kernels (1-u^2)^2 / (1 -+ u z)^4
        k1 = (1.0 - u[i] ** 2) ** 2 / (1.0 + u[i] * z) ** 4
        k2 = (1.0 - u[i] ** 2) ** 2 / (1.0 - u[i] * z) ** 4
        vals = np.abs(h1[i] * k1 - h2[i] * k2) * conf ** 2
        out[i] = grid.integrate(vals.reshape(grid.radii.size, grid.n_theta))
    return out


def qd_distance(s1: QDSample, s2: QDSample) -> float:
    """``int_D |s1~ - s2~| dA`` by quadrature (relative accuracy about 1e-6)."""
    return float(qd_distance_many(s1.base.z, s1.coeff, s2.base.z, s2.coeff)[0])


# -- neighbourhoods ---------------------------------------------------------

@dataclass
class NeighborhoodReport:
    ok: bool
    clause: str | None = None
    detail: str = ""
    matching: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok


def _half_check(a: QDData, b: QDData, spec: PerturbationSpec, clause: str):
    """Clause for support points of ``a`` in K against partners in ``b``."""
    pairs = {}
    inside = np.nonzero(np.arctanh(np.abs(a.z)) <= spec.R)[0]
    for i in inside:
        if b.z.size:
            close = np.nonzero(hyp_distance_array(b.z, a.z[i]) < spec.alpha)[0]
        else:
            close = np.empty(0, dtype=int)
        if close.size > 1:
            return None, f"{clause}: point {i} has {close.size} partners within alpha"
        if close.size == 0:
            if a.hyp_norms[i] >= spec.alpha:
                return None, (f"{clause}: unmatched point {i} has norm "
                              f"{a.hyp_norms[i]:.3g} >= alpha")
            continue
        pairs[int(i)] = int(close[0])
    return pairs, ""


def in_neighborhood(p: DQElement, q: DQElement, spec: PerturbationSpec,
                    coarse: bool = True) -> NeighborhoodReport:
    """Whether ``p`` lies in ``U(B(0, R), alpha, q)``, with a matching witness."""
    fwd, msg = _half_check(q.data, p.data, spec, "(iv)")
    if fwd is None:
        return NeighborhoodReport(False, "(iv)", msg)
    back, msg = _half_check(p.data, q.data, spec, "(v)")
    if back is None:
        return NeighborhoodReport(False, "(v)", msg)
    for clause, pairs, a, b in (("(iv)", fwd, q.data, p.data), ("(v)", back, p.data, q.data)):
        if not pairs:
            continue
        ia = np.fromiter(pairs.keys(), int)
        ib = np.fromiter(pairs.values(), int)
        d = qd_distance_many(a.z[ia], a.coeffs[ia], b.z[ib], b.coeffs[ib], coarse=coarse)
        bad = np.nonzero(d >= spec.alpha)[0]
        if bad.size:
            k = bad[0]
            return NeighborhoodReport(False, clause,
                                      f"{clause}: pair {ia[k]}->{ib[k]} at distance {d[k]:.3g} >= alpha")
    return NeighborhoodReport(True, None, "", {"q_to_p": fwd, "p_to_q": back})


# -- the continuity modulus -------------------------------------------------

def certified_bound(r: float, spec: PerturbationSpec, C: float = 1.0) -> dict:
    """Components of the bound on ``|sigma(p) - sigma(q)|`` over the unit ball."""
    R, a = spec.R, spec.alpha
    pairs = 2.0 * a * ball_volume(R + r / 2.0) / ball_volume(r / 2.0)
    A = cauchy_constant_A(r / 2.0)
    t1 = A * tail_mass(max(R - a - 1.0 - r / 2.0, 0.0))
    t2 = A * tail_mass(max(R - 2 * a - 1.0 - r / 2.0, 0.0))
    return {"pairs": C * pairs, "tail_q": C * t1, "tail_p": C * t2,
            "total": C * (pairs + t1 + t2)}


def random_dq(r: float, R_support: float, C: float = 1.0, seed: int = 0,
              proposals: int = 600, small_fraction: float = 0.05,
              small_norm: float = 0.0) -> DQElement:
    """Random bounded data on a greedy ``r``-separated set, some values tiny."""
    rng = np.random.default_rng(seed)
    S = make_separated_set("greedy-random", r, R_support, seed=seed, proposals=proposals,
                           radial="uniform")
    n = len(S)
    mag = C * np.sqrt(rng.random(n))
    small = rng.random(n) < small_fraction
    mag[small] = small_norm
    h = mag * np.exp(2j * np.pi * rng.random(n))
    return DQElement(QDData.from_hyp_values(S, h), C)


def _jitter(q: DQElement, spec: PerturbationSpec, rng: np.random.Generator) -> DQElement:
    d = q.data
    r, a, C = d.r, spec.alpha, q.C_bound
    n = len(d.support)
    # position moves of size a / (8 pi C) keep the L1 change below a/3 and
    # value moves below a / (4 pi) add at most a/4
    step = a / (8.0 * math.pi * max(C, 1.0))
    rad = np.tanh(step * np.sqrt(rng.random(n)))
    w = rad * np.exp(2j * np.pi * rng.random(n))
    z = (w + d.z) / (1.0 + np.conj(d.z) * w)
    # near the rim float64 cannot resolve a move this small; such points
    # stay put (only their value is perturbed)
    moved = hyp_distance_array(z, d.z)
    z = np.where(moved <= step, z, d.z)
    dh = a / (4.0 * math.pi) * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
    h = d.hyp_values + dh
    over = np.abs(h) > C
    h[over] = d.hyp_values[over]
    z = _restore_separation(z, d.z, r)

    keep = np.ones(n, dtype=bool)
    inK = np.arctanh(np.abs(d.z)) <= spec.R
    removable = inK & (d.hyp_norms < a / 2.0)
    keep[removable & (rng.random(n) < 0.5)] = False
    z, h = z[keep], h[keep]

    # a couple of new small values near the boundary of K
    for _ in range(20):
        if len(z) >= n + 2:
            break
        rad_new = spec.R + rng.uniform(-0.5, 0.5)
        cand = np.tanh(rad_new) * np.exp(2j * np.pi * rng.random())
        if z.size and np.min(hyp_distance_array(z, cand)) < r:
            continue
        if d.z.size and np.min(hyp_distance_array(d.z, cand)) < r:
            continue
        z = np.append(z, cand)
        h = np.append(h, a / 2.0 * np.exp(2j * np.pi * rng.random()))
    S = SeparatedSet(tuple(DiscPoint(x) for x in z), r)
    return DQElement(QDData.from_hyp_values(S, h), C)


def _restore_separation(z: np.ndarray, z0: np.ndarray, r: float) -> np.ndarray:
    z = z.copy()
    for _ in range(len(z) + 1):
        D = hyp_distance_array(z[:, None], z[None, :])
        np.fill_diagonal(D, np.inf)
        bad = np.nonzero(D.min(axis=1) < r)[0]
        if bad.size == 0:
            return z
        z[bad] = z0[bad]
    return z0.copy()


def _unit_ball_grid():
    return sup_grid(1.0, step=0.05, n_theta=128)


def sup_difference(p: DQElement, q: DQElement, grid=None) -> float:
    """Grid sup over the unit ball of the hyperbolic norm of ``sigma(p) - sigma(q)``."""
    z, conf = grid if grid is not None else _unit_ball_grid()
    diff = FuchsianSeries(p.data)(z) - FuchsianSeries(q.data)(z)
    return float(np.max(np.abs(diff) * conf ** 2))


def perturbation_modulus(q: DQElement, spec: PerturbationSpec, trials: int = 100,
                         seed: int = 0, verify: bool = True) -> dict:
    """Measure ``|sigma(p) - sigma(q)|`` on the unit ball for random ``p`` in ``U``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    r = q.r
    if spec.alpha == 0:
        bound = certified_bound(r, spec, q.C_bound)
        return {"alpha": 0.0, "R": spec.R, "measured_max": 0.0,
                "certified_bound": bound["total"], "components": bound,
                "trials": trials, "seed": seed, "measured": [0.0] * trials,
                "violations": 0}
    spec.validate(r)
    rng = np.random.default_rng(seed)
    grid = _unit_ball_grid()
    bound = certified_bound(r, spec, q.C_bound)
    measured = []
    for _ in range(trials):
        p = _jitter(q, spec, rng)
        if verify:
            rep = in_neighborhood(p, q, spec)
            if not rep.ok:
                raise AssertionError(f"generated perturbation left the neighbourhood: {rep.detail}")
        measured.append(sup_difference(p, q, grid))
    return {"alpha": spec.alpha, "R": spec.R, "measured_max": max(measured),
            "certified_bound": bound["total"], "components": bound,
            "trials": trials, "seed": seed, "measured": measured,
            "violations": int(sum(m > bound["total"] for m in measured))}
