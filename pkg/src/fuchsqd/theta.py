"""Poincare theta series ``sum_gamma f(gamma z) gamma'(z)^2`` over a Fuchsian group.

Group elements are enumerated breadth-first by word length and kept as
SU(1,1) pairs ``(alpha, beta)`` for ``z -> (alpha z + beta) / (conj(beta) z + conj(alpha))``,
so ``gamma'(z) = (conj(beta) z + conj(alpha))^-2``.

Duplicates are detected from the images of fixed generic points, compared
in hyperboloid coordinates.  Euclidean disc coordinates would not do: at
word length 8 the orbit points sit within 1e-10 of the unit circle, where
distinct elements are closer than float rounding allows to distinguish.
On the hyperboloid, distinct images stay an absolute distance apart
(``|X - Y|^2 >= 2 (cosh delta - 1)``) while rounding grows only like
``eps * |X|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .fuchsian import cauchy_constant_A
from .groups import FuchsianGroup
from .hypgeo import BELOW_ONE, DiscAutomorphism, DiscPoint, hyp_distance_array
from .quaddiff import tail_mass

#: generic points used as fingerprints; none is fixed by an elliptic element
#: of the shipped groups
FINGERPRINT_POINTS = (0.1234 + 0.0567j, -0.0731 + 0.1913j, 0.0417 - 0.2209j)
DEDUP_TOL = 1e-2
DEFAULT_CAP = 12_000_000
MAX_DEGREE = 8


class EnumerationCapExceeded(MemoryError):
    pass


def hyperboloid(alpha, beta, w: complex) -> np.ndarray:
    """Hyperboloid coordinates (curvature -1 model) of ``gamma(w)``.

    Computed from the matrix entries so that no ``1 - |gamma w|^2``
    cancellation occurs.
    """
    num = alpha * w + beta
    den = np.conj(beta) * w + np.conj(alpha)
    s = 1.0 - abs(w) ** 2
    x0 = (np.abs(num) ** 2 + np.abs(den) ** 2) / s
    xy = 2.0 * num * np.conj(den) / s
    return np.stack([x0, xy.real, xy.imag], axis=-1)


@dataclass(eq=False)
class OrbitEnumeration:
    """Distinct group elements of word length ``<= L`` in breadth-first order."""

    group: FuchsianGroup
    L: int
    alpha: np.ndarray
    beta: np.ndarray
    length: np.ndarray

    def __len__(self):
        return self.alpha.size

    @property
    def counts(self) -> list[int]:
        return np.bincount(self.length, minlength=self.L + 1).tolist()

    def automorphism(self, i: int) -> DiscAutomorphism:
        a, b = self.alpha[i], self.beta[i]
        return DiscAutomorphism.from_matrix([[a, b], [np.conj(b), np.conj(a)]])

    def apply(self, z: complex, mask=None):
        """``(gamma(z), gamma'(z))`` for every enumerated element."""
        a, b = self.alpha, self.beta
        if mask is not None:
            a, b = a[mask], b[mask]
        den = np.conj(b) * z + np.conj(a)
        return (a * z + b) / den, den ** -2.0

    def truncate(self, L: int) -> "OrbitEnumeration":
        m = self.length <= L
        return OrbitEnumeration(self.group, L, self.alpha[m], self.beta[m], self.length[m])

    def orbit_separation(self, z: complex = 0j) -> float:
        """Smallest ``d(z, gamma z)`` over enumerated ``gamma != id``."""
        if len(self) < 2:
            return math.inf
        w, _ = self.apply(complex(z), self.length > 0)
        return float(np.min(hyp_distance_array(w, complex(z))))

    def dedup_certificate(self, tol: float = DEDUP_TOL) -> bool:
        """True when no two elements agree at all fingerprint points."""
        close = None
        for w in FINGERPRINT_POINTS:
            X = hyperboloid(self.alpha, self.beta, w)
            pairs = {tuple(p) for p in cKDTree(X).query_pairs(tol, output_type="ndarray")}
            close = pairs if close is None else close & pairs
            if not close:
                return True
        return not close


def enumerate_group(group: FuchsianGroup, L: int, cap: int = DEFAULT_CAP) -> OrbitEnumeration:
    """All distinct elements given by words of length ``<= L``."""
    if L < 0:
        raise ValueError("word length must be non-negative")
    letters = group.letters
    inv = np.asarray(group.inverse_of)
    la = np.array([m[0, 0] for m in letters])
    lb = np.array([m[0, 1] for m in letters])
    k = la.size
    w0 = FINGERPRINT_POINTS[0]

    alphas = [np.array([1.0 + 0j])]
    betas = [np.array([0j])]
    lengths = [np.array([0])]
    prints = [hyperboloid(alphas[0], betas[0], w0)]
    last = np.array([-1])
    total = 1
    for ell in range(1, L + 1):
        fa, fb = alphas[-1], betas[-1]
        if fa.size == 0 or k == 0:
            break
        # right multiplication by a letter: word g -> g s
        ca = fa[:, None] * la[None, :] + fb[:, None] * np.conj(lb)[None, :]
        cb = fa[:, None] * lb[None, :] + fb[:, None] * np.conj(la)[None, :]
        clast = np.broadcast_to(np.arange(k)[None, :], ca.shape)
        keep = np.ones(ca.shape, dtype=bool)
        has_last = last >= 0
        keep[has_last, inv[last[has_last]]] = False
        ca, cb, clast = ca[keep], cb[keep], clast[keep]
        X = hyperboloid(ca, cb, w0)

        dup = np.zeros(ca.size, dtype=bool)
        old = cKDTree(np.concatenate(prints))
        dist, _ = old.query(X, k=1, distance_upper_bound=DEDUP_TOL)
        dup |= np.isfinite(dist)
        pairs = cKDTree(X).query_pairs(DEDUP_TOL, output_type="ndarray")
        if pairs.size:
            dup[pairs.max(axis=1)] = True
        ca, cb, clast, X = ca[~dup], cb[~dup], clast[~dup], X[~dup]

        total += ca.size
        if total > cap:
            raise EnumerationCapExceeded(f"more than {cap} elements at word length {ell}")
        alphas.append(ca)
        betas.append(cb)
        lengths.append(np.full(ca.size, ell))
        prints.append(X)
        last = clast
    return OrbitEnumeration(group, L, np.concatenate(alphas), np.concatenate(betas),
                            np.concatenate(lengths))


def _check_poly(f) -> np.ndarray:
    c = np.atleast_1d(np.asarray(f, dtype=complex))
    if c.size - 1 > MAX_DEGREE:
        raise ValueError(f"polynomial degree {c.size - 1} exceeds {MAX_DEGREE}")
    return c


def _polyval(coeffs: np.ndarray, w):
    """Evaluate ``sum_k coeffs[k] w^k`` (ascending powers)."""
    out = np.zeros_like(w, dtype=complex)
    for c in coeffs[::-1]:
        out = out * w + c
    return out


@dataclass(frozen=True)
class ThetaValue:
    value: complex
    tail_estimate: float
    L: int
    sphere_R: float
    orbit_separation: float


_enum_cache: dict = {}


def _enumeration(g: FuchsianGroup, L: int, enum: OrbitEnumeration | None) -> OrbitEnumeration:
    if enum is not None:
        if enum.L < L:
            raise ValueError("supplied enumeration is shorter than L")
        return enum.truncate(L) if enum.L > L else enum
    key = (id(g), L)
    if key not in _enum_cache:
        _enum_cache.clear()
        _enum_cache[key] = (g, enumerate_group(g, L))
    return _enum_cache[key][1]


def theta_terms(enum: OrbitEnumeration, f, z: complex) -> np.ndarray:
    w, dg = enum.apply(complex(z))
    return _polyval(_check_poly(f), w) * dg ** 2


def theta_series(g: FuchsianGroup, f, z, L: int,
                 enum: OrbitEnumeration | None = None) -> ThetaValue:
    """Truncated theta series with a heuristic tail estimate.

    The tail estimate bounds the terms of word length ``> L`` assuming their
    orbit points ``gamma z`` lie at least as far from 0 as the closest one of
    length ``L``: with the orbit ``r0``-separated, packing gives
    ``sup|f| A(r0/2) B(R_L - r0/2) / (1 - |z|^2)^2``.  It is not a proof.
    """
    if isinstance(z, DiscPoint):
        z = z.z
    z = complex(z)
    coeffs = _check_poly(f)
    en = _enumeration(g, L, enum)
    terms = theta_terms(en, coeffs, z)
    value = complex(np.sum(terms))
    if L == 0 or len(en) == 1:
        return ThetaValue(value, 0.0 if len(en) == 1 and not g.generators else math.inf,
                          L, math.inf, math.inf)
    r0 = en.orbit_separation(z)
    w, _ = en.apply(z, en.length == L)
    R_L = float(np.min(np.arctanh(np.minimum(np.abs(w), BELOW_ONE)))) if w.size else math.inf
    tail = _tail(float(np.sum(np.abs(coeffs))), r0, R_L, z, L)
    return ThetaValue(value, tail, L, R_L, r0)


def automorphy_check(g: FuchsianGroup, f, z, gamma: DiscAutomorphism, L: int,
                     enum: OrbitEnumeration | None = None) -> float:
    """``|theta_L(gamma z) gamma'(z)^2 - theta_L(z)|``."""
    if isinstance(z, DiscPoint):
        z = z.z
    z = complex(z)
    en = _enumeration(g, L, enum)
    coeffs = _check_poly(f)
    gz = complex(gamma(z))
    lhs = np.sum(theta_terms(en, coeffs, gz)) * complex(gamma.derivative(z)) ** 2
    return float(abs(lhs - np.sum(theta_terms(en, coeffs, z))))


@dataclass(frozen=True)
class ThetaProfile:
    """Per-word-length data for one evaluation point, from a single pass."""

    z: complex
    sphere_values: np.ndarray   # sum of terms of each exact length
    sphere_radius: np.ndarray   # min d(0, gamma z) over each exact length
    orbit_separation: float
    f_bound: float

    def value(self, L: int) -> complex:
        return complex(np.sum(self.sphere_values[:L + 1]))

    def tail_estimate(self, L: int) -> float:
        return _tail(self.f_bound, self.orbit_separation, float(self.sphere_radius[L]), self.z, L)


def _tail(M: float, r0: float, R_L: float, z: complex, L: int) -> float:
    if L == 0 or math.isinf(r0):
        return 0.0 if math.isinf(r0) else math.inf
    if math.isinf(R_L):
        return 0.0
    if R_L > r0 / 2.0:
        tail = M * cauchy_constant_A(r0 / 2.0) * tail_mass(R_L - r0 / 2.0)
    else:
        tail = M * math.pi * cauchy_constant_A(r0 / 2.0)
    return tail / (1.0 - abs(z) ** 2) ** 2


def theta_profile(enum: OrbitEnumeration, f, z) -> ThetaProfile:
    if isinstance(z, DiscPoint):
        z = z.z
    z = complex(z)
    coeffs = _check_poly(f)
    w, dg = enum.apply(z)
    terms = _polyval(coeffs, w) * dg ** 2
    n = enum.L + 1
    vals = (np.bincount(enum.length, weights=terms.real, minlength=n)
            + 1j * np.bincount(enum.length, weights=terms.imag, minlength=n))
    rad = np.full(n, np.inf)
    dist = np.arctanh(np.minimum(np.abs(w), BELOW_ONE))
    np.minimum.at(rad, enum.length, dist)
    return ThetaProfile(z, vals, rad, enum.orbit_separation(z), float(np.sum(np.abs(coeffs))))


def automorphy_defects(enum: OrbitEnumeration, f, z, gamma: DiscAutomorphism,
                       Ls) -> list[float]:
    """:func:`automorphy_check` at several truncation lengths from one pass."""
    if isinstance(z, DiscPoint):
        z = z.z
    z = complex(z)
    a = theta_profile(enum, f, complex(gamma(z)))
    b = theta_profile(enum, f, z)
    d2 = complex(gamma.derivative(z)) ** 2
    return [abs(a.value(L) * d2 - b.value(L)) for L in Ls]


def sphere_sums(enum: OrbitEnumeration, z) -> np.ndarray:
    """``sum_{|gamma| = l} |gamma'(z)|^2`` for ``l = 0..L``."""
    if isinstance(z, DiscPoint):
        z = z.z
    _, dg = enum.apply(complex(z))
    return np.bincount(enum.length, weights=np.abs(dg) ** 2, minlength=enum.L + 1)
