"""Concrete Fuchsian groups given by generating disc automorphisms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .hypgeo import BELOW_ONE, DiscAutomorphism, hyp_distance_array


@dataclass(frozen=True)
class FuchsianGroup:
    """A group of disc automorphisms given by generators.

    ``letters`` holds the generators followed by those inverses that are
    distinct from every generator (a half-turn is its own inverse).
    ``inverse_of[i]`` is the index of the inverse letter.
    """

    generators: tuple[DiscAutomorphism, ...]
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        gens = tuple(self.generators)
        if not all(isinstance(g, DiscAutomorphism) for g in gens):
            raise TypeError("generators must be DiscAutomorphism instances")
        object.__setattr__(self, "generators", gens)

    @property
    def letters(self) -> list[np.ndarray]:
        return [m for m, _ in self._alphabet()]

    @property
    def inverse_of(self) -> list[int]:
        return [i for _, i in self._alphabet()]

    def _alphabet(self):
        mats = [g.matrix() for g in self.generators]
        letters = list(mats)
        for m in mats:
            inv = _su11_inverse(m)
            if not any(_same_element(inv, x) for x in letters):
                letters.append(inv)
        inverse = []
        for m in letters:
            inv = _su11_inverse(m)
            inverse.append(next(j for j, x in enumerate(letters) if _same_element(inv, x)))
        return list(zip(letters, inverse))

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}


def _su11_inverse(m: np.ndarray) -> np.ndarray:
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def _same_element(m1, m2, tol=1e-9) -> bool:
    return bool(np.allclose(m1, m2, atol=tol) or np.allclose(m1, -m2, atol=tol))


def octagon_genus2() -> FuchsianGroup:
    """Surface group of genus 2 from the regular octagon with angles pi/4.

    Opposite sides are paired by translations along the four diameters
    through the side midpoints.  In curvature -1 the centre-to-side
    distance ``rho`` satisfies ``cosh(rho) = cot(pi/8) = 1 + sqrt 2`` and
    each pairing translates by ``2 rho``; in the curvature -4 units used
    here that is a translation by ``rho``.
    """
    rho = math.acosh(1.0 + math.sqrt(2.0))
    gens = tuple(DiscAutomorphism.translation(rho, k * math.pi / 4.0) for k in range(4))
    return FuchsianGroup(gens, "octagon-genus2", {})


def schottky(translation: float = 2.0) -> FuchsianGroup:
    """Free group on two translations along perpendicular diameters.

    The four isometric half-planes are disjoint once
    ``translation > arccosh(sqrt 2) ~ 0.8814``; the default is comfortably
    inside.
    """
    if translation <= math.acosh(math.sqrt(2.0)):
        raise ValueError("translation too short for a Schottky configuration")
    gens = (DiscAutomorphism.translation(translation, 0.0),
            DiscAutomorphism.translation(translation, math.pi / 2.0))
    return FuchsianGroup(gens, "schottky", {"translation": translation})


def triangle_237() -> FuchsianGroup:
    """Orientation-preserving (2,3,7) triangle group.

    Generated by the rotation of order 7 about 0 and the half-turn about
    the adjacent vertex of angle pi/2.  For the triangle with angles
    pi/7 (at 0), pi/2, pi/3 the side joining the first two vertices has
    curvature -1 length ``c`` with ``cosh c = cos(pi/3) / sin(pi/7)``; its
    Euclidean length from 0 is ``tanh(c / 2)``.
    """
    c = math.acosh(math.cos(math.pi / 3.0) / math.sin(math.pi / 7.0))
    p = math.tanh(c / 2.0)
    rot = DiscAutomorphism.rotation_about_zero(2.0 * math.pi / 7.0)
    to0 = DiscAutomorphism(p, 0.0)
    half_turn = to0.inverse() @ DiscAutomorphism.rotation_about_zero(math.pi) @ to0
    return FuchsianGroup((rot, half_turn), "triangle-237", {})


def group_from_json(obj: dict) -> FuchsianGroup:
    kind = obj.get("kind")
    params = obj.get("params") or {}
    if kind == "octagon-genus2":
        return octagon_genus2()
    if kind == "schottky":
        return schottky(**params)
    if kind == "triangle-237":
        return triangle_237()
    raise ValueError(f"unknown group kind {kind!r}")


def _hyperboloid(w: np.ndarray) -> np.ndarray:
    s = 1.0 - np.abs(w) ** 2
    return np.stack([(1.0 + np.abs(w) ** 2) / s, 2.0 * w.real / s, 2.0 * w.imag / s], axis=-1)


def orbit_points(group: FuchsianGroup, base: complex, R: float, margin: float = 1.0,
                 cap: int = 2_000_000, merge_tol: float = 1e-6) -> np.ndarray:
    """Orbit of ``base`` inside ``B(0, R)``, found by breadth-first search on points.

    The search keeps points within ``R + margin`` so paths that leave the
    ball briefly are not lost.  Images whose hyperboloid coordinates agree
    to ``merge_tol`` (relative to their size) are identified.
    """
    letters = group.letters
    found = [np.array([complex(base)])]
    tree = cKDTree(_hyperboloid(found[0]))
    frontier = found[0]
    total = 1
    while frontier.size:
        imgs = np.concatenate([(m[0, 0] * frontier + m[0, 1]) / (m[1, 0] * frontier + m[1, 1])
                               for m in letters])
        imgs = imgs[np.arctanh(np.minimum(np.abs(imgs), BELOW_ONE)) <= R + margin]
        if imgs.size == 0:
            break
        X = _hyperboloid(imgs)
        tol = merge_tol * X[:, 0]
        dist, _ = tree.query(X)
        keep = dist > tol
        imgs, X, tol = imgs[keep], X[keep], tol[keep]
        # within the batch keep the first of each cluster
        drop = set()
        for i, j in cKDTree(X).query_pairs(float(tol.max(initial=0.0))):
            drop.add(max(i, j))
        if drop:
            mask = np.ones(imgs.size, bool)
            mask[list(drop)] = False
            imgs, X = imgs[mask], X[mask]
        total += imgs.size
        if total > cap:
            raise MemoryError(f"orbit enumeration exceeded cap of {cap} points")
        found.append(imgs)
        tree = cKDTree(_hyperboloid(np.concatenate(found)))
        frontier = imgs
    pts = np.concatenate(found)
    return pts[np.arctanh(np.minimum(np.abs(pts), BELOW_ONE)) <= R]
