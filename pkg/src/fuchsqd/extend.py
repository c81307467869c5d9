"""Bounded holomorphic extension of data on a separated set.

The unknown is a coefficient vector ``p`` on the support ``T``; the
extension is always the series ``sigma(p)``.  The iteration

    res_0 = q,  p_{k+1} = p_k + res_k,  res_{k+1} = q - sigma(p_{k+1})|_T

contracts the residual by ``||id - i o sigma|| <= D(r)`` per step, so it
converges whenever ``D(r) < 1``, and ``|p*| <= |q| / (1 - D)`` gives the
sup bound ``E(r) |q| = C(r) / (1 - D(r)) |q|`` for the extension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fuchsian import (
    R_STAR,
    FuchsianSeries,
    QDData,
    SeparatedSet,
    constant_table,
    interaction_matrix,
    measure_sup,
)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200


class RefusedError(ValueError):
    """Precondition ``D(r) < 1`` fails for the support's separation."""


class IllConditionedError(np.linalg.LinAlgError):
    pass


@dataclass(eq=False)
class ExtensionResult:
    data: QDData
    solved: QDData
    iterations: int
    residual_history: list[float]
    certified_sup_bound: float
    converged: bool = True
    method: str = "neumann"
    condition: float | None = field(default=None)

    @property
    def solved_coeffs(self) -> np.ndarray:
        return self.solved.coeffs

    @property
    def series(self) -> FuchsianSeries:
        return FuchsianSeries(self.solved)

    def interpolation_residual(self) -> float:
        """``max_T`` hyperbolic norm of ``sigma(p*) - q``."""
        d = self.data
        N = interaction_matrix(d.z, d.z)
        return float(np.max(np.abs(N @ self.solved.hyp_values - d.hyp_values), initial=0.0))

    def residual_ratios(self) -> list[float]:
        h = self.residual_history
        return [b / a for a, b in zip(h[:-1], h[1:]) if a > 0]

    def to_json(self) -> dict:
        return {"coeffs": [[c.real, c.imag] for c in self.solved.coeffs],
                "iterations": self.iterations,
                "residuals": list(self.residual_history),
                "E_bound": self.certified_sup_bound,
                "converged": self.converged,
                "method": self.method}


def check_admissible(r: float) -> None:
    if not r > R_STAR:
        D = constant_table(r).D
        raise RefusedError(
            f"D(r) = {D:.6g} >= 1 at r = {r:g}; separation must exceed "
            f"2 asinh(1) = {R_STAR:.6f}")


def _certified(data: QDData) -> float:
    tab = constant_table(data.r)
    return tab.E * data.sup_norm


def zero_pad(data: QDData, enclosing: SeparatedSet) -> QDData:
    """Extend ``data`` by zero to a larger support containing it.

    This is how data on a subset is handed to a solver working on a
    bigger separated set.
    """
    idx = []
    for w in data.z:
        d = np.abs(enclosing.z - w)
        j = int(np.argmin(d)) if d.size else -1
        if j < 0 or d[j] > 1e-12:
            raise ValueError(f"support point {w} is not in the enclosing set")
        idx.append(j)
    c = np.zeros(len(enclosing), dtype=complex)
    c[idx] = data.coeffs
    return QDData(enclosing, c)


def extend_neumann(data: QDData, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                   enclosing: SeparatedSet | None = None) -> ExtensionResult:
    """Solve ``sigma(p)|_T = q`` by the residual-correction iteration."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    if enclosing is not None:
        data = zero_pad(data, enclosing)
    check_admissible(data.r)
    q = data.hyp_values
    qn = data.sup_norm
    N = interaction_matrix(data.z, data.z)
    p = np.zeros_like(q)
    res = q.copy()
    history = [qn]
    it = 0
    converged = qn == 0.0
    while not converged and it < max_iter:
        p = p + res
        res = q - N @ p
        it += 1
        history.append(float(np.max(np.abs(res))))
        converged = history[-1] <= tol * qn
    return ExtensionResult(data, QDData.from_hyp_values(data.support, p), it, history,
                           _certified(data), converged, "neumann")


def extend_direct(data: QDData, max_condition: float = 1e12) -> ExtensionResult:
    """Solve the interpolation system ``G c = q`` with a dense LU factorisation.

    ``G[s, t] = (1 - |t|^2)^4 / (1 - conj(t) s)^4`` is the coefficient at
    ``s`` of the unit extension from ``t``.  The system is solved in the
    normalised frame (same solution, better scaled).
    """
    n = len(data.support)
    if n == 0:
        return ExtensionResult(data, data, 0, [0.0], 0.0, True, "direct", 1.0)
    N = interaction_matrix(data.z, data.z)
    cond = float(np.linalg.cond(N))
    if not math.isfinite(cond) or cond > max_condition:
        raise IllConditionedError(f"interpolation system condition number {cond:.3e}")
    p = np.linalg.solve(N, data.hyp_values)
    solved = QDData.from_hyp_values(data.support, p)
    res = float(np.max(np.abs(N @ p - data.hyp_values)))
    bound = _certified(data) if data.r > R_STAR else math.inf
    return ExtensionResult(data, solved, 1, [data.sup_norm, res], bound, True, "direct", cond)


def extension_sup_certificate(result: ExtensionResult) -> float:
    if not result.converged:
        raise ValueError("certificate only applies to converged extensions")
    return constant_table(result.data.r).E * result.data.sup_norm


def measured_extension_sup(result: ExtensionResult, R_max: float | None = None,
                           step: float = 0.05) -> float:
    if R_max is None:
        R_max = 2.0 * result.data.r
    return measure_sup(result.series, R_max, step)
