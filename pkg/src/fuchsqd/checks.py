"""Property suite: the quantitative invariants the library is built on.

Each ``check_*`` function runs one invariant end to end on seeded random
inputs and returns a :class:`CheckResult`.  The CLI ``check`` command and the
acceptance tests both call these functions.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .extend import RefusedError, check_admissible, extend_direct, extend_neumann, \
    measured_extension_sup
from .fuchsian import (
    R_STAR,
    FuchsianSeries,
    QDData,
    SeparatedSet,
    constant_table,
    make_separated_set,
    measure_sup,
    residual_norms,
)
from .groups import octagon_genus2, schottky
from .hypgeo import DiscAutomorphism, DiscPoint, hyp_distance, integrate_radial
from .perturb import PerturbationSpec, perturbation_modulus, random_dq
from .quaddiff import (
    QDSample,
    extension_hyp_norm_profile,
    l1_norm,
    l1_norm_quadrature,
    minimal_extension,
    pullback_sample,
    tail_mass,
)
from .theta import enumerate_group, sphere_sums, theta_profile


@dataclass
class CheckResult:
    name: str
    passed: bool
    summary: str
    elapsed: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.summary} ({self.elapsed:.1f} s)"


def _random_sample(rng: np.random.Generator, d_max: float) -> QDSample:
    d = d_max * rng.random()
    c = complex(rng.normal(), rng.normal()) * 10.0 ** rng.uniform(-2, 2)
    return QDSample(DiscPoint.from_polar(d, 2 * math.pi * rng.random()), c)


def _random_data(S: SeparatedSet, rng: np.random.Generator) -> QDData:
    n = len(S)
    h = np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
    return QDData.from_hyp_values(S, h * 10.0 ** rng.uniform(-1, 1))


def check_mass_identity(n: int = 20, seed: int = 0, rtol: float = 1e-7,
                        time_limit: float = 10.0) -> CheckResult:
    """Quadrature L1 norm of the minimal extension equals ``pi |q|_hyp``."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    errs = []
    for _ in range(n):
        e = minimal_extension(_random_sample(rng, 3.0))
        errs.append(abs(l1_norm_quadrature(e) / l1_norm(e) - 1.0))
    el = time.perf_counter() - t0
    worst = max(errs)
    ok = worst <= rtol and el < time_limit
    return CheckResult("mass identity", ok,
                       f"{n} samples, max relative error {worst:.2e} (tol {rtol:g}), "
                       f"limit {time_limit:g} s", el, {"max_rel_error": worst})


def check_radial_law(n: int = 200, seed: int = 1, tol: float = 1e-10,
                     tail_tol: float = 1e-7) -> CheckResult:
    """Hyperbolic norm profile ``sech^4 d`` and the tail mass ``pi sech^2 R``."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        s = _random_sample(rng, 3.0)
        x = DiscPoint.from_polar(4.0 * rng.random(), 2 * math.pi * rng.random())
        e = minimal_extension(s)
        got = float(e.hyp_norm_at(x.z, x.conformal)) / s.base.conformal ** 2 / abs(s.coeff)
        want = float(extension_hyp_norm_profile(hyp_distance(s.base, x)))
        worst = max(worst, abs(got - want))
    tails = {}
    for R in (0.5, 1.0, 2.0, 4.0):
        q = integrate_radial(lambda t: 1.0 / math.cosh(t) ** 4, R, math.inf)
        tails[R] = abs(q / tail_mass(R) - 1.0)
    worst_tail = max(tails.values())
    ok = worst <= tol and worst_tail <= tail_tol
    return CheckResult("radial law and tail", ok,
                       f"profile max error {worst:.2e} (tol {tol:g}); tail max relative "
                       f"error {worst_tail:.2e} (tol {tail_tol:g})",
                       time.perf_counter() - t0, {"profile_error": worst, "tail_errors": tails})


def check_interpolation_bounds(n: int = 100, seed: int = 2, radii=(2.0, 3.0, 4.0, 6.0),
                               time_limit: float = 60.0, n_max: int = 40) -> CheckResult:
    """Grid sup ``<= C(r)|q|`` on ``B(0, 2r)`` and residual ``<= D(r)|q|`` on ``T``."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    sup_v = res_v = 0
    worst_sup = worst_res = 0.0
    for k in range(n):
        r = radii[k % len(radii)]
        S = make_separated_set("greedy-random", r, 1.5 * r, seed=int(rng.integers(2**31)),
                               n_max=n_max, radial="uniform")
        data = _random_data(S, rng)
        tab = constant_table(r)
        qn = data.sup_norm
        sup = measure_sup(FuchsianSeries(data), 2.0 * r, step=0.05, n_theta=128)
        res = float(residual_norms(data).max())
        sup_v += sup > tab.C * qn
        res_v += res > tab.D * qn
        worst_sup = max(worst_sup, sup / (tab.C * qn))
        worst_res = max(worst_res, res / (tab.D * qn))
    el = time.perf_counter() - t0
    ok = sup_v == 0 and res_v == 0 and el < time_limit
    return CheckResult("interpolation bounds", ok,
                       f"{n} configurations, sup violations {sup_v}, residual violations "
                       f"{res_v}, worst sup/bound {worst_sup:.3f}, worst residual/bound "
                       f"{worst_res:.3f}, limit {time_limit:g} s", el,
                       {"sup_violations": sup_v, "residual_violations": res_v,
                        "worst_sup_ratio": worst_sup, "worst_residual_ratio": worst_res})


def _extension_suite(n: int, seed: int, r: float, tol: float):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        S = make_separated_set("greedy-random", r, 2.0 * r, seed=int(rng.integers(2**31)),
                               n_max=60, radial="uniform")
        data = _random_data(S, rng)
        out.append((data, extend_neumann(data, tol=tol), extend_direct(data)))
    return out


def iteration_cap(r: float, tol: float) -> int:
    """Iterations after which ``D^k <= tol`` is guaranteed."""
    return math.ceil(math.log(tol) / math.log(constant_table(r).D))


def check_neumann(n: int = 50, seed: int = 3, r: float = 4.0, tol: float = 1e-10,
                  agree_tol: float = 1e-8, suite=None) -> CheckResult:
    """Residual ratios ``<= D(r)``; agreement with the direct solve; refusal threshold."""
    t0 = time.perf_counter()
    suite = suite if suite is not None else _extension_suite(n, seed, r, tol)
    D = constant_table(r).D
    cap = iteration_cap(r, tol)
    worst_ratio = worst_diff = 0.0
    iters = []
    bad = 0
    for data, neu, direct in suite:
        ratios = neu.residual_ratios()
        worst_ratio = max([worst_ratio, *ratios])
        diff = float(np.max(np.abs(neu.solved.hyp_values - direct.solved.hyp_values)))
        diff /= data.sup_norm
        worst_diff = max(worst_diff, diff)
        iters.append(neu.iterations)
        bad += (not neu.converged) or neu.iterations > cap or any(x > D + 1e-9 for x in ratios) \
            or diff > agree_tol
    refusal_ok = _refusal_fires_exactly()
    ok = bad == 0 and refusal_ok
    return CheckResult("neumann convergence", ok,
                       f"{len(suite)} instances, worst ratio {worst_ratio:.4f} vs D {D:.4f}, "
                       f"iterations {min(iters)}..{max(iters)} (cap {cap}), worst "
                       f"neumann/direct gap {worst_diff:.1e}, refusal threshold "
                       f"{'exact' if refusal_ok else 'WRONG'}", time.perf_counter() - t0,
                       {"worst_ratio": worst_ratio, "max_iterations": max(iters),
                        "iteration_cap": cap, "worst_gap": worst_diff, "refusal_ok": refusal_ok})


def _refusal_fires_exactly() -> bool:
    below = [1.0, 1.5, R_STAR * (1 - 1e-12), float(np.nextafter(R_STAR, 0)), R_STAR]
    above = [float(np.nextafter(R_STAR, 4)), R_STAR * (1 + 1e-12), 1.8, 2.0, 4.0]
    for r in below:
        try:
            check_admissible(r)
            return False
        except RefusedError:
            pass
    for r in above:
        try:
            check_admissible(r)
        except RefusedError:
            return False
    return True


def check_extension_certificate(n: int = 50, seed: int = 3, r: float = 4.0,
                                tol: float = 1e-10, suite=None) -> CheckResult:
    """Grid sup of each converged extension ``<= E(r) |q|``."""
    t0 = time.perf_counter()
    suite = suite if suite is not None else _extension_suite(n, seed, r, tol)
    E = constant_table(r).E
    viol = 0
    worst = 0.0
    for data, neu, _ in suite:
        if not neu.converged:
            continue
        m = measured_extension_sup(neu) / data.sup_norm
        worst = max(worst, m)
        viol += m > E
    return CheckResult("extension certificate", viol == 0,
                       f"{len(suite)} extensions, worst sup/|q| {worst:.4f} vs E {E:.4f}, "
                       f"violations {viol}", time.perf_counter() - t0,
                       {"violations": viol, "worst_ratio": worst, "E": E})


def check_perturbation(r: float = 4.0, R: float = 10.0, alpha: float = 1e-6,
                       trials: int = 100, seed: int = 4) -> CheckResult:
    """Measured modulus ``<=`` certified bound; shrinking alpha stays under the tail floor."""
    t0 = time.perf_counter()
    q = random_dq(r, R + 2.0, C=1.0, seed=seed, small_norm=alpha * 1e-2)
    big = perturbation_modulus(q, PerturbationSpec(R, alpha), trials=trials, seed=seed)
    small = perturbation_modulus(q, PerturbationSpec(R, alpha / 10), trials=trials, seed=seed)
    comp = small["components"]
    floor = comp["tail_q"] + comp["tail_p"]
    ok_bound = big["violations"] == 0 and small["violations"] == 0
    ok_shrink = small["measured_max"] <= big["measured_max"] + floor
    return CheckResult("perturbation modulus", ok_bound and ok_shrink,
                       f"alpha {alpha:g}: measured max {big['measured_max']:.3e} <= bound "
                       f"{big['certified_bound']:.3e} on all {trials} trials; alpha/10: "
                       f"{small['measured_max']:.3e} (floor {floor:.3e})",
                       time.perf_counter() - t0,
                       {"measured_max": big["measured_max"], "certified_bound": big["certified_bound"],
                        "measured_max_small": small["measured_max"], "tail_floor": floor})


THETA_POINTS = (0.1 + 0.2j, -0.25 + 0.05j, 0.05 - 0.3j)


def check_theta(L: int = 8, time_limit: float = 300.0, enum=None,
                schottky_L: int = 8) -> CheckResult:
    """Automorphy defects of the genus-2 series shrink with L and sit under the tail estimates."""
    t0 = time.perf_counter()
    g = octagon_genus2()
    en = enum if enum is not None else enumerate_group(g, L)
    Ls = (4, 6, 8) if L >= 8 else (L - 4, L - 2, L)
    f = [1.0]
    failures = []
    rows = []
    base = {z: theta_profile(en, f, z) for z in THETA_POINTS}
    for i, m in enumerate(g.letters[:len(g.generators)]):
        gamma = DiscAutomorphism.from_matrix(m)
        for z in THETA_POINTS:
            pz = base[z]
            pg = theta_profile(en, f, complex(gamma(z)))
            d2 = complex(gamma.derivative(z)) ** 2
            defs = [abs(pg.value(k) * d2 - pz.value(k)) for k in Ls]
            tails = pz.tail_estimate(Ls[-1]) + pg.tail_estimate(Ls[-1])
            rows.append((i, z, defs, tails))
            if not all(a > b for a, b in zip(defs, defs[1:])):
                failures.append(f"generator {i} at {z}: defects {defs} not decreasing")
            if not defs[-1] < tails:
                failures.append(f"generator {i} at {z}: defect {defs[-1]:.2e} >= tails {tails:.2e}")
    sch = enumerate_group(schottky(), schottky_L)
    sums = sphere_sums(sch, 0.1 + 0.2j)
    ratios = sums[2:] / sums[1:-1]
    geometric = bool(np.all(ratios < 1.0) and ratios.max() <= 2.0 * ratios.min())
    if not geometric:
        failures.append(f"schottky sphere sums not geometric: ratios {ratios}")
    el = time.perf_counter() - t0
    if el >= time_limit:
        failures.append(f"runtime {el:.0f} s over the {time_limit:g} s limit")
    worst = max(r[2][-1] / r[3] for r in rows)
    return CheckResult("theta series", not failures,
                       f"{len(rows)} generator/point pairs, worst L={Ls[-1]} defect/tail "
                       f"{worst:.2e}; schottky per-length ratios {ratios.min():.2e}.."
                       f"{ratios.max():.2e}" + ("; " + "; ".join(failures) if failures else ""),
                       el, {"rows": rows, "schottky_ratios": ratios.tolist(),
                            "failures": failures})


def check_equivariance(n: int = 20, seed: int = 5, r: float = 3.0, tol: float = 1e-10,
                       n_grid: int = 100) -> CheckResult:
    """``sigma(gamma^* q) = gamma^* sigma(q)`` on a 100-point grid.

    Compared as hyperbolic norms of the difference, relative to ``|q|``.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    S = make_separated_set("greedy-random", r, 2.0 * r, seed=seed, n_max=30, radial="uniform")
    data = _random_data(S, rng)
    sig = FuchsianSeries(data)
    worst = 0.0
    for _ in range(n):
        a = 0.8 * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        gamma = DiscAutomorphism(complex(a), 2 * math.pi * rng.random())
        pulled = [pullback_sample(s, gamma) for s in data.samples()]
        # isometries preserve separation up to rounding in the last place
        S2 = SeparatedSet(tuple(p.base for p in pulled), r * (1 - 1e-12))
        sig2 = FuchsianSeries(QDData(S2, np.array([p.coeff for p in pulled])))
        x = np.tanh(2.0 * rng.random(n_grid)) * np.exp(2j * np.pi * rng.random(n_grid))
        lhs = sig2(x)
        rhs = sig(gamma(x)) * gamma.derivative(x) ** 2
        err = np.abs(lhs - rhs) * (1 - np.abs(x) ** 2) ** 2 / data.sup_norm
        worst = max(worst, float(err.max()))
    return CheckResult("equivariance", worst <= tol,
                       f"{n} automorphisms x {n_grid} points, max relative error "
                       f"{worst:.2e} (tol {tol:g})", time.perf_counter() - t0,
                       {"max_error": worst})


def run_all(quick: bool = False):
    """Yield every check result in order.  ``quick`` shrinks the sizes."""
    yield check_mass_identity()
    yield check_radial_law()
    yield check_interpolation_bounds(n=20 if quick else 100)
    suite = _extension_suite(10 if quick else 50, 3, 4.0, 1e-10)
    yield check_neumann(suite=suite)
    yield check_extension_certificate(suite=suite)
    yield check_perturbation(trials=10 if quick else 100)
    yield check_theta(L=6 if quick else 8, schottky_L=6 if quick else 8)
    yield check_equivariance()
