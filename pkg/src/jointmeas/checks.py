"""Self-checks behind ``jointmeas validate`` and the acceptance tests.

Each check returns a CheckResult; none of them raise on failure.
"""

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from . import montecarlo as mc
from .bloch import MATRIX_TOL, Z_HAT, BlochVector, spin_effect
from .estimator import estimate_joint
from .experiment import DEFAULT_SEED, build_reference_experiments, render_csv, run_experiment
from .povm import (
    assemble_joint_povm,
    max_theta,
    solve_optimal_sharpness,
    solve_optimal_sharpness_numeric,
    synthesize,
    tradeoff_lhs,
    unsharpness_product,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def feasible_lattice(n_p=23, n_theta=25, p_lo=0.51, p_hi=0.95, frac_hi=0.99):
    """(p, theta) pairs with theta from 0 to ``frac_hi`` of the limit for each p.

    p = 1/2 is left out: below 2theta = 90 deg it has no solution in (0, 1].
    """
    pts = []
    for p in np.linspace(p_lo, p_hi, n_p):
        tmax = max_theta(float(p))
        for f in np.linspace(0.0, frac_hi, n_theta):
            pts.append((float(p), float(f * tmax)))
    return pts


def _timed(name, fn):
    t0 = time.perf_counter()
    passed, detail = fn()
    return CheckResult(name, passed, detail, time.perf_counter() - t0)


def check_saturation(points=None):
    points = points or feasible_lattice()

    def run():
        worst_prod = worst_lhs = 0.0
        a = np.array([0.0, 0.0, 1.0])
        for p, theta in points:
            alpha, beta = solve_optimal_sharpness(p, theta)
            b = np.array([math.sin(2 * theta), 0.0, math.cos(2 * theta)])
            worst_prod = max(worst_prod, abs(unsharpness_product(alpha, beta) - math.sin(2 * theta) ** 2))
            worst_lhs = max(worst_lhs, abs(tradeoff_lhs(alpha, a, beta, b) - 2.0))
        ok = worst_prod < 1e-9 and worst_lhs < 1e-9
        return ok, f"{len(points)} points, max|prod - sin^2 2t| = {worst_prod:.2e}, max|lhs - 2| = {worst_lhs:.2e}"

    return _timed("bound saturation", run)


def check_closed_form_vs_oracle(points=None):
    points = points or feasible_lattice()

    def run():
        worst = 0.0
        for p, theta in points:
            cf = solve_optimal_sharpness(p, theta)
            nu = solve_optimal_sharpness_numeric(p, theta)
            worst = max(worst, abs(cf[0] - nu[0]), abs(cf[1] - nu[1]))
        return worst < 1e-8, f"{len(points)} points, max deviation {worst:.2e}"

    return _timed("closed form vs brute force", run)


def check_povm_structure(n=100, seed=1):
    def run():
        rng = np.random.default_rng(seed)
        worst_sum = worst_neg = worst_marg = 0.0
        for _ in range(n):
            p = rng.uniform(0.51, 0.95)
            theta = rng.uniform(0.0, 0.99) * max_theta(p)
            v = rng.normal(size=3)
            a = BlochVector.of(v / np.linalg.norm(v))
            design = synthesize(p, theta, rng.uniform(-math.pi, math.pi), a)
            povm = assemble_joint_povm(design)
            worst_sum = max(worst_sum, float(np.max(np.abs(povm.total() - np.eye(2)))))
            worst_neg = max(worst_neg, max(-np.linalg.eigvalsh(e).min() for e in povm.effects))
            for s in (+1, -1):
                ea = spin_effect(design.a, s, design.alpha)
                eb = spin_effect(design.b, s, design.beta)
                worst_marg = max(
                    worst_marg,
                    float(np.max(np.abs(povm.marginal_a(s) - ea))),
                    float(np.max(np.abs(povm.marginal_b(s) - eb))),
                )
        ok = worst_sum <= MATRIX_TOL and worst_neg <= MATRIX_TOL and worst_marg <= MATRIX_TOL
        return ok, (
            f"{n} designs, completeness {worst_sum:.1e}, negativity {worst_neg:.1e}, "
            f"marginals {worst_marg:.1e}"
        )

    return _timed("POVM structure", run)


def check_feasibility_boundary():
    def run():
        two_theta = math.degrees(2 * max_theta(0.67))
        half = math.degrees(max_theta(0.5))
        ok = abs(two_theta - 52.4) <= 0.1 and half == 45.0
        return ok, f"2theta_max(0.67) = {two_theta:.4f} deg, theta_max(0.5) = {half!r} deg"

    return _timed("feasibility boundary", run)


def check_reference_reproduction(seed=DEFAULT_SEED, sampler="shots"):
    def run():
        within = total = below = 0
        for cfg in build_reference_experiments(seed=seed):
            if sampler != "shots":
                cfg = replace(cfg, sampler=sampler)
            for row in run_experiment(cfg):
                total += 1
                z = (row.delta_product.value - row.sin_sq_2theta.value) / row.delta_product.std_err
                within += abs(z) <= 3.0
                below += z < -3.0
        ok = total == 27 and within >= 24 and below == 0
        return ok, f"{within}/{total} points within 3 sigma, {below} below the bound by > 3 sigma"

    return _timed("full-scale reproduction", run)


def check_exact_mode():
    def run():
        worst = 0.0
        for cfg in build_reference_experiments():
            for row in run_experiment(cfg, exact=True):
                t = math.radians(row.theta)
                c2 = math.cos(2 * t)
                a, b = row.alpha_theory.value, row.beta_theory.value
                theory = ((1 - a * a) / (a * a)) * ((1 - b * b) / (b * b) + 1 - c2 * c2)
                design_c = row.design["c"][2]
                design_d = row.design["d"][2]
                errs = [
                    row.sharp_a.value - 1.0,
                    row.sharp_b.value - c2,
                    row.A_j_bar.value - a,
                    row.B_j_bar.value - b * c2,
                    row.var_product_sharp.value,
                    row.var_product_joint.value - theory,
                    row.sharp_c.value - design_c,
                    row.sharp_d.value - design_d,
                    row.delta_product.value - row.sin_sq_2theta.value,
                    row.alpha_exp.value - a,
                    row.beta_exp.value - b,
                ]
                worst = max(worst, max(abs(e) for e in errs))
        return worst < 1e-9, f"27 rows, max deviation from theory {worst:.2e}"

    return _timed("exact-mode theory consistency", run)


def check_calibration(reps=1000, p=0.67, theta_deg=13.0, shots=1_500_000, seed=2024):
    def run():
        design = synthesize(p, math.radians(theta_deg))
        root = mc.RngSeed(seed)
        vals, errs = [], []
        for i in range(reps):
            s = root.child(i)
            est = estimate_joint(
                mc.run_joint(Z_HAT, design, shots, s.child(0), method="binomial"),
                mc.run_sharp(Z_HAT, design.a, shots, s.child(1), method="binomial"),
                mc.run_sharp(Z_HAT, design.b, shots, s.child(2), method="binomial"),
                design.p,
            )
            vals.append(est.delta_product.value)
            errs.append(est.delta_product.std_err)
        emp = float(np.std(vals, ddof=1))
        prop = float(np.mean(errs))
        rel = abs(emp - prop) / emp
        return rel <= 0.15, f"empirical sd {emp:.5f}, propagated {prop:.5f}, relative gap {rel:.1%}"

    return _timed("estimator calibration", run)


def check_determinism(seed=11):
    def run():
        cfg = build_reference_experiments(seed=seed, runs=3, shots_per_run=2000)[0]
        first = render_csv(run_experiment(cfg))
        second = render_csv(run_experiment(cfg))
        return first == second, f"{len(first)} bytes, identical={first == second}"

    return _timed("replay determinism", run)


FAST_CHECKS = (
    check_saturation,
    check_closed_form_vs_oracle,
    check_povm_structure,
    check_feasibility_boundary,
    check_exact_mode,
    check_determinism,
)
SLOW_CHECKS = (check_reference_reproduction, check_calibration)


def run_checks(full=False):
    checks = FAST_CHECKS + (SLOW_CHECKS if full else ())
    return [c() for c in checks]
