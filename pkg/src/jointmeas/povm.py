"""Measurement operators, the sharpness tradeoff, and optimal joint-measurement synthesis.

A joint measurement of ``a . sigma`` and ``b . sigma`` with marginal sharpnesses
``alpha`` and ``beta`` exists iff ``|alpha a + beta b| + |alpha a - beta b| <= 2``.
On the boundary it is realised by measuring ``c . sigma`` with probability
``p`` and ``d . sigma`` otherwise, where ``c = (alpha a + beta b) / 2p`` and
``d = (alpha a - beta b) / 2(1 - p)``.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .bloch import (
    IDENTITY,
    MATRIX_TOL,
    UNIT_TOL,
    Z_HAT,
    BlochVector,
    pauli_dot,
    require_unit,
    rotation_from_z,
    spin_effect,
)
from .errors import (
    DegenerateDesignError,
    DomainError,
    InfeasibleError,
    InvalidDesignError,
    SynthesisError,
)

SATURATION_TOL = 1e-9
# p closer than this to 1/2 takes the symmetric special case
HALF_TOL = 1e-12


def _check_sharpness(value, name, allow_zero=True):
    if not (0.0 <= value <= 1.0) or (not allow_zero and value == 0.0):
        lo = "[0, 1]" if allow_zero else "(0, 1]"
        raise DomainError(f"{name} must lie in {lo}, got {value!r}")


def _check_p(p, allow_one=False):
    hi_ok = p <= 1.0 if allow_one else p < 1.0
    if not (0.5 <= p and hi_ok):
        hi = "1]" if allow_one else "1)"
        raise DomainError(f"selection probability must lie in [1/2, {hi}, got {p!r}")


@dataclass(frozen=True)
class DichotomicEffectPair:
    """Two-outcome qubit measurement ``Pi_pm = gamma_pm * 1 pm gamma_k * k . sigma``."""

    gamma_plus: float
    gamma_minus: float
    gamma_k: float
    k: BlochVector

    def matrices(self):
        ks = pauli_dot(self.k)
        return (
            self.gamma_plus * IDENTITY + self.gamma_k * ks,
            self.gamma_minus * IDENTITY - self.gamma_k * ks,
        )


@dataclass(frozen=True)
class EffectReport:
    """Which of the effect-pair constraints hold."""

    complete: bool
    positive: bool
    nonnegative_weight: bool
    eigenvalues_nonnegative: bool
    min_eigenvalue: float

    @property
    def valid(self):
        return self.complete and self.positive and self.nonnegative_weight


def validate_effect(e, tol=MATRIX_TOL):
    """Check completeness and positivity of a dichotomic effect pair.

    The parametric conditions are reported alongside an independent
    eigenvalue test of the two 2x2 matrices.
    """
    complete = abs(e.gamma_plus + e.gamma_minus - 1.0) <= tol
    positive = e.gamma_plus >= e.gamma_k - tol and e.gamma_minus >= e.gamma_k - tol
    nonneg = e.gamma_k >= 0.0
    try:
        eig = min(float(np.linalg.eigvalsh(m).min()) for m in e.matrices())
    except ValueError:
        eig = float("nan")
    return EffectReport(complete, positive, nonneg, eig >= -tol, eig)


@dataclass(frozen=True)
class MarginalPair:
    """Unsharp spin measurement ``(1 pm sharpness * axis . sigma) / 2``."""

    sharpness: float
    axis: BlochVector

    def __post_init__(self):
        _check_sharpness(self.sharpness, "sharpness")
        require_unit(self.axis, "axis")

    def as_effect_pair(self):
        return DichotomicEffectPair(0.5, 0.5, self.sharpness / 2.0, BlochVector.of(self.axis))

    def matrices(self):
        return (
            spin_effect(self.axis, +1, self.sharpness),
            spin_effect(self.axis, -1, self.sharpness),
        )


def tradeoff_lhs(alpha, a, beta, b):
    """``|alpha a + beta b| + |alpha a - beta b|``; at most 2 iff jointly measurable."""
    _check_sharpness(alpha, "alpha")
    _check_sharpness(beta, "beta")
    av = alpha * require_unit(a, "a")
    bv = beta * require_unit(b, "b")
    return float(np.linalg.norm(av + bv) + np.linalg.norm(av - bv))


def unsharpness_product(alpha, beta):
    """``(1 - alpha^2)(1 - beta^2) / (alpha^2 beta^2)``; ``inf`` if either sharpness is 0."""
    _check_sharpness(alpha, "alpha")
    _check_sharpness(beta, "beta")
    if alpha == 0.0 or beta == 0.0:
        return math.inf
    return (1.0 - alpha * alpha) * (1.0 - beta * beta) / (alpha * alpha * beta * beta)


def max_theta(p):
    """Largest half-angle theta (radians) for which sharpnesses in (0, 1] exist at ``p``.

    This is where the inner discriminant of the closed-form solution
    vanishes: ``cos 2theta = |1 - 2p| / (2p(p - 1) + 1)``.
    """
    _check_p(p, allow_one=True)
    s = 2.0 * p * (p - 1.0) + 1.0
    ratio = min(1.0, abs(1.0 - 2.0 * p) / s)
    return 0.5 * math.acos(ratio)


def _closed_form_branches(p, theta):
    """All four sign choices of the closed form, as (alpha, beta) or None if not real."""
    s = 2.0 * (p - 1.0) * p + 1.0
    cos2t = math.cos(2.0 * theta)
    sec2 = 1.0 / (cos2t * cos2t)
    out = []
    for outer in (1.0, -1.0):
        for inner in (1.0, -1.0):
            disc = inner * s * s - (1.0 - 2.0 * p) ** 2 * sec2
            if disc < 0.0:
                # rounding right at the feasibility boundary
                if disc > -1e-13 * s * s:
                    disc = 0.0
                else:
                    out.append(None)
                    continue
            beta = outer * math.sqrt(math.sqrt(disc) + s)
            alpha = (2.0 * p - 1.0) / (beta * cos2t)
            out.append((alpha, beta))
    return out


def solve_optimal_sharpness(p, theta):
    """Optimal (alpha, beta) for selection probability ``p`` and half-angle ``theta``.

    The returned pair saturates the tradeoff and reproduces ``p`` as the C-branch
    probability. Of the two saturating solutions (related by swapping alpha and
    beta) this is the one with ``beta >= alpha``.
    """
    _check_p(p)
    if theta < 0.0:
        raise DomainError(f"theta must be non-negative, got {theta!r}")
    tmax = max_theta(p)
    if theta > tmax + 1e-12:
        raise InfeasibleError(
            f"theta = {math.degrees(theta):.6g} deg exceeds the limit "
            f"{math.degrees(tmax):.6g} deg for p = {p!r}"
        )
    if abs(p - 0.5) <= HALF_TOL:
        if abs(theta - math.pi / 4) <= 1e-12:
            return math.sqrt(0.5), math.sqrt(0.5)
        raise InfeasibleError(
            "at p = 1/2 only orthogonal axes (2theta = 90 deg) admit sharpnesses in (0, 1]"
        )
    candidates = [
        ab
        for ab in _closed_form_branches(p, theta)
        if ab is not None and 0.0 < ab[0] <= 1.0 + 1e-12 and 0.0 < ab[1] <= 1.0 + 1e-12
    ]
    if len(candidates) != 1:
        warnings.warn(
            f"closed form gave {len(candidates)} admissible branches at p={p!r}, "
            f"theta={theta!r}; using the numeric solver",
            RuntimeWarning,
            stacklevel=2,
        )
        return solve_optimal_sharpness_numeric(p, theta)
    alpha, beta = candidates[0]
    return min(alpha, 1.0), min(beta, 1.0)


def solve_optimal_sharpness_numeric(p, theta, grid=201, max_iter=60):
    """Brute-force solution of the two branch-norm equations.

    Scans an (alpha, beta) grid for the minimum of the squared residual of
    ``|alpha a + beta b| = 2p`` and ``|alpha a - beta b| = 2(1 - p)`` restricted to
    ``beta >= alpha``, then polishes with Newton steps on the vector norms.
    Independent of the closed form; used as its oracle.
    """
    a = np.array([0.0, 0.0, 1.0])
    b = np.array([math.sin(2.0 * theta), 0.0, math.cos(2.0 * theta)])
    ticks = np.linspace(1.0 / grid, 1.0, grid)
    res = kernels.norm_residual_grid(ticks, ticks, a, b, p)
    res = np.where(ticks[None, :] >= ticks[:, None], res, np.inf)
    i, j = np.unravel_index(int(np.argmin(res)), res.shape)
    x = np.array([ticks[i], ticks[j]])

    for _ in range(max_iter):
        plus = x[0] * a + x[1] * b
        minus = x[0] * a - x[1] * b
        np_, nm = np.linalg.norm(plus), np.linalg.norm(minus)
        f = np.array([np_ - 2.0 * p, nm - 2.0 * (1.0 - p)])
        jac = np.array(
            [
                [plus @ a / np_, plus @ b / np_],
                [minus @ a / nm, -(minus @ b) / nm],
            ]
        )
        try:
            step = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, f, rcond=None)[0]
        x = np.clip(x - step, 1e-300, 1.0)
        if np.max(np.abs(step)) < 1e-15:
            break
    plus = x[0] * a + x[1] * b
    minus = x[0] * a - x[1] * b
    resid = abs(np.linalg.norm(plus) - 2 * p) + abs(np.linalg.norm(minus) - 2 * (1 - p))
    if resid > 1e-10:
        raise InfeasibleError(f"numeric solver did not converge (residual {resid:.3g})")
    alpha, beta = float(x[0]), float(x[1])
    if alpha > beta:
        alpha, beta = beta, alpha
    return alpha, beta


def construct_directions(alpha, beta, a, b, allow_degenerate=False, tol=SATURATION_TOL):
    """Projective directions and C-branch probability realising (alpha a, beta b).

    Returns ``(c, d, p)`` with ``p = |alpha a + beta b| / 2``. The pair must
    saturate the tradeoff, otherwise c and d are not unit vectors. When one of
    the two vectors ``alpha a +- beta b`` vanishes its direction is undefined;
    with ``allow_degenerate`` it is set to the negative of the other direction
    (a single projective measurement, p = 1 or 0).
    """
    lhs = tradeoff_lhs(alpha, a, beta, b)
    if abs(lhs - 2.0) > tol:
        raise SynthesisError(
            f"(alpha, beta) = ({alpha!r}, {beta!r}) does not saturate the tradeoff: "
            f"norm sum is {lhs!r}, defect {lhs - 2.0:+.3e}"
        )
    av = alpha * require_unit(a, "a")
    bv = beta * require_unit(b, "b")
    plus, minus = av + bv, av - bv
    n_plus, n_minus = np.linalg.norm(plus), np.linalg.norm(minus)
    if n_plus < tol or n_minus < tol:
        if not allow_degenerate:
            which = "c" if n_plus < tol else "d"
            raise DegenerateDesignError(
                f"direction {which} is undefined: alpha a and {'-' if which == 'c' else ''}"
                "beta b coincide"
            )
        if n_minus < tol:
            c = plus / n_plus
            return BlochVector.of(c), BlochVector.of(-c), 1.0
        d = minus / n_minus
        return BlochVector.of(-d), BlochVector.of(d), 0.0
    p = n_plus / 2.0
    c = plus / (2.0 * p)
    d = minus / (2.0 * (1.0 - p))
    for name, v in (("c", c), ("d", d)):
        if abs(np.linalg.norm(v) - 1.0) > tol:
            raise SynthesisError(f"|{name}| = {np.linalg.norm(v)!r} is not unit")
    return BlochVector.of(c), BlochVector.of(d), float(p)


@dataclass(frozen=True)
class JointDesign:
    """A complete joint-measurement design.

    ``relabeled`` marks designs where the raw C-branch probability was below
    1/2: the branches were swapped so that ``p >= 1/2`` and the B outcome of each
    branch is inverted (equivalently, the design realises ``-b``).
    """

    a: BlochVector
    b: BlochVector
    alpha: float
    beta: float
    c: BlochVector
    d: BlochVector
    p: float
    relabeled: bool = False
    degenerate: bool = field(default=False)

    @property
    def b_effective(self):
        return -self.b if self.relabeled else self.b

    def validate(self, tol=SATURATION_TOL):
        """Raise InvalidDesignError unless all invariants hold."""
        try:
            a = require_unit(self.a, "a")
            b = require_unit(self.b_effective, "b")
            _check_sharpness(self.alpha, "alpha")
            _check_sharpness(self.beta, "beta")
            c = require_unit(self.c, "c")
            d = require_unit(self.d, "d")
        except (DomainError, ValueError) as exc:
            raise InvalidDesignError(str(exc)) from exc
        lhs = tradeoff_lhs(self.alpha, a, self.beta, b)
        if lhs > 2.0 + tol:
            raise InvalidDesignError(f"tradeoff violated: norm sum {lhs!r} > 2")
        plus = self.alpha * a + self.beta * b
        minus = self.alpha * a - self.beta * b
        if self.degenerate:
            if self.p != 1.0 or np.linalg.norm(minus) > tol:
                raise InvalidDesignError("degenerate designs must have p = 1 and alpha a = beta b")
            if np.linalg.norm(c - plus / 2.0) > tol or np.linalg.norm(d + c) > tol:
                raise InvalidDesignError("degenerate design directions are inconsistent")
            return self
        if not (0.0 < self.p < 1.0):
            raise InvalidDesignError(f"p must lie in (0, 1), got {self.p!r}")
        if abs(np.linalg.norm(plus) / 2.0 - self.p) > tol:
            raise InvalidDesignError("p does not match |alpha a + beta b| / 2")
        if abs(np.linalg.norm(minus) / 2.0 - (1.0 - self.p)) > tol:
            raise InvalidDesignError("1 - p does not match |alpha a - beta b| / 2")
        if np.linalg.norm(c - plus / (2.0 * self.p)) > tol:
            raise InvalidDesignError("c does not match (alpha a + beta b) / 2p")
        if np.linalg.norm(d - minus / (2.0 * (1.0 - self.p))) > tol:
            raise InvalidDesignError("d does not match (alpha a - beta b) / 2(1 - p)")
        return self


def design_from_sharpness(alpha, beta, a, b, allow_degenerate=False):
    """JointDesign for saturating sharpnesses, normalised so that ``p >= 1/2``."""
    a, b = BlochVector.of(a), BlochVector.of(b)
    relabeled = False
    c, d, p = construct_directions(alpha, beta, a, b, allow_degenerate=allow_degenerate)
    if p < 0.5:
        relabeled = True
        c, d, p = construct_directions(alpha, beta, a, -b, allow_degenerate=allow_degenerate)
    degenerate = p == 1.0
    return JointDesign(a, b, alpha, beta, c, d, p, relabeled, degenerate).validate()


def axis_pair(theta, phi=0.0, a=Z_HAT):
    """Axes (a, b) with b at polar angle 2*theta from a and azimuth phi (radians).

    For ``a = z`` this is ``b = (sin 2theta cos phi, sin 2theta sin phi, cos 2theta)``;
    other ``a`` rotate that frame rigidly.
    """
    b_local = BlochVector.from_angles(2.0 * theta, phi).as_array()
    rot = rotation_from_z(a)
    return BlochVector.of(rot @ np.array([0.0, 0.0, 1.0])), BlochVector.of(rot @ b_local)


def synthesize(p, theta, phi=0.0, a=Z_HAT, allow_degenerate=False):
    """Optimal JointDesign for the given p and axis geometry (angles in radians)."""
    alpha, beta = solve_optimal_sharpness(p, theta)
    a_vec, b_vec = axis_pair(theta, phi, a)
    return design_from_sharpness(alpha, beta, a_vec, b_vec, allow_degenerate=allow_degenerate)


C_LABELS = ((+1, +1), (-1, -1))
D_LABELS = ((+1, -1), (-1, +1))


@dataclass(frozen=True, eq=False)
class FourOutcomeJointPovm:
    """Four weighted projectors labeled by the joint outcome (A_j, B_j)."""

    effects: tuple
    labels: tuple

    def total(self):
        return sum(self.effects)

    def marginal_a(self, outcome):
        return sum(e for e, (a, _) in zip(self.effects, self.labels) if a == outcome)

    def marginal_b(self, outcome):
        return sum(e for e, (_, b) in zip(self.effects, self.labels) if b == outcome)

    def is_complete(self, tol=MATRIX_TOL):
        return bool(np.max(np.abs(self.total() - IDENTITY)) <= tol)

    def is_positive(self, tol=MATRIX_TOL):
        return all(np.linalg.eigvalsh(e).min() >= -tol for e in self.effects)

    def probabilities(self, rho):
        """Born probabilities of the four outcomes for a density matrix."""
        m = getattr(rho, "matrix", rho)
        return np.array([np.trace(m @ e).real for e in self.effects])


def assemble_joint_povm(design):
    """The four effects ``p Pi^c_pm`` and ``(1 - p) Pi^d_pm`` with their joint labels."""
    design.validate()
    p = design.p
    effects = (
        p * spin_effect(design.c, +1),
        p * spin_effect(design.c, -1),
        (1.0 - p) * spin_effect(design.d, +1),
        (1.0 - p) * spin_effect(design.d, -1),
    )
    if design.relabeled:
        labels = D_LABELS + C_LABELS
    else:
        labels = C_LABELS + D_LABELS
    return FourOutcomeJointPovm(effects, labels)
