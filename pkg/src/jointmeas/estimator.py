"""Expectation values, sharpnesses and variances from detector counts.

Standard errors use first-order (delta-method) propagation from binomial
counting statistics. ``estimate_joint`` propagates through the full chain
with the covariances that arise because both joint expectations are built
from the same C and D counts; the standalone helpers assume independent
inputs unless a covariance is passed. ``bootstrap_joint`` resamples counts
as an independent check of the propagated errors.
"""

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import DomainError, IllConditionedRatioError, UndefinedEstimateError

RATIO_GUARD = 0.05


@dataclass(frozen=True)
class EstimateResult:
    value: float
    std_err: float = 0.0

    def __iter__(self):
        return iter((self.value, self.std_err))


def _sigma(jac, sigmas, cov=None):
    """sqrt(J S J^T) for diagonal S = diag(sigmas^2) plus optional off-diagonal terms."""
    jac = np.asarray(jac, dtype=float)
    s = np.diag(np.asarray(sigmas, dtype=float) ** 2)
    if cov is not None:
        s = s + cov
    var = float(jac @ s @ jac)
    return math.sqrt(max(var, 0.0))


def expval_from_counts(n_plus, n_minus):
    """``(n+ - n-) / (n+ + n-)`` with binomial standard error ``2 sqrt(q(1-q)/N)``."""
    if n_plus < 0 or n_minus < 0:
        raise DomainError("counts must be non-negative")
    n = n_plus + n_minus
    if n <= 0:
        raise UndefinedEstimateError("expectation value of zero counts is undefined")
    q = n_plus / n
    return EstimateResult((n_plus - n_minus) / n, 2.0 * math.sqrt(max(q * (1.0 - q), 0.0) / n))


def joint_expectations(c_est, d_est, p, relabeled=False):
    """Joint-measurement expectations from the two branch expectations.

    ``A = p<C> + (1-p)<D>`` and ``B = p<C> - (1-p)<D>`` (with B negated for
    relabeled designs). Errors add in quadrature; p is treated as exact.
    """
    if not (0.0 < p <= 1.0):
        raise DomainError(f"p must lie in (0, 1], got {p!r}")
    for e in (c_est, d_est):
        if abs(e.value) > 1.0 + 1e-12:
            raise DomainError(f"expectation value {e.value!r} outside [-1, 1]")
    sign = -1.0 if relabeled else 1.0
    wc, wd = p * c_est.value, (1.0 - p) * d_est.value
    err = math.hypot(p * c_est.std_err, (1.0 - p) * d_est.std_err)
    return EstimateResult(wc + wd, err), EstimateResult(sign * (wc - wd), err)


def _ratio(num, den, guard):
    if abs(den.value) < guard:
        raise IllConditionedRatioError(
            f"sharp expectation {den.value!r} is below the guard {guard}; ratio is noise-dominated"
        )
    value = num.value / den.value
    err = _sigma([1.0 / den.value, -num.value / den.value**2], [num.std_err, den.std_err])
    return EstimateResult(value, err)


def sharpness_estimates(a_joint, b_joint, sharp_a, sharp_b, guard=RATIO_GUARD):
    """Experimental sharpnesses ``A_j / <a.sigma>`` and ``B_j / <b.sigma>``."""
    return _ratio(a_joint, sharp_a, guard), _ratio(b_joint, sharp_b, guard)


def joint_variance(alpha, expectation, scaled=True):
    """Variance of the ±1 joint outcome for observable A.

    With ``scaled`` (default) returns ``Var / alpha^2 = (1 - alpha^2)/alpha^2 + 1 - <A>^2``;
    otherwise the raw ``1 - alpha^2 <A>^2``.
    """
    if not (0.0 <= alpha <= 1.0):
        raise DomainError(f"alpha must lie in [0, 1], got {alpha!r}")
    if abs(expectation) > 1.0 + 1e-12:
        raise DomainError(f"expectation value {expectation!r} outside [-1, 1]")
    if not scaled:
        return 1.0 - alpha * alpha * expectation * expectation
    if alpha == 0.0:
        return math.inf
    return (1.0 - alpha * alpha) / (alpha * alpha) + 1.0 - expectation * expectation


def _g(x):
    return 1.0 / (x * x) - 1.0


def _dg(x):
    return -2.0 / (x * x * x)


def delta_product(alpha_exp, beta_exp, cov=0.0):
    """Unsharpness product ``(1 - a^2)(1 - b^2) / (a^2 b^2)`` with propagated error.

    ``cov`` is the covariance of the two sharpness estimates.
    """
    a, b = alpha_exp.value, beta_exp.value
    if a <= 0.0 or b <= 0.0:
        return EstimateResult(math.inf, math.inf)
    value = _g(a) * _g(b)
    jac = [_dg(a) * _g(b), _g(a) * _dg(b)]
    off = np.array([[0.0, cov], [cov, 0.0]])
    return EstimateResult(value, _sigma(jac, [alpha_exp.std_err, beta_exp.std_err], off))


@dataclass(frozen=True)
class JointEstimate:
    """Every quantity derived from one set of joint and sharp counts."""

    sharp_c: EstimateResult
    sharp_d: EstimateResult
    sharp_a: EstimateResult
    sharp_b: EstimateResult
    A_j_bar: EstimateResult
    B_j_bar: EstimateResult
    alpha_exp: EstimateResult
    beta_exp: EstimateResult
    delta_product: EstimateResult
    var_A_joint: EstimateResult
    var_B_joint: EstimateResult
    var_product_joint: EstimateResult
    var_product_sharp: EstimateResult
    p_est: EstimateResult

    def values(self):
        return {f.name: getattr(self, f.name).value for f in fields(self)}


def estimate_joint(counts, sharp_a_counts, sharp_b_counts, p, relabeled=False, guard=RATIO_GUARD):
    """Propagate one CountRecord and two SharpCountRecords through the whole chain.

    The four independent inputs are <C>, <D>, <a.sigma>, <b.sigma>; every
    derived error comes from the full Jacobian with respect to them.
    """
    C = expval_from_counts(counts.c_plus, counts.c_minus)
    D = expval_from_counts(counts.d_plus, counts.d_minus)
    Sa = expval_from_counts(sharp_a_counts.n_plus, sharp_a_counts.n_minus)
    Sb = expval_from_counts(sharp_b_counts.n_plus, sharp_b_counts.n_minus)
    sig = [C.std_err, D.std_err, Sa.std_err, Sb.std_err]
    sign = -1.0 if relabeled else 1.0
    q = 1.0 - p

    A_j, B_j = joint_expectations(C, D, p, relabeled=relabeled)
    for den in (Sa, Sb):
        if abs(den.value) < guard:
            raise IllConditionedRatioError(
                f"sharp expectation {den.value!r} is below the guard {guard}"
            )
    A, B, sa, sb = A_j.value, B_j.value, Sa.value, Sb.value

    # d/d(C, D, Sa, Sb)
    dA = np.array([p, q, 0.0, 0.0])
    dB = np.array([sign * p, -sign * q, 0.0, 0.0])
    alpha = A / sa
    beta = B / sb
    d_alpha = dA / sa + np.array([0.0, 0.0, -A / sa**2, 0.0])
    d_beta = dB / sb + np.array([0.0, 0.0, 0.0, -B / sb**2])

    if alpha > 0.0 and beta > 0.0:
        dp_val = _g(alpha) * _g(beta)
        d_dp = _dg(alpha) * _g(beta) * d_alpha + _g(alpha) * _dg(beta) * d_beta
        dp = EstimateResult(dp_val, _sigma(d_dp, sig))
    else:
        dp = EstimateResult(math.inf, math.inf)

    # Var(A_j)/alpha^2 = (1 - A^2) sa^2 / A^2
    def scaled_var(X, s, dX, s_index):
        if X == 0.0:
            return math.inf, None
        val = (1.0 - X * X) * s * s / (X * X)
        grad = -2.0 * s * s / X**3 * dX
        grad = grad.copy()
        grad[s_index] += 2.0 * s * (1.0 - X * X) / (X * X)
        return val, grad

    va, ga = scaled_var(A, sa, dA, 2)
    vb, gb = scaled_var(B, sb, dB, 3)
    if ga is None or gb is None:
        var_a = EstimateResult(va, math.inf)
        var_b = EstimateResult(vb, math.inf)
        var_joint = EstimateResult(va * vb, math.inf)
    else:
        var_a = EstimateResult(va, _sigma(ga, sig))
        var_b = EstimateResult(vb, _sigma(gb, sig))
        var_joint = EstimateResult(va * vb, _sigma(vb * ga + va * gb, sig))

    ia, ib = 1.0 - sa * sa, 1.0 - sb * sb
    var_sharp = EstimateResult(
        ia * ib, _sigma([0.0, 0.0, -2.0 * sa * ib, -2.0 * sb * ia], sig)
    )

    n = counts.total
    p_hat = counts.n_c / n
    p_est = EstimateResult(p_hat, math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n))

    return JointEstimate(
        sharp_c=C,
        sharp_d=D,
        sharp_a=Sa,
        sharp_b=Sb,
        A_j_bar=A_j,
        B_j_bar=B_j,
        alpha_exp=EstimateResult(alpha, _sigma(d_alpha, sig)),
        beta_exp=EstimateResult(beta, _sigma(d_beta, sig)),
        delta_product=dp,
        var_A_joint=var_a,
        var_B_joint=var_b,
        var_product_joint=var_joint,
        var_product_sharp=var_sharp,
        p_est=p_est,
    )


def bootstrap_joint(counts, sharp_a_counts, sharp_b_counts, p, n_boot, rng, relabeled=False):
    """Parametric bootstrap: standard deviation of each JointEstimate value.

    Each replicate redraws every count from a binomial at its observed
    frequency, keeping the branch totals fixed.
    """
    from .montecarlo import CountRecord, SharpCountRecord

    def redraw(n_plus, n_minus, size):
        n = int(round(n_plus + n_minus))
        return rng.binomial(n, n_plus / n, size=size), n

    cp, nc = redraw(counts.c_plus, counts.c_minus, n_boot)
    dp_, nd = redraw(counts.d_plus, counts.d_minus, n_boot)
    ap, na = redraw(sharp_a_counts.n_plus, sharp_a_counts.n_minus, n_boot)
    bp, nb = redraw(sharp_b_counts.n_plus, sharp_b_counts.n_minus, n_boot)

    samples = []
    for i in range(n_boot):
        est = estimate_joint(
            CountRecord(int(cp[i]), nc - int(cp[i]), int(dp_[i]), nd - int(dp_[i])),
            SharpCountRecord(int(ap[i]), na - int(ap[i])),
            SharpCountRecord(int(bp[i]), nb - int(bp[i])),
            p,
            relabeled=relabeled,
        )
        samples.append(est.values())
    keys = samples[0].keys()
    return {k: float(np.std([s[k] for s in samples], ddof=1)) for k in keys}
