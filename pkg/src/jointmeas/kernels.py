"""Hot inner loops, each with a numba and a pure-numpy implementation.

Both implementations consume the same pre-drawn uniforms, so they return
identical results for identical inputs. ``BACKEND`` names the one that the
public dispatchers (``tally_joint``, ``tally_sharp``, ``norm_residual_grid``)
use; the suffixed variants stay importable for tests and benchmarks.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

BACKEND = "numba" if USE_NUMBA else "numpy"


def tally_joint_numpy(branch_u, outcome_u, p, q_c, q_d):
    """Count (C+, C-, D+, D-) outcomes for a block of heralded shots.

    A shot takes the C branch when ``branch_u < p``; its outcome is +1 when
    ``outcome_u`` is below the Born probability of that branch.
    """
    on_c = branch_u < p
    q = np.where(on_c, q_c, q_d)
    plus = outcome_u < q
    n_c = int(np.count_nonzero(on_c))
    c_plus = int(np.count_nonzero(on_c & plus))
    d_plus = int(np.count_nonzero(plus)) - c_plus
    n_d = branch_u.size - n_c
    return np.array([c_plus, n_c - c_plus, d_plus, n_d - d_plus], dtype=np.int64)


@njit
def _tally_joint_jit(branch_u, outcome_u, p, q_c, q_d):
    # branchless: random inputs defeat the branch predictor
    n_c = 0
    c_plus = 0
    d_plus = 0
    for i in range(branch_u.shape[0]):
        on_c = branch_u[i] < p
        q = q_c if on_c else q_d
        plus = outcome_u[i] < q
        n_c += on_c
        c_plus += on_c & plus
        d_plus += (not on_c) & plus
    out = np.empty(4, dtype=np.int64)
    out[0] = c_plus
    out[1] = n_c - c_plus
    out[2] = d_plus
    out[3] = branch_u.shape[0] - n_c - d_plus
    return out


def tally_joint_numba(branch_u, outcome_u, p, q_c, q_d):
    return _tally_joint_jit(branch_u, outcome_u, float(p), float(q_c), float(q_d))


def tally_sharp_numpy(u, q):
    """Count (+1, -1) outcomes of a projective measurement with P(+1) = q."""
    n_plus = int(np.count_nonzero(u < q))
    return np.array([n_plus, u.size - n_plus], dtype=np.int64)


@njit
def _tally_sharp_jit(u, q):
    n_plus = 0
    for i in range(u.shape[0]):
        n_plus += u[i] < q
    out = np.empty(2, dtype=np.int64)
    out[0] = n_plus
    out[1] = u.shape[0] - n_plus
    return out


def tally_sharp_numba(u, q):
    return _tally_sharp_jit(u, float(q))


def norm_residual_grid_numpy(alphas, betas, a, b, p):
    """Squared residual of the two branch-norm equations on an (alpha, beta) grid.

    Entry ``[i, j]`` is ``(|alphas[i] a + betas[j] b| - 2p)**2 +
    (|alphas[i] a - betas[j] b| - 2(1-p))**2``, computed from the 3-vectors.
    """
    av = alphas[:, None, None] * a
    bv = betas[None, :, None] * b
    plus = np.sqrt(np.sum((av + bv) ** 2, axis=-1))
    minus = np.sqrt(np.sum((av - bv) ** 2, axis=-1))
    return (plus - 2.0 * p) ** 2 + (minus - 2.0 * (1.0 - p)) ** 2


@njit
def _norm_residual_grid_jit(alphas, betas, a, b, p):
    out = np.empty((alphas.shape[0], betas.shape[0]))
    for i in range(alphas.shape[0]):
        for j in range(betas.shape[0]):
            sp = 0.0
            sm = 0.0
            for k in range(3):
                u = alphas[i] * a[k]
                v = betas[j] * b[k]
                sp += (u + v) * (u + v)
                sm += (u - v) * (u - v)
            rp = np.sqrt(sp) - 2.0 * p
            rm = np.sqrt(sm) - 2.0 * (1.0 - p)
            out[i, j] = rp * rp + rm * rm
    return out


def norm_residual_grid_numba(alphas, betas, a, b, p):
    return _norm_residual_grid_jit(
        np.ascontiguousarray(alphas, dtype=np.float64),
        np.ascontiguousarray(betas, dtype=np.float64),
        np.ascontiguousarray(a, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64),
        float(p),
    )


if USE_NUMBA:
    tally_joint = tally_joint_numba
    tally_sharp = tally_sharp_numba
    norm_residual_grid = norm_residual_grid_numba
else:
    tally_joint = tally_joint_numpy
    tally_sharp = tally_sharp_numpy
    norm_residual_grid = norm_residual_grid_numpy
