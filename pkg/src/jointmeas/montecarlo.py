"""Seeded simulation of heralded single-photon counting.

Every stream is a ``numpy.random.Generator`` over the counter-based Philox
bit generator, keyed by ``SeedSequence(seed, spawn_key=stream)``. A stream
can therefore be reconstructed from ``(seed, stream)`` alone, without drawing
any other stream first, and any two distinct keys give independent streams.

Two samplers are available. ``"shots"`` draws one branch uniform and one
outcome uniform per heralded photon and tallies them (numba or numpy kernel).
``"binomial"`` draws the aggregated counts directly; it has the same
distribution and is used where millions of repetitions are needed.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .bloch import born_probabilities, require_state, require_unit
from .errors import DomainError

CHUNK = 1 << 20
SAMPLERS = ("shots", "binomial")


@dataclass(frozen=True)
class RngSeed:
    """Master seed plus a sub-stream path."""

    seed: int
    stream: tuple = ()

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        stream = self.stream
        if isinstance(stream, (int, np.integer)):
            stream = (int(stream),)
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "stream", tuple(int(s) for s in stream))

    def child(self, *index):
        return RngSeed(self.seed, self.stream + tuple(index))

    def generator(self):
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class CountRecord:
    """Detector counts of the four joint-measurement outcomes.

    Exact-probability mode stores real-valued pseudo-counts here.
    """

    c_plus: int
    c_minus: int
    d_plus: int
    d_minus: int

    @property
    def total(self):
        return self.c_plus + self.c_minus + self.d_plus + self.d_minus

    @property
    def n_c(self):
        return self.c_plus + self.c_minus

    @property
    def n_d(self):
        return self.d_plus + self.d_minus

    def __add__(self, other):
        return CountRecord(
            self.c_plus + other.c_plus,
            self.c_minus + other.c_minus,
            self.d_plus + other.d_plus,
            self.d_minus + other.d_minus,
        )


@dataclass(frozen=True)
class SharpCountRecord:
    """Counts of a single projective measurement."""

    n_plus: int
    n_minus: int

    @property
    def total(self):
        return self.n_plus + self.n_minus

    def __add__(self, other):
        return SharpCountRecord(self.n_plus + other.n_plus, self.n_minus + other.n_minus)


def _shots_for(shots, rng, poisson_totals):
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots!r}")
    if poisson_totals:
        return int(rng.poisson(shots))
    return int(shots)


def _check_sampler(method):
    if method not in SAMPLERS:
        raise DomainError(f"unknown sampler {method!r}; expected one of {SAMPLERS}")


def run_joint(state, design, shots, seed, method="shots", poisson_totals=False):
    """Simulate ``shots`` heralded photons through the two-branch joint measurement."""
    _check_sampler(method)
    design.validate()
    r = require_state(state, pure=True)
    q_c = born_probabilities(r, design.c)[0]
    q_d = born_probabilities(r, design.d)[0]
    rng = seed.generator()
    n = _shots_for(shots, rng, poisson_totals)
    p = design.p

    if method == "binomial":
        n_c = int(rng.binomial(n, p))
        c_plus = int(rng.binomial(n_c, q_c))
        d_plus = int(rng.binomial(n - n_c, q_d))
        return CountRecord(c_plus, n_c - c_plus, d_plus, n - n_c - d_plus)

    counts = np.zeros(4, dtype=np.int64)
    done = 0
    while done < n:
        m = min(CHUNK, n - done)
        branch_u = rng.random(m)
        outcome_u = rng.random(m)
        counts += kernels.tally_joint(branch_u, outcome_u, p, q_c, q_d)
        done += m
    return CountRecord(*(int(x) for x in counts))


def run_sharp(state, axis, shots, seed, method="shots", poisson_totals=False):
    """Simulate ``shots`` heralded photons measured projectively along ``axis``."""
    _check_sampler(method)
    r = require_state(state, pure=True)
    n_axis = require_unit(axis, "axis")
    q = born_probabilities(r, n_axis)[0]
    rng = seed.generator()
    n = _shots_for(shots, rng, poisson_totals)

    if method == "binomial":
        n_plus = int(rng.binomial(n, q))
        return SharpCountRecord(n_plus, n - n_plus)

    counts = np.zeros(2, dtype=np.int64)
    done = 0
    while done < n:
        m = min(CHUNK, n - done)
        counts += kernels.tally_sharp(rng.random(m), q)
        done += m
    return SharpCountRecord(int(counts[0]), int(counts[1]))


def split_runs(shots_per_run, runs, seed):
    """Independent per-run sub-seeds derived from ``seed``.

    Run ``i`` gets the stream ``seed.stream + (i,)``, so any run can be
    reproduced in isolation and in any order.
    """
    if runs < 1:
        raise DomainError(f"runs must be >= 1, got {runs!r}")
    if shots_per_run < 1:
        raise DomainError(f"shots_per_run must be >= 1, got {shots_per_run!r}")
    return [seed.child(i) for i in range(runs)]


def exact_joint_counts(state, design, shots):
    """Pseudo-counts equal to the expected counts of ``run_joint``."""
    design.validate()
    r = require_state(state, pure=True)
    q_c = born_probabilities(r, design.c)[0]
    q_d = born_probabilities(r, design.d)[0]
    n_c = shots * design.p
    n_d = shots * (1.0 - design.p)
    return CountRecord(n_c * q_c, n_c * (1.0 - q_c), n_d * q_d, n_d * (1.0 - q_d))


def exact_sharp_counts(state, axis, shots):
    """Pseudo-counts equal to the expected counts of ``run_sharp``."""
    q_plus, q_minus = born_probabilities(require_state(state, pure=True), axis)
    return SharpCountRecord(shots * q_plus, shots * q_minus)
