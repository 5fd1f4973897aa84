"""Experiment configs, the theta-sweep runner, and CSV/JSON output.

Angles are degrees in configs and output files, radians everywhere else.
"""

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import montecarlo as mc
from .bloch import Z_HAT, BlochVector, require_state, require_unit
from .errors import DegenerateDesignError, DomainError, InfeasibleError, JointMeasError
from .estimator import EstimateResult, estimate_joint, joint_variance
from .povm import max_theta, solve_optimal_sharpness, synthesize

SCHEMA_VERSION = "jointmeas.results/1"
REF_P = 0.670
REF_THETAS = tuple(range(1, 26, 3))
REF_AZIMUTHS = (-160.7, -51.6, 83.7)
REF_SHOTS = 15000
REF_RUNS = 100
DEFAULT_SEED = 20190527

QUANTITIES = (
    "alpha_theory",
    "beta_theory",
    "alpha_exp",
    "beta_exp",
    "delta_product",
    "delta_product_runs",
    "sin_sq_2theta",
    "var_product_sharp",
    "var_product_joint",
    "var_product_joint_theory",
    "A_j_bar",
    "B_j_bar",
    "sharp_a",
    "sharp_b",
    "sharp_c",
    "sharp_d",
    "p_est",
)

OK = "ok"
NAN = EstimateResult(math.nan, math.nan)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    a_axis: BlochVector
    azimuth_phi: float
    theta_list: tuple
    p: float
    shots_per_run: int
    runs: int
    master_seed: mc.RngSeed
    input_state: BlochVector
    sharp_shots_per_run: int = None
    sampler: str = "shots"
    poisson_totals: bool = False

    def __post_init__(self):
        object.__setattr__(self, "a_axis", BlochVector.of(self.a_axis))
        object.__setattr__(self, "input_state", BlochVector.of(self.input_state))
        object.__setattr__(self, "theta_list", tuple(float(t) for t in self.theta_list))
        if not isinstance(self.master_seed, mc.RngSeed):
            object.__setattr__(self, "master_seed", mc.RngSeed(int(self.master_seed)))
        require_unit(self.a_axis, "a_axis")
        require_state(self.input_state, "input_state", pure=True)
        if not (0.5 <= self.p < 1.0):
            raise DomainError(f"p must lie in [1/2, 1), got {self.p!r}")
        if self.shots_per_run < 1 or self.runs < 1:
            raise DomainError("shots_per_run and runs must be >= 1")
        if self.sampler not in mc.SAMPLERS:
            raise DomainError(f"unknown sampler {self.sampler!r}")
        if not self.theta_list:
            raise DomainError("theta_list is empty")

    @property
    def sharp_shots(self):
        return self.sharp_shots_per_run or self.shots_per_run

    def infeasible_thetas(self):
        """Configured angles (degrees) beyond the feasibility limit for ``p``."""
        limit = math.degrees(max_theta(self.p))
        return [t for t in self.theta_list if t > limit + 1e-9]

    def to_dict(self):
        return {
            "name": self.name,
            "a_axis": list(self.a_axis),
            "azimuth_phi": self.azimuth_phi,
            "theta_list": list(self.theta_list),
            "p": self.p,
            "shots_per_run": self.shots_per_run,
            "runs": self.runs,
            "master_seed": self.master_seed.seed,
            "stream": list(self.master_seed.stream),
            "input_state": list(self.input_state),
            "sharp_shots_per_run": self.sharp_shots_per_run,
            "sampler": self.sampler,
            "poisson_totals": self.poisson_totals,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        seed = mc.RngSeed(int(d.pop("master_seed", DEFAULT_SEED)), tuple(d.pop("stream", ())))
        d.setdefault("a_axis", [0.0, 0.0, 1.0])
        d.setdefault("input_state", d["a_axis"])
        d.setdefault("azimuth_phi", 0.0)
        d.setdefault("p", REF_P)
        d.setdefault("shots_per_run", REF_SHOTS)
        d.setdefault("runs", REF_RUNS)
        d.setdefault("name", "experiment")
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        return cls(master_seed=seed, **d)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(yaml.safe_load(fh))


def dump_config(config, path):
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(config.to_dict(), fh, sort_keys=False)


def build_reference_experiments(seed=DEFAULT_SEED, p=REF_P, shots_per_run=REF_SHOTS, runs=REF_RUNS):
    """The three azimuthal-plane sweeps, a = z, input state |a>."""
    return [
        ExperimentConfig(
            name=f"experiment{i + 1}",
            a_axis=Z_HAT,
            azimuth_phi=phi,
            theta_list=REF_THETAS,
            p=p,
            shots_per_run=shots_per_run,
            runs=runs,
            master_seed=mc.RngSeed(seed, (i,)),
            input_state=Z_HAT,
        )
        for i, phi in enumerate(REF_AZIMUTHS)
    ]


@dataclass
class ResultRow:
    """One theta point. Exact quantities carry ``std_err = 0``."""

    theta: float
    status: str = OK
    alpha_theory: EstimateResult = NAN
    beta_theory: EstimateResult = NAN
    alpha_exp: EstimateResult = NAN
    beta_exp: EstimateResult = NAN
    delta_product: EstimateResult = NAN
    delta_product_runs: EstimateResult = NAN
    sin_sq_2theta: EstimateResult = NAN
    var_product_sharp: EstimateResult = NAN
    var_product_joint: EstimateResult = NAN
    var_product_joint_theory: EstimateResult = NAN
    A_j_bar: EstimateResult = NAN
    B_j_bar: EstimateResult = NAN
    sharp_a: EstimateResult = NAN
    sharp_b: EstimateResult = NAN
    sharp_c: EstimateResult = NAN
    sharp_d: EstimateResult = NAN
    p_est: EstimateResult = NAN
    design: dict = field(default_factory=dict)

    @property
    def flagged(self):
        return self.status != OK


def _exact(x):
    return EstimateResult(float(x), 0.0)


def _run_point(config, index, exact):
    theta_deg = config.theta_list[index]
    theta = math.radians(theta_deg)
    row = ResultRow(theta=theta_deg, sin_sq_2theta=_exact(math.sin(2.0 * theta) ** 2))
    try:
        alpha, beta = solve_optimal_sharpness(config.p, theta)
        row.alpha_theory, row.beta_theory = _exact(alpha), _exact(beta)
        design = synthesize(config.p, theta, math.radians(config.azimuth_phi), config.a_axis)
    except DegenerateDesignError as exc:
        row.status = f"degenerate: {exc}"
        return row
    except (InfeasibleError, JointMeasError) as exc:
        row.status = f"infeasible: {exc}"
        return row

    state = config.input_state
    ra = state.dot(design.a)
    rb = state.dot(design.b)
    row.var_product_joint_theory = _exact(joint_variance(alpha, ra) * joint_variance(beta, rb))
    row.design = {
        "a": list(design.a),
        "b": list(design.b),
        "c": list(design.c),
        "d": list(design.d),
        "p": design.p,
        "relabeled": design.relabeled,
    }

    total = config.shots_per_run * config.runs
    sharp_total = config.sharp_shots * config.runs
    if exact:
        joint = mc.exact_joint_counts(state, design, total)
        sa = mc.exact_sharp_counts(state, design.a, sharp_total)
        sb = mc.exact_sharp_counts(state, design.b, sharp_total)
        per_run = None
    else:
        base = config.master_seed.child(index)
        seeds = {
            kind: mc.split_runs(config.shots_per_run, config.runs, base.child(kind))
            for kind in range(3)
        }
        kw = dict(method=config.sampler, poisson_totals=config.poisson_totals)
        per_run = []
        for r in range(config.runs):
            per_run.append(
                (
                    mc.run_joint(state, design, config.shots_per_run, seeds[0][r], **kw),
                    mc.run_sharp(state, design.a, config.sharp_shots, seeds[1][r], **kw),
                    mc.run_sharp(state, design.b, config.sharp_shots, seeds[2][r], **kw),
                )
            )
        joint = sum((x[0] for x in per_run[1:]), per_run[0][0])
        sa = sum((x[1] for x in per_run[1:]), per_run[0][1])
        sb = sum((x[2] for x in per_run[1:]), per_run[0][2])

    try:
        est = estimate_joint(joint, sa, sb, design.p, relabeled=design.relabeled)
    except JointMeasError as exc:
        row.status = f"estimate-error: {exc}"
        return row
    for name, value in est.values().items():
        if name in QUANTITIES:
            setattr(row, name, getattr(est, name))

    if per_run is None:
        row.delta_product_runs = _exact(est.delta_product.value)
    else:
        vals = []
        for j, a_c, b_c in per_run:
            try:
                vals.append(estimate_joint(j, a_c, b_c, design.p, design.relabeled).delta_product.value)
            except JointMeasError:
                vals.append(math.nan)
        vals = np.asarray(vals)
        vals = vals[np.isfinite(vals)]
        if vals.size >= 2:
            row.delta_product_runs = EstimateResult(
                float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(vals.size))
            )
        elif vals.size == 1:
            row.delta_product_runs = EstimateResult(float(vals[0]), math.nan)
    return row


def run_experiment(config, exact=False, workers=1):
    """Synthesize, simulate and estimate every theta point of ``config``.

    Points beyond the feasibility limit or with a degenerate design come back
    with a non-"ok" status instead of being dropped. Theta points may run on
    several threads; each uses its own sub-streams, so results do not depend on
    ``workers``.
    """
    indices = range(len(config.theta_list))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda i: _run_point(config, i, exact), indices))
    return [_run_point(config, i, exact) for i in indices]


def csv_header():
    cols = ["theta_deg"]
    for q in QUANTITIES:
        cols += [q, f"{q}_err"]
    return cols


def _fmt(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = format(x, ".12g")
    return "0" if s == "-0" else s


def _json_num(x):
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(format(x, ".12g"))


def render_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_header())
    for row in rows:
        line = [_fmt(row.theta)]
        for q in QUANTITIES:
            est = getattr(row, q)
            line += [_fmt(est.value), _fmt(est.std_err)]
        w.writerow(line)
    return buf.getvalue()


def render_json(rows, config=None):
    doc = {"schema": SCHEMA_VERSION}
    if config is not None:
        doc["config"] = config.to_dict()
    doc["rows"] = [
        {
            "theta_deg": _json_num(row.theta),
            "status": row.status,
            **{
                q: {"value": _json_num(getattr(row, q).value), "std_err": _json_num(getattr(row, q).std_err)}
                for q in QUANTITIES
            },
            "design": {
                k: ([_json_num(x) for x in v] if isinstance(v, list) else (_json_num(v) if isinstance(v, float) else v))
                for k, v in row.design.items()
            },
        }
        for row in rows
    ]
    return json.dumps(doc, indent=2) + "\n"


def emit(rows, fmt, destination, config=None):
    """Write rows as CSV or JSON. Output is byte-stable for identical rows."""
    if not rows:
        raise DomainError("no rows to emit")
    if fmt == "csv":
        text = render_csv(rows)
    elif fmt == "json":
        text = render_json(rows, config)
    else:
        raise DomainError(f"unknown format {fmt!r}")
    path = Path(destination)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def with_overrides(config, **kw):
    kw = {k: v for k, v in kw.items() if v is not None}
    if "master_seed" in kw and not isinstance(kw["master_seed"], mc.RngSeed):
        kw["master_seed"] = mc.RngSeed(int(kw["master_seed"]), config.master_seed.stream)
    return replace(config, **kw)
