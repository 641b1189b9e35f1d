"""Experiment orchestration: trials, error metrics, privacy audit, engine equivalence."""

from __future__ import annotations

import csv
import io
import json
import math
import platform
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from scipy.stats import norm

from dpkcore import __version__
from dpkcore.apps import DEFAULT_C_PRIME, dp_densest_subgraph, dp_low_outdegree_ordering
from dpkcore.graph import Graph, VertexSubset, edge_neighbors_of, parse_generator_spec, read_edge_list
from dpkcore.ledp import LedpConfig, check_level_invariants, ledp_core_numbers
from dpkcore.mechanisms import NoiseOracle
from dpkcore.oracle import (
    BRUTE_FORCE_MAX_N,
    brute_force_densest,
    density,
    exact_core_numbers,
    orient_and_max_outdegree,
)
from dpkcore.private_kcore import PeelConfig, Schedule, default_schedule, peel_round_fast, peel_round_naive, run_peel

ALGORITHMS = ("oracle", "dp-kcore-additive", "dp-kcore-geometric", "ledp-kcore", "densest", "ordering")
AUDIT_FLOOR = 10_000
EQUIVALENCE_MAX_N = 64


class SpecError(ValueError):
    """Invalid experiment parameters; ``fields`` names the offending ones."""

    def __init__(self, problems: dict[str, str]):
        self.fields = problems
        super().__init__("invalid experiment spec: " + "; ".join(f"{k}: {v}" for k, v in problems.items()))


@dataclass(frozen=True)
class ExperimentSpec:
    algorithm: str
    graph_path: str | None = None
    gen: str | None = None
    epsilon: float = 1.0
    eta: float = 0.5
    step_const: float = 60.0
    c_prime: float = DEFAULT_C_PRIME
    trials: int = 1
    seed: int = 0
    engine: str = "fast"
    zero_noise: bool = False
    # Explicit schedule, overriding step_const when both are given.
    start: float | None = None
    step: float | None = None
    relabel: bool = False
    workers: int = 1

    def validate(self) -> None:
        problems = {}
        if self.algorithm not in ALGORITHMS:
            problems["algorithm"] = f"must be one of {ALGORITHMS}"
        if (self.graph_path is None) == (self.gen is None):
            problems["graph"] = "give exactly one of graph_path or gen"
        if not self.epsilon > 0:
            problems["epsilon"] = "must be positive"
        if not self.eta > 0:
            problems["eta"] = "must be positive"
        if not self.step_const > 0:
            problems["step_const"] = "must be positive"
        if not self.c_prime > 0:
            problems["c_prime"] = "must be positive"
        if self.trials < 1:
            problems["trials"] = "must be >= 1"
        if self.engine not in ("naive", "fast"):
            problems["engine"] = "must be 'naive' or 'fast'"
        if (self.start is None) != (self.step is None):
            problems["schedule"] = "start and step must be given together"
        elif self.start is not None and not (self.start > 0 and self.step > 0):
            problems["schedule"] = "start and step must be positive"
        if self.workers < 1:
            problems["workers"] = "must be >= 1"
        if problems:
            raise SpecError(problems)

    def load_graph(self) -> tuple[Graph, dict[int, int]]:
        if self.graph_path is not None:
            return read_edge_list(self.graph_path, relabel=self.relabel)
        g = parse_generator_spec(self.gen, seed=self.seed)
        return g, {i: i for i in range(g.n)}

    def schedule(self, n: int) -> Schedule:
        if self.start is not None:
            if self.algorithm == "dp-kcore-geometric":
                return Schedule.geometric(self.start, 1.0 + self.eta)
            return Schedule.additive(self.start, self.step)
        kind = "geometric" if self.algorithm == "dp-kcore-geometric" else "additive"
        return default_schedule(max(n, 2), self.epsilon, kind, eta=self.eta, const=self.step_const)


@dataclass
class GroundTruth:
    core: list[int]
    degeneracy: int
    densest: Fraction | None  # exact optimum when n is small enough to enumerate

    def to_dict(self) -> dict[str, Any]:
        return {
            "core_numbers": self.core,
            "degeneracy": self.degeneracy,
            "densest_density": None if self.densest is None else str(self.densest),
        }


def ground_truth(g: Graph, want_densest: bool = False) -> GroundTruth:
    core = exact_core_numbers(g)
    dens = None
    if want_densest and 0 < g.n <= BRUTE_FORCE_MAX_N:
        dens = brute_force_densest(g).density
    return GroundTruth(core, max(core, default=0), dens)


def additive_slack(const: float, n: int, epsilon: float) -> float:
    return const * math.log(max(n, 2)) / epsilon


# ---------------------------------------------------------------------------
# Metrics. Everything here is a pure function of stored outputs and truth, so
# a report can be re-checked after the fact.


def label_metrics(labels: Sequence[float], truth: Sequence[int], phi: float, zeta: float) -> dict[str, Any]:
    errs = [lab - k for lab, k in zip(labels, truth)]
    ok = all(k - zeta <= lab <= phi * k + zeta for lab, k in zip(labels, truth))
    return {
        "max_additive_error": max((abs(e) for e in errs), default=0.0),
        "max_overestimate": max(errs, default=0.0),
        "max_underestimate": max((-e for e in errs), default=0.0),
        "multiplicative_factor": phi,
        "additive_slack": zeta,
        "within_bound": ok,
    }


def compute_metrics(spec: ExperimentSpec, g: Graph, truth: GroundTruth, output: dict[str, Any]) -> dict[str, Any]:
    n, eps = g.n, spec.epsilon
    alg = spec.algorithm
    if alg == "oracle":
        return label_metrics(output["labels"], truth.core, 1.0, 0.0)
    if alg == "dp-kcore-additive":
        return label_metrics(output["labels"], truth.core, 1.0, additive_slack(2 * spec.step_const, n, eps))
    if alg == "dp-kcore-geometric":
        return label_metrics(output["labels"], truth.core, 1.0 + spec.eta, additive_slack(2 * spec.step_const, n, eps))
    if alg == "ledp-kcore":
        m = label_metrics(output["labels"], truth.core, 2.0 + spec.eta, additive_slack(300.0, n, eps))
        m["transcript_rounds"] = output["transcript_rounds"]
        inv = check_level_invariants(g, output["final_levels"], LedpConfig(eps, spec.eta))
        m["invariants"] = asdict(inv)
        return m
    if alg == "densest":
        sub = VertexSubset.of(g, output["subset"])
        dens = density(g, sub) if len(sub) else Fraction(0)
        # Compare against the exact optimum when known, else the k_max / 2 lower bound on it.
        ref = truth.densest if truth.densest is not None else Fraction(truth.degeneracy, 2)
        target = float(ref) / 2 - additive_slack(spec.c_prime, n, eps)
        return {
            "density": str(dens),
            "reference_density": str(ref),
            "reference_kind": "exact" if truth.densest is not None else "kmax/2",
            "density_gap": float(ref) / 2 - float(dens),
            "within_bound": float(dens) >= target,
        }
    if alg == "ordering":
        realized = orient_and_max_outdegree(g, output["order"])
        zeta = additive_slack(2 * spec.step_const, n, eps)
        return {
            "realized_max_outdegree": realized,
            "degeneracy": truth.degeneracy,
            "outdegree_gap": realized - truth.degeneracy,
            "additive_slack": zeta,
            "within_bound": realized <= truth.degeneracy + zeta,
        }
    raise SpecError({"algorithm": f"unknown algorithm {alg!r}"})


def _run_algorithm(spec: ExperimentSpec, g: Graph, truth: GroundTruth, oracle: NoiseOracle) -> dict[str, Any]:
    alg = spec.algorithm
    if alg == "oracle":
        return {"labels": list(truth.core)}
    if alg in ("dp-kcore-additive", "dp-kcore-geometric"):
        run = run_peel(g, spec.epsilon, spec.schedule(g.n), oracle, spec.engine)
        return {"labels": run.labels}
    if alg == "ledp-kcore":
        res = ledp_core_numbers(g, LedpConfig(spec.epsilon, spec.eta), oracle)
        return {"labels": res.estimates, "final_levels": res.final_levels, "transcript_rounds": len(res.transcript)}
    if alg == "densest":
        sub = dp_densest_subgraph(g, spec.epsilon, spec.c_prime, oracle, spec.schedule(g.n), spec.engine)
        return {"subset": sub.sorted()}
    if alg == "ordering":
        res = dp_low_outdegree_ordering(g, spec.epsilon, spec.schedule(g.n), oracle, spec.engine)
        return {"order": res.order}
    raise SpecError({"algorithm": f"unknown algorithm {alg!r}"})


@dataclass
class TrialReport:
    trial: int
    seed: int
    output: dict[str, Any]
    metrics: dict[str, Any]
    wall_time: float = 0.0


def _trial(args: tuple[ExperimentSpec, Graph, GroundTruth, int]) -> TrialReport:
    spec, g, truth, i = args
    seed = spec.seed + i
    oracle = NoiseOracle(seed, zero_noise=spec.zero_noise)
    t0 = time.perf_counter()
    output = _run_algorithm(spec, g, truth, oracle)
    elapsed = time.perf_counter() - t0
    return TrialReport(i, seed, output, compute_metrics(spec, g, truth, output), elapsed)


@dataclass
class RunReport:
    spec: ExperimentSpec
    graph: dict[str, Any]
    truth: GroundTruth
    trials: list[TrialReport] = field(default_factory=list)

    def aggregate(self) -> dict[str, Any]:
        ok = [t.metrics.get("within_bound", True) for t in self.trials]
        agg: dict[str, Any] = {"trials": len(self.trials), "within_bound": sum(ok), "pass_fraction": sum(ok) / len(ok)}
        errs = [t.metrics["max_additive_error"] for t in self.trials if "max_additive_error" in t.metrics]
        if errs:
            agg["max_additive_error"] = {"max": max(errs), "mean": sum(errs) / len(errs)}
        return agg

    def to_dict(self, timings: bool = False) -> dict[str, Any]:
        trials = []
        for t in self.trials:
            d = {"trial": t.trial, "seed": t.seed, "output": t.output, "metrics": t.metrics}
            if timings:
                d["wall_time"] = t.wall_time
            trials.append(d)
        return {
            "spec": asdict(self.spec),
            "environment": {"package": "dpkcore", "version": __version__, "python": platform.python_version()},
            "graph": self.graph,
            "ground_truth": self.truth.to_dict(),
            "trials": trials,
            "aggregate": self.aggregate(),
        }


def run(spec: ExperimentSpec) -> RunReport:
    """Run ``spec.trials`` seeded trials (seeds ``seed, seed+1, ...``) against exact ground truth."""
    spec.validate()
    g, mapping = spec.load_graph()
    truth = ground_truth(g, want_densest=spec.algorithm == "densest")
    graph_info: dict[str, Any] = {"n": g.n, "m": g.m, "source": spec.graph_path or spec.gen}
    if spec.relabel:
        graph_info["id_map"] = {str(k): v for k, v in sorted(mapping.items())}
    report = RunReport(spec, graph_info, truth)
    jobs = [(spec, g, truth, i) for i in range(spec.trials)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            report.trials = list(pool.map(_trial, jobs))
    else:
        report.trials = [_trial(j) for j in jobs]
    return report


def to_json(report: RunReport, timings: bool = False) -> str:
    return json.dumps(report.to_dict(timings), sort_keys=True, indent=2) + "\n"


def to_csv(report: RunReport, timings: bool = False) -> str:
    rows = []
    for t in report.trials:
        row: dict[str, Any] = {"trial": t.trial, "seed": t.seed}
        for k, v in sorted(t.metrics.items()):
            if isinstance(v, dict):
                row.update({f"{k}.{kk}": vv for kk, vv in sorted(v.items())})
            else:
                row[k] = v
        if timings:
            row["wall_time"] = t.wall_time
        rows.append(row)
    buf = io.StringIO()
    fieldnames = list(dict.fromkeys(k for r in rows for k in r))
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def recheck_metrics(report_dict: dict[str, Any], g: Graph) -> bool:
    """Recompute every trial's metrics from its stored output and compare."""
    spec = ExperimentSpec(**report_dict["spec"])
    gt = report_dict["ground_truth"]
    dens = gt["densest_density"]
    truth = GroundTruth(gt["core_numbers"], gt["degeneracy"], None if dens is None else Fraction(dens))
    return all(compute_metrics(spec, g, truth, t["output"]) == t["metrics"] for t in report_dict["trials"])


# ---------------------------------------------------------------------------
# Privacy audit


def wilson_interval(k: int, n: int, confidence: float) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    z = norm.ppf(0.5 + confidence / 2)
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _log_ratio(a: float, b: float) -> float:
    if a == b:
        return 0.0
    if a == 0.0:
        return -math.inf
    if b == 0.0:
        return math.inf
    return math.log(a / b)


Event = Callable[[list[float]], Any]


def make_event(kind: str, n: int, epsilon: float, vertex: int = 0, step_const: float = 60.0) -> tuple[str, Event]:
    """Named output coarsenings for the audit.

    ``quantized-label``: label of ``vertex`` bucketed by ``step_const ln n / ε``.
    ``label``: exact label of ``vertex``. ``survivor-bit``: whether ``vertex``
    got a nonzero label. ``constant``: ignores the output.
    """
    if kind == "quantized-label":
        width = additive_slack(step_const, n, epsilon)
        return f"quantized-label(v={vertex},width={width:.6g})", lambda lab: math.floor(lab[vertex] / width + 1e-9)
    if kind == "label":
        return f"label(v={vertex})", lambda lab: lab[vertex]
    if kind == "survivor-bit":
        return f"survivor-bit(v={vertex})", lambda lab: int(lab[vertex] > 0)
    if kind == "constant":
        return "constant", lambda lab: 0
    raise ValueError(f"unknown event kind {kind!r}")


@dataclass
class AuditReport:
    event: str
    trials: int
    epsilon: float
    status: str
    counts: dict[str, list[int]] = field(default_factory=dict)
    max_log_ratio: float | None = None
    upper_bound: float | None = None
    lower_bound: float | None = None
    violation: bool = False

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def estimate_log_ratios(
    counts_a: Counter, counts_b: Counter, trials: int, confidence: float = 0.99, min_count: int = 100
) -> tuple[dict[str, list[int]], float, float, float]:
    """Max |log p_a/p_b| over outcomes, with Wilson-interval bounds.

    Outcomes seen fewer than ``min_count`` times in total are pooled into one
    ``other`` outcome, which is itself a valid (coarser) event.
    """
    merged: dict[str, list[int]] = {}
    other = [0, 0]
    for key in sorted(set(counts_a) | set(counts_b), key=repr):
        a, b = counts_a.get(key, 0), counts_b.get(key, 0)
        if a + b < min_count:
            other[0] += a
            other[1] += b
        else:
            merged[repr(key)] = [a, b]
    if sum(other):
        merged["other"] = other
    point = upper = lower = 0.0
    for a, b in merged.values():
        pa, pb = a / trials, b / trials
        la, ha = wilson_interval(a, trials, confidence)
        lb, hb = wilson_interval(b, trials, confidence)
        point = max(point, abs(_log_ratio(pa, pb)))
        upper = max(upper, _log_ratio(ha, lb), _log_ratio(hb, la))
        lower = max(lower, _log_ratio(la, hb), _log_ratio(lb, ha))
    return merged, point, upper, lower


def privacy_audit(
    pair: tuple[Graph, Graph],
    algorithm: Callable[[Graph, NoiseOracle], list[float]],
    epsilon: float,
    event: tuple[str, Event],
    trials: int,
    seed: int = 0,
    confidence: float = 0.99,
    min_count: int = 100,
) -> AuditReport:
    """Estimate ``max |ln Pr[M(G) in S] / Pr[M(G') in S]|`` over event outcomes.

    A violation is reported only when the lower confidence bound exceeds ε.
    Fewer than ``AUDIT_FLOOR`` trials is refused as inconclusive.
    """
    g, h = pair
    if not any(nb == h for nb in edge_neighbors_of(g)):
        raise SpecError({"graph_pair": "graphs are not edge-neighbors"})
    name, fn = event
    if trials < AUDIT_FLOOR:
        return AuditReport(name, trials, epsilon, f"inconclusive: sample too small (need >= {AUDIT_FLOOR} trials)")
    counts = []
    for graph, s in ((g, seed), (h, seed + 1)):
        oracle = NoiseOracle(s)
        counts.append(Counter(fn(algorithm(graph, oracle)) for _ in range(trials)))
    merged, point, upper, lower = estimate_log_ratios(counts[0], counts[1], trials, confidence, min_count)
    violation = lower > epsilon
    return AuditReport(
        name,
        trials,
        epsilon,
        "violation" if violation else "ok",
        merged,
        point,
        upper,
        lower,
        violation,
    )


def dp_kcore_mechanism(epsilon: float, schedule: Schedule | None = None, engine: str = "fast") -> Callable[[Graph, NoiseOracle], list[float]]:
    def mech(g: Graph, oracle: NoiseOracle) -> list[float]:
        sched = schedule or default_schedule(max(g.n, 2), epsilon)
        return run_peel(g, epsilon, sched, oracle, engine).labels

    return mech


# ---------------------------------------------------------------------------
# Engine equivalence


@dataclass
class EquivalenceReport:
    trials: int
    threshold: float
    tv_distance: float
    support_naive: int
    support_fast: int
    top_outcomes: list[tuple[list[int], int, int]]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def total_variation(a: Counter, b: Counter, na: int, nb: int) -> float:
    return 0.5 * sum(abs(a.get(x, 0) / na - b.get(x, 0) / nb) for x in set(a) | set(b))


def equivalence_test(
    g: Graph,
    epsilon: float,
    trials: int,
    threshold: float | None = None,
    offsets: Sequence[float] | None = None,
    seed: int = 0,
    zero_noise: bool = False,
) -> EquivalenceReport:
    """Compare survivor-set distributions of the naive and fast engines.

    Both engines share one threshold-offset vector (drawn from ``seed`` when
    not given) and one threshold (the max degree by default), and run
    ``trials`` times each on independent noise streams.
    """
    if g.n > EQUIVALENCE_MAX_N:
        raise SpecError({"n": f"equivalence test supports n <= {EQUIVALENCE_MAX_N}, got {g.n}"})
    if trials < 1:
        raise SpecError({"trials": "must be >= 1"})
    sched = Schedule.additive(1.0, 1.0)
    if offsets is None:
        offsets = PeelConfig.draw(g.n, epsilon, sched, NoiseOracle(seed, zero_noise=zero_noise)).vertex_offsets
    config = PeelConfig(epsilon, sched, tuple(offsets))
    k = float(max(g.degrees().tolist(), default=0)) if threshold is None else float(threshold)
    everyone = VertexSubset.all(g)
    dists = []
    for peel, s in ((peel_round_naive, seed + 1), (peel_round_fast, seed + 2)):
        oracle = NoiseOracle(s, zero_noise=zero_noise)
        dists.append(Counter(tuple(peel(g, everyone, config, oracle, k).sorted()) for _ in range(trials)))
    naive, fast = dists
    top = [(list(x), naive.get(x, 0), fast.get(x, 0)) for x, _ in (naive + fast).most_common(5)]
    return EquivalenceReport(trials, k, total_variation(naive, fast, trials, trials), len(naive), len(fast), top)
