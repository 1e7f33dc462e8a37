"""Experiment runner: the learner/Bob schedule, metrics CSVs, seed suites, CLI."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .agent import AgentParams, Learner
from .curriculum import EPSILON_CLIC, EPSILON_RND
from .demonstrator import BobMode, BobPolicy, run_demonstrations
from .env import PRESETS, EnvSpec, build_environment

log = logging.getLogger(__name__)

AGENTS = {"clic": EPSILON_CLIC, "clic-rnd": EPSILON_RND}
DEFAULT_STEPS = 600_000
DEFAULT_LOG_EVERY = 1000


@dataclass(frozen=True)
class RunConfig:
    env: str = "e6"                 # preset name or path to an EnvSpec JSON file
    agent: str = "clic"
    bob: str = "idle"
    steps: int = DEFAULT_STEPS
    seed: int = 0
    log_every: int = DEFAULT_LOG_EVERY
    out: str | None = None
    params: dict = field(default_factory=dict)   # AgentParams overrides

    def __post_init__(self):
        if self.agent not in AGENTS:
            raise ValueError(f"unknown agent {self.agent!r}; expected one of {sorted(AGENTS)}")
        if self.steps <= 0:
            raise ValueError("steps must be positive")
        if self.log_every <= 0:
            raise ValueError("log_every must be positive")

    @property
    def epsilon(self) -> float:
        return AGENTS[self.agent]

    def env_spec(self) -> EnvSpec:
        if self.env.lower() in (p.lower() for p in PRESETS):
            return build_environment(self.env)
        return EnvSpec.load(self.env)

    def agent_params(self) -> AgentParams:
        overrides = dict(self.params)
        if "hidden" in overrides:
            overrides["hidden"] = tuple(overrides["hidden"])
        return AgentParams(epsilon=self.epsilon, **overrides)

    def bob_policy(self, n_objects: int) -> BobPolicy:
        return BobPolicy.parse(self.bob, n_objects)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def label(self) -> str:
        env = Path(self.env).stem if self.env.lower() not in (p.lower() for p in PRESETS) else self.env.lower()
        return f"{env}_{self.agent}_{self.bob.replace(':', '-').replace(',', '')}"


def csv_header(n: int) -> list[str]:
    return (["step", "c_avg"] + [f"c_{i}" for i in range(1, n + 1)]
            + [f"lp_{i}" for i in range(1, n + 1)] + [f"imit_{i}" for i in range(1, n + 1)])


def phase_header(n: int) -> list[str]:
    return (["phase", "step", "bob_target"] + [f"c_{i}" for i in range(1, n + 1)]
            + [f"lp_{i}" for i in range(1, n + 1)] + [f"imit_{i}" for i in range(1, n + 1)])


@dataclass
class RunResult:
    config: RunConfig
    n_objects: int
    records: np.ndarray          # rows follow csv_header
    phases: np.ndarray           # rows follow phase_header; imit_* are per-phase counts
    seconds: float = 0.0

    def column(self, name: str) -> np.ndarray:
        return self.records[:, csv_header(self.n_objects).index(name)]

    def phase_column(self, name: str) -> np.ndarray:
        return self.phases[:, phase_header(self.n_objects).index(name)]


def average_competence(competences: np.ndarray, controllable: Sequence[bool]) -> float:
    mask = np.asarray(controllable, dtype=bool)
    return float(competences[mask].sum() / mask.sum()) if mask.any() else 0.0


def simulate(config: RunConfig) -> RunResult:
    """Run the learner for ``config.steps`` steps, with Bob's batches and an
    imitation phase whenever the step index is a multiple of ``f_demo``."""
    spec = config.env_spec()
    params = config.agent_params()
    policy = config.bob_policy(spec.n_objects)
    net_seq, learner_seq, bob_seq = np.random.SeedSequence(config.seed).spawn(3)
    learner = Learner(spec, params, np.random.default_rng(learner_seq),
                      net_rng=np.random.default_rng(net_seq))
    bob_rng = np.random.default_rng(bob_seq)
    n = spec.n_objects
    controllable = spec.controllable_mask
    records, phases = [], []
    t0 = time.perf_counter()
    for k in range(config.steps):
        learner.run_learner_step()
        if k % params.f_demo == 0:
            comp = learner.tracker.competences()
            lp = learner.tracker.learning_progresses()
            batch = run_demonstrations(spec, policy, comp, params.d, bob_rng, params.timeout)
            target = batch.trajectories[0].target_object if (
                batch.trajectories and policy.mode is BobMode.MENTOR) else 0
            learner.ingest(batch)
            counts = learner.imitate()
            phases.append([len(phases), k, target, *comp, *lp, *counts])
        if (k + 1) % config.log_every == 0:
            comp = learner.tracker.competences()
            lp = learner.tracker.learning_progresses()
            records.append([k + 1, average_competence(comp, controllable), *comp, *lp,
                            *learner.imitation])
    width = 2 + 3 * n
    return RunResult(config, n, np.array(records, dtype=float).reshape(-1, width),
                     np.array(phases, dtype=float).reshape(-1, 3 + 3 * n),
                     time.perf_counter() - t0)


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_csv(path: str | Path, header: list[str], rows: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    header = rows[0]
    return header, np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, len(header))


def phases_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".phases.csv")


def run_experiment(config: RunConfig) -> RunResult:
    """Simulate and, if ``config.out`` is set, write the metrics and per-phase CSVs."""
    result = simulate(config)
    if config.out:
        write_csv(config.out, csv_header(result.n_objects), result.records)
        write_csv(phases_path(config.out), phase_header(result.n_objects), result.phases)
        log.info("wrote %s (%.1fs)", config.out, result.seconds)
    return result


def load_result(config: RunConfig, path: str | Path) -> RunResult:
    header, records = read_csv(path)
    _, phases = read_csv(phases_path(path))
    n = (len(header) - 2) // 3
    return RunResult(config, n, records, phases)


# -- cached runs --------------------------------------------------------------------

def code_fingerprint() -> str:
    """Hash of the package sources; cached results are invalid once any of them change."""
    h = hashlib.sha256()
    for p in sorted(Path(__file__).parent.glob("*.py")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()[:16]


def cache_key(config: RunConfig) -> str:
    d = config.to_dict()
    d.pop("out")
    blob = json.dumps(d, sort_keys=True) + code_fingerprint()
    return hashlib.sha256(blob.encode()).hexdigest()[:20]


def cached_run(config: RunConfig, cache_dir: str | Path) -> RunResult:
    """Runs are deterministic given their config, so results are reused across calls."""
    path = Path(cache_dir) / f"{config.label()}_s{config.seed}_{cache_key(config)}.csv"
    if path.exists() and phases_path(path).exists():
        return load_result(config, path)
    result = run_experiment(dataclasses.replace(config, out=str(path)))
    return result


# -- suites -------------------------------------------------------------------------

@dataclass
class SuiteOutcome:
    results: list[RunResult]
    errors: list[tuple[RunConfig, str]]
    summaries: dict[str, Path]


def _run_one(config: RunConfig) -> RunResult:
    return run_experiment(config)


def summarize(results: Sequence[RunResult]) -> tuple[list[str], np.ndarray]:
    """Per-step median and interquartile range of every metric across runs."""
    n = results[0].n_objects
    cols = csv_header(n)[1:]
    length = min(len(r.records) for r in results)
    stack = np.stack([r.records[:length] for r in results])
    steps = stack[0, :, 0]
    med = np.median(stack[:, :, 1:], axis=0)
    q25 = np.percentile(stack[:, :, 1:], 25, axis=0)
    q75 = np.percentile(stack[:, :, 1:], 75, axis=0)
    header = ["step"]
    for c in cols:
        header += [f"{c}_median", f"{c}_q25", f"{c}_q75"]
    body = np.empty((length, 1 + 3 * len(cols)))
    body[:, 0] = steps
    body[:, 1::3] = med
    body[:, 2::3] = q25
    body[:, 3::3] = q75
    return header, body


def run_suite(configs: Sequence[RunConfig], parallelism: int = 1,
              out_dir: str | Path | None = None) -> SuiteOutcome:
    """Independent seeded runs; one summary CSV per condition (configs equal up to seed)."""
    if not configs:
        raise ValueError("need at least one config")
    if out_dir is not None:
        out_dir = Path(out_dir)
        configs = [dataclasses.replace(c, out=str(out_dir / f"{c.label()}_s{c.seed}.csv"))
                   for c in configs]
    results, errors = [], []
    if parallelism > 1:
        with ProcessPoolExecutor(parallelism) as ex:
            futures = [(c, ex.submit(_run_one, c)) for c in configs]
            for c, fut in futures:
                try:
                    results.append(fut.result())
                except Exception as e:  # a failed seed must not abort its siblings
                    errors.append((c, repr(e)))
    else:
        for c in configs:
            try:
                results.append(_run_one(c))
            except Exception as e:
                errors.append((c, repr(e)))
    groups: dict[str, list[RunResult]] = {}
    for r in results:
        groups.setdefault(r.config.label(), []).append(r)
    summaries = {}
    for label, group in groups.items():
        group.sort(key=lambda r: r.config.seed)
        if out_dir is not None:
            header, body = summarize(group)
            path = out_dir / f"{label}_summary.csv"
            write_csv(path, header, body)
            summaries[label] = path
    for c, err in errors:
        log.error("run %s seed %d failed: %s", c.label(), c.seed, err)
    return SuiteOutcome(results, errors, summaries)


# -- CLI ----------------------------------------------------------------------------

def _seed_range(text: str) -> list[int]:
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}")
    if hi < lo:
        raise argparse.ArgumentTypeError("empty seed range")
    return list(range(lo, hi + 1))


def _bob_flag(text: str) -> str:
    t = text.strip().lower()
    if t in ("idle", "all", "mentor"):
        return t
    if t.startswith("random:"):
        try:
            ids = [int(v) for v in t.split(":", 1)[1].split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad object list in {text!r}")
        if ids and all(i >= 1 for i in ids):
            return t
    raise argparse.ArgumentTypeError(f"expected idle, all, mentor or random:<ids>, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clic", description="Run learner/Bob experiments in object gridworlds.")
    p.add_argument("--config", help="JSON run config; command-line flags override its fields")
    p.add_argument("--env", help="preset (e6, e3, e1, eh) or path to an environment JSON file")
    p.add_argument("--agent", choices=sorted(AGENTS))
    p.add_argument("--bob", type=_bob_flag, help="idle | all | mentor | random:<ids>")
    p.add_argument("--steps", type=int)
    seeds = p.add_mutually_exclusive_group()
    seeds.add_argument("--seed", type=int)
    seeds.add_argument("--seeds", type=_seed_range, help="inclusive range A..B; runs a suite")
    p.add_argument("--log-every", type=int, dest="log_every")
    p.add_argument("--out", help="CSV path for a single run, directory for a suite")
    p.add_argument("--jobs", type=int, default=1, help="parallel runs in a suite")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


@dataclass
class SuiteRequest:
    configs: list[RunConfig]
    out_dir: str
    jobs: int = 1


def parse_cli(argv: Sequence[str] | None = None) -> RunConfig | SuiteRequest:
    parser = build_parser()
    args = parser.parse_args(argv)
    base: dict = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            parser.error(f"cannot read config {args.config}: {e}")
    for key in ("env", "agent", "bob", "steps", "seed", "log_every", "out"):
        val = getattr(args, key)
        if val is not None:
            base[key] = val
    if "env" not in base:
        parser.error("--env is required (or an 'env' field in --config)")
    try:
        if args.seeds is not None:
            out_dir = base.pop("out", None) or "results"
            base.pop("seed", None)
            configs = [RunConfig.from_dict({**base, "seed": s}) for s in args.seeds]
            for c in configs:
                c.env_spec()
            return SuiteRequest(configs, out_dir, args.jobs)
        config = RunConfig.from_dict(base)
        spec = config.env_spec()
        config.bob_policy(spec.n_objects)
    except (ValueError, OSError, KeyError) as e:
        parser.error(str(e))
    return config


def main(argv: Sequence[str] | None = None) -> int:
    request = parse_cli(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    if isinstance(request, SuiteRequest):
        outcome = run_suite(request.configs, request.jobs, request.out_dir)
        for label, path in outcome.summaries.items():
            print(f"{label}: {path}")
        return 1 if outcome.errors else 0
    config = request if request.out else dataclasses.replace(request, out=f"{request.label()}_s{request.seed}.csv")
    result = run_experiment(config)
    last = result.records[-1] if len(result.records) else None
    if last is not None:
        print(f"step {int(last[0])}: C(k) = {last[1]:.3f}  ({result.seconds:.1f}s) -> {config.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
