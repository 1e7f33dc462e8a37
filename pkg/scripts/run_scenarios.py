"""Run the experiment families (competence/imitation curves) as seed suites.

    python scripts/run_scenarios.py coverage-e6 --seeds 0..9 --steps 300000 --out results
    python scripts/run_scenarios.py all --seeds 0..4 --jobs 4

Each scenario writes one CSV per run plus a ``*_summary.csv`` per condition
(median and interquartile range across seeds), which ``plot_summaries.py``
turns into figures.
"""
import argparse
import logging
from pathlib import Path

from clic.harness import RunConfig, run_suite

SCENARIOS = {
    # E6, Bob idle / on objects 1-3 / on all objects
    "coverage-e6": [("e6", "clic", "idle"), ("e6", "clic", "random:1,2,3"), ("e6", "clic", "all")],
    # Eh, Bob idle / on object 4 / on objects 5 and 6
    "coverage-eh": [("eh", "clic", "idle"), ("eh", "clic", "random:4"), ("eh", "clic", "random:5,6")],
    # E6, Bob teaching in order
    "mentor-e6": [("e6", "clic-rnd", "mentor"), ("e6", "clic", "mentor")],
    # partially controllable environments, Bob on all objects
    "controllability": [(env, agent, "all") for env in ("e6", "e3", "e1") for agent in ("clic-rnd", "clic")],
    # Eh, Bob random vs teaching
    "hierarchy": [("eh", agent, bob) for bob in ("all", "mentor") for agent in ("clic-rnd", "clic")],
}


def seed_range(text):
    lo, hi = text.split("..")
    return range(int(lo), int(hi) + 1)


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("scenario", choices=[*SCENARIOS, "all"])
    p.add_argument("--seeds", type=seed_range, default=seed_range("0..4"))
    p.add_argument("--steps", type=int, default=600_000)
    p.add_argument("--log-every", type=int, default=1000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="results")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    names = list(SCENARIOS) if args.scenario == "all" else [args.scenario]
    for name in names:
        configs = [RunConfig(env=env, agent=agent, bob=bob, steps=args.steps, seed=s,
                             log_every=args.log_every)
                   for env, agent, bob in SCENARIOS[name] for s in args.seeds]
        outcome = run_suite(configs, args.jobs, Path(args.out) / name)
        for label, path in outcome.summaries.items():
            print(f"{name}: {label} -> {path}")
        for cfg, err in outcome.errors:
            print(f"{name}: FAILED {cfg.label()} seed {cfg.seed}: {err}")


if __name__ == "__main__":
    main()
