"""Experiment driver.

``run`` reads a JSON config, executes the requested checks in a fixed order and
writes one JSON report per check, ``summary.csv`` and, with ``--trend``, a CSV of
constants against depth. Rationals travel as ``"num/den"`` strings throughout.

Exit status is 0 when every enabled check passes, 1 when one fails and 2 for a
malformed config.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

from .covering import build_H, inclusion_distance, sumset_bound, union_sumset
from .errors import ConfigError, FracprojError
from .fractal import DEFAULT_SIZE_LIMIT, DiscreteSet, build_A, build_B, build_Theta, fractal_Theta
from .measure import (
    ahlfors_constant,
    build_prop23_measure,
    equal_weight_ssm,
    frostman_constant,
    rescale_nu,
    rescaled_frostman_bound,
)
from .params import ToyConfig, admissible_delta, structural_config
from .product import ahlfors1_check, build_K, build_mu, projection_sweep, rectangle_masses, rescaled_theta, stack_diagnostics
from .radix import Surd, as_fraction, fraction_str
from .regularity import regularity_constant, uniformity_check

CHECKS = (
    "params",
    "uniformity",
    "regularity",
    "prop23",
    "frostman-nu",
    "h-inclusion",
    "sumset-bound",
    "product-ahlfors",
    "projection-sweep",
)

_KEYS = {
    "mode", "t", "tau", "b", "q", "n", "n_seed", "checks", "slack", "size_limit", "out_dir",
    "inclusion_budget", "frostman_bound", "ahlfors_bound", "sweep_thetas",
}


@dataclass
class ExperimentConfig:
    mode: str
    t: Fraction
    tau: Fraction
    checks: list
    b: int | None = None
    q: int | None = None
    n: int | None = None
    n_seed: int | None = None
    slack: Fraction = Fraction(8)
    size_limit: int = DEFAULT_SIZE_LIMIT
    out_dir: str = "reports"
    inclusion_budget: Fraction = Fraction(4)
    frostman_bound: Fraction = Fraction(4)
    ahlfors_bound: Fraction | None = None
    sweep_thetas: list | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(raw) - _KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        mode = raw.get("mode", "structural")
        if mode not in ("paper", "structural"):
            raise ConfigError(f"mode must be 'paper' or 'structural', got {mode!r}")
        required = ("t", "tau", "n_seed") if mode == "paper" else ("t", "tau", "b", "q", "n")
        missing = [k for k in required if k not in raw]
        if missing:
            raise ConfigError(f"{mode} mode needs {missing}")

        checks = raw.get("checks", "all")
        if checks == "all":
            checks = ["params"] if mode == "paper" else list(CHECKS)
        if not isinstance(checks, list) or not checks:
            raise ConfigError("checks must be 'all' or a non-empty list")
        bad = [c for c in checks if c not in CHECKS]
        if bad:
            raise ConfigError(f"unknown checks {bad}; known: {list(CHECKS)}")
        if mode == "paper" and checks != ["params"]:
            raise ConfigError("paper mode supports only the params check")
        # fixed catalogue order keeps logs reproducible
        checks = [c for c in CHECKS if c in checks]

        def rational(key, default=None):
            if key not in raw:
                return default
            try:
                return as_fraction(raw[key])
            except (TypeError, ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"{key}: {exc}") from None

        def integer(key, default=None):
            v = raw.get(key, default)
            if v is not None and (not isinstance(v, int) or isinstance(v, bool)):
                raise ConfigError(f"{key} must be an integer, got {v!r}")
            return v

        thetas = raw.get("sweep_thetas")
        if thetas is not None:
            if not isinstance(thetas, list) or not thetas:
                raise ConfigError("sweep_thetas must be a non-empty list of rationals")
            try:
                thetas = [as_fraction(v) for v in thetas]
            except (TypeError, ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"sweep_thetas: {exc}") from None

        return cls(
            mode=mode,
            t=rational("t"),
            tau=rational("tau"),
            checks=checks,
            b=integer("b"),
            q=integer("q"),
            n=integer("n"),
            n_seed=integer("n_seed"),
            slack=rational("slack", Fraction(8)),
            size_limit=integer("size_limit", DEFAULT_SIZE_LIMIT),
            out_dir=str(raw.get("out_dir", "reports")),
            inclusion_budget=rational("inclusion_budget", Fraction(4)),
            frostman_bound=rational("frostman_bound", Fraction(4)),
            ahlfors_bound=rational("ahlfors_bound"),
            sweep_thetas=thetas,
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(raw)

    def toy(self, n: int | None = None) -> ToyConfig:
        try:
            return structural_config(self.b, self.q, self.tau, self.t, n or self.n)
        except (FracprojError, ValueError) as exc:
            raise ConfigError(str(exc)) from None


@dataclass
class CheckResult:
    name: str
    passed: bool
    constant: str
    slack: str
    report: dict = field(default_factory=dict)
    runtime_ms: float = 0.0


def _const(x) -> str:
    if isinstance(x, Surd):
        return str(x.decimal(12))
    if isinstance(x, Fraction):
        return fraction_str(x)
    return str(x)


# -- individual checks; each returns (passed, constant, report) ---------------


def check_params(ec: ExperimentConfig, cfg: ToyConfig | None, workers: int):
    if ec.mode == "paper":
        p = admissible_delta(ec.t, ec.tau, ec.n_seed)
        return True, str(p.K), p.to_json()
    ok = cfg.digitsA == cfg.digitsTheta * cfg.digitsB
    return ok, str(cfg.digitsA), {**cfg.to_json(), "epsilon": fraction_str(cfg.epsilon), "digit_identity": ok}


def _sets(cfg: ToyConfig, size_limit: int):
    return (
        ("A", build_A(cfg, size_limit), cfg.spacing_A, cfg.digitsA),
        ("B", build_B(cfg, size_limit), cfg.spacing_B, cfg.digitsB),
        ("Theta", build_Theta(cfg, size_limit), cfg.spacing_Theta, cfg.digitsTheta),
    )


def check_uniformity(ec, cfg, workers):
    out, ok, seen = {}, True, []
    for name, S, _, digits in _sets(cfg, ec.size_limit):
        rep = uniformity_check(S, cfg.n - 1)
        good = rep.uniform and all(N == digits for N in rep.branching)
        out[name] = {**rep.to_json(), "expected_branching": digits, "pass": good}
        ok = ok and good
        seen.append(f"{name}={'/'.join(map(str, sorted(set(rep.branching))))}")
    return ok, ";".join(seen), out


def check_regularity(ec, cfg, workers):
    out, ok, worst = {}, True, None
    for name, S, s, _ in _sets(cfg, ec.size_limit):
        rep = regularity_constant(S, s, cfg.delta, 1)
        bound = Surd(ec.slack, cfg.m, 3 * s)
        good = rep.C_min <= bound
        out[name] = {**rep.to_json(), "bound": bound.to_json(), "pass": good}
        ok = ok and good
        worst = rep.C_min if worst is None else max(worst, rep.C_min)
    return ok, _const(worst), out


def check_prop23(ec, cfg, workers):
    P = build_A(cfg, ec.size_limit)
    s = cfg.spacing_A
    C = regularity_constant(P, s, cfg.delta, 1).C_min
    mu = build_prop23_measure(P, cfg.delta, s)
    rep = ahlfors_constant(mu, s, cfg.delta, 1, ec.size_limit)
    bound = Surd.of(ec.slack) * C**2
    ok = rep.constant <= bound
    return ok, _const(rep.constant), {"set": "A", "C_min": C.to_json(), "bound": bound.to_json(), "ahlfors": rep.to_json(), "pass": ok}


def check_frostman(ec, cfg, workers):
    nu0 = equal_weight_ssm(fractal_Theta(cfg), ec.size_limit)
    base_rep = frostman_constant(nu0, cfg.tau, nu0.resolution, 1)
    nu = rescale_nu(nu0, cfg)
    resc = frostman_constant(nu, cfg.tau, nu.resolution, 1)
    bound = rescaled_frostman_bound(cfg, ec.frostman_bound)
    ok_base = base_rep.C_max <= Surd.of(ec.frostman_bound)
    ok_resc = resc.C_max <= bound
    unit_ok = nu.meta["unit_mass"] >= nu.meta["unit_mass_lower_bound"]
    ok = ok_base and ok_resc and unit_ok
    report = {
        "nu": {**base_rep.to_json(), "bound": fraction_str(ec.frostman_bound), "pass": ok_base},
        "rescaled_nu": {**resc.to_json(), "bound": bound.to_json(), "pass": ok_resc},
        "unit_mass": fraction_str(nu.meta["unit_mass"]),
        "unit_mass_lower_bound": fraction_str(nu.meta["unit_mass_lower_bound"]),
        "pass": ok,
    }
    return ok, _const(max(base_rep.C_max, resc.C_max)), report


def check_inclusion(ec, cfg, workers):
    A, B, T = (build_A(cfg, ec.size_limit), build_B(cfg, ec.size_limit), build_Theta(cfg, ec.size_limit))
    X = union_sumset(A, T, B, ec.size_limit, workers)
    H = build_H(cfg, ec.size_limit)
    budget = ec.inclusion_budget * cfg.delta.value
    rep = inclusion_distance(X, H, budget)
    ok = bool(rep.within_budget)
    return ok, fraction_str(rep.max_distance), {**rep.to_json(), "sumset_size": len(X), "h_size": len(H), "pass": ok}


def check_sumset_bound(ec, cfg, workers):
    row = sumset_bound(cfg, ec.inclusion_budget, ec.size_limit, workers)
    return row.chain_holds, str(row.cover.ratio.decimal(12)), {**row.to_json(), "pass": row.chain_holds}


def check_product(ec, cfg, workers):
    K = build_K(cfg, ec.size_limit)
    mu = build_mu(cfg, K, ec.size_limit)
    rep = ahlfors1_check(mu, cfg.delta, 1, cfg, ec.size_limit)
    bound = ec.ahlfors_bound if ec.ahlfors_bound is not None else ec.slack**2
    masses_ok = all(
        set(rectangle_masses(K, j).values()) == {cfg.rho**j} for j in range(1, cfg.n + 1)
    )
    stacks = [stack_diagnostics(K, j) for j in range(1, cfg.n + 1)]
    ahl_ok = rep.constant <= Surd.of(bound)
    ok = ahl_ok and masses_ok and all(s.matches for s in stacks)
    report = {
        "ahlfors": rep.to_json(),
        "bound": fraction_str(bound),
        "rectangle_masses_exact": masses_ok,
        "stacks": [s.to_json() for s in stacks],
        "pass": ok,
    }
    return ok, _const(rep.constant), report


def check_sweep(ec, cfg, workers):
    K = build_K(cfg, ec.size_limit)
    if ec.sweep_thetas is None:
        Theta = rescaled_theta(cfg, ec.size_limit)
    else:
        try:
            Theta = DiscreteSet.from_values(ec.sweep_thetas, cfg.base, cfg.delta)
        except ValueError as exc:
            raise ConfigError(f"sweep_thetas: {exc}") from None
    rep = projection_sweep(K, Theta, cfg.delta, ec.size_limit, workers)
    ok = rep.chain_holds
    return ok, str(rep.union.count), {**rep.to_json(), "pass": ok}


_RUNNERS: dict[str, Callable] = {
    "params": check_params,
    "uniformity": check_uniformity,
    "regularity": check_regularity,
    "prop23": check_prop23,
    "frostman-nu": check_frostman,
    "h-inclusion": check_inclusion,
    "sumset-bound": check_sumset_bound,
    "product-ahlfors": check_product,
    "projection-sweep": check_sweep,
}


def _slack_for(ec: ExperimentConfig, name: str) -> Fraction | None:
    return {
        "regularity": ec.slack,
        "prop23": ec.slack,
        "frostman-nu": ec.frostman_bound,
        "h-inclusion": ec.inclusion_budget,
        "product-ahlfors": ec.ahlfors_bound if ec.ahlfors_bound is not None else ec.slack**2,
    }.get(name)


def run_checks(ec: ExperimentConfig, n: int | None = None, workers: int = 1, timing: bool = False) -> list[CheckResult]:
    cfg = ec.toy(n) if ec.mode == "structural" else None
    results = []
    for name in ec.checks:
        slack = _slack_for(ec, name)
        start = time.perf_counter()
        try:
            ok, constant, report = _RUNNERS[name](ec, cfg, workers)
        except ConfigError:
            raise
        except FracprojError as exc:
            ok, constant, report = False, "", {"error": type(exc).__name__, "message": str(exc), "pass": False}
        elapsed = (time.perf_counter() - start) * 1000 if timing else 0.0
        report = {"check": name, "config": cfg.to_json() if cfg else {"mode": "paper"}, "slack": None if slack is None else fraction_str(slack), **report, "pass": bool(ok)}
        results.append(CheckResult(name, bool(ok), constant, "" if slack is None else fraction_str(slack), report, elapsed))
    return results


def write_reports(results: list[CheckResult], out: Path, timing: bool = False) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for r in results:
        (out / f"{r.name}.json").write_text(json.dumps(r.report, indent=2) + "\n")
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["check", "pass", "constant", "slack", "runtime_ms"])
        for r in results:
            w.writerow([r.name, str(r.passed).lower(), r.constant, r.slack, f"{r.runtime_ms:.1f}" if timing else ""])


def write_trend(ec: ExperimentConfig, n_max: int, out: Path, workers: int = 1) -> bool:
    """Run every enabled check at depths ``1..n_max``; returns whether all passed."""
    out.mkdir(parents=True, exist_ok=True)
    ok = True
    sumset_rows = []
    with open(out / "trend.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "check", "pass", "constant"])
        for n in range(1, n_max + 1):
            for r in run_checks(ec, n, workers):
                w.writerow([n, r.name, str(r.passed).lower(), r.constant])
                ok = ok and r.passed
                if r.name == "sumset-bound" and "cover_count" in r.report:
                    sumset_rows.append(r.report)
    if sumset_rows:
        fields = ["n", "cover_count", "target_decimal", "ratio_decimal", "h_size", "h_display_bound",
                  "h_neighborhood_cells", "nine_h", "chain_holds"]
        with open(out / "sumset_trend.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
            w.writeheader()
            w.writerows(sumset_rows)
    return ok


def cmd_run(args) -> int:
    ec = ExperimentConfig.load(args.config)
    out = Path(args.out or ec.out_dir)
    workers = 4 if args.parallel else 1
    if args.trend:
        if ec.mode == "paper":
            raise ConfigError("--trend needs a structural config")
        ok = write_trend(ec, args.trend, out, workers)
        results = run_checks(ec, None, workers, args.timing)
    else:
        ok = True
        results = run_checks(ec, None, workers, args.timing)
    write_reports(results, out, args.timing)
    for r in results:
        print(f"{r.name:<18} {'PASS' if r.passed else 'FAIL'}  {r.constant}")
    return 0 if ok and all(r.passed for r in results) else 1


def cmd_params(args) -> int:
    try:
        p = admissible_delta(args.t, args.tau, args.n_seed)
    except (FracprojError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    print(json.dumps(p.to_json(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracproj", description="Exact desk-scale checks for fractal projection constructions.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the checks listed in a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--parallel", action="store_true", help="parallelise inside checks")
    run.add_argument("--trend", type=int, metavar="N", help="also run every check at depths 1..N")
    run.add_argument("--out", help="report directory (overrides out_dir)")
    run.add_argument("--timing", action="store_true", help="record runtimes in summary.csv")
    run.set_defaults(func=cmd_run)

    params = sub.add_parser("params", help="symbolic parameters for delta = 2**(-n_seed**K)")
    params.add_argument("--t", required=True)
    params.add_argument("--tau", required=True)
    params.add_argument("--n-seed", type=int, required=True)
    params.set_defaults(func=cmd_params)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
