"""Command line front end: run registered scenarios from a JSON config.

Usage::

    movingframes [--seed N] run config.json --out results/
    movingframes list [--json]

Exit status: 0 when every invariant check passes, 1 when a check fails,
2 for configuration errors, 3 for numerical failures.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from .errors import ConfigError, EvaluationFailure, MovingFrameError, NumericalFailure, SingularFrame
from .harness import compare, monitor
from .lie_poisson import lie_poisson_bracket, so3
from .nonholonomic import almost_casimir_check
from .scenarios import REGISTRY, RigidBodyScenario, build_scenario

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
OUTPUTS = ("trajectory_csv", "invariants_csv", "report_json")
U64_MAX = 2 ** 64 - 1

DEFAULT_TOLERANCES = {
    "energy_drift": 1e-8,
    "conserved_drift": 1e-8,
    "constraint_residual": 1e-8,
    "oracle_deviation": 1e-6,
    "multiplier_deviation": 1e-6,
    "structure": 1e-10,
}
DEFAULT_INTEGRATOR = {"method": "rk4", "h": 1e-3, "t_end": 10.0, "rtol": 1e-10, "atol": 1e-10,
                      "output_every": 1}
CONFIG_KEYS = {"scenario", "parameters", "initial", "integrator", "outputs", "oracle", "tolerances",
               "diagnostic_points", "multipliers", "seed"}


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return validate_config(cfg)


def validate_config(cfg):
    """Fill defaults and check types; raises :class:`ConfigError`."""
    _require(isinstance(cfg, dict), "config must be a JSON object")
    unknown = sorted(set(cfg) - CONFIG_KEYS)
    _require(not unknown, f"unknown config keys: {', '.join(unknown)}")
    _require("scenario" in cfg, "config needs a 'scenario' entry")
    name = cfg["scenario"]
    _require(name in REGISTRY, f"unknown scenario {name!r}; registered: {', '.join(REGISTRY)}")

    out = dict(cfg)
    out.setdefault("parameters", {})
    out.setdefault("initial", {})
    _require(isinstance(out["parameters"], dict), "'parameters' must be an object")
    _require(isinstance(out["initial"], dict), "'initial' must be an object")
    for k, v in out["parameters"].items():
        _require(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v),
                 f"parameter {k!r} must be a finite number")

    integ = dict(DEFAULT_INTEGRATOR)
    extra = sorted(set(out.get("integrator", {})) - set(DEFAULT_INTEGRATOR))
    _require(not extra, f"unknown integrator keys: {', '.join(extra)}")
    integ.update(out.get("integrator", {}))
    _require(integ["method"] in ("rk4", "rk45", "rk45-adaptive"), f"unknown method {integ['method']!r}")
    for key in ("h", "t_end", "rtol", "atol"):
        _require(isinstance(integ[key], (int, float)) and integ[key] > 0, f"integrator {key!r} must be positive")
    _require(isinstance(integ["output_every"], int) and integ["output_every"] >= 1,
             "integrator 'output_every' must be a positive integer")
    if integ["method"] == "rk4":
        n_steps = round(integ["t_end"] / integ["h"])
        _require(n_steps >= 1 and abs(n_steps * integ["h"] - integ["t_end"]) <= 1e-9 * max(1.0, integ["t_end"]),
                 "rk4 needs t_end to be a whole number of steps h")
    out["integrator"] = integ

    outputs = out.get("outputs", list(OUTPUTS))
    _require(isinstance(outputs, list) and all(o in OUTPUTS for o in outputs),
             f"'outputs' must be a list drawn from {', '.join(OUTPUTS)}")
    out["outputs"] = outputs

    tol = dict(DEFAULT_TOLERANCES)
    extra = sorted(set(out.get("tolerances", {})) - set(DEFAULT_TOLERANCES))
    _require(not extra, f"unknown tolerance keys: {', '.join(extra)}")
    tol.update(out.get("tolerances", {}))
    out["tolerances"] = tol

    out["oracle"] = bool(out.get("oracle", False))
    _require(not (out["oracle"] and REGISTRY[name].module != "nonholonomic"),
             f"scenario {name!r} has no multiplier oracle")
    _require(not (out["oracle"] and integ["method"] != "rk4"), "oracle comparison needs method 'rk4'")
    out["diagnostic_points"] = int(out.get("diagnostic_points", 5))
    _require(out["diagnostic_points"] >= 0, "'diagnostic_points' must be non-negative")
    out["multipliers"] = bool(out.get("multipliers", True))
    if "seed" in out:
        out["seed"] = parse_seed(out["seed"])
    return out


def parse_seed(value):
    if isinstance(value, bool) or not (isinstance(value, int) or str(value).strip().isdigit()):
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {value!r}")
    seed = int(value)
    _require(seed <= U64_MAX, f"seed {seed} exceeds 2**64 - 1")
    _require(seed >= 0, f"seed must be non-negative, got {seed}")
    return seed


def _check(value, tol):
    return {"value": float(value), "tolerance": float(tol), "pass": bool(value <= tol)}


def _write_csv(path, header, rows):
    np.savetxt(path, rows, fmt="%.17g", delimiter=",", header=",".join(header), comments="")


def run(cfg, out_dir, seed=None):
    """Execute a validated config; returns ``(exit_code, report)``."""
    seed = cfg.get("seed", 0) if seed is None else seed
    sc = build_scenario(cfg["scenario"], cfg["parameters"], cfg["initial"])
    integ, tol = cfg["integrator"], cfg["tolerances"]
    traj = sc.run(integ["t_end"], integ["h"], method=integ["method"], store_every=integ["output_every"],
                  rtol=integ["rtol"], atol=integ["atol"])
    rng = np.random.default_rng(seed)
    rigid = isinstance(sc, RigidBodyScenario)

    quantities = {"energy": lambda t, y: sc.energy(y)}
    if not rigid:
        quantities["constraint_residual"] = lambda t, y: max(sc.surface_residual(y), sc.annihilation_residual(y))
    for name, f in sc.conserved().items():
        quantities[name] = lambda t, y, f=f: f(y)
    table = monitor(traj, quantities)
    if rigid:
        table["constraint_residual"] = {"values": np.zeros(len(traj)), "max_drift": 0.0}

    checks = {"energy_drift": _check(table["energy"]["max_drift"], tol["energy_drift"])}
    if not rigid:
        checks["constraint_residual"] = _check(np.max(table["constraint_residual"]["values"]),
                                               tol["constraint_residual"])
    for name in sc.conserved():
        checks[f"{name}_drift"] = _check(table[name]["max_drift"], tol["conserved_drift"])

    # structural checks at seeded random stored states
    idx = np.sort(rng.choice(len(traj), size=min(cfg["diagnostic_points"], len(traj)), replace=False))
    structure = 0.0
    for i in idx:
        y = traj.states[i]
        if rigid:
            alg = so3()
            cas = lambda mu: float(mu @ mu)
            for k in range(3):
                coord = lambda mu, k=k: float(mu[k])
                structure = max(structure, abs(lie_poisson_bracket(cas, coord, y, alg,
                                                                   grad_f=lambda mu: 2 * mu,
                                                                   grad_g=lambda mu, k=k: np.eye(3)[k])))
        else:
            rep = almost_casimir_check(sc.hamiltonian, sc.split, y[:sc.n], y[sc.n:], tol=tol["structure"])
            structure = max(structure, rep.middle_max, rep.annihilation, rep.surface_residual, rep.double_count)
    checks["structure"] = _check(structure, tol["structure"])

    lam = None
    if not rigid and sc.r and (cfg["multipliers"] or cfg["oracle"]):
        lam = np.array([sc.frame_multipliers(y) for y in traj.states])

    report = {
        "scenario": cfg["scenario"],
        "parameters": {k: float(v) for k, v in sorted(cfg["parameters"].items())},
        "integrator": integ,
        "seed": int(seed),
        "diagnostic_indices": [int(i) for i in idx],
        "stored_states": len(traj),
        "t_final": float(traj.times[-1]),
        "max_drift": {name: float(table[name]["max_drift"]) for name in quantities if name != "constraint_residual"},
        "max_constraint_residual": float(np.max(table["constraint_residual"]["values"])),
    }

    if cfg["oracle"]:
        orc = sc.run_oracle(integ["t_end"], integ["h"], store_every=integ["output_every"])
        dev = compare(traj, orc, state_map1=sc.to_velocity_state)
        report["oracle_sup_deviation"] = dev["sup"]
        checks["oracle_deviation"] = _check(dev["sup"], tol["oracle_deviation"])
        if sc.r:
            mapped = np.array([sc.oracle_to_frame_multipliers(y[:sc.n], l)
                               for y, l in zip(orc.states, orc.diagnostics["multipliers"])])
            mdev = float(np.max(np.abs(mapped - lam)))
            report["oracle_multiplier_deviation"] = mdev
            checks["multiplier_deviation"] = _check(mdev, tol["multiplier_deviation"])
        report["oracle_max_constraint_residual"] = float(np.max(orc.diagnostics["constraint_residual"]))

    report["checks"] = checks
    report["passed"] = all(c["pass"] for c in checks.values())

    os.makedirs(out_dir, exist_ok=True)
    if "trajectory_csv" in cfg["outputs"]:
        n = sc.n
        header = ["t"] + [f"q_{i + 1}" for i in range(n)] + [f"m_{i + 1}" for i in range(sc.s)]
        cols = [traj.times[:, None], traj.states]
        if lam is not None and cfg["multipliers"]:
            header += [f"lambda_{i + 1}" for i in range(sc.r)]
            cols.append(lam)
        _write_csv(os.path.join(out_dir, "trajectory.csv"), header, np.hstack(cols))
    if "invariants_csv" in cfg["outputs"]:
        names = ["energy", "constraint_residual"] + list(sc.conserved())
        rows = np.column_stack([traj.times] + [table[k]["values"] for k in names])
        _write_csv(os.path.join(out_dir, "invariants.csv"), ["t"] + names, rows)
    if "report_json" in cfg["outputs"]:
        with open(os.path.join(out_dir, "report.json"), "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return (EXIT_OK if report["passed"] else EXIT_FAILED), report


def list_scenarios():
    """Registry rows in registration order."""
    return [{"name": s.name, "module": s.module, "parameters": list(s.parameters),
             "initial": dict(s.initial), "reference": s.reference} for s in REGISTRY.values()]


def _print_table(rows, stream):
    for r in rows:
        init = ", ".join(f"{k}[{v}]" for k, v in r["initial"].items())
        stream.write(f"{r['name']:<20} {r['module']:<12} params: {', '.join(r['parameters']):<50} "
                     f"initial: {init:<12} {r['reference']}\n")


def _parser():
    p = argparse.ArgumentParser(prog="movingframes", description=__doc__.split("\n")[0])
    p.add_argument("--seed", default=None, help="unsigned 64-bit seed for diagnostic point selection")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario config")
    r.add_argument("config")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--seed", default=argparse.SUPPRESS)
    ls = sub.add_parser("list", help="list registered scenarios")
    ls.add_argument("--json", action="store_true")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.command == "list":
        rows = list_scenarios()
        if args.json:
            json.dump(rows, sys.stdout, indent=2)
            sys.stdout.write("\n")
        else:
            _print_table(rows, sys.stdout)
        return EXIT_OK
    try:
        seed = None if args.seed is None else parse_seed(args.seed)
        cfg = load_config(args.config)
        code, report = run(cfg, args.out, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, EvaluationFailure, SingularFrame) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MovingFrameError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    failed = [k for k, c in report["checks"].items() if not c["pass"]]
    print(f"{report['scenario']}: {'all checks passed' if not failed else 'FAILED ' + ', '.join(failed)}")
    return code


if __name__ == "__main__":
    sys.exit(main())
