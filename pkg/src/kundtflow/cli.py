"""Command-line interface: classify, flow, verify-kundt, verify-spacetime, selftest.

Every command reads one JSON document (``--config``, or ``-`` for stdin) and
writes JSON (or CSV for ``flow``) to ``--out`` or stdout.

Exit codes: 0 pass, 1 verification failure, 2 invalid config, 3 Theta not
integrable, 4 singularity before t_end, 5 degenerate metric sample.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import cauchy, flow, kundt, spacetime
from .errors import ConfigError, IntervalExceededError, KundtflowError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CONSTRAINT, EXIT_SINGULAR, EXIT_DEGENERATE = 0, 1, 2, 3, 4, 5

CSV_COLUMNS = (
    "t", "B", "theta_uu", "theta_ul", "theta_ll", "theta_nn",
    "U_uu", "U_ul", "U_un", "U_lu", "U_ll", "U_ln", "U_nu", "U_nl", "U_nn",
    "H_closed", "H_numeric", "closed_vs_rk4_err",
)  # fmt: skip

THETA_KEYS = ("theta_uu", "theta_ul", "theta_ll", "theta_nn")


# ---------------------------------------------------------------- output


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def to_json(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text whose floats carry 17 significant digits."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ", ".join(to_json(v, indent, _level + 1) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- config


@dataclass
class RunConfig:
    command: str
    lam: Optional[float] = None
    group: Optional[str] = None
    theta: dict = field(default_factory=dict)
    relations: str = "auto"
    lapse: Optional[flow.Lapse] = None
    t_end: float = 1.0
    step: float = 1e-3
    record_every: int = 1
    preset: Optional[str] = None
    params: dict = field(default_factory=dict)
    counts: Optional[tuple] = None
    perturb: Optional[float] = None
    tol: float = 1e-5

    @classmethod
    def from_dict(cls, command: str, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        lam = d.get("lambda", d.get("lam"))
        cfg = cls(command)
        if lam is not None:
            cfg.lam = _number(lam, "lambda")
            if cfg.lam == 0:
                raise ConfigError("lambda must be nonzero")
        group = d.get("group")
        if group is not None:
            known = {g.lower(): g for g in cauchy.GROUPS}
            if not isinstance(group, str) or group.lower() not in known:
                raise ConfigError(f"unknown group {group!r}; expected one of {cauchy.GROUPS}")
            cfg.group = known[group.lower()]
        cfg.theta = {k: _number(d[k], k) for k in THETA_KEYS if d.get(k) is not None}
        cfg.relations = d.get("relations", "auto")
        if "lapse" in d:
            try:
                cfg.lapse = flow.Lapse.from_dict(d["lapse"])
            except (TypeError, KeyError, ValueError) as exc:
                raise ConfigError(f"invalid lapse: {exc}") from exc
        cfg.t_end = _number(d.get("t_end", 1.0), "t_end")
        cfg.step = _number(d.get("step", 1e-3), "step")
        if not cfg.step > 0:
            raise ConfigError("step must be positive")
        cfg.record_every = int(d.get("record_every", 1))
        cfg.preset = d.get("preset")
        cfg.params = dict(d.get("params", {}))
        if "counts" in d:
            cfg.counts = tuple(int(c) for c in d["counts"])
        if d.get("perturb") is not None:
            cfg.perturb = _number(d["perturb"], "perturb")
        cfg.tol = _number(d.get("tol", 1e-5), "tol")
        cfg._check_refs()
        return cfg

    def _check_refs(self):
        if self.command in ("classify", "flow"):
            if self.lam is None:
                raise ConfigError("lambda is required")
            need = {
                None: ("theta_ul", "theta_nn"),
                "E11": ("theta_nn",),
                "Tau2R": ("theta_uu", "theta_nn"),
                "Tau3Mu": ("theta_ul", "theta_nn"),
            }[self.group]
            if self.relations == "check":
                need = THETA_KEYS
            missing = [k for k in need if k not in self.theta]
            if missing:
                raise ConfigError(f"missing theta fields {missing} for group {self.group}")
        if self.command in ("verify-kundt", "verify-spacetime") and not self.preset:
            raise ConfigError("preset is required")

    def pair(self) -> cauchy.CauchyPair:
        th = {k.split("_")[1]: v for k, v in self.theta.items()}
        return cauchy.complete_pair(self.lam, self.group, relations=self.relations, **th)


def _number(x, name: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{name} must be a number")
    v = float(x)
    if not math.isfinite(v):
        raise ConfigError(f"{name} must be finite")
    return v


def load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc


# ---------------------------------------------------------------- commands


def cmd_classify(cfg: RunConfig) -> tuple[int, dict]:
    pair = cfg.pair()
    cauchy.validate(pair)
    gc = cauchy.classify(pair)
    conditions = {
        "E11": "not allowed",
        "Tau2R": "theta_nn (theta_nn - theta_uu) = lambda^2",
        "Tau3Mu": "theta_ul (2 theta_ul - 3 lambda) = 0",
    }
    report = {
        "group": gc.tag,
        "mu": gc.mu,
        "sigma": gc.sigma,
        "einstein": conditions[gc.tag],
        "theta": dict(zip(THETA_KEYS, pair.components().tolist())),
        "einstein_residual": cauchy.einstein_residual(pair),
        "hamiltonian0": cauchy.hamiltonian0(pair),
        "momentum_residual": cauchy.momentum_residual(pair).tolist(),
        "constrained_einstein": cauchy.is_constrained_einstein(pair),
    }
    return EXIT_OK, report


def _row(pair, lapse, s: flow.FlowState) -> list:
    try:
        err = float(np.max(np.abs(flow.closed_form_coframe(pair, lapse, s.t) - s.U)))
    except IntervalExceededError:
        err = float("nan")
    vals = [s.t, s.B, *s.theta.tolist(), *s.U.ravel().tolist(), s.H, s.H_numeric, err]
    return [repr(float(v)) for v in vals]


def cmd_flow(cfg: RunConfig) -> tuple[int, str]:
    pair = cfg.pair()
    lapse = cfg.lapse or flow.Lapse.constant(1.0)
    traj = flow.integrate(pair, lapse, cfg.t_end, cfg.step, record_every=max(1, cfg.record_every))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for s in traj.states:
        w.writerow(_row(pair, lapse, s))
    code = EXIT_SINGULAR if traj.status == "singularity" else EXIT_OK
    return code, buf.getvalue()


def _verdicts(values: dict, tols: dict) -> tuple[dict, list]:
    checks, failures = {}, []
    for name, value in values.items():
        tol = tols[name]
        ok = bool(value < tol)
        checks[name] = {"value": value, "tol": tol, "pass": ok}
        if not ok:
            failures.append(name)
    return checks, failures


def cmd_verify_kundt(cfg: RunConfig) -> tuple[int, dict]:
    pre = kundt.preset(cfg.preset)
    params = dict(cfg.params)
    if cfg.perturb:
        params["perturb"] = cfg.perturb
    fam = pre.build(**params)
    plan = pre.plan(cfg.counts or (4, 3, 3, 3), cfg.tol)
    rep = kundt.verify(fam, plan)
    values = {f"killing.{k}": v for k, v in rep["killing"].items()}
    values.update({f"optical.{k}": rep["optical"][k] for k in ("theta", "twist2", "shear2")})
    values.update({f"base.{k}": rep["base"][k] for k in ("norm_dF", "hessian", "laplacian")})
    values["beta_equation"] = rep["beta_equation"]
    tols = {k: (min(cfg.tol, 1e-6) if k.startswith("optical") else cfg.tol) for k in values}
    checks, failures = _verdicts(values, tols)
    report = {"preset": cfg.preset, "samples": rep["samples"], "checks": checks, "failures": failures}
    return (EXIT_FAIL if failures else EXIT_OK), report


def cmd_verify_spacetime(cfg: RunConfig) -> tuple[int, dict]:
    g = spacetime.preset(cfg.preset).build(**cfg.params)
    if cfg.perturb:
        g = g.with_lapse_scale(1.0 + cfg.perturb)
    plan = g.plan(cfg.counts or (3, 3, 3, 3), cfg.tol)
    rep = spacetime.verify(g, plan)
    values = {"ricci4": rep["ricci4"]}
    for section in ("flow", "evolution", "killing", "optical"):
        values.update({f"{section}.{k}": v for k, v in rep[section].items()})
    ricci_tol = max(cfg.tol, 1e-4)
    tols = {k: (ricci_tol if k == "ricci4" else cfg.tol) for k in values}
    checks, failures = _verdicts(values, tols)
    report = {"preset": cfg.preset, "samples": rep["samples"], "checks": checks, "failures": failures}
    return (EXIT_FAIL if failures else EXIT_OK), report


def cmd_selftest(cfg: RunConfig, seed: int) -> tuple[int, dict]:
    """Quick randomized consistency suite over the exact classification identities."""
    rng = np.random.default_rng(seed)
    bad = {"classify": 0, "factorization": 0, "hamiltonian": 0, "flow_oracle": 0}
    n = 100
    for group in cauchy.GROUPS:
        for _ in range(n):
            p = cauchy.random_pair(group, rng, einstein=bool(rng.random() < 0.3))
            bad["classify"] += cauchy.classify(p).tag != group
            bad["factorization"] += cauchy.einstein_factored(p) != cauchy.einstein_residual_exact(p)
            bad["hamiltonian"] += abs(cauchy.hamiltonian0(p) + 2.0 * float(cauchy.einstein_residual_exact(p))) > 1e-9
        p = cauchy.random_pair(group, rng, lam=1)
        lapse = flow.Lapse.constant(1.0)
        t_hi = min(0.3, 0.5 * flow.maximal_interval(p, lapse)[1])
        traj = flow.integrate(p, lapse, t_hi, 1e-3)
        err = float(np.max(np.abs(flow.closed_form_coframe(p, lapse, traj.t) - traj.Us)))
        bad["flow_oracle"] += err > 1e-7
    report = {"seed": seed, "pairs_per_group": n, "failures": {k: int(v) for k, v in bad.items()}}
    return (EXIT_FAIL if any(bad.values()) else EXIT_OK), report


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kundtflow", description="Killing spinorial flows and Kundt metric verification")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("classify", "flow", "verify-kundt", "verify-spacetime", "selftest"):
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config path ('-' for stdin)", required=name != "selftest")
        s.add_argument("--out", help="output path (default: stdout)")
        s.add_argument("--tol", type=float, default=None, help="pass/fail tolerance override")
        s.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    return p


def run(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = load_config(args.config)
        if args.tol is not None:
            raw = {**raw, "tol": args.tol}
        cfg = RunConfig.from_dict(args.command, raw)
        if args.command == "flow":
            code, text = cmd_flow(cfg)
            _emit(text, args.out)
            return code
        handler = {
            "classify": cmd_classify,
            "verify-kundt": cmd_verify_kundt,
            "verify-spacetime": cmd_verify_spacetime,
            "selftest": lambda c: cmd_selftest(c, args.seed),
        }[args.command]
        code, report = handler(cfg)
        _emit(to_json(report) + "\n", args.out)
        return code
    except KundtflowError as exc:
        sys.stderr.write(f"kundtflow: {exc}\n")
        return getattr(exc, "exit_code", EXIT_FAIL)


def main(argv: Optional[list] = None) -> None:
    sys.exit(run(argv))

