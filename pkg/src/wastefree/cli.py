"""Batch experiment runner.

Usage::

    wastefree run <config.yaml> [--seed S] [--out DIR]
    wastefree replicate <config.yaml> --runs R [--workers W] [--out DIR]
    wastefree validate <config.yaml>

A config is a YAML mapping::

    problem:
      name: nested_uniform      # nested_uniform | logistic | latin | orthant
      r: 0.5
      p: 0.5
      T: 5
    sampler:
      name: wastefree           # standard | wastefree | wastefree_adaptive | wastefree_growing
      M: 10
      P: 100
    alpha: 0.5                  # ESS fraction for adaptive tempering
    seed: 1
    replications: 1
    estimands: [mean_of_coordinates]
    variance_estimator: geyer   # geyer | tukey_hanning
    output:
      dir: results
      format: json              # json | csv | both
      timing: false             # write wall-clock times (breaks byte-stability)

Problem keys:

* ``nested_uniform``: ``r``, ``p``, ``T``.
* ``logistic``: ``data`` (path to the sonar CSV) or ``synthetic: {n, predictors, seed}``;
  optional ``scale`` for the random-walk proposal.
* ``latin``: ``d``, ``epsilon`` (default 1e-16).
* ``orthant``: ``a`` (list, or a number broadcast to ``d``), ``d``, and ``sigma``
  given as ``identity``, ``{ar1: rho}`` or ``{csv: path}``.

Sampler keys: ``standard`` takes ``N, k``; ``wastefree`` takes ``M, P`` (an optional
``N`` must equal ``M P``); ``wastefree_adaptive`` takes ``M, kappa, initial_P, max_P``;
``wastefree_growing`` takes ``M, P, ess_threshold``.

The output directory is, in order of precedence, ``--out``, the
``WASTEFREE_OUT`` environment variable, ``output.dir``.

Exit codes: 0 success, 2 config error, 3 sampler or IO error, 4 some
replications failed.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from wastefree.core import AllWeightsZero, TerminationFailure
from wastefree.kernels import InfeasibleState, SingularCovariance
from wastefree.samplers import (
    RunTrace,
    run_standard_smc,
    run_waste_free_adaptive_p,
    run_waste_free_growing,
    run_waste_free_smc,
)
from wastefree.variance import ESTIMATORS

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "dump_config",
    "run_experiment",
    "replicate",
    "emit",
    "ESTIMANDS",
    "main",
]

OUT_ENV = "WASTEFREE_OUT"
CSV_HEADER = ("run", "seed", "estimand", "value", "var_estimate", "log_L", "budget")
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_PARTIAL = 0, 2, 3, 4
SAMPLER_ERRORS = (AllWeightsZero, TerminationFailure, InfeasibleState, SingularCovariance, FloatingPointError)


class ConfigError(ValueError):
    """Invalid config; ``field`` is a dotted path and ``line`` is 1-based when known."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = ""
        if field:
            where = f"{field}"
            if line is not None:
                where += f" (line {line})"
            where += ": "
        super().__init__(where + message)


def _coords(x):
    x = np.asarray(x, dtype=float)
    return x.reshape(len(x), -1)


# states with no coordinates yet (growing models at t=0) evaluate to 0
def _mean_of_coordinates(x):
    c = _coords(x)
    return c.mean(axis=1) if c.shape[1] else np.zeros(len(c))


def _first_coordinate(x):
    c = _coords(x)
    return c[:, 0] if c.shape[1] else np.zeros(len(c))


def _squared_norm(x):
    return np.sum(_coords(x) ** 2, axis=1)


ESTIMANDS: dict[str, Callable] = {
    "mean_of_coordinates": _mean_of_coordinates,
    "first_coordinate": _first_coordinate,
    "squared_norm": _squared_norm,
}

PROBLEM_KEYS = {
    "nested_uniform": {"r": None, "p": None, "T": None},
    "logistic": {"data": "", "synthetic": None, "scale": None},
    "latin": {"d": None, "epsilon": 1e-16},
    "orthant": {"a": None, "d": None, "sigma": "identity"},
}
SAMPLER_KEYS = {
    "standard": {"N": None, "k": None},
    "wastefree": {"M": None, "P": None, "N": None},
    "wastefree_adaptive": {"M": None, "kappa": None, "initial_P": None, "max_P": None},
    "wastefree_growing": {"M": None, "P": None, "ess_threshold": 0.5},
}
TOP_DEFAULTS = {
    "alpha": 0.5,
    "seed": 0,
    "replications": 1,
    "estimands": ["mean_of_coordinates"],
    "variance_estimator": "geyer",
}
OUTPUT_DEFAULTS = {"dir": "results", "format": "json", "timing": False}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, normalised config. ``data`` holds every key with defaults filled in."""

    data: dict
    source: str = "<config>"

    @property
    def problem(self) -> dict:
        return self.data["problem"]

    @property
    def sampler(self) -> dict:
        return self.data["sampler"]

    @property
    def seed(self) -> int:
        return self.data["seed"]

    def with_seed(self, seed: int) -> "ExperimentConfig":
        data = copy.deepcopy(self.data)
        data["seed"] = int(seed)
        return ExperimentConfig(data, self.source)

    def config_hash(self) -> str:
        """Digest of everything that determines a run except the seed and output settings."""
        keyed = {k: v for k, v in self.data.items() if k not in ("seed", "output")}
        blob = json.dumps(keyed, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _line_map(text: str) -> dict[tuple, int]:
    """Dotted key path -> 1-based line, from the YAML node tree."""
    lines: dict[tuple, int] = {}

    def walk(node, path):
        lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                walk(value, path + (str(key.value),))
        elif isinstance(node, yaml.SequenceNode):
            for i, value in enumerate(node.value):
                walk(value, path + (str(i),))

    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return lines
    if root is not None:
        walk(root, ())
    return lines


class _Checker:
    def __init__(self, lines):
        self.lines = lines

    def fail(self, path: tuple, message: str):
        line = None
        for n in range(len(path), -1, -1):
            if path[:n] in self.lines:
                line = self.lines[path[:n]]
                break
        raise ConfigError(message, ".".join(path) or "<root>", line)

    def mapping(self, value, path):
        if not isinstance(value, dict):
            self.fail(path, "expected a mapping")
        return value

    def number(self, value, path, *, low=None, high=None, low_open=False, high_open=False, integer=False):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, f"expected a number, got {value!r}")
        if integer and not (isinstance(value, int) or float(value).is_integer()):
            self.fail(path, f"expected an integer, got {value!r}")
        value = int(value) if integer else float(value)
        if not math.isfinite(value):
            self.fail(path, "must be finite")
        if low is not None and (value < low or (low_open and value == low)):
            self.fail(path, f"must be {'>' if low_open else '>='} {low}, got {value}")
        if high is not None and (value > high or (high_open and value == high)):
            self.fail(path, f"must be {'<' if high_open else '<='} {high}, got {value}")
        return value

    def keys(self, section: dict, allowed, path):
        for key in section:
            if key not in allowed:
                self.fail(path + (str(key),), f"unknown key; allowed: {', '.join(sorted(allowed))}")

    def required(self, section, key, path):
        if section.get(key) is None:
            self.fail(path + (key,), "required")
        return section[key]


def _check_problem(c: _Checker, raw) -> dict:
    path = ("problem",)
    sec = c.mapping(raw, path)
    name = sec.get("name")
    if name not in PROBLEM_KEYS:
        c.fail(path + ("name",), f"expected one of {', '.join(PROBLEM_KEYS)}, got {name!r}")
    spec = PROBLEM_KEYS[name]
    c.keys(sec, set(spec) | {"name"}, path)
    out = {"name": name}
    for key, default in spec.items():
        out[key] = sec.get(key, default)
    if name == "nested_uniform":
        out["r"] = c.number(c.required(sec, "r", path), path + ("r",), low=0, high=1, low_open=True, high_open=True)
        out["p"] = c.number(c.required(sec, "p", path), path + ("p",), low=0, high=1, low_open=True)
        out["T"] = c.number(c.required(sec, "T", path), path + ("T",), low=0, integer=True)
    elif name == "logistic":
        if bool(out["data"]) == (out["synthetic"] is not None):
            c.fail(path, "give exactly one of data or synthetic")
        if out["synthetic"] is not None:
            syn = c.mapping(out["synthetic"], path + ("synthetic",))
            c.keys(syn, {"n", "predictors", "seed"}, path + ("synthetic",))
            out["synthetic"] = {
                "n": c.number(c.required(syn, "n", path + ("synthetic",)), path + ("synthetic", "n"), low=2, integer=True),
                "predictors": c.number(
                    syn.get("predictors", 1), path + ("synthetic", "predictors"), low=1, integer=True
                ),
                "seed": c.number(syn.get("seed", 0), path + ("synthetic", "seed"), low=0, integer=True),
            }
        else:
            out["data"] = str(out["data"])
        if out["scale"] is not None:
            out["scale"] = c.number(out["scale"], path + ("scale",), low=0, low_open=True)
    elif name == "latin":
        out["d"] = c.number(c.required(sec, "d", path), path + ("d",), low=2, integer=True)
        out["epsilon"] = c.number(out["epsilon"], path + ("epsilon",), low=0, low_open=True)
    else:
        a = c.required(sec, "a", path)
        d = out["d"]
        if isinstance(a, list):
            a = [c.number(v, path + ("a", str(i))) for i, v in enumerate(a)]
            if d is not None and c.number(d, path + ("d",), integer=True) != len(a):
                c.fail(path + ("d",), f"d={d} but a has {len(a)} entries")
            d = len(a)
        else:
            a = c.number(a, path + ("a",))
            d = c.number(c.required(sec, "d", path), path + ("d",), low=1, integer=True)
            a = [a] * d
        if d < 1:
            c.fail(path + ("a",), "needs at least one threshold")
        out["a"], out["d"] = a, d
        sigma = out["sigma"]
        if sigma == "identity":
            pass
        elif isinstance(sigma, dict) and set(sigma) == {"ar1"}:
            rho = c.number(sigma["ar1"], path + ("sigma", "ar1"), low=-1, high=1, low_open=True, high_open=True)
            out["sigma"] = {"ar1": rho}
        elif isinstance(sigma, dict) and set(sigma) == {"csv"}:
            out["sigma"] = {"csv": str(sigma["csv"])}
        else:
            c.fail(path + ("sigma",), "expected identity, {ar1: rho} or {csv: path}")
    return out


def _check_sampler(c: _Checker, raw) -> dict:
    path = ("sampler",)
    sec = c.mapping(raw, path)
    name = sec.get("name")
    if name not in SAMPLER_KEYS:
        c.fail(path + ("name",), f"expected one of {', '.join(SAMPLER_KEYS)}, got {name!r}")
    spec = SAMPLER_KEYS[name]
    c.keys(sec, set(spec) | {"name"}, path)
    out = {"name": name}

    def integer(key, low):
        return c.number(c.required(sec, key, path), path + (key,), low=low, integer=True)

    if name == "standard":
        out["N"], out["k"] = integer("N", 2), integer("k", 1)
    elif name == "wastefree":
        out["M"], out["P"] = integer("M", 1), integer("P", 2)
        if sec.get("N") is not None:
            n = c.number(sec["N"], path + ("N",), integer=True)
            if n != out["M"] * out["P"]:
                c.fail(path + ("N",), f"N={n} but M*P={out['M'] * out['P']}")
        out["N"] = out["M"] * out["P"]
    elif name == "wastefree_adaptive":
        out["M"] = integer("M", 1)
        out["kappa"] = c.number(c.required(sec, "kappa", path), path + ("kappa",), low=1)
        out["initial_P"] = integer("initial_P", 2)
        out["max_P"] = integer("max_P", 2)
        if out["max_P"] < out["initial_P"]:
            c.fail(path + ("max_P",), "must be >= initial_P")
    else:
        out["M"], out["P"] = integer("M", 1), integer("P", 2)
        out["ess_threshold"] = c.number(
            sec.get("ess_threshold", 0.5), path + ("ess_threshold",), low=0, high=1, high_open=True
        )
    return out


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse and validate YAML text. Raises :class:`ConfigError` naming the field and line."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {exc}", None, mark.line + 1 if mark else None) from None
    c = _Checker(_line_map(text))
    raw = c.mapping(raw if raw is not None else {}, ())
    c.keys(raw, set(TOP_DEFAULTS) | {"problem", "sampler", "output"}, ())
    data: dict[str, Any] = {
        "problem": _check_problem(c, c.required(raw, "problem", ())),
        "sampler": _check_sampler(c, c.required(raw, "sampler", ())),
    }
    for key, default in TOP_DEFAULTS.items():
        data[key] = copy.deepcopy(raw.get(key, default))
    data["alpha"] = c.number(data["alpha"], ("alpha",), low=0, high=1, low_open=True, high_open=True)
    data["seed"] = c.number(data["seed"], ("seed",), low=0, high=2**64 - 1, integer=True)
    data["replications"] = c.number(data["replications"], ("replications",), low=1, integer=True)
    if not isinstance(data["estimands"], list):
        c.fail(("estimands",), "expected a list of names")
    for i, name in enumerate(data["estimands"]):
        if name not in ESTIMANDS:
            c.fail(("estimands", str(i)), f"unknown estimand {name!r}; known: {', '.join(ESTIMANDS)}")
    if data["variance_estimator"] not in ESTIMATORS:
        c.fail(("variance_estimator",), f"expected one of {', '.join(ESTIMATORS)}")
    out_raw = c.mapping(raw.get("output", {}) or {}, ("output",))
    c.keys(out_raw, set(OUTPUT_DEFAULTS), ("output",))
    output = {**OUTPUT_DEFAULTS, **out_raw}
    output["dir"] = str(output["dir"])
    if output["format"] not in ("json", "csv", "both"):
        c.fail(("output", "format"), "expected json, csv or both")
    if not isinstance(output["timing"], bool):
        c.fail(("output", "timing"), "expected true or false")
    data["output"] = output
    return ExperimentConfig(data, source)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_config(text, str(path))
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def dump_config(config: ExperimentConfig) -> str:
    """Canonical YAML; ``parse_config(dump_config(c))`` gives back ``c``."""
    return yaml.safe_dump(config.data, sort_keys=True, default_flow_style=False)


def _resolve(path: str, config: ExperimentConfig) -> Path:
    p = Path(path)
    if not p.is_absolute() and config.source != "<config>":
        p = Path(config.source).parent / p
    return p


def build_model(config: ExperimentConfig):
    """Feynman-Kac model for the configured problem."""
    from wastefree.problems import latin, logistic, nested_uniform, orthant

    prob = config.problem
    name = prob["name"]
    if name == "nested_uniform":
        return nested_uniform.nested_uniform_fk(nested_uniform.NestedUniformModel(prob["r"], prob["p"], prob["T"]))
    if name == "logistic":
        if prob["synthetic"] is not None:
            s = prob["synthetic"]
            model = logistic.synthetic_logistic(s["n"], s["predictors"], s["seed"])
        else:
            try:
                model = logistic.load_sonar(_resolve(prob["data"], config))
            except (OSError, ValueError) as exc:
                raise ConfigError(str(exc), "problem.data") from None
        return logistic.logistic_fk(model, alpha=config.data["alpha"], scale=prob["scale"])
    if name == "latin":
        return latin.latin_fk(prob["d"], prob["epsilon"], alpha=config.data["alpha"])
    d = prob["d"]
    sigma = prob["sigma"]
    if sigma == "identity":
        mat = np.eye(d)
    elif "ar1" in sigma:
        mat = orthant.ar1_correlation(d, sigma["ar1"])
    else:
        try:
            mat = orthant.load_matrix_csv(_resolve(sigma["csv"], config))
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc), "problem.sigma.csv") from None
    try:
        return orthant.orthant_fk(orthant.OrthantModel(np.array(prob["a"]), mat))
    except (orthant.CholeskyFailure, ValueError) as exc:
        raise ConfigError(str(exc), "problem.sigma") from None


def _run_trace(config: ExperimentConfig) -> RunTrace:
    model = build_model(config)
    s = config.sampler
    estimands = {name: ESTIMANDS[name] for name in config.data["estimands"]}
    est = config.data["variance_estimator"]
    seed = config.seed
    if s["name"] == "standard":
        return run_standard_smc(model, s["N"], s["k"], seed, estimands)
    if s["name"] == "wastefree":
        return run_waste_free_smc(model, s["M"], s["P"], seed, estimands, variance_estimator=est)
    if s["name"] == "wastefree_adaptive":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return run_waste_free_adaptive_p(
                model, s["M"], s["kappa"], s["initial_P"], s["max_P"], seed, estimands, variance_estimator=est
            )
    return run_waste_free_growing(model, s["M"], s["P"], s["ess_threshold"], seed, estimands, variance_estimator=est)


def _num(x):
    """JSON-safe float: non-finite values become null."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def run_experiment(config: ExperimentConfig) -> dict:
    """One run; the returned record is deterministic given the config and its seed."""
    start = time.perf_counter()
    trace = _run_trace(config)
    wall_ms = (time.perf_counter() - start) * 1e3
    iterations = [
        {
            "t": rec.t,
            "exponent": _num(rec.exponent),
            "ess": _num(rec.ess),
            "log_ell": _num(rec.log_ell),
            "log_L": _num(rec.log_L),
            "P_t": rec.P,
            "acc_rate": _num(rec.acc_rate),
            "var_logL_partial": _num(rec.var_logL_partial),
        }
        for rec in trace.iterations
    ]
    return {
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "iterations": iterations,
        "final": {
            "log_L": _num(trace.log_L),
            "var_log_L": _num(trace.var_log_L),
            "estimands": {k: _num(v) for k, v in trace.estimates.items()},
            "variances": {k: _num(v) for k, v in trace.variances.items()},
            "budget": int(trace.kernel_steps),
            "wall_ms": round(wall_ms, 3) if config.data["output"]["timing"] else None,
        },
        "warnings": list(trace.warnings),
    }


def _replicate_one(args):
    config, r = args
    cfg = config.with_seed(config.seed + r)
    try:
        return {"run": r, **run_experiment(cfg)}
    except SAMPLER_ERRORS as exc:
        return {"run": r, "config_hash": cfg.config_hash(), "seed": cfg.seed, "error": f"{type(exc).__name__}: {exc}"}


def _summarize(values: list[float]) -> dict:
    v = np.array([x for x in values if x is not None], dtype=float)
    if v.size == 0:
        return {"n": 0, "mean": None, "variance": None, "quantiles": None}
    q = np.quantile(v, [0.05, 0.25, 0.5, 0.75, 0.95])
    return {
        "n": int(v.size),
        "mean": float(v.mean()),
        "variance": float(v.var(ddof=1)) if v.size > 1 else 0.0,
        "quantiles": dict(zip(("q05", "q25", "q50", "q75", "q95"), map(float, q))),
    }


def replicate(config: ExperimentConfig, R: int, workers: int = 1) -> dict:
    """``R`` runs with seeds ``seed + r``; failures are kept as records with an ``error`` field."""
    if R < 1:
        raise ValueError(f"R must be >= 1, got {R}")
    jobs = [(config, r) for r in range(R)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_replicate_one, jobs))
    else:
        runs = [_replicate_one(job) for job in jobs]
    ok = [run for run in runs if "error" not in run]
    summary = {"log_L": _summarize([run["final"]["log_L"] for run in ok])}
    for name in config.data["estimands"]:
        summary[name] = _summarize([run["final"]["estimands"].get(name) for run in ok])
    return {
        "config_hash": config.config_hash(),
        "master_seed": config.seed,
        "runs": runs,
        "failed": len(runs) - len(ok),
        "summary": summary,
    }


def _repr(x) -> str:
    return "" if x is None else repr(float(x))


def to_csv(runs: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for i, run in enumerate(runs):
        if "error" in run:
            continue
        fin = run["final"]
        for name, value in fin["estimands"].items():
            writer.writerow(
                [run.get("run", i), run["seed"], name, _repr(value), _repr(fin["variances"].get(name)),
                 _repr(fin["log_L"]), fin["budget"]]
            )
    return buf.getvalue()


def to_json(results) -> str:
    return json.dumps(results, indent=2, sort_keys=True, allow_nan=False) + "\n"


def emit(results, out_dir, stem: str, fmt: str = "json") -> list[Path]:
    """Write ``results`` (a run record, an ensemble or a list of runs) as JSON and/or CSV.

    JSON keeps Python's shortest round-trip float repr, so parsing it back
    reproduces every number exactly. Output is byte-stable for equal inputs.
    """
    if fmt not in ("json", "csv", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(results, dict) and "runs" in results:
        runs = results["runs"]
    elif isinstance(results, dict):
        runs = [results]
    else:
        runs = list(results)
    out_dir = Path(out_dir)
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if fmt in ("json", "both"):
            path = out_dir / f"{stem}.json"
            path.write_text(to_json(results), encoding="utf-8", newline="\n")
            written.append(path)
        if fmt in ("csv", "both"):
            path = out_dir / f"{stem}.csv"
            path.write_text(to_csv(runs), encoding="utf-8", newline="\n")
            written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write results to {exc.filename or out_dir}: {exc.strerror}") from None
    return written


def _out_dir(args, config: ExperimentConfig) -> Path:
    if args.out:
        return Path(args.out)
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    return Path(config.data["output"]["dir"])


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wastefree", description="Run SMC experiments from a YAML config.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="single run")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.add_argument("--out", help="output directory")
    p_rep = sub.add_parser("replicate", help="independent runs with seeds seed, seed+1, ...")
    p_rep.add_argument("config")
    p_rep.add_argument("--runs", type=int, help="number of runs (default: config replications)")
    p_rep.add_argument("--workers", type=int, default=1)
    p_rep.add_argument("--seed", type=int, help="override the master seed")
    p_rep.add_argument("--out", help="output directory")
    p_val = sub.add_parser("validate", help="check a config and print it in canonical form")
    p_val.add_argument("config")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if getattr(args, "seed", None) is not None:
            config = config.with_seed(args.seed)
        if args.command == "validate":
            build_model(config)
            sys.stdout.write(dump_config(config))
            print(f"# config_hash: {config.config_hash()}")
            return EXIT_OK
        fmt = config.data["output"]["format"]
        if args.command == "run":
            record = run_experiment(config)
            paths = emit(record, _out_dir(args, config), f"run_seed{config.seed}", fmt)
            print(f"log_L = {record['final']['log_L']!r}  budget = {record['final']['budget']}")
            for path in paths:
                print(f"wrote {path}")
            return EXIT_OK
        R = args.runs if args.runs is not None else config.data["replications"]
        if R < 1 or args.workers < 1:
            raise ConfigError("--runs and --workers must be >= 1")
        build_model(config)
        ensemble = replicate(config, R, args.workers)
        paths = emit(ensemble, _out_dir(args, config), f"ensemble_seed{config.seed}_R{R}", fmt)
        for path in paths:
            print(f"wrote {path}")
        if ensemble["failed"]:
            print(f"{ensemble['failed']} of {R} runs failed", file=sys.stderr)
            return EXIT_PARTIAL
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SAMPLER_ERRORS as exc:
        print(f"sampler error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
