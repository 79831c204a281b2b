"""Command line front end: ``oriented-walks <subcommand> [flags]``.

Flags may also come from a flat ``key = value`` config file given with
``--config``; flags on the command line win. Output is CSV (default) or JSON.
Exit status: 0 success, 1 usage/validation error, 2 invariant failure,
3 runtime error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

from . import __version__
from .embedding import embed_check
from .environment import Law, empirical_correlation, validate_params
from .errors import InvariantViolation, OrientedWalkError, UsageError, ValidationError
from .estimators import (
    estimate_return_probability,
    flt_check,
    newman_records,
    tn_ratio,
    variance_scaling,
)
from .lattice_walk import return_contrast
from .records import EstimateRecord, ResultSet, dumps, fmt
from .scenery import delta_draws, selfsimilarity_record

SUBCOMMANDS = ("env-sample", "walk", "returns", "embed-check", "tn-ratio", "delta",
               "delta-selfsim", "scaling", "flt-check", "newman")

# flag name -> (type, default, subcommands or None for all)
_ENV = ("env-sample", "walk", "returns", "embed-check", "scaling", "flt-check", "tn-ratio")


def _floats(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _ints(text):
    return [int(float(v)) for v in str(text).split(",") if v.strip()]


def _u64(text):
    value = int(text)
    if not 0 <= value < 1 << 64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return value


OPTIONS = {
    "seed": (_u64, 0, None),
    "threads": (int, 1, None),
    "out": (str, None, None),
    "format": (str, "csv", None),
    "env": (str, "iid", _ENV),
    "beta-j": (float, None, _ENV + ("newman",)),
    "beta": (float, None, _ENV),
    "coupling": (float, None, _ENV),
    "alpha": (float, None, _ENV),
    "window": (int, None, _ENV + ("newman",)),
    "burnin": (int, None, _ENV),
    "truncation": (int, None, _ENV),
    "lags": (_ints, [1, 2, 4, 8], ("env-sample",)),
    "reps": (int, 1000, ("env-sample", "walk", "returns", "embed-check", "tn-ratio", "scaling",
                         "flt-check")),
    "steps": (int, 10 ** 6, ("walk",)),
    "record-path": (int, None, ("walk",)),
    "n": (int, None, ("embed-check", "tn-ratio", "delta", "delta-selfsim", "flt-check")),
    "n-grid": (_ints, None, ("returns", "scaling")),
    "t1": (float, 0.0, ("scaling",)),
    "t2": (float, 1.0, ("scaling",)),
    "t": (float, 1.0, ("flt-check", "delta-selfsim")),
    "mode": (str, "discrete", ("delta",)),
    "times": (_floats, [1.0], ("delta",)),
    "draws": (int, 5000, ("delta", "delta-selfsim", "flt-check")),
    "dt": (float, 1e-4, ("delta",)),
    "dx": (float, 1e-2, ("delta",)),
    "c": (float, 2.0, ("delta-selfsim",)),
    "no-rescale": (bool, False, ("delta-selfsim",)),
    "t-grid": (_floats, [0.01, 0.1, 0.5, 1.0], ("newman",)),
    "path-length": (int, None, ("newman",)),
}

DEFAULT_N = {"embed-check": 10 ** 4, "tn-ratio": 10 ** 5, "delta": 4096, "delta-selfsim": 4096,
             "flt-check": 10 ** 5}


def _key(flag: str) -> str:
    return flag.replace("-", "_")


@dataclass
class ExperimentConfig:
    command: str
    law: str = "iid"
    params: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    seed: int = 0
    threads: int = 1
    out: str | None = None
    format: str = "csv"

    def __getattr__(self, name):
        try:
            return self.__dict__["options"][name]
        except KeyError:
            raise AttributeError(name) from None

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("out")
        return d


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oriented-walks", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="flat key = value file")
        for flag, (kind, _, allowed) in OPTIONS.items():
            if allowed is not None and name not in allowed:
                continue
            if kind is bool:
                p.add_argument(f"--{flag}", dest=_key(flag), action="store_true", default=None)
            else:
                p.add_argument(f"--{flag}", dest=_key(flag), type=kind, default=None)
    return parser


def read_config_file(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            k, v = (s.strip() for s in line.split("=", 1))
            values[k.lstrip("-").replace("_", "-")] = v
    return values


def _env_params(law: Law, opts: dict) -> dict:
    get = opts.get
    if law is Law.ISING_NN:
        return {"beta_J": get("beta_j") if get("beta_j") is not None else 0.0}
    if law is Law.ISING_LR:
        beta, coupling = get("beta"), get("coupling")
        if get("beta_j") is not None and beta is None and coupling is None:
            beta, coupling = 1.0, get("beta_j")
        params = {"beta": 1.0 if beta is None else beta, "J": 0.0 if coupling is None else coupling,
                  "alpha": 2.0 if get("alpha") is None else get("alpha")}
        for flag, name in (("window", "window_halfwidth"), ("burnin", "burnin_sweeps"),
                           ("truncation", "truncation_radius")):
            if get(flag) is not None:
                params[name] = get(flag)
        return params
    return {}


def parse_config(argv: Sequence[str], config_file: str | None = None) -> ExperimentConfig:
    """Build a validated :class:`ExperimentConfig` from flags and an optional file."""
    args = build_parser().parse_args(list(argv))
    command = args.command
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config") and v is not None}
    merged = {}
    path = config_file or args.config
    if path:
        allowed = {f for f, (_, _, cmds) in OPTIONS.items() if cmds is None or command in cmds}
        for k, v in read_config_file(path).items():
            if k not in allowed:
                raise UsageError(f"unknown config key {k!r} for {command}")
            kind = OPTIONS[k][0]
            try:
                merged[_key(k)] = (v.lower() in ("1", "true", "yes")) if kind is bool else kind(v)
            except ValueError as exc:
                raise ValidationError(f"bad value for {k}: {exc}") from None
    merged.update(flags)
    opts = {}
    for flag, (_, default, cmds) in OPTIONS.items():
        if cmds is None or command in cmds:
            opts[_key(flag)] = merged.get(_key(flag), default)
    if "n" in opts and opts["n"] is None:
        opts["n"] = DEFAULT_N[command]

    if opts.get("alpha") is not None and not opts["alpha"] > 1:
        raise ValidationError(f"--alpha must be > 1 (summable power-law decay), got {opts['alpha']}")
    for name in ("threads", "reps", "draws", "steps"):
        if opts.get(name) is not None and opts[name] < 1:
            raise ValidationError(f"--{name} must be >= 1")
    if opts["format"] not in ("csv", "json"):
        raise ValidationError("--format must be csv or json")
    law = Law.parse(opts.get("env", "iid"))
    params = validate_params(law, _env_params(law, opts)) if "env" in opts else {}
    if command == "newman":
        law = Law.ISING_NN
        params = {"beta_J": opts["beta_j"] if opts["beta_j"] is not None else 0.5}
        if opts["window"] is None:
            opts["window"] = 8
    if command == "delta" and opts["mode"] not in ("discrete", "continuum"):
        raise ValidationError("--mode must be discrete or continuum")
    for key in ("seed", "threads", "out", "format", "env"):
        opts.pop(key, None)
    return ExperimentConfig(command, law.value, params, opts, merged.get("seed", 0),
                            merged.get("threads", 1), merged.get("out"), merged.get("format", "csv"))


def _profile_rows(cfg, profile):
    rows = [[cfg.law, dumps(cfg.params), str(int(lag)), fmt(est), fmt(se),
             str(profile.sample_count), str(cfg.seed)]
            for lag, est, se in zip(profile.lags, profile.estimates, profile.stderrs)]
    return ("law", "params", "lag", "estimate", "stderr", "reps", "seed"), rows


def run_experiment(cfg: ExperimentConfig) -> ResultSet:
    """Dispatch ``cfg`` to its estimator and collect the rows."""
    start = time.perf_counter()
    header = {"tool": f"oriented-walks {__version__}", "config": cfg.echo()}
    cmd, o = cfg.command, cfg.options
    seed, threads = cfg.seed, cfg.threads
    records: list[EstimateRecord] = []
    exit_code = 0
    result = None

    if cmd == "env-sample":
        profile = empirical_correlation(cfg.law, cfg.params, sorted(o["lags"]), o["reps"], seed,
                                        threads=threads)
        cols, rows = _profile_rows(cfg, profile)
        result = ResultSet(header, cols, rows)
    elif cmd == "walk":
        recs = return_contrast([(cfg.law, cfg.params)], o["reps"], o["steps"], seed, threads)
        cols = ("law", "params", "horizon", "mean_returns", "stderr", "reps", "seed")
        rows = [[r.law, dumps(r.params), str(r.n), fmt(r.value), fmt(r.stderr),
                 str(r.replicates), str(seed)] for r in recs]
        result = ResultSet(header, cols, rows, recs)
    elif cmd == "returns":
        grid = o["n_grid"] or [1, 2, 4, 8, 16]
        records = estimate_return_probability(cfg.law, cfg.params, grid, o["reps"], seed, threads)
    elif cmd == "embed-check":
        results = embed_check(cfg.law, cfg.params, o["n"], o["reps"], seed, threads)
        failures = sum(not ok for ok in results)
        records = [EstimateRecord("embed_check_failures", cfg.law, cfg.params, o["n"], o["reps"],
                                  float(failures), 0.0, seed, {})]
        exit_code = 2 if failures else 0
    elif cmd == "tn-ratio":
        records = [tn_ratio(o["n"], o["reps"], seed, cfg.law, cfg.params, threads)]
    elif cmd == "delta":
        times = sorted(o["times"])
        draws = delta_draws(o["mode"], o["draws"], times, seed, n=o["n"], dt=o["dt"], dx=o["dx"],
                            threads=threads)
        cols = ("draw", "t", "value", "mode", "seed")
        rows = [[str(i), fmt(t), fmt(v), o["mode"], str(seed)]
                for i, row in enumerate(draws) for t, v in zip(times, row)]
        result = ResultSet(header, cols, rows)
    elif cmd == "delta-selfsim":
        records = [selfsimilarity_record(o["c"], o["draws"], seed, t=o["t"], n=o["n"],
                                         threads=threads, rescale=not o["no_rescale"])]
    elif cmd == "scaling":
        grid = o["n_grid"] or [64, 128, 256, 512, 1024]
        records = variance_scaling(cfg.law, cfg.params, grid, (o["t1"], o["t2"]), o["reps"],
                                   seed, threads)
    elif cmd == "flt-check":
        records = flt_check(cfg.law, cfg.params, o["n"], o["reps"], o["t"], seed,
                            delta_draws_count=o["draws"], threads=threads)
    elif cmd == "newman":
        records = newman_records([cfg.params["beta_J"]], [o["window"]], o["t_grid"], seed,
                                 path_length=o["path_length"])
        if not all(r.extra["holds"] for r in records):
            exit_code = 2
    else:  # pragma: no cover - argparse restricts the choices
        raise UsageError(f"unknown subcommand {cmd}")

    header["wall_time_s"] = round(time.perf_counter() - start, 3)
    if result is None:
        result = ResultSet.from_records(header, records, exit_code)
    result.exit_code = exit_code
    return result


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        result = run_experiment(cfg)
    except (UsageError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 2
    except OrientedWalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    text = result.to_json() if cfg.format == "json" else result.to_csv()
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
