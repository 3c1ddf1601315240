"""Command-line driver: ``quench-ldt rate | sweep | figure``.

Exit codes: 0 success, 1 numerical failure, 2 bad arguments or config.
Precedence for every setting is flag > config file > built-in default.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import ResolutionError, detect_kinks, lambda_grid, sweep, time_grid
from .cgf import GAUGES, QuenchSpec, converged_grid, default_grid
from .figures import FIGURES, figure_parameters, reproduce_figure
from .quadrature import QuadratureError
from .ratefn import LegendreSolver
from .states import Thermodynamics

STATES = {"thermal": "thermal", "coherent": "coherent_gibbs"}
AXIS_COLUMNS = {"lambda": "lambda", "time": "time", "work_density": "w"}


class UsageError(Exception):
    """Bad flag or config value; maps to exit code 2."""


@dataclass
class RunConfig:
    """Every knob of ``rate`` and ``sweep``; all have defaults."""

    lambda_initial: float = 0.0
    lambda_quenched: float = 0.5
    temperature: float = 1.0
    sigma: float | None = 1.0
    state: str = "coherent"
    time: float | None = None
    w: float = 0.0
    gauge: str = "bogoliubov"
    panels: int = 32
    order: int = 16
    converge: bool = False
    lambda_grid: str | None = None
    time_grid: str | None = None
    w_grid: str | None = None
    quench_offset: float | None = None
    output: str | None = None
    format: str = "csv"
    threads: int | None = None
    threshold: float | None = None
    detect_kinks: bool = False

    def spec(self) -> QuenchSpec:
        if self.state not in STATES:
            raise UsageError(f"--state must be one of {sorted(STATES)}, got {self.state!r}")
        if self.gauge not in GAUGES:
            raise UsageError(f"--gauge must be one of {sorted(GAUGES)}, got {self.gauge!r}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"--format must be csv or json, got {self.format!r}")
        try:
            thermo = Thermodynamics(self.temperature, self.sigma)
            return QuenchSpec(self.lambda_initial, self.lambda_quenched, thermo, STATES[self.state],
                              self.time, self.gauge)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def grid_factory(self):
        panels, order, converge = self.panels, self.order, self.converge
        if panels < 1 or order < 1:
            raise UsageError("--panels and --order must be positive")

        def factory(spec):
            return converged_grid(spec) if converge else default_grid(spec, panels=panels, order=order)

        return factory


_FLOAT_OR_NONE = {"sigma", "time", "quench_offset", "threshold"}
_INT = {"panels", "order"}
_INT_OR_NONE = {"threads"}
_BOOL = {"converge", "detect_kinks"}
_FLOAT = {"lambda_initial", "lambda_quenched", "temperature", "w"}


def _coerce(key: str, raw):
    """Turn a config-file value into the field's type."""
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if key in _BOOL:
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if text.lower() in ("none", "") and key in _FLOAT_OR_NONE | _INT_OR_NONE:
            return None
        if key in _FLOAT or key in _FLOAT_OR_NONE:
            return float(text)
        if key in _INT or key in _INT_OR_NONE:
            return int(text)
    except ValueError:
        raise UsageError(f"config key {key!r}: cannot parse {raw!r}") from None
    return text


def read_config(path: str, allowed=None) -> dict:
    """Flat key = value file (INI, section header optional) or a JSON manifest.

    Unknown keys are rejected.
    """
    allowed = allowed or {f.name for f in fields(RunConfig)}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"--config: {exc}") from None
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--config: invalid JSON: {exc}") from None
        data = data.get("config", data.get("parameters", data))
    else:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            if not text.lstrip().startswith("["):
                text = "[run]\n" + text
            parser.read_string(text)
        except configparser.Error as exc:
            raise UsageError(f"--config: {exc}") from None
        data = {}
        for section in parser.sections():
            data.update(parser[section])
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise UsageError(f"--config: unknown key(s) {', '.join(unknown)}")
    return data


def parse_grid(text: str, axis: str) -> np.ndarray:
    """``default``, ``start:stop:step`` (inclusive) or a comma list."""
    text = text.strip()
    try:
        if text == "default":
            if axis == "lambda":
                return lambda_grid()
            if axis == "time":
                return time_grid()
            raise ValueError("no default work-density grid")
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError("need step > 0 and stop >= start")
            n = int(round((stop - start) / step)) + 1
            return start + step * np.arange(n)
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"--{axis.replace('_', '-')}-grid: {exc}") from None


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.16e" % x
    return str(x)


def write_table(columns, rows, fmt: str, stream) -> None:
    if fmt == "csv":
        stream.write(",".join(columns) + "\n")
        for row in rows:
            stream.write(",".join(_fmt(v) for v in row) + "\n")
        return
    records = []
    for row in rows:
        rec = {}
        for c, v in zip(columns, row):
            if isinstance(v, (bool, np.bool_)):
                v = bool(v)
            elif isinstance(v, (float, np.floating)):
                v = float(v) if math.isfinite(v) else None
            elif isinstance(v, np.integer):
                v = int(v)
            rec[c] = v
        records.append(rec)
    json.dump({"columns": list(columns), "rows": records}, stream, indent=1)
    stream.write("\n")


def _emit(columns, rows, cfg: RunConfig) -> None:
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            write_table(columns, rows, cfg.format, fh)
    else:
        write_table(columns, rows, cfg.format, sys.stdout)


def _write_json(path, obj) -> None:
    with open(path, "w", newline="") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _series_rows(series, y=None):
    y = series.r if y is None else y
    return [(x, (v if ok else None), ok) for x, v, ok in zip(series.values, y, series.supported)]


# -- commands ---------------------------------------------------------------

def cmd_rate(cfg: RunConfig) -> int:
    spec = cfg.spec()
    res = LegendreSolver.for_spec(spec, cfg.grid_factory()(spec)).solve(cfg.w)
    columns = ["lambda", "lambda_quenched", "temperature", "sigma", "state", "time", "w", "r", "argmin_R",
               "supported"]
    row = [spec.lambda_initial, spec.lambda_quenched, spec.thermo.temperature, spec.thermo.sigma, cfg.state,
           spec.hold_time, cfg.w, res.r, res.argmin_R, res.finite]
    _emit(columns, [row], cfg)
    if not res.finite:
        print(f"error: w={cfg.w} lies outside the support of the rate function", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    given = [(a, g) for a, g in (("lambda", cfg.lambda_grid), ("time", cfg.time_grid),
                                 ("work_density", cfg.w_grid)) if g is not None]
    if len(given) != 1:
        raise UsageError("give exactly one of --lambda-grid, --time-grid, --w-grid")
    axis, text = given[0]
    values = parse_grid(text, axis)
    if axis == "time" and cfg.time is None:
        cfg.time = float(values[0])
    if cfg.detect_kinks and not cfg.output:
        raise UsageError("--detect-kinks needs --output for the sidecar file")
    template = cfg.spec()
    factory = cfg.grid_factory()
    try:
        series = sweep(axis, values, template, w=cfg.w, quench_offset=cfg.quench_offset, grid_factory=factory,
                       threads=cfg.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit([AXIS_COLUMNS[axis], "r", "supported"], _series_rows(series), cfg)
    if cfg.output:
        _write_json(cfg.output + ".manifest.json", {"tool_version": __version__, "config": asdict(cfg),
                                                    "grid_descriptor": series.grid})
    if cfg.detect_kinks:
        report = detect_kinks(series, cfg.threshold, grid_factory=factory)
        _write_json(cfg.output + ".kinks.json", report.to_dict())
    if not series.supported.any():
        print("error: no grid point has a finite rate function", file=sys.stderr)
        return 1
    return 0


def cmd_figure(figure_id: str, overrides: dict, out_dir: str, fmt: str, threads) -> int:
    if figure_id not in FIGURES:
        raise UsageError(f"unknown figure {figure_id!r}; choose from {', '.join(sorted(FIGURES))}")
    try:
        figure_parameters(figure_id, overrides)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    bundle = reproduce_figure(figure_id, overrides, threads=threads)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ext = "csv" if fmt == "csv" else "json"
    files = []
    for s, chi in zip(bundle.series, bundle.susceptibility or [None] * len(bundle.series)):
        col = AXIS_COLUMNS[s.axis]
        name = f"r_{s.label}.{ext}"
        with open(out / name, "w", newline="") as fh:
            write_table([col, "r", "supported"], _series_rows(s), fmt, fh)
        files.append(name)
        if figure_id == "fig1" and chi is not None:
            name = f"drdlambda_{s.label}.{ext}"
            with open(out / name, "w", newline="") as fh:
                write_table([col, "dr_dlambda", "supported"], _series_rows(s, chi), fmt, fh)
            files.append(name)
    manifest = bundle.manifest()
    manifest["files"] = files
    _write_json(out / "manifest.json", manifest)
    if not any(s.supported.any() for s in bundle.series):
        print("error: every curve is unsupported", file=sys.stderr)
        return 1
    return 0


# -- parser -----------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    d = argparse.SUPPRESS
    p.add_argument("--config", help="INI key=value file or JSON manifest")
    p.add_argument("--lambda", dest="lambda_initial", type=float, default=d, help="initial field (default 0)")
    p.add_argument("--lambda-quenched", dest="lambda_quenched", type=float, default=d,
                   help="quenched field (default 0.5)")
    p.add_argument("--temperature", type=float, default=d, help="initial temperature (default 1)")
    p.add_argument("--sigma", type=lambda s: None if s.lower() == "none" else float(s), default=d,
                   help="measurement precision, or 'none' for projective (default 1)")
    p.add_argument("--state", choices=sorted(STATES), default=d, help="initial state (default coherent)")
    p.add_argument("--time", type=float, default=d, help="double-quench hold time; omit for a single quench")
    p.add_argument("--w", type=float, default=d, help="work density (default 0)")
    p.add_argument("--gauge", choices=sorted(GAUGES), default=d, help="coherence phase (default bogoliubov)")
    p.add_argument("--panels", type=int, default=d, help="quadrature panels (default 32)")
    p.add_argument("--order", type=int, default=d, help="Gauss-Legendre order per panel (default 16)")
    p.add_argument("--converge", action="store_true", default=d, help="refine the grid to 1e-10")
    p.add_argument("--output", "-o", default=d, help="output file (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default=d, help="output format (default csv)")
    p.add_argument("--threads", type=int, default=d, help="worker threads (default QUENCH_LDT_THREADS or cpus)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quench-ldt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_rate = sub.add_parser("rate", help="rate function r(w) of a single quench")
    _add_common(p_rate)

    p_sweep = sub.add_parser("sweep", help="r along a lambda, time or work-density grid")
    _add_common(p_sweep)
    d = argparse.SUPPRESS
    p_sweep.add_argument("--lambda-grid", default=d, help="'default', start:stop:step, or a comma list")
    p_sweep.add_argument("--time-grid", default=d, help="'default' (log then linear), start:stop:step, or list")
    p_sweep.add_argument("--w-grid", default=d, help="start:stop:step or a comma list")
    p_sweep.add_argument("--quench-offset", type=float, default=d,
                         help="lambda sweeps: keep lambda' = lambda + offset")
    p_sweep.add_argument("--detect-kinks", action="store_true", default=d, help="write <output>.kinks.json")
    p_sweep.add_argument("--threshold", type=float, default=d, help="kink threshold (default 20x median jump)")

    p_fig = sub.add_parser("figure", help="rerun a published parameter set")
    p_fig.add_argument("figure_id", help=f"one of {', '.join(sorted(FIGURES))}")
    p_fig.add_argument("--config", help="manifest JSON or INI of figure parameters")
    p_fig.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a figure parameter (JSON value), repeatable")
    p_fig.add_argument("--output", "-o", default="figure_out", help="output directory")
    p_fig.add_argument("--format", choices=["csv", "json"], default="csv")
    p_fig.add_argument("--threads", type=int, default=None)
    return parser


def _figure_overrides(args) -> tuple[str, dict]:
    figure_id = args.figure_id
    overrides = {}
    if args.config:
        allowed = set(FIGURES.get(figure_id, {})) | {"panels", "order", "kink_threshold"}
        text = Path(args.config).read_text() if Path(args.config).exists() else ""
        if text.lstrip().startswith("{"):
            try:
                manifest = json.loads(text)
            except json.JSONDecodeError as exc:
                raise UsageError(f"--config: invalid JSON: {exc}") from None
            if manifest.get("figure_id", figure_id) != figure_id:
                raise UsageError(f"--config manifest is for {manifest['figure_id']}, not {figure_id}")
        raw = read_config(args.config, allowed)
        base = FIGURES.get(figure_id, {})
        for key, val in raw.items():
            if isinstance(val, str) and not isinstance(base.get(key), str):
                try:
                    val = json.loads(val)
                except json.JSONDecodeError:
                    raise UsageError(f"--config: {key} is not valid JSON: {val!r}") from None
            overrides[key] = val
    for item in args.set:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            overrides[key.strip()] = json.loads(val)
        except json.JSONDecodeError:
            overrides[key.strip()] = val
    return figure_id, overrides


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "figure":
            figure_id, overrides = _figure_overrides(args)
            return cmd_figure(figure_id, overrides, args.output, args.format, args.threads)
        values = {}
        if getattr(args, "config", None):
            values.update({k: _coerce(k, v) for k, v in read_config(args.config).items()})
        values.update({k: v for k, v in vars(args).items() if k not in ("command", "config")})
        cfg = RunConfig(**values)
        return cmd_rate(cfg) if args.command == "rate" else cmd_sweep(cfg)
    except UsageError as exc:
        parser.exit(2, f"quench-ldt: error: {exc}\n")
    except (QuadratureError, ResolutionError, ArithmeticError) as exc:
        print(f"quench-ldt: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
