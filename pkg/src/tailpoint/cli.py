"""``tailpoint`` command line: analyze, estimate, simulate, sweep, scatter.

Exit codes: 0 success, 2 usage or input error, 3 numeric failure.
Results go to stdout (or ``--output``); diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import _svg
from .delimit import POINTS, Side, report
from .dist import FAMILIES, ParameterError, SpecParseError, parse_spec
from .kde import (
    DataFormatError,
    IntegrationError,
    amise_bandwidth,
    estimate_mode,
    normal_reference_roughness,
    read_data,
    sample_delimiting_points,
)
from .sim import (
    MSE_COLUMNS,
    PRESETS,
    SCATTER_COLUMNS,
    MseStudyConfig,
    SimulationError,
    SweepSpec,
    Target,
    preset,
    rows_to_csv,
    run_mse_studies,
    run_sweep,
    scatter_families,
)

EXIT_USAGE = 2
EXIT_NUMERIC = 3
MIN_ESTIMATE_POINTS = 10


class UsageError(Exception):
    """Bad input that should exit with status 2."""


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text!r}")
    return value


def _finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite, got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailpoint",
        description="Delimiting points between the bulk and the tails of unimodal distributions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_format):
        p.add_argument("--format", choices=("json", "csv"), default=default_format)
        p.add_argument("--output", type=Path, help="write to this file instead of stdout")

    p = sub.add_parser("analyze", help="delimiting points of a parametric distribution")
    p.add_argument("--dist", required=True, help='e.g. "gaussian(mu=0,sigma=1)", "studentt(nu=3)"')
    common(p, "json")

    p = sub.add_parser("estimate", help="sample delimiting points from a data file")
    p.add_argument("--data", required=True, type=Path, help="one number per line, or a one-column CSV")
    p.add_argument("--side", choices=("left", "right", "both"), default="right")
    p.add_argument("--h1", type=_positive_float, help="bandwidth for the first-derivative estimate")
    p.add_argument("--h2", type=_positive_float, help="bandwidth for the second-derivative estimate")
    p.add_argument("--mode", type=_finite_float, help="mode of the data (default: KDE argmax)")
    common(p, "json")

    p = sub.add_parser("simulate", help="Monte Carlo MSE of the sample points for Student-t data")
    p.add_argument("--target", choices=("pinf", "pmconv", "both"), default="both")
    p.add_argument("--nu", type=_float_list, default=[1.0, 5.0, 100.0], help="comma-separated")
    p.add_argument("--n", type=_int_list, default=[100, 500, 2000], help="comma-separated")
    p.add_argument("--reps", type=int, default=1000, help="replications per cell")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    common(p, "csv")

    p = sub.add_parser("sweep", help="delimiting points across a parameter grid")
    p.add_argument("--preset", help=f"one of: {', '.join(sorted(PRESETS))}")
    p.add_argument("--family", choices=sorted(FAMILIES))
    p.add_argument("--param")
    p.add_argument("--from", dest="start", type=_finite_float)
    p.add_argument("--to", dest="stop", type=_finite_float)
    p.add_argument("--steps", type=int)
    p.add_argument("--log", action="store_true", help="geometric grid")
    p.add_argument("--fixed", default="", help="other parameters, e.g. mu=0,sigma=2")
    p.add_argument("--svg", type=Path, help="also write a line chart")
    common(p, "csv")

    p = sub.add_parser("scatter", help="right-tail cdf values across families")
    p.add_argument("--svg", type=Path, help="also write a scatter chart")
    common(p, "csv")
    return parser


def _emit(args, text: str):
    if args.output is not None:
        args.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_analyze(args):
    try:
        spec = parse_spec(args.dist)
    except (SpecParseError, ParameterError) as exc:
        raise UsageError(str(exc)) from None
    rep = report(spec)
    if args.format == "json":
        return _json(rep.to_dict())
    rows = []
    for side in Side:
        pts = rep.side(side)
        for name in POINTS:
            rows.append(
                {
                    "side": side.value,
                    "point": name,
                    "value": getattr(pts, name),
                    "cdf_at": pts.cdf_at[name],
                    "method": pts.method[name].value,
                }
            )
    return rows_to_csv(rows, ("side", "point", "value", "cdf_at", "method"))


def cmd_estimate(args):
    try:
        data = read_data(args.data)
    except OSError as exc:
        raise UsageError(f"cannot read {args.data}: {exc.strerror or exc}") from None
    except (DataFormatError, UnicodeDecodeError) as exc:
        raise UsageError(f"{args.data}: {exc}") from None
    if data.size < MIN_ESTIMATE_POINTS:
        raise UsageError(
            f"{args.data}: {data.size} observations; at least {MIN_ESTIMATE_POINTS} are needed "
            "to estimate density derivatives"
        )
    sd = float(np.std(data, ddof=1))
    if not sd > 0:
        raise UsageError(f"{args.data}: all observations are equal")

    bandwidths = {}
    for key, r, given in (("h1", 1, args.h1), ("h2", 2, args.h2)):
        if given is not None:
            bandwidths[key] = {"value": given, "provenance": "manual"}
        else:
            h = amise_bandwidth(r, data.size, normal_reference_roughness(r + 2, sd))
            bandwidths[key] = {"value": h, "provenance": "amise-normal-reference"}

    if args.mode is not None:
        mode, mode_source = args.mode, "manual"
        if not data.min() <= mode <= data.max():
            raise UsageError(f"--mode {mode} lies outside the data range [{data.min()}, {data.max()}]")
    else:
        mode, mode_source = estimate_mode(data), "kde-argmax"

    sides = ("left", "right") if args.side == "both" else (args.side,)
    h1, h2 = bandwidths["h1"]["value"], bandwidths["h2"]["value"]
    out = {
        "n": int(data.size),
        "mode_estimate": mode,
        "mode_source": mode_source,
        "bandwidths": bandwidths,
    }
    for side in sides:
        pts = sample_delimiting_points(data, mode, side, h1, h2)
        out[side] = {"pinf_n": pts.pinf_n, "pmconv_n": pts.pmconv_n}
    if args.format == "json":
        return _json(out)
    rows = [
        {
            "side": side,
            "pinf_n": out[side]["pinf_n"],
            "pmconv_n": out[side]["pmconv_n"],
            "h1": h1,
            "h1_provenance": bandwidths["h1"]["provenance"],
            "h2": h2,
            "h2_provenance": bandwidths["h2"]["provenance"],
            "mode_estimate": mode,
            "mode_source": mode_source,
        }
        for side in sides
    ]
    return rows_to_csv(rows, tuple(rows[0]))


def cmd_simulate(args):
    try:
        config = MseStudyConfig(
            tuple(args.nu), tuple(args.n), args.reps, args.seed,
            Target.PINF if args.target == "both" else Target(args.target),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    results = run_mse_studies(config)
    targets = list(Target) if args.target == "both" else [Target(args.target)]
    rows = [row for t in targets for row in results[t].rows()]
    if args.format == "json":
        return _json({"rows": rows})
    return rows_to_csv(rows, MSE_COLUMNS)


def _sweep_spec(args) -> SweepSpec:
    custom = (args.family, args.param, args.start, args.stop, args.steps)
    if args.preset is not None:
        if any(v is not None for v in custom):
            raise UsageError("--preset cannot be combined with --family/--param/--from/--to/--steps")
        try:
            return preset(args.preset)
        except KeyError:
            raise UsageError(
                f"unknown preset {args.preset!r}; available presets: {', '.join(sorted(PRESETS))}"
            ) from None
    if any(v is None for v in custom):
        raise UsageError("give --preset, or all of --family --param --from --to --steps")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    fixed = {}
    for item in filter(None, (t.strip() for t in args.fixed.split(","))):
        key, sep, value = item.partition("=")
        try:
            fixed[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--fixed: expected key=value, got {item!r}") from None
        if not sep:
            raise UsageError(f"--fixed: expected key=value, got {item!r}")
    names = FAMILIES[args.family][0]
    unknown = set(fixed) - set(names)
    if unknown:
        raise UsageError(f"--fixed: unknown key(s) {sorted(unknown)}; accepted: {list(names)}")
    if args.log:
        if args.start <= 0 or args.stop <= 0:
            raise UsageError("--log needs positive --from and --to")
        grid = np.geomspace(args.start, args.stop, args.steps)
    else:
        grid = np.linspace(args.start, args.stop, args.steps)
    try:
        return SweepSpec(args.family, args.param, tuple(grid.tolist()), fixed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_sweep(args):
    spec = _sweep_spec(args)
    rows = run_sweep(spec)
    if args.svg is not None:
        series = {k: [r.get(k) for r in rows] for k in ("pinf_r", "pmconv_r", "pmcurv_r", "q95")}
        series = {k: v for k, v in series.items() if any(x is not None for x in v)}
        title = f"{spec.family}: right-tail points vs {spec.param}"
        if spec.param2 is None:
            x = [r["param_value"] for r in rows]
            args.svg.write_text(_svg.line_chart(x, series, title, spec.param), encoding="utf-8")
        else:
            # one curve per first-parameter value is unreadable; plot the slice at the middle of grid2
            mid = spec.grid2[len(spec.grid2) // 2]
            keep = [i for i, r in enumerate(rows) if r["param2_value"] == mid]
            x = [rows[i]["param_value"] for i in keep]
            sliced = {k: [v[i] for i in keep] for k, v in series.items()}
            args.svg.write_text(
                _svg.line_chart(x, sliced, f"{title} ({spec.param2}={mid:g})", spec.param),
                encoding="utf-8",
            )
    if args.format == "json":
        return _json({"columns": list(spec.columns), "rows": rows})
    return rows_to_csv(rows, spec.columns)


def cmd_scatter(args):
    rows = scatter_families()
    if args.svg is not None:
        pts = [(r["label"], r["cdf_pmconv_r"], r["cdf_pmcurv_r"]) for r in rows]
        args.svg.write_text(
            _svg.scatter_chart(pts, "cdf at PMCurv_r vs cdf at PMConv_r", "cdf at PMConv_r"),
            encoding="utf-8",
        )
    if args.format == "json":
        return _json({"rows": rows})
    return rows_to_csv(rows, SCATTER_COLUMNS)


COMMANDS = {
    "analyze": cmd_analyze,
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "scatter": cmd_scatter,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    try:
        text = COMMANDS[args.command](args)
        _emit(args, text)
    except UsageError as exc:
        print(f"tailpoint {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"tailpoint {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IntegrationError, SimulationError, ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"tailpoint {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
