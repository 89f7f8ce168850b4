"""Command-line front end.

    skewec density-grid --params demo.ini --grid -3,3,-3,3,61,61 --out grid.csv
    skewec sample       --params demo.ini --n 10000 --seed 1 --out draws.csv
    skewec moments      --params closed_form.ini --method quad --out moments.csv
    skewec verify       --params demo.ini --seed 0 --out battery.csv
    skewec verify       --fuzz 50 --seed 7

Exit codes: 0 success, 1 a check failed, 2 invalid parameters, 3 unsupported case.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, config, verification
from .errors import ParameterError, UnsupportedCaseError
from .moments import MomentReport, moment_report
from .sampler import sec_sample

EXIT_OK, EXIT_CHECK_FAILED, EXIT_BAD_PARAMS, EXIT_UNSUPPORTED = 0, 1, 2, 3


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ParameterError("grid needs x_min < x_max and y_min < y_max")
        if self.nx < 2 or self.ny < 2:
            raise ParameterError("grid needs nx >= 2 and ny >= 2")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(",")
        if len(parts) != 6:
            raise ParameterError("--grid expects xmin,xmax,ymin,ymax,nx,ny")
        try:
            lo = [float(v) for v in parts[:4]]
            nx, ny = int(parts[4]), int(parts[5])
        except ValueError:
            raise ParameterError(f"could not parse --grid {text!r}") from None
        return cls(*lo, nx, ny)

    def axes(self):
        return np.linspace(self.x_min, self.x_max, self.nx), np.linspace(self.y_min, self.y_max, self.ny)


def _fmt(v: float) -> str:
    return repr(float(v))


def _header(command: str, detail: str) -> str:
    return f"# skewec {__version__} {command} {detail}\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(args) -> list[config.ParamSet]:
    return config.load(args.params, args.section)


def _single(args) -> config.ParamSet:
    sets = _load(args)
    if len(sets) != 1:
        names = ", ".join(s.name for s in sets)
        raise ParameterError(f"{args.params} holds several sets ({names}); choose one with --section")
    return sets[0]


def density_grid_text(ps: config.ParamSet, grid: GridSpec) -> str:
    s = ps.to_density()
    xs, ys = grid.axes()
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    f = s.pdf(np.stack([X, Y], axis=-1))
    lines = [_header("density-grid", f"params={ps.name} {ps.describe()} grid={grid.x_min},{grid.x_max},"
                                     f"{grid.y_min},{grid.y_max},{grid.nx},{grid.ny}"),
             "x,y,density\n"]
    # x outer, y inner
    lines.extend(f"{_fmt(x)},{_fmt(y)},{_fmt(v)}\n" for x, y, v in zip(X.ravel(), Y.ravel(), f.ravel()))
    return "".join(lines)


def cmd_density_grid(args) -> int:
    ps = _single(args)
    _emit(density_grid_text(ps, GridSpec.parse(args.grid)), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    ps = _single(args)
    batch = sec_sample(ps.to_density(), args.n, args.seed)
    comment = f"skewec {__version__} sample seed={args.seed} params={ps.name} {ps.describe()} n={args.n}"
    _emit(batch.to_csv(comment), args.out)
    return EXIT_OK


def cmd_moments(args) -> int:
    rows = []
    for ps in _load(args):
        rep: MomentReport = moment_report(ps.to_density(), args.method, n=args.n, seed=args.seed)
        rows.append(rep.csv_row() + "\n")
    text = _header("moments", f"params={args.params} method={args.method} seed={args.seed} n={args.n}")
    _emit(text + MomentReport.HEADER + "\n" + "".join(rows), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.fuzz is not None:
        densities = verification.fuzz_sets(args.fuzz, args.seed)
        source = f"fuzz={args.fuzz}"
    elif args.params:
        densities = [ps.to_density() for ps in _load(args)]
        source = f"params={args.params}"
    else:
        raise ParameterError("verify needs --params or --fuzz")
    if args.negative_control:
        densities = [verification.broken_w(s) for s in densities]
    reports = []
    for s in densities:
        reports.extend(verification.run_battery(s, args.seed))
    header = verification.CheckReport.HEADER + (",runtime_ms" if args.timings else "")
    text = _header("verify", f"{source} seed={args.seed} negative_control={args.negative_control}")
    text += header + "\n" + "".join(r.csv_row(args.timings) + "\n" for r in reports)
    _emit(text, args.out)
    failed = [r for r in reports if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(reports)} checks failed", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skewec", description="Skew-elliptical densities with non-odd modulation.")
    parser.add_argument("--version", action="version", version=f"skewec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, params_required=True):
        p.add_argument("--params", required=params_required, help="parameter file")
        p.add_argument("--section", help="pick one [section] of the parameter file")
        p.add_argument("--out", help="output CSV (default: stdout)")

    p = sub.add_parser("density-grid", help="evaluate the density on a grid")
    common(p)
    p.add_argument("--grid", required=True, help="xmin,xmax,ymin,ymax,nx,ny")
    p.set_defaults(func=cmd_density_grid)

    p = sub.add_parser("sample", help="draw from the density")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("moments", help="E[Y] report")
    common(p)
    p.add_argument("--method", choices=("quad", "closed", "mc"), default="quad")
    p.add_argument("--n", type=int, default=200_000, help="draws for --method mc")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("verify", help="run the check battery")
    common(p, params_required=False)
    p.add_argument("--fuzz", type=int, help="check this many random parameter sets instead")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--negative-control", action="store_true",
                   help="evaluate h at y instead of x; the battery should then fail")
    p.add_argument("--timings", action="store_true", help="add a runtime_ms column (output no longer reproducible)")
    p.set_defaults(func=cmd_verify)
    return parser


def _join_grid(argv: list[str]) -> list[str]:
    # "--grid -3,3,..." would otherwise be read as an unknown option
    out, it = [], iter(argv)
    for a in it:
        out.append(f"--grid={next(it, '')}" if a == "--grid" else a)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_grid(argv))
    try:
        if getattr(args, "n", None) is not None and args.n < 1:
            raise ParameterError("--n must be >= 1")
        return args.func(args)
    except ParameterError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS
    except UnsupportedCaseError as exc:
        print(f"unsupported case: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        sys.stderr.close()
        return EXIT_OK
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS


if __name__ == "__main__":
    sys.exit(main())
