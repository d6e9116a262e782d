"""Command-line driver.

Every subcommand writes into ``--out`` (a directory, or a CSV file for
``forward``) and records the fully resolved arguments in ``config.json`` so a
run can be repeated exactly. Exit codes: 0 success, 1 failed verification,
2 usage error, 3 input/output error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .crofton import CroftonSampler, alpha_n
from .geometry import HalfSpace, sample_sphere, sphere_area
from .gridio import load_measure, write_grid, write_report
from .inversion import c_const, reconstruct, reconstruct_even, relative_errors
from .measures import (DiscreteMeasure, GaussianMixture, GridDensity, GridSpec, make_query,
                       query_total)
from .oracles import constant_identity, constant_identity_radial, crofton_normalization_check
from .potential import potential_direct, potential_grid
from .radon import OffsetGrid, radon_forward, radon_invert_grid

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

FIXTURES = ("gaussian", "delta", "two-point", "two-gaussians")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


def fixture_measure(name: str, dim: int):
    """Built-in test measures. ``gaussian`` is the analytic standard normal."""
    e1 = np.eye(dim)[0]
    if name == "gaussian":
        return GaussianMixture.standard(dim)
    if name == "delta":
        return DiscreteMeasure.delta(np.zeros(dim))
    if name == "two-point":
        return DiscreteMeasure(np.stack([e1, -e1]), [0.5, 0.5])
    if name == "two-gaussians":
        return GaussianMixture(np.stack([1.5 * e1, -1.5 * e1]), [0.6, 0.6], [0.5, 0.5])
    raise UsageError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")


def _measure(args):
    if args.measure and args.fixture:
        raise UsageError("give either --measure or --fixture, not both")
    if args.measure:
        try:
            mu = load_measure(args.measure)
        except (OSError, ValueError) as exc:
            raise InputError(str(exc)) from None
        if args.dim is not None and args.dim != mu.dim:
            raise UsageError(f"--dim {args.dim} but {args.measure} is {mu.dim}-dimensional")
        return mu
    if args.fixture:
        if args.dim is None:
            raise UsageError("--fixture needs --dim")
        return fixture_measure(args.fixture, args.dim)
    raise UsageError("an input measure is required (--measure or --fixture)")


def _grid(args, dim: int) -> GridSpec:
    lo, hi = args.bounds
    return GridSpec.from_bounds([(lo, hi)] * dim, args.h)


def _bounds(text: str):
    # A single number R means [-R, R]; it also sidesteps argparse reading "-6,6" as a flag.
    try:
        vals = [float(v) for v in text.split(",")]
        lo, hi = (-abs(vals[0]), abs(vals[0])) if len(vals) == 1 else vals
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI or R, got {text!r}") from None
    if not hi > lo:
        raise argparse.ArgumentTypeError(f"empty bounds {text!r}")
    return lo, hi


def _truth(mu):
    return mu.density if isinstance(mu, GaussianMixture) else None


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_config(out: Path, args) -> None:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    cfg["version"] = __version__
    _write_json(out / "config.json", cfg)


def _fmt(v) -> str:
    return repr(float(v))


def write_slices(grid: GridDensity, out: Path, name: str, truth=None) -> None:
    """1-D slice along the first axis and, in 2+ dimensions, a 2-D slice in the first two axes.

    Both pass through the middle node of the remaining axes. The 2-D slice is
    written as CSV and as a binary PGM scaled from its minimum to its maximum.
    """
    mid = [s // 2 for s in grid.shape]
    axes = grid.axes()
    line = grid.values[(slice(None), *mid[1:])]
    pts = np.zeros((grid.shape[0], grid.dim))
    pts[:, 0] = axes[0]
    for d in range(1, grid.dim):
        pts[:, d] = axes[d][mid[d]]
    ref = None if truth is None else truth(pts)
    with open(out / f"{name}_slice_x.csv", "w", encoding="utf-8") as fh:
        fh.write("x,value" + (",truth" if ref is not None else "") + "\n")
        for i, x in enumerate(axes[0]):
            row = [x, line[i]] + ([ref[i]] if ref is not None else [])
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    if grid.dim < 2:
        return
    plane = grid.values[(slice(None), slice(None), *mid[2:])]
    with open(out / f"{name}_slice_xy.csv", "w", encoding="utf-8") as fh:
        fh.write("x,y,value\n")
        for i, x in enumerate(axes[0]):
            for j, y in enumerate(axes[1]):
                fh.write(f"{_fmt(x)},{_fmt(y)},{_fmt(plane[i, j])}\n")
    lo, hi = float(plane.min()), float(plane.max())
    scaled = np.zeros(plane.shape) if hi == lo else (plane - lo) / (hi - lo)
    img = np.rint(255 * scaled).astype(np.uint8)
    # Rows of the image run along y (top = largest y), columns along x.
    img = img.T[::-1]
    with open(out / f"{name}_slice_xy.pgm", "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def _read_halfspaces(path, dim: int):
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#") or line[0].isalpha():
                continue
            vals = [float(tok) for tok in line.split(",")]
            if len(vals) != dim + 1:
                raise ValueError(f"{path}:{lineno}: expected {dim} normal coordinates and an offset")
            rows.append(HalfSpace(vals[:-1], vals[-1]))
    return rows


def cmd_forward(args) -> int:
    mu = _measure(args)
    n = mu.dim
    if args.halfspaces:
        try:
            spaces = _read_halfspaces(args.halfspaces, n)
        except (OSError, ValueError) as exc:
            raise InputError(str(exc)) from None
    else:
        omegas = sample_sphere(n, args.random, np.random.SeedSequence(args.seed, spawn_key=(0,)))
        offsets = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(1,))).uniform(
            -args.offset_range, args.offset_range, args.random)
        spaces = [HalfSpace(w, p) for w, p in zip(omegas, offsets)]
    query = make_query(mu)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(",".join([f"omega{i + 1}" for i in range(n)] + ["p", "mass"]) + "\n")
        for S in spaces:
            fh.write(",".join(_fmt(v) for v in (*S.omega, S.p, query(S))) + "\n")
    _write_json(out.with_name(out.name + ".config.json"),
                {k: v for k, v in sorted(vars(args).items()) if k != "func"})
    return EXIT_OK


def cmd_potential(args) -> int:
    mu = _measure(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_config(out, args)
    spec = _grid(args, mu.dim)
    sampler = CroftonSampler(mu.dim, args.samples, args.seed)
    query = make_query(mu)
    field_ = potential_grid(query, query_total(query), spec, sampler)
    write_grid(field_.grid, out / "potential")
    write_grid(field_.grid.with_values(field_.mc_error), out / "potential_stderr")
    meta = {"samples": args.samples, "seeds": [args.seed], "max_stderr": float(field_.mc_error.max())}
    if not isinstance(mu, GaussianMixture):
        direct = potential_direct(mu, spec.nodes()).reshape(spec.shape)
        write_grid(field_.grid.with_values(direct), out / "potential_direct")
        meta["max_abs_difference"] = float(np.abs(direct - field_.grid.values).max())
    _write_json(out / "potential.meta.json", meta)
    write_slices(field_.grid, out, "potential")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    mu = _measure(args)
    n = mu.dim
    if args.embed:
        if n % 2:
            raise UsageError(f"--embed lifts even dimensions; the measure is {n}-dimensional")
        m = n // 2 + 1
    else:
        if n % 2 == 0:
            raise UsageError(f"dimension {n} is even; pass --embed to reconstruct through R^{n + 1}")
        m = (n + 1) // 2
    if args.m is not None and args.m != m:
        raise UsageError(f"--m {args.m} is inconsistent with dimension {n} (need m = {m})")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_config(out, args)
    spec = _grid(args, n)
    query = make_query(mu)
    total = query_total(query)
    truth = _truth(mu)
    if args.embed:
        sampler = CroftonSampler(n + 1, args.samples, args.seed)
        report = reconstruct_even(query, total, spec, sampler, z_cells=args.z_cells,
                                  mollify_width=args.mollify, truth=truth)
    else:
        sampler = CroftonSampler(n, args.samples, args.seed)
        report = reconstruct(query, total, spec, sampler, m, args.mollify, truth)
    extra = {"query_total_mass": total}
    if truth is not None and args.embed:
        ref = truth(report.density.nodes())
        extra["correlation"] = float(np.corrcoef(ref, report.density.values.reshape(-1))[0, 1])
    write_report(report, out / "reconstruction", extra)
    if report.volume is not None:
        write_grid(report.volume, out / "reconstruction_lifted")
    write_slices(report.density, out, "reconstruction", truth)
    return EXIT_OK


def cmd_radon(args) -> int:
    mu = _measure(args)
    n = mu.dim
    spec = _grid(args, n)
    if isinstance(mu, GaussianMixture):
        mu = mu.to_grid(spec)
    if not isinstance(mu, GridDensity):
        raise UsageError("the Radon transform needs a density (grid file or Gaussian fixture)")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_config(out, args)
    dirs = sample_sphere(n, args.samples, np.random.SeedSequence(args.seed)) if n > 1 else np.array([[1.0], [-1.0]])
    dp = args.dp if args.dp else 2 * mu.h
    pmax = float(np.linalg.norm(mu.nodes(), axis=1).max()) + dp
    sino = radon_forward(mu, dirs, OffsetGrid.symmetric(pmax, dp), args.assignment)
    sino.save(out / "sinogram.txt")
    meta = {"directions": int(dirs.shape[0]), "dp": dp, "seeds": [args.seed],
            "max_mass_residual": float(np.abs(sino.masses() - mu.total_mass()).max())}
    if n % 2:
        rec = radon_invert_grid(sino, spec)
        write_grid(rec, out / "radon_inverse")
        write_slices(rec, out, "radon_inverse")
        l1, linf = relative_errors(rec, lambda x: mu.values.reshape(-1)) if rec.shape == mu.shape else (None, None)
        meta["errors"] = {"l1": l1, "linf": linf}
    _write_json(out / "radon.meta.json", meta)
    return EXIT_OK


def _check(rows, name, residual, tol):
    ok = bool(residual <= tol)
    rows.append((name, residual, tol, ok))
    return ok


def cmd_verify(args) -> int:
    rows = []
    est = crofton_normalization_check(3, vectors=args.vectors, samples=args.samples, seed=args.seed)
    _check(rows, "crofton n=3 max |sep(0,u) - 1|", max(abs(v - 1.0) for v, _ in est), 0.01)
    z = max(abs(v - 1.0) / s for v, s in est)
    _check(rows, "crofton n=3 max standard score", z, 4.0)
    for m in (1, 2):
        lhs, rhs = constant_identity_radial(m)
        _check(rows, f"c_{m} radial identity relative residual", abs(lhs / rhs - 1.0), 1e-9)
    x = np.array([0.3, 0.1, -0.2])
    lhs, rhs = constant_identity(2, x, points=args.oracle_points)
    _check(rows, "c_2 grid identity relative residual", abs(lhs / rhs - 1.0), 0.01)
    g = GaussianMixture.standard(3).to_grid(GridSpec.cell_centered([(-4.5, 4.5)] * 3, 0.0625))
    dirs = sample_sphere(3, 16, np.random.SeedSequence(args.seed, spawn_key=(7,)))
    sino = radon_forward(g, dirs, OffsetGrid.symmetric(8.0, 0.0625))
    ps = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(8,))).uniform(-3, 3, (16, 50))
    resid = np.abs(sino.tail_masses(ps) - g.halfspace_masses(dirs, ps)).max()
    _check(rows, "cumulative Radon vs half-space mass", resid, 1e-3)
    out_lines = ["check,residual,tolerance,status"]
    out_lines += [f"{name},{res:.6g},{tol:g},{'PASS' if ok else 'FAIL'}" for name, res, tol, ok in rows]
    text = "\n".join(out_lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_config(out, args)
        (out / "verify.csv").write_text(text, encoding="utf-8")
    return EXIT_OK if all(r[3] for r in rows) else EXIT_VERIFY


def cmd_constants(args) -> int:
    lines = ["n,beta_n_minus_1,alpha_n,m,c_m"]
    for n in range(1, args.dim + 1):
        alpha = 0.5 if n == 1 else alpha_n(n)
        m = (n + 1) // 2 if n % 2 else ""
        cm = _fmt(c_const(m)) if m else ""
        lines.append(f"{n},{_fmt(sphere_area(n - 1))},{_fmt(alpha)},{m},{cm}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cramerwold",
                                     description="Recover measures from half-space masses.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=True, sampling=True):
        p.add_argument("--measure", help="weight,x1,...,xn text file or grid .json header")
        p.add_argument("--fixture", choices=FIXTURES, help="built-in measure instead of --measure")
        p.add_argument("--dim", type=int, help="dimension (required with --fixture)")
        if grid:
            p.add_argument("--bounds", type=_bounds, default=(-4.0, 4.0), help="LO,HI on every axis, or R for -R,R (write --bounds=-6,6 for a negative LO)")
            p.add_argument("--h", type=float, default=0.25, help="grid spacing")
        if sampling:
            p.add_argument("--samples", type=int, default=20_000, help="direction samples")
            p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1,
                       help="parallelism cap; results do not depend on it")

    p = sub.add_parser("forward", help="half-space masses of a measure")
    common(p, grid=False, sampling=False)
    p.add_argument("--halfspaces", help="CSV of omega1,...,omegan,p rows")
    p.add_argument("--random", type=int, default=100, help="random half-spaces if --halfspaces is absent")
    p.add_argument("--offset-range", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("potential", help="distance potential from half-space masses")
    common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("reconstruct", help="measure from half-space masses")
    common(p)
    p.add_argument("--m", type=int, help="number of Laplacians (checked against the dimension)")
    p.add_argument("--mollify", type=float, default=None, help="post-smoothing width in cells")
    p.add_argument("--embed", action="store_true", help="lift an even-dimensional measure one dimension up")
    p.add_argument("--z-cells", type=int, default=4, help="half-thickness of the lifted slab in cells")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("radon", help="sinogram and odd-dimensional Radon inversion")
    common(p)
    p.add_argument("--dp", type=float, default=None, help="offset bin width (default 2h)")
    p.add_argument("--assignment", choices=("nearest", "linear"), default="linear")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_radon)

    p = sub.add_parser("verify", help="check the identities the pipeline rests on")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--vectors", type=int, default=20)
    p.add_argument("--oracle-points", type=int, default=65)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("constants", help="table of sphere areas, alpha_n and c_m")
    p.add_argument("--dim", type=int, default=7)
    p.add_argument("--out")
    p.set_defaults(func=cmd_constants)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"cramerwold: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, OSError) as exc:
        print(f"cramerwold: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
