"""Command line: collar, triangle, flipflop, surface and verify.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration
error, 3 internal error (a traceback is written to ``collarkit-trace.txt``
in the output directory, or the working directory without ``--out``).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import sys
import traceback
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import verify
from .collar import CollarVariant, cactus_loop_bound, collar_distance_bound, collar_width_bound, intersection_bound
from .comparison import (
    OpenTriangleConfig,
    asymptotic_config,
    compare_right_hypotenuse,
    compare_right_leg_angle,
    compare_right_legs,
    compare_right_opposite,
    flip_flop_bounds,
    run_flip_flop,
    toponogov_a,
    toponogov_b,
    ultraparallel_config,
)
from .distfield import (
    COMPACT,
    classify_types,
    curves_csv,
    level_curves,
    lipschitz_check,
    mask_pgm,
    measured_collar_width,
    omega_curve,
    solve_eikonal,
    sweep_svg,
    thin_cylinder_check,
)
from .distfield.export import check_line, fmt, report_lines, write_text
from .distfield.topology import lambda_thin, sweep_levels
from .hypcore import HypDomainError, solve_right_triangle
from .surface import (
    Bump,
    FermiMetric,
    bump_metric,
    cactus_metric,
    cactus_suite,
    collar_suite,
    constant_curvature,
    curvature_lower_bound,
    flat_cylinder,
    gentle_suite,
    presets,
    waisted_metric,
)

TRACE_FILE = "collarkit-trace.txt"


class ConfigError(ValueError):
    pass


class UsageError(ValueError):
    pass


# --- configuration -------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    metric: FermiMetric | None = None
    n_r: int = 512
    n_theta: int = 256
    step: float | None = None  # level sweep step, hR/2 when unset
    tol: float = 1.0
    seed: int = 0
    out: Path | None = None
    svg_curves: int = 40
    lipschitz_levels: tuple = (1.2, 2.4)
    flipflop: OpenTriangleConfig | None = None


FLIPFLOP_PRESETS = {
    "symmetric": lambda: OpenTriangleConfig(2.0, 1.3, 1.3, "symmetric"),
    "parallel-rays": lambda: asymptotic_config(1.0, 1.0),
    "divergent-rays": lambda: ultraparallel_config(1.7, 1.2, 0.1, "divergent"),
}

EXPERIMENT_KEYS = {"n_r", "n_theta", "step", "tol", "seed", "out", "svg_curves", "lipschitz_levels"}
METRIC_KEYS = {
    "preset": {"name"},
    "suite": {"name"},
    "constant": {"k", "length", "r_max"},
    "flat": {"length", "r_max"},
    "bump": {"k", "length", "r_max", "modulation", "bumps"},
    "cactus": {"k", "length", "r_max", "arms"},
    "waisted": {"length", "depth", "r0", "width", "r_max"},
}


def _num(sec, key, default=None, cast=float):
    if key not in sec:
        if default is None:
            raise ConfigError(f"[{sec.name}] missing key {key!r}")
        return default
    try:
        v = cast(sec[key])
    except ValueError:
        raise ConfigError(f"[{sec.name}] {key} = {sec[key]!r} is not a valid {cast.__name__}") from None
    if cast is float and not math.isfinite(v):
        raise ConfigError(f"[{sec.name}] {key} must be finite")
    return v


def _rows(text: str, width: tuple, key: str):
    out = []
    for chunk in text.split(";"):
        parts = chunk.split()
        if not parts:
            continue
        if len(parts) not in width:
            raise ConfigError(f"each entry of {key} needs {' or '.join(map(str, width))} numbers, got {chunk!r}")
        try:
            out.append([float(p) for p in parts])
        except ValueError:
            raise ConfigError(f"non-numeric entry in {key}: {chunk!r}") from None
    if not out:
        raise ConfigError(f"{key} is empty")
    return out


def named_metrics() -> dict:
    return {**presets(), **gentle_suite(), **cactus_suite(), **collar_suite()}


def parse_metric(sec) -> FermiMetric:
    kind = sec.get("kind")
    if kind not in METRIC_KEYS:
        raise ConfigError(f"[metric] kind must be one of {', '.join(METRIC_KEYS)}, got {kind!r}")
    unknown = set(sec) - METRIC_KEYS[kind] - {"kind"}
    if unknown:
        raise ConfigError(f"[metric] unknown keys for kind {kind}: {', '.join(sorted(unknown))}")
    if kind in ("preset", "suite"):
        table = presets() if kind == "preset" else named_metrics()
        name = sec.get("name")
        if name not in table:
            raise ConfigError(f"[metric] unknown {kind} {name!r}; known: {', '.join(table)}")
        return table[name]
    L = _num(sec, "length")
    r_max = _num(sec, "r_max", 4.0)
    if not (L > 0.0 and r_max > 0.0):
        raise ConfigError("[metric] length and r_max must be positive")
    if kind == "constant":
        return constant_curvature(_num(sec, "k"), L, r_max)
    if kind == "flat":
        return flat_cylinder(L, r_max)
    if kind == "waisted":
        depth = _num(sec, "depth")
        if not 0.0 <= depth < 1.0:
            raise ConfigError("[metric] depth must lie in [0, 1)")
        return waisted_metric(L, depth, _num(sec, "r0"), _num(sec, "width"), r_max)
    if kind == "cactus":
        arms = [tuple(a) for a in _rows(sec.get("arms", ""), (4,), "arms")]
        return cactus_metric(L, arms, _num(sec, "k", 0.5), r_max)
    # bump: r0 sr t0 st amp_a amp_g, or r0 sr amp_a amp_g for a ring
    bumps = []
    for b in _rows(sec.get("bumps", ""), (4, 6), "bumps"):
        bumps.append(Bump(b[0], b[1], amp_a=b[2], amp_g=b[3]) if len(b) == 4 else Bump(*b))
    return bump_metric(_num(sec, "k"), L, bumps, r_max, _num(sec, "modulation", 0.0))


def load_config(path: Path | None) -> ExperimentConfig:
    """Read and validate a config file; every value is checked before any computation starts."""
    if path is None:
        return ExperimentConfig()
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    except configparser.Error as e:
        raise ConfigError(f"malformed config {path}: {e}") from None
    unknown = set(cp.sections()) - {"experiment", "metric", "flipflop"}
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    kw = {}
    if cp.has_section("experiment"):
        sec = cp["experiment"]
        bad = set(sec) - EXPERIMENT_KEYS
        if bad:
            raise ConfigError(f"[experiment] unknown keys: {', '.join(sorted(bad))}")
        kw["n_r"] = _num(sec, "n_r", 512, int)
        kw["n_theta"] = _num(sec, "n_theta", 256, int)
        if kw["n_r"] < 64 or kw["n_theta"] < 64:
            raise ConfigError("[experiment] n_r and n_theta must be at least 64")
        if "step" in sec:
            kw["step"] = _num(sec, "step")
            if not kw["step"] > 0.0:
                raise ConfigError("[experiment] step must be positive")
        kw["tol"] = _num(sec, "tol", 1.0)
        if not kw["tol"] > 0.0:
            raise ConfigError("[experiment] tol must be positive")
        kw["seed"] = _num(sec, "seed", 0, int)
        kw["svg_curves"] = _num(sec, "svg_curves", 40, int)
        if "out" in sec:
            kw["out"] = Path(sec["out"])
        if "lipschitz_levels" in sec:
            try:
                kw["lipschitz_levels"] = tuple(float(x) for x in sec["lipschitz_levels"].split())
            except ValueError:
                raise ConfigError("[experiment] lipschitz_levels must be numbers") from None
    if cp.has_section("metric"):
        try:
            kw["metric"] = parse_metric(cp["metric"])
        except HypDomainError as e:
            raise ConfigError(f"[metric] {e}") from None
    if cp.has_section("flipflop"):
        sec = cp["flipflop"]
        bad = set(sec) - {"a_len", "angle_q", "angle_r", "label"}
        if bad:
            raise ConfigError(f"[flipflop] unknown keys: {', '.join(sorted(bad))}")
        cfg = OpenTriangleConfig(_num(sec, "a_len"), _num(sec, "angle_q"), _num(sec, "angle_r"),
                                 sec.get("label", "config"))
        if not (cfg.a_len > 0.0 and 0.0 < cfg.angle_q < 0.5 * math.pi and 0.0 < cfg.angle_r < 0.5 * math.pi):
            raise ConfigError("[flipflop] need a_len > 0 and acute angles")
        kw["flipflop"] = cfg
    return ExperimentConfig(**kw)


def resolve(args) -> ExperimentConfig:
    """Config file values overridden by the global flags."""
    cfg = load_config(args.config)
    upd = {}
    if args.out is not None:
        upd["out"] = args.out
    if args.seed is not None:
        upd["seed"] = args.seed
    if args.tol is not None:
        if not args.tol > 0.0:
            raise ConfigError("--tol must be positive")
        upd["tol"] = args.tol
    return ExperimentConfig(**{**cfg.__dict__, **upd})


# --- subcommands ---------------------------------------------------------------


def cmd_collar(args, cfg: ExperimentConfig) -> int:
    lg = args.lgamma if args.lgamma is not None else args.length
    L = args.length if args.length is not None else lg
    if L is None:
        raise UsageError("give --length or --lgamma")
    le = args.leta if args.leta is not None else lg
    rep = collar_width_bound(L, args.k, CollarVariant.FULL)
    rec = {"length": L, "k": args.k, "width": rep.width, "width_arccosh_coth": rep.width_acosh_form,
           "width_arcsinh_cosech": rep.width_asinh_form, "lgamma": lg, "leta": le,
           "distance_bound": collar_distance_bound(lg, le, args.k)}
    for v in ("c", "c2", "c3", "c4"):
        res, ok = intersection_bound(lg, le, args.k, v)
        rec[f"residual_{v}"] = res
        rec[f"satisfied_{v}"] = ok
    res, _ = intersection_bound(lg, le, args.k, args.variant)
    rec["variant"] = args.variant
    rec["residual"] = res
    text = "".join(f"{k}={fmt(v)}\n" for k, v in rec.items())
    sys.stdout.write(text)
    if args.csv is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(rec.keys())
        w.writerow([fmt(v) for v in rec.values()])
        write_text(args.csv if cfg.out is None else cfg.out / args.csv, buf.getvalue())
    return 0


def cmd_triangle(args, cfg: ExperimentConfig) -> int:
    given = {k: getattr(args, k) for k in ("a", "b", "c", "alpha", "beta", "gamma") if getattr(args, k) is not None}

    def need(*keys):
        missing = [k for k in keys if k not in given]
        extra = set(given) - set(keys)
        if missing or extra:
            raise UsageError(f"solver {args.solver} takes exactly --{' --'.join(keys)}")
        return [given[k] for k in keys]

    if args.solver == "right":
        if "gamma" in given:
            raise UsageError("the right solver fixes gamma = pi/2")
        t = solve_right_triangle(**given)
        rec = dict(a=t.a, b=t.b, c=t.c, alpha=t.alpha, beta=t.beta, gamma=t.gamma, open_ended=t.open_ended)
    elif args.solver in ("toponogov-a", "toponogov-b"):
        if args.solver == "toponogov-a":
            t = toponogov_a(*need("a", "b", "c"))
        else:
            t = toponogov_b(*need("a", "b", "gamma"))
            t = toponogov_a(t.a, t.b, t.c) if t.c < t.a + t.b else t
        rec = dict(a=t.a, b=t.b, c=t.c, alpha=getattr(t, "alpha", math.nan), beta=getattr(t, "beta", math.nan),
                   gamma=t.gamma)
    else:
        if args.solver == "legs":
            t = compare_right_legs(*need("a", "b"))
        elif args.solver == "leg-angle":
            t = compare_right_leg_angle(*need("a", "beta"))
        elif args.solver == "opposite":
            t = compare_right_opposite(*need("b", "beta"))
        else:
            keys = ("beta", "c") if "c" in given else ("beta", "b")
            beta, x = need(*keys)
            t = compare_right_hypotenuse(beta, **{keys[1]: x})
        rec = dict(a=t.a, b=t.b, c=t.c, alpha=t.alpha, beta=t.beta, gamma=0.5 * math.pi, open_ended=t.open_ended)
    sys.stdout.write("".join(f"{k}={fmt(v)}\n" for k, v in rec.items()))
    return 0


def cmd_flipflop(args, cfg: ExperimentConfig) -> int:
    if args.preset is not None:
        tri = FLIPFLOP_PRESETS[args.preset]()
        name = args.preset
    elif cfg.flipflop is not None:
        tri = cfg.flipflop
        name = tri.label
    else:
        raise UsageError("give --preset or a config with a [flipflop] section")
    run = run_flip_flop(tri, max_steps=args.max_steps)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j", "s_j", "phi_j"])
    for s in run.states:
        w.writerow([s.j, fmt(s.s), fmt(s.phi)])
    tol = 1e-9 * cfg.tol
    viol = max((max(rb - phi, cr - phi) for phi, rb, cr in flip_flop_bounds(run)), default=0.0)
    lines = [check_line(f"flipflop-{name}", "pass" if run.converged else "fail", run.final_error, 1e-6 * cfg.tol),
             check_line(f"flipflop-{name}-bounds", "pass" if viol <= tol else "fail", viol, tol)]
    status = f"relation={run.relation.value} converged={fmt(run.converged)} steps={len(run.states)}\n"
    status += "".join(x + "\n" for x in lines)
    if cfg.out is None:
        sys.stdout.write(buf.getvalue())
        sys.stderr.write(status)
    else:
        write_text(cfg.out / f"flipflop-{name}.csv", buf.getvalue())
        sys.stdout.write(status)
    return 0 if run.converged and viol <= tol else 1


def _surface_artifacts(m: FermiMetric, cfg: ExperimentConfig):
    """Run the distance-field pipeline; returns (files, report text, failed)."""
    f = solve_eikonal(m, cfg.n_r, cfg.n_theta)
    levels = sweep_levels(f, cfg.step)
    if levels.size == 0:
        raise ConfigError("sweep is empty: the grid is too coarse or rMax too small")
    sweep = [level_curves(f, lv) for lv in levels]
    dec = classify_types(f)
    width = measured_collar_width(f)
    kb = curvature_lower_bound(m)
    lam = cactus_loop_bound(kb.k)
    thin = lambda_thin(f, lam, cfg.step)
    L = m.boundary_length
    records = [
        {"metric": m.name, "boundary_length": L, "r_max": m.r_max, "n_r": cfg.n_r, "n_theta": cfg.n_theta,
         "h_r": f.h_r, "levels": levels.size, "seed": cfg.seed},
        {"k": kb.k, "inf_k": kb.inf_k},
        {"measured_width": width.width, "unbounded": width.unbounded,
         "d_star_is_r_max": width.unbounded, "first_split": width.first_split if width.first_split else math.nan},
        {"arms": len(dec.arms), "trunk_connected": dec.trunk_connected, "sweep_mismatch": dec.sweep_mismatch,
         "absorbed": dec.absorbed},
    ]
    for a in dec.arms:
        records.append({"arm": a.index, "d_a": a.d_a, "peak": a.peak, "cells": a.cells, "area": a.area,
                        "boundary_length": a.boundary.length if a.boundary is not None else math.nan})
    records.append({"lambda": lam, "thin": thin.is_thin, "worst_level": thin.worst_level,
                    "worst_length": thin.worst_length, "min_level": thin.min_level, "min_length": thin.min_length})
    checks = []
    bound = collar_width_bound(L, kb.k).width - 3.0 * f.h_r * cfg.tol
    checks.append(("collar-width", verify.width_status(width, bound, m.r_max), width.width, bound))
    top = float(levels[-1])
    for lv in cfg.lipschitz_levels:
        if not lv <= top:
            checks.append((f"lipschitz-{fmt(lv)}", "inapplicable", math.nan, 1.3 * cfg.tol))
            continue
        om = omega_curve(level_curves(f, lv))
        if om is None:
            checks.append((f"lipschitz-{fmt(lv)}", "unverified", math.nan, 1.3 * cfg.tol))
            continue
        rep = lipschitz_check(om, m, f)
        checks.append((f"lipschitz-{fmt(lv)}", "pass" if rep.max_ratio <= 1.3 * cfg.tol else "fail",
                       rep.max_ratio, 1.3 * cfg.tol))
        checks.append((f"tangent-{fmt(lv)}", "pass" if rep.tangent.median_error < 0.05 * cfg.tol else "fail",
                       rep.tangent.median_error, 0.05 * cfg.tol))
    tc = thin_cylinder_check(m, cfg.n_r, cfg.n_theta, cfg.step, field_=f)
    checks.append(("thin-cylinder", tc.status, tc.worst_length, tc.loop_bound))
    report = report_lines(records) + "".join(check_line(*c) + "\n" for c in checks)
    files = {"report.txt": report}
    files["curves.csv"] = curves_csv([c for cs in sweep for c in cs], L)
    pick = np.unique(np.linspace(0, levels.size - 1, min(cfg.svg_curves, levels.size)).astype(int))
    drawn = [c for i in pick for c in sweep[i]]
    files["sweep.svg"] = sweep_svg(drawn, L, m.r_max, dec.labels)
    files["arms.pgm"] = mask_pgm(dec.labels, f"{m.name}: 0 trunk, i arm i")
    files["distance.pgm"] = mask_pgm(np.rint(255.0 * f.d / max(float(f.d.max()), 1e-300)).astype(int),
                                     f"{m.name}: distance scaled to 0..255")
    compact = sum(c.component_class == COMPACT for cs in sweep for c in cs)
    files["report.txt"] += f"compact_curves={compact}\n"
    return files, report, any(c[1] == "fail" for c in checks)


def cmd_surface(args, cfg: ExperimentConfig) -> int:
    m = cfg.metric
    if args.preset is not None:
        m = presets()[args.preset]
    if m is None:
        raise UsageError("give --preset or a config with a [metric] section")
    if cfg.out is None:
        raise UsageError("surface writes files: give --out DIR or out = DIR in [experiment]")
    files, _, failed = _surface_artifacts(m, cfg)
    for name, text in files.items():
        write_text(cfg.out / name, text)
    sys.stdout.write(files["report.txt"])
    return 1 if failed else 0


def cmd_verify(args, cfg: ExperimentConfig) -> int:
    only = args.only or None
    if only:
        unknown = [n for n in only if n not in verify.BY_NAME]
        if unknown:
            raise UsageError(f"unknown check(s) {', '.join(unknown)}; known: {', '.join(verify.BY_NAME)}")

    def progress(c, res):
        if args.timing:
            sys.stderr.write(f"{c.name}: {verify.aggregate(res)} in {res[0].runtime:.2f}s\n")

    rep = verify.run_suite(only, cfg.seed, cfg.tol, progress)
    text = rep.text()
    sys.stdout.write(text)
    if cfg.out is not None:
        write_text(cfg.out / "verify-report.txt", text)
        write_text(cfg.out / "verify-table.txt", rep.table())
    return rep.exit_code


# --- entry point ---------------------------------------------------------------


def _positive(x: str) -> float:
    v = float(x)
    if not (v > 0.0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"{x} must be a positive number")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=argparse.SUPPRESS, help="experiment config file")
    common.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="multiplier on every check tolerance")
    p = argparse.ArgumentParser(prog="collarkit", parents=[common],
                                description="Collar bounds, comparison triangles and distance-field experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("collar", parents=[common], help="collar width, distance and intersection bounds")
    c.add_argument("--k", type=_positive, default=1.0, help="curvature scale, K >= -k^2")
    c.add_argument("--length", type=_positive, help="length of the closed geodesic")
    c.add_argument("--variant", choices=("c", "c2", "c3", "c4"), default="c")
    c.add_argument("--lgamma", type=_positive, help="length of the first intersecting geodesic")
    c.add_argument("--leta", type=_positive, help="length of the second intersecting geodesic")
    c.add_argument("--csv", type=Path, help="also write the numbers as a one-row CSV")

    t = sub.add_parser("triangle", parents=[common], help="model-plane comparison triangles")
    t.add_argument("--solver", required=True,
                   choices=("right", "legs", "leg-angle", "opposite", "hypotenuse", "toponogov-a", "toponogov-b"))
    for k in ("a", "b", "c", "alpha", "beta", "gamma"):
        t.add_argument(f"--{k}", type=float)

    f = sub.add_parser("flipflop", parents=[common], help="flip-flop iteration table")
    f.add_argument("--preset", choices=tuple(FLIPFLOP_PRESETS))
    f.add_argument("--max-steps", type=int, default=20_000)

    s = sub.add_parser("surface", parents=[common], help="distance-field pipeline on one metric")
    s.add_argument("--preset", choices=tuple(presets()))

    v = sub.add_parser("verify", parents=[common], help="acceptance suite")
    v.add_argument("--only", nargs="+", metavar="NAME", help=f"subset of: {', '.join(verify.BY_NAME)}")
    v.add_argument("--timing", action="store_true", help="runtimes on stderr")
    return p


COMMANDS = {"collar": cmd_collar, "triangle": cmd_triangle, "flipflop": cmd_flipflop, "surface": cmd_surface,
            "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for k in ("config", "out", "seed", "tol"):
        if not hasattr(args, k):
            setattr(args, k, None)
    out = args.out
    try:
        cfg = resolve(args)
        out = cfg.out
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, UsageError, HypDomainError) as e:
        sys.stderr.write(f"collarkit {args.command}: error: {e}\n")
        return 2
    except Exception:
        path = (out if out is not None else Path.cwd()) / TRACE_FILE
        try:
            write_text(path, traceback.format_exc())
        except OSError:
            path = None
        sys.stderr.write(f"collarkit {args.command}: internal error" + (f", trace in {path}\n" if path else "\n"))
        return 3


if __name__ == "__main__":
    sys.exit(main())
