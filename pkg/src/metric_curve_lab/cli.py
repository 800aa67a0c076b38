"""Command line front end: ``metric-curve-lab <subcommand> [options]``.

Exit status is 0 for a clean run, 2 when the run finished but emitted
warnings, and 1 on error.
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import dataclass, field

from . import formats
from .delaunay import voronoi_diagram
from .errors import CurveLabError, CurveLabWarning
from .parallel import thread_count
from .poly2 import BUTTERFLY, Poly2, parse_poly
from .sampler import BoundingBox, epsilon_sample, sample_with_count

EXIT_OK, EXIT_ERROR, EXIT_WARN = 0, 1, 2
DEFAULT_EPS = 0.05
COMMANDS = ("sample", "voronoi", "features", "solve", "reach", "converge", "render")


@dataclass
class RunConfig:
    command: str
    curve: Poly2
    box: BoundingBox
    epsilon: float | None = None
    points: int | None = None
    singular: tuple = ()
    delta: float | None = None
    out: str | None = None
    format: str = "json"
    layers: tuple = ("curve", "voronoi")
    seed_grid: int = 64
    halvings: int = 4
    probes: tuple = ()
    extra: dict = field(default_factory=dict)


def _pair(text: str):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y but got {text!r}") from None
    return (x, y)


def _probe(text: str):
    try:
        a, b = text.split(":")
        return (_pair(a), _pair(b))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected px,py:tx,ty but got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--curve", help="polynomial in x and y (default: the butterfly curve)")
    src.add_argument("--curve-file", help="file holding the polynomial")
    common.add_argument("--box", nargs=4, type=float, metavar=("X0", "X1", "Y0", "Y1"),
                        default=(-3.0, 3.0, -3.0, 3.0))
    size = common.add_mutually_exclusive_group()
    size.add_argument("--eps", type=float, help=f"sampling density (default {DEFAULT_EPS})")
    size.add_argument("--points", type=int, help="target sample size; epsilon is found by bisection")
    common.add_argument("--singular", type=_pair, action="append", default=[], metavar="X,Y",
                        help="singular point to include in the sample (repeatable)")
    common.add_argument("--delta", type=float, help="ball radius for local curvature estimates")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--layers", default="curve,voronoi", help="comma-separated render layers")
    common.add_argument("--seed-grid", type=int, default=64, metavar="N",
                        help="grid size for locating curve components")

    p = argparse.ArgumentParser(prog="metric-curve-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "sample": "trace an epsilon-sample of the curve",
        "voronoi": "Voronoi diagram of the sample",
        "features": "long/short edges, medial approximation, bottleneck candidates",
        "solve": "critical-curvature points, bottleneck pairs and singular points",
        "reach": "exact reach and both sample-based estimates",
        "converge": "convergence table over repeated halving of epsilon",
        "render": "SVG drawing of selected layers",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "converge":
            sp.add_argument("--halvings", type=int, default=4)
            sp.add_argument("--probe", type=_probe, action="append", default=[], metavar="PX,PY:TX,TY",
                            help="probe point and the curve point whose cell it measures (repeatable)")
    return p


def make_config(args) -> RunConfig:
    if args.curve_file:
        with open(args.curve_file, encoding="utf-8") as fh:
            text = fh.read().strip()
    else:
        text = args.curve if args.curve is not None else BUTTERFLY
    curve = parse_poly(text)
    box = BoundingBox(*args.box)
    if args.eps is not None and not (args.eps > 0 and math.isfinite(args.eps)):
        raise ValueError("--eps must be a positive number")
    if args.points is not None and args.points < 3:
        raise ValueError("--points must be at least 3")
    if args.seed_grid < 8:
        raise ValueError("--seed-grid must be at least 8")
    if args.delta is not None and not args.delta > 0:
        raise ValueError("--delta must be positive")
    layers = tuple(s.strip() for s in args.layers.split(",") if s.strip())
    from .render import LAYERS

    bad = [name for name in layers if name not in LAYERS]
    if bad:
        raise ValueError(f"unknown layer(s) {bad}; choose from {', '.join(LAYERS)}")
    cfg = RunConfig(
        args.command, curve, box, args.eps, args.points, tuple(args.singular), args.delta, args.out,
        args.format, layers, args.seed_grid,
    )
    if args.command == "converge":
        if not 0 <= args.halvings <= 6:
            raise ValueError("--halvings must be between 0 and 6")
        cfg.halvings = args.halvings
        cfg.probes = tuple(args.probe)
    thread_count()  # validates the environment variable
    return cfg


def _sample(cfg: RunConfig):
    if cfg.points is not None:
        return sample_with_count(cfg.curve, cfg.box, cfg.points, cfg.singular, cfg.seed_grid)
    eps = cfg.epsilon if cfg.epsilon is not None else DEFAULT_EPS
    return epsilon_sample(cfg.curve, cfg.box, eps, cfg.singular, cfg.seed_grid)


def _emit(cfg: RunConfig, doc_fn, csv_fn) -> str:
    if cfg.format == "csv":
        return csv_fn()
    return formats.dumps(doc_fn())


# --------------------------------------------------------------------------
# subcommands


def cmd_sample(cfg: RunConfig) -> str:
    A = _sample(cfg)
    return _emit(cfg, lambda: formats.sample_doc(A), lambda: formats.sample_csv(A))


def cmd_voronoi(cfg: RunConfig) -> str:
    A = _sample(cfg)
    V = voronoi_diagram(A.all_points)
    return _emit(cfg, lambda: formats.voronoi_doc(V), lambda: formats.voronoi_csv(V))


def cmd_features(cfg: RunConfig) -> str:
    import numpy as np
    from scipy.spatial import cKDTree

    from .features import (bottleneck_candidates, classify_edges, default_delta, estimate_curvature_local,
                           medial_axis_short_edges)
    from .errors import TooFewPoints

    A = _sample(cfg)
    V = voronoi_diagram(A.all_points)
    classes = classify_edges(V, cfg.curve)
    cands = bottleneck_candidates(V, classes)
    medial = medial_axis_short_edges(V, classes, A.epsilon).segments(cfg.box.diagonal)
    st = cKDTree(A.all_points)
    vt = cKDTree(V.vertices) if len(V.vertices) else None
    if cfg.delta is not None and cfg.delta <= 2.0 * A.epsilon:
        warnings.warn(f"--delta {cfg.delta:g} is not above 2*epsilon={2 * A.epsilon:g}", CurveLabWarning,
                      stacklevel=2)
    radii = []
    for p in A.all_points:
        delta = cfg.delta if cfg.delta is not None else (default_delta(V, p, vt) if vt else math.inf)
        try:
            radii.append(estimate_curvature_local(A.all_points, p, delta, site_tree=st, epsilon=0.0))
        except TooFewPoints:
            radii.append(math.inf)
    return _emit(
        cfg,
        lambda: formats.features_doc(A, V, classes, cands, np.array(radii), medial),
        lambda: formats.features_csv(V, classes),
    )


def cmd_solve(cfg: RunConfig) -> str:
    from .solver import real_bottlenecks, real_critical_curvature, singular_points

    P = cfg.curve
    sing = singular_points(P, cfg.box)
    A = _sample(cfg) if not sing or cfg.singular else None
    crit = bott = None
    notes = []
    if sing:
        warnings.warn(f"curve is singular at {[tuple(p) for p in sing]}; skipping curvature and bottlenecks",
                      CurveLabWarning, stacklevel=2)
        notes.append("singular curve: critical curvature and bottlenecks not computed")
    elif P.degree < 2:
        notes.append("a line has no curvature or bottlenecks")
    else:
        crit = real_critical_curvature(P, A, box=cfg.box)
        bott = real_bottlenecks(P, A)
        if P.degree >= 3 and len(crit.points) > 6 * P.degree**2 - 10 * P.degree:
            warnings.warn("critical-curvature count exceeds the degree bound", CurveLabWarning, stacklevel=2)
    return _emit(cfg, lambda: formats.solve_doc(P, crit, bott, sing, notes), lambda: formats.solve_csv(crit, bott))


def cmd_reach(cfg: RunConfig) -> str:
    from .reach import reach_exact

    A = _sample(cfg)
    r = reach_exact(cfg.curve, A, cfg.box)
    return _emit(cfg, lambda: formats.reach_doc(r), lambda: formats.reach_csv(r))


def cmd_converge(cfg: RunConfig) -> str:
    from .reach import convergence_experiment

    eps0 = cfg.epsilon if cfg.epsilon is not None else 0.1
    if cfg.points is not None:
        eps0 = _sample(cfg).epsilon
    rows = convergence_experiment(cfg.curve, cfg.box, eps0, cfg.halvings, cfg.probes or None, cfg.singular)
    return _emit(cfg, lambda: formats.convergence_doc(rows), lambda: formats.convergence_csv(rows))


def cmd_render(cfg: RunConfig) -> str:
    from .render import render_svg

    P = cfg.curve
    layers = set(cfg.layers)
    A = _sample(cfg)
    V = voronoi_diagram(A.all_points) if layers & {"voronoi", "delaunay", "edges", "medial",
                                                   "circumcenters", "candidates", "cells"} else None
    classes = cands = crit = bott = evol = None
    if layers & {"edges", "medial", "candidates"}:
        from .features import bottleneck_candidates, classify_edges

        classes = classify_edges(V, P)
        if "candidates" in layers:
            cands = bottleneck_candidates(V, classes)
    if layers & {"critical", "bottlenecks", "reach"}:
        from .solver import real_bottlenecks, real_critical_curvature

        crit = real_critical_curvature(P, A)
        if layers & {"bottlenecks", "reach"}:
            bott = real_bottlenecks(P, A)
    if "evolute" in layers:
        from .features import evolute_approximation

        evol = evolute_approximation(A, V)
    hl = ()
    if "cells" in layers and V is not None:
        import numpy as np

        targets = list(A.singular_points)
        hl = tuple(V.locate(p) for p in targets) if targets else (int(np.argmin(A.all_points[:, 1])),)
    return render_svg(cfg.layers, cfg.box.as_tuple(), sample=A, voronoi=V, classes=classes,
                      candidates=cands or (), critical=crit, bottlenecks=bott, evolute=evol, curve=P,
                      highlight_sites=hl)


HANDLERS = {
    "sample": cmd_sample,
    "voronoi": cmd_voronoi,
    "features": cmd_features,
    "solve": cmd_solve,
    "reach": cmd_reach,
    "converge": cmd_converge,
    "render": cmd_render,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        cfg = make_config(args)
        if cfg.command == "render" and cfg.format != "json":
            raise ValueError("render writes SVG; --format does not apply")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", CurveLabWarning)
            text = HANDLERS[cfg.command](cfg)
    except (CurveLabError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_ERROR
    ours = [w for w in caught if issubclass(w.category, CurveLabWarning)]
    for w in ours:
        print(f"warning: {w.message}", file=stderr)
    try:
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            stdout.write(text)
    except OSError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_ERROR
    return EXIT_WARN if ours else EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
