"""JSON and CSV renderings of every artifact the command line writes.

Each JSON document carries a ``schema`` tag ``metric-curve-lab/<kind>/<version>``;
the matching JSON Schema files live in ``docs/schemas``.
"""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .features import LONG, SHORT, BottleneckCandidate, EdgeClass
from .reach import ReachReport, rows_to_csv, rows_to_dict

SCHEMAS = {
    "sample": "metric-curve-lab/sample/1",
    "voronoi": "metric-curve-lab/voronoi/1",
    "features": "metric-curve-lab/features/1",
    "solve": "metric-curve-lab/solve/1",
    "reach": "metric-curve-lab/reach/1",
    "convergence": "metric-curve-lab/convergence/1",
}


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _pt(p):
    return None if p is None else [_num(p[0]), _num(p[1])]


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else v for v in r])
    return buf.getvalue()


# --------------------------------------------------------------------------


def sample_doc(A) -> dict:
    return {
        "schema": SCHEMAS["sample"],
        "epsilon": float(A.epsilon),
        "n_points": len(A),
        "components": [[_pt(p) for p in c] for c in A.components],
        "closed": [bool(c) for c in A.closed],
        "singular": [_pt(p) for p in A.singular_points],
    }


def sample_csv(A) -> str:
    rows = []
    for k, c in enumerate(A.components):
        rows.extend((k, repr(float(x)), repr(float(y))) for x, y in c)
    rows.extend(("singular", repr(float(x)), repr(float(y))) for x, y in A.singular_points)
    return _csv(["component", "x", "y"], rows)


def _edge_doc(i, e, label=None) -> dict:
    d = {
        "id": i,
        "a": int(e.site_a),
        "b": int(e.site_b),
        "kind": e.kind,
        "start": _pt(e.start),
        "end": _pt(e.end),
        "direction": _pt(e.direction),
        "degenerate": bool(e.degenerate),
    }
    if label is not None:
        d["class"] = label
    return d


def voronoi_doc(V) -> dict:
    return {
        "schema": SCHEMAS["voronoi"],
        "sites": [_pt(p) for p in V.sites],
        "vertices": [_pt(p) for p in V.vertices],
        "edges": [_edge_doc(i, e) for i, e in enumerate(V.edges)],
        "cells": [
            {"site": int(c.site), "bounded": bool(c.bounded), "edges": [int(i) for i in c.edges],
             "vertices": [_pt(p) for p in c.vertices]}
            for c in V.cells
        ],
    }


def voronoi_csv(V) -> str:
    rows = [
        (i, e.site_a, e.site_b, e.kind, *map(_fmt, e.start),
         *(map(_fmt, e.end) if e.end is not None else ("", "")),
         *(map(_fmt, e.direction) if e.direction is not None else ("", "")), int(e.degenerate))
        for i, e in enumerate(V.edges)
    ]
    return _csv(["id", "a", "b", "kind", "x0", "y0", "x1", "y1", "dx", "dy", "degenerate"], rows)


def _fmt(v) -> str:
    return repr(float(v))


def features_doc(A, V, classes: EdgeClass, candidates, local_radii=None, medial_segments=None) -> dict:
    doc = {
        "schema": SCHEMAS["features"],
        "epsilon": float(A.epsilon),
        "n_points": len(A),
        "edges": [_edge_doc(i, e, classes.labels[i]) for i, e in enumerate(V.edges)],
        "counts": {
            "long": sum(lab == LONG for lab in classes.labels),
            "short": sum(lab == SHORT for lab in classes.labels),
        },
        "bad_cells": [int(i) for i in classes.bad_cells()],
        "candidates": [_candidate_doc(c) for c in candidates],
    }
    if local_radii is not None:
        doc["local_radii"] = [_num(r) for r in local_radii]
    if medial_segments is not None:
        doc["medial_segments"] = [[_pt(a), _pt(b)] for a, b in medial_segments]
    return doc


def _candidate_doc(c: BottleneckCandidate) -> dict:
    return {"a": c.a, "b": c.b, "point_a": _pt(c.point_a), "point_b": _pt(c.point_b), "width": _num(c.width)}


def features_csv(V, classes: EdgeClass) -> str:
    rows = [(i, e.site_a, e.site_b, e.kind, classes.labels[i]) for i, e in enumerate(V.edges)]
    return _csv(["id", "a", "b", "kind", "class"], rows)


def _family_doc(f) -> dict:
    return {"kind": f.kind, "representative": [_pt(p) for p in f.representative], "value": _num(f.value),
            "note": f.note}


def solve_doc(P, crit, bott, singular, notes=()) -> dict:
    d = P.degree
    return {
        "schema": SCHEMAS["solve"],
        "curve": P.to_expr(),
        "degree": d,
        "degree_bounds": {
            "critical_curvature": 6 * d * d - 10 * d,
            "bottleneck_pairs": (d**4 - 5 * d * d + 4 * d) // 2,
        },
        "critical": None if crit is None else {
            "count": len(crit.points),
            "q": _num(crit.q),
            "points": [
                {"p": _pt(c.p), "radius": _num(c.radius), "curvature": _num(c.curvature),
                 "residuals": [_num(r) for r in c.residuals]}
                for c in crit.points
            ],
            "families": [_family_doc(f) for f in crit.families],
        },
        "bottlenecks": None if bott is None else {
            "count": len(bott.pairs),
            "rho": _num(bott.rho),
            "pairs": [
                {"x": _pt(b.x), "y": _pt(b.y), "width": _num(b.width), "residual_norm": _num(b.residual_norm)}
                for b in bott.pairs
            ],
            "families": [_family_doc(f) for f in bott.families],
        },
        "singular_points": [_pt(p) for p in singular],
        "notes": list(notes),
    }


def solve_csv(crit, bott) -> str:
    rows = []
    if crit is not None:
        rows.extend(("critical", _fmt(c.p.x), _fmt(c.p.y), "", "", _fmt(c.radius), _fmt(max(c.residuals)))
                    for c in crit.points)
    if bott is not None:
        rows.extend(("bottleneck", _fmt(b.x.x), _fmt(b.x.y), _fmt(b.y.x), _fmt(b.y.y), _fmt(b.width),
                     _fmt(b.residual_norm)) for b in bott.pairs)
    return _csv(["kind", "x0", "y0", "x1", "y1", "value", "residual"], rows)


def reach_doc(r: ReachReport) -> dict:
    return r.to_dict()


def reach_csv(r: ReachReport) -> str:
    d = r.to_dict()
    keys = [k for k in d if k not in ("schema", "notes")]
    return _csv(keys, [[d[k] for k in keys]])


def convergence_doc(rows) -> dict:
    return rows_to_dict(rows)


def convergence_csv(rows) -> str:
    return rows_to_csv(rows)


def as_list(a) -> list:
    return np.asarray(a, dtype=float).tolist()
