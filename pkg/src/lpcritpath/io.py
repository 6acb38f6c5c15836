"""Path and OMP file formats.

Files use 1-based indices; the Python API is 0-based.  JSON output keeps
every float as its shortest round-trip repr, so reading a file back gives
bit-identical points.  CSV output writes 17 significant digits.
"""

import csv
import json
from pathlib import Path as FsPath

import numpy as np

from .errors import InstanceParseError
from .model import PathPoint, Support
from .strategies import Path
from .tracer import Event, Segment

FORMAT = "lp-critpath/1"
CSV_FIXED = ["arclength", "lambda", "c", "class_Q", "class_P", "support"]


def _f(x):
    return None if x is None else float(x)


def _vec(v):
    return None if v is None else [float(a) for a in v]


def point_to_dict(pt):
    return {
        "beta": _vec(pt.beta),
        "lambda": float(pt.lam),
        "c": float(pt.c),
        "support": [i + 1 for i in pt.support],
        "class_Q": pt.class_Q,
        "class_P": pt.class_P,
        "arclength": float(pt.arclength),
        "det_K": _f(pt.det_K),
    }


def point_from_dict(d):
    beta = np.array(d["beta"], dtype=float)
    return PathPoint(
        beta=beta,
        lam=float(d["lambda"]),
        c=float(d["c"]),
        support=Support(tuple(i - 1 for i in d["support"]), beta.shape[0]),
        class_Q=d.get("class_Q", ""),
        class_P=d.get("class_P", ""),
        arclength=float(d.get("arclength", 0.0)),
        det_K=_f(d.get("det_K")),
    )


def event_to_dict(ev):
    return {
        "kind": ev.kind,
        "location": point_to_dict(ev.location),
        "indices": [i + 1 for i in ev.indices],
        "note": ev.note,
    }


def event_from_dict(d):
    return Event(d["kind"], point_from_dict(d["location"]), tuple(i - 1 for i in d.get("indices", [])),
                 d.get("note", ""))


def segment_to_dict(seg):
    return {
        "support": [i + 1 for i in seg.support],
        "orientation": int(seg.orientation),
        "start_event": event_to_dict(seg.start_event),
        "end_event": event_to_dict(seg.end_event),
        "turning_points": [event_to_dict(e) for e in seg.turning_points],
        "start_tangent": _vec(seg.start_tangent),
        "end_tangent": _vec(seg.end_tangent),
        "indefinite_K": bool(seg.indefinite_K),
        "points": [point_to_dict(p) for p in seg.points],
    }


def segment_from_dict(d, n):
    return Segment(
        support=Support(tuple(i - 1 for i in d["support"]), n),
        points=[point_from_dict(p) for p in d["points"]],
        start_event=event_from_dict(d["start_event"]),
        end_event=event_from_dict(d["end_event"]),
        orientation=int(d["orientation"]),
        turning_points=[event_from_dict(e) for e in d.get("turning_points", [])],
        start_tangent=None if d.get("start_tangent") is None else np.array(d["start_tangent"]),
        end_tangent=None if d.get("end_tangent") is None else np.array(d["end_tangent"]),
        indefinite_K=bool(d.get("indefinite_K", False)),
    )


def path_to_dict(path):
    return {
        "format": FORMAT,
        "type": "path",
        "kind": path.kind,
        "n": int(path.terminal.location.beta.shape[0]),
        "segments": [segment_to_dict(s) for s in path.segments],
        "breakpoints": [point_to_dict(b) for b in path.breakpoints],
        "terminal": event_to_dict(path.terminal),
        "active_order": [[op, i + 1] for op, i in path.active_order],
        "notes": list(path.notes),
    }


def path_from_dict(d):
    if d.get("format") != FORMAT or d.get("type", "path") != "path":
        raise InstanceParseError(f"not a {FORMAT} path file")
    n = int(d["n"])
    return Path(
        kind=d["kind"],
        segments=[segment_from_dict(s, n) for s in d["segments"]],
        breakpoints=[point_from_dict(b) for b in d["breakpoints"]],
        terminal=event_from_dict(d["terminal"]),
        active_order=[(op, int(i) - 1) for op, i in d["active_order"]],
        notes=list(d.get("notes", [])),
    )


def write_json(obj, path):
    text = json.dumps(obj, indent=1, allow_nan=True)
    FsPath(path).write_text(text + "\n", encoding="utf-8")


def read_path_json(path):
    try:
        data = json.loads(FsPath(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceParseError(f"cannot read path file {path}: {exc}") from exc
    return path_from_dict(data)


def _num(x):
    return format(float(x), ".17g")


def path_rows(path):
    """Header plus one row per path point, shared endpoints written once."""
    pts = path.points if path.segments else [path.terminal.location]
    n = pts[0].beta.shape[0]
    rows = [CSV_FIXED + [f"beta_{i + 1}" for i in range(n)]]
    for p in pts:
        rows.append(
            [_num(p.arclength), _num(p.lam), _num(p.c), p.class_Q, p.class_P,
             ";".join(str(i + 1) for i in p.support)]
            + [_num(b) for b in p.beta]
        )
    return rows


def write_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(rows)


def omp_to_dict(run, report=None):
    out = {
        "format": FORMAT,
        "type": "omp",
        "modified": bool(run.modified),
        "status": run.status,
        "order": [i + 1 for i in run.order],
        "steps": [_vec(s) for s in run.steps],
    }
    if report is not None:
        out["coincidence"] = {
            "coincide": bool(report.passed),
            "max_deviation": float(report.max_deviation),
            "max_implied_lambda": float(report.max_implied_lambda),
            "order_matches": bool(report.order_matches),
            "detail": report.detail,
        }
    return out


def omp_rows(run):
    n = run.steps[0].shape[0] if run.steps else 0
    rows = [["step", "support"] + [f"beta_{i + 1}" for i in range(n)]]
    for k, s in enumerate(run.steps, 1):
        rows.append([str(k), ";".join(str(i + 1) for i in sorted(run.order[:k]))] + [_num(b) for b in s])
    return rows
