"""Curve records read from JSON lines.

One object per line, coordinates in the omega basis:

    {"label": str, "d": int, "conductor": str, "roots": [[x, y], [x, y], [x, y]]}
    {"label": str, "d": int, "conductor": str, "weierstrass": [a1, a2, a3, a4, a6]}

where each a_i is an [x, y] pair.  When both are present, roots win.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .curves import CurveK, SingularCurve, trace_at
from .quadfield import QuadField, UnsupportedField, split_prime

AUX_PRIMES = (3, 7)

# the level-lowered target curve of each field
TARGET_LABELS = {5: "q5.P3.a", 17: "q17.P1P2.a"}


class CurveDataError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = ""):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class CurveRecord:
    label: str
    d: int
    conductor: str
    curve: CurveK
    line: int = 0

    @property
    def F(self) -> QuadField:
        return self.curve.F

    def to_dict(self) -> dict:
        out = {"label": self.label, "d": self.d, "conductor": self.conductor}
        if self.curve.roots is not None:
            out["roots"] = [list(e.coords()) for e in self.curve.roots]
        else:
            a1, a2, a3, a4, a6 = self.curve.ainvs
            out["weierstrass"] = [list(e.coords()) for e in (a1, a2, a3, a4, a6)]
        return out


def _pair(F: QuadField, v, what: str):
    if isinstance(v, int) and not isinstance(v, bool):
        return F(v, 0)
    if (
        isinstance(v, list)
        and len(v) == 2
        and all(isinstance(c, int) and not isinstance(c, bool) for c in v)
    ):
        return F(v[0], v[1])
    raise ValueError(f"{what}: expected an integer or an [x, y] integer pair, got {v!r}")


def parse_record(obj: dict, line: int = 0) -> CurveRecord:
    if not isinstance(obj, dict):
        raise ValueError("each line must be a JSON object")
    for key, typ in (("label", str), ("d", int), ("conductor", str)):
        if key not in obj:
            raise ValueError(f"missing field {key!r}")
        if not isinstance(obj[key], typ) or isinstance(obj[key], bool):
            raise ValueError(f"field {key!r} must be {typ.__name__}")
    F = QuadField(obj["d"])
    label = obj["label"]
    if "roots" in obj:
        roots = obj["roots"]
        if not isinstance(roots, list) or len(roots) != 3:
            raise ValueError("roots must be a list of three [x, y] pairs")
        e = [_pair(F, r, "roots") for r in roots]
        if len(set(e)) != 3:
            raise SingularCurve(f"{label}: repeated root")
        curve = CurveK.from_roots(*e, label=label)
    elif "weierstrass" in obj:
        w = obj["weierstrass"]
        if not isinstance(w, list) or len(w) != 5:
            raise ValueError("weierstrass must list [a1, a2, a3, a4, a6]")
        a1, a2, a3, a4, a6 = (_pair(F, c, "weierstrass") for c in w)
        curve = CurveK((a1, a2, a3, a4, a6), label)
    else:
        raise ValueError("record needs 'roots' or 'weierstrass'")
    return CurveRecord(label, obj["d"], obj["conductor"], curve, line)


def ingest_curves(path: str | Path | None = None, check_classes: bool = True) -> list[CurveRecord]:
    """Read and validate a curve file (the bundled one when path is None)."""
    if path is None:
        text = resources.files("fltquad").joinpath("data/curves.jsonl").read_text()
        source = "curves.jsonl"
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise CurveDataError(str(exc), source=str(path)) from exc
        source = str(path)
    records = []
    for n, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        try:
            records.append(parse_record(json.loads(raw), n))
        except (ValueError, UnsupportedField, SingularCurve) as exc:
            raise CurveDataError(str(exc), n, source) from exc
    labels = [r.label for r in records]
    if len(set(labels)) != len(labels):
        raise CurveDataError("duplicate labels", source=source)
    if check_classes:
        check_class_traces(records)
    return records


def class_key(rec: CurveRecord) -> tuple[int, str]:
    return (rec.d, rec.conductor)


def check_class_traces(records: list[CurveRecord]) -> dict[tuple[int, str], dict[int, int]]:
    """Curves sharing (d, conductor) are treated as one isogeny class and
    must have equal traces at 3 and 7."""
    seen: dict[tuple[int, str], tuple[str, dict[int, int]]] = {}
    for rec in records:
        traces = {}
        for p in AUX_PRIMES:
            (P,) = split_prime(rec.F, p)
            traces[p] = trace_at(rec.curve, P).a_q
        key = class_key(rec)
        if key in seen and seen[key][1] != traces:
            first, ref = seen[key]
            raise CurveDataError(
                f"{rec.label} has traces {traces} but {first} in the same class has {ref}",
                rec.line,
            )
        seen.setdefault(key, (rec.label, traces))
    return {k: v[1] for k, v in seen.items()}


def find_record(records: list[CurveRecord], label: str) -> CurveRecord:
    for r in records:
        if r.label == label:
            return r
    raise KeyError(f"no curve labelled {label!r}")


def target_record(d: int, records: list[CurveRecord] | None = None) -> CurveRecord:
    if d not in TARGET_LABELS:
        raise UnsupportedField(f"no target curve for d = {d}")
    return find_record(records if records is not None else ingest_curves(), TARGET_LABELS[d])
