"""Primitive triples a + b + c = 0 whose Frey curve is a twist-free rescaling
of a known curve, and their residue images under the sieve.

For a curve y^2 = (x - e1)(x - e2)(x - e3) and an S-unit u (S = primes above
2), the triple a = u^2 (e2 - e1), b = -u^2 (e3 - e1), c = -a - b has Frey
curve isomorphic to it, with discriminants differing by u^12.  Only u^2
matters, and u^2 ranges over eps^(2m) * prod(pi_i^(2 n_i)).
"""

from __future__ import annotations

import concurrent.futures
import itertools
import math
from dataclasses import dataclass, field

from .curvedata import CurveDataError, CurveRecord, ingest_curves
from .curves import curve_roots, frey
from .quadfield import QInt, QuadField, embedding_value, exact_div, gcd, sqrt_exact
from .sieve import SieveConfig, SieveReport, build_ring, sieve_tables
from .symbols import constraint_symbol

__all__ = [
    "CurveDataError",
    "CurveRecord",
    "ObstructiveTriple",
    "Window",
    "canonical",
    "cross_check",
    "dedupe",
    "find_all",
    "find_triples",
    "ingest_curves",
    "same_class",
    "saturation_check",
    "verify_triple",
]


@dataclass(frozen=True)
class Window:
    """Exponent ranges for u^2 = eps^(2m) prod(pi_i^(2 n_i))."""

    m: int = 12
    n: int = 12

    def doubled(self) -> "Window":
        return Window(2 * self.m, 2 * self.n)


@dataclass(frozen=True)
class ObstructiveTriple:
    a: QInt
    b: QInt
    c: QInt
    source: str
    ordering: tuple[int, int, int]
    m: int
    n: tuple[int, ...]
    completed_square: bool = False

    @property
    def F(self) -> QuadField:
        return self.a.F

    @property
    def triple(self) -> tuple[QInt, QInt, QInt]:
        return (self.a, self.b, self.c)

    def u_squared(self) -> tuple[QInt, QInt]:
        """u'^2 relative to the source model, as numerator and denominator."""
        F = self.F
        num = F.fundamental_unit ** (2 * self.m)
        den = F.one
        for P, k in zip(F.primes_above_2, self.n):
            if k >= 0:
                num = num * P.generator ** (2 * k)
            else:
                den = den * P.generator ** (-2 * k)
        if self.completed_square:
            num = num * 4
        return num, den

    def two_adic(self) -> dict[str, list[int]]:
        return {repr(P): [P.valuation(x) for x in self.triple] for P in self.F.primes_above_2}

    def to_dict(self) -> dict:
        val = self.two_adic()
        return {
            "a": list(self.a.coords()),
            "b": list(self.b.coords()),
            "c": list(self.c.coords()),
            "source": self.source,
            "transform": {
                "ordering": list(self.ordering),
                "m": self.m,
                "n": list(self.n),
                "completed_square": self.completed_square,
            },
            "two_adic": val,
            "two_divides_abc": any(any(v) for v in val.values()),
        }


# ---------------------------------------------------------------------------
# Search


def _candidates(F: QuadField, diffs: tuple[QInt, QInt], window: Window):
    gens = [P.generator for P in F.primes_above_2]
    d2, d3 = diffs
    for n in itertools.product(range(-window.n, window.n + 1), repeat=len(gens)):
        num, den = F.one, F.one
        for g, k in zip(gens, n):
            if k >= 0:
                num = num * g ** (2 * k)
            else:
                den = den * g ** (-2 * k)
        a = exact_div(num * d2, den, check=False)
        b = exact_div(-(num * d3), den, check=False)
        if a is None or b is None:
            continue
        if not gcd(a, b).is_unit():
            continue
        yield n, a, b


def find_triples(rec: CurveRecord, window: Window = Window()) -> list[ObstructiveTriple]:
    """Every primitive triple from the six root orderings and every u in the
    window, reduced modulo unit squares."""
    roots, model = curve_roots(rec.curve)
    completed = rec.curve.roots is None
    F = rec.F
    eps2 = F.fundamental_unit**2
    out = []
    for ordering in itertools.permutations(range(3)):
        e1, e2, e3 = (roots[i] for i in ordering)
        for n, a0, b0 in _candidates(F, (e2 - e1, e3 - e1), window):
            scale = eps2 ** (-window.m)
            for m in range(-window.m, window.m + 1):
                a, b = a0 * scale, b0 * scale
                out.append(ObstructiveTriple(a, b, -a - b, rec.label, ordering, m, n, completed))
                scale = scale * eps2
    return dedupe(out)


def _find_worker(args):
    rec, window = args
    return find_triples(rec, window)


def find_all(records: list[CurveRecord], window: Window = Window(), jobs: int = 1) -> list[ObstructiveTriple]:
    if jobs <= 1 or len(records) < 2:
        found = [find_triples(r, window) for r in records]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as ex:
            found = list(ex.map(_find_worker, [(r, window) for r in records]))
    return dedupe([t for part in found for t in part])


# ---------------------------------------------------------------------------
# Unit-square classes


def _log_skew(x: QInt) -> float:
    return math.log(abs(embedding_value(x, 1))) - math.log(abs(embedding_value(x, 2)))


def _key(T: tuple[QInt, QInt, QInt]):
    height = max(max(abs(e.x), abs(e.y)) for e in T)
    return (height, tuple(v for e in T for v in e.coords()))


def canonical(t: ObstructiveTriple) -> ObstructiveTriple:
    """The member of {eps^(2k) t} with least height, then least encoding."""
    F = t.F
    eps = F.fundamental_unit
    reg = math.log(abs(embedding_value(eps, 1)))
    prod_abc = t.a * t.b * t.c
    # eps^(2k) on each entry moves the product's log-skew by 12 k reg
    k0 = round(-_log_skew(prod_abc) / (12 * reg))
    ks = range(k0 - 4, k0 + 5)
    cands = []
    for k in ks:
        s = eps ** (2 * k)
        cands.append((_key((t.a * s, t.b * s, t.c * s)), k))
    best_key, best_k = min(cands)
    # height grows geometrically away from the balance point; widen if the
    # minimum sits on the edge of the scan
    if best_k in (ks[0], ks[-1]):
        step = -1 if best_k == ks[0] else 1
        while True:
            k = best_k + step
            s = eps ** (2 * k)
            key = _key((t.a * s, t.b * s, t.c * s))
            if key >= best_key:
                break
            best_key, best_k = key, k
    s = eps ** (2 * best_k)
    return ObstructiveTriple(
        t.a * s, t.b * s, t.c * s, t.source, t.ordering, t.m + best_k, t.n, t.completed_square
    )


def same_class(t1, t2) -> bool:
    """t1 = eta^2 t2 for a unit eta, decided exactly."""
    T1 = t1.triple if isinstance(t1, ObstructiveTriple) else t1
    T2 = t2.triple if isinstance(t2, ObstructiveTriple) else t2
    ratio = exact_div(T1[0], T2[0], check=False)
    if ratio is None or not ratio.is_unit():
        return False
    if any(x != ratio * y for x, y in zip(T1[1:], T2[1:])):
        return False
    return sqrt_exact(ratio) is not None


def dedupe(triples: list[ObstructiveTriple]) -> list[ObstructiveTriple]:
    """One canonical member per unit-square class; the first provenance seen
    (in input order) is kept."""
    seen: dict[tuple, ObstructiveTriple] = {}
    for t in triples:
        c = canonical(t)
        key = (c.F.d, c.triple)
        if key not in seen:
            seen[key] = c
    return sorted(seen.values(), key=lambda t: (t.F.d, _key(t.triple), t.source))


# ---------------------------------------------------------------------------
# Checks


def verify_triple(t: ObstructiveTriple, rec: CurveRecord) -> list[str]:
    """Exact invariant checks; returns the list of failures (empty when valid)."""
    problems = []
    if not (t.a + t.b + t.c).is_zero():
        problems.append("a + b + c != 0")
    for x, y in ((t.a, t.b), (t.b, t.c), (t.c, t.a)):
        if not gcd(x, y).is_unit():
            problems.append(f"gcd({x}, {y}) is not a unit")
    E0 = frey(t.a, t.b, "frey")
    num, den = t.u_squared()
    if E0.discriminant() * den**6 != rec.curve.discriminant() * num**6:
        problems.append("Frey discriminant is not u^12 times the source discriminant")
    if not E0.same_j(rec.curve):
        problems.append("j-invariants differ")
    return problems


def saturation_check(rec: CurveRecord, window: Window = Window()) -> dict:
    """Compare the classes found with the window and with it doubled."""
    base = {t.triple for t in find_triples(rec, window)}
    wide = {t.triple for t in find_triples(rec, window.doubled())}
    return {
        "label": rec.label,
        "window": [window.m, window.n],
        "doubled": [2 * window.m, 2 * window.n],
        "classes": len(base),
        "classes_doubled": len(wide),
        "saturated": base == wide,
    }


def _passes(ring, R: int, residues) -> bool:
    for role in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        per = [tuple(c[i] for i in role) for c in residues]
        if not constraint_symbol(ring, R, per).passed:
            return False
    return True


@dataclass
class CrossCheckVerdict:
    d: int
    triples: int
    runs: list[dict] = field(default_factory=list)
    violations: list[dict] = field(default_factory=list)
    bound_branch: list[dict] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "triples": self.triples,
            "runs": self.runs,
            "violations": self.violations,
            "bound_branch": self.bound_branch,
            "consistent": self.consistent,
        }


def cross_check(triples: list[ObstructiveTriple], reports: list[SieveReport]) -> CrossCheckVerdict:
    """Every eliminated class must kill every triple, and every open class
    must let at least one triple through.

    Symbols are evaluated element by element here, independently of the
    sieve's lookup tables.
    """
    ds = {r.config.d for r in reports}
    if len(ds) != 1:
        raise ValueError("cross_check needs reports for a single field")
    d = ds.pop()
    mine = [t for t in triples if t.F.d == d]
    verdict = CrossCheckVerdict(d, len(mine))
    for rep in reports:
        cfg: SieveConfig = rep.config
        ring = build_ring(cfg)
        tables = sieve_tables(cfg.d, cfg.r)
        usable = []
        for t in mine:
            residues = [tuple(c.prime.reduce(x) for x in t.triple) for c in ring.components]
            if any(e.is_zero() for comp in residues for e in comp):
                verdict.bound_branch.append({"r": cfg.r, "triple": t.to_dict()})
                continue
            for comp, tab, (ra, rb, _) in zip(ring.components, tables, residues):
                k = comp.field
                if tab.frey_trace[k.index(ra), k.index(rb)] != tab.target:
                    verdict.violations.append(
                        {"r": cfg.r, "kind": "trace-mismatch", "prime": comp.p, "triple": t.to_dict()}
                    )
            usable.append((t, residues))
        eliminated = set(rep.eliminated_R_star)
        open_witness = {}
        for Rs in cfg.R_range:
            R = cfg.R_for(Rs)
            passing = [t for t, res in usable if _passes(ring, R, res)]
            if Rs in eliminated and passing:
                verdict.violations.append(
                    {"r": cfg.r, "R_star": Rs, "kind": "eliminated-class-admits-triple",
                     "triple": passing[0].to_dict()}
                )
            if Rs not in eliminated:
                if passing:
                    open_witness[str(Rs)] = [list(passing[0].a.coords()), list(passing[0].b.coords())]
                else:
                    verdict.violations.append(
                        {"r": cfg.r, "R_star": Rs, "kind": "open-class-without-triple"}
                    )
        verdict.runs.append({
            "r": cfg.r,
            "eliminated": len(eliminated),
            "open": len(cfg.R_range) - len(eliminated),
            "open_witnesses": open_witness,
        })
    return verdict
