"""Residue sieve over k = O_K / 3 O_K (r = 1) or O_K / 21 O_K (r = 3).

A triple (a', b', c') of units of k with a' + b' + c' = 0 is trace-matched
when the Frey curve y^2 = x(x - a')(x + b') has the target curve's trace at
every auxiliary prime.  An exponent class R* is eliminated when no
trace-matched triple passes the symbol constraint in all three cyclic roles.

Everything inside the main loop is a table lookup: component fields are
encoded as integers c0 + p*c1 and the field operations, characters,
discrete logarithms and Frey traces are tabulated once per process.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import itertools
import math
import multiprocessing
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .curvedata import TARGET_LABELS, target_record
from .curves import TraceRecord, check_hasse, trace_at
from .finitefield import FF, FFElem
from .quadfield import PrimeIdeal, QuadField, UnsupportedField, factor_int, split_prime

SUPPORTED = ((5, 1), (5, 3), (17, 1), (17, 3))

# image of zeta_3 in the residue field of each prime factor of 1 - 4 zeta_3
ZETA3_IMAGES = {3: 1, 7: 2}


class UnsupportedConfig(ValueError):
    pass


@dataclass(frozen=True)
class SieveConfig:
    d: int
    r: int

    def __post_init__(self):
        if (self.d, self.r) not in SUPPORTED:
            raise UnsupportedConfig(f"(d, r) = ({self.d}, {self.r}) is not one of {list(SUPPORTED)}")

    @property
    def aux_primes(self) -> tuple[int, ...]:
        return (3,) if self.r == 1 else (3, 7)

    @property
    def G(self) -> int:
        """#k^x: 8 for F_9, 8 * 48 = 384 for F_9 x F_49."""
        return 8 if self.r == 1 else 384

    @property
    def target_label(self) -> str:
        return TARGET_LABELS[self.d]

    @property
    def R_range(self) -> list[int]:
        return [R for R in range(1, self.G) if math.gcd(R, self.G) == 1]

    def R_for(self, R_star: int) -> int:
        """The symbol exponent used for the class R*."""
        if self.r == 1:
            return R_star % self.G
        return pow(R_star, -1, self.G)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "r": self.r,
            "aux_primes": list(self.aux_primes),
            "G": self.G,
            "target": self.target_label,
        }


# ---------------------------------------------------------------------------
# The residue ring


@dataclass(frozen=True)
class RingComponent:
    prime: PrimeIdeal
    zeta_image: FFElem

    @property
    def field(self) -> FF:
        return self.prime.residue_field

    @property
    def omega_image(self) -> FFElem:
        return self.prime.omega_image

    @property
    def p(self) -> int:
        return self.prime.p


@dataclass(frozen=True)
class ResidueRing:
    config: SieveConfig
    components: tuple[RingComponent, ...]
    swapped: bool = False

    @property
    def unit_order(self) -> int:
        return math.prod(c.field.order_units for c in self.components)

    def reduce(self, x) -> tuple[FFElem, ...]:
        return tuple(c.prime.reduce(x) for c in self.components)

    def omega_images(self) -> dict[str, list[int]]:
        return {str(c.p): list(c.omega_image.encoding()) for c in self.components}


def _omega_roots(P: PrimeIdeal) -> list[FFElem]:
    m = (P.F.d - 1) // 4
    k = P.residue_field
    roots = k.roots((-m, -1, 1))
    return sorted(roots, key=lambda e: (e.c1, e.c0))


def _check_zeta3_structure(components: list[RingComponent]) -> None:
    # N_{L/Q}(1 - 4 zeta_3) for L = K(zeta_3): |1 - 4 zeta_3|^2 = 1 + 4 + 16 = 21
    # over Q(zeta_3), squared for the quadratic step up to L.
    n_q_zeta = 1 - 4 * (-1) + 16 * 1
    if n_q_zeta**2 != math.prod(c.field.q for c in components):
        raise ArithmeticError("1 - 4 zeta_3 does not factor as P_3 * Q_7")
    w = ZETA3_IMAGES[7]
    if (4 * w - 1) % 7 or (w * w + w + 1) % 7:
        raise ArithmeticError("the zeta_3 image at 7 is not a root of 4x - 1 and x^2 + x + 1")


def build_ring(cfg: SieveConfig, swap_roots: bool = False) -> ResidueRing:
    """Residue fields at the auxiliary primes with omega and zeta images fixed.

    omega maps to the root of x^2 - x - (d-1)/4 with the smaller (c1, c0)
    encoding, or to the other root when swap_roots is set.
    """
    F = QuadField(cfg.d)
    comps = []
    for p in cfg.aux_primes:
        primes = split_prime(F, p)
        if len(primes) != 1 or primes[0].kind != "inert":
            raise UnsupportedConfig(f"{p} is not inert in {F}")
        P = primes[0]
        roots = _omega_roots(P)
        if len(roots) != 2:
            raise ArithmeticError(f"omega has {len(roots)} roots in {P.residue_field}")
        P = dataclasses.replace(P, root_choice=roots[1 if swap_roots else 0].encoding())
        zeta = P.residue_field(1 if cfg.r == 1 else ZETA3_IMAGES[p])
        comps.append(RingComponent(P, zeta))
    if cfg.r == 3:
        _check_zeta3_structure(comps)
    ring = ResidueRing(cfg, tuple(comps), swap_roots)
    if ring.unit_order != cfg.G:
        raise ArithmeticError(f"#k^x = {ring.unit_order}, expected {cfg.G}")
    return ring


def target_traces(cfg: SieveConfig, ring: ResidueRing | None = None) -> list[TraceRecord]:
    ring = ring or build_ring(cfg)
    rec = target_record(cfg.d)
    return [trace_at(rec.curve, c.prime) for c in ring.components]


# ---------------------------------------------------------------------------
# Per-component tables


@dataclass
class ComponentTables:
    p: int
    q: int
    target: int
    chi: np.ndarray  # chi by encoding
    add: np.ndarray  # add[x, y]
    neg: np.ndarray
    log: np.ndarray  # log by encoding, -1 at zero
    exp: np.ndarray  # exp[k] = encoding of g^k
    zeta_log: int
    frey_trace: np.ndarray  # frey_trace[a, b], 99 where a*b*(a+b) = 0
    matched: list[tuple[int, int, int]] = field(default_factory=list)
    role_logs: np.ndarray | None = None  # (n, 3) logs of eps for the three roles


NO_TRACE = 99


def _component_tables(comp: RingComponent, target: int) -> ComponentTables:
    k = comp.field
    q = k.q
    add = np.array(k.add_table, dtype=np.int64)
    mul = k.mul_table
    neg = np.array(k.neg_table, dtype=np.int64)
    chi_arr = np.array(k.chi_table, dtype=np.int64)
    log = np.full(q, -1, dtype=np.int64)
    for e, lg in k.log_table.items():
        log[e] = lg
    exp = np.array(k.exp_table, dtype=np.int64)

    # Frey trace a(a, b) = -sum_x chi(x (x - a)(x + b))
    xs = np.arange(q)
    ft = np.full((q, q), NO_TRACE, dtype=np.int64)
    mul_np = np.array(mul, dtype=np.int64)
    for a in range(1, q):
        x_minus_a = add[xs, neg[a]]
        xa = mul_np[xs, x_minus_a]
        for b in range(1, q):
            if add[a, b] == 0:
                continue
            f = mul_np[xa, add[xs, b]]
            ft[a, b] = -int(chi_arr[f].sum())
    for a, b in zip(*np.nonzero(ft != NO_TRACE)):
        check_hasse(int(ft[a, b]), q)

    t = ComponentTables(
        p=comp.p, q=q, target=target, chi=chi_arr, add=add, neg=neg, log=log, exp=exp,
        zeta_log=int(log[k.index(comp.zeta_image)]), frey_trace=ft,
    )
    n_units = q - 1
    for a in range(1, q):
        for b in range(1, q):
            if ft[a, b] == target:
                c = int(neg[add[a, b]])
                t.matched.append((a, b, c))
    rl = np.empty((len(t.matched), 3), dtype=np.int64)
    for i, (a, b, c) in enumerate(t.matched):
        for j, (x, y, z) in enumerate(((a, b, c), (b, c, a), (c, a, b))):
            rl[i, j] = (log[x] + log[y] - 2 * log[z]) % n_units
    t.role_logs = rl
    return t


@lru_cache(maxsize=None)
def sieve_tables(d: int, r: int, swap_roots: bool = False) -> tuple[ComponentTables, ...]:
    cfg = SieveConfig(d, r)
    ring = build_ring(cfg, swap_roots)
    traces = target_traces(cfg, ring)
    return tuple(_component_tables(c, tr.a_q) for c, tr in zip(ring.components, traces))


def role_values(t: ComponentTables, R: int) -> np.ndarray:
    """chi(eps^R - zeta^R) for every matched triple and role, shape (n, 3)."""
    n_units = t.q - 1
    eps_R = t.exp[(t.role_logs * R) % n_units]
    zeta_R = int(t.exp[(t.zeta_log * R) % n_units])
    return t.chi[t.add[eps_R, t.neg[zeta_R]]]


def survivors_for(tables: tuple[ComponentTables, ...], R: int) -> int:
    """Number of trace-matched triples of k passing all three roles."""
    vals = [role_values(t, R) for t in tables]
    if len(vals) == 1:
        return int(np.all(vals[0] != -1, axis=1).sum())
    v3, v7 = vals
    ok = np.ones((len(v3), len(v7)), dtype=bool)
    for j in range(3):
        ok &= np.outer(v3[:, j], v7[:, j]) != -1
    return int(ok.sum())


def _eval_chunk(args) -> list[tuple[int, int]]:
    d, r, swap, R_stars = args
    cfg = SieveConfig(d, r)
    tables = sieve_tables(d, r, swap)
    return [(Rs, survivors_for(tables, cfg.R_for(Rs))) for Rs in R_stars]


# ---------------------------------------------------------------------------
# Trace-matched triples as field elements


@dataclass(frozen=True)
class TripleResidue:
    components: tuple[tuple[FFElem, FFElem, FFElem], ...]

    def __post_init__(self):
        for a, b, c in self.components:
            if not (a + b + c).is_zero():
                raise ValueError("residue triple does not sum to zero")

    @property
    def units(self) -> tuple[bool, ...]:
        return tuple(not (a.is_zero() or b.is_zero() or c.is_zero()) for a, b, c in self.components)

    def encoding(self) -> list[list[list[int]]]:
        return [[list(e.encoding()) for e in comp] for comp in self.components]


def trace_match_set(cfg: SieveConfig, swap_roots: bool = False) -> list[TripleResidue]:
    ring = build_ring(cfg, swap_roots)
    tables = sieve_tables(cfg.d, cfg.r, swap_roots)
    per_comp = []
    for comp, t in zip(ring.components, tables):
        k = comp.field
        per_comp.append([tuple(k.from_index(i) for i in tr) for tr in t.matched])
    return [TripleResidue(tuple(combo)) for combo in itertools.product(*per_comp)]


# ---------------------------------------------------------------------------
# Exponent bound


def branch_values(t: ComponentTables) -> dict[int, str]:
    """Distinct branch quantities at one auxiliary prime.

    Unit triples give a_q(E0) - a_q(E) (0 when matched); triples with one
    vanishing component give (a_q(E) - (N + 1)) (a_q(E) + (N + 1)).
    """
    out: dict[int, str] = {}
    q = t.q
    for a in range(1, q):
        for b in range(1, q):
            tr = int(t.frey_trace[a, b])
            if tr != NO_TRACE:
                out.setdefault(tr - t.target, "trace")
    out.setdefault((t.target - (q + 1)) * (t.target + (q + 1)), "weil")
    return out


def exponent_bound(cfg: SieveConfig, swap_roots: bool = False) -> tuple[list[int], list[dict]]:
    """Primes p for which some residue triple escapes the sieve through a
    branch: at each auxiliary prime either the Frey trace matches or p
    divides the branch quantity there."""
    tables = sieve_tables(cfg.d, cfg.r, swap_roots)
    per_comp = [branch_values(t) for t in tables]
    primes: set[int] = set()
    witnesses: dict[int, dict] = {}
    for combo in itertools.product(*(sorted(v) for v in per_comp)):
        if all(v == 0 for v in combo):
            continue  # matched everywhere: the sieve handles it
        g = 0
        for v in combo:
            g = math.gcd(g, v)
        for p in factor_int(g):
            primes.add(p)
            witnesses.setdefault(p, {
                "prime": p,
                "branch": {str(t.p): {"kind": per_comp[i][v], "value": v} for i, (t, v) in enumerate(zip(tables, combo))},
            })
    return sorted(primes), [witnesses[p] for p in sorted(witnesses)]


# ---------------------------------------------------------------------------
# Elimination


def collapse(eliminated: list[int], G: int) -> tuple[int, list[int]]:
    """Smallest modulus m | G for which the eliminated set is a union of
    unit classes mod m."""
    units = [u for u in range(1, G) if math.gcd(u, G) == 1]
    E = set(eliminated)
    for m in sorted(k for k in range(1, G + 1) if G % k == 0):
        classes: dict[int, set[bool]] = {}
        for u in units:
            classes.setdefault(u % m, set()).add(u in E)
        if all(len(v) == 1 for v in classes.values()):
            return m, sorted(c for c, v in classes.items() if True in v)
    raise AssertionError("unreachable: m = G always works")


def classes_at(eliminated: list[int], G: int, m: int) -> list[int]:
    """The eliminated set as unit classes mod m, for any m | G at or above
    the collapse modulus; raises if it is not a union of classes mod m."""
    if G % m:
        raise ValueError(f"{m} does not divide {G}")
    E = set(eliminated)
    seen: dict[int, set[bool]] = {}
    for u in range(1, G):
        if math.gcd(u, G) == 1:
            seen.setdefault(u % m, set()).add(u in E)
    if any(len(v) > 1 for v in seen.values()):
        raise ValueError(f"the eliminated set is not a union of classes mod {m}")
    return sorted(c for c, v in seen.items() if True in v)


@dataclass
class SieveReport:
    config: SieveConfig
    eliminated_R_star: list[int]
    collapsed: tuple[int, list[int]]
    bound_primes: list[int]
    survivors: dict[int, int]
    target_traces: dict[str, int]
    matched_counts: dict[str, int]
    omega_images: dict[str, list[int]]
    bound_witnesses: list[dict] = field(default_factory=list)

    @property
    def open_R_star(self) -> list[int]:
        return [R for R in self.config.R_range if R not in set(self.eliminated_R_star)]

    def classes_at(self, m: int) -> list[int]:
        return classes_at(self.eliminated_R_star, self.config.G, m)

    def to_dict(self) -> dict:
        m, res = self.collapsed
        return {
            "config": self.config.to_dict(),
            "eliminated_R_star": list(self.eliminated_R_star),
            "open_R_star": self.open_R_star,
            "collapsed": {"modulus": m, "residues": list(res)},
            "bound_primes": list(self.bound_primes),
            "bound_witnesses": self.bound_witnesses,
            "survivors": {str(k): v for k, v in sorted(self.survivors.items())},
            "target_traces": dict(sorted(self.target_traces.items())),
            "matched_counts": dict(sorted(self.matched_counts.items())),
            "omega_images": dict(sorted(self.omega_images.items())),
        }


def default_jobs() -> int:
    env = os.environ.get("FLT_SIEVE_JOBS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"FLT_SIEVE_JOBS must be a positive integer, got {env!r}") from None
        if n < 1:
            raise ValueError(f"FLT_SIEVE_JOBS must be a positive integer, got {env!r}")
        return n
    return 1


def _chunks(xs: list[int], n: int) -> list[list[int]]:
    size = -(-len(xs) // n)
    return [xs[i : i + size] for i in range(0, len(xs), size)]


def eliminated_classes(cfg: SieveConfig, jobs: int = 1, swap_roots: bool = False) -> SieveReport:
    ring = build_ring(cfg, swap_roots)
    tables = sieve_tables(cfg.d, cfg.r, swap_roots)  # built before any fork
    R_stars = cfg.R_range
    if jobs <= 1:
        pairs = _eval_chunk((cfg.d, cfg.r, swap_roots, R_stars))
    else:
        work = [(cfg.d, cfg.r, swap_roots, ch) for ch in _chunks(R_stars, jobs)]
        ctx = multiprocessing.get_context("fork") if "fork" in multiprocessing.get_all_start_methods() else None
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as ex:
            pairs = [pr for part in ex.map(_eval_chunk, work) for pr in part]
    survivors = dict(sorted(pairs))
    eliminated = sorted(R for R, n in survivors.items() if n == 0)
    bound, witnesses = exponent_bound(cfg, swap_roots)
    return SieveReport(
        config=cfg,
        eliminated_R_star=eliminated,
        collapsed=collapse(eliminated, cfg.G),
        bound_primes=bound,
        survivors=survivors,
        target_traces={str(t.p): t.target for t in tables},
        matched_counts={str(t.p): len(t.matched) for t in tables},
        omega_images=ring.omega_images(),
        bound_witnesses=witnesses,
    )


# ---------------------------------------------------------------------------
# Combining r = 1 and r = 3


def _describe(U: set[int], L: int) -> list[tuple[int, list[int]]]:
    """Cover the unit classes U mod L by classes at the smallest moduli."""
    units = [u for u in range(1, L) if math.gcd(u, L) == 1]
    covered: set[int] = set()
    out: dict[int, list[int]] = {}
    for m in sorted(k for k in range(2, L + 1) if L % k == 0):
        for c in range(m):
            if math.gcd(c, m) != 1:
                continue
            lifts = {u for u in units if u % m == c}
            if lifts and lifts <= U and not lifts <= covered:
                out.setdefault(m, []).append(c)
                covered |= lifts
    if covered != U:
        raise AssertionError("class description does not cover the union")
    return sorted(out.items())


def theorem_report(d: int, reports: list[SieveReport] | None = None, jobs: int = 1) -> dict:
    """Union of the eliminated classes of both runs, at the smallest moduli."""
    if d not in (5, 17):
        raise UnsupportedField(f"no sieve for d = {d}")
    if reports is None:
        reports = [eliminated_classes(SieveConfig(d, r), jobs) for r in (1, 3)]
    L = math.lcm(*(rep.collapsed[0] for rep in reports if rep.eliminated_R_star), 8)
    units = [u for u in range(1, L) if math.gcd(u, L) == 1]
    U: set[int] = set()
    for rep in reports:
        m, res = rep.collapsed
        if L % m:
            raise AssertionError(f"collapsed modulus {m} does not divide {L}")
        U |= {u for u in units if u % m in res}
    classes = _describe(U, L)
    bound = sorted(set().union(*(rep.bound_primes for rep in reports)))
    notes = []
    small = [p for p in bound if p > 3]
    for p in small:
        runs = [f"r={rep.config.r}" for rep in reports if p in rep.bound_primes]
        notes.append(
            f"p = {p} lies in the exponent bound ({', '.join(runs)}); the congruence "
            f"statement does not cover it and it is left to a separate argument"
        )
    notes.append("p = 2 and p = 3 lie in every exponent bound and are excluded")
    return {
        "d": d,
        "modulus": L,
        "classes": [{"modulus": m, "residues": res} for m, res in classes],
        "covered": sorted(U),
        "open": sorted(set(units) - U),
        "density": str(Fraction(len(U), len(units))),
        "bound_primes": bound,
        "runs": [rep.config.to_dict() | {"collapsed": {"modulus": rep.collapsed[0], "residues": rep.collapsed[1]}} for rep in reports],
        "notes": notes,
    }
