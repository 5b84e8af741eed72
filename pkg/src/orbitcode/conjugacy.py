"""Conjugation of permutations of the naturals by pointwise stabilizers.

Permutations are finitely described: explicit finite cycles, plus infinite
cycles given by an explicit segment whose two ends continue through points
that are never named.  Those unnamed points are written ``Ghost(key, pos)``;
``pos`` counts along the cycle from the first point of the segment, and the
key ties ghosts of different permutations to the same unnamed points.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from functools import cached_property
from math import lcm
from typing import Iterable, Sequence, Union

from .perm import PermError, parse_cycles


@dataclass(frozen=True, order=True)
class Ghost:
    key: str
    pos: int

    def __str__(self):
        return f"<{self.key}{self.pos:+d}>"


Point = Union[int, Ghost]


@dataclass(frozen=True)
class InfiniteCycle:
    key: str
    segment: tuple[int, ...]

    def at(self, pos: int) -> Point:
        if 0 <= pos < len(self.segment):
            return self.segment[pos]
        return Ghost(self.key, pos)


@dataclass(frozen=True)
class CyclePermutation:
    finite_cycles: tuple[tuple[int, ...], ...] = ()
    infinite_cycles: tuple[InfiniteCycle, ...] = ()

    def __post_init__(self):
        fin = tuple(_rotate(tuple(c)) for c in self.finite_cycles if len(c) > 1)
        fin = tuple(sorted(fin))
        inf = tuple(sorted(self.infinite_cycles, key=lambda c: c.key))
        seen: set[int] = set()
        for c in list(fin) + [c.segment for c in inf]:
            for p in c:
                if not isinstance(p, int) or p < 0:
                    raise PermError(f"points must be naturals, got {p!r}")
                if p in seen:
                    raise PermError(f"point {p} appears twice")
                seen.add(p)
        keys = [c.key for c in inf]
        if len(set(keys)) != len(keys):
            raise PermError("infinite cycle keys must be distinct")
        object.__setattr__(self, "finite_cycles", fin)
        object.__setattr__(self, "infinite_cycles", inf)

    @classmethod
    def from_tuple(cls, g: Sequence[int]) -> CyclePermutation:
        from .perm import cycles

        return cls(tuple(cycles(tuple(g))))

    @cached_property
    def _where(self) -> dict:
        w = {}
        for c in self.finite_cycles:
            for i, p in enumerate(c):
                w[p] = (c, i)
        for c in self.infinite_cycles:
            for i, p in enumerate(c.segment):
                w[p] = (c, i)
        return w

    @property
    def mentioned(self) -> frozenset[int]:
        return frozenset(self._where)

    @property
    def finitely_supported(self) -> bool:
        return not self.infinite_cycles

    def power(self, m: int, k: Point) -> Point:
        if isinstance(k, Ghost):
            for c in self.infinite_cycles:
                if c.key == k.key and not 0 <= k.pos < len(c.segment):
                    return c.at(k.pos + m)
            return k
        hit = self._where.get(k)
        if hit is None:
            return k
        c, i = hit
        if isinstance(c, InfiniteCycle):
            return c.at(i + m)
        return c[(i + m) % len(c)]

    def __call__(self, k: Point) -> Point:
        return self.power(1, k)

    def as_map(self) -> dict[int, int]:
        """Images of the finitely many moved points (finite support only)."""
        if self.infinite_cycles:
            raise PermError("infinite support")
        return {p: c[(i + 1) % len(c)] for p, (c, i) in self._where.items()}

    def __str__(self) -> str:
        return format_cycle_permutation(self)


def _rotate(c: tuple[int, ...]) -> tuple[int, ...]:
    i = c.index(min(c))
    return c[i:] + c[:i]


def format_cycle_permutation(f: CyclePermutation) -> str:
    parts = ["(" + " ".join(map(str, c)) + ")" for c in f.finite_cycles]
    parts += [f"({c.key}: ... " + " ".join(map(str, c.segment)) + " ...)" for c in f.infinite_cycles]
    return "".join(parts) if parts else "()"


_INF = re.compile(r"\(\s*([A-Za-z_][A-Za-z0-9_]*)\s*:\s*\.\.\.([^().]*)\.\.\.\s*\)")


def parse_cycle_permutation(text: str) -> CyclePermutation:
    """Cycle notation; '(a: ... 3 4 5 ...)' is an infinite cycle keyed 'a'."""
    infinite = []
    for m in _INF.finditer(text):
        try:
            seg = tuple(int(t) for t in m.group(2).split())
        except ValueError:
            raise PermError(f"bad infinite cycle {m.group(0)!r}") from None
        infinite.append(InfiniteCycle(m.group(1), seg))
    rest = _INF.sub("", text)
    return CyclePermutation(tuple(parse_cycles(rest)), tuple(infinite))


@dataclass(frozen=True)
class CycleType:
    finite: tuple[int, ...]
    infinite: int
    fixed_cofinite: bool

    def __str__(self):
        lens = ",".join(map(str, self.finite)) or "-"
        return f"cycles {lens}; infinite {self.infinite}; rest fixed"


def cycle_type(f: CyclePermutation) -> CycleType:
    return CycleType(tuple(sorted((len(c) for c in f.finite_cycles), reverse=True)),
                     len(f.infinite_cycles), not f.infinite_cycles)


def is_conjugate(f: CyclePermutation, g: CyclePermutation) -> bool:
    return cycle_type(f) == cycle_type(g)


def power_apply(f: CyclePermutation, m: int, k: Point) -> Point:
    return f.power(m, k)


def conjugate_by(h: CyclePermutation, f: CyclePermutation) -> CyclePermutation:
    """h∘f∘h⁻¹ for finitely supported h and f."""
    hm = h.as_map()
    cyc = [tuple(hm.get(p, p) for p in c) for c in f.finite_cycles]
    return CyclePermutation(tuple(cyc))


@dataclass
class Disjointness:
    disjoint: bool
    k: int | None = None
    m: int | None = None
    conjugator: CyclePermutation | None = None
    core: dict = field(default_factory=dict)


def _period(f: CyclePermutation, k: int) -> int:
    hit = f._where.get(k)
    if hit is None:
        return 1
    c = hit[0]
    return len(c) if isinstance(c, tuple) else len(c.segment) + 1


def _search_bound(f: CyclePermutation, g: CyclePermutation, k: int) -> int:
    pf, pg = _period(f, k), _period(g, k)
    span = sum(len(c.segment) + 1 for c in f.infinite_cycles + g.infinite_cycles)
    return lcm(pf, pg) + span


def disjointness_witness(f: CyclePermutation, g: CyclePermutation,
                         c: Iterable[int]) -> tuple[int, int] | None:
    """Least m > 0 (per k ∈ c, in increasing order) with
    (f^m(k) ∈ c or g^m(k) ∈ c) and f^m(k) ≠ g^m(k)."""
    cs = frozenset(c)
    for k in sorted(cs):
        for m in range(1, _search_bound(f, g, k) + 1):
            a, b = f.power(m, k), g.power(m, k)
            if a != b and (a in cs or b in cs):
                return k, m
    return None


def cosets_disjoint(f: CyclePermutation, g: CyclePermutation, c: Iterable[int]) -> Disjointness:
    if not is_conjugate(f, g):
        raise PermError("cosets_disjoint expects conjugate permutations")
    cs = frozenset(c)
    wit = disjointness_witness(f, g, cs)
    if wit is not None:
        return Disjointness(True, k=wit[0], m=wit[1])
    core = _core_map(f, g, cs)
    if f.infinite_cycles:
        return Disjointness(False, core=core)
    return Disjointness(False, conjugator=_extend(f, g, core), core=core)


def _core_map(f: CyclePermutation, g: CyclePermutation, cs: frozenset[int]) -> dict:
    """h(f^m(k)) = g^m(k) over the named points of the c-orbits."""
    h: dict = {}
    for k in sorted(cs):
        hit = f._where.get(k)
        if hit is None:
            h[k] = k
            continue
        cyc, i = hit
        if isinstance(cyc, tuple):
            ms = range(len(cyc))
        else:
            ms = range(-i, len(cyc.segment) - i)
        for m in ms:
            a, b = f.power(m, k), g.power(m, k)
            if h.setdefault(a, b) != b:
                raise RuntimeError("inconsistent core map")
    return h


def _extend(f: CyclePermutation, g: CyclePermutation, core: dict) -> CyclePermutation:
    h = dict(core)
    done_f = {c for c in f.finite_cycles if c[0] in h}
    done_g = {c for c in g.finite_cycles if c[0] in set(h.values())}
    rest_f: dict[int, list] = {}
    rest_g: dict[int, list] = {}
    for c in f.finite_cycles:
        if c not in done_f:
            rest_f.setdefault(len(c), []).append(c)
    for c in g.finite_cycles:
        if c not in done_g:
            rest_g.setdefault(len(c), []).append(c)
    for n, cf in rest_f.items():
        for a, b in zip(sorted(cf), sorted(rest_g.get(n, []))):
            h.update(zip(a, b))
    universe = set(h) | set(h.values())
    src = sorted(universe - set(h))
    dst = sorted(universe - set(h.values()))
    h.update(zip(src, dst))
    return _from_map(h)


def _from_map(h: dict[int, int]) -> CyclePermutation:
    seen: set[int] = set()
    out = []
    for s in sorted(h):
        if s in seen or h[s] == s:
            continue
        cyc = [s]
        seen.add(s)
        j = h[s]
        while j != s:
            cyc.append(j)
            seen.add(j)
            j = h[j]
        out.append(tuple(cyc))
    return CyclePermutation(tuple(out))


@dataclass(frozen=True)
class SeparatingOpenSet:
    """Permutations p mapping k to l in exactly m steps through points
    outside {k, l}.  With ``closed`` set, the first permutation's coset lies
    in the complement of this open set rather than in it."""

    k: int
    l: int
    m: int
    closed: bool = False

    def contains(self, p: CyclePermutation) -> bool:
        cur: Point = self.k
        for _ in range(self.m - 1):
            cur = p(cur)
            if cur == self.k or cur == self.l:
                return False
        return p(cur) == self.l

    def separates(self, p: CyclePermutation) -> bool:
        """True on the side containing the first permutation's coset."""
        return self.contains(p) != self.closed

    def describe(self) -> str:
        chain = " ".join([str(self.k)] + [f"a{i}" for i in range(1, self.m)] + [str(self.l)])
        kind = "closed complement of" if self.closed else "open"
        return f"{kind} chain family k={self.k} l={self.l} m={self.m}: {chain}"


def separating_open_set(f: CyclePermutation, g: CyclePermutation,
                        c: Iterable[int]) -> SeparatingOpenSet:
    res = cosets_disjoint(f, g, c)
    if not res.disjoint:
        raise PermError("the cosets are not disjoint")
    cs = frozenset(c)
    k, m = res.k, res.m
    a = f.power(m, k)
    if a in cs:
        return SeparatingOpenSet(k, a, m)
    return SeparatingOpenSet(k, g.power(m, k), m, closed=True)


def random_stabilizer_element(c: Iterable[int], points: Iterable[int],
                              rng: random.Random) -> CyclePermutation:
    """A random permutation of the given points that fixes c pointwise."""
    free = sorted(set(points) - set(c))
    img = free[:]
    rng.shuffle(img)
    return _from_map(dict(zip(free, img)))


@dataclass
class SeparationReport:
    entries: list = field(default_factory=list)

    @property
    def all_verified(self) -> bool:
        return all(e["verified"] for e in self.entries)

    def disjoint_cases(self) -> list:
        return [e for e in self.entries if e["disjoint"]]


def rank_one_separation_check(pairs: Iterable[tuple[CyclePermutation, CyclePermutation]],
                              cs: Iterable[Iterable[int]], samples: int = 4,
                              seed: int = 0) -> SeparationReport:
    """For each pair and each c, separate disjoint cosets by an open or closed
    set and check it on the pair and on random conjugates by V_c."""
    rng = random.Random(seed)
    report = SeparationReport()
    cs = [frozenset(c) for c in cs]
    for f, g in pairs:
        for c in cs:
            res = cosets_disjoint(f, g, c)
            entry = {"f": f, "g": g, "c": c, "disjoint": res.disjoint, "verified": True}
            if res.disjoint and f.finitely_supported:
                sep = separating_open_set(f, g, c)
                entry["separator"] = sep
                ok = sep.separates(f) and not sep.separates(g)
                pts = f.mentioned | g.mentioned | c
                pts = pts | set(range(max(pts, default=0) + 3))
                for _ in range(samples):
                    h = random_stabilizer_element(c, pts, rng)
                    ok = ok and sep.separates(conjugate_by(h, f)) and not sep.separates(conjugate_by(h, g))
                entry["verified"] = ok
            elif res.disjoint:
                sep = separating_open_set(f, g, c)
                entry["separator"] = sep
                entry["verified"] = sep.separates(f) and not sep.separates(g)
            elif res.conjugator is not None:
                h = res.conjugator
                entry["verified"] = (conjugate_by(h, f) == g
                                     and all(h(k) == k for k in c))
            report.entries.append(entry)
    return report

