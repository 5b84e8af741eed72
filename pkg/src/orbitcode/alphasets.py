"""Iterated refinement of (point, partial map) pairs.

Level-1 labels record the range of the partial map and the set of basis
indices meeting its coset orbit.  A level-(k+1) label is the level-k label
together with, for every initial segment n containing the range, the set of
level-k labels of the extensions onto n.  Labels are interned per level, so
equal labels mean equal alpha-sets.

A pair's label only depends on pairs of the same point, so labels are
computed lazily, point by point.  The literal two-sided recursion over
point sets lives in ``AlphaOracle`` and is used to cross-check.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

from .gspace import EffectiveGSpace, bits, mask_of
from .ordinal import Ordinal
from .perm import EMPTY, PartialBijection, extensions, window_subsets


class AlphaError(ValueError):
    pass


@dataclass(frozen=True)
class AlphaLabel:
    level: Ordinal
    range_tag: frozenset[int]
    ident: int


class LabelEngine:
    def __init__(self, space: EffectiveGSpace):
        self.space = space
        G = space.group
        self.window = G.window
        self.sg = G.sgfin
        self.index = {s: i for i, s in enumerate(self.sg)}
        self.rng_tag = [tuple(sorted(s.rng)) for s in self.sg]
        self.identity_index = {c: self.index[PartialBijection.identity_on(sorted(c))]
                               for c in window_subsets(self.window)}
        self.children = []
        for s in self.sg:
            top = max(s.rng) + 1 if s.rng else 0
            self.children.append(tuple(
                tuple(self.index[t] for t in extensions(G, s, "range", range(n)))
                for n in range(top, self.window + 1)))
        self.labels: list[dict[int, tuple[int, ...]]] = []
        self.keys: list[list] = []
        self.interned: list[dict] = []
        self._gamma: dict[int, int] = {}
        self._lock = threading.Lock()

    def sigma_index(self, s: PartialBijection) -> int:
        try:
            return self.index[s]
        except KeyError:
            raise AlphaError(f"sigma not in S^G: {s}") from None

    def _point_keys(self, x: int, k: int) -> tuple:
        if k == 1:
            f1 = self.space.f1
            return tuple((self.rng_tag[i], f1(x, s)) for i, s in enumerate(self.sg))
        prev = self.labels[k - 2][x]
        return tuple(
            (prev[i], tuple(tuple(sorted({prev[j] for j in ch})) for ch in self.children[i]))
            for i in range(len(self.sg)))

    def _grow(self, k: int):
        while len(self.labels) < k:
            self.labels.append({})
            self.keys.append([])
            self.interned.append({})

    def ensure(self, points: Iterable[int], k: int, jobs: int = 1) -> None:
        """Compute labels of the given points up to level k.

        Keys may be built concurrently; interning happens afterwards in the
        order of ``points`` so the identifiers do not depend on ``jobs``.
        """
        points = list(dict.fromkeys(points))
        with self._lock:
            self._grow(k)
            for level in range(1, k + 1):
                todo = [x for x in points if x not in self.labels[level - 1]]
                if not todo:
                    continue
                if jobs > 1 and len(todo) > 1:
                    with ThreadPoolExecutor(jobs) as ex:
                        keyed = list(ex.map(lambda x: self._point_keys(x, level), todo))
                else:
                    keyed = [self._point_keys(x, level) for x in todo]
                table = self.interned[level - 1]
                keys = self.keys[level - 1]
                store = self.labels[level - 1]
                for x, row in zip(todo, keyed):
                    ids = []
                    for key in row:
                        ident = table.get(key)
                        if ident is None:
                            ident = len(keys)
                            table[key] = ident
                            keys.append(key)
                        ids.append(ident)
                    store[x] = tuple(ids)

    def point_labels(self, x: int, k: int) -> tuple[int, ...]:
        if len(self.labels) < k or x not in self.labels[k - 1]:
            self.ensure([x], k)
        return self.labels[k - 1][x]

    def label_id(self, x: int, s: PartialBijection, k: int) -> int:
        return self.point_labels(x, k)[self.sigma_index(s)]

    def pair_count(self, points: Iterable[int], k: int) -> int:
        points = list(points)
        self.ensure(points, k)
        found = set()
        for x in points:
            found.update(self.labels[k - 1][x])
        return len(found)

    def stable_level(self, points: Iterable[int], jobs: int = 1) -> int:
        """Least k at which the pair partition over these points stops refining."""
        points = list(dict.fromkeys(points))
        k = 1
        self.ensure(points, 2, jobs)
        while True:
            self.ensure(points, k + 1, jobs)
            if self.pair_count(points, k) == self.pair_count(points, k + 1):
                return k
            k += 1

    def gamma_star(self, x: int) -> int:
        g = self._gamma.get(x)
        if g is None:
            g = self.stable_level([x])
            self._gamma[x] = g
        return g

    def tree(self, level: int, ident: int):
        """Canonical nested-tuple form of an interned label."""
        key = self.keys[level - 1][ident]
        if level == 1:
            rng, f1 = key
            return (rng, tuple(bits(f1)))
        prev, groups = key
        return (self.tree(level - 1, prev),
                tuple(tuple(sorted(self.tree(level - 1, j) for j in g)) for g in groups))


def engine_for(space: EffectiveGSpace) -> LabelEngine:
    eng = getattr(space, "_label_engine", None)
    if eng is None:
        eng = LabelEngine(space)
        space._label_engine = eng
    return eng


def _finite_level(space: EffectiveGSpace, points: list[int], alpha: Ordinal | int) -> int:
    alpha = Ordinal.of(alpha)
    if alpha.is_zero:
        raise AlphaError("levels start at 1")
    if alpha.is_finite:
        return alpha.finite
    # every transfinite level has the stabilized classes
    return engine_for(space).stable_level(points)


def alpha_label(space: EffectiveGSpace, x: int, s: PartialBijection,
                alpha: Ordinal | int) -> AlphaLabel:
    alpha = Ordinal.of(alpha)
    if alpha.is_finite:
        k = _finite_level(space, [x], alpha)
    else:
        k = stabilization(space).stabilization_level.finite
    eng = engine_for(space)
    return AlphaLabel(Ordinal.of(alpha), s.rng, eng.label_id(x, s, k))


def b1_label(space: EffectiveGSpace, x: int, s: PartialBijection) -> AlphaLabel:
    return alpha_label(space, x, s, 1)


def label_tree(space: EffectiveGSpace, label: AlphaLabel):
    if not label.level.is_finite:
        raise AlphaError("trees are kept for finite levels only")
    return engine_for(space).tree(label.level.finite, label.ident)


def same_alpha_class(space: EffectiveGSpace, x: int, s: PartialBijection, y: int,
                     d: PartialBijection, alpha: Ordinal | int) -> bool:
    """B_alpha(x,s) = B_alpha(y,d)."""
    if s.rng != d.rng:
        raise AlphaError("alpha-sets are compared only for partial maps with a common range")
    eng = engine_for(space)
    k = _finite_level(space, [x, y], alpha)
    return eng.label_id(x, s, k) == eng.label_id(y, d, k)


@dataclass
class RefinementTrace:
    space: EffectiveGSpace
    depth: int
    stabilization_level: Ordinal | None = None
    jobs: int = 1

    @property
    def engine(self) -> LabelEngine:
        return engine_for(self.space)

    def label(self, x: int, s: PartialBijection, level: int | None = None) -> AlphaLabel:
        k = self.depth if level is None else level
        if k > self.depth:
            raise AlphaError(f"trace only reaches level {self.depth}")
        return AlphaLabel(Ordinal(0, k), s.rng, self.engine.label_id(x, s, k))

    def class_count(self, level: int) -> int:
        return self.engine.pair_count(range(self.space.n), level)

    def partition(self, level: int) -> list[frozenset[tuple[int, PartialBijection]]]:
        eng = self.engine
        eng.ensure(range(self.space.n), level)
        blocks: dict[int, list] = {}
        for x in range(self.space.n):
            for i, ident in enumerate(eng.labels[level - 1][x]):
                blocks.setdefault(ident, []).append((x, eng.sg[i]))
        return [frozenset(b) for b in blocks.values()]


def initial_trace(space: EffectiveGSpace, jobs: int = 1) -> RefinementTrace:
    engine_for(space).ensure(range(space.n), 1, jobs)
    return RefinementTrace(space, 1, jobs=jobs)


def refine_step(space: EffectiveGSpace, trace: RefinementTrace) -> RefinementTrace:
    engine_for(space).ensure(range(space.n), trace.depth + 1, trace.jobs)
    return RefinementTrace(space, trace.depth + 1, jobs=trace.jobs)


def stabilization(space: EffectiveGSpace, jobs: int = 1) -> RefinementTrace:
    trace = initial_trace(space, jobs)
    nxt = refine_step(space, trace)
    while trace.class_count(trace.depth) != nxt.class_count(nxt.depth):
        trace, nxt = nxt, refine_step(space, nxt)
    return RefinementTrace(space, nxt.depth, Ordinal(0, trace.depth), jobs)


def gamma_star(space: EffectiveGSpace, x: int) -> Ordinal:
    """Least level at which x's own pair partition is final (at least 1)."""
    return Ordinal(0, engine_for(space).gamma_star(x))


def _class_at(space: EffectiveGSpace, x: int, s: PartialBijection, k: int) -> frozenset[int]:
    eng = engine_for(space)
    eng.ensure(range(space.n), k)
    target = eng.label_id(x, s, k)
    j = eng.identity_index[s.rng]
    return frozenset(y for y in range(space.n) if eng.labels[k - 1][y][j] == target)


def alpha_class(space: EffectiveGSpace, x: int, s: PartialBijection,
                alpha: Ordinal | int) -> frozenset[int]:
    """B_alpha(x,s) read off the labels."""
    alpha = Ordinal.of(alpha)
    if alpha.is_finite:
        return _class_at(space, x, s, alpha.finite)
    return _class_at(space, x, s, stabilization(space).stabilization_level.finite)


def orbit_via_labels(space: EffectiveGSpace, x: int) -> frozenset[int]:
    return coset_set_via_labels(space, x, EMPTY)


def coset_set_via_labels(space: EffectiveGSpace, x: int, s: PartialBijection) -> frozenset[int]:
    return _class_at(space, x, s, engine_for(space).gamma_star(x) + 2)


# -- the literal recursion ---------------------------------------------------------

class AlphaOracle:
    """B_alpha(x, s) computed as point sets by the two-sided recursion."""

    def __init__(self, space: EffectiveGSpace, max_points: int = 4096):
        if space.n > max_points:
            raise AlphaError(f"oracle limited to {max_points} points, space has {space.n}")
        self.space = space
        G = space.group
        self.sg = list(G.sgfin)
        self.index = {s: i for i, s in enumerate(self.sg)}
        subsets = window_subsets(G.window)
        # for each s: unions over b ⊇ dom s and a ⊇ rng s
        self.dom_groups = []
        self.rng_groups = []
        for s in self.sg:
            ext = [j for j, t in enumerate(self.sg) if s.is_subset(t)]
            self.dom_groups.append([[j for j in ext if self.sg[j].dom == b]
                                    for b in subsets if s.dom <= b])
            self.rng_groups.append([[j for j in ext if self.sg[j].rng == a]
                                    for a in subsets if s.rng <= a])
        self._sat: dict = {}
        self._fam: dict = {}
        self._cosets: dict = {}

    def _coset(self, s: PartialBijection) -> list[int]:
        hit = self._cosets.get(s)
        if hit is None:
            hit = [self.space.elem_index[g] for g in self.space.group.elements if s.extended_by(g)]
            self._cosets[s] = hit
        return hit

    def _saturation(self, c: frozenset[int], l: int) -> int:
        key = (c, l)
        if key not in self._sat:
            idx = self._coset(PartialBijection.identity_on(sorted(c)))
            self._sat[key] = self.space.saturate_mask(idx, self.space.masks[l])
        return self._sat[key]

    def _level1(self, x: int) -> list[int]:
        sp = self.space
        out = []
        for s in self.sg:
            orbit = mask_of(set(sp.table[self._coset(s), x].tolist()))
            m = sp.full
            for l in range(sp.L):
                sat_l = self._saturation(s.rng, l)
                m &= sat_l if orbit & sp.masks[l] else sp.full & ~sat_l
            out.append(m)
        return out

    def _successor(self, prev: list[int]) -> list[int]:
        full = self.space.full
        out = []
        for i in range(len(self.sg)):
            m = full
            for grp in self.dom_groups[i] + self.rng_groups[i]:
                u = 0
                for j in grp:
                    u |= prev[j]
                m &= u
            out.append(m)
        return out

    def family(self, x: int, alpha: Ordinal | int) -> list[int]:
        alpha = Ordinal.of(alpha)
        if alpha.is_zero:
            raise AlphaError("levels start at 1")
        key = (x, alpha)
        hit = self._fam.get(key)
        if hit is not None:
            return hit
        if alpha == Ordinal(0, 1):
            fam = self._level1(x)
        elif alpha.is_successor:
            fam = self._successor(self.family(x, alpha.pred()))
        else:
            # decreasing sequence below the limit; on a finite space it settles
            start = Ordinal(alpha.omega - 1, 1)
            cur = self.family(x, start)
            while True:
                nxt = self._successor(cur)
                if nxt == cur:
                    break
                cur = nxt
            fam = cur
        self._fam[key] = fam
        return fam

    def mask(self, x: int, s: PartialBijection, alpha: Ordinal | int) -> int:
        try:
            i = self.index[s]
        except KeyError:
            raise AlphaError(f"sigma not in S^G: {s}") from None
        return self.family(x, alpha)[i]


def oracle_for(space: EffectiveGSpace) -> AlphaOracle:
    orc = getattr(space, "_alpha_oracle", None)
    if orc is None:
        orc = AlphaOracle(space)
        space._alpha_oracle = orc
    return orc


def alpha_set_oracle(space: EffectiveGSpace, x: int, s: PartialBijection,
                     alpha: Ordinal | int) -> frozenset[int]:
    return space.set_of(oracle_for(space).mask(x, s, alpha))
