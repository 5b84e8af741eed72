"""Deciding whether two points share an orbit.

When the stabilized labels of the two points agree, a group element is
assembled by alternately extending a partial map on the domain side and on
the range side, each time keeping the labels of (x, sigma) and
(y, id_{rng sigma}) equal.  When they disagree, the least disagreeing level
yields a code separating the two coset sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .alphasets import AlphaError, engine_for
from .gspace import CodingFunction, EffectiveGSpace
from .multicode import Code, build_ux
from .ordinal import Ordinal
from .perm import (
    EMPTY,
    GroupPresentation,
    PartialBijection,
    Perm,
    coset_nonempty,
    compose_right,
    extensions,
    invert,
)


@dataclass(frozen=True)
class BackForthState:
    step: int
    n: int
    sigma: PartialBijection
    basic: int | None
    labels_agree: bool


@dataclass(frozen=True)
class SeparationWitness:
    level: Ordinal
    code: Code
    side: str = "first"


@dataclass
class OrbitDecision:
    same: bool
    element: Perm | None = None
    witness: SeparationWitness | None = None
    states: list[BackForthState] = field(default_factory=list)


def _least_basic(space: EffectiveGSpace, point: int, n: int) -> int | None:
    """Least basis index containing the point and invariant under V_n."""
    sig = space.signature(point)
    seg = frozenset(range(n))
    for b in space.basis:
        if sig >> b.index & 1 and b.invariance_tag <= seg:
            return b.index
    return None


def separate(space: EffectiveGSpace, x: int, s: PartialBijection, y: int,
             d: PartialBijection) -> SeparationWitness:
    """A code containing B(x, s) and missing B(y, d) at the least level where
    the two differ."""
    if s.rng != d.rng:
        raise AlphaError("separate needs partial maps with a common range")
    eng = engine_for(space)
    i, j = eng.sigma_index(s), eng.sigma_index(d)
    top = eng.stable_level([x, y])
    for k in range(1, top + 1):
        if eng.point_labels(x, k)[i] != eng.point_labels(y, k)[j]:
            return SeparationWitness(Ordinal(0, k), build_ux(space, x, s, k), "first")
    raise AlphaError("no separation exists")


def decide_orbit(space: EffectiveGSpace, x: int, y: int) -> OrbitDecision:
    eng = engine_for(space)
    G = space.group
    top = eng.stable_level([x, y])
    lx = eng.point_labels(x, top)
    ly = eng.point_labels(y, top)

    def agree(t: PartialBijection) -> bool:
        return lx[eng.index[t]] == ly[eng.identity_index[t.rng]]

    if not agree(EMPTY):
        return OrbitDecision(False, witness=separate(space, x, EMPTY, y, EMPTY))
    W = G.window
    sigma, n = EMPTY, 0
    states = [BackForthState(0, 0, EMPTY, _least_basic(space, y, 0), True)]
    step = 0
    while len(sigma) < W:
        step += 1
        side = "domain" if step % 2 else "range"
        cover = sigma.dom if side == "domain" else sigma.rng
        n = min(W, max(n + 1, max(cover) + 1 if cover else 0))
        chosen = next((t for t in extensions(G, sigma, side, range(n)) if agree(t)), None)
        if chosen is None:
            raise RuntimeError(f"no label-preserving extension at step {step}")
        sigma = chosen
        point = x if step % 2 else y
        states.append(BackForthState(step, n, sigma, _least_basic(space, point, n), True))
    g = sigma.to_perm(W)
    if space.act(g, x) != y:
        raise RuntimeError("constructed element does not map x to y")
    return OrbitDecision(True, element=g, states=states)


def complete_to_group_element(G: GroupPresentation, s: PartialBijection) -> Perm:
    """Extend s to a group element by alternating least extensions: first on
    the range side, then on the domain side, growing an initial segment."""
    s.check_window(G.window)
    if not coset_nonempty(G, s):
        raise AlphaError(f"sigma not in S^G: {s}")
    W = G.window
    k = max(s.rng) + 1 if s.rng else 0
    step = 0
    while len(s) < W:
        if step % 2 == 0:
            seg = range(min(W, k + step + 1))
            cands = [invert(t) for t in extensions(G, s, "range", seg)]
            s = invert(min(cands))
            k = max(s.dom) + 1 if s.dom else 0
        else:
            seg = range(min(W, k + step + 1))
            s = min(extensions(G, s, "domain", seg))
            k = max(s.rng) + 1 if s.rng else 0
        step += 1
    return s.to_perm(W)


class RecodedFunction(CodingFunction):
    """Coding function of g·x computed from that of x."""

    def __init__(self, space: EffectiveGSpace, x: int, g: Perm):
        super().__init__(space, x)
        self.g = tuple(g)

    def mask(self, s: PartialBijection) -> int:
        s.check_window(self.space.group.window)
        if not coset_nonempty(self.space.group, s):
            return 0
        return self.space.f1(self.x, compose_right(s, self.g))


def recode(space: EffectiveGSpace, x: int, g: Perm) -> CodingFunction:
    if tuple(g) not in space.group:
        raise AlphaError(f"{g} is not a group element")
    return RecodedFunction(space, x, g)
