"""Permutations of a finite window, finite partial bijections, and
materialized permutation groups.

A total permutation of the window {0..n-1} is a tuple of images.  Groups are
closed under their generators once and cached; every coset and extension
query is answered by filtering the enumerated elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

Perm = tuple[int, ...]

MAX_WINDOW = 8


class PermError(ValueError):
    pass


def identity(n: int) -> Perm:
    return tuple(range(n))


def compose(g: Perm, h: Perm) -> Perm:
    """g∘h: apply h first, then g."""
    return tuple(g[i] for i in h)


def inverse(g: Perm) -> Perm:
    inv = [0] * len(g)
    for i, j in enumerate(g):
        inv[j] = i
    return tuple(inv)


def is_perm(g: Sequence[int]) -> bool:
    return sorted(g) == list(range(len(g)))


def cycles(g: Perm) -> list[tuple[int, ...]]:
    seen: set[int] = set()
    out = []
    for start in range(len(g)):
        if start in seen or g[start] == start:
            continue
        cyc = [start]
        seen.add(start)
        j = g[start]
        while j != start:
            cyc.append(j)
            seen.add(j)
            j = g[j]
        out.append(tuple(cyc))
    return out


def format_perm(g: Perm) -> str:
    cs = cycles(g)
    if not cs:
        return "()"
    return "".join("(" + " ".join(map(str, c)) + ")" for c in cs)


def parse_cycles(text: str) -> list[tuple[int, ...]]:
    """Parse disjoint-cycle notation into a list of cycles."""
    s = text.strip()
    out = []
    i = 0
    while i < len(s):
        if s[i].isspace():
            i += 1
            continue
        if s[i] != "(":
            raise PermError(f"expected '(' at offset {i} in {text!r}")
        j = s.find(")", i)
        if j < 0:
            raise PermError(f"unclosed cycle in {text!r}")
        body = s[i + 1:j].replace(",", " ").split()
        try:
            cyc = tuple(int(t) for t in body)
        except ValueError:
            raise PermError(f"non-integer point in {text!r}") from None
        if any(k < 0 for k in cyc):
            raise PermError(f"negative point in {text!r}")
        if len(set(cyc)) != len(cyc):
            raise PermError(f"repeated point inside a cycle of {text!r}")
        if cyc:
            out.append(cyc)
        i = j + 1
    used: set[int] = set()
    for c in out:
        if used & set(c):
            raise PermError(f"cycles are not disjoint in {text!r}")
        used |= set(c)
    return out


def parse_perm(text: str, window: int) -> Perm:
    img = list(range(window))
    for cyc in parse_cycles(text):
        if max(cyc) >= window:
            raise PermError(f"point {max(cyc)} outside window {window}")
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            img[a] = b
    return tuple(img)


def format_finset(s: Iterable[int]) -> str:
    s = sorted(s)
    return ",".join(map(str, s)) if s else "-"


def parse_finset(text: str) -> frozenset[int]:
    text = text.strip()
    if text in ("", "-"):
        return frozenset()
    try:
        vals = [int(t) for t in text.split(",")]
    except ValueError:
        raise PermError(f"bad finite set {text!r}") from None
    if any(v < 0 for v in vals):
        raise PermError(f"negative element in {text!r}")
    return frozenset(vals)


@dataclass(frozen=True, order=True)
class PartialBijection:
    """A finite injective map on naturals, stored as its graph sorted by source.

    Ordering is lexicographic on the graph.
    """

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple(sorted((int(a), int(b)) for a, b in self.pairs))
        srcs = [a for a, _ in pairs]
        dsts = [b for _, b in pairs]
        if len(set(srcs)) != len(srcs) or len(set(dsts)) != len(dsts):
            raise PermError(f"not a partial bijection: {pairs}")
        if any(a < 0 or b < 0 for a, b in pairs):
            raise PermError(f"negative point in {pairs}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_dict(cls, m: dict[int, int]) -> PartialBijection:
        return cls(tuple(m.items()))

    @classmethod
    def identity_on(cls, s: Iterable[int]) -> PartialBijection:
        return cls(tuple((k, k) for k in s))

    @classmethod
    def restrict(cls, g: Perm, domain: Iterable[int]) -> PartialBijection:
        return cls(tuple((k, g[k]) for k in domain))

    @cached_property
    def dom(self) -> frozenset[int]:
        return frozenset(a for a, _ in self.pairs)

    @cached_property
    def rng(self) -> frozenset[int]:
        return frozenset(b for _, b in self.pairs)

    @cached_property
    def mapping(self) -> dict[int, int]:
        return dict(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __call__(self, k: int) -> int:
        return self.mapping[k]

    def extended_by(self, g: Perm) -> bool:
        """True when the total permutation g agrees with this map."""
        return all(g[a] == b for a, b in self.pairs)

    def is_subset(self, other: PartialBijection) -> bool:
        m = other.mapping
        return all(m.get(a) == b for a, b in self.pairs)

    def check_window(self, window: int) -> None:
        for a, b in self.pairs:
            if a >= window or b >= window:
                raise PermError(f"partial bijection {format_partial(self)} leaves window {window}")

    def to_perm(self, window: int) -> Perm:
        if self.dom != frozenset(range(window)):
            raise PermError(f"{format_partial(self)} is not total on window {window}")
        return tuple(self.mapping[k] for k in range(window))

    def __str__(self) -> str:
        return format_partial(self)


EMPTY = PartialBijection()


def format_partial(s: PartialBijection) -> str:
    if not s.pairs:
        return "-"
    return ",".join(f"{a}>{b}" for a, b in s.pairs)


def parse_partial(text: str) -> PartialBijection:
    text = text.strip()
    if text in ("", "-"):
        return EMPTY
    pairs = []
    for item in text.split(","):
        a, sep, b = item.partition(">")
        if not sep:
            raise PermError(f"expected 'a>b' in {item!r}")
        try:
            pairs.append((int(a), int(b)))
        except ValueError:
            raise PermError(f"non-integer point in {item!r}") from None
    return PartialBijection(tuple(pairs))


def mu_key(s: PartialBijection):
    """Length-then-lexicographic sort key."""
    return (len(s.pairs), s.pairs)


def invert(s: PartialBijection) -> PartialBijection:
    return PartialBijection(tuple((b, a) for a, b in s.pairs))


def compose_right(s: PartialBijection, f: Perm) -> PartialBijection:
    """s∘f, defined on {k : f(k) ∈ dom s}."""
    s.check_window(len(f))
    m = s.mapping
    return PartialBijection(tuple((k, m[f[k]]) for k in range(len(f)) if f[k] in m))


def compose_left(f: Perm, s: PartialBijection) -> PartialBijection:
    """f∘s, with the same domain as s."""
    s.check_window(len(f))
    return PartialBijection(tuple((a, f[b]) for a, b in s.pairs))


@dataclass(frozen=True)
class GroupPresentation:
    """A permutation group on {0..window-1} given by generators."""

    window: int
    generators: tuple[Perm, ...] = ()
    _cosets: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if not 0 <= self.window <= MAX_WINDOW:
            raise PermError(f"window {self.window} outside 0..{MAX_WINDOW}")
        gens = tuple(tuple(g) for g in self.generators)
        for g in gens:
            if len(g) != self.window or not is_perm(g):
                raise PermError(f"generator {g} is not a permutation of window {self.window}")
        object.__setattr__(self, "generators", gens)

    @cached_property
    def elements(self) -> tuple[Perm, ...]:
        e = identity(self.window)
        seen = {e}
        frontier = [e]
        while frontier:
            nxt = []
            for h in frontier:
                for g in self.generators:
                    k = compose(g, h)
                    if k not in seen:
                        seen.add(k)
                        nxt.append(k)
            frontier = nxt
        return tuple(sorted(seen))

    @cached_property
    def element_set(self) -> frozenset[Perm]:
        return frozenset(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, g) -> bool:
        return tuple(g) in self.element_set

    def __hash__(self):
        return hash((self.window, self.generators))

    @cached_property
    def sgfin(self) -> tuple[PartialBijection, ...]:
        """All partial maps extendable to a group element, length-then-lex."""
        out: set[PartialBijection] = set()
        for r in range(self.window + 1):
            for d in combinations(range(self.window), r):
                for g in self.elements:
                    out.add(PartialBijection.restrict(g, d))
        return tuple(sorted(out, key=mu_key))


def _with_elements(window: int, elems: Sequence[Perm]) -> GroupPresentation:
    e = identity(window)
    gens = tuple(g for g in sorted(elems) if g != e)
    G = GroupPresentation(window, gens)
    G.__dict__["elements"] = tuple(sorted(set(elems) | {e}))
    return G


def symmetric_group(n: int) -> GroupPresentation:
    if n < 2:
        return GroupPresentation(n, ())
    gens = [parse_perm("(0 1)", n)]
    if n > 2:
        gens.append(tuple(list(range(1, n)) + [0]))
    return GroupPresentation(n, tuple(gens))


def cyclic_group(n: int) -> GroupPresentation:
    if n < 2:
        return GroupPresentation(n, ())
    return GroupPresentation(n, (tuple(list(range(1, n)) + [0]),))


def trivial_group(n: int) -> GroupPresentation:
    return GroupPresentation(n, ())


def coset_elements(G: GroupPresentation, s: PartialBijection) -> tuple[Perm, ...]:
    """All g in G extending s, in lexicographic order."""
    hit = G._cosets.get(s)
    if hit is None:
        s.check_window(G.window)
        hit = tuple(g for g in G.elements if s.extended_by(g))
        G._cosets[s] = hit
    return hit


def coset_nonempty(G: GroupPresentation, s: PartialBijection) -> bool:
    return bool(coset_elements(G, s))


def extensions(G: GroupPresentation, s: PartialBijection, side: str,
               target: Iterable[int]) -> list[PartialBijection]:
    """All s' ⊇ s in S^G with dom s' (side='domain') or rng s' (side='range')
    equal to target, lexicographically ordered."""
    target = frozenset(target)
    if side == "domain":
        if not s.dom <= target:
            raise PermError("target must contain the domain")
        dom = sorted(target)
        out = {PartialBijection.restrict(g, dom) for g in coset_elements(G, s)}
    elif side == "range":
        if not s.rng <= target:
            raise PermError("target must contain the range")
        out = set()
        for g in coset_elements(G, s):
            gi = inverse(g)
            out.add(PartialBijection(tuple((gi[b], b) for b in target)))
    else:
        raise PermError(f"side must be 'domain' or 'range', not {side!r}")
    if any(k >= G.window for k in target):
        raise PermError(f"target {sorted(target)} leaves window {G.window}")
    return sorted(out)


def pointwise_stabilizer(G: GroupPresentation, d: Iterable[int]) -> GroupPresentation:
    d = frozenset(d)
    if any(k >= G.window or k < 0 for k in d):
        raise PermError(f"{sorted(d)} is not inside window {G.window}")
    if not d:
        return G
    return _with_elements(G.window, [g for g in G.elements if all(g[k] == k for k in d)])


def window_subsets(window: int) -> list[frozenset[int]]:
    """Subsets of the window, length-then-lexicographic."""
    return [frozenset(c) for r in range(window + 1) for c in combinations(range(window), r)]
