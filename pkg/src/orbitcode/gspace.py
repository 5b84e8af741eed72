"""Finite G-spaces: points, a tagged basis, the action table and the data
derived from them (coding function, Imp relation, saturations, canonical
partition, M_x export).

Point sets are handled internally as Python int bitmasks over point indices;
the public functions return frozensets of indices.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable, Sequence

import numpy as np

from .perm import (
    GroupPresentation,
    PartialBijection,
    Perm,
    PermError,
    coset_elements,
    compose,
    format_finset,
    format_partial,
    identity,
    parse_finset,
    parse_partial,
    parse_perm,
    window_subsets,
)

MAX_POINTS = 10**6


class SpaceError(ValueError):
    pass


class CapacityError(SpaceError):
    pass


@dataclass(frozen=True)
class BasicSet:
    index: int
    members: frozenset[int]
    invariance_tag: frozenset[int]
    name: str = ""


@dataclass(frozen=True)
class LogicSignature:
    relations: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        names = [n for n, _ in self.relations]
        if len(set(names)) != len(names):
            raise SpaceError(f"duplicate relation names in {names}")
        for n, a in self.relations:
            if not re.fullmatch(r"[A-Za-z_<][A-Za-z0-9_<]*", n):
                raise SpaceError(f"bad relation name {n!r}")
            if a < 1:
                raise SpaceError(f"relation {n} has arity {a} < 1")


def bits(mask: int) -> list[int]:
    if mask.bit_length() > 2048:
        return np.flatnonzero(_mask_to_bool(mask, mask.bit_length())).tolist()
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mask_of(indices: Iterable[int]) -> int:
    indices = list(indices)
    if len(indices) > 256:
        arr = np.zeros(max(indices) + 1, dtype=bool)
        arr[indices] = True
        return _bool_to_mask(arr)
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def _bool_to_mask(arr: np.ndarray) -> int:
    return int.from_bytes(np.packbits(arr.astype(bool), bitorder="little").tobytes(), "little")


def _mask_to_bool(mask: int, n: int) -> np.ndarray:
    raw = np.frombuffer(mask.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n].astype(bool)


class EffectiveGSpace:
    """A finite set of points with a permutation-group action and a basis.

    ``table[e, x]`` is the image of point x under the group element with
    index e in ``group.elements``.
    """

    def __init__(self, group: GroupPresentation, points: Sequence, table,
                 basis: Sequence[BasicSet], basis_perm=None, signature=None,
                 check: bool = True, namer: Callable[[int], str] | None = None):
        self.group = group
        self.points = tuple(points)
        self.n = len(self.points)
        if self.n > MAX_POINTS:
            raise CapacityError(f"{self.n} points exceed the capacity {MAX_POINTS}")
        self.elements = group.elements
        self.elem_index = {g: i for i, g in enumerate(self.elements)}
        self.table = np.asarray(table, dtype=np.int64).reshape(len(self.elements), self.n)
        self.basis = tuple(basis)
        self.L = len(self.basis)
        self.masks = [mask_of(b.members) for b in self.basis]
        self.full = (1 << self.n) - 1
        self._namer = namer
        self._index = None
        self._sig = signature
        self._basis_perm = basis_perm
        self._cosets: dict = {}
        self._satbasis: dict = {}
        self._f1: dict = {}
        if check:
            self._check()

    # -- construction checks -------------------------------------------------

    def _check(self):
        G = self.group
        e = self.elem_index[identity(G.window)]
        if not np.array_equal(self.table[e], np.arange(self.n)):
            raise SpaceError("identity does not act trivially")
        for row in self.table:
            if len(np.unique(row)) != self.n or (self.n and (row.min() < 0 or row.max() >= self.n)):
                raise SpaceError("some group element does not act as a bijection")
        for h in G.generators:
            th = self.table[self.elem_index[h]]
            for i, g in enumerate(self.elements):
                if not np.array_equal(self.table[self.elem_index[compose(g, h)]], self.table[i][th]):
                    raise SpaceError(f"action law fails for {g} and generator {h}")
        for b in self.basis:
            if any(k >= G.window for k in b.invariance_tag):
                raise SpaceError(f"basis set {b.index} has a tag outside the window")
            if any(not 0 <= p < self.n for p in b.members):
                raise SpaceError(f"basis set {b.index} has members outside the points")
        cover = 0
        for m in self.masks:
            cover |= m
        if cover != self.full:
            raise SpaceError("basis does not cover the space")
        sig = self.signatures
        if len(set(sig.tolist())) != self.n:
            raise SpaceError("basis does not separate points")
        bp = self.basis_perm
        for g in G.generators:
            for l in range(self.L):
                if self.image_mask(g, self.masks[l]) != self.masks[bp[self.elem_index[g]][l]]:
                    raise SpaceError(f"generator {g} does not permute the basis")
        for b in self.basis:
            for g in coset_elements(G, PartialBijection.identity_on(sorted(b.invariance_tag))):
                if self.masks[bp[self.elem_index[g]][b.index]] != self.masks[b.index]:
                    raise SpaceError(f"basis set {b.index} is not invariant under its tag")

    # -- points ----------------------------------------------------------------

    def name(self, x: int) -> str:
        if self._namer is not None:
            return self._namer(x)
        return str(self.points[x])

    def index_of(self, point) -> int:
        if self._index is None:
            self._index = {p: i for i, p in enumerate(self.points)}
        try:
            return self._index[point]
        except KeyError:
            raise SpaceError(f"unknown point {point!r}") from None

    def act(self, g: Perm, x: int) -> int:
        return int(self.table[self.elem_index[tuple(g)], x])

    def image_mask(self, g: Perm, mask: int) -> int:
        row = self.table[self.elem_index[tuple(g)]]
        if self.n <= 4096:
            out = 0
            for i in bits(mask):
                out |= 1 << int(row[i])
            return out
        sel = _mask_to_bool(mask, self.n)
        img = np.zeros(self.n, dtype=bool)
        img[row[sel]] = True
        return _bool_to_mask(img)

    def set_of(self, mask: int) -> frozenset[int]:
        return frozenset(bits(mask))

    def members(self, l: int) -> frozenset[int]:
        return self.basis[l].members

    # -- basis bookkeeping -----------------------------------------------------

    @property
    def signatures(self) -> np.ndarray:
        """Per point, the bitmask of basis indices containing it."""
        if self._sig is None:
            sig = np.zeros(self.n, dtype=object if self.L > 62 else np.int64)
            for l, b in enumerate(self.basis):
                idx = np.fromiter(b.members, dtype=np.int64, count=len(b.members))
                sig[idx] = sig[idx] | (1 << l)
            self._sig = sig
        return self._sig

    def signature(self, x: int) -> int:
        return int(self.signatures[x])

    @property
    def basis_perm(self) -> list[tuple[int, ...]]:
        """Per group element index, the permutation l -> index of g·A_l."""
        if self._basis_perm is None:
            lookup: dict[int, int] = {}
            for l, m in enumerate(self.masks):
                lookup.setdefault(m, l)
            out = []
            for g in self.elements:
                row = []
                for l in range(self.L):
                    img = self.image_mask(g, self.masks[l])
                    if img not in lookup:
                        raise SpaceError(f"{g} maps basis set {l} outside the basis")
                    row.append(lookup[img])
                out.append(tuple(row))
            self._basis_perm = out
        return self._basis_perm

    def coset_idx(self, s: PartialBijection) -> np.ndarray:
        hit = self._cosets.get(s)
        if hit is None:
            hit = np.array([self.elem_index[g] for g in coset_elements(self.group, s)], dtype=np.int64)
            self._cosets[s] = hit
        return hit

    def orbit_mask(self, x: int, s: PartialBijection) -> int:
        idx = self.coset_idx(s)
        if not len(idx):
            raise SpaceError(f"sigma not in S^G: {format_partial(s)}")
        return mask_of(set(self.table[idx, x].tolist()))

    def f1(self, x: int, s: PartialBijection) -> int:
        """Coding-function value as a bitmask of basis indices."""
        key = (x, s)
        hit = self._f1.get(key)
        if hit is None:
            idx = self.coset_idx(s)
            if not len(idx):
                hit = 0
            else:
                hit = 0
                for v in set(self.signatures[self.table[idx, x]].tolist()):
                    hit |= int(v)
            self._f1[key] = hit
        return hit

    def saturated_basis(self, c: frozenset[int], l: int) -> int:
        """Bitmask of basis indices k with A_k ⊆ V_c A_l."""
        key = (c, l)
        hit = self._satbasis.get(key)
        if hit is None:
            bp = self.basis_perm
            orbit = {bp[i][l] for i in self.coset_idx(PartialBijection.identity_on(sorted(c)))}
            sat = 0
            for j in orbit:
                sat |= self.masks[j]
            hit = 0
            for k in range(self.L):
                if self.masks[k] & ~sat == 0:
                    hit |= 1 << k
            self._satbasis[key] = hit
        return hit

    def saturation_mask(self, c: frozenset[int], l: int) -> int:
        """V_c A_l as a point mask."""
        bp = self.basis_perm
        sat = 0
        for j in {bp[i][l] for i in self.coset_idx(PartialBijection.identity_on(sorted(c)))}:
            sat |= self.masks[j]
        return sat

    def saturate_mask(self, elem_idx: Iterable[int], mask: int) -> int:
        pts = bits(mask)
        if not pts:
            return 0
        elem_idx = list(elem_idx)
        return mask_of(set(self.table[np.ix_(elem_idx, pts)].ravel().tolist())) if elem_idx else 0


# -- public operations ----------------------------------------------------------

def vaught_orbit(space: EffectiveGSpace, s: PartialBijection, x: int) -> frozenset[int]:
    return space.set_of(space.orbit_mask(x, s))


def sat(space: EffectiveGSpace, x: int, s: PartialBijection, l: int) -> bool:
    if not 0 <= l < space.L:
        raise IndexError(f"basis index {l} out of range 0..{space.L - 1}")
    return bool(space.orbit_mask(x, s) & space.masks[l])


class CodingFunction:
    """σ ↦ set of basis indices meeting V_σ x; empty off S^G."""

    def __init__(self, space: EffectiveGSpace, x: int):
        self.space = space
        self.x = x

    def __call__(self, s: PartialBijection) -> frozenset[int]:
        return frozenset(bits(self.mask(s)))

    def mask(self, s: PartialBijection) -> int:
        s.check_window(self.space.group.window)
        return self.space.f1(self.x, s)

    def table(self) -> dict[PartialBijection, frozenset[int]]:
        return {s: self(s) for s in self.space.group.sgfin}


def coding_function(space: EffectiveGSpace, x: int) -> CodingFunction:
    return CodingFunction(space, x)


def imp(space: EffectiveGSpace, c: Iterable[int], l: int, k: int) -> bool:
    """A_k ⊆ V_c A_l."""
    c = frozenset(c)
    if any(i >= space.group.window for i in c):
        raise SpaceError(f"{sorted(c)} leaves the window")
    return bool(space.saturated_basis(c, l) >> k & 1)


def saturate(space: EffectiveGSpace, H, S: Iterable[int]) -> frozenset[int]:
    """{g·x : g ∈ H, x ∈ S}; H is a subgroup presentation or a collection of
    group elements."""
    elems = H.elements if isinstance(H, GroupPresentation) else [tuple(g) for g in H]
    try:
        idx = [space.elem_index[g] for g in elems]
    except KeyError as err:
        raise SpaceError(f"{err.args[0]} is not an element of the group") from None
    return space.set_of(space.saturate_mask(idx, mask_of(S)))


def canonical_partition(space: EffectiveGSpace) -> list[frozenset[int]]:
    """Points grouped by which G-saturations of basis sets contain them."""
    sats = [space.saturation_mask(frozenset(), l) for l in range(space.L)]
    sig = np.zeros(space.n, dtype=object)
    for l, m in enumerate(sats):
        sel = _mask_to_bool(m, space.n)
        sig[sel] = sig[sel] + (1 << l)
    blocks: dict[int, list[int]] = {}
    for x, v in enumerate(sig.tolist()):
        blocks.setdefault(v, []).append(x)
    return sorted((frozenset(b) for b in blocks.values()), key=min)


# -- logic spaces ---------------------------------------------------------------

def atoms_of(signature: LogicSignature, window: int) -> list[tuple[str, tuple[int, ...]]]:
    return [(name, tup) for name, ar in signature.relations
            for tup in product(range(window), repeat=ar)]


def format_atom(atom) -> str:
    name, tup = atom
    return f"{name}({','.join(map(str, tup))})"


def build_logic_action(signature: LogicSignature, window: int,
                       group: GroupPresentation) -> EffectiveGSpace:
    """All structures for the signature on the window, acted on by relabeling."""
    if group.window != window:
        raise SpaceError(f"group window {group.window} differs from {window}")
    for name, ar in signature.relations:
        if ar > window:
            raise SpaceError(f"arity of {name} exceeds window {window}")
    atoms = atoms_of(signature, window)
    m = len(atoms)
    if m >= 40 or 2**m > MAX_POINTS:
        raise CapacityError(f"{2**m} structures exceed the capacity {MAX_POINTS}")
    n = 2**m
    aidx = {a: j for j, a in enumerate(atoms)}
    pts = np.arange(n, dtype=np.int64)
    elems = group.elements
    table = np.zeros((len(elems), n), dtype=np.int64)
    atom_perm = []
    for e, g in enumerate(elems):
        pi = [aidx[(name, tuple(g[t] for t in tup))] for name, tup in atoms]
        atom_perm.append(pi)
        img = np.zeros(n, dtype=np.int64)
        for j in range(m):
            img |= ((pts >> j) & 1) << pi[j]
        table[e] = img
    basis = []
    if m == 0:
        basis.append(BasicSet(0, frozenset([0]), frozenset(), "X"))
        basis_perm = [(0,)] * len(elems)
        sig = np.ones(1, dtype=np.int64)
    else:
        for j, a in enumerate(atoms):
            on = frozenset(np.flatnonzero((pts >> j) & 1).tolist())
            off = frozenset(range(n)) - on
            tag = frozenset(a[1])
            basis.append(BasicSet(2 * j, on, tag, format_atom(a) + "+"))
            basis.append(BasicSet(2 * j + 1, off, tag, format_atom(a) + "-"))
        basis_perm = [tuple(2 * pi[l // 2] + (l & 1) for l in range(2 * m)) for pi in atom_perm]
        sig = np.zeros(n, dtype=object if 2 * m > 62 else np.int64)
        for j in range(m):
            on = (pts >> j) & 1
            sig = sig + np.where(on == 1, 1 << (2 * j), 1 << (2 * j + 1))

    def namer(x: int) -> str:
        held = [format_atom(atoms[j]) for j in range(m) if x >> j & 1]
        return ";".join(held) if held else "-"

    space = EffectiveGSpace(group, range(n), table, basis, basis_perm=basis_perm,
                            signature=sig, namer=namer)
    space.logic = (signature, atoms)
    return space


_ATOM = re.compile(r"\s*([A-Za-z_<][A-Za-z0-9_<]*)\(([^)]*)\)\s*")


def parse_designator(space: EffectiveGSpace, text: str) -> int:
    """'P(0);E(0,1)' -> point index; '' or '-' is the empty structure."""
    if not hasattr(space, "logic"):
        raise SpaceError("structure designators need a logic space")
    signature, atoms = space.logic
    aidx = {a: j for j, a in enumerate(atoms)}
    arity = dict(signature.relations)
    text = text.strip()
    x = 0
    if text not in ("", "-"):
        for item in text.split(";"):
            mt = _ATOM.fullmatch(item)
            if not mt:
                raise SpaceError(f"bad atom {item!r}")
            name, args = mt.group(1), mt.group(2)
            if name not in arity:
                raise SpaceError(f"unknown relation {name!r}")
            try:
                tup = tuple(int(t) for t in args.split(",")) if args.strip() else ()
            except ValueError:
                raise SpaceError(f"bad arguments in {item!r}") from None
            if len(tup) != arity[name]:
                raise SpaceError(f"{name} takes {arity[name]} arguments")
            if (name, tup) not in aidx:
                raise SpaceError(f"atom {item.strip()} leaves the window")
            x |= 1 << aidx[(name, tup)]
    if hasattr(space, "kept"):
        if x not in space.kept:
            raise SpaceError(f"structure {text!r} is not a point of this space")
        return space.kept[x]
    return x


def restrict(space: EffectiveGSpace, keep: Iterable[int]) -> EffectiveGSpace:
    """The subspace on a G-closed set of points, with basis sets intersected."""
    keep = sorted(set(keep))
    pos = {x: i for i, x in enumerate(keep)}
    sub = space.table[:, keep]
    if not np.isin(sub, keep).all():
        raise SpaceError("point set is not closed under the action")
    table = np.vectorize(pos.__getitem__, otypes=[np.int64])(sub) if keep else sub
    basis = [BasicSet(b.index, frozenset(pos[x] for x in b.members if x in pos), b.invariance_tag, b.name)
             for b in space.basis]
    parent = space

    def namer(i: int) -> str:
        return parent.name(keep[i])

    out = EffectiveGSpace(space.group, [space.points[x] for x in keep], table, basis,
                          basis_perm=space.basis_perm, namer=namer)
    if hasattr(space, "logic"):
        out.logic = space.logic
        out.kept = pos
    return out


# -- instance files -------------------------------------------------------------

@dataclass
class Instance:
    window: int
    generators: list[Perm]
    signature: LogicSignature

    def build(self) -> EffectiveGSpace:
        G = GroupPresentation(self.window, tuple(self.generators))
        return build_logic_action(self.signature, self.window, G)


class InstanceError(SpaceError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def parse_instance(text: str) -> Instance:
    window = None
    gens: list[str] = []
    rels: list[tuple[str, int]] = []
    lines = text.splitlines()
    if not lines or lines[0].strip() != "#gspace v1":
        raise InstanceError(1, "missing '#gspace v1' header")
    gen_lines = []
    for no, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "window":
            if window is not None:
                raise InstanceError(no, "duplicate window line")
            try:
                window = int(rest)
            except ValueError:
                raise InstanceError(no, f"bad window {rest!r}") from None
            if not 0 <= window <= 8:
                raise InstanceError(no, f"window {window} outside 0..8")
        elif head == "gen":
            gen_lines.append((no, rest))
        elif head == "rel":
            parts = rest.split()
            if len(parts) != 2 or not parts[1].isdigit():
                raise InstanceError(no, f"expected 'rel <name> <arity>', got {line!r}")
            rels.append((parts[0], int(parts[1])))
        else:
            raise InstanceError(no, f"unknown directive {head!r}")
    if window is None:
        raise InstanceError(len(lines) + 1, "missing window line")
    for no, g in gen_lines:
        try:
            gens.append(parse_perm(g, window))
        except PermError as err:
            raise InstanceError(no, str(err)) from None
    try:
        sig = LogicSignature(tuple(rels))
    except SpaceError as err:
        raise InstanceError(len(lines), str(err)) from None
    for name, ar in rels:
        if ar > window:
            raise InstanceError(len(lines), f"arity of {name} exceeds window {window}")
    return Instance(window, gens, sig)


def load_instance(path: str) -> EffectiveGSpace:
    with open(path) as fh:
        return parse_instance(fh.read()).build()


# -- M_x export -----------------------------------------------------------------

@dataclass
class MxData:
    window: int
    point: str
    sgfin: list[PartialBijection]
    imp: list[tuple[frozenset[int], int, int]]
    sat: list[tuple[PartialBijection, int]]


def mx_data(space: EffectiveGSpace, x: int) -> MxData:
    G = space.group
    sg = list(G.sgfin)
    imps = []
    for c in window_subsets(G.window):
        for l in range(space.L):
            for k in bits(space.saturated_basis(c, l)):
                imps.append((c, l, k))
    sats = [(s, l) for s in sg for l in bits(space.f1(x, s))]
    return MxData(G.window, space.name(x), sg, imps, sats)


def write_mx(data: MxData) -> str:
    out = ["#mx v1", f"window {data.window}", f"point {data.point}", "sgfin:"]
    out += [format_partial(s) for s in data.sgfin]
    out.append("imp:")
    out += [f"{format_finset(c)}|{l}|{k}" for c, l, k in data.imp]
    out.append("sat:")
    out += [f"{format_partial(s)}|{l}" for s, l in data.sat]
    return "\n".join(out) + "\n"


def export_mx(space: EffectiveGSpace, x: int) -> str:
    return write_mx(mx_data(space, x))


def read_mx(text: str) -> MxData:
    lines = text.splitlines()
    if not lines or lines[0] != "#mx v1":
        raise SpaceError("line 1: missing '#mx v1' header")
    window = point = None
    section = None
    sg, imps, sats = [], [], []
    for no, line in enumerate(lines[1:], start=2):
        try:
            if line in ("sgfin:", "imp:", "sat:"):
                section = line[:-1]
            elif section is None and line.startswith("window "):
                window = int(line[7:])
            elif section is None and line.startswith("point "):
                point = line[6:]
            elif section == "sgfin":
                sg.append(parse_partial(line))
            elif section == "imp":
                c, l, k = line.split("|")
                imps.append((parse_finset(c), int(l), int(k)))
            elif section == "sat":
                s, l = line.split("|")
                sats.append((parse_partial(s), int(l)))
            else:
                raise SpaceError(f"unexpected line {line!r}")
        except (ValueError, PermError) as err:
            raise SpaceError(f"line {no}: {err}") from None
    if window is None or point is None:
        raise SpaceError("missing window or point header")
    return MxData(window, point, sg, imps, sats)

