"""Ranked codes for invariant sets, their evaluation and algebra, and the
builders that code every alpha-set of a point.

A code is one of four node kinds:

* ``Sigma1``: a 0/1 sequence over basis indices (finite prefix plus a
  constant tail bit), coding the union of the selected basis sets;
* ``Pi``: the complement of the wrapped code;
* ``SigmaSucc``: an omega-sequence of lower codes (prefix plus constant
  tail code), coding the union;
* ``SigmaLim``: a step function from a limit ordinal to lower codes.

Nodes are immutable and hash-consed through the constructor helpers, so
code trees are DAGs and per-node memo tables stay small.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .gspace import EffectiveGSpace
from .ordinal import OMEGA, Ordinal, parse_ordinal
from .perm import PartialBijection, window_subsets

SIGMA = "Sigma"
PI = "Pi"
ONE = Ordinal(0, 1)


class CodeError(ValueError):
    pass


class Code:
    _hash: int

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, eq=True)
class Sigma1(Code):
    bits: str = ""
    tail: int = 0

    def __post_init__(self):
        b = self.bits
        t = str(self.tail)
        while b.endswith(t):
            b = b[:-1]
        object.__setattr__(self, "bits", b)
        object.__setattr__(self, "_hash", hash(("s1", b, self.tail)))

    def bit(self, l: int) -> int:
        return int(self.bits[l]) if l < len(self.bits) else self.tail

    __hash__ = Code.__hash__


@dataclass(frozen=True, eq=True)
class Pi(Code):
    inner: Code

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("pi", self.inner)))

    __hash__ = Code.__hash__


@dataclass(frozen=True, eq=True)
class SigmaSucc(Code):
    rank: Ordinal
    prefix: tuple
    tail: Code

    def __post_init__(self):
        p = tuple(self.prefix)
        while p and p[-1] == self.tail:
            p = p[:-1]
        object.__setattr__(self, "prefix", p)
        object.__setattr__(self, "_hash", hash(("ss", self.rank, p, self.tail)))

    def child(self, n: int) -> Code:
        return self.prefix[n] if n < len(self.prefix) else self.tail

    def children(self) -> set:
        return set(self.prefix) | {self.tail}

    __hash__ = Code.__hash__


@dataclass(frozen=True, eq=True)
class SigmaLim(Code):
    rank: Ordinal
    pieces: tuple

    def __post_init__(self):
        merged = []
        for at, code in self.pieces:
            if merged and merged[-1][1] == code and merged[-1][0] < at:
                continue
            merged.append((Ordinal.of(at), code))
        p = tuple(merged)
        object.__setattr__(self, "pieces", p)
        object.__setattr__(self, "_hash", hash(("sl", self.rank, p)))

    def value(self, beta: Ordinal) -> Code:
        out = None
        for at, code in self.pieces:
            if at <= beta:
                out = code
        return out

    def children(self) -> set:
        return {c for _, c in self.pieces}

    __hash__ = Code.__hash__


_TABLE: dict = {}


def intern(u: Code) -> Code:
    return _TABLE.setdefault(u, u)


def sigma1(bitstr: str, tail: int = 0) -> Code:
    return intern(Sigma1(bitstr, tail))


def pi(u: Code) -> Code:
    return intern(Pi(u))


def ssucc(prefix, tail: Code, rank: Ordinal | int | None = None) -> Code:
    prefix = tuple(prefix)
    if rank is None:
        rank = max(least_rank(c) for c in prefix + (tail,)).succ()
    return intern(SigmaSucc(Ordinal.of(rank), prefix, tail))


def slim(rank: Ordinal, pieces) -> Code:
    return intern(SigmaLim(Ordinal.of(rank), tuple(pieces)))


mc_empty = sigma1("", 0)
mc_X = sigma1("", 1)


def mc_l(l: int) -> Code:
    return sigma1("0" * l + "1", 0)


# -- validation ------------------------------------------------------------------

_VALID: dict = {}


def validate(u: Code) -> tuple[str, Ordinal]:
    """Kind and least rank of a well-formed code; raises CodeError otherwise."""
    hit = _VALID.get(u)
    if hit is not None:
        if isinstance(hit, CodeError):
            raise hit
        return hit
    try:
        res = _validate(u)
    except CodeError as err:
        _VALID[u] = err
        raise
    _VALID[u] = res
    return res


def _validate(u: Code) -> tuple[str, Ordinal]:
    if isinstance(u, Sigma1):
        if set(u.bits) - {"0", "1"} or u.tail not in (0, 1):
            raise CodeError("s1: bits must be 0/1")
        return SIGMA, ONE
    if isinstance(u, Pi):
        kind, r = validate(u.inner)
        if kind != SIGMA:
            raise CodeError("pi: the wrapped code must be of Sigma kind")
        return PI, r
    if isinstance(u, SigmaSucc):
        kids = list(u.prefix) + [u.tail]
        m = max(validate(c)[1] for c in kids)
        r = u.rank
        if r.is_successor:
            if r <= m or r <= ONE:
                raise CodeError(f"ssucc: child rank {m} not below declared rank {r}")
        elif r == OMEGA:
            if not m.is_finite:
                raise CodeError(f"ssucc: child rank {m} not below declared rank {r}")
        else:
            raise CodeError(f"ssucc: declared rank {r} is neither a successor nor w")
        return SIGMA, m.succ()
    if isinstance(u, SigmaLim):
        lam = u.rank
        if not lam.is_limit:
            raise CodeError(f"slim: domain {lam} is not a limit ordinal")
        if not u.pieces:
            raise CodeError("slim: no pieces")
        if u.pieces[0][0] != Ordinal():
            raise CodeError("slim: first breakpoint must be 0")
        prev = None
        for at, c in u.pieces:
            if prev is not None and not prev < at:
                raise CodeError("slim: breakpoints must increase")
            if not at < lam:
                raise CodeError(f"slim: breakpoint {at} outside domain {lam}")
            if not validate(c)[1] < lam:
                raise CodeError(f"slim: child rank not below {lam}")
            prev = at
        return SIGMA, lam
    raise CodeError(f"not a code: {u!r}")


def least_rank(u: Code) -> Ordinal:
    return validate(u)[1]


def kind_of(u: Code) -> str:
    return validate(u)[0]


def declared_rank(u: Code) -> Ordinal:
    validate(u)
    if isinstance(u, Sigma1):
        return ONE
    if isinstance(u, Pi):
        return declared_rank(u.inner)
    return u.rank


def is_multicode(u: Code, kind: str, alpha: Ordinal | int) -> bool:
    """Whether u is a (co-)alpha-multicode in the intrinsic sense."""
    alpha = Ordinal.of(alpha)
    try:
        validate(u)
    except CodeError:
        return False
    if isinstance(u, Pi):
        return kind == PI and is_multicode(u.inner, SIGMA, alpha)
    if kind != SIGMA:
        return False
    if isinstance(u, Sigma1):
        return alpha == ONE
    if isinstance(u, SigmaSucc):
        m = max(least_rank(c) for c in u.children())
        if alpha.is_successor:
            return alpha > ONE and m < alpha
        return alpha == OMEGA and m.is_finite
    return alpha == u.rank


# -- evaluation --------------------------------------------------------------------

def eval_mask(u: Code, space: EffectiveGSpace) -> int:
    validate(u)
    memo = space.__dict__.setdefault("_code_memo", {})
    return _eval(u, space, memo)


def _eval(u: Code, space: EffectiveGSpace, memo: dict) -> int:
    hit = memo.get(u)
    if hit is not None:
        return hit
    if isinstance(u, Sigma1):
        m = 0
        for l in range(space.L):
            if u.bit(l):
                m |= space.masks[l]
    elif isinstance(u, Pi):
        m = space.full & ~_eval(u.inner, space, memo)
    else:
        m = 0
        for c in u.children():
            m |= _eval(c, space, memo)
    memo[u] = m
    return m


def evaluate(u: Code, space: EffectiveGSpace) -> frozenset[int]:
    return space.set_of(eval_mask(u, space))


# -- equivalence -------------------------------------------------------------------

_EQUIV: dict = {}


def _children(u: Code) -> set:
    return u.children()


def _common_rank(u: Code, v: Code) -> bool:
    if isinstance(u, SigmaLim) and isinstance(v, SigmaLim):
        return u.rank == v.rank
    if isinstance(u, SigmaLim):
        u, v = v, u
    if isinstance(v, SigmaLim):
        return v.rank == OMEGA and least_rank(u).is_finite
    return True


def equiv(u: Code, v: Code) -> bool:
    """The recursive code equivalence; false for ill-formed codes."""
    try:
        validate(u)
        validate(v)
    except CodeError:
        return False
    return _equiv(u, v)


def _equiv(u: Code, v: Code) -> bool:
    if u is v or u == v:
        return True
    key = (u, v)
    hit = _EQUIV.get(key)
    if hit is not None:
        return hit
    if isinstance(u, Pi) and isinstance(v, Pi):
        res = _equiv(u.inner, v.inner)
    elif isinstance(u, (SigmaSucc, SigmaLim)) and isinstance(v, (SigmaSucc, SigmaLim)):
        res = _common_rank(u, v)
        if res:
            cu, cv = _children(u), _children(v)
            res = (all(any(_equiv(a, b) for b in cv) for a in cu)
                   and all(any(_equiv(a, b) for a in cu) for b in cv))
    else:
        res = False
    _EQUIV[key] = res
    _EQUIV[(v, u)] = res
    return res


# -- join, meet, lift --------------------------------------------------------------

def _interleave(pu: list, tu: Code, pw: list, tw: Code, where: str) -> tuple[list, Code]:
    n = max(len(pu), len(pw))
    out = []
    for i in range(n):
        out.append(pu[i] if i < len(pu) else tu)
        out.append(pw[i] if i < len(pw) else tw)
    if tu != tw:
        # the literal interleaving ends in the period tu, tw, tu, ...; one
        # copy of tu followed by the constant tw has the same children
        out.append(tu)
    return out, tw


def _blocks(u: SigmaLim) -> list[tuple[list, Code]]:
    """Per omega-block of the domain, (finite prefix, tail)."""
    out = []
    for k in range(u.rank.omega):
        inside = [(at.finite, c) for at, c in u.pieces if at.omega == k]
        start = u.value(Ordinal(k, 0))
        top = max((f for f, _ in inside), default=0)
        seq = []
        cur = start
        j = 0
        for f in range(top + 1):
            while j < len(inside) and inside[j][0] == f:
                cur = inside[j][1]
                j += 1
            seq.append(cur)
        out.append((seq, cur))
    return out


def join(u: Code, w: Code) -> Code:
    """A code for the union, by interleaving the two sequences."""
    validate(u)
    validate(w)
    if isinstance(u, Sigma1) and isinstance(w, Sigma1):
        # rank 1: pointwise or of the bit sequences
        n = max(len(u.bits), len(w.bits))
        return sigma1("".join(str(u.bit(l) | w.bit(l)) for l in range(n)), u.tail | w.tail)
    if type(u) is not type(w) or not isinstance(u, (SigmaSucc, SigmaLim)):
        raise CodeError("join: both codes must be s1, both ssucc or both slim")
    if u.rank != w.rank:
        raise CodeError(f"join: declared ranks differ ({u.rank} vs {w.rank}); lift first")
    if isinstance(u, SigmaSucc):
        pre, tail = _interleave(list(u.prefix), u.tail, list(w.prefix), w.tail, "")
        return ssucc(pre, tail, u.rank)
    pieces = []
    for k, ((pu, tu), (pw, tw)) in enumerate(zip(_blocks(u), _blocks(w))):
        pre, tail = _interleave(pu, tu, pw, tw, f" in block {k}")
        for i, c in enumerate(pre + [tail]):
            pieces.append((Ordinal(k, i), c))
    return slim(u.rank, pieces)


def meet(u: Code, w: Code) -> Code:
    """A co-code for the intersection of two co-codes."""
    if not (isinstance(u, Pi) and isinstance(w, Pi)):
        raise CodeError("meet: both codes must be pi-wrapped")
    return pi(join(u.inner, w.inner))


def _raise_to(u: Code, beta: Ordinal) -> Code:
    if beta.is_limit:
        return slim(beta, [(Ordinal(), u)])
    return ssucc((), u, beta)


def lift(u: Code, beta: Ordinal | int) -> tuple[Code, Code]:
    """Codes of kind Sigma and Pi at rank beta for the same set."""
    beta = Ordinal.of(beta)
    kind, r = validate(u)
    if not beta > r:
        raise CodeError(f"lift: target rank {beta} must exceed {r}")
    inner = pi(u) if kind == SIGMA else u.inner
    return _raise_to(u, beta), pi(_raise_to(inner, beta))


# -- text form ---------------------------------------------------------------------

def to_text(u: Code) -> str:
    out: list[str] = []
    _emit(u, out)
    return "".join(out)


def _emit(u: Code, out: list[str]) -> None:
    if isinstance(u, Sigma1):
        out.append(f'(s1 "{u.bits}" tail {u.tail})')
    elif isinstance(u, Pi):
        out.append("(pi ")
        _emit(u.inner, out)
        out.append(")")
    elif isinstance(u, SigmaSucc):
        out.append(f"(ssucc rank {u.rank} [")
        for i, c in enumerate(u.prefix):
            if i:
                out.append(" ")
            _emit(c, out)
        out.append("] tail ")
        _emit(u.tail, out)
        out.append(")")
    else:
        out.append(f"(slim rank {u.rank} [")
        for i, (at, c) in enumerate(u.pieces):
            out.append(" (" if i else "(")
            out.append(f"{at} ")
            _emit(c, out)
            out.append(")")
        out.append("])")


_TOKEN = re.compile(r'\s*(?:("[01]*")|([()\[\]])|([^\s()\[\]"]+))')


def _tokens(text: str) -> list[str]:
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise CodeError(f"unexpected character at offset {pos}")
        out.append(m.group(m.lastindex))
        pos = m.end()
    return out


def from_text(text: str) -> Code:
    toks = _tokens(text)
    pos = 0

    def take(expect: str | None = None) -> str:
        nonlocal pos
        if pos >= len(toks):
            raise CodeError("unexpected end of code text")
        t = toks[pos]
        if expect is not None and t != expect:
            raise CodeError(f"expected {expect!r}, found {t!r}")
        pos += 1
        return t

    def ordinal() -> Ordinal:
        t = take()
        try:
            return parse_ordinal(t)
        except ValueError as err:
            raise CodeError(str(err)) from None

    def code() -> Code:
        take("(")
        head = take()
        if head == "s1":
            b = take()
            if not b.startswith('"'):
                raise CodeError("s1 needs a quoted bit string")
            take("tail")
            t = take()
            if t not in ("0", "1"):
                raise CodeError("s1 tail must be 0 or 1")
            res = sigma1(b[1:-1], int(t))
        elif head == "pi":
            res = pi(code())
        elif head == "ssucc":
            take("rank")
            r = ordinal()
            take("[")
            kids = []
            while toks[pos:pos + 1] != ["]"]:
                kids.append(code())
            take("]")
            take("tail")
            res = ssucc(kids, code(), r)
        elif head == "slim":
            take("rank")
            r = ordinal()
            take("[")
            pieces = []
            while toks[pos:pos + 1] != ["]"]:
                take("(")
                at = ordinal()
                pieces.append((at, code()))
                take(")")
            take("]")
            res = slim(r, pieces)
        else:
            raise CodeError(f"unknown code head {head!r}")
        take(")")
        return res

    res = code()
    if pos != len(toks):
        raise CodeError("trailing text after code")
    return res


# -- the builders ------------------------------------------------------------------

def rho(window: int) -> list[frozenset[int]]:
    """Enumeration of window subsets, length-then-lexicographic."""
    return window_subsets(window)


def mu(space: EffectiveGSpace) -> tuple[PartialBijection, ...]:
    """Enumeration of extendable partial maps, length-then-lexicographic."""
    return space.group.sgfin


def imp_code(space: EffectiveGSpace, c: frozenset[int], l: int) -> Code:
    """Rank-1 code of V_c A_l: the basis sets it contains."""
    m = space.saturated_basis(frozenset(c), l)
    return sigma1("".join("1" if m >> k & 1 else "0" for k in range(space.L)), 0)


class UxBuilder:
    """Builds (u, w, v) for each (level, partial map) of one point."""

    def __init__(self, space: EffectiveGSpace, x: int):
        from .alphasets import engine_for

        self.space = space
        self.x = x
        self.G = space.group
        self.rho = rho(self.G.window)
        self.mu = mu(space)
        self.top = engine_for(space).gamma_star(x) + 2
        self.memo: dict = {}

    def build(self, s: PartialBijection, alpha: Ordinal) -> tuple[Code, Code, Code]:
        key = (alpha, s)
        hit = self.memo.get(key)
        if hit is None:
            if alpha.is_zero:
                raise CodeError("levels start at 1")
            if alpha == ONE:
                hit = self._first(s)
            elif alpha.is_successor:
                hit = self._successor(s, alpha.pred())
            else:
                hit = self._limit(s, alpha)
            self.memo[key] = hit
        return hit

    def _first(self, s: PartialBijection):
        sp = self.space
        F = sp.f1(self.x, s)
        c = s.rng
        w = [pi(imp_code(sp, c, l)) if F >> l & 1 else mc_empty for l in range(sp.L)]
        v = [mc_empty if F >> l & 1 else imp_code(sp, c, l) for l in range(sp.L)]
        return self._combine(ssucc(w, mc_empty), ssucc(v, mc_empty))

    def _successor(self, s: PartialBijection, beta: Ordinal):
        lower = [self.build(t, beta)[0] if s.is_subset(t) else None for t in self.mu]
        r = least_rank(self.build(s, beta)[0]).succ()

        def side(attr: str, need: frozenset[int]):
            out = []
            for b in self.rho:
                if not need <= b:
                    out.append(mc_empty)
                    continue
                seq = [u if u is not None and getattr(t, attr) == b else mc_empty
                       for t, u in zip(self.mu, lower)]
                out.append(pi(ssucc(seq, mc_empty, r)))
            return ssucc(out, mc_empty)

        return self._combine(side("dom", s.dom), side("rng", s.rng))

    def _limit(self, s: PartialBijection, lam: Ordinal):
        pieces = [(Ordinal(), mc_empty)]
        for b in range(1, self.top + 1):
            u = self.build(s, Ordinal(0, b))[0]
            pieces.append((Ordinal(0, b), pi(ssucc((), u, least_rank(u).succ()))))
        w = slim(lam, pieces)
        return self._combine(w, w)

    @staticmethod
    def _combine(w: Code, v: Code):
        return meet(pi(w), pi(v)), w, v


def builder_for(space: EffectiveGSpace, x: int) -> UxBuilder:
    cache = space.__dict__.setdefault("_ux_builders", {})
    b = cache.get(x)
    if b is None:
        b = cache[x] = UxBuilder(space, x)
    return b


def _build(space: EffectiveGSpace, x: int, s: PartialBijection, alpha):
    if not space.coset_idx(s).size:
        raise CodeError(f"sigma not in S^G: {s}")
    return builder_for(space, x).build(s, Ordinal.of(alpha))


def build_ux(space: EffectiveGSpace, x: int, s: PartialBijection, alpha: Ordinal | int) -> Code:
    """A co-code whose set is B_alpha(x, s)."""
    return _build(space, x, s, alpha)[0]


def build_wx(space: EffectiveGSpace, x: int, s: PartialBijection, alpha: Ordinal | int) -> Code:
    return _build(space, x, s, alpha)[1]


def build_vx(space: EffectiveGSpace, x: int, s: PartialBijection, alpha: Ordinal | int) -> Code:
    return _build(space, x, s, alpha)[2]


def code_size(u: Code) -> int:
    """Number of distinct nodes in the DAG."""
    seen = set()
    stack = [u]
    while stack:
        c = stack.pop()
        if c in seen:
            continue
        seen.add(c)
        if isinstance(c, Pi):
            stack.append(c.inner)
        elif isinstance(c, (SigmaSucc, SigmaLim)):
            stack.extend(c.children())
    return len(seen)

