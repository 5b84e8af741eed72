"""Random well-formed codes for property checks."""

from __future__ import annotations

import random

from orbitcode import multicode as M
from orbitcode.ordinal import OMEGA, Ordinal


def s1(rng: random.Random, L: int):
    bits = "".join(rng.choice("01") for _ in range(rng.randint(0, L)))
    return M.sigma1(bits, rng.randint(0, 1) if rng.random() < 0.3 else 0)


def sigma(rng: random.Random, L: int, rank: int):
    """A Sigma-kind code of least rank at most `rank` (finite)."""
    if rank <= 1 or rng.random() < 0.25:
        return s1(rng, L)
    kids = [any_code(rng, L, rank - 1) for _ in range(rng.randint(0, 3))]
    tail = any_code(rng, L, rank - 1) if rng.random() < 0.5 else M.mc_empty
    return M.ssucc(kids, tail)


def any_code(rng: random.Random, L: int, rank: int):
    u = sigma(rng, L, rank)
    return M.pi(u) if rng.random() < 0.5 else u


def ssucc_at(rng: random.Random, L: int, rank: int, tail):
    kids = [any_code(rng, L, rank - 1) for _ in range(rng.randint(0, 4))]
    return M.ssucc(kids, tail, rank)


def slim_omega(rng: random.Random, L: int, last):
    pieces = [(Ordinal(), any_code(rng, L, rng.randint(1, 3)))]
    at = 0
    for _ in range(rng.randint(0, 3)):
        at += rng.randint(1, 3)
        pieces.append((Ordinal(0, at), any_code(rng, L, rng.randint(1, 3))))
    at += rng.randint(1, 2)
    pieces.append((Ordinal(0, at), last))
    return M.slim(OMEGA, pieces)


def joinable_pair(rng: random.Random, L: int):
    """Two codes that join accepts: same node kind and declared rank, with
    tails shared half of the time."""
    choice = rng.random()
    if choice < 0.2:
        return s1(rng, L), s1(rng, L)
    if choice < 0.7:
        r = rng.randint(2, 4)
        tail = any_code(rng, L, r - 1) if rng.random() < 0.5 else M.mc_empty
        other = tail if rng.random() < 0.5 else any_code(rng, L, r - 1)
        return ssucc_at(rng, L, r, tail), ssucc_at(rng, L, r, other)
    last = any_code(rng, L, 2)
    other = last if rng.random() < 0.5 else any_code(rng, L, 2)
    return slim_omega(rng, L, last), slim_omega(rng, L, other)


def variant(rng: random.Random, u):
    """A code equivalent to u by construction: children reshuffled,
    duplicated or themselves replaced by variants."""
    if isinstance(u, M.Pi):
        return M.pi(variant(rng, u.inner))
    if isinstance(u, M.SigmaSucc):
        kids = [variant(rng, c) for c in u.prefix]
        rng.shuffle(kids)
        if kids and rng.random() < 0.5:
            kids.insert(rng.randrange(len(kids) + 1), rng.choice(kids))
        if rng.random() < 0.3:
            kids.append(u.tail)
        return M.ssucc(kids, variant(rng, u.tail), u.rank)
    if isinstance(u, M.SigmaLim):
        pieces = [(at, variant(rng, c)) for at, c in u.pieces]
        if len(pieces) > 1 and rng.random() < 0.5:
            # repeat an earlier child inside the first finite stretch
            first, nxt = pieces[0][0], pieces[1][0]
            if nxt.finite - first.finite > 1:
                pieces.insert(1, (first.succ(), rng.choice(pieces)[1]))
        return M.slim(u.rank, pieces)
    return u


def code_pair(rng: random.Random, L: int):
    """Half the time a variant pair, otherwise two independent codes."""
    u = any_code(rng, L, rng.randint(1, 4))
    if rng.random() < 0.5:
        return u, variant(rng, u)
    return u, any_code(rng, L, rng.randint(1, 4))
