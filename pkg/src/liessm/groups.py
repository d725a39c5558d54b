"""Finite groups, word-problem datasets, and the rotation state-tracking task.

Composition convention, pinned once for everything in this module:
``compose(a, b)`` means "do a, then b". Permutations act on positions, so on
value maps this is a o b; matrix groups act on column vectors, so it is
M_b @ M_a. Word labels are the running prefix products
labels[i] = compose(labels[i-1], tokens[i]).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError, ValidationError

__all__ = [
    "FiniteGroup",
    "WordRecord",
    "RotationRecord",
    "make_group",
    "compose_word",
    "group_derived_series",
    "group_lower_central_series",
    "classify_group",
    "gen_word_dataset",
    "a5_rotation_elements",
    "gen_rotation_dataset",
    "sequence_accuracy",
    "find_isomorphism",
    "check_group_axioms",
]

GROUP_NAMES = ("C2", "C3", "D8", "H3", "S3", "S4", "S5", "A4", "A5")


@dataclass(frozen=True)
class FiniteGroup:
    """Composition table over a canonical 0-based element indexing."""

    name: str
    order: int
    table: np.ndarray  # (order, order) ints; table[a, b] = "a then b"
    identity: int
    inverse: np.ndarray  # (order,)
    generators: tuple
    element_names: tuple

    def compose(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def element_order(self, a: int) -> int:
        x = a
        k = 1
        while x != self.identity:
            x = self.compose(x, a)
            k += 1
        return k


def _group_from_elements(name, elements, compose_fn, generators, namer=str) -> FiniteGroup:
    index = {e: i for i, e in enumerate(elements)}
    order = len(elements)
    table = np.zeros((order, order), dtype=np.int64)
    for i, a in enumerate(elements):
        for j, b in enumerate(elements):
            table[i, j] = index[compose_fn(a, b)]
    identity = next(i for i in range(order) if np.array_equal(table[i], np.arange(order)))
    inverse = np.zeros(order, dtype=np.int64)
    for i in range(order):
        inverse[i] = int(np.where(table[i] == identity)[0][0])
    return FiniteGroup(
        name=name,
        order=order,
        table=table,
        identity=identity,
        inverse=inverse,
        generators=tuple(index[g] for g in generators),
        element_names=tuple(namer(e) for e in elements),
    )


def _compose_perm(a: tuple, b: tuple) -> tuple:
    """'a then b' for permutations acting on positions."""
    return tuple(a[b[i]] for i in range(len(a)))


def _perm_parity(p: tuple) -> int:
    seen = [False] * len(p)
    parity = 0
    for i in range(len(p)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = p[j]
                length += 1
            parity ^= (length - 1) & 1
    return parity


def _cyclic(n: int) -> FiniteGroup:
    elems = list(range(n))
    return _group_from_elements(
        f"C{n}", elems, lambda a, b: (a + b) % n, [1 % n], namer=str
    )


def _symmetric(k: int) -> FiniteGroup:
    elems = list(itertools.permutations(range(k)))  # lexicographic one-line order
    ident = tuple(range(k))
    transposition = (1, 0) + tuple(range(2, k))
    cycle = tuple(range(1, k)) + (0,)
    gens = [transposition, cycle] if k > 2 else [transposition]
    return _group_from_elements(f"S{k}", elems, _compose_perm, gens, namer=str)


def _alternating(k: int) -> FiniteGroup:
    elems = [p for p in itertools.permutations(range(k)) if _perm_parity(p) == 0]
    three_cycle = (1, 2, 0) + tuple(range(3, k))
    if k % 2 == 1:
        long_cycle = tuple(range(1, k)) + (0,)  # a k-cycle is even for odd k
    else:
        long_cycle = (0,) + tuple(range(2, k)) + (1,)
    return _group_from_elements(
        f"A{k}", elems, _compose_perm, [three_cycle, long_cycle], namer=str
    )


def _dihedral8() -> FiniteGroup:
    """Square symmetries as vertex permutations, indexed (rotation, flip)."""

    def perm(r: int, f: int) -> tuple:
        out = []
        for i in range(4):
            j = (-i) % 4 if f else i
            out.append((j + r) % 4)
        return tuple(out)

    elems = [(r, f) for r in range(4) for f in range(2)]
    perm_of = {e: perm(*e) for e in elems}
    elem_of = {v: k for k, v in perm_of.items()}

    def compose(a, b):
        return elem_of[_compose_perm(perm_of[a], perm_of[b])]

    return _group_from_elements(
        "D8", elems, compose, [(1, 0), (0, 1)], namer=lambda e: f"r{e[0]}f{e[1]}"
    )


def _heisenberg8() -> FiniteGroup:
    """Upper unitriangular 3x3 matrices over the two-element field.

    Elements are (a, b, c) for [[1, a, c], [0, 1, b], [0, 0, 1]], indexed
    lexicographically; 'x then y' multiplies the matrices as M_y M_x mod 2.
    """
    elems = [(a, b, c) for a in range(2) for b in range(2) for c in range(2)]

    def compose(x, y):
        a1, b1, c1 = x
        a2, b2, c2 = y
        return ((a1 + a2) % 2, (b1 + b2) % 2, (c1 + c2 + a2 * b1) % 2)

    return _group_from_elements(
        "H3", elems, compose, [(1, 0, 0), (0, 1, 0)], namer=str
    )


def make_group(name: str) -> FiniteGroup:
    """Construct a named group: C<n>, D8, H3, S3, S4, S5, A4, or A5."""
    cyclic = re.fullmatch(r"C(\d+)", name)
    if cyclic:
        n = int(cyclic.group(1))
        if n < 1:
            raise ValidationError("cyclic group order must be positive")
        return _cyclic(n)
    if name == "D8":
        return _dihedral8()
    if name == "H3":
        return _heisenberg8()
    if name in ("S3", "S4", "S5"):
        return _symmetric(int(name[1]))
    if name in ("A4", "A5"):
        return _alternating(int(name[1]))
    raise ValidationError(f"unknown group {name!r}; expected C<n>, D8, H3, S3, S4, S5, A4, A5")


def compose_word(group: FiniteGroup, tokens) -> int:
    """Fold the composition table left to right starting at the identity."""
    g = group.identity
    for t in tokens:
        t = int(t)
        if not 0 <= t < group.order:
            raise ValidationError(f"token {t} outside group of order {group.order}")
        g = int(group.table[g, t])
    return g


def check_group_axioms(group: FiniteGroup, sample_triples: int = 10000, seed: int = 0):
    """Raise unless identity/inverse laws hold and associativity checks pass.

    Associativity is exhaustive for order <= 60 and sampled beyond that.
    """
    t = group.table
    n = group.order
    e = group.identity
    if not (np.array_equal(t[e], np.arange(n)) and np.array_equal(t[:, e], np.arange(n))):
        raise InvariantError("identity law failed")
    inv = group.inverse
    if not (np.all(t[np.arange(n), inv] == e) and np.all(t[inv, np.arange(n)] == e)):
        raise InvariantError("inverse law failed")
    if n <= 60:
        # t[t, :][a, b, c] = (a b) c and t[:, t][a, b, c] = a (b c)
        if not np.array_equal(t[t, :], t[:, t]):
            raise InvariantError("associativity failed on an exhaustive check")
    else:
        rng = np.random.default_rng(seed)
        a, b, c = rng.integers(0, n, size=(3, sample_triples))
        if not np.all(t[t[a, b], c] == t[a, t[b, c]]):
            raise InvariantError("associativity failed on sampled triples")


def _subgroup_closure(table: np.ndarray, identity: int, seed_elems) -> np.ndarray:
    member = np.zeros(table.shape[0], dtype=bool)
    member[identity] = True
    member[list(seed_elems)] = True
    while True:
        idx = np.flatnonzero(member)
        products = table[np.ix_(idx, idx)].ravel()
        new = member.copy()
        new[products] = True
        if np.array_equal(new, member):
            return idx
        member = new


def _commutator_closure(group: FiniteGroup, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    t = group.table
    inv = group.inverse
    step = t[np.ix_(inv[left], inv[right])]
    step = t[step, left[:, None]]
    step = t[step, right[None, :]]
    return _subgroup_closure(t, group.identity, np.unique(step.ravel()))


def group_derived_series(group: FiniteGroup) -> list[int]:
    """Orders of the iterated commutator subgroups, down to 1 or stabilization."""
    if group.order > 120:
        raise ValidationError("derived series is computed exhaustively only up to order 120")
    orders = [group.order]
    current = np.arange(group.order)
    while True:
        nxt = _commutator_closure(group, current, current)
        orders.append(len(nxt))
        if len(nxt) == 1 or len(nxt) == len(current):
            return orders
        current = nxt


def group_lower_central_series(group: FiniteGroup) -> list[int]:
    """Orders of [G, Gamma_i] iterates, down to 1 or stabilization."""
    if group.order > 120:
        raise ValidationError("lower central series is computed exhaustively only up to order 120")
    everyone = np.arange(group.order)
    orders = [group.order]
    current = everyone
    while True:
        nxt = _commutator_closure(group, everyone, current)
        orders.append(len(nxt))
        if len(nxt) == 1 or len(nxt) == len(current):
            return orders
        current = nxt


def classify_group(group: FiniteGroup) -> str:
    derived = group_derived_series(group)
    if derived[-1] != 1:
        return "non_solvable"
    if derived[1] == 1:
        return "abelian"
    lower = group_lower_central_series(group)
    return "nilpotent" if lower[-1] == 1 else "solvable"


@dataclass(frozen=True)
class WordRecord:
    tokens: tuple
    labels: tuple
    bos: int  # BOS token id = group order


@dataclass(frozen=True)
class RotationRecord:
    tokens: tuple
    v0: tuple
    targets: tuple


def _record_rng(seed: int, index: int):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def word_record(group: FiniteGroup, length: int, seed: int, index: int, bos: bool = False) -> WordRecord:
    """Record ``index`` of the stream: depends only on (seed, index)."""
    rng = _record_rng(seed, index)
    tokens = rng.integers(0, group.order, size=length)
    labels = np.empty(length, dtype=np.int64)
    g = group.identity
    for j, t in enumerate(tokens):
        g = group.table[g, t]
        labels[j] = g
    toks = tokens.tolist()
    labs = labels.tolist()
    if bos:
        toks = [group.order] + toks
        labs = [group.order] + labs
    return WordRecord(tokens=tuple(toks), labels=tuple(labs), bos=group.order)


def gen_word_dataset(
    group: FiniteGroup, length: int, count: int, seed: int, bos: bool = False
):
    """Yield seeded word-problem records with prefix-product labels.

    Tokens are i.i.d. uniform over all elements; record i depends only on
    (seed, i), so parallel and serial generation agree. With ``bos`` the
    artificial start token (id = group order, labelled by itself) is
    prepended.
    """
    if length < 1 or count < 1:
        raise ValidationError("length and count must be at least 1")
    for i in range(count):
        yield word_record(group, length, seed, i, bos=bos)


_SQRT5 = np.sqrt(5.0)
ROTATION_P = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
ROTATION_R = np.array(
    [
        [(_SQRT5 - 1) / 4, -(_SQRT5 + 1) / 4, 0.5],
        [(_SQRT5 + 1) / 4, 0.5, (_SQRT5 - 1) / 4],
        [-0.5, (_SQRT5 - 1) / 4, (_SQRT5 + 1) / 4],
    ]
)


def _matrix_key(m: np.ndarray) -> tuple:
    # Entries of this group are separated by ~0.12, so a 1e-6 grid is safe
    # against the <=1e-13 drift accumulated along short product chains.
    return tuple(int(round(x * 1e6)) for x in m.ravel())


def a5_rotation_elements() -> tuple[np.ndarray, FiniteGroup]:
    """Close the two dodecahedral generators under multiplication.

    Returns the 60 rotation matrices (indexed lexicographically by rounded
    entries) and the induced FiniteGroup whose table composes indices in
    "first then second" order, i.e. table[i, j] = index(M_j @ M_i).
    """
    found = {_matrix_key(ROTATION_P): ROTATION_P, _matrix_key(ROTATION_R): ROTATION_R}
    frontier = [ROTATION_P, ROTATION_R]
    while frontier:
        fresh = []
        for a in list(found.values()):
            for b in frontier:
                for prod in (a @ b, b @ a):
                    key = _matrix_key(prod)
                    if key not in found:
                        found[key] = prod
                        fresh.append(prod)
        frontier = fresh
        if len(found) > 60:
            raise InvariantError(
                f"closure of the two rotation generators grew past 60 ({len(found)})"
            )
    if len(found) != 60:
        raise InvariantError(f"closure produced {len(found)} elements instead of 60")

    keys = sorted(found)
    mats = np.stack([found[k] for k in keys])
    index = {k: i for i, k in enumerate(keys)}
    for i, m in enumerate(mats):
        if np.max(np.abs(m.T @ m - np.eye(3))) > 1e-12 or abs(np.linalg.det(m) - 1.0) > 1e-12:
            raise InvariantError(f"element {i} drifted off the rotation group")

    order = 60
    table = np.zeros((order, order), dtype=np.int64)
    for i in range(order):
        for j in range(order):
            key = _matrix_key(mats[j] @ mats[i])
            if key not in index:
                raise InvariantError("product left the closed element set")
            table[i, j] = index[key]
    identity = next(i for i in range(order) if np.array_equal(table[i], np.arange(order)))
    inverse = np.array([int(np.where(table[i] == identity)[0][0]) for i in range(order)])
    group = FiniteGroup(
        name="A5_rotations",
        order=order,
        table=table,
        identity=identity,
        inverse=inverse,
        generators=(index[_matrix_key(ROTATION_P)], index[_matrix_key(ROTATION_R)]),
        element_names=tuple(f"g{i}" for i in range(order)),
    )
    return mats, group


def rotation_record(mats: np.ndarray, length: int, seed: int, index: int) -> RotationRecord:
    """Record ``index`` of the rotation stream for a fixed element table."""
    rng = _record_rng(seed, index)
    tokens = rng.integers(0, len(mats), size=length)
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    v0 = v.copy()
    targets = np.empty((length, 3))
    for j, t in enumerate(tokens):
        v = mats[t] @ v
        targets[j] = v
    return RotationRecord(
        tokens=tuple(tokens.tolist()),
        v0=tuple(v0.tolist()),
        targets=tuple(tuple(row) for row in targets.tolist()),
    )


def gen_rotation_dataset(length: int, count: int, seed: int):
    """Yield rotation-tracking records: random elements applied to a random
    unit vector, targets being every intermediate image."""
    if length < 1 or count < 1:
        raise ValidationError("length and count must be at least 1")
    mats, _ = a5_rotation_elements()
    for i in range(count):
        yield rotation_record(mats, length, seed, i)


def sequence_accuracy(predictions, golds) -> float:
    """Fraction of sequences predicted perfectly at every position."""
    pred = np.asarray(predictions)
    gold = np.asarray(golds)
    if pred.shape != gold.shape:
        raise ValidationError(f"shape mismatch: {pred.shape} vs {gold.shape}")
    if pred.ndim == 1:
        pred = pred[None, :]
        gold = gold[None, :]
    correct = np.all(pred == gold, axis=tuple(range(1, pred.ndim)))
    return float(np.mean(correct))


def find_isomorphism(ga: FiniteGroup, gb: FiniteGroup) -> dict | None:
    """Search for an isomorphism determined by images of ga's generators.

    Candidate images are filtered by element order, extended over all of ga
    by breadth-first products of generators, then verified against the full
    composition tables. Returns the index map or None.
    """
    if ga.order != gb.order:
        return None
    gens = list(ga.generators)
    reached = _subgroup_closure(ga.table, ga.identity, gens)
    if len(reached) != ga.order:
        raise ValidationError("stored generators do not generate the group")

    orders_b: dict = {}
    for i in range(gb.order):
        orders_b.setdefault(gb.element_order(i), []).append(i)
    candidate_lists = [orders_b.get(ga.element_order(g), []) for g in gens]

    # Express every element of ga as (parent, generator) once.
    parent: dict = {ga.identity: None}
    frontier = [ga.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for gi, g in enumerate(gens):
                y = int(ga.table[x, g])
                if y not in parent:
                    parent[y] = (x, gi)
                    nxt.append(y)
        frontier = nxt
    order_found = sorted(parent, key=lambda e: 0 if parent[e] is None else 1)

    for images in itertools.product(*candidate_lists):
        phi = {ga.identity: gb.identity}
        for x in order_found:
            if parent[x] is None:
                continue
            px, gi = parent[x]
            phi[x] = int(gb.table[phi[px], images[gi]])
        if len(set(phi.values())) != ga.order:
            continue
        phi_arr = np.array([phi[i] for i in range(ga.order)])
        if np.array_equal(phi_arr[ga.table], gb.table[np.ix_(phi_arr, phi_arr)]):
            return phi
    return None
