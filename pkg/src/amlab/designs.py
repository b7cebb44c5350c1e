"""Relative design/codesign levels and brute-force combinatorial oracles.

The level computations are exact: each index is decided by a rational
Cauchy-Schwarz residual (see :mod:`amlab.spectra`), so no tolerance and
no enumeration of spheres is ever needed.

The oracles (t-design counting, orthogonal-array strength, the
semilattice incidence criterion) are deliberately naive counting loops.
They exist to check the algebra from a second, independent direction,
and are gated by an elementary-step budget: when a check would exceed
the budget they raise :class:`BudgetExceeded` instead of truncating.
"""

from __future__ import annotations

import itertools
import os
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .errors import BudgetExceeded
from .schemes import Scheme
from .spectra import CodeVector, design_gram

DEFAULT_STEP_BUDGET = 10 ** 8
DEFAULT_EXPANSION_BUDGET = 10 ** 6


def resolve_budget(budget=None) -> int:
    if budget is not None:
        return int(budget)
    env = os.environ.get("AMLAB_BUDGET")
    return int(env) if env else DEFAULT_STEP_BUDGET


def _check_budget(needed: int, budget: int, what: str):
    if needed > budget:
        raise BudgetExceeded(
            f"{what} needs ~{needed:.3g} steps, budget is {budget:.3g}",
            needed=needed,
            budget=budget,
        )


# ---------------------------------------------------------------------------
# relative design / codesign levels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IndexVerdict:
    index: int
    dependent: bool
    residual: Fraction


@dataclass(frozen=True)
class DesignLevelReport:
    kind: str  # "design" or "codesign"
    base: int
    max_level: int
    verdicts: tuple

    def as_dict(self):
        return {
            "kind": self.kind,
            "base": self.base,
            "max_level": self.max_level,
            "verdicts": [
                {"index": v.index, "dependent": v.dependent, "residual": str(v.residual)}
                for v in self.verdicts
            ],
        }


def _report(kind: str, base: int, residuals) -> DesignLevelReport:
    verdicts = tuple(
        IndexVerdict(i, res == 0, res) for i, res in residuals
    )
    level = 0
    for v in verdicts:
        if not v.dependent:
            break
        level = v.index
    return DesignLevelReport(kind, base, level, verdicts)


def relative_design_level(chi: CodeVector, x) -> DesignLevelReport:
    """Largest t such that E_j chi is a scalar multiple of E_j x-hat for
    all 1 <= j <= t, with the exact Gram residual per index."""
    gram = design_gram(chi, x)
    base = chi.scheme.as_index(x)
    return _report(
        "design", base, [(j, gram[j][0]) for j in range(1, chi.scheme.D + 1)]
    )


def relative_codesign_level(chi: CodeVector, x) -> DesignLevelReport:
    """Largest t such that the restriction of chi to R_i(x) is constant
    for all 1 <= i <= t (equivalently E_i* chi is a multiple of A_i x-hat)."""
    sch = chi.scheme
    prof = chi.base_profile(x)
    return _report(
        "codesign",
        prof.base,
        [(i, prof.codesign_residual(sch, i)) for i in range(1, sch.D + 1)],
    )


def design_level_after_adjacency(chi: CodeVector, ell: int, x) -> DesignLevelReport:
    """Relative design level of A_ell chi, without expanding its support.

    A_ell acts on E_j V as the scalar p_ell(j), so the Gram residual of
    A_ell chi at index j is p_ell(j)^2 times the residual of chi.
    """
    sch = chi.scheme
    gram = design_gram(chi, x)
    residuals = [
        (j, sch.P[ell][j] * sch.P[ell][j] * gram[j][0])
        for j in range(1, sch.D + 1)
    ]
    return _report("design", sch.as_index(x), residuals)


# ---------------------------------------------------------------------------
# applying an associate matrix
# ---------------------------------------------------------------------------

def apply_Ai(chi: CodeVector, i: int, at=None, budget=None):
    """(A_i chi)(z) = sum of chi over the sphere R_i(z).

    With ``at`` (an iterable of vertices) only those entries are
    evaluated, by distance counting over the support; this never touches
    the budget.  Without ``at`` the full result is built by expanding the
    i-sphere of every support vertex, which requires
    |support| * k_i <= budget.

    Returns a CodeVector (or a dict vertex-index -> value when ``at`` is
    given; entries may be zero there).
    """
    sch = chi.scheme
    if at is not None:
        words = [sch.as_word(z) for z in at]
        packed = sch.pack(words)
        dist = sch.pairwise_distances(packed, chi.packed())
        support = chi.support_indices()
        out = {}
        for row, zw in enumerate(words):
            matches = np.nonzero(dist[row] == i)[0]
            total = sum((chi.values[support[m]] for m in matches), Fraction(0))
            out[sch.encode(zw)] = total
        return out

    budget = resolve_budget(budget)
    needed = len(chi) * sch.valencies[i]
    _check_budget(needed, budget, f"expanding A_{i} over {len(chi)} support vertices")
    vals: dict = {}
    for idx in chi.support_indices():
        w = chi.values[idx]
        for z in sch.sphere(sch.decode(idx), i):
            zi = sch.encode(z)
            vals[zi] = vals.get(zi, Fraction(0)) + w
    vals = {k: v for k, v in vals.items() if v != 0}
    return CodeVector(sch, vals) if vals else None


# ---------------------------------------------------------------------------
# block designs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockMultiset:
    """Multiset of k-subsets of {1..v}, counted with multiplicity."""

    ground: int
    block_size: int
    blocks: tuple  # ((sorted tuple, multiplicity), ...)

    @classmethod
    def from_blocks(cls, ground: int, block_size: int, blocks) -> "BlockMultiset":
        counter = Counter(tuple(sorted(b)) for b in blocks)
        for b in counter:
            if len(b) != block_size or any(not 1 <= e <= ground for e in b):
                raise ValueError(f"{b} is not a {block_size}-subset of 1..{ground}")
        return cls(ground, block_size, tuple(sorted(counter.items())))

    @property
    def total(self) -> int:
        return sum(m for _, m in self.blocks)

    def __len__(self):
        return len(self.blocks)


@dataclass(frozen=True)
class DesignCheckResult:
    ok: bool
    t: int
    lam: int | None
    witness: tuple | None  # (t-subset, count, t-subset, count)

    def as_dict(self):
        out = {"ok": self.ok, "t": self.t, "lambda": self.lam}
        if self.witness:
            a, ca, b, cb = self.witness
            out["witness"] = {"subset1": list(a), "count1": ca, "subset2": list(b), "count2": cb}
        return out


def t_design_check(blocks: BlockMultiset, t: int, budget=None) -> DesignCheckResult:
    """Exhaustively test whether every t-subset of the ground set lies in
    exactly lambda blocks (multiplicities counted).

    Returns lambda on success, otherwise the first two t-subsets (in lex
    order) with differing counts.
    """
    if t > blocks.block_size:
        raise ValueError(f"t={t} exceeds block size {blocks.block_size}")
    if t == 0:
        return DesignCheckResult(True, 0, blocks.total, None)
    budget = resolve_budget(budget)
    n_tsets = comb(blocks.ground, t)
    _check_budget(n_tsets, min(budget, 10 ** 8), f"scanning C({blocks.ground},{t}) t-subsets")
    _check_budget(
        len(blocks.blocks) * comb(blocks.block_size, t) + n_tsets,
        budget,
        "accumulating block incidences",
    )
    counts: Counter = Counter()
    for block, mult in blocks.blocks:
        for sub in itertools.combinations(block, t):
            counts[sub] += mult
    first = None
    for sub in itertools.combinations(range(1, blocks.ground + 1), t):
        c = counts.get(sub, 0)
        if first is None:
            first = (sub, c)
        elif c != first[1]:
            return DesignCheckResult(False, t, None, (first[0], first[1], sub, c))
    return DesignCheckResult(True, t, first[1], None)


def shell_design_extract(chi: CodeVector, x, k: int) -> BlockMultiset:
    """Extract the block multiset carried by the k-th sphere of a subset
    code around x.

    Hamming (x must be the zero word): blocks are the supports of the
    weight-k words, as k-subsets of the coordinate set {1..D}.
    Johnson: blocks are {x intersect y : y in support, |x - y| = k},
    as (D-k)-subsets of x (elements relabeled 1..D by position in x).
    """
    sch = chi.scheme
    if not chi.is_subset:
        raise ValueError("shell design extraction expects a subset code")
    xw = sch.as_word(x)
    if sch.family == "hamming":
        if any(v != 0 for v in xw):
            raise ValueError(
                "Hamming shell extraction is defined at the zero word only"
            )
        blocks = [
            tuple(p + 1 for p, v in enumerate(w) if v != 0)
            for w in chi.support_words()
            if sum(v != 0 for v in w) == k
        ]
        return BlockMultiset.from_blocks(sch.D, k, blocks)
    pos = {e: p + 1 for p, e in enumerate(xw)}
    xset = set(xw)
    blocks = []
    for w in chi.support_words():
        inter = xset & set(w)
        if len(inter) == sch.D - k:
            blocks.append(tuple(sorted(pos[e] for e in inter)))
    return BlockMultiset.from_blocks(sch.D, sch.D - k, blocks)


# ---------------------------------------------------------------------------
# orthogonal-array strength
# ---------------------------------------------------------------------------

def oa_strength(chi: CodeVector, budget=None) -> int:
    """Maximum strength of a subset code of H(D,q) as an orthogonal
    array: the largest t such that every projection onto t columns hits
    each of the q^t patterns equally often."""
    sch = chi.scheme
    assert sch.family == "hamming" and chi.is_subset
    budget = resolve_budget(budget)
    words = np.array(chi.support_words(), dtype=np.int64)
    n, D, q = len(words), sch.D, sch.q
    spent = 0
    for t in range(1, D + 1):
        if n % q ** t != 0:
            return t - 1
        expect = n // q ** t
        spent += comb(D, t) * (n + q ** t)
        _check_budget(spent, budget, f"strength-{t} projections")
        radix = q ** np.arange(t - 1, -1, -1)
        for cols in itertools.combinations(range(D), t):
            enc = words[:, cols] @ radix
            if not np.all(np.bincount(enc, minlength=q ** t) == expect):
                return t - 1
    return D


# ---------------------------------------------------------------------------
# semilattice incidence criterion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SemilatticeVerdict:
    ok: bool
    t: int
    sums_by_class: dict | None
    witness: tuple | None  # (object, sum, object, sum)

    def as_dict(self):
        out = {"ok": self.ok, "t": self.t}
        if self.sums_by_class is not None:
            out["sum_by_meet_rank"] = {
                str(k): str(v) for k, v in self.sums_by_class.items()
            }
        if self.witness:
            u, su, v, sv = self.witness
            out["witness"] = {
                "object1": _format_object(u),
                "sum1": str(su),
                "object2": _format_object(v),
                "sum2": str(sv),
            }
        return out


def _format_object(u):
    if isinstance(u, tuple) and u and isinstance(u[0], tuple):
        positions, values = u
        return {"positions": [p + 1 for p in positions], "values": list(values)}
    return list(u)


def semilattice_design_check(
    chi: CodeVector, x, t: int, budget=None
) -> SemilatticeVerdict:
    """Test the incidence-sum criterion at rank t.

    For every rank-t object u of the underlying semilattice (a partial
    word with t fixed coordinates for Hamming, a t-subset of the ground
    set for Johnson), the sum of chi over the vertices above u must
    depend only on the rank of the meet of x and u.  Returns the verdict
    together with either the per-class sums or a witness pair.
    """
    sch = chi.scheme
    budget = resolve_budget(budget)
    xw = sch.as_word(x)
    if sch.family == "hamming":
        n_objects = comb(sch.D, t) * sch.q ** t
        class_total = {
            rho: comb(sch.D, t) * comb(t, rho) * (sch.q - 1) ** (t - rho)
            for rho in range(t + 1)
        }
    else:
        n_objects = comb(sch.N, t)
        class_total = {
            rho: comb(sch.D, rho) * comb(sch.N - sch.D, t - rho)
            for rho in range(t + 1)
        }
    _check_budget(
        len(chi) * comb(sch.D, t) + n_objects, budget, f"rank-{t} incidence sums"
    )

    sums: dict = {}
    for w, weight in zip(chi.support_words(), chi.weight_list()):
        if sch.family == "hamming":
            for positions in itertools.combinations(range(sch.D), t):
                key = (positions, tuple(w[p] for p in positions))
                sums[key] = sums.get(key, Fraction(0)) + weight
        else:
            for sub in itertools.combinations(w, t):
                sums[sub] = sums.get(sub, Fraction(0)) + weight

    def meet_rank(u) -> int:
        if sch.family == "hamming":
            positions, values = u
            return sum(1 for p, v in zip(positions, values) if xw[p] == v)
        return len(set(u) & set(xw))

    by_class: dict = {}
    rep: dict = {}
    seen_count = Counter()
    for u, s in sums.items():
        rho = meet_rank(u)
        seen_count[rho] += 1
        by_class.setdefault(rho, {})
        if s not in by_class[rho]:
            by_class[rho][s] = u
    for rho in range(t + 1):
        if class_total[rho] == 0:
            continue
        cls = by_class.get(rho, {})
        if seen_count[rho] < class_total[rho] and (len(cls) > 1 or (cls and 0 not in cls)):
            # some object of this class has sum 0: dig up a witness
            zero_obj = _find_unseen_object(sch, xw, t, rho, sums)
            nz = next((u for s, u in cls.items() if s != 0), None)
            if nz is not None:
                return SemilatticeVerdict(
                    False, t, None, (nz, sums[nz], zero_obj, Fraction(0))
                )
        if len(cls) > 1:
            (s1, u1), (s2, u2) = list(cls.items())[:2]
            return SemilatticeVerdict(False, t, None, (u1, s1, u2, s2))
    flat = {
        rho: next(iter(by_class[rho])) if by_class.get(rho) else Fraction(0)
        for rho in range(t + 1)
        if class_total[rho] > 0
    }
    return SemilatticeVerdict(True, t, flat, None)


def _find_unseen_object(sch: Scheme, xw, t, rho, sums):
    if sch.family == "hamming":
        for positions in itertools.combinations(range(sch.D), t):
            for values in itertools.product(range(sch.q), repeat=t):
                if sum(1 for p, v in zip(positions, values) if xw[p] == v) != rho:
                    continue
                if (positions, values) not in sums:
                    return (positions, values)
    else:
        for sub in itertools.combinations(range(1, sch.N + 1), t):
            if len(set(sub) & set(xw)) == rho:
                if sub not in sums:
                    return sub
    return None
