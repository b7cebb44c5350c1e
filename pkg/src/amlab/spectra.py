"""Exact distance/dual distributions and code parameters.

Everything here works on the sparse support of a vector; the ambient
space (which can have millions of vertices, e.g. J(24,8)) is never
materialized.  The inner distribution a_i is computed pairwise over the
support, the dual distribution b_j through the exact Q transform, and all
derived parameters are exact rationals.

The two linear-dependence tests that drive everything downstream are
Cauchy-Schwarz residuals, evaluated without forming any |X|-length
vector:

* design side:   E_j chi vs E_j x-hat   uses  b_j * m_j/|X| - g_j^2
  with g_j = |X|^-1 sum_i q_j(i) c_i,
* codesign side: E_i* chi vs A_i x-hat  uses  k_i * d_i - c_i^2
  with c_i (d_i) the sum of values (squared values) on the sphere R_i(x).

Both residuals vanish exactly iff the two vectors are linearly dependent.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from .errors import CodePredicateError
from .schemes import Scheme

# numpy fast path is used only when every pairwise product is safely
# inside int64; otherwise we fall back to exact Python loops.
_INT64_SAFE = 2 ** 62
_BLOCK_ELEMS = 1 << 22  # target elements per pairwise block


class CodeVector:
    """A rational-valued vector on the vertex set, stored sparsely.

    ``values`` maps canonical vertex indices to nonzero Fractions.
    Subset codes (all values equal to 1) get fast numpy paths.  Instances
    are immutable in spirit: all derived data is cached.
    """

    def __init__(self, scheme: Scheme, values: dict):
        if not values:
            raise ValueError("a code vector must be nonzero")
        self.scheme = scheme
        self.values = {
            scheme.as_index(v): Fraction(w) for v, w in values.items() if w != 0
        }
        if not self.values:
            raise ValueError("a code vector must be nonzero")
        self._cache: dict = {}

    @classmethod
    def from_subset(cls, scheme: Scheme, members) -> "CodeVector":
        vals = {scheme.as_index(m): Fraction(1) for m in members}
        return cls(scheme, vals)

    # -- basic structure ----------------------------------------------------

    @property
    def is_subset(self) -> bool:
        return all(w == 1 for w in self.values.values())

    def __len__(self):
        return len(self.values)

    def support_indices(self):
        if "idx" not in self._cache:
            self._cache["idx"] = sorted(self.values)
        return self._cache["idx"]

    def support_words(self):
        if "words" not in self._cache:
            dec = self.scheme.decode
            self._cache["words"] = [dec(i) for i in self.support_indices()]
        return self._cache["words"]

    def packed(self) -> np.ndarray:
        if "packed" not in self._cache:
            self._cache["packed"] = self.scheme.pack(self.support_words())
        return self._cache["packed"]

    def weight_list(self):
        return [self.values[i] for i in self.support_indices()]

    def norm_sq(self) -> Fraction:
        return sum((w * w for w in self.values.values()), Fraction(0))

    def value_at(self, v) -> Fraction:
        return self.values.get(self.scheme.as_index(v), Fraction(0))

    # -- code predicate -----------------------------------------------------

    def code_violation(self):
        """Return None if this vector is a code, else a reason string."""
        if len(self.values) == 1:
            return "point mass: the support is a single vertex"
        if len(self.values) == self.scheme.size and len(set(self.values.values())) == 1:
            return "scalar multiple of the all-ones vector"
        return None

    def assert_code(self):
        reason = self.code_violation()
        if reason is not None:
            raise CodePredicateError(f"not a code: {reason}")

    # -- distributions --------------------------------------------------------

    def inner_distribution(self):
        """a_i = <chi, A_i chi> as exact Fractions, i = 0..D."""
        if "a" not in self._cache:
            self._cache["a"] = _inner_distribution(self)
        return self._cache["a"]

    def dual_norms(self):
        """b_j = <chi, E_j chi> = |X|^-1 sum_i q_j(i) a_i, exact."""
        if "b" not in self._cache:
            a = self.inner_distribution()
            sch = self.scheme
            D = sch.D
            self._cache["b"] = tuple(
                sum((sch.Q[j][i] * a[i] for i in range(D + 1)), Fraction(0))
                / sch.size
                for j in range(D + 1)
            )
        return self._cache["b"]

    def base_profile(self, x) -> "BaseProfile":
        xi = self.scheme.as_index(x)
        key = ("profile", xi)
        if key not in self._cache:
            self._cache[key] = _base_profile(self, xi)
        return self._cache[key]


@dataclass(frozen=True)
class BaseProfile:
    """Per-sphere data of a vector relative to a base vertex x.

    c[i] is the value sum over R_i(x), sq[i] the squared-value sum,
    occupied[i] says whether any support vertex lies on R_i(x), and
    count[i] is the number of support vertices there.
    """

    base: int
    c: tuple
    sq: tuple
    occupied: tuple
    count: tuple

    def shell_constant(self, scheme: Scheme, i: int) -> bool:
        """Is the restriction of the vector to R_i(x) a constant vector?

        Equivalent to linear dependence of E_i* chi and A_i x-hat.  True
        when the sphere is untouched, or when it is fully covered by a
        single value (count == k_i and one distinct value, which the
        Cauchy-Schwarz residual below captures exactly).
        """
        return self.codesign_residual(scheme, i) == 0

    def codesign_residual(self, scheme: Scheme, i: int) -> Fraction:
        """Exact Gram residual |u|^2 |v|^2 - <u,v>^2 for u = E_i* chi,
        v = A_i x-hat."""
        k_i = scheme.valencies[i]
        return k_i * self.sq[i] - self.c[i] * self.c[i]


def _base_profile(chi: CodeVector, xi: int) -> BaseProfile:
    sch = chi.scheme
    D = sch.D
    c = [Fraction(0)] * (D + 1)
    sq = [Fraction(0)] * (D + 1)
    occ = [False] * (D + 1)
    cnt = [0] * (D + 1)
    xw = sch.decode(xi)
    packed_x = sch.pack([xw])
    dists = sch.pairwise_distances(packed_x, chi.packed())[0]
    for d, idx in zip(dists, chi.support_indices()):
        w = chi.values[idx]
        d = int(d)
        c[d] += w
        sq[d] += w * w
        occ[d] = True
        cnt[d] += 1
    return BaseProfile(xi, tuple(c), tuple(sq), tuple(occ), tuple(cnt))


def _inner_distribution(chi: CodeVector):
    sch = chi.scheme
    D = sch.D
    n = len(chi)
    idx = chi.support_indices()
    weights = [chi.values[i] for i in idx]
    denom_lcm = 1
    for w in weights:
        denom_lcm = denom_lcm * w.denominator // gcd(denom_lcm, w.denominator)
    ints = [int(w * denom_lcm) for w in weights]
    total = sum(abs(v) for v in ints)
    packed = chi.packed()

    if total * total < _INT64_SAFE:
        acc = _pairwise_int64(sch, packed, ints, D, all(v == 1 for v in ints))
    else:
        # exact fallback: Python loop over support pairs
        acc = [0] * (D + 1)
        words = chi.support_words()
        for a in range(n):
            wa, va = words[a], ints[a]
            acc[0] += va * va
            for b in range(a + 1, n):
                d = sch.distance(wa, words[b])
                acc[d] += 2 * va * ints[b]
    scale = Fraction(1, denom_lcm * denom_lcm)
    return tuple(Fraction(v) * scale for v in acc)


def _pairwise_int64(sch: Scheme, packed, ints, D, is_unit) -> list:
    n = len(ints)
    acc = np.zeros(D + 1, dtype=np.int64)
    w = np.array(ints, dtype=np.int64)
    block = max(1, _BLOCK_ELEMS // max(n, 1))
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        if sch.family == "hamming":
            dist = sch.pairwise_distances(packed[lo:hi], packed)
        else:
            dist = sch.pairwise_distances(packed[lo:hi], packed)
        if is_unit:
            acc += np.bincount(dist.ravel(), minlength=D + 1).astype(np.int64)
        else:
            wt = w[lo:hi, None] * w[None, :]
            for i in range(D + 1):
                acc[i] += int(wt[dist == i].sum())
    return [int(v) for v in acc]


# ---------------------------------------------------------------------------
# parameter bundle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CodeParameters:
    """The full parameter bundle of a code with respect to a base vertex.

    delta/s come from the inner distribution and carry their usual
    minimum-distance/degree meaning only for subset codes (the
    ``subset`` flag); they are still reported for general rational
    vectors.  The tilde parameters are the refined counts that ignore
    spheres (resp. eigenspaces) on which the vector is already a scalar
    multiple of the base vertex's projection.
    """

    base: int
    subset: bool
    delta: int | None
    s: int
    delta_star: int | None
    s_star: int
    delta_x: int | None
    s_x: int
    delta_down: int | None
    delta_down_star: int | None
    s_tilde_x: int
    s_tilde_star: int

    def as_dict(self):
        return {
            "base": self.base,
            "subset": self.subset,
            "delta": self.delta,
            "s": self.s,
            "delta_star": self.delta_star,
            "s_star": self.s_star,
            "delta_x": self.delta_x,
            "s_x": self.s_x,
            "delta_down": self.delta_down,
            "delta_down_star": self.delta_down_star,
            "s_tilde_x": self.s_tilde_x,
            "s_tilde_star": self.s_tilde_star,
        }


def design_gram(chi: CodeVector, x) -> list:
    """Per-eigenspace Gram data for E_j chi vs E_j x-hat.

    Returns a list over j = 0..D of (residual, b_j, g_j) with
    g_j = <E_j chi, E_j x-hat> and residual = b_j * m_j/|X| - g_j^2,
    all exact.
    """
    sch = chi.scheme
    D, size = sch.D, sch.size
    b = chi.dual_norms()
    prof = chi.base_profile(x)
    out = []
    for j in range(D + 1):
        g = sum((sch.Q[j][i] * prof.c[i] for i in range(D + 1)), Fraction(0)) / size
        residual = b[j] * Fraction(sch.multiplicities[j], size) - g * g
        out.append((residual, b[j], g))
    return out


def parameters(chi: CodeVector, x) -> CodeParameters:
    """Compute every parameter of ``chi`` with respect to base vertex x.

    Raises CodePredicateError when chi is not a code.
    """
    chi.assert_code()
    sch = chi.scheme
    D = sch.D
    a = chi.inner_distribution()
    b = chi.dual_norms()
    prof = chi.base_profile(x)

    nz_a = [i for i in range(1, D + 1) if a[i] != 0]
    nz_b = [j for j in range(1, D + 1) if b[j] != 0]
    nz_e = [i for i in range(1, D + 1) if prof.occupied[i]]

    delta = min(nz_a) if nz_a else None
    delta_star = min(nz_b) if nz_b else None
    delta_x = min(nz_e) if nz_e else None

    down_a = [i for i in range(1, D + 1) if a[D - i] != 0]
    down_b = [j for j in range(1, D + 1) if b[D - j] != 0]

    s_tilde_x = sum(
        1 for i in range(1, D + 1) if prof.codesign_residual(sch, i) != 0
    )
    gram = design_gram(chi, x)
    s_tilde_star = sum(1 for j in range(1, D + 1) if gram[j][0] != 0)

    return CodeParameters(
        base=sch.as_index(x),
        subset=chi.is_subset,
        delta=delta,
        s=len(nz_a),
        delta_star=delta_star,
        s_star=len(nz_b),
        delta_x=delta_x,
        s_x=len(nz_e),
        delta_down=min(down_a) if down_a else None,
        delta_down_star=min(down_b) if down_b else None,
        s_tilde_x=s_tilde_x,
        s_tilde_star=s_tilde_star,
    )


def shell_restriction(chi: CodeVector, x, k: int) -> CodeVector | None:
    """E_k* chi: the restriction of chi to the sphere R_k(x), or None
    when that restriction is zero."""
    sch = chi.scheme
    xw = sch.as_word(x)
    vals = {
        i: w
        for i, w in chi.values.items()
        if sch.distance(xw, sch.decode(i)) == k
    }
    return CodeVector(sch, vals) if vals else None
