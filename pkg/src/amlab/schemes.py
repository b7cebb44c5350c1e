"""Hamming and Johnson association schemes with exact spectral data.

A :class:`Scheme` packages the vertex codec, valencies, multiplicities and
both eigenmatrices of H(D,q) or J(N,D).  All spectral data is kept as
`fractions.Fraction` so that downstream zero-tests (is ``E_j chi`` zero?)
are exact.  Entries of P are integers for both families (Krawtchouk resp.
Eberlein values); Q is obtained from P by exact matrix inversion.

Conventions
-----------
* ``P[i][j]`` is the eigenvalue of the i-th associate matrix A_i on the
  j-th eigenspace E_j V.  Row 0 of P is all ones; column 0 holds the
  valencies k_i.
* ``Q[j][i]`` is the dual eigenvalue q_j(i), fixed by P.Q = |X| I, so that
  E_j = |X|^-1 * sum_i Q[j][i] A_i.  Column 0 of Q holds the
  multiplicities m_j.
* Vertices are decoded as tuples: a length-D word over {0..q-1} for
  Hamming, a sorted D-subset of {1..N} for Johnson.  Canonical indices
  enumerate decoded forms in lexicographic order, so index 0 is the zero
  word resp. {1..D}.
* Both families are metric and cometric in the natural orderings; the
  stored orderings are the identity permutation.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb

import numpy as np

from .errors import SchemeConfigError

Word = tuple  # decoded vertex: tuple of ints


# ---------------------------------------------------------------------------
# exact rational linear algebra (small matrices only)
# ---------------------------------------------------------------------------

def rational_inverse(M):
    """Invert a square matrix of Fractions by Gauss-Jordan elimination."""
    n = len(M)
    X = [[Fraction(v) for v in row] for row in M]
    Y = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if X[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("matrix is singular")
        if pivot != col:
            X[col], X[pivot] = X[pivot], X[col]
            Y[col], Y[pivot] = Y[pivot], Y[col]
        inv = Fraction(1, 1) / X[col][col]
        X[col] = [v * inv for v in X[col]]
        Y[col] = [v * inv for v in Y[col]]
        for r in range(n):
            if r != col and X[r][col] != 0:
                f = X[r][col]
                X[r] = [a - f * b for a, b in zip(X[r], X[col])]
                Y[r] = [a - f * b for a, b in zip(Y[r], Y[col])]
    return Y


def mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    return [
        [sum(A[i][h] * B[h][j] for h in range(k)) for j in range(m)]
        for i in range(n)
    ]


# ---------------------------------------------------------------------------
# eigenvalue polynomials
# ---------------------------------------------------------------------------

def krawtchouk(i: int, j: int, D: int, q: int) -> int:
    """Value of the i-th Krawtchouk polynomial at j (eigenvalue of A_i on
    E_j V in H(D,q))."""
    return sum(
        (-1) ** h * (q - 1) ** (i - h) * comb(j, h) * comb(D - j, i - h)
        for h in range(i + 1)
    )


def eberlein(i: int, j: int, N: int, D: int) -> int:
    """Value of the i-th Eberlein polynomial at j (eigenvalue of A_i on
    E_j V in J(N,D))."""
    return sum(
        (-1) ** h * comb(j, h) * comb(D - j, i - h) * comb(N - D - j, i - h)
        for h in range(i + 1)
    )


# ---------------------------------------------------------------------------
# the scheme descriptor
# ---------------------------------------------------------------------------

class Scheme:
    """Immutable descriptor of a Hamming or Johnson scheme.

    Instances are safe to share between threads; every accessor is a pure
    read.  Use :func:`hamming` / :func:`johnson` or :func:`build_scheme`
    to construct one.
    """

    def __init__(self, family: str, params: tuple):
        if family == "hamming":
            D, q = params
            if D < 1 or q < 2:
                raise SchemeConfigError(
                    f"H(D,q) needs D >= 1 and q >= 2, got D={D}, q={q}"
                )
            self.q = q
            self.N = None
            size = q ** D
            valencies = tuple(comb(D, i) * (q - 1) ** i for i in range(D + 1))
            mults = valencies
            P = [
                [Fraction(krawtchouk(i, j, D, q)) for j in range(D + 1)]
                for i in range(D + 1)
            ]
        elif family == "johnson":
            N, D = params
            if not 1 <= D <= N // 2:
                raise SchemeConfigError(
                    f"J(N,D) needs 1 <= D <= floor(N/2), got N={N}, D={D}"
                )
            self.q = None
            self.N = N
            size = comb(N, D)
            valencies = tuple(comb(D, i) * comb(N - D, i) for i in range(D + 1))
            mults = tuple(
                comb(N, j) - (comb(N, j - 1) if j else 0) for j in range(D + 1)
            )
            P = [
                [Fraction(eberlein(i, j, N, D)) for j in range(D + 1)]
                for i in range(D + 1)
            ]
        else:
            raise SchemeConfigError(f"unknown scheme family {family!r}")

        self.family = family
        self.D = D
        self.size = size
        self.valencies = valencies
        self.multiplicities = mults
        self.P = tuple(tuple(row) for row in P)
        Q = rational_inverse(P)
        self.Q = tuple(tuple(v * size for v in row) for row in Q)
        # identity orderings: both families are metric and cometric as built
        self.metric_ordering = tuple(range(D + 1))
        self.cometric_ordering = tuple(range(D + 1))
        self._check()

    def _check(self):
        D, size = self.D, self.size
        assert sum(self.valencies) == size
        assert sum(self.multiplicities) == size
        for j in range(D + 1):
            assert self.P[0][j] == 1
            assert self.Q[0][j] == 1
        for i in range(D + 1):
            assert self.P[i][0] == self.valencies[i]
            assert self.Q[i][0] == self.multiplicities[i]
        # P.Q = |X| I and the pairing m_j p_i(j) = k_i q_j(i)
        prod = mat_mul(self.P, self.Q)
        for i in range(D + 1):
            for j in range(D + 1):
                assert prod[i][j] == (size if i == j else 0)
                assert (
                    self.multiplicities[j] * self.P[i][j]
                    == self.valencies[i] * self.Q[j][i]
                )

    # -- basic accessors ----------------------------------------------------

    def p(self, i: int, j: int) -> Fraction:
        """Eigenvalue of A_i on E_j V."""
        return self.P[i][j]

    def dual_q(self, j: int, i: int) -> Fraction:
        """Dual eigenvalue q_j(i): E_j = |X|^-1 sum_i q_j(i) A_i."""
        return self.Q[j][i]

    def __repr__(self):
        if self.family == "hamming":
            return f"H({self.D},{self.q})"
        return f"J({self.N},{self.D})"

    def __eq__(self, other):
        return (
            isinstance(other, Scheme)
            and self.family == other.family
            and self.D == other.D
            and self.q == other.q
            and self.N == other.N
        )

    def __hash__(self):
        return hash((self.family, self.D, self.q, self.N))

    # -- vertex codec -------------------------------------------------------

    def decode(self, index: int) -> Word:
        """Canonical index -> decoded vertex (lexicographic rank)."""
        if not 0 <= index < self.size:
            raise ValueError(f"vertex index {index} out of range for {self}")
        if self.family == "hamming":
            digits = []
            for p in range(self.D - 1, -1, -1):
                digits.append((index // self.q ** p) % self.q)
            return tuple(digits)
        # Johnson: unrank a D-subset of {1..N} in lex order
        out = []
        prev = 0
        remaining = index
        for slot in range(self.D, 0, -1):
            c = prev + 1
            while True:
                block = comb(self.N - c, slot - 1)
                if remaining < block:
                    break
                remaining -= block
                c += 1
            out.append(c)
            prev = c
        return tuple(out)

    def encode(self, word) -> int:
        """Decoded vertex -> canonical index."""
        word = tuple(word)
        if self.family == "hamming":
            if len(word) != self.D or any(not 0 <= v < self.q for v in word):
                raise ValueError(f"{word} is not a vertex of {self}")
            idx = 0
            for v in word:
                idx = idx * self.q + v
            return idx
        if (
            len(word) != self.D
            or any(not 1 <= v <= self.N for v in word)
            or any(a >= b for a, b in zip(word, word[1:]))
        ):
            raise ValueError(f"{word} is not a sorted {self.D}-subset of 1..{self.N}")
        idx = 0
        prev = 0
        for slot, v in enumerate(word):
            for c in range(prev + 1, v):
                idx += comb(self.N - c, self.D - slot - 1)
            prev = v
        return idx

    def as_word(self, v) -> Word:
        return self.decode(v) if isinstance(v, (int, np.integer)) else tuple(v)

    def as_index(self, v) -> int:
        return int(v) if isinstance(v, (int, np.integer)) else self.encode(v)

    def vertices(self):
        """All decoded vertices in lexicographic (= index) order."""
        if self.family == "hamming":
            return itertools.product(range(self.q), repeat=self.D)
        return itertools.combinations(range(1, self.N + 1), self.D)

    # -- metric -------------------------------------------------------------

    def distance(self, x, y) -> int:
        """Index i of the associate class containing the pair (x, y)."""
        xw, yw = self.as_word(x), self.as_word(y)
        if self.family == "hamming":
            return sum(a != b for a, b in zip(xw, yw))
        return self.D - len(set(xw) & set(yw))

    def sphere(self, x, i: int):
        """Stream the vertices at distance exactly i from x, in
        lexicographic order of the decoded form.  Yields k_i vertices."""
        if not 0 <= i <= self.D:
            raise ValueError(f"sphere radius {i} out of range 0..{self.D}")
        xw = self.as_word(x)
        if self.family == "hamming":
            return self._hamming_sphere(xw, i)
        return self._johnson_sphere(xw, i)

    def _hamming_sphere(self, xw, i):
        D, q = self.D, self.q

        def rec(pos, rem, prefix):
            if D - pos < rem:
                return
            if pos == D:
                yield prefix
                return
            for v in range(q):
                if v == xw[pos]:
                    yield from rec(pos + 1, rem, prefix + (v,))
                elif rem > 0:
                    yield from rec(pos + 1, rem - 1, prefix + (v,))

        return rec(0, i, ())

    def _johnson_sphere(self, xw, i):
        N, D = self.N, self.D
        in_x = set(xw)
        # suffix counts of elements >= e inside / outside x
        rem_in = [0] * (N + 2)
        rem_out = [0] * (N + 2)
        for e in range(N, 0, -1):
            rem_in[e] = rem_in[e + 1] + (e in in_x)
            rem_out[e] = rem_out[e + 1] + (e not in in_x)

        def rec(e, need_in, need_out, prefix):
            if need_in == 0 and need_out == 0:
                yield prefix
                return
            if e > N or rem_in[e] < need_in or rem_out[e] < need_out:
                return
            if e in in_x:
                if need_in > 0:
                    yield from rec(e + 1, need_in - 1, need_out, prefix + (e,))
            elif need_out > 0:
                yield from rec(e + 1, need_in, need_out - 1, prefix + (e,))
            yield from rec(e + 1, need_in, need_out, prefix)

        return rec(1, D - i, i, ())

    # -- numpy support arrays ------------------------------------------------

    def pack(self, words) -> np.ndarray:
        """Pack decoded vertices for vectorized distance work.

        Hamming: (n, D) uint8 matrix of symbols.  Johnson: (n,) uint64
        bitmask array (bit e-1 set iff element e is in the subset).
        """
        words = list(words)
        if self.family == "hamming":
            return np.array(words, dtype=np.uint8).reshape(len(words), self.D)
        masks = np.zeros(len(words), dtype=np.uint64)
        for r, w in enumerate(words):
            m = 0
            for e in w:
                m |= 1 << (e - 1)
            masks[r] = m
        return masks

    def pairwise_distances(self, packed_a, packed_b) -> np.ndarray:
        """Distance matrix between two packed vertex arrays (uint8)."""
        if self.family == "hamming":
            return (packed_a[:, None, :] != packed_b[None, :, :]).sum(
                axis=2, dtype=np.uint8
            )
        inter = np.bitwise_count(packed_a[:, None] & packed_b[None, :])
        return (self.D - inter).astype(np.uint8)

    # -- serialization ------------------------------------------------------

    def spec_string(self) -> str:
        if self.family == "hamming":
            return f"hamming:{self.D},{self.q}"
        return f"johnson:{self.N},{self.D}"

    def describe(self) -> dict:
        """JSON-ready descriptor with rationals rendered as 'p/q' strings."""
        return {
            "family": self.family,
            "parameters": (
                {"d": self.D, "q": self.q}
                if self.family == "hamming"
                else {"n": self.N, "d": self.D}
            ),
            "vertex_count": self.size,
            "class_count": self.D,
            "valencies": list(self.valencies),
            "multiplicities": list(self.multiplicities),
            "eigenmatrix_p": [[str(v) for v in row] for row in self.P],
            "eigenmatrix_q": [[str(v) for v in row] for row in self.Q],
            "metric_ordering": list(self.metric_ordering),
            "cometric_ordering": list(self.cometric_ordering),
        }


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def hamming(D: int, q: int) -> Scheme:
    return Scheme("hamming", (D, q))


def johnson(N: int, D: int) -> Scheme:
    return Scheme("johnson", (N, D))


def build_scheme(family: str, params) -> Scheme:
    return Scheme(family, tuple(params))


def parse_scheme_spec(spec: str) -> Scheme:
    """Parse 'hamming:D,q' or 'johnson:N,D' (case-insensitive)."""
    try:
        family, rest = spec.split(":")
        a, b = (int(v) for v in rest.split(","))
    except ValueError:
        raise SchemeConfigError(
            f"cannot parse scheme spec {spec!r}; expected 'hamming:D,q' or 'johnson:N,D'"
        ) from None
    family = family.strip().lower()
    if family in ("hamming", "h"):
        return hamming(a, b)
    if family in ("johnson", "j"):
        return johnson(a, b)
    raise SchemeConfigError(f"unknown scheme family {family!r}")
