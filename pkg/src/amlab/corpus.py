"""Built-in code generators, random-code generators and file loaders.

The named entries are the classical objects every analysis in this
package gets exercised against: the two extended Golay codes and their
deep-hole cosets, a Vasil'ev nonlinear perfect code of length 15, the
large Witt design sitting inside J(24,8), and the small structural
families (repetition / even-weight / antipodal and complementary pairs).

Generator matrices are embedded constants; none of them is trusted.
Each registry entry carries a fingerprint (sizes, weight supports,
distance parameters) that the test suite re-derives from scratch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ParseError
from .schemes import Scheme, hamming, johnson
from .spectra import CodeVector

# ---------------------------------------------------------------------------
# GF(q) linear algebra (q prime)
# ---------------------------------------------------------------------------

def gf_rref(mat: np.ndarray, q: int):
    """Reduced row echelon form over GF(q).  Returns (rref, pivot_cols)."""
    A = np.array(mat, dtype=np.int64) % q
    rows, cols = A.shape
    pivots = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if A[i, c] % q != 0), None)
        if pivot is None:
            continue
        A[[r, pivot]] = A[[pivot, r]]
        inv = pow(int(A[r, c]), q - 2, q)
        A[r] = (A[r] * inv) % q
        for i in range(rows):
            if i != r and A[i, c]:
                A[i] = (A[i] - A[i, c] * A[r]) % q
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return A % q, pivots


def gf_rank(mat: np.ndarray, q: int) -> int:
    return len(gf_rref(mat, q)[1])


def gf_nullspace(mat: np.ndarray, q: int) -> np.ndarray:
    """Basis (rows) of the right nullspace of ``mat`` over GF(q)."""
    A, pivots = gf_rref(mat, q)
    cols = A.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.int64)
        v[f] = 1
        for r, c in enumerate(pivots):
            v[c] = (-A[r, f]) % q
        basis.append(v)
    return np.array(basis, dtype=np.int64).reshape(len(basis), cols)


def span_codewords(gen: np.ndarray, q: int) -> np.ndarray:
    """All q^k linear combinations of the rows of ``gen`` (k x D) mod q."""
    k, D = gen.shape
    msgs = np.array(list(itertools.product(range(q), repeat=k)), dtype=np.int64)
    return (msgs @ gen) % q


def dual_code_words(gen: np.ndarray, q: int) -> np.ndarray:
    """All words of the dual code of the row space of ``gen``."""
    return span_codewords(gf_nullspace(gen, q), q)


def _subset_from_words(scheme: Scheme, words: np.ndarray) -> CodeVector:
    return CodeVector.from_subset(scheme, [tuple(int(v) for v in w) for w in words])


# ---------------------------------------------------------------------------
# embedded generator matrices
# ---------------------------------------------------------------------------

# the usual 12x12 companion block of the extended binary Golay code
_GOLAY24_B = np.array(
    [
        [1, 1, 0, 1, 1, 1, 0, 0, 0, 1, 0, 1],
        [1, 0, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1],
        [0, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1],
        [1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 0, 1],
        [1, 1, 0, 0, 0, 1, 0, 1, 1, 0, 1, 1],
        [1, 0, 0, 0, 1, 0, 1, 1, 0, 1, 1, 1],
        [0, 0, 0, 1, 0, 1, 1, 0, 1, 1, 1, 1],
        [0, 0, 1, 0, 1, 1, 0, 1, 1, 1, 0, 1],
        [0, 1, 0, 1, 1, 0, 1, 1, 1, 0, 0, 1],
        [1, 0, 1, 1, 0, 1, 1, 1, 0, 0, 0, 1],
        [0, 1, 1, 0, 1, 1, 1, 0, 0, 0, 1, 1],
        [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0],
    ],
    dtype=np.int64,
)

# companion block of the extended ternary Golay code
_GOLAY12_S = np.array(
    [
        [0, 1, 1, 1, 1, 1],
        [1, 0, 1, 2, 2, 1],
        [1, 1, 0, 1, 2, 2],
        [1, 2, 1, 0, 1, 2],
        [1, 2, 2, 1, 0, 1],
        [1, 1, 2, 2, 1, 0],
    ],
    dtype=np.int64,
)


def golay_binary_generator() -> np.ndarray:
    return np.hstack([np.eye(12, dtype=np.int64), _GOLAY24_B])


def golay_ternary_generator() -> np.ndarray:
    return np.hstack([np.eye(6, dtype=np.int64), _GOLAY12_S])


# ---------------------------------------------------------------------------
# named codes
# ---------------------------------------------------------------------------

def golay_binary() -> CodeVector:
    """The [24,12,8] extended binary Golay code as a subset of H(24,2)."""
    sch = hamming(24, 2)
    return _subset_from_words(sch, span_codewords(golay_binary_generator(), 2))


def golay_ternary() -> CodeVector:
    """The [12,6,6] extended ternary Golay code as a subset of H(12,3)."""
    sch = hamming(12, 3)
    return _subset_from_words(sch, span_codewords(golay_ternary_generator(), 3))


def translate(chi: CodeVector, v) -> CodeVector:
    """Coset chi + v in a Hamming scheme (coordinatewise addition mod q)."""
    sch = chi.scheme
    assert sch.family == "hamming"
    vw = sch.as_word(v)
    vals = {}
    for w, weight in zip(chi.support_words(), chi.weight_list()):
        shifted = tuple((a + b) % sch.q for a, b in zip(w, vw))
        vals[sch.encode(shifted)] = weight
    return CodeVector(sch, vals)


def coset_leader_of_weight(chi: CodeVector, weight: int):
    """First vertex v (in lex order among words of the given weight) whose
    coset chi + v has minimum weight exactly ``weight``.

    The minimum of each candidate coset is verified by a full scan over
    the code's support, so the returned representative is certified.
    """
    sch = chi.scheme
    D, q = sch.D, sch.q
    packed = chi.packed()
    zero = sch.pack([tuple([0] * D)])
    for positions in itertools.combinations(range(D), weight):
        for vals in itertools.product(range(1, q), repeat=weight):
            v = [0] * D
            for p, a in zip(positions, vals):
                v[p] = a
            v = tuple(v)
            # min weight of the coset chi - v == min distance from v to chi
            cand = sch.pack([v])
            dmin = int(sch.pairwise_distances(cand, packed).min())
            if dmin == weight:
                return v
    raise ValueError(f"no coset of weight {weight} exists")


def golay_binary_coset(weight: int = 4) -> CodeVector:
    code = golay_binary()
    return translate(code, coset_leader_of_weight(code, weight))


def golay_ternary_coset(weight: int = 3) -> CodeVector:
    code = golay_ternary()
    leader = coset_leader_of_weight(code, weight)
    return translate(code, tuple((-a) % 3 for a in leader))


def hamming_code(r: int) -> np.ndarray:
    """Generator matrix of the [2^r - 1, 2^r - 1 - r] binary Hamming code."""
    n = 2 ** r - 1
    H = np.array(
        [[(c >> b) & 1 for c in range(1, n + 1)] for b in range(r)],
        dtype=np.int64,
    )
    return gf_nullspace(H, 2)


def vasilev15() -> CodeVector:
    """A nonlinear single-error-correcting perfect code of length 15.

    Words are (u, u + c, parity(u) + f(c)) with u ranging over F_2^7, c
    over the [7,4] Hamming code, and f a nonlinear 0/1 marker on the 16
    codewords (f(0) = 0).  The marker breaks linearity while the sphere
    packing stays perfect.
    """
    sch = hamming(15, 2)
    ham7 = span_codewords(hamming_code(3), 2)  # 16 words of length 7
    f = (ham7[:, 0] * ham7[:, 1]) % 2
    words = []
    for u_bits in itertools.product(range(2), repeat=7):
        u = np.array(u_bits, dtype=np.int64)
        pu = int(u.sum() % 2)
        for c, fc in zip(ham7, f):
            words.append(tuple(u) + tuple((u + c) % 2) + ((pu + int(fc)) % 2,))
    return CodeVector.from_subset(sch, words)


def witt_design() -> CodeVector:
    """The 759 octads of the binary Golay code as vertices of J(24,8)."""
    octads = [
        tuple(i + 1 for i, v in enumerate(w) if v)
        for w in span_codewords(golay_binary_generator(), 2)
        if int(sum(w)) == 8
    ]
    return CodeVector.from_subset(johnson(24, 8), octads)


# ---------------------------------------------------------------------------
# structural families
# ---------------------------------------------------------------------------

def repetition(D: int) -> CodeVector:
    """The binary repetition code {all-zeros, all-ones} in H(D,2)."""
    sch = hamming(D, 2)
    return CodeVector.from_subset(sch, [tuple([0] * D), tuple([1] * D)])


def even_weight(D: int) -> CodeVector:
    """All even-weight words of H(D,2): the bipartite half containing 0."""
    sch = hamming(D, 2)
    words = [w for w in itertools.product(range(2), repeat=D) if sum(w) % 2 == 0]
    return CodeVector.from_subset(sch, words)


def antipodal_pair(D: int, base=None) -> CodeVector:
    """{x, antipode of x} in H(D,2)."""
    sch = hamming(D, 2)
    xw = sch.as_word(base) if base is not None else tuple([0] * D)
    return CodeVector.from_subset(sch, [xw, tuple(1 - v for v in xw)])


def complementary_pair(D: int, base=None) -> CodeVector:
    """{x, complement of x} in J(2D,D)."""
    sch = johnson(2 * D, D)
    xw = sch.as_word(base) if base is not None else tuple(range(1, D + 1))
    comp = tuple(sorted(set(range(1, 2 * D + 1)) - set(xw)))
    return CodeVector.from_subset(sch, [xw, comp])


# ---------------------------------------------------------------------------
# random generators (seeded, deterministic)
# ---------------------------------------------------------------------------

def random_linear(D: int, q: int, k: int, seed: int) -> CodeVector:
    """Row space of a random full-rank k x D matrix over GF(q)."""
    assert 1 <= k < D
    rng = np.random.default_rng(seed)
    while True:
        gen = rng.integers(0, q, size=(k, D))
        if gf_rank(gen, q) == k:
            break
    return _subset_from_words(hamming(D, q), span_codewords(gen, q))


def random_subset(scheme: Scheme, size: int, seed: int) -> CodeVector:
    """Uniform random subset code of the given size."""
    assert 1 < size < scheme.size
    rng = np.random.default_rng(seed)
    idx = rng.choice(scheme.size, size=size, replace=False)
    return CodeVector(scheme, {int(i): Fraction(1) for i in idx})


def random_coset(D: int, q: int, k: int, seed: int) -> CodeVector:
    """Random translate of a random linear code."""
    rng = np.random.default_rng(seed)
    chi = random_linear(D, q, k, seed)
    v = tuple(int(a) for a in rng.integers(0, q, size=D))
    return translate(chi, v)


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

def load_code(path, scheme: Scheme) -> CodeVector:
    """Read a code file: one vertex per line, '#' comments, optional
    'weight<TAB>vertex' lines with the weight written as 'p/q'.

    Hamming vertices are digit strings of length D; Johnson vertices are
    comma-separated sorted elements of 1..N.
    """
    values = {}
    with open(path, "rt", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "\t" in line:
                wtext, vtext = line.split("\t", 1)
                try:
                    weight = Fraction(wtext.strip())
                except ValueError:
                    raise ParseError(f"bad weight {wtext!r}", lineno) from None
            else:
                weight, vtext = Fraction(1), line
            word = _parse_vertex(vtext.strip(), scheme, lineno)
            idx = scheme.encode(word)
            values[idx] = values.get(idx, Fraction(0)) + weight
    values = {i: w for i, w in values.items() if w != 0}
    if not values:
        raise ParseError("file defines the zero vector", None)
    return CodeVector(scheme, values)


def _parse_vertex(text: str, scheme: Scheme, lineno: int):
    if scheme.family == "hamming":
        if len(text) != scheme.D or not text.isdigit():
            raise ParseError(
                f"expected a digit string of length {scheme.D}, got {text!r}", lineno
            )
        word = tuple(int(ch) for ch in text)
        if any(v >= scheme.q for v in word):
            raise ParseError(f"digit out of range 0..{scheme.q - 1}: {text!r}", lineno)
        return word
    try:
        word = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ParseError(f"expected comma-separated integers, got {text!r}", lineno) from None
    if len(word) != scheme.D or any(a >= b for a, b in zip(word, word[1:])):
        raise ParseError(
            f"expected a sorted {scheme.D}-subset of 1..{scheme.N}, got {text!r}", lineno
        )
    return word


def format_vertex(scheme: Scheme, word) -> str:
    word = scheme.as_word(word)
    if scheme.family == "hamming":
        return "".join(str(v) for v in word)
    return ",".join(str(v) for v in word)


def save_code(chi: CodeVector, path):
    with open(path, "wt", encoding="utf-8") as fh:
        fh.write(f"# scheme {chi.scheme.spec_string()}\n")
        for idx in chi.support_indices():
            w = chi.values[idx]
            vtext = format_vertex(chi.scheme, chi.scheme.decode(idx))
            if w == 1:
                fh.write(vtext + "\n")
            else:
                fh.write(f"{w}\t{vtext}\n")


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusEntry:
    name: str
    scheme_spec: str
    build: callable
    fingerprint: dict = field(default_factory=dict)
    note: str = ""


CORPUS = {
    e.name: e
    for e in [
        CorpusEntry(
            "golay24",
            "hamming:24,2",
            golay_binary,
            {
                "size": 4096,
                "weight_distribution": {0: 1, 8: 759, 12: 2576, 16: 759, 24: 1},
                "dual_support": {0, 8, 12, 16, 24},
                "delta": 8,
                "s_star": 4,
            },
            "extended binary Golay code, self-dual",
        ),
        CorpusEntry(
            "golay24-coset4",
            "hamming:24,2",
            golay_binary_coset,
            {"size": 4096, "min_weight": 4, "dual_support": {0, 8, 12, 16, 24}},
            "deep-hole coset of golay24 (covering radius 4)",
        ),
        CorpusEntry(
            "golay12",
            "hamming:12,3",
            golay_ternary,
            {
                "size": 729,
                "weight_distribution": {0: 1, 6: 264, 9: 440, 12: 24},
                "dual_support": {0, 6, 9, 12},
                "delta": 6,
                "s_star": 3,
            },
            "extended ternary Golay code, self-dual",
        ),
        CorpusEntry(
            "golay12-coset3",
            "hamming:12,3",
            golay_ternary_coset,
            {"size": 729, "min_weight": 3, "dual_support": {0, 6, 9, 12}},
            "deep-hole coset of golay12 (covering radius 3)",
        ),
        CorpusEntry(
            "vasilev15",
            "hamming:15,2",
            vasilev15,
            {"size": 2048, "delta": 3, "s_star": 1},
            "nonlinear single-error-correcting perfect code",
        ),
        CorpusEntry(
            "witt-24-8",
            "johnson:24,8",
            witt_design,
            {"size": 759, "delta": 4, "s_star": 2, "dual_support": {0, 6, 8}},
            "large Witt design 5-(24,8,1) as octad supports",
        ),
        CorpusEntry(
            "repetition-8",
            "hamming:8,2",
            lambda: repetition(8),
            {"size": 2, "delta": 8, "s": 1, "delta_star": 2},
            "binary repetition code = antipodal pair",
        ),
        CorpusEntry(
            "even-weight-8",
            "hamming:8,2",
            lambda: even_weight(8),
            {"size": 128, "delta": 2, "s_star": 1, "delta_star": 8},
            "bipartite half of H(8,2)",
        ),
        CorpusEntry(
            "complementary-pair-6",
            "johnson:12,6",
            lambda: complementary_pair(6),
            {"size": 2, "delta": 6},
            "complementary pair in J(12,6)",
        ),
    ]
}


def corpus_entry(name: str) -> CorpusEntry:
    if name not in CORPUS:
        raise KeyError(f"unknown corpus entry {name!r}; known: {sorted(CORPUS)}")
    return CORPUS[name]
