"""Dense Terwilliger-algebra laboratory for small schemes.

Materializes the associate matrices, primitive idempotents and dual
idempotents of a scheme with at most a few thousand vertices, decomposes
the standard module into irreducible modules of the algebra generated by
A_1 and the dual adjacency A_1*, and verifies the structural facts the
rest of the package relies on (tridiagonal actions, vanishing of the
lower split blocks, the displacement and split decompositions, and the
orthogonality characterizations behind the design theorems).

All numerics are float64 with a relative tolerance ``TAU``; every
tolerance-based decision is cross-checked against integer constraints
(sum of module dimensions, eigenspace multiplicities), so a bad
tolerance surfaces as a hard failure instead of a silent misread.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import SchemeConfigError
from .schemes import Scheme
from .spectra import CodeVector

TAU = 1e-8
DENSE_CAP = 2048
_CACHE_CAP = 600  # cache dense A_i / E_j matrices below this vertex count


# ---------------------------------------------------------------------------
# dense operators
# ---------------------------------------------------------------------------

class DenseOperators:
    """A_i, E_j, E_i*, A_1* of one scheme, with respect to one base vertex.

    Matrices are built on demand; schemes small enough to sit in the
    cache keep them. ``phi(j)`` returns an orthonormal eigenbasis of the
    j-th eigenspace (columns), computed from one symmetric
    eigendecomposition of A_1.
    """

    def __init__(self, scheme: Scheme, base, cap: int = DENSE_CAP):
        if scheme.size > cap:
            raise SchemeConfigError(
                f"{scheme} has {scheme.size} vertices; dense cap is {cap}"
            )
        self.scheme = scheme
        self.base = scheme.as_index(base)
        self.n = scheme.size
        packed = scheme.pack(list(scheme.vertices()))
        self.dist = scheme.pairwise_distances(packed, packed)
        self.dist_to_base = self.dist[self.base].astype(np.int64)
        self._cache: dict = {}
        self._phi = None

    def A(self, i: int) -> np.ndarray:
        key = ("A", i)
        if key in self._cache:
            return self._cache[key]
        M = (self.dist == i).astype(np.float64)
        if self.n <= _CACHE_CAP:
            self._cache[key] = M
        return M

    def E(self, j: int) -> np.ndarray:
        """Primitive idempotent from the exact Q row, as floats."""
        key = ("E", j)
        if key in self._cache:
            return self._cache[key]
        coef = np.array(
            [float(q) for q in self.scheme.Q[j]], dtype=np.float64
        ) / self.n
        M = coef[self.dist]
        if self.n <= _CACHE_CAP:
            self._cache[key] = M
        return M

    def Estar_mask(self, i: int) -> np.ndarray:
        return self.dist_to_base == i

    def Estar(self, i: int) -> np.ndarray:
        return np.diag(self.Estar_mask(i).astype(np.float64))

    @property
    def Astar(self) -> np.ndarray:
        if "Astar" not in self._cache:
            theta = np.array(
                [float(self.scheme.Q[1][i]) for i in range(self.scheme.D + 1)]
            )
            self._cache["Astar"] = np.diag(theta[self.dist_to_base])
        return self._cache["Astar"]

    def phi(self, j: int) -> np.ndarray:
        """Orthonormal basis (columns) of the eigenspace E_j V."""
        if self._phi is None:
            evals, evecs = np.linalg.eigh(self.A(1))
            order = np.argsort(evals)[::-1]  # p_1(j) is strictly decreasing in j
            evals, evecs = evals[order], evecs[:, order]
            blocks = []
            pos = 0
            for jj in range(self.scheme.D + 1):
                m = self.scheme.multiplicities[jj]
                block = evecs[:, pos : pos + m]
                expect = float(self.scheme.P[1][jj])
                if not np.allclose(evals[pos : pos + m], expect, atol=1e-6):
                    raise AssertionError(
                        f"eigenvalue block {jj} of A_1 does not match P[1][{jj}]"
                    )
                blocks.append(block)
                pos += m
            self._phi = blocks
        return self._phi[j]

    def project_eigenspace(self, j: int, vecs: np.ndarray) -> np.ndarray:
        """E_j applied to a stack of column vectors via the eigenbasis."""
        phi = self.phi(j)
        return phi @ (phi.T @ vecs)

    def dense_vector(self, chi: CodeVector) -> np.ndarray:
        v = np.zeros(self.n)
        for idx, w in chi.values.items():
            v[idx] = float(w)
        return v


def build_operators(scheme: Scheme, base, cap: int = DENSE_CAP) -> DenseOperators:
    return DenseOperators(scheme, base, cap)


# ---------------------------------------------------------------------------
# numerical subspace helpers
# ---------------------------------------------------------------------------

def _orthonormalize(vectors: np.ndarray, against: np.ndarray | None = None,
                    tol: float = TAU) -> np.ndarray:
    """Orthonormal basis of the column space of ``vectors``, optionally
    orthogonal to the (orthonormal) columns of ``against``."""
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    cols = []
    scale = max(np.abs(vectors).max(initial=0.0), 1.0)
    for k in range(vectors.shape[1]):
        v = vectors[:, k].copy()
        for _ in range(2):  # twice-is-enough Gram-Schmidt
            if against is not None and against.shape[1]:
                v -= against @ (against.T @ v)
            for c in cols:
                v -= c * (c @ v)
        nrm = np.linalg.norm(v)
        if nrm > tol * scale:
            cols.append(v / nrm)
    if not cols:
        return np.zeros((vectors.shape[0], 0))
    return np.column_stack(cols)


def _rank(M: np.ndarray, tol: float = TAU) -> int:
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0:
        return 0
    return int(np.sum(sv > tol * max(sv[0], 1.0)))


def _intersection_dim(B1: np.ndarray, B2: np.ndarray, tol: float = TAU) -> int:
    """Dimension of the intersection of two subspaces given by
    orthonormal column bases (principal angles with cosine >= 1 - tol)."""
    if B1.shape[1] == 0 or B2.shape[1] == 0:
        return 0
    sv = np.linalg.svd(B1.T @ B2, compute_uv=False)
    return int(np.sum(sv >= 1.0 - tol))


def _subspace_residual(B_target: np.ndarray, B_space: np.ndarray) -> float:
    """How far the columns of B_target stick out of span(B_space)."""
    if B_target.shape[1] == 0:
        return 0.0
    resid = B_target - B_space @ (B_space.T @ B_target)
    return float(np.linalg.norm(resid) / max(np.linalg.norm(B_target), 1.0))


def _closure(seed: np.ndarray, generators, tol: float = TAU) -> np.ndarray:
    """Orthonormal basis of the smallest generator-invariant subspace
    containing ``seed`` (a single vector or a stack of columns)."""
    basis = _orthonormalize(seed, tol=tol)
    frontier = basis
    while frontier.shape[1]:
        images = np.hstack([G @ frontier for G in generators])
        new = _orthonormalize(images, against=basis, tol=max(tol, 1e-10))
        if new.shape[1] == 0:
            break
        basis = np.hstack([basis, new])
        frontier = new
    return basis


# ---------------------------------------------------------------------------
# module decomposition
# ---------------------------------------------------------------------------

@dataclass
class ModuleRecord:
    """One irreducible module of the algebra <A_1, A_1*>.

    ``basis`` is an orthonormal |X| x dim matrix; the numerical basis is
    seed-dependent but the signature (endpoints, diameters, thinness,
    per-index dimensions) is not.
    """

    basis: np.ndarray
    endpoint: int
    dual_endpoint: int
    diameter: int
    dual_diameter: int
    displacement: int
    thin: bool
    dual_thin: bool
    estar_dims: tuple
    e_dims: tuple

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def support(self) -> tuple:
        return tuple(i for i, d in enumerate(self.estar_dims) if d)

    @property
    def dual_support(self) -> tuple:
        return tuple(j for j, d in enumerate(self.e_dims) if d)

    def signature(self) -> tuple:
        return (
            self.endpoint,
            self.dual_endpoint,
            self.diameter,
            self.thin,
            self.dual_thin,
            self.estar_dims,
            self.e_dims,
        )

    @property
    def is_primary(self) -> bool:
        return self.endpoint == 0


def _split_minimal(ops: DenseOperators, basis: np.ndarray, rng, restarts=6):
    """Recursively split a T-invariant subspace into irreducible pieces."""
    d = basis.shape[1]
    if d == 1:
        return [basis]
    A = ops.A(1)
    As = ops.Astar
    RA = basis.T @ (A @ basis)
    RS = basis.T @ (As @ basis)
    RA = 0.5 * (RA + RA.T)
    RS = 0.5 * (RS + RS.T)
    gens = (RA, RS)

    def try_split(u):
        C = _closure(u, gens)
        if 0 < C.shape[1] < d:
            qc, _ = np.linalg.qr(C, mode="complete")
            comp = qc[:, C.shape[1]:]
            return _split_minimal(ops, basis @ C, rng, restarts) + _split_minimal(
                ops, basis @ comp, rng, restarts
            )
        return None

    for _ in range(restarts):
        a, b = rng.normal(size=2)
        S = a * RA + b * RS
        evals, evecs = np.linalg.eigh(S)
        scale = max(np.abs(evals).max(), 1.0)
        clusters = []
        start = 0
        for k in range(1, d + 1):
            if k == d or evals[k] - evals[k - 1] > 1e-6 * scale:
                clusters.append(evecs[:, start:k])
                start = k
        clusters.sort(key=lambda c: c.shape[1])
        for cluster in clusters[:4]:
            mix = cluster @ rng.normal(size=cluster.shape[1])
            out = try_split(mix / np.linalg.norm(mix))
            if out is not None:
                return out
    # no split found: certify irreducibility from every basis direction
    for k in range(d):
        u = np.zeros(d)
        u[k] = 1.0
        out = try_split(u)
        if out is not None:
            return out
    return [basis]


def decompose_modules(ops: DenseOperators, seed: int = 0) -> list:
    """Decompose the standard module into irreducible T(x)-modules.

    Seeding strategy: one random symmetric combination a*A + b*A* is
    eigendecomposed once; closures of its eigenvectors (taken orthogonal
    to the modules already found) produce T-submodules, each of which is
    recursively split to minimal ones.  The returned records are sorted
    by (endpoint, dual endpoint, diameter) and their dimensions sum to
    |X| exactly -- this is asserted, as is the eigenspace multiplicity
    balance, so tolerance failures cannot pass silently.
    """
    rng = np.random.default_rng(seed)
    n = ops.n
    A = ops.A(1)
    As = ops.Astar
    a, b = rng.normal(size=2)
    S = a * A + b * As
    evals, evecs = np.linalg.eigh(S)
    scale = max(np.abs(evals).max(), 1.0)
    clusters = []
    start = 0
    for k in range(1, n + 1):
        if k == n or evals[k] - evals[k - 1] > 1e-6 * scale:
            clusters.append(evecs[:, start:k])
            start = k

    found: list[np.ndarray] = []
    accum = np.zeros((n, 0))
    for cluster in clusters:
        while True:
            mix = cluster @ rng.normal(size=cluster.shape[1])
            u = mix - accum @ (accum.T @ mix) if accum.shape[1] else mix
            nrm = np.linalg.norm(u)
            if nrm < 1e-7:
                break  # cluster exhausted by found modules
            W = _closure(u / nrm, (A, As))
            for piece in _split_minimal(ops, W, rng):
                # keep pieces orthogonal to everything found so far
                piece = _orthonormalize(piece, against=accum)
                if piece.shape[1] == 0:
                    continue
                found.append(piece)
                accum = np.hstack([accum, piece])
            if accum.shape[1] == n:
                break
        if accum.shape[1] == n:
            break

    total = sum(B.shape[1] for B in found)
    if total != n:
        raise AssertionError(
            f"module dimensions sum to {total}, expected {n}; offending "
            f"decomposition had {len(found)} pieces"
        )
    records = [_make_record(ops, B) for B in found]
    records.sort(key=lambda r: (r.endpoint, r.dual_endpoint, r.diameter, -r.dim))
    _check_records(ops, records)
    return records


def _make_record(ops: DenseOperators, basis: np.ndarray) -> ModuleRecord:
    D = ops.scheme.D
    estar_dims = []
    for i in range(D + 1):
        sub = basis[ops.Estar_mask(i), :]
        estar_dims.append(_rank(sub))
    e_dims = []
    for j in range(D + 1):
        e_dims.append(_rank(ops.phi(j).T @ basis))
    support = [i for i, d in enumerate(estar_dims) if d]
    dual_support = [j for j, d in enumerate(e_dims) if d]
    r, r_star = support[0], dual_support[0]
    diam, dual_diam = len(support) - 1, len(dual_support) - 1
    # supports must be intervals
    assert support == list(range(r, r + diam + 1)), f"support {support} not an interval"
    assert dual_support == list(range(r_star, r_star + dual_diam + 1))
    return ModuleRecord(
        basis=basis,
        endpoint=r,
        dual_endpoint=r_star,
        diameter=diam,
        dual_diameter=dual_diam,
        displacement=r + r_star + diam - D,
        thin=all(d <= 1 for d in estar_dims),
        dual_thin=all(d <= 1 for d in e_dims),
        estar_dims=tuple(estar_dims),
        e_dims=tuple(e_dims),
    )


def _check_records(ops: DenseOperators, records: list):
    n, D = ops.n, ops.scheme.D
    assert sum(r.dim for r in records) == n
    for j in range(D + 1):
        got = sum(r.e_dims[j] for r in records)
        assert got == ops.scheme.multiplicities[j], (
            f"sum of dim E_{j} W = {got} != m_{j} = {ops.scheme.multiplicities[j]}"
        )
    for r in records:
        assert sum(r.estar_dims) == r.dim
        assert r.diameter == r.dual_diameter, "diameter mismatch d(W) != d*(W)"
        assert 2 * r.endpoint + r.diameter >= D
        assert 2 * r.dual_endpoint + r.diameter >= D
        assert 0 <= r.displacement <= D
        if r.displacement == 0 and not r.thin:
            raise AssertionError(
                "displacement-zero module is not thin: "
                f"signature {r.signature()}"
            )
        if r.thin:
            assert r.dual_thin, "thin module is not dual thin"
    primaries = [r for r in records if r.endpoint == 0]
    assert len(primaries) == 1 and primaries[0].dim == D + 1
    assert primaries[0].dual_endpoint == 0


def signature_multiset(records: list) -> list:
    """Deterministic decomposition fingerprint: sorted signatures with
    multiplicities."""
    from collections import Counter

    sig = Counter(r.signature() for r in records)
    return sorted((s, m) for s, m in sig.items())


# ---------------------------------------------------------------------------
# structural verdicts
# ---------------------------------------------------------------------------

@dataclass
class Verdict:
    ok: bool
    max_residual: float
    details: dict = field(default_factory=dict)

    def as_dict(self):
        return {"ok": self.ok, "max_residual": self.max_residual, **self.details}


def _estar_bases(ops: DenseOperators, rec: ModuleRecord) -> list:
    out = []
    for i in range(ops.scheme.D + 1):
        masked = np.zeros_like(rec.basis)
        mask = ops.Estar_mask(i)
        masked[mask, :] = rec.basis[mask, :]
        out.append(_orthonormalize(masked))
    return out


def _e_bases(ops: DenseOperators, rec: ModuleRecord) -> list:
    out = []
    for j in range(ops.scheme.D + 1):
        out.append(_orthonormalize(ops.project_eigenspace(j, rec.basis)))
    return out


def verify_tridiagonal(ops: DenseOperators, records: list, tol: float = TAU) -> Verdict:
    """Check the tridiagonal shape of A on the E_i*-decomposition of each
    module and of A* on the E_j-decomposition, plus the non-vanishing of
    the off-diagonal blocks inside the supports."""
    A, As = ops.A(1), ops.Astar
    D = ops.scheme.D
    worst = 0.0
    nonvanishing_ok = True
    for rec in records:
        eb = _estar_bases(ops, rec)
        db = _e_bases(ops, rec)
        for i in range(D + 1):
            if eb[i].shape[1] == 0:
                continue
            img = A @ eb[i]
            span = np.hstack(
                [eb[k] for k in (i - 1, i, i + 1) if 0 <= k <= D and eb[k].shape[1]]
            )
            worst = max(worst, _subspace_residual(img, span))
        for j in range(D + 1):
            if db[j].shape[1] == 0:
                continue
            img = As @ db[j]
            span = np.hstack(
                [db[k] for k in (j - 1, j, j + 1) if 0 <= k <= D and db[k].shape[1]]
            )
            worst = max(worst, _subspace_residual(img, span))
        r, d = rec.endpoint, rec.diameter
        for i in range(r, r + d):
            block = (A @ eb[i])[ops.Estar_mask(i + 1), :]
            if np.linalg.norm(block) <= tol:
                nonvanishing_ok = False
        rs = rec.dual_endpoint
        for j in range(rs, rs + rec.dual_diameter):
            block = ops.phi(j + 1).T @ (As @ db[j])
            if np.linalg.norm(block) <= tol:
                nonvanishing_ok = False
    return Verdict(
        ok=worst <= tol and nonvanishing_ok,
        max_residual=worst,
        details={"offdiagonal_blocks_nonzero": nonvanishing_ok},
    )


def verify_itt(ops: DenseOperators, records: list, tol: float = TAU) -> Verdict:
    """Lower-triangular split blocks of every module must vanish:
    W_ij = 0 and W*_ij = 0 for i < j."""
    violations = []
    diag_dims = []
    for rec in records:
        eb = _estar_bases(ops, rec)
        db = _e_bases(ops, rec)
        r, rs, d = rec.endpoint, rec.dual_endpoint, rec.diameter

        def partial(bases, lo, hi):  # span of bases[lo..hi]
            mats = [bases[k] for k in range(lo, hi + 1) if bases[k].shape[1]]
            if not mats:
                return np.zeros((ops.n, 0))
            return _orthonormalize(np.hstack(mats))

        for i in range(d + 1):
            low_star = partial(eb, r, r + i)
            low_e = partial(db, rs, rs + i)
            for j in range(d + 1):
                if i < j:
                    w = _intersection_dim(low_star, partial(db, rs + j, rs + d), tol)
                    ws = _intersection_dim(low_e, partial(eb, r + j, r + d), tol)
                    if w or ws:
                        violations.append(
                            {"module": rec.signature()[:3], "i": i, "j": j,
                             "dim_W": w, "dim_W_star": ws}
                        )
                elif i == j:
                    diag_dims.append(
                        _intersection_dim(low_star, partial(db, rs + j, rs + d), tol)
                    )
    return Verdict(
        ok=not violations,
        max_residual=0.0,
        details={"violations": violations, "diagonal_dims": diag_dims},
    )


@dataclass
class SplitReport:
    v_dims: np.ndarray        # dim V_ij
    vtilde_dims: np.ndarray   # dim of the new corner of V_ij
    eta_dims: dict            # displacement -> dim (from modules, if given)
    lower_triangle_zero: bool
    eta_matches_split: bool | None
    v0_residual: float | None
    lemma_sum_residual: float | None

    @property
    def ok(self):
        checks = [self.lower_triangle_zero]
        if self.eta_matches_split is not None:
            checks.append(self.eta_matches_split)
        if self.v0_residual is not None:
            checks.append(self.v0_residual <= TAU)
        if self.lemma_sum_residual is not None:
            checks.append(self.lemma_sum_residual <= TAU)
        return all(checks)

    def as_dict(self):
        return {
            "v_dims": self.v_dims.tolist(),
            "vtilde_dims": self.vtilde_dims.tolist(),
            "eta_dims": {str(k): v for k, v in sorted(self.eta_dims.items())},
            "lower_triangle_zero": self.lower_triangle_zero,
            "eta_matches_split": self.eta_matches_split,
            "v0_residual": self.v0_residual,
            "lemma_sum_residual": self.lemma_sum_residual,
            "ok": self.ok,
        }


def split_decomposition(ops: DenseOperators, records: list | None = None,
                        tol: float = TAU) -> SplitReport:
    """Compute the dimensions of V_ij = (sum_{k<=i} E_k* V) cap
    (sum_{l<=j} E_l V) and of the new corners, check that everything
    below the anti-diagonal vanishes, and (when a module decomposition
    is supplied) verify the anti-diagonal against the displacement-zero
    part, including the partial-sum subspace identities."""
    n, D = ops.n, ops.scheme.D
    ball = [ops.dist_to_base <= i for i in range(D + 1)]
    psi = [np.hstack([ops.phi(l) for l in range(j + 1)]) for j in range(D + 1)]

    v_dims = np.zeros((D + 1, D + 1), dtype=int)
    null_bases: dict = {}
    for j in range(D + 1):
        for i in range(D + 1):
            outside = ~ball[i]
            M = psi[j][outside, :]
            if M.shape[0] == 0:
                dim = psi[j].shape[1]
                nullb = np.eye(psi[j].shape[1])
            else:
                u, sv, vt = np.linalg.svd(M)
                rank = int(np.sum(sv > tol * max(sv[0] if sv.size else 0.0, 1.0)))
                dim = psi[j].shape[1] - rank
                nullb = vt[rank:, :].T
            v_dims[i, j] = dim
            null_bases[(i, j)] = psi[j] @ nullb  # ambient basis of V_ij

    vtilde = np.zeros((D + 1, D + 1), dtype=int)
    for i in range(D + 1):
        for j in range(D + 1):
            v = v_dims[i, j]
            a = v_dims[i - 1, j] if i else 0
            b = v_dims[i, j - 1] if j else 0
            c = v_dims[i - 1, j - 1] if i and j else 0
            vtilde[i, j] = v - a - b + c

    lower_zero = all(
        v_dims[i, j] == 0 for i in range(D + 1) for j in range(D + 1) if i + j < D
    )

    eta_dims: dict = {}
    eta_match = None
    v0_res = None
    lemma_res = None
    if records is not None:
        for rec in records:
            eta_dims[rec.displacement] = eta_dims.get(rec.displacement, 0) + rec.dim
        eta_match = all(
            eta_dims.get(eta, 0)
            == sum(vtilde[i, D + eta - i] for i in range(D + 1) if 0 <= D + eta - i <= D)
            for eta in range(D + 1)
        )
        # V_0 as a subspace: span of displacement-zero modules vs the
        # anti-diagonal V_{i,D-i}
        v0_modules = [r.basis for r in records if r.displacement == 0]
        B0 = _orthonormalize(np.hstack(v0_modules))
        anti = _orthonormalize(
            np.hstack([null_bases[(i, D - i)] for i in range(D + 1)])
        )
        v0_res = max(
            _subspace_residual(B0, anti), _subspace_residual(anti, B0)
        ) if B0.shape[1] == anti.shape[1] else 1.0
        # partial-sum identities on V_0
        worst = 0.0
        for i in range(D + 1):
            lhs = _orthonormalize(
                np.hstack([null_bases[(k, D - k)] for k in range(i + 1)])
            )
            masked = np.zeros_like(B0)
            masked[ball[i], :] = B0[ball[i], :]
            rhs = _orthonormalize(masked)
            if lhs.shape[1] != rhs.shape[1]:
                worst = 1.0
                break
            worst = max(worst, _subspace_residual(lhs, rhs), _subspace_residual(rhs, lhs))
        for j in range(D + 1):
            lhs = _orthonormalize(
                np.hstack([null_bases[(D - l, l)] for l in range(j + 1)])
            )
            rhs = _orthonormalize(psi[j] @ (psi[j].T @ B0))
            if lhs.shape[1] != rhs.shape[1]:
                worst = 1.0
                break
            worst = max(worst, _subspace_residual(lhs, rhs), _subspace_residual(rhs, lhs))
        lemma_res = worst

    return SplitReport(
        v_dims=v_dims,
        vtilde_dims=vtilde,
        eta_dims=eta_dims,
        lower_triangle_zero=lower_zero,
        eta_matches_split=eta_match,
        v0_residual=v0_res,
        lemma_sum_residual=lemma_res,
    )


# ---------------------------------------------------------------------------
# orthogonality characterizations
# ---------------------------------------------------------------------------

def _generator_words(ops: DenseOperators, max_len: int = 3):
    """I, A, A*, all products of length <= max_len, and every A_l."""
    import itertools as it

    A, As = ops.A(1), ops.Astar
    words = [np.eye(ops.n)]
    for length in range(1, max_len + 1):
        for combo in it.product((A, As), repeat=length):
            M = combo[0]
            for G in combo[1:]:
                M = M @ G
            words.append(M)
    for ell in range(ops.scheme.D + 1):
        words.append(ops.A(ell))
    return words


def _is_shellwise_constant(ops: DenseOperators, v: np.ndarray, upto: int,
                           tol: float) -> bool:
    scale = max(np.abs(v).max(), 1.0)
    for i in range(1, upto + 1):
        vals = v[ops.Estar_mask(i)]
        if vals.size and vals.max() - vals.min() > tol * scale:
            return False
    return True


def _is_design_upto(ops: DenseOperators, v: np.ndarray, upto: int, tol: float) -> bool:
    xhat = np.zeros(ops.n)
    xhat[ops.base] = 1.0
    for j in range(1, upto + 1):
        gv = ops.phi(j).T @ v
        gx = ops.phi(j).T @ xhat
        n1, n2 = gv @ gv, gx @ gx
        cross = gv @ gx
        if n1 * n2 - cross * cross > tol * max(n1 * n2, 1.0):
            return False
    return True


@dataclass
class OrthogonalityVerdict:
    side: str
    t: int
    orthogonal_to_small_endpoints: bool   # condition (i)
    all_words_pass: bool                  # condition (ii) over tested words
    equivalent: bool
    thm7_orthogonal: bool | None
    failing_word: int | None

    def as_dict(self):
        return {
            "side": self.side,
            "t": self.t,
            "condition_i": self.orthogonal_to_small_endpoints,
            "condition_ii": self.all_words_pass,
            "equivalent": self.equivalent,
            "thm7_orthogonal": self.thm7_orthogonal,
            "failing_word": self.failing_word,
        }


def module_orthogonality_test(
    ops: DenseOperators,
    records: list,
    chi: CodeVector,
    t: int,
    side: str,
    check_thm7: bool = False,
    tol: float = 1e-7,
) -> OrthogonalityVerdict:
    """Verify both directions of the orthogonality characterization.

    side 'P': chi orthogonal to every module with 1 <= endpoint <= t
    iff F chi is shellwise constant on spheres 1..t for every F in the
    algebra (tested over generator words up to length 3 plus all A_l).
    side 'Q': same with dual endpoints and the relative-design property.
    With ``check_thm7`` also confirms that F chi is orthogonal to the
    anti-diagonal split spaces (minus the primary module) up to index t.
    """
    v = ops.dense_vector(chi)
    vnorm = np.linalg.norm(v)
    if side == "P":
        small = [r for r in records if 1 <= r.endpoint <= t]
    elif side == "Q":
        small = [r for r in records if 1 <= r.dual_endpoint <= t]
    else:
        raise ValueError("side must be 'P' or 'Q'")
    cond_i = all(
        np.linalg.norm(r.basis.T @ v) <= tol * vnorm for r in small
    )

    words = _generator_words(ops)
    cond_ii = True
    failing = None
    for w_idx, F in enumerate(words):
        fv = F @ v
        ok = (
            _is_shellwise_constant(ops, fv, t, tol)
            if side == "P"
            else _is_design_upto(ops, fv, t, tol)
        )
        if not ok:
            cond_ii = False
            failing = w_idx
            break

    thm7 = None
    if check_thm7:
        split = split_decomposition_bases(ops)
        primary = next(r for r in records if r.is_primary)
        thm7 = True
        for i in range(1, t + 1):
            key = (i, ops.scheme.D - i) if side == "P" else (ops.scheme.D - i, i)
            B = split.get(key)
            if B is None or B.shape[1] == 0:
                continue
            Bperp = _orthonormalize(
                B - primary.basis @ (primary.basis.T @ B)
            )
            for F in words:
                fv = F @ v
                if Bperp.shape[1] and np.linalg.norm(Bperp.T @ fv) > tol * max(
                    np.linalg.norm(fv), 1.0
                ):
                    thm7 = False
                    break
            if not thm7:
                break

    return OrthogonalityVerdict(
        side=side,
        t=t,
        orthogonal_to_small_endpoints=cond_i,
        all_words_pass=cond_ii,
        equivalent=cond_i == cond_ii,
        thm7_orthogonal=thm7,
        failing_word=failing,
    )


def split_decomposition_bases(ops: DenseOperators, tol: float = TAU) -> dict:
    """Ambient orthonormal bases of the anti-diagonal spaces V_{i,D-i}."""
    D = ops.scheme.D
    out = {}
    for i in range(D + 1):
        j = D - i
        psi = np.hstack([ops.phi(l) for l in range(j + 1)])
        outside = ~(ops.dist_to_base <= i)
        M = psi[outside, :]
        if M.shape[0] == 0:
            out[(i, j)] = psi
            continue
        u, sv, vt = np.linalg.svd(M)
        rank = int(np.sum(sv > tol * max(sv[0] if sv.size else 0.0, 1.0)))
        out[(i, j)] = psi @ vt[rank:, :].T
    return out
