"""Concrete matrix realizations, random unitaries, and numerical intersection experiments.

Subalgebras of M_N are materialized as orthonormal matrix bases under the
trace inner product.  Commutants are solved as nullspaces of stacked commutator
systems, subspace intersections via the rank identity
dim(V meet W) = dim V + dim W - dim(V + W), and all rank decisions are made at
a scale-aware tolerance with a built-in stability check: if shrinking or
growing the tolerance tenfold changes the decision, a
NumericalInstabilityError is raised instead of guessing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .algebra import BlockStructure, EmbeddedAlgebra, MultiplicityMatrix
from .errors import NumericalInstabilityError, ShapeMismatchError

EPS = float(np.finfo(np.float64).eps)

# Absolute ceiling for the algebra-closure re-verification; rank tolerances are
# scale-aware but closure residuals of healthy algebras sit at machine noise,
# while a misdecided rank produces residuals at the scale of the ambiguous
# singular value.
DEFAULT_CLOSURE_TOL = 1e-9


def default_tolerance(n: int, smax: float) -> float:
    """Scale-aware rank cutoff: N^2 * machine epsilon * largest singular value."""
    return n * n * EPS * max(smax, 1.0)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_stream(master_seed: int, index: int) -> np.random.Generator:
    """Per-sample RNG stream derived from a master seed by sample index.

    Streams depend only on (master_seed, index), so results are identical no
    matter how samples are scheduled.
    """
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def _stable_rank(svals: np.ndarray, tol: float, what: str) -> int:
    """Number of singular values above tol, required to be stable under tol/10 and 10*tol.

    All cutoffs are clamped below at the SVD noise floor (a small multiple of
    machine epsilon times the largest singular value): values underneath it
    are numerically exact zeros and cannot make a decision ambiguous.
    """
    floor = 32.0 * EPS * (float(svals[0]) if svals.size else 1.0)
    lo_cut = max(tol / 10.0, floor)
    hi_cut = max(10.0 * tol, floor)
    lo = int(np.count_nonzero(svals > lo_cut))
    hi = int(np.count_nonzero(svals > hi_cut))
    if lo != hi:
        ambiguous = svals[(svals > lo_cut) & (svals <= hi_cut)]
        defect = float(ambiguous.max()) if ambiguous.size else float(tol)
        raise NumericalInstabilityError(
            f"rank decision for {what} is unstable at tolerance {tol:.3e}", defect
        )
    return int(np.count_nonzero(svals > max(tol, floor)))


@dataclass
class ConcreteRealization:
    """A numerically materialized subalgebra of M_N.

    ``basis`` is a stack of N x N complex matrices orthonormal under the trace
    inner product; ``generators`` is a sublist of algebra elements sufficient
    to generate.  The identity always lies in the span.
    """

    ambient_dim: int
    basis: np.ndarray
    generators: list[np.ndarray]

    @property
    def dimension(self) -> int:
        return self.basis.shape[0]

    def vectors(self) -> np.ndarray:
        """Basis as columns of an N^2 x d matrix (row-major vectorization)."""
        d, n = self.basis.shape[0], self.ambient_dim
        return self.basis.reshape(d, n * n).T

    def project_residual(self, mats: np.ndarray) -> np.ndarray:
        """Frobenius distance of each given matrix from the span of the basis."""
        n = self.ambient_dim
        flat = mats.reshape(mats.shape[0], n * n)
        bflat = self.basis.reshape(self.dimension, n * n)
        coeff = flat @ bflat.conj().T
        recon = coeff @ bflat
        return np.linalg.norm(flat - recon, axis=1)

    def closure_defect(self) -> float:
        """Largest residual of adjoints and pairwise products outside the span."""
        adj = np.transpose(self.basis.conj(), (0, 2, 1))
        prods = np.einsum("aij,bjk->abik", self.basis, self.basis)
        prods = prods.reshape(-1, self.ambient_dim, self.ambient_dim)
        res = self.project_residual(np.concatenate([adj, prods]))
        return float(res.max())

    def contains_identity(self, tol: float = 1e-10) -> bool:
        eye = np.eye(self.ambient_dim, dtype=complex)[None]
        return float(self.project_residual(eye)[0]) <= tol


def model_matrix_units(structure: BlockStructure) -> list[np.ndarray]:
    """Matrix units of every block, as matrices in the block-diagonal model."""
    size = structure.model_dim()
    units = []
    offset = 0
    for b in structure.blocks:
        for p in range(b):
            for q in range(b):
                e = np.zeros((size, size), dtype=complex)
                e[offset + p, offset + q] = 1.0
                units.append(e)
        offset += b
    return units


def embed_model(emb: MultiplicityMatrix, a: np.ndarray) -> np.ndarray:
    """Map an element of the source block model through a unital embedding.

    Within target block i the source blocks are laid out in order, block j
    amplified as a_j tensor I_{mu[i, j]} (zero multiplicities are skipped).
    """
    s = emb.source.model_dim()
    if a.shape != (s, s):
        raise ShapeMismatchError(f"expected a {s}x{s} model element, got {a.shape}")
    if not emb.unital():
        raise ShapeMismatchError("embedding must be unital to fill the target exactly")
    src_off = np.concatenate([[0], np.cumsum(emb.source.blocks)])
    out = np.zeros((emb.target.model_dim(), emb.target.model_dim()), dtype=complex)
    t_off = 0
    for i, row in enumerate(emb.entries):
        pos = t_off
        for j, m in enumerate(row):
            if m == 0:
                continue
            block = a[src_off[j] : src_off[j + 1], src_off[j] : src_off[j + 1]]
            amplified = np.kron(block, np.eye(m))
            k = amplified.shape[0]
            out[pos : pos + k, pos : pos + k] = amplified
            pos += k
        t_off += emb.target.blocks[i]
    return out


def realize(emb: EmbeddedAlgebra) -> ConcreteRealization:
    """Block-diagonal realization of an embedded algebra inside M_N.

    Generators are the amplified matrix units of each block; the basis is the
    same family normalized to unit trace norm (distinct units have disjoint
    support, so they are orthogonal already).
    """
    row = emb.ambient_row()
    gens = [embed_model(row, u) for u in model_matrix_units(emb.structure)]
    basis = np.stack([g / np.linalg.norm(g) for g in gens])
    return ConcreteRealization(emb.ambient_dim, basis, gens)


def realize_class(parent: EmbeddedAlgebra, emb: MultiplicityMatrix) -> ConcreteRealization:
    """Realize a subalgebra of ``parent`` (given by its multiplicity matrix) inside M_N.

    The image lies inside the span of ``realize(parent)``: elements are first
    embedded into the parent's block model and then amplified into the ambient.
    """
    if emb.target.blocks != parent.structure.blocks:
        raise ShapeMismatchError("embedding target does not match the parent structure")
    row = parent.ambient_row()
    gens = [embed_model(row, embed_model(emb, u)) for u in model_matrix_units(emb.source)]
    basis = np.stack([g / np.linalg.norm(g) for g in gens])
    return ConcreteRealization(parent.ambient_dim, basis, gens)


def conjugate(real: ConcreteRealization, u: np.ndarray) -> ConcreteRealization:
    """Conjugated copy u A u* of a realization; orthonormality is preserved."""
    uh = u.conj().T
    basis = np.einsum("ij,ajk,kl->ail", u, real.basis, uh)
    gens = [u @ g @ uh for g in real.generators]
    return ConcreteRealization(real.ambient_dim, basis, gens)


def haar_unitary(n: int, seed) -> np.ndarray:
    """Haar-distributed random unitary via QR of a complex Ginibre matrix.

    The triangular factor's diagonal phases are normalized so the distribution
    is exactly Haar; deterministic for a fixed seed.
    """
    if n < 1:
        raise ValueError("dimension must be positive")
    rng = _as_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_skew_direction(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random skew-Hermitian matrix of unit operator norm."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    k = (z - z.conj().T) / 2.0
    return k / np.linalg.norm(k, 2)


def local_unitary(center: np.ndarray, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Unitary at distance about ``radius`` from ``center`` along a random direction."""
    n = center.shape[0]
    return center @ expm(radius * random_skew_direction(n, rng))


def commutant_basis(gens: list[np.ndarray], tol: float | None = None) -> ConcreteRealization:
    """Orthonormal basis of the joint commutant {X : X A_g = A_g X for all g}.

    With row-major vectorization the condition reads
    (A kron I - I kron A^T) vec(X) = 0; the systems are stacked and the
    nullspace is read off an SVD at a stable rank cutoff.
    """
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].shape[0]
    eye = np.eye(n)
    rows = [np.kron(a, eye) - np.kron(eye, a.T) for a in gens]
    system = np.concatenate(rows)
    u, s, vh = np.linalg.svd(system)
    cutoff = default_tolerance(n, float(s[0]) if s.size else 1.0) if tol is None else tol
    rank = _stable_rank(s, cutoff, "commutant system")
    null = vh[rank:].conj()
    basis = null.reshape(-1, n, n)
    return ConcreteRealization(n, basis, [m.copy() for m in basis])


def intersect(
    a: ConcreteRealization,
    b: ConcreteRealization,
    tol: float | None = None,
    closure_tol: float = DEFAULT_CLOSURE_TOL,
) -> ConcreteRealization:
    """Intersection of two realized subalgebras of the same M_N.

    The dimension comes from dim V + dim W - dim(V + W); the basis itself from
    the nullspace of the paired system [U, -W].  The output is re-verified to
    be closed under products and adjoints, which guards against rank
    misdecisions; a failed verification raises NumericalInstabilityError with
    the measured defect.
    """
    if a.ambient_dim != b.ambient_dim:
        raise ShapeMismatchError("realizations live in different ambient dimensions")
    n = a.ambient_dim
    va, vb = a.vectors(), b.vectors()
    stacked = np.concatenate([va, vb], axis=1)
    s_sum = np.linalg.svd(stacked, compute_uv=False)
    cutoff = default_tolerance(n, float(s_sum[0])) if tol is None else tol
    dim_sum = _stable_rank(s_sum, cutoff, "combined span")
    dim_int = a.dimension + b.dimension - dim_sum
    if dim_int < 1:
        # The identity lies in both spans, so an empty intersection is a rank error.
        raise NumericalInstabilityError(
            "intersection lost the identity; rank decision is suspect", float(dim_int)
        )

    paired = np.concatenate([va, -vb], axis=1)
    u, s, vh = np.linalg.svd(paired)
    nullity = paired.shape[1] - _stable_rank(s, cutoff, "paired system")
    if nullity != dim_int:
        raise NumericalInstabilityError(
            f"rank identity mismatch: nullity {nullity} vs {dim_int}",
            float(abs(nullity - dim_int)),
        )
    coeffs = vh[paired.shape[1] - nullity :].conj()[:, : a.dimension]
    raw = (va @ coeffs.T).T  # rows are vectorized intersection elements
    # Orthonormalize; the raw family has full rank dim_int by construction.
    q, _ = np.linalg.qr(raw.T)
    basis = q.T[:dim_int].reshape(-1, n, n)
    out = ConcreteRealization(n, basis, [m.copy() for m in basis])

    defect = out.closure_defect()
    if defect > closure_tol:
        raise NumericalInstabilityError(
            "intersection span is not closed under product/adjoint", defect
        )
    return out


@dataclass
class DensityStats:
    """Tally of intersection dimensions over sampled perturbing unitaries."""

    samples: int
    trivial_count: int
    dims_histogram: dict[int, int]
    seed: int
    radius: float | None
    center: np.ndarray | None
    dims: tuple[int, ...]

    @property
    def min_dim(self) -> int:
        return min(self.dims)

    def to_json_dict(self) -> dict:
        from .serialize import matrix_to_json

        return {
            "samples": self.samples,
            "trivial_count": self.trivial_count,
            "dims_histogram": {str(k): v for k, v in sorted(self.dims_histogram.items())},
            "seed": self.seed,
            "radius": self.radius,
            "center": None if self.center is None else matrix_to_json(self.center),
            "dims": list(self.dims),
        }

    def csv_rows(self):
        return [(i, d) for i, d in enumerate(self.dims)]


def tally_dims(dims: list[int], seed: int, radius, center) -> DensityStats:
    hist: dict[int, int] = {}
    for d in dims:
        hist[d] = hist.get(d, 0) + 1
    return DensityStats(
        samples=len(dims),
        trivial_count=hist.get(1, 0),
        dims_histogram=hist,
        seed=seed,
        radius=radius,
        center=center,
        dims=tuple(dims),
    )


def density_experiment(
    b1: EmbeddedAlgebra,
    b2: EmbeddedAlgebra,
    samples: int,
    seed: int,
    local: tuple[np.ndarray | None, float] | None = None,
    tol: float | None = None,
) -> DensityStats:
    """Sample unitaries u and tally dim(B1 meet u B2 u*).

    Global mode draws Haar unitaries; local mode draws
    center @ exp(radius * K) for random unit-norm skew-Hermitian directions K.
    Sample i uses the RNG stream derived from (seed, i), so the tally does not
    depend on execution order.
    """
    if b1.ambient_dim != b2.ambient_dim:
        raise ShapeMismatchError("ambient dimensions differ")
    if samples < 1:
        raise ValueError("need at least one sample")
    n = b1.ambient_dim
    center = None
    radius = None
    if local is not None:
        center, radius = local
        if radius is None or radius <= 0:
            raise ValueError("local mode needs a positive radius")
        center = np.eye(n, dtype=complex) if center is None else np.asarray(center)
    r1 = realize(b1)
    r2 = realize(b2)
    dims = []
    for i in range(samples):
        rng = sample_stream(seed, i)
        if center is None:
            u = haar_unitary(n, rng)
        else:
            u = local_unitary(center, radius, rng)
        dims.append(intersect(r1, conjugate(r2, u), tol=tol).dimension)
    return tally_dims(dims, seed, radius, center)
