"""Finite-dimensional representations of a unital free product of two block algebras.

A representation pair carries a block model for each factor, multiplicity rows
placing both factors on a common space, and a perturbing unitary applied to
the second factor.  On top of that sit: word evaluation with an explicit
Lipschitz bound in the perturbing unitary, the rank-of-central-projections
(RCP) balance that makes irreducible perturbations generic, irreducibility via
the joint commutant, Monte-Carlo probing of how densely perturbations are
irreducible (DPI), and a staged builder that direct-sums representations while
keeping every stage irreducible within a shrinking perturbation budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import block_diag, expm

from .algebra import BlockStructure
from .errors import NumericalInstabilityError, SearchExhaustedError, ShapeMismatchError
from .numeric import (
    DensityStats,
    tally_dims,
    commutant_basis,
    haar_unitary,
    model_matrix_units,
    random_skew_direction,
    sample_stream,
)


class Letter(NamedTuple):
    side: int  # 1 or 2
    value: np.ndarray  # element of the factor's block model


@dataclass(frozen=True)
class FreeElement:
    """Linear combination of alternating words in the two factors.

    Each term is (coefficient, word); within a word consecutive letters must
    alternate sides, and the empty word denotes the unit.
    """

    terms: tuple[tuple[complex, tuple[Letter, ...]], ...]

    def __post_init__(self):
        norm_terms = []
        for coeff, word in self.terms:
            word = tuple(Letter(int(l[0]), np.asarray(l[1], dtype=complex)) for l in word)
            for letter in word:
                if letter.side not in (1, 2):
                    raise ValueError(f"letter side must be 1 or 2, got {letter.side}")
            for prev, nxt in zip(word, word[1:]):
                if prev.side == nxt.side:
                    raise ValueError("consecutive letters must alternate sides")
            norm_terms.append((complex(coeff), word))
        object.__setattr__(self, "terms", tuple(norm_terms))

    @classmethod
    def word(cls, coeff: complex, letters) -> "FreeElement":
        return cls(((coeff, tuple(letters)),))

    @classmethod
    def unit(cls, coeff: complex = 1.0) -> "FreeElement":
        return cls(((coeff, ()),))


@dataclass(frozen=True)
class RepPair:
    """Representations of the two factors on a common space, with a perturbing unitary."""

    algebra1: BlockStructure
    mult1: tuple[int, ...]
    algebra2: BlockStructure
    mult2: tuple[int, ...]
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mult1", tuple(int(m) for m in self.mult1))
        object.__setattr__(self, "mult2", tuple(int(m) for m in self.mult2))
        object.__setattr__(self, "u", np.asarray(self.u, dtype=complex))
        d1 = _rep_dim(self.algebra1, self.mult1)
        d2 = _rep_dim(self.algebra2, self.mult2)
        if d1 != d2:
            raise ShapeMismatchError(f"factor dimensions differ: {d1} vs {d2}")
        if self.u.shape != (d1, d1):
            raise ShapeMismatchError(f"perturbing unitary must be {d1}x{d1}, got {self.u.shape}")
        defect = np.linalg.norm(self.u.conj().T @ self.u - np.eye(d1))
        if defect > 1e-12:
            raise ValueError(f"perturbation is not unitary (defect {defect:.3e})")

    @property
    def dim(self) -> int:
        return _rep_dim(self.algebra1, self.mult1)

    def with_unitary(self, u: np.ndarray) -> "RepPair":
        return RepPair(self.algebra1, self.mult1, self.algebra2, self.mult2, u)

    def factor(self, side: int, a: np.ndarray) -> np.ndarray:
        """Image of a block-model element under the (unperturbed) factor representation."""
        alg, mult = (self.algebra1, self.mult1) if side == 1 else (self.algebra2, self.mult2)
        return _amplify(alg, [mult], a, self.dim)


def _rep_dim(alg: BlockStructure, mult) -> int:
    return sum(m * n for m, n in zip(mult, alg.blocks))


def _amplify(alg: BlockStructure, segments, a: np.ndarray, dim: int) -> np.ndarray:
    """Direct sum, over multiplicity-row segments, of the amplified block model element.

    Segments with zero total dimension are skipped; rows may contain zero
    entries (the representation need not be faithful).
    """
    s = alg.model_dim()
    if a.shape != (s, s):
        raise ShapeMismatchError(f"expected a {s}x{s} element of {alg}, got {a.shape}")
    pieces = []
    offsets = np.concatenate([[0], np.cumsum(alg.blocks)])
    for row in segments:
        for j, m in enumerate(row):
            if m == 0:
                continue
            block = a[offsets[j] : offsets[j + 1], offsets[j] : offsets[j + 1]]
            pieces.append(np.kron(block, np.eye(m)))
    out = block_diag(*pieces) if pieces else np.zeros((0, 0))
    if out.shape != (dim, dim):
        raise ShapeMismatchError(f"amplified element fills {out.shape}, expected {dim}")
    return np.asarray(out, dtype=complex)


def evaluate(rep: RepPair, x: FreeElement) -> np.ndarray:
    """Evaluate a free-product element under the pair perturbed by rep.u."""
    return _evaluate_segments(
        rep.algebra1, [rep.mult1], rep.algebra2, [rep.mult2], rep.u, x, rep.dim
    )


def _evaluate_segments(alg1, segs1, alg2, segs2, u, x: FreeElement, dim: int) -> np.ndarray:
    uh = u.conj().T
    acc = np.zeros((dim, dim), dtype=complex)
    for coeff, word in x.terms:
        m = np.eye(dim, dtype=complex)
        for letter in word:
            if letter.side == 1:
                m = m @ _amplify(alg1, segs1, letter.value, dim)
            else:
                m = m @ (u @ _amplify(alg2, segs2, letter.value, dim) @ uh)
        acc += coeff * m
    return acc


def lipschitz_bound(x: FreeElement) -> float:
    """Bound L(x) with ||eval_u(x) - eval_v(x)|| <= L(x) ||u - v|| for all unitaries u, v.

    Each second-factor letter contributes a telescoping term bounded by twice
    the product of all letter norms.
    """
    total = 0.0
    for coeff, word in x.terms:
        side2 = sum(1 for letter in word if letter.side == 2)
        if side2 == 0:
            continue
        prod = 1.0
        for letter in word:
            prod *= float(np.linalg.norm(letter.value, 2))
        total += abs(coeff) * side2 * 2.0 * prod
    return total


@dataclass(frozen=True)
class RcpReport:
    """Ranks of the images of minimal central projections, one list per factor."""

    rank_lists: tuple[tuple[int, ...], ...]

    @property
    def passes(self) -> bool:
        return all(len(set(ranks)) == 1 for ranks in self.rank_lists)

    def to_json_dict(self) -> dict:
        return {"ranks": [list(r) for r in self.rank_lists], "passes": self.passes}


def rcp_check(alg: BlockStructure, mult) -> RcpReport:
    """Rank-of-central-projections check for one factor.

    The minimal central projection of block j has image rank mult(j) * n(j);
    the factor passes when these ranks are all equal.
    """
    mult = tuple(int(m) for m in mult)
    if len(mult) != alg.num_blocks:
        raise ShapeMismatchError("multiplicity row length does not match block count")
    ranks = tuple(m * n for m, n in zip(mult, alg.blocks))
    return RcpReport((ranks,))


def rcp_check_pair(rep: RepPair) -> RcpReport:
    r1 = rcp_check(rep.algebra1, rep.mult1)
    r2 = rcp_check(rep.algebra2, rep.mult2)
    return RcpReport(r1.rank_lists + r2.rank_lists)


def pad_multiplicities(mult, q) -> tuple[int, ...]:
    """Entrywise sum of a multiplicity row and a padding row of the same length."""
    mult, q = tuple(mult), tuple(q)
    if len(mult) != len(q):
        raise ShapeMismatchError(f"length mismatch: {len(mult)} vs {len(q)}")
    if any(v < 0 for v in q):
        raise ValueError("padding must be nonnegative")
    return tuple(int(m) + int(v) for m, v in zip(mult, q))


@dataclass(frozen=True)
class RcpBalance:
    """Outcome of balancing a representation pair to satisfy the RCP condition."""

    s: int
    qhat1: tuple[int, ...]
    qhat2: tuple[int, ...]
    copies1: int
    copies2: int
    final_mult1: tuple[int, ...]
    final_mult2: tuple[int, ...]
    final_dim: int

    def to_json_dict(self) -> dict:
        return {
            "s": self.s,
            "padding1": list(self.qhat1),
            "padding2": list(self.qhat2),
            "copies": [self.copies1, self.copies2],
            "final_mult1": list(self.final_mult1),
            "final_mult2": list(self.final_mult2),
            "final_dim": self.final_dim,
        }


def rcp_balance(
    alg1: BlockStructure, mult1, alg2: BlockStructure, mult2
) -> RcpBalance:
    """Pad both factor representations so the result satisfies the RCP condition.

    Per factor, with n_i the lcm of the block sizes and r_i(j) = n_i / n_i(j),
    the smallest integer s with s * r_i(j) >= mult_i(j) everywhere fixes the
    target multiplicities s * r_i(j); the two padded spaces are then equalized
    by taking copies up to the lcm of their dimensions.
    """
    mult1, mult2 = tuple(int(m) for m in mult1), tuple(int(m) for m in mult2)
    d1 = _rep_dim(alg1, mult1)
    d2 = _rep_dim(alg2, mult2)
    if d1 != d2:
        raise ShapeMismatchError(f"representations live on different dimensions: {d1} vs {d2}")

    ratios = []
    for alg in (alg1, alg2):
        n = math.lcm(*alg.blocks)
        ratios.append(tuple(n // b for b in alg.blocks))
    s = 1
    for mult, rs in zip((mult1, mult2), ratios):
        for m, r in zip(mult, rs):
            s = max(s, -(-m // r))  # ceil(m / r)

    padded = [tuple(s * r for r in rs) for rs in ratios]
    qhat1 = tuple(p - m for p, m in zip(padded[0], mult1))
    qhat2 = tuple(p - m for p, m in zip(padded[1], mult2))
    dims = [_rep_dim(alg, p) for alg, p in zip((alg1, alg2), padded)]
    final_dim = math.lcm(*dims)
    copies = [final_dim // d for d in dims]
    final1 = tuple(copies[0] * p for p in padded[0])
    final2 = tuple(copies[1] * p for p in padded[1])
    return RcpBalance(s, qhat1, qhat2, copies[0], copies[1], final1, final2, final_dim)


def _segment_generators(alg, segments, u, conj: bool, dim: int) -> list[np.ndarray]:
    gens = []
    uh = u.conj().T if conj else None
    for unit in model_matrix_units(alg):
        g = _amplify(alg, segments, unit, dim)
        gens.append(u @ g @ uh if conj else g)
    return gens


def joint_commutant_dim(rep: RepPair, tol: float | None = None) -> int:
    """Dimension of the commutant of the union of both perturbed factor images."""
    gens = _segment_generators(rep.algebra1, [rep.mult1], rep.u, False, rep.dim)
    gens += _segment_generators(rep.algebra2, [rep.mult2], rep.u, True, rep.dim)
    return commutant_basis(gens, tol=tol).dimension


def irreducibility_check(rep: RepPair, tol: float | None = None) -> bool:
    """True when the perturbed pair has scalar joint commutant.

    Equivalently the commutant of the first factor meets the conjugated
    commutant of the second factor in the scalars only.
    """
    return joint_commutant_dim(rep, tol=tol) == 1


def dpi_probe(
    rep: RepPair,
    samples: int,
    seed: int,
    local_radius: float | None = None,
    tol: float | None = None,
) -> DensityStats:
    """Sample perturbations on top of rep.u and tally joint commutant dimensions.

    Global mode composes a Haar unitary with rep.u; local mode composes a
    unitary within ``local_radius`` of the identity, so the total perturbation
    stays near rep.u.  trivial_count counts the irreducible outcomes.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    n = rep.dim
    dims = []
    for i in range(samples):
        rng = sample_stream(seed, i)
        if local_radius is None:
            w = haar_unitary(n, rng)
        else:
            w = expm(local_radius * random_skew_direction(n, rng))
        dims.append(joint_commutant_dim(rep.with_unitary(w @ rep.u), tol=tol))
    center = rep.u if local_radius is not None else None
    return tally_dims(dims, seed, local_radius, center)


@dataclass(frozen=True)
class Stage:
    """One stage of the irreducible staged construction."""

    index: int
    dim: int
    u: np.ndarray
    bound: float  # operator norm distance of u from the identity
    tries: int
    irreducible: bool
    balance: RcpBalance | None
    probe_residuals: tuple[float, ...]
    probe_bounds: tuple[float, ...]

    def to_json_dict(self) -> dict:
        return {
            "stage": self.index,
            "dim": self.dim,
            "u_norm": self.bound,
            "tries": self.tries,
            "irreducible": self.irreducible,
            "balance": None if self.balance is None else self.balance.to_json_dict(),
            "probe_residuals": list(self.probe_residuals),
            "probe_bounds": list(self.probe_bounds),
        }


@dataclass(frozen=True)
class StagedBuild:
    """Result of the staged construction: stages, budgets, and cumulative perturbations."""

    epsilon: float
    seed: int
    stages: tuple[Stage, ...]
    cumulative: tuple[np.ndarray, ...]

    @property
    def total_bound(self) -> float:
        return sum(stage.bound for stage in self.stages)

    def to_json_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "seed": self.seed,
            "total_perturbation": self.total_bound,
            "stages": [stage.to_json_dict() for stage in self.stages],
        }


def staged_build(
    alg1: BlockStructure,
    alg2: BlockStructure,
    stages: list[tuple[tuple[int, ...], tuple[int, ...]]],
    epsilon: float,
    probe: list[FreeElement],
    seed: int,
    max_tries: int = 128,
    tol: float | None = None,
) -> StagedBuild:
    """Direct-sum the given representation stages, perturbing each into irreducibility.

    At stage k the budget for the new perturbation is epsilon / 2^(k+1); the
    identity is tried first, then random local unitaries whose radius halves
    after every 32 failed tries.  When the cumulative pair fails the RCP
    condition it is padded (rcp_balance) before searching.  Each stage checks,
    on the probe set, that the new evaluation moved by at most the Lipschitz
    bound times the perturbation size.  Raises SearchExhaustedError when a
    stage finds no irreducible perturbation within max_tries.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not stages:
        raise ValueError("need at least one stage")

    segs1: list[tuple[int, ...]] = []
    segs2: list[tuple[int, ...]] = []
    dim = 0
    cumulative_u = np.zeros((0, 0), dtype=complex)
    built_stages: list[Stage] = []
    cumulative: list[np.ndarray] = []

    for k, (m1, m2) in enumerate(stages, start=1):
        m1 = tuple(int(v) for v in m1)
        m2 = tuple(int(v) for v in m2)
        add1, add2 = _rep_dim(alg1, m1), _rep_dim(alg2, m2)
        if add1 != add2:
            raise ShapeMismatchError(
                f"stage {k} factor dimensions differ: {add1} vs {add2}"
            )
        segs1.append(m1)
        segs2.append(m2)
        dim += add1
        prev_u = block_diag(cumulative_u, np.eye(add1)) if dim > add1 else np.eye(add1)
        prev_u = np.asarray(prev_u, dtype=complex)

        total1 = _total_mult(segs1, alg1.num_blocks)
        total2 = _total_mult(segs2, alg2.num_blocks)
        balance = None
        pair_ok = rcp_check(alg1, total1).passes and rcp_check(alg2, total2).passes
        if not pair_ok:
            balance = rcp_balance(alg1, total1, alg2, total2)
            pad1 = tuple(f - t for f, t in zip(balance.final_mult1, total1))
            pad2 = tuple(f - t for f, t in zip(balance.final_mult2, total2))
            if any(pad1):
                segs1.append(pad1)
            if any(pad2):
                segs2.append(pad2)
            prev_u = np.asarray(
                block_diag(prev_u, np.eye(balance.final_dim - dim)), dtype=complex
            )
            dim = balance.final_dim

        budget = epsilon / 2 ** (k + 1)
        u_k, tries, best = _search_stage_unitary(
            alg1, segs1, alg2, segs2, prev_u, dim, budget, seed, k, max_tries, tol
        )
        if u_k is None:
            raise SearchExhaustedError(k, dim, best, tries)

        new_u = u_k @ prev_u
        bound = float(np.linalg.norm(u_k - np.eye(dim), 2))
        residuals, bounds = _probe_consistency(
            alg1, segs1, alg2, segs2, new_u, prev_u, probe, dim, bound
        )
        built_stages.append(
            Stage(k, dim, u_k, bound, tries, True, balance, residuals, bounds)
        )
        cumulative.append(new_u)
        cumulative_u = new_u

    return StagedBuild(epsilon, seed, tuple(built_stages), tuple(cumulative))


def _total_mult(segments, width: int) -> tuple[int, ...]:
    total = [0] * width
    for row in segments:
        for j, m in enumerate(row):
            total[j] += m
    return tuple(total)


def _search_stage_unitary(
    alg1, segs1, alg2, segs2, prev_u, dim, budget, seed, stage, max_tries, tol
):
    """Find u with ||u - I|| < budget making the cumulative pair irreducible.

    Tries the identity first, then random directions at a radius that starts
    at half the budget and halves after every 32 failures.  Returns
    (unitary or None, tries used, best commutant dimension seen).
    """

    gens1 = [_amplify(alg1, segs1, unit, dim) for unit in model_matrix_units(alg1)]
    raw2 = [_amplify(alg2, segs2, unit, dim) for unit in model_matrix_units(alg2)]

    def jc_dim(w):
        total = w @ prev_u
        th = total.conj().T
        return commutant_basis(gens1 + [total @ g @ th for g in raw2], tol=tol).dimension

    best = jc_dim(np.eye(dim))
    if best == 1:
        return np.eye(dim, dtype=complex), 0, 1
    radius = budget / 2.0
    for attempt in range(max_tries):
        rng = sample_stream_stage(seed, stage, attempt)
        w = expm(radius * random_skew_direction(dim, rng))
        d = jc_dim(w)
        best = min(best, d)
        if d == 1:
            return np.asarray(w, dtype=complex), attempt + 1, 1
        if (attempt + 1) % 32 == 0:
            radius /= 2.0
    return None, max_tries, best


def sample_stream_stage(master_seed: int, stage: int, attempt: int) -> np.random.Generator:
    """RNG stream for one search attempt, derived from (seed, stage, attempt)."""
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(stage, attempt))
    )


def _probe_consistency(alg1, segs1, alg2, segs2, new_u, prev_u, probe, dim, bound):
    """Check each probe element moved by at most its Lipschitz bound times ||u_k - I||."""
    residuals = []
    bounds = []
    for x in probe:
        after = _evaluate_segments(alg1, segs1, alg2, segs2, new_u, x, dim)
        before = _evaluate_segments(alg1, segs1, alg2, segs2, prev_u, x, dim)
        moved = float(np.linalg.norm(after - before, 2))
        allowed = lipschitz_bound(x) * bound
        if moved > allowed + 1e-9:
            raise NumericalInstabilityError(
                "probe element moved beyond its Lipschitz bound", moved - allowed
            )
        residuals.append(moved)
        bounds.append(allowed)
    return tuple(residuals), tuple(bounds)
