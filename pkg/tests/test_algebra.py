"""Tests for the symbolic layer: block structures, embeddings, class enumeration.

Derived expected values are computed by independent oracles kept in this file
(brute-force enumeration over bounded integer ranges, hand-built concrete
embeddings solved with plain numpy), never by the code paths under test.
"""

import itertools

import numpy as np
import pytest

from subalg.algebra import (
    BlockStructure,
    EmbeddedAlgebra,
    MultiplicityMatrix,
    SubalgebraClass,
    canonical_embedding_key,
    center_restriction,
    class_leq,
    compatible_embeddings,
    compose_multiplicities,
    enumerate_embedded_algebras,
    enumerate_subalgebra_classes,
    enumerate_unital_embeddings,
    gcd_embedding_bound,
    relative_commutant,
)
from subalg.errors import DomainError, ShapeMismatchError

M2 = BlockStructure((2,))
M3 = BlockStructure((3,))
M6 = BlockStructure((6,))
C1 = BlockStructure((1,))
C2 = BlockStructure((1, 1))
M2M2 = BlockStructure((2, 2))


def brute_force_embeddings(source, target, max_entry=None):
    """Oracle: exhaustive scan of small integer matrices for unital injective ones."""
    if max_entry is None:
        max_entry = max(target.blocks)
    rows, cols = target.num_blocks, source.num_blocks
    found = []
    for flat in itertools.product(range(max_entry + 1), repeat=rows * cols):
        entries = [flat[i * cols : (i + 1) * cols] for i in range(rows)]
        unital = all(
            sum(e * c for e, c in zip(row, source.blocks)) == n
            for row, n in zip(entries, target.blocks)
        )
        injective = all(any(entries[i][j] for i in range(rows)) for j in range(cols))
        if unital and injective:
            found.append(tuple(tuple(r) for r in entries))
    return set(found)


def numeric_commutant_dim(gens):
    """Oracle: nullspace dimension of the stacked commutator system, plain numpy."""
    n = gens[0].shape[0]
    eye = np.eye(n)
    system = np.concatenate([np.kron(a, eye) - np.kron(eye, a.T) for a in gens])
    s = np.linalg.svd(system, compute_uv=False)
    return int(np.sum(s < 1e-9))


class TestBlockStructure:
    def test_dims(self):
        b = BlockStructure((2, 3))
        assert b.algebra_dim() == 13
        assert b.center_dim() == 2
        assert b.unitary_dim() == 13
        assert b.model_dim() == 5

    def test_validation(self):
        with pytest.raises(ValueError):
            BlockStructure(())
        with pytest.raises(ValueError):
            BlockStructure((0, 1))

    def test_equality_is_order_sensitive(self):
        assert BlockStructure((1, 2)) != BlockStructure((2, 1))
        assert BlockStructure((1, 2)).isomorphic(BlockStructure((2, 1)))


class TestCompose:
    def test_identity_case(self):
        inner = MultiplicityMatrix(C2, M3, ((1, 2),))
        outer = MultiplicityMatrix.identity(M3)
        assert compose_multiplicities(outer, inner).entries == ((1, 2),)

    def test_m6_chain_matches_numeric_block_ranks(self):
        # Oracle: realize M3 -> M6 as a |-> kron(a, I2) and C2 -> M3 as diag(x, y, y);
        # the minimal central projections of the composite have ranks 2 and 4.
        p1 = np.kron(np.diag([1.0, 0.0, 0.0]), np.eye(2))
        p2 = np.kron(np.diag([0.0, 1.0, 1.0]), np.eye(2))
        assert (np.linalg.matrix_rank(p1), np.linalg.matrix_rank(p2)) == (2, 4)

        inner = MultiplicityMatrix(C2, M3, ((1, 2),))
        outer = MultiplicityMatrix(M3, M6, ((2,),))
        composed = compose_multiplicities(outer, inner)
        assert composed.entries == ((2, 4),)

    def test_unitality_preserved_on_chain(self):
        inner = MultiplicityMatrix(C2, M3, ((1, 2),))
        outer = MultiplicityMatrix(M3, M6, ((2,),))
        composed = compose_multiplicities(outer, inner)
        assert composed.unital()
        # independent dot product: [2,4] . [1,1] == 6
        assert 2 * 1 + 4 * 1 == 6

    def test_shape_mismatch(self):
        inner = MultiplicityMatrix(C2, M3, ((1, 2),))
        outer = MultiplicityMatrix(M2, M6, ((3,),))
        with pytest.raises(ShapeMismatchError):
            compose_multiplicities(outer, inner)

    def test_associativity_and_unitality_small_chains(self):
        structures = [BlockStructure(b) for b in [(1,), (1, 1), (2,), (2, 1), (3,), (2, 2), (4,)]]
        checked = 0
        for s1, s2, s3, s4 in itertools.product(structures, repeat=4):
            if not (s1.model_dim() <= s2.model_dim() <= s3.model_dim() <= s4.model_dim() <= 6):
                continue
            for c in enumerate_unital_embeddings(s1, s2):
                for b in enumerate_unital_embeddings(s2, s3):
                    for a in enumerate_unital_embeddings(s3, s4):
                        lhs = compose_multiplicities(a, compose_multiplicities(b, c))
                        rhs = compose_multiplicities(compose_multiplicities(a, b), c)
                        assert lhs.entries == rhs.entries
                        assert lhs.unital()
                        checked += 1
        assert checked > 100


class TestRelativeCommutant:
    def test_m2_inside_m4(self):
        emb = MultiplicityMatrix(M2, BlockStructure((4,)), ((2,),))
        out = relative_commutant(emb)
        assert out.blocks == (2,)
        assert out.unitary_dim() == 4
        # numeric oracle: commutant of a |-> kron(a, I2) inside M4
        gens = [np.kron(e, np.eye(2)) for e in _matrix_units(2)]
        assert numeric_commutant_dim(gens) == 4

    def test_full_center(self):
        emb = MultiplicityMatrix(C2, C2, ((1, 0), (0, 1)))
        assert relative_commutant(emb).blocks == (1, 1)

    def test_c2_mult_22_in_m4(self):
        emb = MultiplicityMatrix(C2, BlockStructure((4,)), ((2, 2),))
        assert relative_commutant(emb).blocks == (2, 2)
        gens = [np.diag([1.0, 1.0, 0.0, 0.0]), np.diag([0.0, 0.0, 1.0, 1.0])]
        assert numeric_commutant_dim(gens) == 8

    def test_requires_unital(self):
        emb = MultiplicityMatrix(C2, BlockStructure((4,)), ((1, 1),))
        with pytest.raises(DomainError):
            relative_commutant(emb)


def _matrix_units(n):
    units = []
    for p in range(n):
        for q in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[p, q] = 1.0
            units.append(e)
    return units


class TestCenterRestriction:
    def test_mixed_blocks(self):
        e = EmbeddedAlgebra(7, BlockStructure((2, 3)), (2, 1))
        out = center_restriction(e)
        assert out.structure.blocks == (1, 1)
        assert out.mult == (4, 3)
        # oracle: ranks of the realized central projections
        p1 = np.zeros((7, 7))
        p1[:4, :4] = np.eye(4)
        assert np.linalg.matrix_rank(p1) == 4

    def test_abelian_unchanged(self):
        e = EmbeddedAlgebra(5, BlockStructure((1, 1)), (2, 3))
        assert center_restriction(e).mult == (2, 3)

    def test_simple_gives_full_identity(self):
        e = EmbeddedAlgebra(6, BlockStructure((3,)), (2,))
        out = center_restriction(e)
        assert out.structure.blocks == (1,)
        assert out.mult == (6,)


class TestEnumerateEmbeddings:
    def test_unit_into_m2(self):
        embs = enumerate_unital_embeddings(C1, M2)
        assert [e.entries for e in embs] == [((2,),)]

    def test_c2_into_m2(self):
        embs = enumerate_unital_embeddings(C2, M2)
        assert [e.entries for e in embs] == [((1, 1),)]

    def test_c2_into_m2m2_matches_bruteforce(self):
        embs = enumerate_unital_embeddings(C2, M2M2)
        got = {e.entries for e in embs}
        assert got == brute_force_embeddings(C2, M2M2)
        assert ((1, 1), (1, 1)) in got
        assert ((2, 0), (0, 2)) in got
        assert ((0, 2), (2, 0)) in got
        assert ((2, 0), (1, 1)) in got

    def test_empty_when_impossible(self):
        assert enumerate_unital_embeddings(C2, C1) == []

    @pytest.mark.parametrize(
        "source,target",
        [
            (C2, BlockStructure((3,))),
            (BlockStructure((2, 1)), BlockStructure((3, 2))),
            (BlockStructure((1, 1, 1)), BlockStructure((2, 2))),
        ],
    )
    def test_agrees_with_bruteforce(self, source, target):
        got = {e.entries for e in enumerate_unital_embeddings(source, target)}
        assert got == brute_force_embeddings(source, target)

    def test_deterministic_lexicographic_order(self):
        embs = enumerate_unital_embeddings(C2, M2M2)
        flats = [tuple(v for row in e.entries for v in row) for e in embs]
        assert flats == sorted(flats)


def independent_class_count(parent):
    """Oracle: recount classes by canonicalizing with min-over-permutations."""
    keys = set()
    total = parent.structure.model_dim()

    def structures(remaining, cap):
        if remaining >= 0:
            yield ()
        for first in range(min(cap, remaining), 0, -1):
            for rest in structures(remaining - first, first):
                yield (first,) + rest

    for blocks in set(structures(total, max(parent.structure.blocks))):
        if not blocks:
            continue
        structure = BlockStructure(blocks)
        for emb in enumerate_unital_embeddings(structure, parent.structure):
            best = None
            for perm in itertools.permutations(range(len(blocks))):
                if tuple(blocks[p] for p in perm) != blocks:
                    continue
                arranged = tuple(tuple(row[p] for p in perm) for row in emb.entries)
                if best is None or arranged < best:
                    best = arranged
            keys.add((blocks, best))
    return len(keys)


class TestSubalgebraClasses:
    def test_m2_mult2_classes(self):
        b1 = EmbeddedAlgebra(4, M2, (2,))
        classes = enumerate_subalgebra_classes(b1)
        got = {c.structure.blocks for c in classes}
        assert got == {(1,), (1, 1), (2,)}
        c2 = next(c for c in classes if c.structure.blocks == (1, 1))
        assert c2.embedding.entries == ((1, 1),)

    def test_trivial_parent(self):
        b1 = EmbeddedAlgebra(3, C1, (3,))
        assert len(enumerate_subalgebra_classes(b1)) == 1

    def test_m2m2_matches_independent_recount(self):
        b1 = EmbeddedAlgebra(4, M2M2, (1, 1))
        classes = enumerate_subalgebra_classes(b1)
        assert len(classes) == independent_class_count(b1)
        got = {c.structure.blocks for c in classes}
        for expected in [(1,), (1, 1), (1, 1, 1), (1, 1, 1, 1), (2,), (2, 1), (2, 1, 1), (2, 2)]:
            assert expected in got

    def test_no_duplicate_canonical_forms(self):
        for n in range(2, 6):
            for b1 in enumerate_embedded_algebras(n):
                keys = [c.key() for c in enumerate_subalgebra_classes(b1)]
                assert len(keys) == len(set(keys))

    def test_canonical_key_sorts_columns(self):
        blocks, entries = canonical_embedding_key(
            BlockStructure((1, 1)), ((1, 0), (0, 1))
        )
        assert blocks == (1, 1)
        assert entries == ((0, 1), (1, 0))


class TestClassOrder:
    def test_unit_below_everything(self):
        b1 = EmbeddedAlgebra(4, M2, (2,))
        classes = enumerate_subalgebra_classes(b1)
        bottom = next(c for c in classes if c.is_trivial())
        assert all(class_leq(bottom, c) for c in classes)

    def test_c2_below_m2(self):
        b1 = EmbeddedAlgebra(4, M2, (2,))
        classes = {c.structure.blocks: c for c in enumerate_subalgebra_classes(b1)}
        assert class_leq(classes[(1, 1)], classes[(2,)])
        assert not class_leq(classes[(2,)], classes[(1, 1)])

    def test_different_parents_rejected(self):
        b1 = EmbeddedAlgebra(4, M2, (2,))
        b2 = EmbeddedAlgebra(4, M2M2, (1, 1))
        c1 = enumerate_subalgebra_classes(b1)[0]
        c2 = enumerate_subalgebra_classes(b2)[0]
        with pytest.raises(DomainError):
            class_leq(c1, c2)

    def test_poset_axioms_small_parents(self):
        for n in range(1, 5):
            for b1 in enumerate_embedded_algebras(n):
                classes = enumerate_subalgebra_classes(b1)
                rel = {
                    (i, j): class_leq(a, b)
                    for i, a in enumerate(classes)
                    for j, b in enumerate(classes)
                }
                for i in range(len(classes)):
                    assert rel[(i, i)]
                for (i, j), le in rel.items():
                    if le and rel[(j, i)]:
                        assert classes[i].key() == classes[j].key()
                for i, j, k in itertools.product(range(len(classes)), repeat=3):
                    if rel[(i, j)] and rel[(j, k)]:
                        assert rel[(i, k)]


class TestCompatibleEmbeddings:
    def test_unique_c2(self):
        b1 = EmbeddedAlgebra(4, M2, (2,))
        b2 = EmbeddedAlgebra(4, M2, (2,))
        cls = next(
            c for c in enumerate_subalgebra_classes(b1) if c.structure.blocks == (1, 1)
        )
        embs = compatible_embeddings(cls, b2)
        assert [e.entries for e in embs] == [((1, 1),)]

    def test_incompatible_pair_is_empty(self):
        # 3 [b1, b2] = [2, 4] has no integer solution
        b1 = EmbeddedAlgebra(6, M3, (2,))
        b2 = EmbeddedAlgebra(6, M2, (3,))
        cls = SubalgebraClass(b1, C2, MultiplicityMatrix(C2, M3, ((1, 2),)))
        assert compatible_embeddings(cls, b2) == []

    def test_unit_always_unique(self):
        b1 = EmbeddedAlgebra(4, M2, (2,))
        b2 = EmbeddedAlgebra(4, M2M2, (1, 1))
        cls = next(c for c in enumerate_subalgebra_classes(b1) if c.is_trivial())
        embs = compatible_embeddings(cls, b2)
        assert len(embs) == 1
        assert embs[0].entries == ((2,), (2,))


class TestGcdBound:
    def test_examples(self):
        assert not gcd_embedding_bound(C2, 3, 2)
        assert gcd_embedding_bound(C2, 4, 6)
        assert gcd_embedding_bound(M2, 2, 2)

    def test_follows_from_compatibility(self):
        # whenever a class of a simple B1 has a compatible embedding into a
        # simple B2, the class structure must fit inside M_gcd(k1, k2)
        for n in (4, 6):
            for b1 in enumerate_embedded_algebras(n):
                if not b1.structure.is_simple():
                    continue
                for b2 in enumerate_embedded_algebras(n):
                    if not b2.structure.is_simple():
                        continue
                    k1, k2 = b1.structure.blocks[0], b2.structure.blocks[0]
                    for cls in enumerate_subalgebra_classes(b1):
                        if compatible_embeddings(cls, b2):
                            assert gcd_embedding_bound(cls.structure, k1, k2)


class TestEmbeddedAlgebraValidation:
    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            EmbeddedAlgebra(5, M2, (2,))

    def test_zero_multiplicity_rejected(self):
        with pytest.raises(ValueError):
            EmbeddedAlgebra(2, C2, (2, 0))

    def test_enumerate_embedded_algebras_n4(self):
        algs = enumerate_embedded_algebras(4)
        as_pairs = {(a.structure.blocks, a.mult) for a in algs}
        assert ((4,), (1,)) in as_pairs
        assert ((2,), (2,)) in as_pairs
        assert ((2, 2), (1, 1)) in as_pairs
        assert ((2, 1, 1), (1, 1, 1)) in as_pairs
        assert ((1, 1, 1, 1), (1, 1, 1, 1)) in as_pairs
        # canonical: no duplicates
        assert len(algs) == len(as_pairs)
