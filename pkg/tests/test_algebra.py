"""Multi-matrix algebras, trace weights, commutants, structure recovery."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vne.algebra import (
    TraceWeight,
    algebra_from_blocks,
    ambient_trace,
    commutant,
    diagonal_subalgebra,
    full_matrix_algebra,
    generated_algebra,
    normalized_trace,
    scalar_subalgebra,
    tensor_algebra,
    tensor_left_subalgebra,
    tensor_right_subalgebra,
    wedderburn_decompose,
)
from vne.linalg import dagger, frob, kron


class TestConstructors:
    def test_full_matrix_algebra(self):
        a = full_matrix_algebra(3).validate()
        assert a.dim == 3 and a.blocks == ((3, 1),)
        assert a.dim_linear == 9

    def test_blocks_partition(self):
        a = algebra_from_blocks([(2, 1), (1, 2)]).validate()
        assert a.dim == 4
        assert a.dim_linear == 5

    def test_scalar_subalgebra(self):
        a = scalar_subalgebra(4).validate()
        assert a.blocks == ((1, 4),)
        assert a.contains(np.eye(4))
        assert not a.contains(np.diag([1.0, 2.0, 3.0, 4.0]))

    def test_diagonal_subalgebra(self):
        a = diagonal_subalgebra(3).validate()
        assert a.blocks == ((1, 1),) * 3
        assert a.contains(np.diag([1.0, 2.0, 3.0]))
        x = np.zeros((3, 3))
        x[0, 1] = 1.0
        assert not a.contains(x)

    def test_tensor_left_contains_products(self):
        a = tensor_left_subalgebra(2, 3).validate()
        assert a.blocks == ((2, 3),)
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert a.contains(kron(m, np.eye(3)))
        assert not a.contains(kron(np.eye(2), np.diag([1.0, 2.0, 3.0])))

    def test_tensor_right_contains_products(self):
        a = tensor_right_subalgebra(2, 3).validate()
        assert a.blocks == ((3, 2),)
        m = np.diag([1.0, 2.0, 3.0])
        assert a.contains(kron(np.eye(2), m))

    def test_tensor_algebra_product(self):
        a = tensor_algebra(full_matrix_algebra(2), full_matrix_algebra(2)).validate()
        assert a.dim == 4 and a.blocks == ((4, 1),)

    def test_rejects_bad_blocks(self):
        with pytest.raises(ValueError):
            algebra_from_blocks([(0, 1)])


class TestBlockStructure:
    def test_embed_component_roundtrip(self):
        a = algebra_from_blocks([(2, 2), (1, 3)])
        rng = np.random.default_rng(5)
        comps = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)),
                 rng.standard_normal((1, 1)) + 0j]
        x = a.embed(comps)
        back = a.block_components(x)
        for c, b in zip(comps, back):
            assert frob(c - b) < 1e-12

    def test_matrix_units_multiply(self):
        a = algebra_from_blocks([(2, 2)])
        u01 = a.matrix_unit(0, 0, 1)
        u10 = a.matrix_unit(0, 1, 0)
        u00 = a.matrix_unit(0, 0, 0)
        assert frob(u01 @ u10 - u00) < 1e-12

    def test_minimal_projection_rank(self):
        a = algebra_from_blocks([(2, 3)])
        p = a.minimal_projection(0)
        assert abs(np.trace(p).real - 3.0) < 1e-12
        assert frob(p @ p - p) < 1e-12

    def test_central_projections_sum_to_identity(self):
        a = algebra_from_blocks([(2, 1), (1, 2)])
        total = sum(a.central_projection(k) for k in range(len(a.blocks)))
        assert frob(total - np.eye(a.dim)) < 1e-12

    @given(seed=st.integers(0, 10 ** 6))
    @settings(max_examples=25, deadline=None)
    def test_projection_idempotent(self, seed):
        a = algebra_from_blocks([(2, 1), (1, 1)])
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        once = a.project(x)
        assert frob(a.project(once) - once) < 1e-10
        assert a.contains(once)


class TestTraceWeight:
    def test_normalized_total(self):
        tau = normalized_trace(full_matrix_algebra(4))
        assert abs(tau.total - 1.0) < 1e-14
        assert tau.is_normalized

    def test_unnormalized_is_matrix_trace(self):
        a = full_matrix_algebra(3)
        tr = ambient_trace(a)
        x = np.diag([1.0, 2.0, 3.0])
        assert abs(tr.value(x) - 6.0) < 1e-14
        assert abs(tr.total - 3.0) < 1e-14

    def test_weights_and_multiplicity(self):
        a = algebra_from_blocks([(2, 3)])
        tr = ambient_trace(a)
        # ambient trace of a member counts each block m times
        assert abs(tr.value(a.embed([np.eye(2)])) - 6.0) < 1e-14

    def test_tracial_property(self):
        a = full_matrix_algebra(3)
        tau = normalized_trace(a)
        rng = np.random.default_rng(0)
        x, y = a.random_hermitian(rng), a.random_hermitian(rng)
        assert abs(tau.value(x @ y) - tau.value(y @ x)) < 1e-12

    def test_rejects_nonpositive_weight(self):
        with pytest.raises(ValueError, match="positive"):
            TraceWeight(full_matrix_algebra(2), (0.0,))

    def test_restriction_to_tensor_factor(self):
        a = full_matrix_algebra(4)
        tau = normalized_trace(a)
        sub = tensor_left_subalgebra(2, 2)
        tau_b = tau.restricted_to(sub)
        # minimal projection of M_2 (x) 1 has ambient trace 2, tau-value 1/2
        assert abs(tau_b.weights[0] - 0.5) < 1e-14
        assert abs(tau_b.total - 1.0) < 1e-14

    def test_functional_density_reproduces_functional(self):
        a = algebra_from_blocks([(2, 1), (1, 2)])
        tau = normalized_trace(a)
        rng = np.random.default_rng(1)
        target = a.random_hermitian(rng)
        functional = lambda x: tau.value(target @ x)
        rho = tau.functional_density(functional)
        assert frob(rho - target) < 1e-10


class TestCommutant:
    def test_commutant_of_tensor_factor(self):
        gens = [kron(m, np.eye(3)) for m in (np.diag([1.0, -1.0]),
                                             np.array([[0.0, 1.0], [1.0, 0.0]]))]
        c = commutant(gens, 6)
        assert sorted(c.blocks) == [(3, 2)]
        assert c.contains(kron(np.eye(2), np.diag([1.0, 2.0, 3.0])))

    def test_commutant_of_full_algebra_is_scalars(self):
        a = full_matrix_algebra(3)
        c = commutant(list(a.basis), 3)
        assert c.blocks == ((1, 3),)

    def test_commutant_of_scalars_is_everything(self):
        c = commutant([np.eye(4)], 4)
        assert c.blocks == ((4, 1),)


class TestWedderburn:
    def test_recovers_block_structure(self):
        a = algebra_from_blocks([(2, 1), (1, 2)])
        rng = np.random.default_rng(7)
        u = np.linalg.qr(rng.standard_normal((4, 4))
                         + 1j * rng.standard_normal((4, 4)))[0]
        span = [u @ b @ dagger(u) for b in a.basis]
        w = wedderburn_decompose(span)
        assert sorted(w.blocks) == sorted(a.blocks)
        w.validate()

    def test_generated_algebra_closes_products(self):
        x = np.zeros((3, 3))
        x[0, 1] = 1.0
        g = generated_algebra([x + x.T], 3)
        # the generator has distinct eigenvalues on its support: diagonals
        # of the 2x2 corner plus the untouched third direction
        assert g.contains(np.eye(3))
        assert g.dim_linear == 3

    def test_generated_full_algebra(self):
        shift = np.roll(np.eye(3), 1, axis=0)
        sym = shift + shift.T
        diag = np.diag([1.0, 2.0, 3.0])
        g = generated_algebra([sym, diag], 3)
        assert g.blocks == ((3, 1),)
