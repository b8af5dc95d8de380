"""Builder fragments against independent oracles: layouts, AND wiring,
sub-blocks, fan-out trees, the Fourier transform, banding, and full chains."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmac import dense, ir
from qmac.builder import (
    ClassicalLayout,
    MacInput,
    QmacParams,
    aqft_band,
    build_approx_qft_dagger,
    build_banded_qft_dagger,
    build_chain,
    build_fanout,
    build_m_block,
    build_q_block,
    build_qft,
    build_qft_dagger,
    classical_and_layer,
    fanout_depth,
    gate_sites,
    num_gate_sites,
    qubit_layout,
    site_qubits,
    to_signed,
    to_unsigned,
)
from qmac.errors import InvalidInputError
from qmac.ir import GateKind


def dft_matrix(k: int) -> np.ndarray:
    dim = 1 << k
    omega = np.exp(2j * np.pi / dim)
    return np.array([[omega ** (s * t) for s in range(dim)] for t in range(dim)]) / math.sqrt(dim)


class TestParamsAndInput:
    def test_param_validation(self):
        with pytest.raises(InvalidInputError):
            QmacParams(k=0)
        with pytest.raises(InvalidInputError):
            QmacParams(k=2, n=-1)
        with pytest.raises(InvalidInputError):
            QmacParams(k=2, variant="approx")  # epsilon missing
        with pytest.raises(InvalidInputError):
            QmacParams(k=2, variant="exact", epsilon=0.5)

    def test_input_range(self):
        MacInput(z=7, pairs=((7, 7),)).validate(3)
        with pytest.raises(InvalidInputError):
            MacInput(z=8).validate(3)
        with pytest.raises(InvalidInputError):
            MacInput(z=0, pairs=((8, 0),)).validate(3)

    @given(st.integers(1, 16), st.data())
    @settings(max_examples=100, deadline=None)
    def test_twos_complement_round_trip(self, k, data):
        value = data.draw(st.integers(-(1 << (k - 1)), (1 << (k - 1)) - 1))
        assert to_signed(to_unsigned(value, k), k) == value

    def test_twos_complement_range_checks(self):
        with pytest.raises(InvalidInputError):
            to_unsigned(8, 4)
        with pytest.raises(InvalidInputError):
            to_signed(16, 4)


class TestLayout:
    @pytest.mark.parametrize("k", range(1, 11))
    def test_group_sizes_and_total(self, k):
        layout = qubit_layout(k)
        seen = set()
        for j in range(1, k + 1):
            group = layout.group(j)
            assert len(group) == j * (j + 1) // 2
            assert not seen & set(group)
            seen |= set(group)
        assert len(seen) == layout.num_qubits == k * (k + 1) * (k + 2) // 6

    def test_site_enumeration_is_canonical(self, k=4):
        sites = gate_sites(k)
        assert len(sites) == num_gate_sites(k)
        assert list(sites) == sorted(sites, key=lambda s: (s.j, s.l, s.slot))
        for s in sites:
            assert 1 <= s.slot <= s.l <= s.j <= k
            assert s.x_bit == s.j - s.l + 1
            assert 1 <= s.exponent <= s.l

    def test_each_site_gets_its_own_copy(self, k=5):
        assigned = site_qubits(k)
        assert len(set(assigned)) == len(assigned) == num_gate_sites(k)
        layout = qubit_layout(k)
        for site, q in zip(gate_sites(k), assigned):
            assert q in layout.group(site.j)


class TestAndLayer:
    def _scratch_after(self, k, x, y):
        classical = ClassicalLayout(k=k, steps=1)
        circuit = ir.append_layer(
            ir.empty(0, classical.num_bits), classical_and_layer(0, classical)
        )
        from qmac.builder import initial_classical_bits

        bits = initial_classical_bits(k, ((x, y),), classical)
        state = dense.simulate(circuit, dense.DenseState.basis(0, classical.num_bits,
                                                               classical_bits=bits))
        return state.classical_bits[: classical.num_sites]

    def test_zero_y_inerts_everything(self):
        assert not self._scratch_after(3, 7, 0).any()

    def test_all_ones(self):
        assert self._scratch_after(3, 7, 7).all()

    def test_specific_bits(self):
        # y=0b101, x=0b010: AND(y_1, x_2)=1 at site (2,1,1); AND(y_2, x_2)=0 at (3,2,2)
        scratch = self._scratch_after(3, 0b010, 0b101)
        sites = list(gate_sites(3))
        assert scratch[sites.index((2, 1, 1))] == 1
        assert scratch[sites.index((3, 2, 2))] == 0

    def test_one_and_per_site(self):
        layer = classical_and_layer(0, ClassicalLayout(k=4, steps=1))
        assert len(layer) == num_gate_sites(4)
        assert all(op.kind is GateKind.CLASSICAL_AND for op in layer)


class TestQBlock:
    def _action(self, l, controls):
        circuit = build_q_block(
            l, tuple(range(l)), tuple(range(l)), num_qubits=l, num_classical=l
        )
        state = dense.DenseState.basis(l, l, value=(1 << l) - 1,
                                       classical_bits=list(controls))
        return dense.simulate(circuit, state).amplitudes[(1 << l) - 1]

    def test_smallest_block_is_z_like(self):
        # exponent 1 on |1>: phase e^{i*pi} = -1
        assert self._action(1, (1,)) == pytest.approx(-1.0)

    def test_partial_controls(self):
        # size 2, control bits (1, 0): exponent-2 gate fires, exponent-1 skipped
        assert self._action(2, (1, 0)) == pytest.approx(np.exp(2j * np.pi / 4))

    def test_all_controls_zero_is_identity(self):
        assert self._action(3, (0, 0, 0)) == pytest.approx(1.0)

    def test_size_mismatch(self):
        with pytest.raises(InvalidInputError):
            build_q_block(2, (0,), (0, 1), num_qubits=2, num_classical=2)


class TestFanout:
    def test_single_member_group_has_no_gates(self):
        assert build_fanout(1).depth == 0

    @pytest.mark.parametrize("k", range(1, 9))
    def test_depth_formula(self, k):
        expected = math.ceil(math.log2(k * (k + 1) / 2)) if k > 1 else 0
        assert build_fanout(k).depth == expected == fanout_depth(k)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_forward_inverse_identity(self, k):
        fwd, inv = build_fanout(k), build_fanout(k, inverse=True)
        dim = 1 << qubit_layout(k).num_qubits
        for circuit in (ir.compose(fwd, inv), ir.compose(inv, fwd)):
            assert np.allclose(dense.unitary_of(circuit), np.eye(dim), atol=1e-9)

    def test_same_order_twice_is_not_identity(self):
        # the doubling tree reuses copies as controls, so replaying the same
        # layer order does not undo it; this is why the inverse is reversed
        k = 3
        twice = ir.compose(build_fanout(k), build_fanout(k))
        dim = 1 << qubit_layout(k).num_qubits
        assert not np.allclose(dense.unitary_of(twice), np.eye(dim), atol=1e-9)

    def test_inverse_has_same_gates_and_depth(self):
        fwd, inv = build_fanout(4), build_fanout(4, inverse=True)
        assert fwd.depth == inv.depth
        flat = lambda c: sorted(str(op) for layer in c.layers for op in layer.ops)
        assert flat(fwd) == flat(inv)

    def test_copies_all_carry_source_value(self):
        k = 3
        layout = qubit_layout(k)
        state = dense.DenseState.basis(layout.num_qubits, 0, value=0b101)
        out = dense.simulate(build_fanout(k), state).amplitudes
        index = int(np.argmax(np.abs(out)))
        for j in range(1, k + 1):
            source_bit = (0b101 >> (k - j)) & 1
            for q in layout.group(j):
                assert (index >> q) & 1 == source_bit


class TestQft:
    def test_k1_is_single_hadamard(self):
        circuit = build_qft(1)
        assert circuit.depth == 1
        (op,) = circuit.layers[0].ops
        assert op.kind is GateKind.HADAMARD

    def test_matches_dft_formula_k3_z5(self):
        state = dense.simulate(build_qft(3), dense.DenseState.basis(3, value=5))
        for t in range(8):
            expected = np.exp(2j * np.pi * 5 * t / 8) / math.sqrt(8)
            assert state.amplitudes[t] == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_matrix_equals_dft(self, k):
        assert np.allclose(dense.unitary_of(build_qft(k)), dft_matrix(k), atol=1e-9)

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_inverse_undoes_forward(self, k):
        product = dense.unitary_of(build_qft(k)) @ dense.unitary_of(build_qft_dagger(k))
        assert np.allclose(product, np.eye(1 << k), atol=1e-9)

    @pytest.mark.parametrize("k", range(1, 9))
    def test_depth_grows_linearly(self, k):
        assert build_qft(k).depth == (1 if k == 1 else 2 * k)
        assert build_qft_dagger(k).depth == (1 if k == 1 else 2 * k)


class TestBandedInverse:
    def test_wide_band_is_exact(self):
        # band >= k drops nothing
        assert build_approx_qft_dagger(6, 1e-2) == build_qft_dagger(6)
        assert aqft_band(6, 1e-2) >= 6

    @pytest.mark.parametrize("k,eps", [(6, 1e-2), (8, 1e-2), (8, 1e-4)])
    def test_distance_within_epsilon(self, k, eps):
        exact = dense.unitary_of(build_qft_dagger(k))
        banded = dense.unitary_of(build_approx_qft_dagger(k, eps))
        assert np.linalg.norm(exact - banded, 2) <= eps

    def test_forced_band_distance_monotone(self, k=7):
        exact = dense.unitary_of(build_qft_dagger(k))
        distances = []
        for band in range(2, k + 1):
            banded = dense.unitary_of(build_banded_qft_dagger(k, band))
            distances.append(np.linalg.norm(exact - banded, 2))
        assert distances[-1] == pytest.approx(0.0, abs=1e-12)  # band == k keeps all
        for wide, narrow in zip(distances[1:], distances):
            assert wide <= narrow + 1e-12
        # dropped-angle sum bounds the distance
        for band, distance in zip(range(2, k + 1), distances):
            bound = sum(
                2 * np.pi / (1 << m)
                for j in range(1, k + 1)
                for m in range(band + 1, j + 1)
            )
            assert distance <= bound + 1e-12

    @pytest.mark.parametrize("k", [4, 8, 16, 32, 64])
    def test_gate_count_tracks_band(self, k, eps=1e-2):
        count = ir.metrics(build_approx_qft_dagger(k, eps)).quantum_gate_count
        bound = k * (math.log2(k) + math.log2(1 / eps) + 5)
        assert count <= bound


class TestMacBlock:
    @pytest.mark.parametrize("k", range(1, 9))
    def test_depth_always_two(self, k):
        assert build_m_block(0, ClassicalLayout(k=k, steps=1)).depth == 2

    @pytest.mark.parametrize("k", range(1, 11))
    def test_gate_count_closed_form(self, k):
        m = ir.metrics(build_m_block(0, ClassicalLayout(k=k, steps=1)))
        assert m.quantum_gate_count == k * (k + 1) * (k + 2) // 6

    def test_x_zero_is_identity(self):
        params = QmacParams(k=2, n=1)
        plan = build_chain(params, MacInput(z=3, pairs=((0, 3),)))
        state = dense.simulate(plan.circuit, dense.initial_state(plan))
        assert dense.measure_register(state, plan.layout)[0] == (3, pytest.approx(1.0))


class TestChain:
    def test_no_steps_returns_z(self):
        plan = build_chain(QmacParams(k=3, n=0), MacInput(z=6))
        state = dense.simulate(plan.circuit, dense.initial_state(plan))
        assert dense.measure_register(state, plan.layout)[0] == (6, pytest.approx(1.0))

    def test_single_step(self):
        plan = build_chain(QmacParams(k=3, n=1), MacInput(z=1, pairs=((3, 2),)))
        state = dense.simulate(plan.circuit, dense.initial_state(plan))
        assert dense.measure_register(state, plan.layout)[0] == (7, pytest.approx(1.0))

    def test_wraparound(self):
        plan = build_chain(QmacParams(k=3, n=1), MacInput(z=7, pairs=((3, 3),)))
        state = dense.simulate(plan.circuit, dense.initial_state(plan))
        assert dense.measure_register(state, plan.layout)[0] == (0, pytest.approx(1.0))

    def test_input_reduction_is_callers_job(self):
        with pytest.raises(InvalidInputError):
            build_chain(QmacParams(k=3, n=0), MacInput(z=11))

    def test_pair_count_must_match_n(self):
        with pytest.raises(InvalidInputError):
            build_chain(QmacParams(k=3, n=2), MacInput(z=0, pairs=((1, 1),)))

    def test_builder_is_pure(self):
        params = QmacParams(k=3, n=2)
        inp = MacInput(z=2, pairs=((1, 5), (7, 3)))
        a, b = build_chain(params, inp), build_chain(params, inp)
        assert ir.dumps(a.circuit) == ir.dumps(b.circuit)
        assert a.initial_classical_bits == b.initial_classical_bits

    def test_approx_chain_structure(self):
        plan = build_chain(QmacParams(k=3, n=1, variant="approx", epsilon=1e-3),
                           MacInput(z=1, pairs=((3, 2),)))
        stages = dict(plan.stage_depths)
        assert stages["hadamard_init"] == 1
        assert stages["mac_blocks"] == 4  # n + 1 blocks, 2 layers each
        state = dense.simulate(plan.circuit, dense.initial_state(plan))
        assert dense.measure_register(state, plan.layout)[0] == (7, pytest.approx(1.0))

    def test_signed_values_travel_as_residues(self):
        from qmac.builder import normalize_input

        inp = normalize_input(4, -3, [(-2, 2)], signed=True)
        assert inp.z == 13 and inp.pairs == ((14, 2),)
        plan = build_chain(QmacParams(k=4, n=1), inp)
        state = dense.simulate(plan.circuit, dense.initial_state(plan))
        value, _ = dense.measure_register(state, plan.layout)[0]
        assert to_signed(value, 4) == -7  # -3 + (-2 * 2)

    def test_normalize_reduces_unsigned_mod_2k(self):
        from qmac.builder import normalize_input

        inp = normalize_input(3, 9, [(10, 18)], signed=False)
        assert inp.z == 1 and inp.pairs == ((2, 2),)
        with pytest.raises(InvalidInputError):
            normalize_input(3, -1, [], signed=False)

    def test_serialized_chain_resimulates_identically(self):
        plan = build_chain(QmacParams(k=3, n=2), MacInput(z=3, pairs=((5, 2), (7, 1))))
        reloaded = ir.loads(ir.dumps(plan.circuit))
        a = dense.simulate(plan.circuit, dense.initial_state(plan))
        b = dense.simulate(reloaded, dense.initial_state(plan))
        assert np.array_equal(a.amplitudes, b.amplitudes)
        assert np.array_equal(a.classical_bits, b.classical_bits)

    def test_forced_band_chain_matches_matrix_oracle(self):
        # swap the closing exact inverse for an aggressively banded one and
        # check the full-system distribution against the banded matrix
        # applied to the transform of the true result
        k, z, x, y, band = 4, 11, 7, 13, 2
        plan = build_chain(QmacParams(k=k, n=1), MacInput(z=z, pairs=((x, y),)))
        nq, nc = plan.layout.num_qubits, plan.classical.num_bits
        exact_dagger = build_qft_dagger(k, num_qubits=nq, num_classical=nc)
        assert plan.circuit.layers[-exact_dagger.depth:] == exact_dagger.layers
        trunk = ir.HybridCircuit(nq, nc, plan.circuit.layers[: -exact_dagger.depth])
        banded = build_banded_qft_dagger(k, band, num_qubits=nq, num_classical=nc)
        state = dense.simulate(ir.compose(trunk, banded), dense.initial_state(plan))
        dist = dict(dense.measure_register(state, plan.layout))

        result = (z + x * y) % (1 << k)
        transformed = dft_matrix(k)[:, result]
        expected = np.abs(dense.unitary_of(build_banded_qft_dagger(k, band)) @ transformed) ** 2
        for value in range(1 << k):
            assert dist.get(value, 0.0) == pytest.approx(expected[value], abs=1e-10)
        top = max(dist, key=dist.get)
        assert top == result  # approximation keeps the right mode
