"""Statevector simulation, exact and truncated evolutions, phase readout."""

import numpy as np
import pytest

from gaplab import simulator as sim
from gaplab import sparse_oracle as so
from gaplab.errors import ContractError, ResourceLimitError


def test_gate_matrices_are_unitary():
    for name, matrix in sim.GATE_MATRICES.items():
        n = matrix.shape[0]
        np.testing.assert_allclose(
            matrix.conj().T @ matrix, np.eye(n), atol=1e-12, err_msg=name
        )


def test_bell_state():
    circuit = sim.QuantumCircuit(2)
    circuit.append("h", 0)
    circuit.append("cnot", 0, 1)
    out = sim.run_circuit(circuit, sim.Statevector.zero(2))
    np.testing.assert_allclose(
        out.amplitudes, [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)], atol=1e-12
    )


def test_qubit_zero_is_low_bit():
    circuit = sim.QuantumCircuit(2)
    circuit.append("x", 0)
    out = sim.run_circuit(circuit, sim.Statevector.zero(2))
    np.testing.assert_allclose(out.amplitudes, [0, 1, 0, 0], atol=1e-12)


def test_injected_gate_matrix():
    ry = np.array([[0.6, -0.8], [0.8, 0.6]])
    circuit = sim.QuantumCircuit(1)
    circuit.append("ry", 0, matrix=ry)
    out = sim.run_circuit(circuit, sim.Statevector.zero(1))
    np.testing.assert_allclose(out.amplitudes, [0.6, 0.8], atol=1e-12)


def test_random_circuit_preserves_norm():
    rng = np.random.default_rng(3)
    circuit = sim.random_circuit(6, 40, rng)
    state = sim.run_circuit(circuit, sim.Statevector.zero(6))
    assert np.linalg.norm(state.amplitudes) == pytest.approx(1.0, abs=1e-12)


def test_circuit_unitary_consistency():
    rng = np.random.default_rng(4)
    circuit = sim.random_circuit(3, 15, rng)
    u = sim.circuit_unitary(circuit)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-10)
    direct = sim.run_circuit(circuit, sim.Statevector.zero(3)).amplitudes
    np.testing.assert_allclose(u[:, 0], direct, atol=1e-10)


def test_circuit_json_round_trip():
    circuit = sim.QuantumCircuit(2)
    circuit.append("h", 0)
    circuit.append("cnot", 0, 1)
    again = sim.QuantumCircuit.from_json(circuit.to_json())
    np.testing.assert_allclose(
        sim.circuit_unitary(again), sim.circuit_unitary(circuit), atol=1e-14
    )


def test_run_circuit_accepts_plain_arrays():
    circuit = sim.QuantumCircuit(1)
    circuit.append("x", 0)
    out = sim.run_circuit(circuit, np.array([1.0, 0.0]))
    assert isinstance(out, np.ndarray)
    np.testing.assert_allclose(out, [0.0, 1.0], atol=1e-12)


def test_run_circuit_rejects_norm_violations():
    circuit = sim.QuantumCircuit(1)
    circuit.append("shrink", 0, matrix=np.array([[1.0, 0.0], [0.0, 0.5]]))
    with pytest.raises(ContractError):
        sim.run_circuit(circuit, sim.Statevector.basis(1, 1))


def test_pad_with_ancillas():
    padded = sim.pad_with_ancillas(np.array([0.0, 1.0]), 1)
    np.testing.assert_allclose(padded, [0.0, 1.0, 0.0, 0.0])


def test_measure_probability():
    state = np.array([1, 1j, 0, 0], dtype=complex) / np.sqrt(2)
    assert sim.measure_probability(state, qubit=0, outcome=1) == pytest.approx(0.5)
    assert sim.measure_probability(state, qubit=1, outcome=1) == pytest.approx(0.0)


# --- matrix exponentials ---------------------------------------------------


def _gram_8():
    return so.ata_oracle(so.path_adjacency(8))


def _gram_8_dense():
    return so.materialize(_gram_8())


def test_expm_exact_is_unitary():
    u = sim.expm_exact(_gram_8_dense(), np.pi / 4)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-12)


def test_expm_taylor_converges_to_exact():
    exact = sim.expm_exact(_gram_8_dense(), np.pi / 4)
    truncated = sim.expm_taylor(_gram_8(), np.pi / 4, order=40)
    assert np.linalg.norm(truncated - exact, ord=2) < 1e-12


def test_expm_taylor_rejects_large_arguments():
    with pytest.raises(ContractError):
        sim.expm_taylor(_gram_8(), 10.0, order=30)


def test_taylor_tail_bound_values():
    # x^{K+1}/(K+1)! * e^x remainder for the degree-K sum.
    assert sim.taylor_tail_bound(1.0, 3) == pytest.approx(
        np.exp(1.0) / 24.0, rel=1e-12
    )
    assert sim.taylor_tail_bound(np.pi, 25) < 1e-12
    assert sim.taylor_tail_bound(0.0, 5) == 0.0


def test_taylor_order_meets_target():
    for x in (0.5, 1.0, np.pi):
        for eps in (1e-3, 1e-8, 1e-12):
            order = sim.taylor_order(x, eps)
            assert sim.taylor_tail_bound(x, order) <= eps
            if order > 1:
                assert sim.taylor_tail_bound(x, order - 1) > eps


def test_one_bit_pe_eigenvector_law():
    gram = _gram_8_dense().entries.astype(float)
    lams, vecs = np.linalg.eigh(gram)
    u = sim.expm_exact(gram, np.pi / 4)
    for idx in (0, 3, 7):
        got = sim.one_bit_pe(u, vecs[:, idx])
        want = (1 + np.cos(lams[idx] * np.pi / 4)) / 2
        assert got == pytest.approx(want, abs=1e-10)


def test_one_bit_pe_rejects_nonunitary():
    with pytest.raises(ContractError):
        sim.one_bit_pe(np.diag([1.0, 0.5]), np.array([1.0, 0.0]))


def test_acceptance_probability_on_density_operator():
    from gaplab.protocols import rotation_verifier

    verifier = rotation_verifier(0.9, 0.9, 0.1)
    pure = np.array([0.0, 1.0])
    rho = np.outer(pure, pure)
    direct = sim.acceptance_probability(verifier, pure)
    mixed = sim.acceptance_probability(verifier, rho)
    assert direct == pytest.approx(0.9, abs=1e-12)
    assert mixed == pytest.approx(direct, abs=1e-12)


def test_circuit_unitary_cap():
    with pytest.raises(ResourceLimitError):
        sim.circuit_unitary(sim.QuantumCircuit(11))
