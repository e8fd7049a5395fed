"""Exact statevector simulation and matrix exponentials.

Everything here is computed from amplitudes, never sampled: the
experiments downstream resolve probability differences of order
2^-24 and smaller, which no sampling backend could see.  Statevectors
are dense complex arrays indexed with qubit 0 as the least significant
bit; a gate on qubits (a, b) reads its local index the same way, first
listed qubit least significant.

The exponential e^{-iAt} comes in two flavors: spectral decomposition
(``expm_exact``, the ground truth) and the truncated Taylor sum
(``expm_taylor``), whose analytic tail bound is what the gapped
verifier budgets against.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import ceil, exp, lgamma, log, pi, sqrt
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError, ResourceLimitError
from .sparse_oracle import DenseMatrix, RowOracleMatrix, to_csr

MAX_QUBITS = 20
NORM_TOL = 1e-12

_INV_SQRT2 = 1.0 / sqrt(2.0)
GATE_MATRICES = {
    "H": np.array([[_INV_SQRT2, _INV_SQRT2], [_INV_SQRT2, -_INV_SQRT2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * pi / 4)]], dtype=complex),
    # Local index: first listed qubit (the control) is the low bit.
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
    ),
}
GATE_ARITY = {"H": 1, "X": 1, "T": 1, "CNOT": 2}


@dataclass(frozen=True)
class Gate:
    """One circuit element: a named gate or an injected dense unitary."""

    name: str
    qubits: tuple[int, ...]
    matrix: np.ndarray | None = None

    def resolved_matrix(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        return GATE_MATRICES[self.name]


@dataclass
class QuantumCircuit:
    """Ordered gate list on a fixed qubit count."""

    num_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ResourceLimitError(
                f"qubit count {self.num_qubits} outside [1, {MAX_QUBITS}]"
            )
        for g in self.gates:
            self._check_gate(g)

    def _check_gate(self, g: Gate) -> None:
        if len(set(g.qubits)) != len(g.qubits):
            raise ValueError(f"gate {g.name} repeats a qubit: {g.qubits}")
        for q in g.qubits:
            if not 0 <= q < self.num_qubits:
                raise ValueError(f"gate {g.name} touches qubit {q} of {self.num_qubits}")
        if g.matrix is None:
            if g.name not in GATE_MATRICES:
                raise ValueError(f"unknown gate {g.name!r} without an injected matrix")
            if len(g.qubits) != GATE_ARITY[g.name]:
                raise ValueError(f"gate {g.name} takes {GATE_ARITY[g.name]} qubits")
        else:
            want = 2 ** len(g.qubits)
            if g.matrix.shape != (want, want):
                raise ValueError(
                    f"injected matrix shape {g.matrix.shape} does not fit "
                    f"{len(g.qubits)} qubits"
                )
            if len(g.qubits) > 2:
                raise ValueError("injected unitaries are limited to 1 or 2 qubits")

    @property
    def gate_count(self) -> int:
        return len(self.gates)

    def append(self, name: str, *qubits: int, matrix: np.ndarray | None = None) -> None:
        g = Gate(name.upper(), tuple(qubits), matrix)
        self._check_gate(g)
        self.gates.append(g)

    def to_dict(self) -> dict:
        out = []
        for g in self.gates:
            if g.matrix is None:
                out.append([g.name, *g.qubits])
            else:
                out.append(
                    [
                        g.name,
                        list(g.qubits),
                        [[[float(v.real), float(v.imag)] for v in row] for row in g.matrix],
                    ]
                )
        return {"qubits": self.num_qubits, "gates": out}

    @classmethod
    def from_dict(cls, spec: dict) -> "QuantumCircuit":
        circuit = cls(num_qubits=int(spec["qubits"]))
        for entry in spec["gates"]:
            name = entry[0].upper()
            if name in GATE_MATRICES:
                circuit.append(name, *(int(q) for q in entry[1:]))
            else:
                qubits = [int(q) for q in entry[1]]
                mat = np.array(
                    [[complex(re, im) for re, im in row] for row in entry[2]]
                )
                circuit.append(name, *qubits, matrix=mat)
        return circuit

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "QuantumCircuit":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Statevector:
    """Pure state on num_qubits qubits, qubit 0 least significant."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.num_qubits,):
            raise ValueError(
                f"amplitude length {amps.shape} does not match {self.num_qubits} qubits"
            )
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, num_qubits: int) -> "Statevector":
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(num_qubits, amps)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "Statevector":
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(num_qubits, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _as_amplitudes(state) -> np.ndarray:
    return np.asarray(getattr(state, "amplitudes", state), dtype=complex)


def _apply_to_columns(
    cols: np.ndarray, num_qubits: int, matrix: np.ndarray, qubits: Sequence[int]
) -> np.ndarray:
    """Apply a local unitary to every column of a (2^n, batch) array."""
    j = len(qubits)
    batch = cols.shape[1]
    tensor = cols.reshape([2] * num_qubits + [batch])
    g = matrix.reshape([2] * (2 * j))
    # Gate axes after reshape: outputs MSB..LSB, then inputs MSB..LSB.
    # State axis of qubit q is num_qubits - 1 - q.
    in_axes = list(range(j, 2 * j))
    state_axes = [num_qubits - 1 - q for q in reversed(qubits)]
    moved = np.tensordot(g, tensor, axes=(in_axes, state_axes))
    moved = np.moveaxis(moved, list(range(j)), state_axes)
    return moved.reshape(2**num_qubits, batch)


def run_circuit(circuit: QuantumCircuit, state: Statevector | np.ndarray | None = None):
    """Run the circuit on a state (|0...0> by default).

    Returns the same kind it was given: Statevector in, Statevector
    out; raw array in, raw array out.
    """
    wrap = state is None or isinstance(state, Statevector)
    if state is None:
        amps = Statevector.zero(circuit.num_qubits).amplitudes.copy()
    else:
        amps = _as_amplitudes(state).copy()
    if amps.shape != (2**circuit.num_qubits,):
        raise ContractError(
            f"state dimension {amps.shape} does not match {circuit.num_qubits} qubits"
        )
    norm_in = np.linalg.norm(amps)
    cols = amps.reshape(-1, 1)
    for g in circuit.gates:
        cols = _apply_to_columns(cols, circuit.num_qubits, g.resolved_matrix(), g.qubits)
    out = cols.reshape(-1)
    if abs(np.linalg.norm(out) - norm_in) > NORM_TOL * max(1.0, norm_in):
        raise ContractError("circuit application did not preserve the norm")
    return Statevector(circuit.num_qubits, out) if wrap else out


def circuit_unitary(circuit: QuantumCircuit, max_qubits: int = 10) -> np.ndarray:
    """Dense unitary of the whole circuit (small circuits only)."""
    if circuit.num_qubits > max_qubits:
        raise ResourceLimitError(
            f"dense circuit unitary capped at {max_qubits} qubits"
        )
    dim = 2**circuit.num_qubits
    cols = np.eye(dim, dtype=complex)
    for g in circuit.gates:
        cols = _apply_to_columns(cols, circuit.num_qubits, g.resolved_matrix(), g.qubits)
    return cols


def random_circuit(
    num_qubits: int, gate_count: int, rng: np.random.Generator
) -> QuantumCircuit:
    """Uniformly random circuit over the fixed gate set (for tests)."""
    circuit = QuantumCircuit(num_qubits)
    names = sorted(GATE_MATRICES)
    for _ in range(gate_count):
        name = names[rng.integers(len(names))]
        if GATE_ARITY[name] == 1 or num_qubits == 1:
            name = name if GATE_ARITY[name] == 1 else "H"
            circuit.append(name, int(rng.integers(num_qubits)))
        else:
            a, b = rng.choice(num_qubits, size=2, replace=False)
            circuit.append(name, int(a), int(b))
    return circuit


# ---------------------------------------------------------------------------
# matrix exponentials


def _hermitian_dense(matrix, tol: float = 1e-12) -> np.ndarray:
    arr = matrix.entries if isinstance(matrix, DenseMatrix) else np.asarray(matrix)
    arr = arr.astype(complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected square matrix, got {arr.shape}")
    dev = float(np.max(np.abs(arr - arr.conj().T))) if arr.size else 0.0
    if dev > tol:
        raise ContractError(f"matrix not Hermitian: deviation {dev:.3e}")
    return arr


def expm_exact(matrix, evo_time: float) -> np.ndarray:
    """e^{-i A t} by spectral decomposition of Hermitian A."""
    arr = _hermitian_dense(matrix)
    w, v = np.linalg.eigh(arr)
    return (v * np.exp(-1j * w * evo_time)) @ v.conj().T


def taylor_tail_bound(x: float, order: int) -> float:
    """Analytic remainder bound x^{K+1}/(K+1)! * e^x for the degree-K sum."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0.0:
        return 0.0
    return exp((order + 1) * log(x) - lgamma(order + 2) + x)


def taylor_order(x: float, target_error: float, max_order: int = 1000) -> int:
    """Smallest truncation order whose tail bound meets the target."""
    if target_error <= 0:
        raise ValueError("target error must be positive")
    for k in range(1, max_order + 1):
        if taylor_tail_bound(x, k) <= target_error:
            return k
    raise ValueError(f"no order up to {max_order} reaches error {target_error}")


@dataclass(frozen=True)
class EvolutionParams:
    """Evolution time, truncation order, and the error it budgets for."""

    evo_time: float
    taylor_order: int
    target_error: float

    def __post_init__(self) -> None:
        if self.evo_time <= 0:
            raise ValueError("evolution time must be positive")
        if self.target_error <= 0:
            raise ValueError("target error must be positive")


def _norm_upper_bound(matrix) -> float:
    """Upper bound on the spectral norm: sqrt of (1-norm times inf-norm)."""
    if isinstance(matrix, RowOracleMatrix):
        a = to_csr(matrix)
        abs_a = abs(a)
        one = abs_a.sum(axis=0).max()
        inf = abs_a.sum(axis=1).max()
        return float(sqrt(one * inf))
    arr = matrix.entries if isinstance(matrix, DenseMatrix) else np.asarray(matrix)
    abs_arr = np.abs(arr)
    return float(sqrt(abs_arr.sum(axis=0).max() * abs_arr.sum(axis=1).max()))


def expm_taylor(matrix, evo_time: float, order: int) -> np.ndarray:
    """Degree-``order`` Taylor sum for e^{-i A t}, by repeated sparse application.

    Requires ||A|| * t <= pi (checked through a cheap norm bound): the
    tail estimate, and the whole phase-reading scheme downstream, live
    on that range.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    if evo_time < 0:
        raise ValueError("evolution time must be nonnegative")
    if _norm_upper_bound(matrix) * evo_time > pi * (1 + 1e-9):
        raise ContractError("||A|| * evo_time exceeds pi")
    if isinstance(matrix, RowOracleMatrix):
        a = to_csr(matrix)
    else:
        a = matrix.entries if isinstance(matrix, DenseMatrix) else np.asarray(matrix)
    n = a.shape[0]
    total = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for j in range(1, order + 1):
        term = (a @ term) * (-1j * evo_time / j)
        total = total + term
    return total


# ---------------------------------------------------------------------------
# phase-reading primitives


def one_bit_pe(u: np.ndarray, psi, unitarity_tol: float = 1e-8) -> float:
    """Outcome-0 probability of the Hadamard, controlled-U, Hadamard circuit.

    For an eigenstate with U psi = e^{-i theta} psi this is
    (1 + cos theta)/2; in general it is affine in the eigenbasis
    weights.  Computed directly as ||(I + U) psi||^2 / 4.

    ``unitarity_tol`` exists because truncated-Taylor operators are
    unitary only up to their tail bound; callers that know their tail
    pass it explicitly.
    """
    u = np.asarray(u, dtype=complex)
    vec = _as_amplitudes(psi)
    if u.shape != (len(vec), len(vec)):
        raise ContractError(f"operator shape {u.shape} does not fit state of {len(vec)}")
    dev = float(np.max(np.abs(u.conj().T @ u - np.eye(len(vec)))))
    if dev > unitarity_tol:
        raise ContractError(f"operator not unitary within {unitarity_tol:.1e} (dev {dev:.3e})")
    if abs(np.linalg.norm(vec) - 1.0) > 1e-9:
        raise ContractError("state is not normalized")
    return float(np.linalg.norm(vec + u @ vec) ** 2 / 4.0)


def measure_probability(state, qubit: int, outcome: int) -> float:
    """Probability that one qubit reads the given value."""
    amps = _as_amplitudes(state)
    n = amps.shape[0]
    idx = np.arange(n)
    mask = ((idx >> qubit) & 1) == outcome
    return float(np.sum(np.abs(amps[mask]) ** 2))


def pad_with_ancillas(witness, ancilla_k: int) -> np.ndarray:
    """witness (x) |0^k>, ancillas as the high qubits."""
    vec = _as_amplitudes(witness)
    out = np.zeros(len(vec) * 2**ancilla_k, dtype=complex)
    out[: len(vec)] = vec
    return out


def acceptance_probability(verifier, witness) -> float:
    """Exact probability the verifier's output qubit reads 1.

    ``witness`` may be a Statevector, a raw amplitude vector on the
    witness qubits, or a density operator (square array); acceptance is
    linear in the density operator, so mixed witnesses average their
    eigenvector acceptances.
    """
    m = verifier.witness_qubits
    dim = 2**m
    raw = np.asarray(getattr(witness, "amplitudes", witness), dtype=complex)
    if raw.ndim == 2:
        if raw.shape != (dim, dim):
            raise ContractError(f"density operator shape {raw.shape}, want {(dim, dim)}")
        if np.max(np.abs(raw - raw.conj().T)) > 1e-10 or abs(np.trace(raw).real - 1) > 1e-9:
            raise ContractError("density operator must be Hermitian with unit trace")
        probs, vecs = np.linalg.eigh(raw)
        return float(
            sum(
                p * acceptance_probability(verifier, vecs[:, i])
                for i, p in enumerate(probs)
                if p > 1e-15
            )
        )
    if raw.shape != (dim,):
        raise ContractError(f"witness length {raw.shape} does not fit {m} qubits")
    if abs(np.linalg.norm(raw) - 1.0) > 1e-9:
        raise ContractError("witness is not normalized")
    padded = pad_with_ancillas(raw, verifier.ancilla_k)
    final = run_circuit(verifier.circuit, padded)
    return measure_probability(final, verifier.output_qubit, 1)
