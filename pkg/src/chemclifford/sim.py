"""Dense statevector simulation, energies, adjoint gradients and exact spectra.

Amplitude index ``b`` is little-endian: bit ``q`` of ``b`` is qubit ``q``.
Rotations are ``R(theta) = exp(-i theta/2 P)``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ._accel import USE_NUMBA, kernel, select
from .clifford import single_qubit_cliffords
from .hea import Gate, HeaTemplate
from .pauli import PauliSum

MAX_SIM_QUBITS = 16
MAX_DENSE_QUBITS = 14

OP_CNOT = 0
OP_FIXED = 1
OP_ROT = 2
_AXIS = {"X": 0, "Y": 1, "Z": 2}


class SizeGuardError(ValueError):
    """Requested system is too large for dense simulation."""


@dataclass(frozen=True, eq=False)
class StateVector:
    n: int
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def basis_state(n: int, bits: int = 0) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[bits] = 1.0
    return psi


@functools.lru_cache(maxsize=None)
def unitary_table() -> np.ndarray:
    """``(24, 2, 2)`` unitaries of the single-qubit Cliffords, indexed by id."""
    out = np.array([c.unitary() for c in single_qubit_cliffords()], dtype=np.complex128)
    out.setflags(write=False)
    return out


def _named_fixed(name: str) -> int:
    for c in single_qubit_cliffords():
        if c.word == name.upper():
            return c.id
    raise KeyError(name)


def compile_gates(gates: Sequence[Gate]) -> np.ndarray:
    rows = []
    for g in gates:
        if g.name == "cnot":
            rows.append((OP_CNOT, g.qubits[0], g.qubits[1], 0))
        elif g.name == "clifford":
            rows.append((OP_FIXED, g.qubits[0], g.clifford, 0))
        elif g.name in ("h", "s"):
            rows.append((OP_FIXED, g.qubits[0], _named_fixed(g.name), 0))
        elif g.name == "rot":
            rows.append((OP_ROT, g.qubits[0], _AXIS[g.axis], g.param))
        else:
            raise ValueError(f"unknown gate {g.name!r}")
    return np.array(rows, dtype=np.int64).reshape(-1, 4)


# ---------------------------------------------------------------------------
# loop kernels (compiled under numba)


@kernel
def _rot_matrix(axis, theta):
    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    u = np.zeros((2, 2), dtype=np.complex128)
    if axis == 0:
        u[0, 0] = c
        u[1, 1] = c
        u[0, 1] = -1j * s
        u[1, 0] = -1j * s
    elif axis == 1:
        u[0, 0] = c
        u[1, 1] = c
        u[0, 1] = -s
        u[1, 0] = s
    else:
        u[0, 0] = c - 1j * s
        u[1, 1] = c + 1j * s
    return u


@kernel
def _pauli_matrix(axis):
    u = np.zeros((2, 2), dtype=np.complex128)
    if axis == 0:
        u[0, 1] = 1.0
        u[1, 0] = 1.0
    elif axis == 1:
        u[0, 1] = -1j
        u[1, 0] = 1j
    else:
        u[0, 0] = 1.0
        u[1, 1] = -1.0
    return u


@kernel
def _apply_1q_loop(psi, q, u):
    step = 1 << q
    dim = psi.shape[0]
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    for base in range(0, dim, 2 * step):
        for off in range(step):
            i0 = base + off
            i1 = i0 + step
            a0 = psi[i0]
            a1 = psi[i1]
            psi[i0] = u00 * a0 + u01 * a1
            psi[i1] = u10 * a0 + u11 * a1
    return psi


@kernel
def _apply_cnot_loop(psi, c, t):
    dim = psi.shape[0]
    cm = 1 << c
    tm = 1 << t
    for i in range(dim):
        if (i & cm) and not (i & tm):
            j = i | tm
            tmp = psi[i]
            psi[i] = psi[j]
            psi[j] = tmp
    return psi


@kernel
def _forward_loop(psi, ops, params, utable):
    for i in range(ops.shape[0]):
        op = ops[i, 0]
        if op == 0:
            _apply_cnot_loop(psi, ops[i, 1], ops[i, 2])
        elif op == 1:
            _apply_1q_loop(psi, ops[i, 1], utable[ops[i, 2]])
        else:
            _apply_1q_loop(psi, ops[i, 1], _rot_matrix(ops[i, 2], params[ops[i, 3]]))
    return psi


@kernel
def _overlap_pauli(lam, psi, q, axis):
    """``<lam| P_q |psi>``."""
    step = 1 << q
    dim = psi.shape[0]
    acc = 0j
    for base in range(0, dim, 2 * step):
        for off in range(step):
            i0 = base + off
            i1 = i0 + step
            if axis == 0:
                acc += np.conj(lam[i0]) * psi[i1] + np.conj(lam[i1]) * psi[i0]
            elif axis == 1:
                acc += np.conj(lam[i0]) * (-1j * psi[i1]) + np.conj(lam[i1]) * (1j * psi[i0])
            else:
                acc += np.conj(lam[i0]) * psi[i0] - np.conj(lam[i1]) * psi[i1]
    return acc


@kernel
def _backward_loop(psi, lam, ops, params, utable, n_params):
    grad = np.zeros(n_params)
    for i in range(ops.shape[0] - 1, -1, -1):
        op = ops[i, 0]
        q = ops[i, 1]
        if op == 0:
            _apply_cnot_loop(psi, q, ops[i, 2])
            _apply_cnot_loop(lam, q, ops[i, 2])
        elif op == 1:
            u = utable[ops[i, 2]]
            ud = np.conj(u.T).copy()
            _apply_1q_loop(psi, q, ud)
            _apply_1q_loop(lam, q, ud)
        else:
            k = ops[i, 3]
            grad[k] += np.imag(_overlap_pauli(lam, psi, q, ops[i, 2]))
            ud = _rot_matrix(ops[i, 2], -params[k])
            _apply_1q_loop(psi, q, ud)
            _apply_1q_loop(lam, q, ud)
    return grad


# ---------------------------------------------------------------------------
# vectorized numpy twins


def _rot_matrix_np(axis: int, theta: float) -> np.ndarray:
    c, s = np.cos(0.5 * theta), np.sin(0.5 * theta)
    if axis == 0:
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis == 1:
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    return np.array([[c - 1j * s, 0], [0, c + 1j * s]])


_PAULI_NP = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


def _apply_1q_np(psi: np.ndarray, q: int, u: np.ndarray) -> np.ndarray:
    view = psi.reshape(-1, 2, 1 << q)
    return np.einsum("ij,ajb->aib", u, view).reshape(-1)


def _apply_cnot_np(psi: np.ndarray, c: int, t: int) -> np.ndarray:
    idx = np.arange(psi.shape[0])
    return psi[idx ^ (((idx >> c) & 1) << t)]


def _forward_np(psi, ops, params, utable):
    for op, a, b, c in ops:
        if op == OP_CNOT:
            psi = _apply_cnot_np(psi, a, b)
        elif op == OP_FIXED:
            psi = _apply_1q_np(psi, a, utable[b])
        else:
            psi = _apply_1q_np(psi, a, _rot_matrix_np(b, params[c]))
    return psi


def _backward_np(psi, lam, ops, params, utable, n_params):
    grad = np.zeros(n_params)
    for op, a, b, c in ops[::-1]:
        if op == OP_CNOT:
            psi = _apply_cnot_np(psi, a, b)
            lam = _apply_cnot_np(lam, a, b)
        elif op == OP_FIXED:
            ud = utable[b].conj().T
            psi = _apply_1q_np(psi, a, ud)
            lam = _apply_1q_np(lam, a, ud)
        else:
            grad[c] += np.vdot(lam, _apply_1q_np(psi, a, _PAULI_NP[b])).imag
            ud = _rot_matrix_np(b, -params[c])
            psi = _apply_1q_np(psi, a, ud)
            lam = _apply_1q_np(lam, a, ud)
    return grad


def _forward_numba_entry(psi, ops, params, utable):
    return _forward_loop(psi.copy(), ops, params, utable)


def _backward_numba_entry(psi, lam, ops, params, utable, n_params):
    return _backward_loop(psi.copy(), lam.copy(), ops, params, utable, n_params)


forward = select(_forward_numba_entry, _forward_np)
backward = select(_backward_numba_entry, _backward_np)


# ---------------------------------------------------------------------------
# Hamiltonians


def _guard(n: int, limit: int) -> None:
    if n > limit:
        raise SizeGuardError(f"{n} qubits exceeds the dense limit of {limit}")


def hamiltonian_matrix(h: PauliSum, dense: bool = False):
    """Sparse CSR matrix of ``H - constant`` (real dtype when every term has even Y)."""
    if h._matrix_cache is not None and not dense:
        return h._matrix_cache
    _guard(h.n, MAX_SIM_QUBITS)
    dim = 1 << h.n
    real = h.is_real()
    r = np.arange(dim, dtype=np.int64)
    rows, cols, vals = [], [], []
    n_y = h.y_counts()
    # letter string = (-i)**#Y Z^z X^x
    phase = np.array([1, -1j, -1, 1j])[(n_y % 4)]
    for x in np.unique(h.xs):
        sel = h.xs == x
        d = np.zeros(dim, dtype=np.float64 if real else np.complex128)
        for z, c, ph in zip(h.zs[sel], h.coeffs[sel], phase[sel]):
            sign = 1.0 - 2.0 * (np.bitwise_count(r & z) & 1)
            d = d + (c * (ph.real if real else ph)) * sign
        rows.append(r)
        cols.append(r ^ x)
        vals.append(d)
    if rows:
        mat = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim),
        )
    else:
        mat = sp.csr_matrix((dim, dim), dtype=np.float64)
    if dense:
        return mat.toarray()
    h._matrix_cache = mat
    return mat


def apply_hamiltonian(h: PauliSum, psi: np.ndarray) -> np.ndarray:
    """``(H - constant) psi``."""
    return hamiltonian_matrix(h) @ psi


def energy(state, h: PauliSum) -> float:
    psi = state.amplitudes if isinstance(state, StateVector) else np.asarray(state)
    n = state.n if isinstance(state, StateVector) else int(np.log2(len(psi)))
    if n != h.n:
        raise ValueError(f"state has {n} qubits, Hamiltonian {h.n}")
    e = np.vdot(psi, apply_hamiltonian(h, psi))
    if abs(e.imag) > 1e-10:
        raise ArithmeticError(f"energy has imaginary part {e.imag:.3e}")
    return float(e.real + h.constant)


def exact_spectrum(h: PauliSum) -> np.ndarray:
    _guard(h.n, MAX_DENSE_QUBITS)
    mat = hamiltonian_matrix(h, dense=True)
    return np.linalg.eigvalsh(mat) + h.constant


def ground_energy(h: PauliSum) -> float:
    """Lowest eigenvalue; sparse Lanczos above 10 qubits."""
    if h.n <= 10:
        return float(exact_spectrum(h)[0])
    from scipy.sparse.linalg import eigsh

    vals = eigsh(hamiltonian_matrix(h), k=1, which="SA", tol=1e-12)[0]
    return float(vals[0] + h.constant)


# ---------------------------------------------------------------------------
# circuits


class Circuit:
    """Compiled gate list bound to a qubit count, reusable across parameter vectors."""

    def __init__(self, n: int, gates: Sequence[Gate], n_params: int):
        _guard(n, MAX_SIM_QUBITS)
        self.n = n
        self.n_params = n_params
        self.ops = compile_gates(gates)
        self.utable = unitary_table()

    @classmethod
    def from_template(cls, t: HeaTemplate) -> "Circuit":
        return cls(t.n, t.gates(), t.n_params)

    def _params(self, params) -> np.ndarray:
        params = np.ascontiguousarray(params, dtype=np.float64)
        if params.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got shape {params.shape}")
        return params

    def state(self, params, initial: np.ndarray | None = None) -> np.ndarray:
        psi0 = basis_state(self.n) if initial is None else np.asarray(initial, dtype=np.complex128)
        return forward(psi0, self.ops, self._params(params), self.utable)

    def energy(self, params, h: PauliSum) -> float:
        return energy(StateVector(self.n, self.state(params)), h)

    def energy_and_gradient(self, params, h: PauliSum) -> tuple[float, np.ndarray]:
        params = self._params(params)
        psi = forward(basis_state(self.n), self.ops, params, self.utable)
        lam = apply_hamiltonian(h, psi).astype(np.complex128, copy=False)
        e = np.vdot(psi, lam)
        if abs(e.imag) > 1e-10:
            raise ArithmeticError(f"energy has imaginary part {e.imag:.3e}")
        grad = backward(psi, lam, self.ops, params, self.utable, self.n_params)
        return float(e.real + h.constant), grad


def simulate(t: HeaTemplate, params) -> StateVector:
    c = Circuit.from_template(t)
    return StateVector(t.n, c.state(params))


def energy_gradient(t: HeaTemplate, params, h: PauliSum) -> np.ndarray:
    return Circuit.from_template(t).energy_and_gradient(params, h)[1]


def simulate_gates(n: int, gates: Sequence[Gate], params, initial=None) -> np.ndarray:
    n_params = 1 + max([g.param for g in gates if g.name == "rot"], default=-1)
    params = np.zeros(n_params) if params is None else params
    return Circuit(n, gates, n_params).state(params, initial)


__all__ = [
    "Circuit",
    "SizeGuardError",
    "StateVector",
    "USE_NUMBA",
    "apply_hamiltonian",
    "basis_state",
    "energy",
    "energy_gradient",
    "exact_spectrum",
    "ground_energy",
    "hamiltonian_matrix",
    "simulate",
    "simulate_gates",
]
