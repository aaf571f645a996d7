"""Hardware-efficient ansatz template and its Clifford skeleton.

Circuit layout (time order)::

    rotations(layer 0)
    for layer in 1..p:
        CNOT(0,1) CNOT(1,2) ... CNOT(n-2,n-1)
        C[layer-1, 0] ... C[layer-1, n-1]      # single-qubit Clifford slots
        rotations(layer)

A rotation layer applies ``exp(-i theta/2 P)`` for every qubit (ascending)
and every axis in ``rotation_axes`` (in the given order); that order fixes
the parameter index ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .clifford import (
    CliffordTableau,
    cnot_gate,
    single_qubit_cliffords,
    single_qubit_gate,
    single_qubit_table,
)
from ._accel import kernel
from .pauli import PauliString

AXES = ("X", "Y", "Z")

# gate opcodes used by the Q kernel
OP_CNOT = 0
OP_SLOT = 1
OP_ROT = 2
_AXIS_CODE = {"X": 0, "Y": 1, "Z": 2}


class TemplateError(ValueError):
    """Invalid ansatz dimensions, axes or slot ids."""


@dataclass(frozen=True)
class Gate:
    """One circuit element.

    ``name`` is ``"rot"`` (``axis``, ``param``), ``"cnot"`` (two qubits) or
    ``"clifford"`` (``clifford`` id, or ``slot`` index when it comes from a
    template slot).
    """

    name: str
    qubits: tuple[int, ...]
    axis: str | None = None
    param: int | None = None
    clifford: int | None = None
    slot: int | None = None


@dataclass(frozen=True)
class ParamInfo:
    layer: int
    qubit: int
    axis: str


@dataclass(frozen=True)
class HeaTemplate:
    n: int
    p: int
    rotation_axes: tuple[str, ...] = ("Y", "Z")
    clifford_slots: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.n < 2:
            raise TemplateError(f"need at least 2 qubits, got {self.n}")
        if self.p < 0:
            raise TemplateError(f"layer count must be >= 0, got {self.p}")
        axes = tuple(a.upper() for a in self.rotation_axes)
        if not axes or any(a not in AXES for a in axes):
            raise TemplateError(f"rotation axes must be a non-empty subset of {AXES}, got {self.rotation_axes!r}")
        object.__setattr__(self, "rotation_axes", axes)
        slots = tuple(int(s) for s in self.clifford_slots) or (0,) * (self.n * self.p)
        if len(slots) != self.n * self.p:
            raise TemplateError(f"expected {self.n * self.p} Clifford slots, got {len(slots)}")
        if any(not 0 <= s < 24 for s in slots):
            raise TemplateError("Clifford slot ids must lie in [0, 24)")
        object.__setattr__(self, "clifford_slots", slots)

    @property
    def n_params(self) -> int:
        return (self.p + 1) * self.n * len(self.rotation_axes)

    @property
    def n_cnots(self) -> int:
        return (self.n - 1) * self.p

    @property
    def n_slots(self) -> int:
        return self.n * self.p

    def with_slots(self, slots: Sequence[int]) -> "HeaTemplate":
        return HeaTemplate(self.n, self.p, self.rotation_axes, tuple(int(s) for s in slots))

    def param_info(self) -> list[ParamInfo]:
        return [
            ParamInfo(layer, q, a)
            for layer in range(self.p + 1)
            for q in range(self.n)
            for a in self.rotation_axes
        ]

    def gates(self) -> list[Gate]:
        out: list[Gate] = []
        k = 0

        def rotations(layer_k: int) -> int:
            for q in range(self.n):
                for a in self.rotation_axes:
                    out.append(Gate("rot", (q,), axis=a, param=layer_k))
                    layer_k += 1
            return layer_k

        k = rotations(k)
        for layer in range(self.p):
            for q in range(self.n - 1):
                out.append(Gate("cnot", (q, q + 1)))
            for q in range(self.n):
                s = layer * self.n + q
                out.append(Gate("clifford", (q,), clifford=self.clifford_slots[s], slot=s))
            k = rotations(k)
        return out


def build_template(n: int, p: int, rotation_axes: Sequence[str] = ("Y", "Z"), clifford_slot_ids=None) -> HeaTemplate:
    slots = () if clifford_slot_ids is None else tuple(int(v) for v in clifford_slot_ids)
    return HeaTemplate(n, p, tuple(rotation_axes), slots)


def gate_tableau(n: int, g: Gate) -> CliffordTableau:
    if g.name == "cnot":
        return cnot_gate(n, *g.qubits)
    if g.name == "clifford":
        return single_qubit_gate(n, g.qubits[0], g.clifford)
    if g.name in ("h", "s"):
        return single_qubit_gate(n, g.qubits[0], _NAMED_CLIFFORD[g.name])
    raise ValueError(f"gate {g.name!r} is not Clifford")


def _named_ids() -> dict[str, int]:
    ids = {}
    for c in single_qubit_cliffords():
        if c.word in ("H", "S") and c.word.lower() not in ids:
            ids[c.word.lower()] = c.id
    return ids


_NAMED_CLIFFORD = _named_ids()


def tableau_of_gates(n: int, gates: Sequence[Gate]) -> CliffordTableau:
    """Tableau of the Clifford part of a gate list (rotations at angle 0 are skipped)."""
    t = CliffordTableau.identity(n)
    for g in gates:
        if g.name != "rot":
            t = t.then(gate_tableau(n, g))
    return t


# ---------------------------------------------------------------------------
# flattened form  U = prod_{j=M..1} R_j(theta_j) B_j


@dataclass(frozen=True)
class FlatEntry:
    prefix: tuple[Gate, ...]
    clifford: CliffordTableau | None  # None: identity segment
    axis: str
    qubit: int
    param: int


@dataclass(frozen=True)
class FlattenedAnsatz:
    n: int
    entries: tuple[FlatEntry, ...]
    info: tuple[ParamInfo, ...]

    def __len__(self) -> int:
        return len(self.entries)


def flatten(t: HeaTemplate) -> FlattenedAnsatz:
    entries = []
    pending: list[Gate] = []
    for g in t.gates():
        if g.name == "rot":
            tab = tableau_of_gates(t.n, pending) if pending else None
            entries.append(FlatEntry(tuple(pending), tab, g.axis, g.qubits[0], g.param))
            pending = []
        else:
            pending.append(g)
    if pending:  # pragma: no cover - templates always end on a rotation layer
        raise TemplateError("trailing Clifford gates after the last rotation")
    return FlattenedAnsatz(t.n, tuple(entries), tuple(t.param_info()))


def replay_tableau(f: FlattenedAnsatz) -> CliffordTableau:
    out = CliffordTableau.identity(f.n)
    for e in f.entries:
        if e.clifford is not None:
            out = out.then(e.clifford)
    return out


def clifford_at_zero(t: HeaTemplate) -> CliffordTableau:
    """Tableau of ``U_HEA(0)``."""
    return tableau_of_gates(t.n, t.gates())


# ---------------------------------------------------------------------------
# rotation-generator images Q_k = V_k^dag P_k V_k


def compile_template(t: HeaTemplate) -> tuple[np.ndarray, np.ndarray]:
    """Encode the gate list as ``(ops, slot_index)``.

    ``ops`` rows are ``(opcode, a, b)``: CNOT ``(0, control, target)``,
    slot ``(1, qubit, slot)``, rotation ``(2, qubit, axis_code)``.
    """
    rows = []
    for g in t.gates():
        if g.name == "cnot":
            rows.append((OP_CNOT, g.qubits[0], g.qubits[1]))
        elif g.name == "clifford":
            rows.append((OP_SLOT, g.qubits[0], g.slot))
        else:
            rows.append((OP_ROT, g.qubits[0], _AXIS_CODE[g.axis]))
    return np.array(rows, dtype=np.int64), np.array(t.clifford_slots, dtype=np.int64)


@kernel
def _pc(v):
    c = 0
    while v:
        v &= v - 1
        c += 1
    return c


@kernel
def q_kernel(n, ops, slots, table, n_params):
    """Track the Heisenberg tableau of the Clifford prefix; emit Q_k at each rotation."""
    tx = np.zeros(2 * n, dtype=np.int64)
    tz = np.zeros(2 * n, dtype=np.int64)
    tk = np.zeros(2 * n, dtype=np.int64)
    for q in range(n):
        tx[q] = np.int64(1) << q
        tz[n + q] = np.int64(1) << q
    qx = np.empty(n_params, dtype=np.int64)
    qz = np.empty(n_params, dtype=np.int64)
    qk = np.empty(n_params, dtype=np.int64)
    m = 0
    for i in range(ops.shape[0]):
        op = ops[i, 0]
        a = ops[i, 1]
        b = ops[i, 2]
        if op == 0:
            # X_c -> X_c X_t, Z_t -> Z_c Z_t
            c, t = a, b
            k = tk[c] + tk[t] + 2 * _pc(tx[c] & tz[t])
            tx[c] ^= tx[t]
            tz[c] ^= tz[t]
            tk[c] = k % 4
            r1 = n + c
            r2 = n + t
            k = tk[r1] + tk[r2] + 2 * _pc(tx[r1] & tz[r2])
            tx[r2] ^= tx[r1]
            tz[r2] ^= tz[r1]
            tk[r2] = k % 4
        elif op == 1:
            cid = slots[b]
            q = a
            ox, oz, ok = tx[q], tz[q], tk[q]
            zx, zz, zk = tx[n + q], tz[n + q], tk[n + q]
            for which in range(2):
                ix = table[cid, 3 * which]
                iz = table[cid, 3 * which + 1]
                ik = table[cid, 3 * which + 2]
                # i**ik Z^iz X^ix on this qubit, mapped through the old rows
                rx = np.int64(0)
                rz = np.int64(0)
                rk = ik
                if iz:
                    rk += zk + 2 * _pc(rx & zz)
                    rx ^= zx
                    rz ^= zz
                if ix:
                    rk += ok + 2 * _pc(rx & oz)
                    rx ^= ox
                    rz ^= oz
                row = q if which == 0 else n + q
                tx[row] = rx
                tz[row] = rz
                tk[row] = rk % 4
        else:
            q = a
            if b == 0:
                qx[m], qz[m], qk[m] = tx[q], tz[q], tk[q]
            elif b == 2:
                qx[m], qz[m], qk[m] = tx[n + q], tz[n + q], tk[n + q]
            else:
                # Y = i**3 Z X
                r = n + q
                k = 3 + tk[r] + tk[q] + 2 * _pc(tx[r] & tz[q])
                qx[m] = tx[r] ^ tx[q]
                qz[m] = tz[r] ^ tz[q]
                qk[m] = k % 4
            m += 1
    return qx, qz, qk


def compute_q_arrays(t: HeaTemplate, ops=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if ops is None:
        ops, slots = compile_template(t)
    else:
        slots = np.array(t.clifford_slots, dtype=np.int64)
    return q_kernel(t.n, ops, slots, single_qubit_table(), t.n_params)


def compute_q(t: HeaTemplate) -> list[PauliString]:
    qx, qz, qk = compute_q_arrays(t)
    return [PauliString(t.n, int(x), int(z), int(k)) for x, z, k in zip(qx, qz, qk)]


def compute_q_reference(t: HeaTemplate) -> list[PauliString]:
    """Slow tableau-composition route to Q_k, used to cross-check the kernel."""
    from .clifford import conjugate

    out = []
    v = CliffordTableau.identity(t.n)
    letters = {"X": "X", "Y": "Y", "Z": "Z"}
    for g in t.gates():
        if g.name == "rot":
            label = ["I"] * t.n
            label[g.qubits[0]] = letters[g.axis]
            from .pauli import parse_pauli

            out.append(conjugate(v, parse_pauli("".join(label))))
        else:
            v = v.then(gate_tableau(t.n, g))
    return out


# ---------------------------------------------------------------------------
# plain-text circuit format
#
#   # chemclifford circuit
#   qubits <n>
#   params <M>
#   rx|ry|rz <qubit> <param index>
#   cnot <control> <target>
#   clifford <qubit> <id>
#   h <qubit> / s <qubit>


def dump_circuit(n: int, n_params: int, gates: Sequence[Gate], expand_cliffords: bool = False) -> str:
    lines = ["# chemclifford circuit", f"qubits {n}", f"params {n_params}"]
    table = single_qubit_cliffords()
    for g in gates:
        if g.name == "rot":
            lines.append(f"r{g.axis.lower()} {g.qubits[0]} {g.param}")
        elif g.name == "cnot":
            lines.append(f"cnot {g.qubits[0]} {g.qubits[1]}")
        elif g.name == "clifford":
            if expand_cliffords:
                lines.extend(f"{ch.lower()} {g.qubits[0]}" for ch in table[g.clifford].word)
            else:
                lines.append(f"clifford {g.qubits[0]} {g.clifford}")
        elif g.name in ("h", "s"):
            lines.append(f"{g.name} {g.qubits[0]}")
        else:
            raise ValueError(f"cannot serialize gate {g.name!r}")
    return "\n".join(lines) + "\n"


class CircuitFormatError(ValueError):
    pass


def parse_circuit(text: str) -> tuple[int, int, list[Gate]]:
    n = n_params = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            head, args = tok[0].lower(), [int(v) for v in tok[1:]]
        except ValueError:
            raise CircuitFormatError(f"line {lineno}: non-integer argument in {raw!r}") from None
        if head == "qubits":
            n = args[0]
        elif head == "params":
            n_params = args[0]
        elif head in ("rx", "ry", "rz") and len(args) == 2:
            gates.append(Gate("rot", (args[0],), axis=head[1].upper(), param=args[1]))
        elif head == "cnot" and len(args) == 2:
            gates.append(Gate("cnot", (args[0], args[1])))
        elif head == "clifford" and len(args) == 2:
            if not 0 <= args[1] < 24:
                raise CircuitFormatError(f"line {lineno}: Clifford id {args[1]} out of range")
            gates.append(Gate("clifford", (args[0],), clifford=args[1]))
        elif head in ("h", "s") and len(args) == 1:
            gates.append(Gate(head, (args[0],)))
        else:
            raise CircuitFormatError(f"line {lineno}: cannot parse {raw!r}")
    if n is None or n_params is None:
        raise CircuitFormatError("missing 'qubits' or 'params' header")
    for g in gates:
        if any(not 0 <= q < n for q in g.qubits):
            raise CircuitFormatError(f"gate {g} addresses a qubit outside [0, {n})")
    return n, n_params, gates
