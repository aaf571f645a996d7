"""Clifford tableaux in the Heisenberg picture.

A tableau for the unitary ``U`` stores the images ``U^dag X_q U`` and
``U^dag Z_q U`` of the generators as signed Pauli strings. ``conjugate(t, P)``
returns ``U^dag P U``.

Composition convention: ``compose(a, b)`` is the circuit "``b`` then ``a``",
i.e. the operator ``U_a U_b``, and therefore
``conjugate(compose(a, b), P) == conjugate(b, conjugate(a, P))``.
The method ``t.then(g)`` is the same product written in circuit order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import gf2
from ._accel import kernel
from .pauli import PauliError, PauliString, PauliSum, identity, multiply, parse_pauli, popcount


class TableauError(ValueError):
    """Generator images violate the symplectic relations or Hermiticity."""


# ---------------------------------------------------------------------------
# word-level kernels; a row is (x, z, k) meaning i**k Z^z X^x


@kernel
def _popcount(v):
    c = 0
    while v:
        v &= v - 1
        c += 1
    return c


@kernel
def _row_conjugate(px, pz, pk, tx, tz, tk, n):
    """Image of ``i**pk Z^pz X^px`` under a tableau (rows 0..n-1 X, n..2n-1 Z)."""
    ax = np.int64(0)
    az = np.int64(0)
    ak = pk
    # all Z factors first, then all X factors (distinct qubits commute)
    for q in range(n):
        if (pz >> q) & 1:
            r = n + q
            ak += tk[r] + 2 * _popcount(ax & tz[r])
            ax ^= tx[r]
            az ^= tz[r]
    for q in range(n):
        if (px >> q) & 1:
            ak += tk[q] + 2 * _popcount(ax & tz[q])
            ax ^= tx[q]
            az ^= tz[q]
    return ax, az, ak % 4


@kernel
def conjugate_many(xs, zs, ks, tx, tz, tk, n):
    m = xs.shape[0]
    ox = np.empty(m, dtype=np.int64)
    oz = np.empty(m, dtype=np.int64)
    ok = np.empty(m, dtype=np.int64)
    for i in range(m):
        ox[i], oz[i], ok[i] = _row_conjugate(xs[i], zs[i], ks[i], tx, tz, tk, n)
    return ox, oz, ok


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CliffordTableau:
    """Images of ``X_q`` (rows ``0..n-1``) and ``Z_q`` (rows ``n..2n-1``).

    ``xs``/``zs`` are packed int64 words, ``ks`` the phase exponents in the
    ``i**k Z^z X^x`` form.
    """

    n: int
    xs: np.ndarray
    zs: np.ndarray
    ks: np.ndarray

    def __post_init__(self):
        n = self.n
        for name in ("xs", "zs", "ks"):
            arr = np.array(getattr(self, name), dtype=np.int64)
            if arr.shape != (2 * n,):
                raise TableauError(f"{name} must have length {2 * n}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "ks", np.array(self.ks % 4, dtype=np.int64))
        self.ks.setflags(write=False)
        self.validate()

    # -- construction -----------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        one = np.left_shift(np.int64(1), np.arange(n, dtype=np.int64))
        zero = np.zeros(n, dtype=np.int64)
        return cls(n, np.concatenate([one, zero]), np.concatenate([zero, one]), np.zeros(2 * n, dtype=np.int64))

    @classmethod
    def from_images(cls, x_images: Sequence[PauliString], z_images: Sequence[PauliString]) -> "CliffordTableau":
        rows = list(x_images) + list(z_images)
        n = len(x_images)
        if len(z_images) != n or any(r.n != n for r in rows):
            raise TableauError("need n X-images and n Z-images on n qubits")
        return cls(n, [r.x for r in rows], [r.z for r in rows], [r.k for r in rows])

    @classmethod
    def from_labels(cls, x_labels: Sequence[str], z_labels: Sequence[str]) -> "CliffordTableau":
        return cls.from_images([parse_pauli(s) for s in x_labels], [parse_pauli(s) for s in z_labels])

    # -- access -----------------------------------------------------------

    def row(self, i: int) -> PauliString:
        return PauliString(self.n, int(self.xs[i]), int(self.zs[i]), int(self.ks[i]))

    def x_image(self, q: int) -> PauliString:
        return self.row(q)

    def z_image(self, q: int) -> PauliString:
        return self.row(self.n + q)

    def labels(self) -> tuple[list[str], list[str]]:
        return (
            [self.x_image(q).signed_label() for q in range(self.n)],
            [self.z_image(q).signed_label() for q in range(self.n)],
        )

    def validate(self) -> None:
        n = self.n
        rows = [self.row(i) for i in range(2 * n)]
        for r in rows:
            if not r.is_hermitian():
                raise TableauError(f"generator image {r!r} is not Hermitian")
            if r.x == 0 and r.z == 0:
                raise TableauError("generator image is the identity")
        for i in range(2 * n):
            for j in range(i + 1, 2 * n):
                anti = (popcount(rows[i].x & rows[j].z) + popcount(rows[i].z & rows[j].x)) % 2
                want = 1 if (i < n <= j and j - n == i) else 0
                if anti != want:
                    raise TableauError(f"images {i} and {j} violate the symplectic relations")

    def is_identity(self) -> bool:
        return self == CliffordTableau.identity(self.n)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CliffordTableau)
            and self.n == other.n
            and np.array_equal(self.xs, other.xs)
            and np.array_equal(self.zs, other.zs)
            and np.array_equal(self.ks, other.ks)
        )

    def __hash__(self):
        return hash((self.n, self.xs.tobytes(), self.zs.tobytes(), self.ks.tobytes()))

    def __repr__(self) -> str:
        xl, zl = self.labels()
        return f"CliffordTableau(x={xl}, z={zl})"

    def then(self, other: "CliffordTableau") -> "CliffordTableau":
        """Circuit ``self`` followed by ``other``."""
        return compose(other, self)


def conjugate(t: CliffordTableau, p: PauliString) -> PauliString:
    """``U^dag P U``."""
    if t.n != p.n:
        raise PauliError(f"qubit count mismatch: tableau {t.n}, Pauli {p.n}")
    x, z, k = _row_conjugate(np.int64(p.x), np.int64(p.z), np.int64(p.k), t.xs, t.zs, t.ks, t.n)
    return PauliString(t.n, int(x), int(z), int(k))


def conjugate_sum(t: CliffordTableau, h: PauliSum) -> PauliSum:
    """Term-by-term ``U^dag H U``; the term count is preserved."""
    if t.n != h.n:
        raise PauliError(f"qubit count mismatch: tableau {t.n}, Hamiltonian {h.n}")
    ks = (3 * h.y_counts()) % 4
    ox, oz, ok = conjugate_many(h.xs, h.zs, ks, t.xs, t.zs, t.ks, t.n)
    # fold i**k Z^z X^x back into a letter string with a real sign
    factor = (ok + np.bitwise_count(ox & oz).astype(np.int64)) % 4
    if np.any(factor % 2):
        raise TableauError("conjugation produced a non-Hermitian term")
    coeffs = h.coeffs * np.where(factor == 2, -1.0, 1.0)
    return PauliSum(h.n, ox, oz, coeffs, h.constant)


def compose(a: CliffordTableau, b: CliffordTableau) -> CliffordTableau:
    """Operator product ``U_a U_b`` (circuit: ``b`` first, then ``a``)."""
    if a.n != b.n:
        raise PauliError(f"qubit count mismatch: {a.n} vs {b.n}")
    ox, oz, ok = conjugate_many(a.xs, a.zs, a.ks, b.xs, b.zs, b.ks, a.n)
    return CliffordTableau(a.n, ox, oz, ok)


def inverse(t: CliffordTableau) -> CliffordTableau:
    n = t.n
    # symplectic part: columns are (x | z << n) images of each generator
    cols = np.array([int(t.xs[i]) | (int(t.zs[i]) << n) for i in range(2 * n)], dtype=np.int64)
    if 2 * n > gf2.MAX_BITS:
        raise TableauError(f"inverse supports at most {gf2.MAX_BITS // 2} qubits")
    inv = gf2.invert(gf2.BitMatrix.from_columns(cols, 2 * n)).column_words()
    mask = (1 << n) - 1
    xs, zs, ks = [], [], []
    for g in range(2 * n):
        target = PauliString(n, 1 << g if g < n else 0, 1 << (g - n) if g >= n else 0, 0)
        c = int(inv[g])
        # preimage with bits (c) as a combination of generators
        cand = PauliString(n, c & mask, c >> n, 0)
        cand = PauliString(n, cand.x, cand.z, 3 * popcount(cand.x & cand.z))
        img = conjugate(t, cand)
        if img.x != target.x or img.z != target.z:
            raise TableauError("inverse construction failed")
        # img = i**d target  => preimage of target is i**-d cand
        d = (img.k - target.k) % 4
        xs.append(cand.x)
        zs.append(cand.z)
        ks.append(cand.k - d)
    return CliffordTableau(n, xs, zs, ks)


def tableau_from_xmatrix(m: gf2.BitMatrix) -> CliffordTableau:
    """Clifford fixing ``|0...0>`` whose X-action is given by the rows of ``m``.

    ``X_i -> +X^{row i of m}`` and ``Z_i -> +Z^{row i of (m^T)^{-1}}``. For a
    column vector ``x_h`` the conjugated x-part is ``m^T x_h`` (row vector
    ``x_h m``).
    """
    if m.rows != m.cols:
        raise gf2.SingularMatrixError("xmatrix must be square")
    n = m.rows
    xrows = m.row_words()
    zrows = gf2.invert(m.T).row_words()
    zero = np.zeros(n, dtype=np.int64)
    return CliffordTableau(n, np.concatenate([xrows, zero]), np.concatenate([zero, zrows]), np.zeros(2 * n, dtype=np.int64))


# ---------------------------------------------------------------------------
# elementary gates


def _embed(n: int, qubits: Sequence[int], small: CliffordTableau) -> CliffordTableau:
    t = CliffordTableau.identity(n)
    xs, zs, ks = t.xs.copy(), t.zs.copy(), t.ks.copy()

    def lift(w: int) -> int:
        out = 0
        for j, q in enumerate(qubits):
            if (w >> j) & 1:
                out |= 1 << q
        return out

    m = len(qubits)
    for j, q in enumerate(qubits):
        for src, dst in ((j, q), (m + j, n + q)):
            xs[dst] = lift(int(small.xs[src]))
            zs[dst] = lift(int(small.zs[src]))
            ks[dst] = small.ks[src]
    return CliffordTableau(n, xs, zs, ks)


_H1 = CliffordTableau.from_labels(["Z"], ["X"])
_S1 = CliffordTableau.from_labels(["-Y"], ["Z"])
_X1 = CliffordTableau.from_labels(["X"], ["-Z"])
_Z1 = CliffordTableau.from_labels(["-X"], ["Z"])
_CNOT2 = CliffordTableau.from_labels(["XX", "IX"], ["ZI", "ZZ"])


def h_gate(n: int, q: int) -> CliffordTableau:
    return _embed(n, [q], _H1)


def s_gate(n: int, q: int) -> CliffordTableau:
    return _embed(n, [q], _S1)


def x_gate(n: int, q: int) -> CliffordTableau:
    return _embed(n, [q], _X1)


def z_gate(n: int, q: int) -> CliffordTableau:
    return _embed(n, [q], _Z1)


def cnot_gate(n: int, control: int, target: int) -> CliffordTableau:
    if control == target:
        raise ValueError("CNOT control and target coincide")
    return _embed(n, [control, target], _CNOT2)


def single_qubit_gate(n: int, q: int, clifford_id: int) -> CliffordTableau:
    return _embed(n, [q], single_qubit_cliffords()[clifford_id].tableau)


def from_gate_word(n: int, word: Sequence[tuple]) -> CliffordTableau:
    """Tableau of a circuit given as ``[("h", q), ("s", q), ("cnot", c, t), ...]`` in time order."""
    t = CliffordTableau.identity(n)
    makers = {"h": h_gate, "s": s_gate, "x": x_gate, "z": z_gate, "cnot": cnot_gate}
    for gate in word:
        name, *qs = gate
        if name == "clifford":
            g = single_qubit_gate(n, qs[0], qs[1])
        else:
            g = makers[name](n, *qs)
        t = t.then(g)
    return t


# ---------------------------------------------------------------------------
# single-qubit Clifford group


@dataclass(frozen=True)
class SingleQubitClifford:
    """One of the 24 single-qubit Cliffords, with a shortest ``{H, S}`` word."""

    id: int
    image_x: str
    image_z: str
    word: str

    @property
    def tableau(self) -> CliffordTableau:
        return CliffordTableau.from_labels([self.image_x], [self.image_z])

    def unitary(self) -> np.ndarray:
        u = np.eye(2, dtype=complex)
        for ch in self.word:
            u = _GATE_MATS[ch] @ u
        return u


_GATE_MATS = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
}

_LETTER_ORDER = {"X": 0, "Z": 1, "Y": 2}


def _sort_key(label: str) -> tuple[int, int]:
    sign = 1 if label.startswith("-") else 0
    return _LETTER_ORDER[label.lstrip("+-")], sign


@lru_cache(maxsize=None)
def single_qubit_cliffords() -> tuple[SingleQubitClifford, ...]:
    """All 24 single-qubit Cliffords modulo phase, in a fixed canonical order.

    Breadth-first closure over ``{H, S}`` words from the identity, keeping the
    first (shortest) word per action, then sorted by the canonical code of
    (image of X, image of Z). Id 0 is the identity.
    """
    start = CliffordTableau.identity(1)
    seen: dict[CliffordTableau, str] = {start: ""}
    frontier = [start]
    gens = {"H": _H1, "S": _S1}
    while frontier:
        nxt = []
        for t in frontier:
            for ch, g in gens.items():
                u = t.then(g)
                if u not in seen:
                    seen[u] = seen[t] + ch
                    nxt.append(u)
        frontier = nxt
    items = []
    for t, word in seen.items():
        xl, zl = t.labels()
        items.append((xl[0], zl[0], word))
    items.sort(key=lambda it: (_sort_key(it[0]), _sort_key(it[1])))
    return tuple(SingleQubitClifford(i, ix, iz, w) for i, (ix, iz, w) in enumerate(items))


def enumerate_single_qubit_cliffords() -> list[SingleQubitClifford]:
    return list(single_qubit_cliffords())


@lru_cache(maxsize=None)
def single_qubit_table() -> np.ndarray:
    """``(24, 6)`` int64 table: ``(xX, zX, kX, xZ, zZ, kZ)`` images per id."""
    rows = []
    for c in single_qubit_cliffords():
        t = c.tableau
        rows.append([t.xs[0], t.zs[0], t.ks[0], t.xs[1], t.zs[1], t.ks[1]])
    out = np.array(rows, dtype=np.int64)
    out.setflags(write=False)
    return out


def clifford_id(image_x: str, image_z: str) -> int:
    """Look up the id of the single-qubit Clifford with the given action."""
    norm = lambda s: s if s[0] in "+-" else "+" + s  # noqa: E731
    for c in single_qubit_cliffords():
        if c.image_x == norm(image_x) and c.image_z == norm(image_z):
            return c.id
    raise KeyError(f"no single-qubit Clifford maps X->{image_x}, Z->{image_z}")


__all__ = [
    "CliffordTableau",
    "SingleQubitClifford",
    "TableauError",
    "clifford_id",
    "cnot_gate",
    "compose",
    "conjugate",
    "conjugate_sum",
    "enumerate_single_qubit_cliffords",
    "from_gate_word",
    "h_gate",
    "identity",
    "inverse",
    "multiply",
    "s_gate",
    "single_qubit_cliffords",
    "single_qubit_gate",
    "single_qubit_table",
    "tableau_from_xmatrix",
    "x_gate",
    "z_gate",
]
