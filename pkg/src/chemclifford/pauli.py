"""Pauli strings in binary-symplectic form and real weighted Pauli sums.

A Pauli string on ``n`` qubits is stored as ``P = i**k * prod_q Z_q**z_q X_q**x_q``
where ``x`` and ``z`` are packed integers (bit ``q`` belongs to qubit ``q``)
and ``k`` is the phase exponent mod 4. In this ordering the product rule is
just an XOR of the bit vectors plus a parity count, and the vacuum overlap
``<0|PQ|0>`` becomes a field lookup.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

MAX_QUBITS = 63

_PHASES = (1.0 + 0j, 1j, -1.0 + 0j, -1j)
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}


class PauliError(ValueError):
    """Invalid Pauli string or Pauli-sum data."""


def popcount(v: int) -> int:
    return int(v).bit_count()


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise PauliError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")


@dataclass(frozen=True)
class PauliString:
    """Signed Pauli operator ``i**k * Z^z X^x``.

    ``x`` and ``z`` are non-negative ints used as bit vectors of length ``n``.
    """

    n: int
    x: int
    z: int
    k: int = 0

    def __post_init__(self):
        _check_n(self.n)
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask or self.x < 0 or self.z < 0:
            raise PauliError("x/z bits exceed the qubit count")
        object.__setattr__(self, "k", self.k % 4)

    @property
    def phase(self) -> complex:
        return _PHASES[self.k]

    @property
    def n_y(self) -> int:
        return popcount(self.x & self.z)

    def is_hermitian(self) -> bool:
        return (self.k - popcount(self.x & self.z)) % 2 == 0

    def x_array(self) -> np.ndarray:
        return np.array([(self.x >> q) & 1 for q in range(self.n)], dtype=np.uint8)

    def z_array(self) -> np.ndarray:
        return np.array([(self.z >> q) & 1 for q in range(self.n)], dtype=np.uint8)

    def letters(self) -> tuple[str, complex]:
        """Return ``(letters, factor)`` with ``self == factor * letters``."""
        out = []
        for q in range(self.n):
            xq, zq = (self.x >> q) & 1, (self.z >> q) & 1
            out.append("Y" if xq and zq else "X" if xq else "Z" if zq else "I")
        # Z X = iY per qubit
        return "".join(out), _PHASES[(self.k + self.n_y) % 4]

    def signed_label(self) -> str:
        """Letter string prefixed with its phase, e.g. ``-XY`` or ``+iZ``."""
        text, factor = self.letters()
        prefix = {1: "+", 1j: "+i", -1: "-", -1j: "-i"}[complex(factor)]
        return prefix + text

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __repr__(self) -> str:
        return f"PauliString({self.signed_label()!r})"


def identity(n: int) -> PauliString:
    return PauliString(n, 0, 0, 0)


def parse_pauli(text: str, sign: int = 1) -> PauliString:
    """Parse a letter string over ``IXYZ`` (qubit 0 first).

    An optional leading ``+``/``-`` and ``i`` are accepted, e.g. ``"-iXZ"``.
    ``sign`` multiplies the result and must be +1 or -1.
    """
    if sign not in (1, -1):
        raise PauliError(f"sign must be +1 or -1, got {sign!r}")
    k = 0 if sign == 1 else 2
    s = text.strip()
    if s[:1] in "+-" and s:
        if s[0] == "-":
            k += 2
        s = s[1:]
    if s[:1] == "i":
        k += 1
        s = s[1:]
    if not s:
        raise PauliError("empty Pauli string")
    x = z = 0
    n_y = 0
    for q, ch in enumerate(s):
        try:
            xb, zb = _LETTER_BITS[ch]
        except KeyError:
            raise PauliError(f"invalid Pauli letter {ch!r} at position {q} in {text!r}") from None
        x |= xb << q
        z |= zb << q
        n_y += xb & zb
    # Y = -i Z X
    return PauliString(len(s), x, z, k + 3 * n_y)


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Exact operator product ``a @ b``."""
    if a.n != b.n:
        raise PauliError(f"qubit count mismatch: {a.n} vs {b.n}")
    # X^xa Z^zb = (-1)^{|xa & zb|} Z^zb X^xa
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z, a.k + b.k + 2 * popcount(a.x & b.z))


def commutes(a: PauliString, b: PauliString) -> bool:
    return (popcount(a.x & b.z) + popcount(a.z & b.x)) % 2 == 0


def vacuum_expectation(p: PauliString, q: PauliString) -> complex:
    """``<0...0| p q |0...0>``."""
    if p.n != q.n:
        raise PauliError(f"qubit count mismatch: {p.n} vs {q.n}")
    if p.x != q.x:
        return 0j
    sign = -1 if popcount(q.z & q.x) % 2 else 1
    return sign * p.phase * q.phase


@dataclass(frozen=True)
class HfFrame:
    """Computational-basis reference state as a bit string, qubit 0 first."""

    occupation: str

    def __post_init__(self):
        if not self.occupation or set(self.occupation) - {"0", "1"}:
            raise PauliError(f"hf_occupation must be a non-empty 0/1 string, got {self.occupation!r}")

    @property
    def n(self) -> int:
        return len(self.occupation)

    @property
    def bits(self) -> int:
        return sum(1 << q for q, ch in enumerate(self.occupation) if ch == "1")


class PauliSum:
    """Hermitian operator ``constant + sum_t coeffs[t] * P_t`` with real coefficients.

    Each stored ``P_t`` is the plain letter string (Hermitian, unit phase in
    the letter basis), so its binary-symplectic phase is ``(-i)**#Y``; any
    sign coming out of algebra is folded into ``coeffs``. Identity terms are
    folded into ``constant``, duplicate ``(x, z)`` keys are merged and terms
    with ``|coeff| < drop_tol`` after merging are removed. Instances are
    treated as immutable.
    """

    __slots__ = ("n", "xs", "zs", "coeffs", "constant", "_matrix_cache")

    def __init__(self, n: int, xs, zs, coeffs, constant: float = 0.0, drop_tol: float = 1e-12):
        _check_n(n)
        xs = np.asarray(xs, dtype=np.int64).ravel()
        zs = np.asarray(zs, dtype=np.int64).ravel()
        coeffs = np.asarray(coeffs, dtype=np.float64).ravel()
        if not (len(xs) == len(zs) == len(coeffs)):
            raise PauliError("xs, zs and coeffs must have equal length")
        if not np.all(np.isfinite(coeffs)) or not np.isfinite(constant):
            raise PauliError("coefficients must be finite")
        mask = (1 << n) - 1
        if np.any(xs & ~mask) or np.any(zs & ~mask) or np.any(xs < 0) or np.any(zs < 0):
            raise PauliError("term bits exceed the qubit count")
        ident = (xs == 0) & (zs == 0)
        constant = float(constant + coeffs[ident].sum())
        xs, zs, coeffs = xs[~ident], zs[~ident], coeffs[~ident]
        if len(xs):
            keys = np.stack([xs, zs], axis=1)
            uniq, inv = np.unique(keys, axis=0, return_inverse=True)
            merged = np.zeros(len(uniq))
            np.add.at(merged, inv.ravel(), coeffs)
            keep = np.abs(merged) >= drop_tol
            xs, zs, coeffs = uniq[keep, 0].copy(), uniq[keep, 1].copy(), merged[keep]
        self.n = n
        self.xs = xs
        self.zs = zs
        self.coeffs = coeffs
        self.constant = constant
        self._matrix_cache = None
        for arr in (self.xs, self.zs, self.coeffs):
            arr.setflags(write=False)

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[tuple[float, PauliString]], constant: float = 0.0) -> "PauliSum":
        """Build from ``(coefficient, pauli)`` pairs; phases are folded into the coefficient.

        Raises ``PauliError`` when a term is not Hermitian with a real coefficient.
        """
        xs, zs, cs = [], [], []
        for coeff, p in terms:
            if p.n != n:
                raise PauliError(f"term on {p.n} qubits in a {n}-qubit sum")
            _, factor = p.letters()
            if factor.imag != 0:
                raise PauliError(f"term {p!r} is anti-Hermitian")
            xs.append(p.x)
            zs.append(p.z)
            cs.append(float(coeff) * factor.real)
        return cls(n, xs, zs, cs, constant)

    @classmethod
    def from_labels(cls, n: int, labels: Iterable[tuple[str, float]], constant: float = 0.0) -> "PauliSum":
        terms = []
        for text, coeff in labels:
            p = parse_pauli(text)
            if p.n != n:
                raise PauliError(f"Pauli string {text!r} has length {p.n}, expected {n}")
            terms.append((coeff, p))
        return cls.from_terms(n, terms, constant)

    def __len__(self) -> int:
        return len(self.coeffs)

    def paulis(self) -> Iterator[PauliString]:
        for x, z in zip(self.xs, self.zs):
            x, z = int(x), int(z)
            yield PauliString(self.n, x, z, 3 * popcount(x & z))

    def terms(self) -> Iterator[tuple[float, PauliString]]:
        return zip(self.coeffs.tolist(), self.paulis())

    def labels(self) -> list[tuple[str, float]]:
        return [(p.letters()[0], c) for c, p in self.terms()]

    def phases(self) -> np.ndarray:
        """Binary-symplectic phase ``(-i)**#Y`` of every stored term."""
        n_y = np.bitwise_count(self.xs & self.zs).astype(np.int64)
        return np.array(_PHASES, dtype=complex)[(3 * n_y) % 4]

    def y_counts(self) -> np.ndarray:
        return np.bitwise_count(self.xs & self.zs).astype(np.int64)

    def is_real(self) -> bool:
        """True when every term has an even number of Y factors."""
        return bool(np.all(self.y_counts() % 2 == 0))

    def key_multiset(self) -> list[tuple[int, int, float]]:
        return sorted(zip(self.xs.tolist(), self.zs.tolist(), self.coeffs.tolist()))

    def scaled(self, signs: np.ndarray) -> "PauliSum":
        return PauliSum(self.n, self.xs, self.zs, self.coeffs * signs, self.constant)

    def __repr__(self) -> str:
        return f"PauliSum(n={self.n}, terms={len(self)}, constant={self.constant:.6g})"


def apply_hf_frame(h: PauliSum, frame: HfFrame) -> PauliSum:
    """Return ``X^f H X^f`` so that the reference state ``|f>`` becomes ``|0...0>``."""
    if frame.n != h.n:
        raise PauliError(f"hf_occupation has length {frame.n}, Hamiltonian has {h.n} qubits")
    f = frame.bits
    signs = np.where(np.bitwise_count(h.zs & f) % 2 == 1, -1.0, 1.0)
    return h.scaled(signs)


def hf_energy(h: PauliSum) -> float:
    """``<0...0|H|0...0>``: constant plus the diagonal (x = 0) terms."""
    diag = h.xs == 0
    return float(h.constant + h.coeffs[diag].sum())


def basis_energy(h: PauliSum, bits: int) -> float:
    """Diagonal element ``<b|H|b>`` for a computational-basis state."""
    diag = h.xs == 0
    signs = np.where(np.bitwise_count(h.zs[diag] & bits) % 2 == 1, -1.0, 1.0)
    return float(h.constant + (h.coeffs[diag] * signs).sum())
