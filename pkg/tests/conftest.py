"""Shared dense-matrix oracles and instance generators."""

from __future__ import annotations

from functools import reduce
from pathlib import Path

import numpy as np
import pytest

from chemclifford.pauli import PauliString, PauliSum

DATA = Path(__file__).resolve().parents[1] / "data"
MOLECULES = sorted(p.stem for p in DATA.glob("*.json"))

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
H2 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S2 = np.diag([1, 1j])
LETTER = {"I": I2, "X": X2, "Y": Y2, "Z": Z2}


def kron_qubits(mats):
    """Kronecker product with qubit 0 as the least significant index."""
    return reduce(np.kron, list(mats)[::-1])


def dense_letters(label: str) -> np.ndarray:
    return kron_qubits(LETTER[c] for c in label)


def dense_pauli(p: PauliString) -> np.ndarray:
    """Oracle from the raw (x, z, k) fields: i^k prod Z^z X^x."""
    mats = []
    for q in range(p.n):
        m = I2
        if (p.z >> q) & 1:
            m = Z2 @ m if not (p.x >> q) & 1 else Z2 @ X2
        elif (p.x >> q) & 1:
            m = X2
        mats.append(m)
    return (1j**p.k) * kron_qubits(mats)


def dense_sum(h: PauliSum) -> np.ndarray:
    out = h.constant * np.eye(1 << h.n, dtype=complex)
    for c, p in h.terms():
        out = out + c * dense_pauli(p)
    return out


def embed_1q(n: int, q: int, u: np.ndarray) -> np.ndarray:
    return kron_qubits(u if j == q else I2 for j in range(n))


def cnot_dense(n: int, c: int, t: int) -> np.ndarray:
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    for b in range(dim):
        m[b ^ (((b >> c) & 1) << t), b] = 1
    return m


def dense_word(n: int, word) -> np.ndarray:
    """Unitary of a time-ordered gate word."""
    u = np.eye(1 << n, dtype=complex)
    xmat = X2
    zmat = Z2
    for g in word:
        name, *qs = g
        if name == "cnot":
            gm = cnot_dense(n, qs[0], qs[1])
        else:
            gm = embed_1q(n, qs[0], {"h": H2, "s": S2, "x": xmat, "z": zmat}[name])
        u = gm @ u
    return u


def random_word(rng, n: int, length: int):
    word = []
    for _ in range(length):
        kind = rng.choice(["h", "s", "x", "cnot"] if n > 1 else ["h", "s", "x"])
        if kind == "cnot":
            c, t = rng.choice(n, 2, replace=False)
            word.append(("cnot", int(c), int(t)))
        else:
            word.append((str(kind), int(rng.integers(n))))
    return word


def random_even_y_hamiltonian(rng, n: int, n_terms: int = 12, constant: float | None = None) -> PauliSum:
    """Random real (even-Y) Hermitian Pauli sum."""
    labels = []
    while len(labels) < n_terms:
        lab = "".join(rng.choice(list("IXYZ"), n))
        if lab.count("Y") % 2 == 0 and set(lab) != {"I"}:
            labels.append((lab, float(rng.normal())))
    c = float(rng.normal()) if constant is None else constant
    return PauliSum.from_labels(n, labels, c)


def align_phase(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``b`` rotated by the global phase that best matches it to ``a``."""
    ov = np.vdot(b, a)
    return b * (ov / abs(ov)) if abs(ov) > 1e-14 else b


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------------------
# acceptance reporting: one PASS/FAIL line per criterion in the terminal summary

_CRITERIA: dict[str, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.skipped or not (rep.when == "call" or rep.failed):
        return
    entry = _CRITERIA.setdefault(mark.args[0], [True, []])
    entry[0] = entry[0] and rep.passed
    entry[1].extend(str(v) for k, v in rep.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_CRITERIA, key=lambda c: int(c[1:])):
        ok, details = _CRITERIA[cid]
        terminalreporter.write_line(f"{cid} {'PASS' if ok else 'FAIL'} {'; '.join(details)}".rstrip())
