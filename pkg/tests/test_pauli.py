import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chemclifford.pauli import (
    HfFrame,
    PauliError,
    PauliString,
    PauliSum,
    apply_hf_frame,
    basis_energy,
    hf_energy,
    identity,
    multiply,
    parse_pauli,
    vacuum_expectation,
)
from conftest import LETTER, dense_letters, dense_pauli, dense_sum, random_even_y_hamiltonian

PHASE = {1: 0, 1j: 1, -1: 2, -1j: 3}


def labels(n):
    return ["".join(t) for t in itertools.product("IXYZ", repeat=n)]


# parsing


@pytest.mark.parametrize(
    "text, x, z, phase",
    [("Z", 0b0, 0b1, 1), ("Y", 0b1, 0b1, -1j), ("XY", 0b11, 0b10, -1j), ("X", 1, 0, 1)],
)
def test_parse_examples(text, x, z, phase):
    p = parse_pauli(text)
    assert (p.x, p.z, p.phase) == (x, z, phase)


def test_parse_bits_are_qubit_ascending():
    # "XY": qubit 0 is X, qubit 1 is Y
    p = parse_pauli("XY")
    assert p.x_array().tolist() == [1, 1]
    assert p.z_array().tolist() == [0, 1]


def test_parse_sign_and_prefix():
    assert parse_pauli("Z", sign=-1).phase == -1
    assert parse_pauli("-Z").phase == -1
    assert parse_pauli("iZ").phase == 1j
    assert parse_pauli("-iY").phase == -1  # -i * (-i ZX)


@pytest.mark.parametrize("bad", ["", "XQ", "xz", "+"])
def test_parse_errors(bad):
    with pytest.raises(PauliError):
        parse_pauli(bad)


def test_parse_bad_sign():
    with pytest.raises(PauliError):
        parse_pauli("X", sign=2)


@pytest.mark.parametrize("label", labels(2))
def test_letter_strings_match_dense(label):
    assert np.allclose(dense_pauli(parse_pauli(label)), dense_letters(label))


def test_letters_roundtrip():
    for lab in labels(3):
        p = parse_pauli(lab)
        text, factor = p.letters()
        assert text == lab and factor == 1
    p = parse_pauli("-iXZ")
    assert p.letters() == ("XZ", -1j)


def test_hermiticity_rule():
    for lab in labels(2):
        p = parse_pauli(lab)
        assert p.is_hermitian()
        q = PauliString(p.n, p.x, p.z, p.k + 1)
        assert not q.is_hermitian()
        assert np.allclose(dense_pauli(p), dense_pauli(p).conj().T)


# products


@pytest.mark.parametrize(
    "a, b, x, z, phase",
    [("X", "Z", 1, 1, -1), ("Z", "Z", 0, 0, 1), ("X", "Y", 0, 1, 1j)],
)
def test_multiply_examples(a, b, x, z, phase):
    c = multiply(parse_pauli(a), parse_pauli(b))
    assert (c.x, c.z, c.phase) == (x, z, phase)


def test_multiply_exhaustive_two_qubits():
    ps = [parse_pauli(l) for l in labels(2)]
    for a in ps:
        for b in ps:
            assert np.allclose(dense_pauli(a * b), dense_pauli(a) @ dense_pauli(b))


def test_multiply_associative():
    rng = np.random.default_rng(3)
    ls = labels(3)
    for _ in range(200):
        a, b, c = (PauliString(3, *(parse_pauli(ls[i]).x, parse_pauli(ls[i]).z), int(rng.integers(4))) for i in rng.integers(64, size=3))
        assert (a * b) * c == a * (b * c)


def test_multiply_size_mismatch():
    with pytest.raises(PauliError):
        multiply(parse_pauli("X"), parse_pauli("XX"))


def test_identity():
    assert identity(3) * parse_pauli("XYZ") == parse_pauli("XYZ")


# vacuum expectation


@pytest.mark.parametrize("p, q, value", [("Z", "Z", 1), ("X", "Y", 1j), ("X", "Z", 0)])
def test_vacuum_examples(p, q, value):
    assert vacuum_expectation(parse_pauli(p), parse_pauli(q)) == value


@pytest.mark.parametrize("n", [1, 2])
def test_vacuum_exhaustive(n):
    ps = []
    for lab in labels(n):
        base = parse_pauli(lab)
        ps += [PauliString(n, base.x, base.z, k) for k in range(4)]
    for p in ps:
        for q in ps:
            dense = (dense_pauli(p) @ dense_pauli(q))[0, 0]
            assert abs(vacuum_expectation(p, q) - dense) < 1e-12


def test_vacuum_three_qubit_hermitian():
    ps = [parse_pauli(l) for l in labels(3)]
    rng = np.random.default_rng(0)
    for i, j in rng.integers(len(ps), size=(300, 2)):
        dense = (dense_pauli(ps[i]) @ dense_pauli(ps[j]))[0, 0]
        assert abs(vacuum_expectation(ps[i], ps[j]) - dense) < 1e-12


# sums


def test_sum_merges_and_folds_identity():
    h = PauliSum.from_labels(2, [("XZ", 0.5), ("XZ", 0.25), ("II", 2.0), ("ZZ", 1e-14)], constant=1.0)
    assert len(h) == 1
    assert h.constant == 3.0
    assert h.labels() == [("XZ", 0.75)]


def test_sum_rejects_bad_terms():
    with pytest.raises(PauliError):
        PauliSum.from_labels(2, [("XYZ", 1.0)])
    with pytest.raises(PauliError):
        PauliSum.from_terms(1, [(1.0, PauliString(1, 1, 0, 1))])  # iX
    with pytest.raises(PauliError):
        PauliSum.from_labels(1, [("X", float("nan"))])


def test_sum_phase_folded_into_coefficient():
    h = PauliSum.from_terms(1, [(2.0, parse_pauli("-Z"))])
    assert h.labels() == [("Z", -2.0)]


def test_sum_dense_matches_labels():
    rng = np.random.default_rng(5)
    h = random_even_y_hamiltonian(rng, 3, 10)
    ref = h.constant * np.eye(8) + sum(c * dense_letters(lab) for lab, c in h.labels())
    assert np.allclose(dense_sum(h), ref)
    assert h.is_real()


def test_sum_relabel_roundtrip_multiset():
    rng = np.random.default_rng(8)
    h = random_even_y_hamiltonian(rng, 4, 20)
    h2 = PauliSum.from_labels(4, h.labels(), h.constant)
    assert h2.key_multiset() == h.key_multiset()


# frames


def test_hf_frame_examples():
    z = PauliSum.from_labels(1, [("Z", 1.0)])
    assert apply_hf_frame(z, HfFrame("1")).labels() == [("Z", -1.0)]
    x = PauliSum.from_labels(1, [("X", 1.0)])
    assert apply_hf_frame(x, HfFrame("1")).labels() == [("X", 1.0)]
    h = PauliSum.from_labels(2, [("ZX", 0.3), ("YY", 0.2)])
    assert apply_hf_frame(h, HfFrame("00")).key_multiset() == h.key_multiset()


def test_hf_frame_involution_and_energy():
    rng = np.random.default_rng(2)
    for _ in range(10):
        h = random_even_y_hamiltonian(rng, 4, 15)
        occ = "".join(rng.choice(["0", "1"], 4))
        f = HfFrame(occ)
        hf = apply_hf_frame(h, f)
        assert apply_hf_frame(hf, f).key_multiset() == h.key_multiset()
        assert abs(hf_energy(hf) - basis_energy(h, f.bits)) < 1e-12
        bits = f.bits
        assert abs(hf_energy(hf) - dense_sum(h)[bits, bits].real) < 1e-12


def test_hf_frame_errors():
    with pytest.raises(PauliError):
        HfFrame("012")
    with pytest.raises(PauliError):
        apply_hf_frame(PauliSum.from_labels(2, [("ZZ", 1.0)]), HfFrame("1"))


def test_hf_energy_examples():
    assert hf_energy(PauliSum.from_labels(1, [("Z", 0.5), ("X", 0.3)])) == 0.5
    assert hf_energy(PauliSum(1, [], [], [], 2.0)) == 2.0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 15), st.integers(0, 15), st.integers(0, 3)), min_size=2, max_size=2))
def test_property_product_dense(pair):
    (xa, za, ka), (xb, zb, kb) = pair
    a, b = PauliString(4, xa, za, ka), PauliString(4, xb, zb, kb)
    assert np.allclose(dense_pauli(a * b), dense_pauli(a) @ dense_pauli(b))
    assert ((a * b).k - (b * a).k) % 4 in (0, 2)
