"""Hamiltonian files, engineered-problem artifacts, and provenance."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, gf2
from .clifford import CliffordTableau, TableauError
from .engine import EngineeredProblem
from .hea import HeaTemplate, TemplateError
from .pauli import HfFrame, PauliError, PauliSum, parse_pauli

ARTIFACT_KIND = "chemclifford.engineered-problem"


class ValidationError(ValueError):
    """Input document is malformed; the message names the offending field."""


@dataclass
class HamiltonianFile:
    h: PauliSum
    occupation: str
    metadata: dict = field(default_factory=dict)
    digest: str = ""
    path: str = ""

    @property
    def n(self) -> int:
        return self.h.n

    @property
    def frame(self) -> HfFrame:
        return HfFrame(self.occupation)

    @property
    def e_fci(self) -> float | None:
        return self.metadata.get("e_fci")

    @property
    def e_hf(self) -> float | None:
        return self.metadata.get("e_hf")


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _read(path) -> tuple[bytes, str]:
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read file ({exc.strerror or exc})") from None
    return data, sha256_bytes(data)


def _decode(data: bytes, path) -> dict:
    try:
        doc = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ValidationError(f"{path}: not UTF-8 text ({exc})") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: top level must be an object")
    return doc


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"{where}: expected a number, got {type(v).__name__}")
    v = float(v)
    if not np.isfinite(v):
        raise ValidationError(f"{where}: value is not finite")
    return v


def parse_hamiltonian(doc: dict, source: str = "<input>", require_real: bool = False) -> HamiltonianFile:
    n = doc.get("n_qubits")
    if isinstance(n, bool) or not isinstance(n, int):
        raise ValidationError(f"{source}: field 'n_qubits' must be an integer")
    if not 1 <= n <= 63:
        raise ValidationError(f"{source}: field 'n_qubits' = {n} out of range [1, 63]")
    terms = doc.get("terms")
    if not isinstance(terms, list):
        raise ValidationError(f"{source}: field 'terms' must be a list")
    pairs = []
    for i, t in enumerate(terms):
        where = f"{source}: terms[{i}]"
        if not isinstance(t, dict):
            raise ValidationError(f"{where}: expected an object with 'pauli' and 'coeff'")
        label = t.get("pauli")
        if not isinstance(label, str):
            raise ValidationError(f"{where}.pauli: missing or not a string")
        if len(label) != n:
            raise ValidationError(f"{where}.pauli: {label!r} has length {len(label)}, expected {n}")
        try:
            p = parse_pauli(label)
        except PauliError as exc:
            raise ValidationError(f"{where}.pauli: {exc}") from None
        if require_real and p.n_y % 2:
            raise ValidationError(f"{where}.pauli: {label!r} has an odd number of Y factors (complex Hamiltonian)")
        pairs.append((label, _number(t.get("coeff"), f"{where}.coeff")))
    constant = _number(doc.get("constant", 0.0), f"{source}: constant")
    occ = doc.get("hf_occupation")
    if not isinstance(occ, str) or len(occ) != n or set(occ) - {"0", "1"}:
        raise ValidationError(f"{source}: field 'hf_occupation' must be a 0/1 string of length {n}")
    meta = doc.get("metadata", {})
    if not isinstance(meta, dict):
        raise ValidationError(f"{source}: field 'metadata' must be an object")
    for key in ("e_hf", "e_fci"):
        if key in meta:
            meta[key] = _number(meta[key], f"{source}: metadata.{key}")
    h = PauliSum.from_labels(n, pairs, constant)
    return HamiltonianFile(h, occ, meta, path=source)


def load_hamiltonian(path, require_real: bool = False) -> HamiltonianFile:
    data, digest = _read(path)
    hf = parse_hamiltonian(_decode(data, path), str(path), require_real)
    hf.digest = digest
    return hf


def hamiltonian_document(h: PauliSum, occupation: str, metadata: dict | None = None) -> dict:
    doc = {
        "n_qubits": h.n,
        "terms": [{"pauli": lab, "coeff": c} for lab, c in h.labels()],
        "hf_occupation": occupation,
        "constant": h.constant,
    }
    if metadata:
        doc["metadata"] = dict(metadata)
    return doc


def save_hamiltonian(path, h: PauliSum, occupation: str, metadata: dict | None = None) -> None:
    write_text(path, dumps(hamiltonian_document(h, occupation, metadata)))


# ---------------------------------------------------------------------------
# deterministic serialization


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, shortest round-trip floats, trailing newline."""
    return json.dumps(_plain(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_text(path, text: str) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    tmp = p.with_name(p.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(p)


def provenance(input_digest: str, config: dict, seed) -> dict:
    return {"tool": "chemclifford", "version": __version__, "input_sha256": input_digest, "config": config, "seed": seed}


# ---------------------------------------------------------------------------
# tableaux and artifacts


def tableau_to_dict(t: CliffordTableau) -> dict:
    xl, zl = t.labels()
    return {"n": t.n, "x_images": xl, "z_images": zl}


def tableau_from_dict(d: dict, where: str = "tableau") -> CliffordTableau:
    try:
        t = CliffordTableau.from_labels(d["x_images"], d["z_images"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{where}: missing field {exc}") from None
    except (PauliError, TableauError) as exc:
        raise ValidationError(f"{where}: {exc}") from None
    if t.n != d.get("n", t.n):
        raise ValidationError(f"{where}: n does not match the images")
    return t


def problem_to_dict(p: EngineeredProblem, metadata: dict | None = None) -> dict:
    t = p.template
    return {
        "kind": ARTIFACT_KIND,
        "n_qubits": t.n,
        "template": {"n": t.n, "layers": t.p, "rotation_axes": list(t.rotation_axes), "clifford_slots": list(t.clifford_slots)},
        "h_prime": hamiltonian_document(p.h_prime, "0" * t.n),
        "u_chem": tableau_to_dict(p.u_chem),
        "u_c": tableau_to_dict(p.u_c),
        "m": ["".join(map(str, r)) for r in p.m.bits.tolist()],
        "s": p.s,
        "slots": p.slots,
        "reward": p.reward,
        "reward_max": p.reward_max,
        "reward_bound": p.reward_bound,
        "gradients": p.gradients,
        "delta": p.delta,
        "zero_grad_mask": p.zero_grad_mask,
        "zero_grad_ratio": p.zero_grad_ratio,
        "hf_energy": p.hf_energy,
        "hf_occupation": p.hf_occupation,
        "sa_iterations": p.sa_iterations,
        "sa_trace": p.sa_trace,
        "metadata": dict(metadata or {}),
        "provenance": p.provenance,
    }


def problem_from_dict(d: dict, source: str = "artifact") -> tuple[EngineeredProblem, dict]:
    if d.get("kind") != ARTIFACT_KIND:
        raise ValidationError(f"{source}: not an engineered-problem artifact (field 'kind')")
    try:
        td = d["template"]
        template = HeaTemplate(int(td["n"]), int(td["layers"]), tuple(td["rotation_axes"]), tuple(int(v) for v in td["clifford_slots"]))
        hp = parse_hamiltonian(d["h_prime"], f"{source}: h_prime").h
        m = gf2.BitMatrix(np.array([[int(c) for c in row] for row in d["m"]], dtype=np.uint8))
        prob = EngineeredProblem(
            h_prime=hp,
            u_chem=tableau_from_dict(d["u_chem"], f"{source}: u_chem"),
            u_c=tableau_from_dict(d["u_c"], f"{source}: u_c"),
            m=m,
            s=np.array(d["s"], dtype=np.int64),
            slots=np.array(d["slots"], dtype=np.int64),
            template=template,
            reward=float(d["reward"]),
            reward_max=float(d["reward_max"]),
            reward_bound=float(d["reward_bound"]),
            gradients=np.array(d["gradients"], dtype=np.float64),
            delta=np.array(d["delta"], dtype=bool),
            hf_energy=float(d["hf_energy"]),
            hf_occupation=str(d["hf_occupation"]),
            sa_trace=np.array(d["sa_trace"], dtype=np.float64),
            sa_iterations=int(d["sa_iterations"]),
            provenance=dict(d.get("provenance", {})),
        )
    except KeyError as exc:
        raise ValidationError(f"{source}: missing field {exc}") from None
    except (TypeError, ValueError, TemplateError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"{source}: {exc}") from None
    if len(prob.gradients) != template.n_params:
        raise ValidationError(f"{source}: gradients length does not match the template")
    return prob, dict(d.get("metadata", {}))


def save_problem(path, p: EngineeredProblem, metadata: dict | None = None) -> str:
    text = dumps(problem_to_dict(p, metadata))
    write_text(path, text)
    return text


def load_problem(path) -> tuple[EngineeredProblem, dict]:
    data, _ = _read(path)
    return problem_from_dict(_decode(data, path), str(path))
