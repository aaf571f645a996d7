"""Command-line entry point: ``chemclifford <command> ...``.

Exit codes: 0 success, 2 validation error, 3 size guard, 4 internal invariant breach.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .engine import EngineeringError, SaConfig, engineer
from .hea import AXES, TemplateError, build_template, dump_circuit
from .io import (
    ValidationError,
    dumps,
    load_hamiltonian,
    load_problem,
    problem_to_dict,
    provenance,
    sha256_bytes,
    write_text,
)
from .pauli import PauliError, apply_hf_frame, hf_energy
from .sim import MAX_DENSE_QUBITS, MAX_SIM_QUBITS, SizeGuardError, exact_spectrum, ground_energy
from .vqe import CHEMICAL_ACCURACY, VqeError, VqeOptions, gradient_histogram, minimize, parameter_cluster_report, run_trials

EXIT_OK, EXIT_VALIDATION, EXIT_SIZE, EXIT_INVARIANT = 0, 2, 3, 4
MH = 1e3

log = logging.getLogger("chemclifford")


@dataclass
class RunConfig:
    input: str
    layers: int = 3
    axes: tuple = ("Y", "Z")
    trials: int = 1
    seed: int = 0
    mode: str = "chem"
    sa_iters: int | None = None
    t_start: float = 0.05
    t_end: float = 0.002
    out: str | None = None
    freeze_zero_grad: bool = False
    random_sa_budget: bool = False
    workers: int = 1

    def validate(self) -> None:
        if self.layers < 0:
            raise ValidationError(f"--layers must be >= 0, got {self.layers}")
        if self.trials < 1:
            raise ValidationError(f"--trials must be >= 1, got {self.trials}")
        if self.sa_iters is not None and self.sa_iters < 1:
            raise ValidationError(f"--sa-iters must be >= 1, got {self.sa_iters}")
        if not 0 < self.t_end <= self.t_start:
            raise ValidationError("temperatures must satisfy 0 < --t-end <= --t-start")
        if not self.axes or any(a not in AXES for a in self.axes):
            raise ValidationError(f"--axes must be letters from {''.join(AXES)}, got {''.join(self.axes)!r}")
        if self.mode not in ("chem", "baseline", "both"):
            raise ValidationError(f"--mode must be chem, baseline or both, got {self.mode!r}")
        if self.workers < 1:
            raise ValidationError("--workers must be >= 1")

    def sa(self) -> SaConfig:
        return SaConfig(self.sa_iters, self.t_start, self.t_end, self.seed)

    def record(self) -> dict:
        d = asdict(self)
        d["axes"] = "".join(self.axes)
        d.pop("out")
        d.pop("workers")
        return d


def _config(args, **extra) -> RunConfig:
    cfg = RunConfig(
        input=args.input,
        layers=getattr(args, "layers", 3),
        axes=tuple(getattr(args, "axes", "YZ").upper()),
        trials=getattr(args, "trials", 1),
        seed=getattr(args, "seed", 0),
        mode=getattr(args, "mode", "chem"),
        sa_iters=getattr(args, "sa_iters", None),
        t_start=getattr(args, "t_start", 0.05),
        t_end=getattr(args, "t_end", 0.002),
        out=getattr(args, "out", None),
        freeze_zero_grad=getattr(args, "freeze_zero_grad", False),
        random_sa_budget=getattr(args, "random_sa_budget", False),
        workers=getattr(args, "workers", 1),
        **extra,
    )
    cfg.validate()
    return cfg


def _mh(e: float) -> str:
    mark = " (< 1.6 mH)" if abs(e) < CHEMICAL_ACCURACY else ""
    return f"{e:+.10f} Ha = {e * MH:+.6f} mH{mark}"


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(args) -> int:
    hf = load_hamiltonian(args.input)
    if hf.n > MAX_DENSE_QUBITS:
        raise SizeGuardError(f"{hf.n} qubits exceeds the dense limit of {MAX_DENSE_QUBITS}")
    ev = exact_spectrum(hf.h)
    shown = ev if args.count is None else ev[: args.count]
    print(", ".join(f"{v:.12g}" for v in shown))
    out = {"eigenvalues": ev, "provenance": provenance(hf.digest, {"command": "spectrum"}, None)}
    e_hf = hf_energy(apply_hf_frame(hf.h, hf.frame))
    print(f"hf energy    {e_hf:.12f}")
    if hf.e_fci is not None:
        d = ev[0] - hf.e_fci
        out["dev_e_fci"] = d
        print(f"min - e_fci  {_mh(d)}")
    if hf.e_hf is not None:
        d = e_hf - hf.e_hf
        out["dev_e_hf"] = d
        print(f"hf - e_hf    {_mh(d)}")
    if args.out:
        write_text(args.out, dumps(out))
    return EXIT_OK


def _engineer(cfg: RunConfig):
    hf = load_hamiltonian(cfg.input, require_real=True)
    tmpl = build_template(hf.n, cfg.layers, cfg.axes)
    prob = engineer(hf.h, hf.frame, tmpl, cfg.sa())
    prob.provenance = provenance(hf.digest, cfg.record(), cfg.seed)
    return hf, prob


def cmd_engineer(args) -> int:
    cfg = _config(args)
    t0 = time.perf_counter()
    hf, prob = _engineer(cfg)
    wall = time.perf_counter() - t0
    text = dumps(problem_to_dict(prob, hf.metadata))
    if cfg.out:
        write_text(cfg.out, text)
    print(f"R            {prob.reward:.12g}")
    print(f"R_max        {prob.reward_max:.12g}")
    print(f"R/R_max      {prob.reward / prob.reward_max if prob.reward_max else 0.0:.6f}")
    print(f"hf energy    {prob.hf_energy:.12f}")
    print(f"zero-grad    {prob.zero_grad_ratio:.4f} of {len(prob.gradients)} parameters")
    print(f"wall time    {wall:.3f} s")
    return EXIT_OK


def cmd_vqe(args) -> int:
    prob, meta = load_problem(args.input)
    if prob.template.n > MAX_SIM_QUBITS:
        raise SizeGuardError(f"{prob.template.n} qubits exceeds the simulator limit of {MAX_SIM_QUBITS}")
    opts = VqeOptions(freeze=prob.zero_grad_mask if args.freeze_zero_grad else None)
    e_ref = meta.get("e_fci")
    res = minimize(prob, None, opts, e_ref)
    print(f"first energy {res.first_energy:.12f}")
    print(f"final energy {res.final_energy:.12f}")
    if e_ref is not None:
        print(f"error        {_mh(res.error_vs_fci)}")
    print(f"iterations   {res.iterations}")
    if args.out:
        data = Path(args.input).read_bytes()
        doc = {
            "final_energy": res.final_energy,
            "error_vs_fci": res.error_vs_fci,
            "iterations": res.iterations,
            "energy_trace": res.energy_trace,
            "final_params": res.final_params,
            "converged": res.converged,
            "provenance": provenance(sha256_bytes(data), {"command": "vqe", "freeze_zero_grad": args.freeze_zero_grad}, None),
        }
        write_text(args.out, dumps(doc))
    return EXIT_OK


def _tsv(rows: list[dict], prov: dict) -> str:
    lines = ["# provenance " + json.dumps(prov, sort_keys=True)]
    if rows:
        keys = list(rows[0])
        lines.append("\t".join(keys))
        for r in rows:
            lines.append("\t".join(repr(float(r[k])) if isinstance(r[k], float) else str(r[k]) for k in keys))
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    cfg = _config(args)
    hf = load_hamiltonian(cfg.input, require_real=True)
    if hf.n > MAX_SIM_QUBITS:
        raise SizeGuardError(f"{hf.n} qubits exceeds the simulator limit of {MAX_SIM_QUBITS}")
    e_ref = hf.e_fci if hf.e_fci is not None else ground_energy(hf.h)
    prov = provenance(hf.digest, cfg.record(), cfg.seed)
    modes = ["chem", "baseline"] if cfg.mode == "both" else [cfg.mode]
    outputs: dict[str, str] = {}
    summary = {"provenance": prov, "e_ref": e_ref, "modes": {}}
    for mode in modes:
        st = run_trials(
            hf.h, hf.occupation, cfg.layers, mode, cfg.trials, cfg.seed,
            axes=cfg.axes, sa=cfg.sa(), e_ref=e_ref,
            freeze_zero_grad=cfg.freeze_zero_grad, random_sa_budget=cfg.random_sa_budget,
            keep_params=True, workers=cfg.workers,
        )
        s = st.summary()
        if mode == "baseline":
            s["parameter_clusters"] = parameter_cluster_report(st.records)
        summary["modes"][mode] = s
        rows = [r.row() for r in st.records]
        outputs[f"trials_{mode}.tsv"] = _tsv(rows, prov)
        outputs[f"errors_{mode}.tsv"] = _tsv([{"trial": r["trial"], "error": r["error"]} for r in rows], prov)
        if mode == "chem":
            outputs["reward_error.tsv"] = _tsv([{"reward": r["reward"], "reward_max": r["reward_max"], "error": r["error"]} for r in rows], prov)
        print(f"[{mode}] trials {st.n_trials}  MIN {st.min_error * MH:.6g} mH  MAE {st.mean_abs_error * MH:.6g} mH  "
              f"max {st.max_error * MH:.6g} mH  avg iters {st.avg_iterations:.2f}  HF error {st.hf_error * MH:.6g} mH")
    if cfg.mode != "baseline":
        _, prob = _engineer(cfg)
        gh = gradient_histogram(prob)
        outputs["grad_hist.tsv"] = _tsv(gh.rows(), prov)
    outputs["summary.json"] = dumps(summary)
    # all writes happen after every trial finished
    if cfg.out:
        for name, text in outputs.items():
            write_text(Path(cfg.out) / name, text)
    else:
        sys.stdout.write(outputs["summary.json"])
    return EXIT_OK


def cmd_export_circuit(args) -> int:
    prob, _ = load_problem(args.input)
    t = prob.template
    text = dump_circuit(t.n, t.n_params, t.gates(), expand_cliffords=True)
    if args.params:
        try:
            vals = json.loads(Path(args.params).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"{args.params}: cannot read parameters ({exc})") from None
        vals = vals.get("final_params", vals) if isinstance(vals, dict) else vals
        if not isinstance(vals, list) or len(vals) != t.n_params:
            raise ValidationError(f"{args.params}: expected {t.n_params} parameter values")
        text += "".join(f"# theta {k} {float(v)!r}\n" for k, v in enumerate(vals))
    prov = json.dumps(prob.provenance, sort_keys=True)
    text = text.replace("\n", f"\n# provenance {prov}\n", 1)
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)
    n2 = sum(1 for line in text.splitlines() if line.startswith("cnot "))
    print(f"two-qubit gates {n2}", file=sys.stderr)
    return EXIT_OK


def cmd_grad_hist(args) -> int:
    prob, _ = load_problem(args.input)
    gh = gradient_histogram(prob)
    counts, edges = gh.counts()
    print(f"zero-gradient ratio {gh.zero_ratio:.4f} (|g| < {gh.threshold:g})")
    for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
        if c:
            print(f"[{lo:.3g}, {hi:.3g})\t{c}")
    if args.out:
        write_text(args.out, _tsv(gh.rows(), prob.provenance))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chemclifford", description="Clifford Hamiltonian engineering for hardware-efficient VQE.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, trials=False):
        p.add_argument("input", help="Hamiltonian file")
        p.add_argument("--layers", "-p", type=int, default=3)
        p.add_argument("--axes", default="YZ", help="rotation axes per qubit, e.g. YZ")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--sa-iters", type=int, default=None, help="default 50*N*p")
        p.add_argument("--t-start", type=float, default=0.05)
        p.add_argument("--t-end", type=float, default=0.002)
        p.add_argument("--out", default=None)
        if trials:
            p.add_argument("--trials", type=int, default=1)
            p.add_argument("--mode", default="chem", help="chem, baseline or both")
            p.add_argument("--freeze-zero-grad", action="store_true")
            p.add_argument("--random-sa-budget", action="store_true", help="log-uniform SA budget per trial")
            p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("spectrum", help="exact eigenvalues of a Hamiltonian file")
    p.add_argument("input")
    p.add_argument("--count", type=int, default=None, help="print only the lowest COUNT values")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("engineer", help="anneal Clifford slots and write an engineered-problem artifact")
    common(p)
    p.set_defaults(func=cmd_engineer)

    p = sub.add_parser("vqe", help="minimize a stored artifact from theta = 0")
    p.add_argument("input", help="artifact file")
    p.add_argument("--freeze-zero-grad", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_vqe)

    p = sub.add_parser("run", help="multi-trial benchmark with summary and plot-data tables")
    common(p, trials=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("export-circuit", help="gate listing of an artifact's ansatz with slots as H/S words")
    p.add_argument("input", help="artifact file")
    p.add_argument("--params", default=None, help="JSON list (or vqe output) of parameter values")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_export_circuit)

    p = sub.add_parser("grad-hist", help="|g_k| listing of an artifact")
    p.add_argument("input", help="artifact file")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_grad_hist)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except SizeGuardError as exc:
        print(f"error: size guard: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (EngineeringError, AssertionError) as exc:
        print(f"error: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValidationError, PauliError, TemplateError, VqeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
