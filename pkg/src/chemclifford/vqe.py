"""VQE minimization and multi-trial statistics."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .engine import ZERO_GRAD_TOL, EngineeredProblem, SaConfig, engineer
from .hea import HeaTemplate, build_template
from .pauli import HfFrame, PauliSum, apply_hf_frame, hf_energy
from .sim import Circuit

log = logging.getLogger(__name__)

CHEMICAL_ACCURACY = 1.6e-3


class VqeError(RuntimeError):
    """The objective produced a non-finite value."""


@dataclass(frozen=True)
class VqeOptions:
    gtol: float = 1e-7
    ftol: float = 1e-12
    maxiter: int = 10000
    maxcor: int = 10
    freeze: np.ndarray | None = None  # True = held at its initial value


@dataclass
class VqeResult:
    final_energy: float
    error_vs_fci: float | None
    iterations: int
    energy_trace: list
    final_params: np.ndarray
    seed: int | None
    wall_time: float
    n_evaluations: int = 0
    converged: bool = True
    message: str = ""

    @property
    def first_energy(self) -> float:
        return self.energy_trace[0]


def _unpack(problem) -> tuple[PauliSum, HeaTemplate]:
    if isinstance(problem, EngineeredProblem):
        return problem.h_prime, problem.template
    h, t = problem
    return h, t


def minimize(problem, init=None, options: VqeOptions = VqeOptions(), e_ref: float | None = None, seed: int | None = None) -> VqeResult:
    """L-BFGS-B on the simulated energy with adjoint gradients.

    ``problem`` is an EngineeredProblem or an ``(h, template)`` pair. The
    default start is ``theta = 0``. ``energy_trace[0]`` is the energy at the
    start and each further entry the energy after an accepted iteration.
    """
    t0 = time.perf_counter()
    h, t = _unpack(problem)
    circ = Circuit.from_template(t)
    x0 = np.zeros(t.n_params) if init is None else np.array(init, dtype=np.float64)
    if x0.shape != (t.n_params,):
        raise ValueError(f"init has length {x0.size}, template needs {t.n_params}")
    free = np.ones(t.n_params, dtype=bool)
    if options.freeze is not None:
        freeze = np.asarray(options.freeze, dtype=bool)
        if freeze.shape != free.shape:
            raise ValueError("freeze mask length does not match the parameter count")
        free = ~freeze
    n_eval = 0
    full = x0.copy()

    def fun(y):
        nonlocal n_eval
        n_eval += 1
        full[free] = y
        e, g = circ.energy_and_gradient(full, h)
        if not np.isfinite(e) or not np.all(np.isfinite(g)):
            raise VqeError("non-finite energy or gradient")
        return e, g[free]

    e0, _ = fun(x0[free])
    trace = [e0]
    if not free.any():
        return VqeResult(e0, None if e_ref is None else e0 - e_ref, 0, trace, x0, seed, time.perf_counter() - t0, n_eval)

    def callback(intermediate_result):
        trace.append(float(intermediate_result.fun))

    res = _scipy_minimize(
        fun,
        x0[free],
        jac=True,
        method="L-BFGS-B",
        callback=callback,
        options={"maxcor": options.maxcor, "gtol": options.gtol, "ftol": options.ftol, "maxiter": options.maxiter, "maxfun": 10 * options.maxiter},
    )
    final = x0.copy()
    final[free] = res.x
    e = float(res.fun)
    if not res.success:
        log.info("optimizer stopped: %s", res.message)
    return VqeResult(
        final_energy=e,
        error_vs_fci=None if e_ref is None else e - e_ref,
        iterations=int(res.nit),
        energy_trace=trace,
        final_params=final,
        seed=seed,
        wall_time=time.perf_counter() - t0,
        n_evaluations=n_eval,
        converged=bool(res.success),
        message=str(res.message),
    )


# ---------------------------------------------------------------------------
# trials


@dataclass
class TrialRecord:
    index: int
    seed: int
    mode: str
    reward: float
    reward_max: float
    first_energy: float
    final_energy: float
    error: float
    iterations: int
    wall_time: float
    zero_grad_ratio: float
    sa_iterations: int = 0
    final_params: np.ndarray | None = None

    def row(self) -> dict:
        return {
            "trial": self.index,
            "seed": self.seed,
            "mode": self.mode,
            "reward": self.reward,
            "reward_max": self.reward_max,
            "first_energy": self.first_energy,
            "final_energy": self.final_energy,
            "error": self.error,
            "iterations": self.iterations,
            "sa_iterations": self.sa_iterations,
            "zero_grad_ratio": self.zero_grad_ratio,
            "wall_time": self.wall_time,
        }


@dataclass
class TrialStats:
    mode: str
    min_error: float
    mean_abs_error: float
    max_error: float
    avg_iterations: float
    zero_grad_ratio: float
    e_ref: float
    hf_error: float
    records: list = field(default_factory=list)

    @property
    def n_trials(self) -> int:
        return len(self.records)

    @classmethod
    def from_records(cls, mode: str, records: list, e_ref: float, hf_error: float) -> "TrialStats":
        err = np.array([r.error for r in records])
        return cls(
            mode=mode,
            min_error=float(err.min()),
            mean_abs_error=float(np.mean(np.abs(err))),
            max_error=float(err.max()),
            avg_iterations=float(np.mean([r.iterations for r in records])),
            zero_grad_ratio=float(np.mean([r.zero_grad_ratio for r in records])),
            e_ref=e_ref,
            hf_error=hf_error,
            records=list(records),
        )

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "n_trials": self.n_trials,
            "min_error": self.min_error,
            "mean_abs_error": self.mean_abs_error,
            "max_error": self.max_error,
            "avg_iterations": self.avg_iterations,
            "zero_grad_ratio": self.zero_grad_ratio,
            "e_ref": self.e_ref,
            "hf_error": self.hf_error,
        }


def trial_seeds(base_seed: int, n_trials: int) -> list[int]:
    """Independent per-trial seeds derived from ``base_seed`` by child index."""
    ss = np.random.SeedSequence(base_seed)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in ss.spawn(n_trials)]


@dataclass(frozen=True)
class TrialSpec:
    """Everything one trial needs; picklable for worker processes."""

    h: PauliSum
    occupation: str
    template: HeaTemplate
    mode: str
    sa: SaConfig
    e_ref: float
    options: VqeOptions
    freeze_zero_grad: bool = False
    random_sa_budget: bool = False
    keep_params: bool = False


def run_trial(spec: TrialSpec, index: int, seed: int) -> TrialRecord:
    t0 = time.perf_counter()
    if spec.mode == "chem":
        sa = spec.sa
        iters = sa.resolved_iterations(spec.template)
        if spec.random_sa_budget:
            rng = np.random.default_rng([seed, 1])
            iters = int(np.clip(np.round(np.exp(rng.uniform(0.0, np.log(iters)))), 1, iters))
        cfg = SaConfig(iterations=iters, t_start=sa.t_start, t_end=sa.t_end, seed=seed)
        prob = engineer(spec.h, HfFrame(spec.occupation), spec.template, cfg)
        opts = spec.options
        if spec.freeze_zero_grad:
            opts = VqeOptions(opts.gtol, opts.ftol, opts.maxiter, opts.maxcor, prob.zero_grad_mask)
        res = minimize(prob, None, opts, spec.e_ref, seed)
        reward, reward_max, zr, sa_iters = prob.reward, prob.reward_max, prob.zero_grad_ratio, prob.sa_iterations
    elif spec.mode == "baseline":
        t = spec.template
        rng = np.random.default_rng(seed)
        init = rng.uniform(0.0, 2.0 * np.pi, t.n_params)
        res = minimize((spec.h, t), init, spec.options, spec.e_ref, seed)
        reward = reward_max = float("nan")
        zr, sa_iters = float("nan"), 0
    else:
        raise ValueError(f"unknown mode {spec.mode!r}")
    return TrialRecord(
        index=index,
        seed=seed,
        mode=spec.mode,
        reward=reward,
        reward_max=reward_max,
        first_energy=res.first_energy,
        final_energy=res.final_energy,
        error=res.final_energy - spec.e_ref,
        iterations=res.iterations,
        wall_time=time.perf_counter() - t0,
        zero_grad_ratio=zr,
        sa_iterations=sa_iters,
        final_params=res.final_params if spec.keep_params else None,
    )


def _run_star(args):
    return run_trial(*args)


def baseline_template(n: int, p: int) -> HeaTemplate:
    """Fixed R_y ansatz with identity slots used by the random-start baseline."""
    return build_template(n, p, ("Y",))


def run_trials(
    h: PauliSum,
    occupation: str,
    n_layers: int,
    mode: str = "chem",
    n_trials: int = 1,
    base_seed: int = 0,
    *,
    axes=("Y", "Z"),
    sa: SaConfig = SaConfig(),
    e_ref: float | None = None,
    options: VqeOptions = VqeOptions(),
    freeze_zero_grad: bool = False,
    random_sa_budget: bool = False,
    keep_params: bool = False,
    workers: int = 1,
) -> TrialStats:
    """Independent trials in ``chem`` or ``baseline`` mode.

    ``e_ref`` defaults to the exact ground energy. Results depend only on
    the inputs and ``base_seed``, not on ``workers``.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    if mode not in ("chem", "baseline"):
        raise ValueError(f"unknown mode {mode!r}")
    if e_ref is None:
        from .sim import ground_energy

        e_ref = ground_energy(h)
    if mode == "chem":
        template = build_template(h.n, n_layers, axes)
    else:
        template = baseline_template(h.n, n_layers)
    hf_err = hf_energy(apply_hf_frame(h, HfFrame(occupation))) - e_ref
    spec = TrialSpec(h, occupation, template, mode, sa, e_ref, options, freeze_zero_grad, random_sa_budget, keep_params)
    jobs = [(spec, i, s) for i, s in enumerate(trial_seeds(base_seed, n_trials))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_star, jobs))
    else:
        records = [_run_star(j) for j in jobs]
    return TrialStats.from_records(mode, records, e_ref, hf_err)


# ---------------------------------------------------------------------------
# reports


@dataclass
class GradientHistogram:
    values: np.ndarray  # |g_k|
    delta: np.ndarray
    zero_ratio: float
    threshold: float = ZERO_GRAD_TOL

    def counts(self, edges=None) -> tuple[np.ndarray, np.ndarray]:
        """Histogram over log-spaced bins; values below the threshold land in the first bin."""
        if edges is None:
            edges = np.concatenate([[0.0], np.logspace(-6, 1, 29)])
        return np.histogram(np.clip(self.values, 0.0, edges[-1]), bins=edges)

    def rows(self) -> list[dict]:
        return [{"k": k, "abs_g": float(v), "delta": bool(d)} for k, (v, d) in enumerate(zip(self.values, self.delta))]


def gradient_histogram(problem: EngineeredProblem) -> GradientHistogram:
    vals = np.abs(problem.gradients)
    ratio = float(np.mean(vals < ZERO_GRAD_TOL)) if len(vals) else 1.0
    return GradientHistogram(vals, problem.delta.copy(), ratio)


def parameter_cluster_report(results, tol: float = 0.05) -> dict:
    """Fraction of parameters within ``tol`` of a multiple of pi/2."""
    params = [np.asarray(r.final_params if hasattr(r, "final_params") else r, dtype=float) for r in results]
    if not params:
        raise ValueError("need at least one result")
    theta = np.concatenate([p.ravel() for p in params])
    q = np.pi / 2
    dist = np.abs(theta - q * np.round(theta / q))
    return {
        "tolerance": tol,
        "n_params": int(theta.size),
        "fraction": float(np.mean(dist <= tol)) if theta.size else 1.0,
        "random_floor": 4 * tol / np.pi,
    }
