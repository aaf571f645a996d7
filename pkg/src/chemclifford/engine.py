"""Clifford Hamiltonian engineering.

Given a Hamiltonian in the frame where the reference state is ``|0...0>``
and an ansatz template, find single-qubit Clifford slots and a Clifford
``U_C`` fixing ``|0...0>`` such that the initial gradients of the ansatz
energy are as large as possible, then return the transformed Hamiltonian

    H' = U_CHEM^dag H U_CHEM,      U_CHEM = U_C U_HEA(0)^dag.

At ``theta = 0`` the ansatz state has the reference energy. The derivative
with respect to rotation ``k`` is ``g_k = sum_l w_l Im <0| h'_l Q_k |0>`` with
``h'_l = U_C^dag h_l U_C``; this is nonzero only when the x-part of ``h'_l``
equals the x-part of ``Q_k``, so the search reduces to matching x-vectors
through an invertible GF(2) matrix ``M`` (``x_h' = M x_h``).
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import gf2
from ._accel import kernel
from .clifford import CliffordTableau, compose, conjugate_sum, inverse, single_qubit_table, tableau_from_xmatrix
from .hea import HeaTemplate, clifford_at_zero, compile_template, q_kernel
from .pauli import HfFrame, PauliError, PauliSum, apply_hf_frame, hf_energy, vacuum_expectation

log = logging.getLogger(__name__)

ZERO_GRAD_TOL = 1e-6


class EngineeringError(RuntimeError):
    """An internal invariant (reference-energy anchoring, reward bounds) was violated."""


# ---------------------------------------------------------------------------
# Hamiltonian grouping


@dataclass(frozen=True, eq=False)
class GroupedHamiltonian:
    """Off-diagonal terms grouped by x-vector.

    ``xs[i]`` is the packed x-vector of group ``i`` and ``weights[i]`` the
    combined signed weight ``sum_l w_l phi_l`` over its members. Groups are
    stored in greedy order: ``|w|^2`` descending, ties by ascending x word.
    ``independent`` lists, in that order, the group indices picked by a
    greedy GF(2) scan (its length is the rank ``r_h``).
    """

    n: int
    xs: np.ndarray
    weights: np.ndarray
    z_rep: np.ndarray
    diagonal_weight: float
    independent: np.ndarray

    @property
    def weights2(self) -> np.ndarray:
        return self.weights**2

    @property
    def reward_max(self) -> float:
        return float(np.sum(self.weights**2))

    @property
    def rank(self) -> int:
        return len(self.independent)

    def __len__(self) -> int:
        return len(self.xs)


def group_hamiltonian(h: PauliSum) -> GroupedHamiltonian:
    if not h.is_real():
        bad = [lab for lab, _ in h.labels() if lab.count("Y") % 2]
        raise PauliError(f"term with an odd number of Y factors: {bad[0]!r}")
    phi = h.phases().real  # (-i)**#Y, even #Y -> +-1
    signed = h.coeffs * phi
    diag = h.xs == 0
    diagonal_weight = float(signed[diag].sum())
    off_x = h.xs[~diag]
    off_w = signed[~diag]
    off_z = h.zs[~diag]
    if len(off_x):
        ux, first, inv = np.unique(off_x, return_index=True, return_inverse=True)
        w = np.zeros(len(ux))
        np.add.at(w, inv.ravel(), off_w)
        z_rep = off_z[first]
        keep = w != 0.0
        ux, w, z_rep = ux[keep], w[keep], z_rep[keep]
        order = np.lexsort((ux, -(w**2)))
        ux, w, z_rep = ux[order], w[order], z_rep[order]
    else:
        ux = np.zeros(0, dtype=np.int64)
        w = np.zeros(0)
        z_rep = np.zeros(0, dtype=np.int64)
    indep = gf2.select_independent_words(ux)
    for arr in (ux, w, z_rep, indep):
        arr.setflags(write=False)
    return GroupedHamiltonian(h.n, ux.astype(np.int64), w, z_rep.astype(np.int64), diagonal_weight, indep)


# ---------------------------------------------------------------------------
# rotation-generator screening


@dataclass(frozen=True, eq=False)
class ScreenedQ:
    """Q_k that can carry a gradient: imaginary phase, first occurrence of each x-vector.

    ``params[i]`` is the parameter index of retained column ``i``; ``delta``
    flags exactly those parameters.
    """

    n: int
    xs: np.ndarray
    zs: np.ndarray
    ks: np.ndarray
    params: np.ndarray
    delta: np.ndarray

    def __len__(self) -> int:
        return len(self.xs)

    @property
    def rank(self) -> int:
        return gf2.rank_words(self.xs)

    def sorted_xs(self) -> np.ndarray:
        return np.sort(self.xs)


def _screen_arrays(qx, qz, qk):
    odd = np.flatnonzero(qk & 1)
    if len(odd) == 0:
        return odd
    _, first = np.unique(qx[odd], return_index=True)
    return odd[np.sort(first)]


def screen_q(qs, n: int | None = None) -> ScreenedQ:
    """Screen a Q list given as PauliStrings or as ``(qx, qz, qk)`` arrays."""
    if isinstance(qs, tuple) and len(qs) == 3 and isinstance(qs[0], np.ndarray):
        qx, qz, qk = (np.asarray(a, dtype=np.int64) for a in qs)
        if n is None:
            raise ValueError("qubit count required for array input")
    else:
        qs = list(qs)
        n = qs[0].n if qs else (n or 1)
        qx = np.array([q.x for q in qs], dtype=np.int64)
        qz = np.array([q.z for q in qs], dtype=np.int64)
        qk = np.array([q.k for q in qs], dtype=np.int64)
    keep = _screen_arrays(qx, qz, qk)
    delta = np.zeros(len(qx), dtype=bool)
    delta[keep] = True
    return ScreenedQ(n, qx[keep], qz[keep], qk[keep], keep.astype(np.int64), delta)


# ---------------------------------------------------------------------------
# reward and greedy matching


@kernel
def reward_kernel(mcols, hx, hw2, q_sorted):
    total = 0.0
    nq = q_sorted.shape[0]
    if nq == 0:
        return 0.0
    for i in range(hx.shape[0]):
        v = np.int64(0)
        x = hx[i]
        j = 0
        while x:
            if x & 1:
                v ^= mcols[j]
            x >>= 1
            j += 1
        pos = np.searchsorted(q_sorted, v)
        if pos < nq and q_sorted[pos] == v:
            total += hw2[i]
    return total


def reward(m: gf2.BitMatrix, gh: GroupedHamiltonian, sq: ScreenedQ) -> float:
    """Sum of ``|w|^2`` over groups whose image ``M x_h`` is some retained ``x_Q``."""
    return float(reward_kernel(m.column_words(), gh.xs, gh.weights2, sq.sorted_xs()))


def greedy_columns(gh: GroupedHamiltonian, sq: ScreenedQ, order=None) -> tuple[np.ndarray, np.ndarray]:
    """Matched packed columns ``(X_h^r, X_Q^r)`` for the greedy construction.

    ``order`` is a permutation of the screened columns; the X_Q scan follows it.
    """
    order = np.arange(len(sq)) if order is None else np.asarray(order, dtype=np.int64)
    if sorted(order.tolist()) != list(range(len(sq))):
        raise ValueError("order must be a permutation of the screened columns")
    q_sel = gf2.select_independent_words(sq.xs, order, gh.rank)
    r = len(q_sel)
    h_sel = gh.independent[:r]
    return gh.xs[h_sel], sq.xs[q_sel]


def greedy_match(gh: GroupedHamiltonian, sq: ScreenedQ, order=None) -> gf2.BitMatrix:
    """Invertible ``M`` sending the ``r`` heaviest independent x_h to ``r`` independent x_Q."""
    a, b = greedy_columns(gh, sq, order)
    if len(a) == 0:
        return gf2.BitMatrix.identity(gh.n)
    return gf2.basis_map(a, b, gh.n)


def greedy_bound(gh: GroupedHamiltonian, r: int) -> float:
    """Guaranteed reward ``sum_{i<r} |w_i^r|^2`` of the greedy construction."""
    return float(np.sum(gh.weights2[gh.independent[:r]]))


# ---------------------------------------------------------------------------
# gradients


def _h_prime_groups(h: PauliSum, u_c: CliffordTableau) -> dict[int, complex]:
    hp = conjugate_sum(u_c, h)
    phi = hp.phases()
    out: dict[int, complex] = {}
    for x, c, ph in zip(hp.xs.tolist(), hp.coeffs.tolist(), phi.tolist()):
        out[x] = out.get(x, 0j) + c * ph
    return out


def gradients(h: PauliSum, qs, u_c: CliffordTableau) -> np.ndarray:
    """Exact ``dE/dtheta_k`` at ``theta = 0`` for every rotation.

    ``h`` is the Hamiltonian in the reference frame and ``qs`` the full Q
    list (PauliStrings or ``(qx, qz, qk)`` arrays). Terms are conjugated by
    the tableau, so the signs are exact; only the group whose x-vector equals
    ``x_Q`` contributes.
    """
    if isinstance(qs, tuple) and isinstance(qs[0], np.ndarray):
        qx, qz, qk = qs
    else:
        qs = list(qs)
        qx = np.array([q.x for q in qs], dtype=np.int64)
        qz = np.array([q.z for q in qs], dtype=np.int64)
        qk = np.array([q.k for q in qs], dtype=np.int64)
    groups = _h_prime_groups(h, u_c)
    phase = np.array([1, 1j, -1, -1j])
    g = np.zeros(len(qx))
    for i, (x, z, k) in enumerate(zip(qx.tolist(), qz.tolist(), qk.tolist())):
        s = groups.get(x)
        if s is None:
            continue
        sign = -1 if (x & z).bit_count() % 2 else 1
        g[i] = (sign * phase[k] * s).imag
    return g


def gradients_direct(h: PauliSum, qs, u_c: CliffordTableau) -> np.ndarray:
    """Term-by-term ``sum_l w_l Im <0|h'_l Q_k|0>``; slow reference path."""
    hp = conjugate_sum(u_c, h)
    terms = list(hp.terms())
    out = []
    for q in qs:
        out.append(sum(c * vacuum_expectation(p, q).imag for c, p in terms))
    return np.array(out)


# ---------------------------------------------------------------------------
# simulated annealing over slots and the X_Q scan order


@dataclass(frozen=True)
class SaConfig:
    iterations: int | None = None  # default 50*N*p
    t_start: float = 0.05
    t_end: float = 0.002
    seed: int = 0

    def __post_init__(self):
        if self.iterations is not None and self.iterations < 1:
            raise ValueError("SA needs at least one iteration")
        if not 0 < self.t_end <= self.t_start:
            raise ValueError("temperatures must satisfy 0 < t_end <= t_start")

    def resolved_iterations(self, template: HeaTemplate) -> int:
        if self.iterations is not None:
            return self.iterations
        return max(1, 50 * template.n * template.p)


@dataclass
class AnnealResult:
    slots: np.ndarray
    s: np.ndarray
    m: gf2.BitMatrix
    reward: float
    trace: np.ndarray
    iterations: int
    wall_time: float


class RewardEvaluator:
    """Reward of a (slots, s) configuration for a fixed Hamiltonian and template shape."""

    def __init__(self, gh: GroupedHamiltonian, template: HeaTemplate):
        self.gh = gh
        self.template = template
        self.ops, _ = compile_template(template)
        self.table = single_qubit_table()
        self.h_indep = gh.xs[gh.independent]
        self.hw2 = gh.weights2

    def q_arrays(self, slots):
        return q_kernel(self.template.n, self.ops, np.asarray(slots, dtype=np.int64), self.table, self.template.n_params)

    def evaluate(self, slots, s_inverse) -> tuple[float, np.ndarray]:
        """Return ``(R, packed columns of M)``; ``s_inverse[k]`` is the scan position of parameter ``k``."""
        qx, qz, qk = self.q_arrays(slots)
        keep = _screen_arrays(qx, qz, qk)
        n = self.template.n
        if len(keep) == 0 or self.gh.rank == 0:
            return 0.0, gf2.BitMatrix.identity(n).column_words()
        cols = qx[keep]
        order = np.argsort(s_inverse[keep], kind="stable")
        q_sel = gf2._select_kernel(cols, order.astype(np.int64), self.gh.rank)
        r = len(q_sel)
        mcols, ok = gf2.basis_map_kernel(self.h_indep[:r], cols[q_sel], n)
        if not ok:  # pragma: no cover - both sides are independent by construction
            raise EngineeringError("greedy basis map failed")
        value = reward_kernel(mcols, self.gh.xs, self.hw2, np.sort(cols))
        return float(value), mcols


def anneal(h: PauliSum, template: HeaTemplate, config: SaConfig = SaConfig(), gh: GroupedHamiltonian | None = None) -> AnnealResult:
    """Metropolis annealing of ``sqrt(R)`` over Clifford slots and the permutation ``s``.

    Each step changes one slot to a uniformly drawn Clifford id and swaps two
    entries of ``s``; the temperature falls geometrically from ``t_start`` to
    ``t_end``. The first of ``iterations`` evaluations is the random start.
    Returns the best configuration seen.
    """
    t0 = time.perf_counter()
    gh = group_hamiltonian(h) if gh is None else gh
    ev = RewardEvaluator(gh, template)
    rng = np.random.default_rng(config.seed)
    iters = config.resolved_iterations(template)
    n_slots, n_params = template.n_slots, template.n_params
    temps = np.geomspace(config.t_start, config.t_end, iters)

    slots = rng.integers(0, 24, size=n_slots).astype(np.int64)
    s = rng.permutation(n_params).astype(np.int64)
    s_inv = np.empty_like(s)
    s_inv[s] = np.arange(n_params)
    cur_r, cur_m = ev.evaluate(slots, s_inv)
    cur_obj = np.sqrt(cur_r)
    best = (cur_r, slots.copy(), s.copy(), cur_m)
    trace = np.empty(iters)
    trace[0] = cur_r

    for it in range(1, iters):
        new_slots = slots.copy()
        if n_slots:
            new_slots[rng.integers(n_slots)] = rng.integers(24)
        new_s = s.copy()
        if n_params > 1:
            i, j = rng.choice(n_params, size=2, replace=False)
            new_s[i], new_s[j] = new_s[j], new_s[i]
        new_inv = np.empty_like(new_s)
        new_inv[new_s] = np.arange(n_params)
        r, mcols = ev.evaluate(new_slots, new_inv)
        obj = np.sqrt(r)
        d = obj - cur_obj
        if d >= 0 or rng.random() < np.exp(d / temps[it]):
            slots, s, cur_r, cur_obj, cur_m = new_slots, new_s, r, obj, mcols
            if cur_r > best[0]:
                best = (cur_r, slots.copy(), s.copy(), cur_m)
        trace[it] = cur_r

    r, b_slots, b_s, b_m = best
    return AnnealResult(
        slots=b_slots,
        s=b_s,
        m=gf2.BitMatrix.from_columns(b_m, template.n),
        reward=float(r),
        trace=trace,
        iterations=iters,
        wall_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# assembly


@dataclass(eq=False)
class EngineeredProblem:
    h_prime: PauliSum
    u_chem: CliffordTableau
    u_c: CliffordTableau
    m: gf2.BitMatrix
    s: np.ndarray
    slots: np.ndarray
    template: HeaTemplate
    reward: float
    reward_max: float
    reward_bound: float
    gradients: np.ndarray
    delta: np.ndarray
    hf_energy: float
    hf_occupation: str
    sa_trace: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sa_iterations: int = 0
    wall_time: float = 0.0
    provenance: dict = field(default_factory=dict)

    @property
    def zero_grad_mask(self) -> np.ndarray:
        return np.abs(self.gradients) < ZERO_GRAD_TOL

    @property
    def zero_grad_ratio(self) -> float:
        return float(np.mean(self.zero_grad_mask)) if len(self.gradients) else 1.0


def build_problem(
    h_frame: PauliSum,
    template: HeaTemplate,
    m: gf2.BitMatrix,
    *,
    s=None,
    hf_occupation: str | None = None,
    gh: GroupedHamiltonian | None = None,
) -> EngineeredProblem:
    """Assemble ``H'``, ``U_CHEM`` and the exact gradients for a chosen ``M`` and template slots."""
    n = template.n
    gh = group_hamiltonian(h_frame) if gh is None else gh
    # tableau_from_xmatrix uses rows as X-images; M acts on columns.
    u_c = tableau_from_xmatrix(m.T)
    u0 = clifford_at_zero(template)
    u_chem = compose(u_c, inverse(u0))
    h_prime = conjugate_sum(u_chem, h_frame)
    qs = q_kernel(n, compile_template(template)[0], np.array(template.clifford_slots, dtype=np.int64), single_qubit_table(), template.n_params)
    g = gradients(h_frame, qs, u_c)
    sq = screen_q(qs, n)
    r_val = reward(m, gh, sq)
    r_exact = float(np.sum(g[sq.delta] ** 2))
    if abs(r_val - r_exact) > 1e-9 * max(1.0, r_val):
        raise EngineeringError(f"reward {r_val} disagrees with gradient sum {r_exact}")
    e_ref = hf_energy(h_frame)
    # energy of |psi(0)> = U_HEA(0)|0> under H'
    e0 = hf_energy(conjugate_sum(u0, h_prime))
    if abs(e0 - e_ref) > 1e-10 * max(1.0, abs(e_ref)):
        raise EngineeringError(f"theta=0 energy {e0} differs from reference energy {e_ref}")
    a, _ = greedy_columns(gh, sq, None if s is None else _scan_order(sq, s))
    return EngineeredProblem(
        h_prime=h_prime,
        u_chem=u_chem,
        u_c=u_c,
        m=m,
        s=np.arange(template.n_params) if s is None else np.asarray(s),
        slots=np.array(template.clifford_slots, dtype=np.int64),
        template=template,
        reward=r_val,
        reward_max=gh.reward_max,
        reward_bound=greedy_bound(gh, len(a)),
        gradients=g,
        delta=sq.delta,
        hf_energy=e_ref,
        hf_occupation=hf_occupation or "0" * n,
    )


def _scan_order(sq: ScreenedQ, s) -> np.ndarray:
    s = np.asarray(s, dtype=np.int64)
    s_inv = np.empty_like(s)
    s_inv[s] = np.arange(len(s))
    return np.argsort(s_inv[sq.params], kind="stable")


def engineer(h: PauliSum, frame: HfFrame, template: HeaTemplate, config: SaConfig = SaConfig()) -> EngineeredProblem:
    """Full pipeline: reference frame, annealing, ``U_C`` synthesis, ``H'`` and exact gradients."""
    t0 = time.perf_counter()
    h_frame = apply_hf_frame(h, frame)
    gh = group_hamiltonian(h_frame)
    res = anneal(h_frame, template, config, gh=gh)
    tmpl = template.with_slots(res.slots)
    sq = screen_q(q_kernel(tmpl.n, compile_template(tmpl)[0], res.slots, single_qubit_table(), tmpl.n_params), tmpl.n)
    m = greedy_match(gh, sq, _scan_order(sq, res.s))
    if m != res.m:
        raise EngineeringError("greedy matrix differs from the annealed one")
    prob = build_problem(h_frame, tmpl, m, s=res.s, hf_occupation=frame.occupation, gh=gh)
    if abs(prob.reward - res.reward) > 1e-9 * max(1.0, res.reward):
        raise EngineeringError(f"final reward {prob.reward} != annealed reward {res.reward}")
    if not (prob.reward_bound - 1e-12 <= prob.reward <= prob.reward_max + 1e-12):
        raise EngineeringError("reward outside [greedy bound, R_max]")
    prob.sa_trace = res.trace
    prob.sa_iterations = res.iterations
    prob.wall_time = time.perf_counter() - t0
    prob.provenance = {"seed": config.seed, "sa_iterations": res.iterations, "t_start": config.t_start, "t_end": config.t_end}
    return prob
