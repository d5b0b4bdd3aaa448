"""Classical QUBO minimization: exhaustive search and simulated annealing.

Both solvers work on the dense integer matrix and keep exact int64
energies.  Annealing restarts are independent Metropolis chains with a
geometric cooling schedule and a per-restart RNG stream, so results are
reproducible for a fixed seed regardless of thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .qubo import CompiledInstance, QuboMatrix

EXHAUSTIVE_LIMIT = 26


@dataclass
class AnnealParams:
    """Budget and schedule of the annealer.

    ``t_hi`` defaults to the largest matrix entry; the schedule cools
    geometrically down to ``t_lo`` over the sweeps of one restart.  One
    sweep attempts m single-bit flips.
    """

    restarts: int = 100
    sweeps: int = 2000
    t_hi: float | None = None
    t_lo: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.sweeps < 1:
            raise ValueError("restarts and sweeps must be at least 1")
        if self.t_lo <= 0:
            raise ValueError("t_lo must be positive")
        if self.t_hi is not None and self.t_hi < self.t_lo:
            raise ValueError("t_hi must not be below t_lo")


@dataclass
class SolveResult:
    best: np.ndarray
    energy: int
    penalty_breakdown: dict[str, int] | None
    restarts_used: int
    sweeps_used: int
    reached_zero: bool
    best_trace: np.ndarray | None = field(default=None, repr=False)

    def to_obj(self) -> dict:
        return {
            "energy": self.energy,
            "reached_zero": self.reached_zero,
            "restarts_used": self.restarts_used,
            "sweeps_used": self.sweeps_used,
            "penalty_breakdown": self.penalty_breakdown,
        }


def evaluate(q: QuboMatrix, bits) -> int:
    """x^T Q x + offset, exact."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape != (q.n,):
        raise ValueError(f"assignment has shape {bits.shape}, expected ({q.n},)")
    d, s = q.dense()
    return int(d @ bits + bits @ np.triu(s, 1) @ bits) + q.offset


def penalty_breakdown(inst: CompiledInstance, bits) -> dict[str, int]:
    return {f"P{k}": int(p.evaluate(bits))
            for k, p in zip(range(1, 13), inst.penalties())}


def complete_slacks(x_part, inst: CompiledInstance) -> np.ndarray:
    """Extend mapping bits to a full assignment with block-optimal slacks.

    Each surplus counter is set to the clamped row surplus, each product
    slack to the exact product of its two mapping bits; every counter block
    and every product block is individually minimized by this choice.
    """
    lay = inst.layout
    if isinstance(x_part, dict):
        grid = np.zeros((lay.n_T + 1, lay.n_N), dtype=np.int8)
        for (i, j), b in x_part.items():
            grid[i, j] = b
        x_part = grid
    x_part = np.asarray(x_part, dtype=np.int8).reshape(lay.n_T + 1, lay.n_N)
    bits = np.zeros(lay.m, dtype=np.int8)
    for i in range(lay.n_T + 1):
        for j in range(lay.n_N):
            bits[lay.x(i, j)] = x_part[i, j]
    cap = (1 << lay.k_y) - 1
    for i in range(1, lay.n_T):
        surplus = min(max(int(x_part[i].sum()) - 1, 0), cap)
        for r in range(lay.k_y):
            bits[lay.y(i, r)] = (surplus >> r) & 1
    for i in range(lay.n_T):
        for j in lay.tree_vertex_cols:
            c1, c2 = inst.children_cols[j]
            bits[lay.z(i, j)] = x_part[i, c1] & x_part[i, c2]
        for j in lay.retic_cols:
            p1, p2 = inst.parent_cols[j]
            bits[lay.z(i, j)] = x_part[i, p1] & x_part[i, p2]
    for i in lay.nonleaf_rows:
        for j in lay.tree_vertex_cols:
            c1, c2 = inst.children_cols[j]
            bits[lay.zhat(i, j, 0)] = x_part[i, j] & x_part[i, c1]
            bits[lay.zhat(i, j, 1)] = x_part[i, j] & x_part[i, c2]
    return bits


# ---------------------------------------------------------------------------
# numba kernels

_MULT = np.uint64(0x2545F4914F6CDD1D)
_TO_UNIT = 1.0 / 9007199254740992.0  # 2^-53


@njit(cache=True, nogil=True, inline="always")
def _rng_next(state):
    state ^= state >> np.uint64(12)
    state ^= state << np.uint64(25)
    state ^= state >> np.uint64(27)
    return state


@njit(cache=True, nogil=True)
def _energy_of(diag, smat, x):
    m = x.shape[0]
    total = np.int64(0)
    for i in range(m):
        if x[i]:
            total += diag[i]
            for j in range(i + 1, m):
                if x[j]:
                    total += smat[i, j]
    return total


@njit(cache=True, nogil=True)
def _anneal_kernel(diag, smat, sweeps, t_hi, t_lo, seed):
    m = diag.shape[0]
    state = np.uint64(seed)
    x = np.zeros(m, dtype=np.int8)
    for i in range(m):
        state = _rng_next(state)
        if (state * _MULT) >> np.uint64(63):
            x[i] = 1
    field = diag.copy()
    for i in range(m):
        if x[i]:
            for j in range(m):
                field[j] += smat[j, i]
    energy = _energy_of(diag, smat, x)
    best = x.copy()
    best_energy = energy
    trace = np.empty(sweeps, dtype=np.int64)
    if sweeps > 1:
        ratio = (t_lo / t_hi) ** (1.0 / (sweeps - 1))
    else:
        ratio = 1.0
    temp = t_hi
    for sweep in range(sweeps):
        for _ in range(m):
            state = _rng_next(state)
            i = int((state * _MULT) % np.uint64(m))
            delta = field[i] if x[i] == 0 else -field[i]
            accept = delta <= 0
            if not accept:
                state = _rng_next(state)
                unit = float((state * _MULT) >> np.uint64(11)) * _TO_UNIT
                accept = unit < np.exp(-float(delta) / temp)
            if accept:
                step = np.int64(1) if x[i] == 0 else np.int64(-1)
                x[i] ^= 1
                energy += delta
                for j in range(m):
                    field[j] += smat[j, i] * step
                if energy < best_energy:
                    best_energy = energy
                    best[:] = x
        trace[sweep] = best_energy
        temp *= ratio
    return best, best_energy, trace


@njit(cache=True, nogil=True)
def _exhaustive_kernel(diag, smat):
    m = diag.shape[0]
    x = np.zeros(m, dtype=np.int8)
    field = diag.copy()
    energy = np.int64(0)
    best = x.copy()
    best_energy = energy
    for code in range(1, 1 << m):
        i = 0
        c = code
        while c & 1 == 0:
            c >>= 1
            i += 1
        delta = field[i] if x[i] == 0 else -field[i]
        step = np.int64(1) if x[i] == 0 else np.int64(-1)
        x[i] ^= 1
        energy += delta
        for j in range(m):
            field[j] += smat[j, i] * step
        if energy < best_energy:
            best_energy = energy
            best[:] = x
        elif energy == best_energy:
            for k in range(m):
                if x[k] != best[k]:
                    if x[k] < best[k]:
                        best[:] = x
                    break
    return best, best_energy


def _mix_seed(seed: int, k: int) -> int:
    z = (seed * 0x9E3779B97F4A7C15 + (k + 1) * 0xBF58476D1CE4E5B9) % (1 << 64)
    z ^= z >> 30
    z = (z * 0x94D049BB133111EB) % (1 << 64)
    return z or 1


def solve_exhaustive(q: QuboMatrix,
                     inst: CompiledInstance | None = None) -> SolveResult:
    """Global minimum by gray-code enumeration; ties break to the
    lexicographically smallest assignment."""
    if q.n > EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive search limited to {EXHAUSTIVE_LIMIT} "
                         f"variables, got {q.n}")
    if q.n == 0:
        best = np.zeros(0, dtype=np.int8)
        energy = q.offset
    else:
        d, s = q.dense()
        best, raw = _exhaustive_kernel(d, s)
        energy = int(raw) + q.offset
    return SolveResult(
        best=best, energy=energy,
        penalty_breakdown=penalty_breakdown(inst, best) if inst else None,
        restarts_used=1, sweeps_used=0, reached_zero=energy == 0)


def solve_anneal(q: QuboMatrix, params: AnnealParams | None = None,
                 inst: CompiledInstance | None = None,
                 threads: int | None = None) -> SolveResult:
    """Best-of-restarts single-bit-flip Metropolis annealing.

    Restarts run concurrently but are folded in index order, and the scan
    stops at the first restart that reaches energy zero, so the outcome is
    identical for any thread count.
    """
    if params is None:
        params = AnnealParams()
    if q.n == 0:
        return SolveResult(np.zeros(0, dtype=np.int8), q.offset,
                           penalty_breakdown(inst, []) if inst else None,
                           0, 0, q.offset == 0)
    d, s = q.dense()
    t_hi = params.t_hi if params.t_hi is not None else float(q.max_abs_entry() or 1)
    t_hi = max(t_hi, params.t_lo)
    workers = threads or os.cpu_count() or 1

    outcomes: list[tuple[np.ndarray, int, np.ndarray]] = []
    stop_at = None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        k = 0
        while k < params.restarts and stop_at is None:
            wave = range(k, min(k + workers, params.restarts))
            futures = [pool.submit(_anneal_kernel, d, s, params.sweeps,
                                   t_hi, params.t_lo,
                                   np.uint64(_mix_seed(params.seed, j)))
                       for j in wave]
            for j, fut in zip(wave, futures):
                bits, raw, trace = fut.result()
                outcomes.append((bits, int(raw) + q.offset, trace))
                if stop_at is None and outcomes[-1][1] == 0:
                    stop_at = j
            k += len(futures)

    used = stop_at + 1 if stop_at is not None else params.restarts
    best_bits, best_energy, best_trace = outcomes[0]
    for bits, energy, trace in outcomes[1:used]:
        if energy < best_energy or (energy == best_energy
                                    and _lex_less(bits, best_bits)):
            best_bits, best_energy, best_trace = bits, energy, trace
    return SolveResult(
        best=best_bits, energy=best_energy,
        penalty_breakdown=penalty_breakdown(inst, best_bits) if inst else None,
        restarts_used=used, sweeps_used=used * params.sweeps,
        reached_zero=best_energy == 0,
        best_trace=best_trace + q.offset)


def _lex_less(a: np.ndarray, b: np.ndarray) -> bool:
    for x, y in zip(a, b):
        if x != y:
            return x < y
    return False
