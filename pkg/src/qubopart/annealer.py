"""Digital-annealer-style simulated annealing over a quadratic model.

Semantics, per Monte-Carlo step ("sweep"): the flip delta of every variable
is evaluated against the current state; each candidate is accepted with
probability min(1, exp(-(delta - offset)/T)); exactly one accepted candidate
(uniformly random) is applied.  If nothing is accepted the dynamic offset
grows by a fixed increment, and any applied flip resets it to zero.

Budget semantics: a wall-clock limit is converted into a deterministic step
plan through a fixed nominal step-rate model, so identical (model, config)
reproduce identical results bit for bit on any machine fast enough to finish
the plan; the wall clock remains a hard safety cap checked every few steps.
Every run starts from the same state (all zeros unless configured) and all
randomness comes from a counter-based generator (Philox) consumed in
variable-index order.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import IO

import numpy as np

from .errors import DomainError

__all__ = [
    "SolverConfig",
    "ResolvedSchedule",
    "SolverState",
    "SolveResult",
    "auto_tune",
    "init_state",
    "flip_delta",
    "apply_flip",
    "parallel_trial_step",
    "anneal",
    "dump_trace",
]

AUTO = "auto"

# Nominal step-rate model (steps/sec) used to turn a wall-clock budget into a
# deterministic step plan: one parallel-trial step costs roughly a fixed
# overhead plus a per-variable vector cost.  Chosen conservatively so that
# commodity hardware finishes the plan inside the budget.
NOMINAL_OVERHEAD_SEC = 4.0e-5
NOMINAL_PER_VARIABLE_SEC = 2.0e-8
DEADLINE_CHECK_INTERVAL = 64


def nominal_step_rate(dimension: int) -> float:
    """Assumed steps/sec for a model with ``dimension`` variables."""
    return 1.0 / (NOMINAL_OVERHEAD_SEC + NOMINAL_PER_VARIABLE_SEC * dimension)


@dataclass(frozen=True)
class SolverConfig:
    """Annealer configuration; "auto" entries are resolved by ``auto_tune``."""

    time_limit_sec: float = 10.0
    seed: int = 42
    t_initial: float | str = AUTO
    t_final: float | str = AUTO
    decay: float | str = AUTO
    offset_increment: float | str = AUTO
    initial_bits: np.ndarray | None = None
    sweeps: int | None = None        # explicit step budget; overrides the rate model
    step_rate: float | None = None   # nominal steps/sec override
    trace: bool = False

    def __post_init__(self):
        if not (self.time_limit_sec > 0):
            raise DomainError("time_limit_sec must be positive")


@dataclass(frozen=True)
class ResolvedSchedule:
    """Concrete schedule values after auto-tuning."""

    t_initial: float
    t_final: float
    decay: float
    offset_increment: float
    planned_steps: int

    def __post_init__(self):
        if not (self.t_final > 0 and self.t_initial > 0):
            raise DomainError("temperatures must be positive")
        if not (0 < self.decay <= 1):
            raise DomainError("decay must lie in (0, 1]")
        if self.offset_increment < 0:
            raise DomainError("offset_increment must be >= 0")


@dataclass
class SolverState:
    """Live annealing state: bits, cached fields, energy, dynamic offset."""

    model: object
    engine: object
    bits: np.ndarray
    energy: float
    offset: float
    offset_increment: float
    rng: np.random.Generator
    delta_buf: np.ndarray
    prob_buf: np.ndarray
    u_buf: np.ndarray
    collect_diagnostics: bool = False
    last_accepted: np.ndarray | None = None


@dataclass(frozen=True)
class SolveResult:
    """Best-so-far outcome of an annealing run plus solver statistics."""

    best_bits: np.ndarray
    best_energy: float
    solve_time: float
    sweeps: int
    accepted_flips: int
    offset_events: int
    planned_sweeps: int
    completed_plan: bool
    schedule: ResolvedSchedule
    energy_trace: list[tuple[float, float]] | None = None


def _initial_bits(model, config: SolverConfig) -> np.ndarray:
    n = model.dimension
    if config.initial_bits is None:
        return np.zeros(n, dtype=np.int8)
    bits = np.asarray(config.initial_bits, dtype=np.int8)
    if bits.shape != (n,):
        raise DomainError(f"initial bit vector has length {bits.shape}, expected ({n},)")
    if np.any((bits != 0) & (bits != 1)):
        raise DomainError("initial bit vector must be 0/1")
    return bits.copy()


def auto_tune(model, config: SolverConfig) -> ResolvedSchedule:
    """Resolve "auto" schedule entries into concrete values.

    The starting temperature makes the median sampled uphill delta (1000
    random flips from the initial state) accept with probability one half;
    the offset increment is a tenth of the median absolute delta; the decay
    brings the temperature to ``t_final`` across the planned steps.
    """
    n = model.dimension
    if config.sweeps is not None:
        planned = int(config.sweeps)
        if planned < 1:
            raise DomainError("sweeps must be >= 1")
    else:
        rate = config.step_rate if config.step_rate else nominal_step_rate(n)
        planned = max(100, int(rate * config.time_limit_sec))

    need_samples = AUTO in (config.t_initial, config.t_final, config.offset_increment)
    medians = (0.0, 0.0)  # (median uphill delta, median |delta|)
    if need_samples:
        bits = _initial_bits(model, config)
        engine = model.make_engine(bits)
        deltas = engine.deltas(np.zeros(n))
        tune_rng = np.random.Generator(np.random.Philox(key=config.seed).jumped(1))
        sample = deltas[tune_rng.integers(0, n, size=1000)]
        uphill = sample[sample > 1e-15]
        magnitudes = np.abs(sample)
        magnitudes = magnitudes[magnitudes > 1e-15]
        medians = (
            float(np.median(uphill)) if uphill.size else 0.0,
            float(np.median(magnitudes)) if magnitudes.size else 0.0,
        )

    if config.t_initial == AUTO:
        med_up, med_abs = medians
        if med_up > 0:
            t_initial = med_up / math.log(2.0)
        elif med_abs > 0:
            t_initial = med_abs / math.log(2.0)
        else:
            t_initial = 1.0
    else:
        t_initial = float(config.t_initial)

    t_final = max(1e-3 * t_initial, 1e-12) if config.t_final == AUTO else float(config.t_final)

    if config.offset_increment == AUTO:
        offset_increment = 0.1 * medians[1]
    else:
        offset_increment = float(config.offset_increment)

    if config.decay == AUTO:
        if t_final >= t_initial:
            decay = 1.0
        else:
            decay = (t_final / t_initial) ** (1.0 / max(planned - 1, 1))
    else:
        decay = float(config.decay)

    return ResolvedSchedule(t_initial, t_final, decay, offset_increment, planned)


def init_state(
    model, config: SolverConfig, schedule: ResolvedSchedule | None = None
) -> SolverState:
    """Fresh solver state: configured bits, caches and energy from scratch."""
    if schedule is None:
        schedule = auto_tune(model, config)
    bits = _initial_bits(model, config)
    engine = model.make_engine(bits)
    n = model.dimension
    return SolverState(
        model=model,
        engine=engine,
        bits=bits,
        energy=model.energy(bits),
        offset=0.0,
        offset_increment=schedule.offset_increment,
        rng=np.random.Generator(np.random.Philox(key=config.seed)),
        delta_buf=np.zeros(n),
        prob_buf=np.zeros(n),
        u_buf=np.zeros(n),
    )


def flip_delta(state: SolverState, a: int) -> float:
    """Energy change of flipping bit ``a`` at the current state, from caches."""
    return state.engine.delta(a)


def apply_flip(state: SolverState, a: int) -> SolverState:
    """Toggle bit ``a``, update caches and energy, reset the dynamic offset."""
    d = state.engine.delta(a)
    state.engine.apply(a)
    state.energy += d
    state.offset = 0.0
    return state


def parallel_trial_step(state: SolverState, temperature: float) -> int | None:
    """One parallel-trial Monte-Carlo step; returns the flipped index, if any.

    All candidate deltas are evaluated against the pre-step state; acceptance
    uses min(1, exp(-(delta - offset)/T)) with one uniform draw per variable
    in index order, then one accepted candidate is applied.
    """
    if not (temperature > 0):
        raise DomainError("temperature must be positive")
    engine = state.engine
    deltas = engine.deltas(state.delta_buf)
    z = state.prob_buf
    np.subtract(deltas, state.offset, out=z)
    np.maximum(z, 0.0, out=z)
    z /= -temperature
    np.exp(z, out=z)
    u = state.rng.random(out=state.u_buf)
    accepted = np.flatnonzero(u < z)
    if state.collect_diagnostics:
        state.last_accepted = accepted.copy()
    if accepted.size == 0:
        state.offset += state.offset_increment
        return None
    pick = int(accepted[state.rng.integers(accepted.size)]) if accepted.size > 1 else int(accepted[0])
    d = float(deltas[pick])
    engine.apply(pick)
    state.energy += d
    state.offset = 0.0
    return pick


def anneal(model, config: SolverConfig) -> SolveResult:
    """Run the annealer within its budget and return the best state found.

    The geometric temperature schedule spans the planned steps; the wall
    clock is checked every few steps as a hard cap, so the overshoot beyond
    ``time_limit_sec`` is bounded by a handful of step durations.
    """
    schedule = auto_tune(model, config)
    state = init_state(model, config, schedule)
    start = time.perf_counter()
    deadline = start + config.time_limit_sec

    best_energy = state.energy
    best_bits = state.bits.copy()
    trace: list[tuple[float, float]] | None = [(0.0, best_energy)] if config.trace else None

    temperature = schedule.t_initial
    steps_done = accepted = offset_events = 0
    completed = True
    for step in range(schedule.planned_steps):
        flipped = parallel_trial_step(state, temperature)
        steps_done += 1
        if flipped is None:
            offset_events += 1
        else:
            accepted += 1
            if state.energy < best_energy:
                best_energy = state.energy
                best_bits[:] = state.bits
                if trace is not None:
                    trace.append((time.perf_counter() - start, best_energy))
        temperature = max(temperature * schedule.decay, schedule.t_final)
        if (step + 1) % DEADLINE_CHECK_INTERVAL == 0 and time.perf_counter() >= deadline:
            completed = step + 1 >= schedule.planned_steps
            break

    solve_time = time.perf_counter() - start
    if trace is not None:
        trace.append((solve_time, best_energy))
    return SolveResult(
        best_bits=best_bits,
        best_energy=best_energy,
        solve_time=solve_time,
        sweeps=steps_done,
        accepted_flips=accepted,
        offset_events=offset_events,
        planned_sweeps=schedule.planned_steps,
        completed_plan=completed,
        schedule=schedule,
        energy_trace=trace,
    )


def dump_trace(result: SolveResult, fh: IO[str]) -> None:
    """Write the best-energy trace as "elapsed_sec,best_energy" CSV."""
    fh.write("elapsed_sec,best_energy\n")
    for elapsed, energy in result.energy_trace or []:
        fh.write(f"{elapsed:.6f},{energy!r}\n")
