"""Adaptive trajectory integration tailored to the nonnegative orthant.

The stepper is an embedded Dormand-Prince 5(4) pair with a PI step-size
controller. Two domain-specific behaviours sit on top of the textbook
scheme:

* Invariant faces stay exact. Every compartment enters its own derivative
  multiplicatively, so a component that is exactly zero stays exactly zero
  through all stages. Tiny negative undershoot (within ``abs_tol``) from
  rounding is clamped back to zero; larger undershoot rejects the step and
  retries with half the step size, so accepted states never dip below
  ``-abs_tol`` before clamping.

* Runs stop early once the state has settled: when the vector field norm
  stays below ``settle_tol * (1 + |state|)`` for ``settle_time`` time
  units the trajectory is reported as converged. A settle event is only
  accepted at a rest point that is locally non-expanding in the directions
  the orbit can still move. Orbits shadowing a saddle's stable manifold can
  drive a compartment so close to zero that the field norm looks settled
  while an unstable mode is still growing from a subnormal amplitude; those
  fly-bys are ridden out instead of being reported as convergence. A
  compartment equal to exactly zero is excluded from the expansion test,
  because zero compartments are invariant and cannot be excited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import IO, Callable, Iterable, Sequence

import numpy as np

from .model import ModelParameters, jacobian, scalar_field

__all__ = [
    "IntegrationConfig",
    "Trajectory",
    "StepFailureError",
    "ReachResult",
    "UNDECIDED",
    "integrate",
    "run_to_attractor",
    "write_trajectory_csv",
]

UNDECIDED = "undecided"

REACHED_T_MAX = "reached_t_max"
CONVERGED = "converged"
STEP_FAILURE = "step_failure"
_STOPPED = "stopped"

# Dormand-Prince 5(4) coefficients.
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# Difference between the 5th- and embedded 4th-order solutions.
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

# PI controller constants (classical values for this pair).
_SAFETY = 0.9
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2
_FAC_MAX = 10.0


@dataclass(frozen=True)
class IntegrationConfig:
    """Tolerances and limits for one integration run.

    ``settle_tol``/``settle_time`` define the convergence stop: the scaled
    field norm must stay small for that long. ``min_step`` is the step
    size below which the run is abandoned as a step failure.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    t_max: float = 2000.0
    initial_step: float = 1e-3
    max_step: float = 1.0
    settle_tol: float = 1e-12
    settle_time: float = 10.0
    min_step: float = 1e-14

    def __post_init__(self) -> None:
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.t_max <= 0.0:
            raise ValueError("t_max must be positive")
        if not 0.0 < self.initial_step <= self.max_step:
            raise ValueError("need 0 < initial_step <= max_step")
        if self.min_step <= 0.0:
            raise ValueError("min_step must be positive")

    def with_tolerance(self, rel_tol: float) -> "IntegrationConfig":
        """Scale both tolerances from a single knob (abs = rel / 100)."""
        return replace(self, rel_tol=rel_tol, abs_tol=rel_tol * 1e-2)


@dataclass(frozen=True)
class Trajectory:
    """Accepted integration samples plus the reason the run ended."""

    times: np.ndarray
    states: np.ndarray
    termination: str

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return len(self.times)


class StepFailureError(RuntimeError):
    """Step size underflowed; carries the partial trajectory."""

    def __init__(self, message: str, trajectory: Trajectory):
        super().__init__(message)
        self.trajectory = trajectory


_Field = Callable[[float, float, float, float], tuple[float, float, float, float]]
_State = tuple[float, float, float, float]

_SETTLE_EXPANSION_BAND = 1e-8
_SETTLE_REARM_FACTOR = 10.0


def _stationary_check(params: ModelParameters) -> Callable[[_State], bool]:
    """Build the test deciding whether a settled state counts as converged.

    The Jacobian is restricted to the compartments the orbit can still
    move: a compartment at exactly zero is frozen by face invariance, so
    instability along it is unreachable. The susceptible pool stays active
    whenever either infected compartment is nonzero (recovery feeds it
    additively). Settling is accepted only when the restricted spectrum
    has no eigenvalue with real part above a small band.
    """

    def check(y: _State) -> bool:
        active = [i for i in range(4) if y[i] != 0.0]
        if 1 not in active and (y[2] != 0.0 or y[3] != 0.0):
            active.append(1)
            active.sort()
        if not active:
            return True
        sub = jacobian(params, y)[np.ix_(active, active)]
        return float(np.max(np.linalg.eigvals(sub).real)) <= _SETTLE_EXPANSION_BAND

    return check


def _integrate_core(
    field: _Field,
    y0: Sequence[float],
    cfg: IntegrationConfig,
    stop: Callable[[float, _State], bool] | None = None,
    settle_check: Callable[[_State], bool] | None = None,
) -> tuple[list[float], list[tuple[float, float, float, float]], str]:
    """Run the stepper; returns (times, states, termination)."""
    y = tuple(float(v) for v in y0)
    t = 0.0
    times = [t]
    states = [y]

    rel, atol = cfg.rel_tol, cfg.abs_tol
    k1 = field(*y)

    def settle_ratio(state: _State, deriv: _State) -> float:
        fn = max(abs(deriv[0]), abs(deriv[1]), abs(deriv[2]), abs(deriv[3]))
        yn = max(abs(state[0]), abs(state[1]), abs(state[2]), abs(state[3]))
        return fn / (cfg.settle_tol * (1.0 + yn))

    settle_armed = True
    settle_since = 0.0 if settle_ratio(y, k1) <= 1.0 else None
    if stop is not None:
        stop(t, y)

    h = min(cfg.initial_step, cfg.max_step, cfg.t_max)
    facold = 1e-4
    termination = REACHED_T_MAX

    while t < cfg.t_max:
        remaining = cfg.t_max - t
        if remaining <= cfg.min_step:
            break
        if h > remaining:
            h = remaining
        if h < cfg.min_step:
            return times, states, STEP_FAILURE

        y1, y2, y3, y4 = y
        k11, k12, k13, k14 = k1

        u1 = y1 + h * _A21 * k11
        u2 = y2 + h * _A21 * k12
        u3 = y3 + h * _A21 * k13
        u4 = y4 + h * _A21 * k14
        k21, k22, k23, k24 = field(u1, u2, u3, u4)

        u1 = y1 + h * (_A31 * k11 + _A32 * k21)
        u2 = y2 + h * (_A31 * k12 + _A32 * k22)
        u3 = y3 + h * (_A31 * k13 + _A32 * k23)
        u4 = y4 + h * (_A31 * k14 + _A32 * k24)
        k31, k32, k33, k34 = field(u1, u2, u3, u4)

        u1 = y1 + h * (_A41 * k11 + _A42 * k21 + _A43 * k31)
        u2 = y2 + h * (_A41 * k12 + _A42 * k22 + _A43 * k32)
        u3 = y3 + h * (_A41 * k13 + _A42 * k23 + _A43 * k33)
        u4 = y4 + h * (_A41 * k14 + _A42 * k24 + _A43 * k34)
        k41, k42, k43, k44 = field(u1, u2, u3, u4)

        u1 = y1 + h * (_A51 * k11 + _A52 * k21 + _A53 * k31 + _A54 * k41)
        u2 = y2 + h * (_A51 * k12 + _A52 * k22 + _A53 * k32 + _A54 * k42)
        u3 = y3 + h * (_A51 * k13 + _A52 * k23 + _A53 * k33 + _A54 * k43)
        u4 = y4 + h * (_A51 * k14 + _A52 * k24 + _A53 * k34 + _A54 * k44)
        k51, k52, k53, k54 = field(u1, u2, u3, u4)

        u1 = y1 + h * (_A61 * k11 + _A62 * k21 + _A63 * k31 + _A64 * k41 + _A65 * k51)
        u2 = y2 + h * (_A61 * k12 + _A62 * k22 + _A63 * k32 + _A64 * k42 + _A65 * k52)
        u3 = y3 + h * (_A61 * k13 + _A62 * k23 + _A63 * k33 + _A64 * k43 + _A65 * k53)
        u4 = y4 + h * (_A61 * k14 + _A62 * k24 + _A63 * k34 + _A64 * k44 + _A65 * k54)
        k61, k62, k63, k64 = field(u1, u2, u3, u4)

        v1 = y1 + h * (_B1 * k11 + _B3 * k31 + _B4 * k41 + _B5 * k51 + _B6 * k61)
        v2 = y2 + h * (_B1 * k12 + _B3 * k32 + _B4 * k42 + _B5 * k52 + _B6 * k62)
        v3 = y3 + h * (_B1 * k13 + _B3 * k33 + _B4 * k43 + _B5 * k53 + _B6 * k63)
        v4 = y4 + h * (_B1 * k14 + _B3 * k34 + _B4 * k44 + _B5 * k54 + _B6 * k64)
        k71, k72, k73, k74 = field(v1, v2, v3, v4)

        d1 = h * (_E1 * k11 + _E3 * k31 + _E4 * k41 + _E5 * k51 + _E6 * k61 + _E7 * k71)
        d2 = h * (_E1 * k12 + _E3 * k32 + _E4 * k42 + _E5 * k52 + _E6 * k62 + _E7 * k72)
        d3 = h * (_E1 * k13 + _E3 * k33 + _E4 * k43 + _E5 * k53 + _E6 * k63 + _E7 * k73)
        d4 = h * (_E1 * k14 + _E3 * k34 + _E4 * k44 + _E5 * k54 + _E6 * k64 + _E7 * k74)

        s1 = atol + rel * max(abs(y1), abs(v1))
        s2 = atol + rel * max(abs(y2), abs(v2))
        s3 = atol + rel * max(abs(y3), abs(v3))
        s4 = atol + rel * max(abs(y4), abs(v4))
        err = math.sqrt(((d1 / s1) ** 2 + (d2 / s2) ** 2 + (d3 / s3) ** 2 + (d4 / s4) ** 2) / 4.0)

        if not math.isfinite(err):
            h *= _FAC_MIN
            if h < cfg.min_step:
                return times, states, STEP_FAILURE
            continue

        if err > 1.0:
            h *= min(1.0, max(_FAC_MIN, _SAFETY * err**-_EXPO))
            if h < cfg.min_step:
                return times, states, STEP_FAILURE
            continue

        low = min(v1, v2, v3, v4)
        if low < -atol:
            # Real undershoot, not representable rounding noise: retry.
            h *= 0.5
            if h < cfg.min_step:
                return times, states, STEP_FAILURE
            continue
        if low < 0.0:
            v1 = v1 if v1 >= 0.0 else 0.0
            v2 = v2 if v2 >= 0.0 else 0.0
            v3 = v3 if v3 >= 0.0 else 0.0
            v4 = v4 if v4 >= 0.0 else 0.0
            k71, k72, k73, k74 = field(v1, v2, v3, v4)

        t += h
        y = (v1, v2, v3, v4)
        k1 = (k71, k72, k73, k74)
        times.append(t)
        states.append(y)

        ratio = settle_ratio(y, k1)
        if settle_armed:
            if ratio <= 1.0:
                if settle_since is None:
                    settle_since = t
                elif t - settle_since >= cfg.settle_time:
                    if settle_check is None or settle_check(y):
                        termination = CONVERGED
                        break
                    # Quiet fly-by past a non-attracting rest point: keep
                    # going and only re-arm once the field norm recovers.
                    settle_armed = False
                    settle_since = None
            else:
                settle_since = None
        elif ratio > _SETTLE_REARM_FACTOR:
            settle_armed = True

        if stop is not None and stop(t, y):
            termination = _STOPPED
            break

        if err == 0.0:
            factor = _FAC_MAX
        else:
            factor = min(_FAC_MAX, max(_FAC_MIN, _SAFETY * err**-_EXPO * facold**_BETA))
        facold = max(err, 1e-4)
        h = min(h * factor, cfg.max_step)

    return times, states, termination


def _as_trajectory(
    times: list[float], states: list[tuple[float, float, float, float]], termination: str
) -> Trajectory:
    return Trajectory(
        times=np.asarray(times, dtype=float),
        states=np.asarray(states, dtype=float),
        termination=termination,
    )


def integrate(
    params: ModelParameters,
    x0: Sequence[float],
    config: IntegrationConfig | None = None,
) -> Trajectory:
    """Integrate from ``x0`` until ``t_max``, convergence, or failure.

    Raises StepFailureError (with the partial trajectory attached) if the
    step size underflows.
    """
    cfg = config or IntegrationConfig()
    start = tuple(float(v) for v in x0)
    if any(v < 0.0 for v in start):
        raise ValueError("initial state must be nonnegative")
    times, states, termination = _integrate_core(
        scalar_field(params), start, cfg, settle_check=_stationary_check(params)
    )
    traj = _as_trajectory(times, states, termination)
    if termination == STEP_FAILURE:
        raise StepFailureError(
            f"step size underflowed below {cfg.min_step} at t={times[-1]:.6g}", traj
        )
    return traj


@dataclass(frozen=True)
class ReachResult:
    """Outcome of running a start state toward a set of attractors.

    ``attractor_id`` is None when the run ended undecided. ``t_detected``
    is the time the dwell requirement was met (None if undecided).
    """

    attractor_id: str | None
    t_detected: float | None
    final_state: np.ndarray
    termination: str

    @property
    def label(self) -> str:
        return self.attractor_id if self.attractor_id is not None else UNDECIDED


def _attractor_list(attractors: Iterable) -> list[tuple[str, tuple[float, float, float, float]]]:
    out = []
    for item in attractors:
        if hasattr(item, "id") and hasattr(item, "coordinates"):
            coords = tuple(float(v) for v in item.coordinates)
            out.append((str(item.id), coords))
        else:
            name, coords = item
            out.append((str(name), tuple(float(v) for v in coords)))
    return out


def run_to_attractor(
    params: ModelParameters,
    x0: Sequence[float],
    attractors: Iterable,
    config: IntegrationConfig | None = None,
    match_radius: float = 0.05,
    dwell_time: float = 10.0,
) -> ReachResult:
    """Integrate until the state has dwelt near one attractor.

    A run is attributed to an attractor after the state stays inside the
    Euclidean ball of ``match_radius`` around it for ``dwell_time`` time
    units without leaving. Attractor centres must be separated by more
    than twice the radius so membership is unambiguous. Runs that settle
    elsewhere or exhaust ``t_max`` come back undecided; step failures
    raise StepFailureError.
    """
    cfg = config or IntegrationConfig()
    targets = _attractor_list(attractors)
    if not targets:
        raise ValueError("need at least one attractor")
    for i in range(len(targets)):
        for j in range(i + 1, len(targets)):
            ci, cj = targets[i][1], targets[j][1]
            gap = math.dist(ci, cj)
            if gap <= 2.0 * match_radius:
                raise ValueError(
                    f"attractors {targets[i][0]} and {targets[j][0]} are separated by "
                    f"{gap:.6g} <= 2 * match_radius = {2.0 * match_radius:.6g}"
                )

    r2 = match_radius * match_radius
    current = {"ball": -1, "entered": 0.0, "hit": -1, "t_hit": math.nan}

    def stop(t: float, y: tuple[float, float, float, float]) -> bool:
        inside = -1
        for idx, (_, c) in enumerate(targets):
            d2 = (y[0] - c[0]) ** 2 + (y[1] - c[1]) ** 2 + (y[2] - c[2]) ** 2 + (y[3] - c[3]) ** 2
            if d2 <= r2:
                inside = idx
                break
        if inside != current["ball"]:
            current["ball"] = inside
            current["entered"] = t
        if inside >= 0 and t - current["entered"] >= dwell_time:
            current["hit"] = inside
            current["t_hit"] = t
            return True
        return False

    start = tuple(float(v) for v in x0)
    if any(v < 0.0 for v in start):
        raise ValueError("initial state must be nonnegative")
    times, states, termination = _integrate_core(
        scalar_field(params), start, cfg, stop=stop, settle_check=_stationary_check(params)
    )
    if termination == STEP_FAILURE:
        raise StepFailureError(
            f"step size underflowed below {cfg.min_step} at t={times[-1]:.6g}",
            _as_trajectory(times, states, termination),
        )

    final = np.asarray(states[-1], dtype=float)
    if termination == _STOPPED:
        return ReachResult(targets[current["hit"]][0], float(current["t_hit"]), final, termination)
    if termination == CONVERGED and current["ball"] >= 0:
        # Settled in place inside a ball: the dwell is implied.
        return ReachResult(targets[current["ball"]][0], float(times[-1]), final, termination)
    return ReachResult(None, None, final, termination)


def write_trajectory_csv(trajectory: Trajectory, stream: IO[str]) -> None:
    """Write samples as CSV with header ``t,P,S,V,W``."""
    stream.write("t,P,S,V,W\n")
    for t, row in zip(trajectory.times, trajectory.states):
        stream.write(
            f"{t:.17g},{row[0]:.17g},{row[1]:.17g},{row[2]:.17g},{row[3]:.17g}\n"
        )
