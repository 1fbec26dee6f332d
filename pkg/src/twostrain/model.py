"""Core dynamics of a two-competitor system with two disease strains.

State is ``(P, S, V, W)``: a disease-free first competitor ``P``, and a
second competitor split into susceptibles ``S``, individuals infected by
strain one ``V``, and individuals infected by strain two ``W``. Both
competitors grow logistically; infection spreads by mass action within the
second population only; infected individuals recover back into ``S``, die
at strain-specific rates, and suffer extra predation-like pressure from
``P``. The two strains never co-infect, so they interact only through the
shared susceptible pool.

The vector field:

    dP/dt = s*(1 - P/L)*P - a*P*S
    dS/dt = r*(1 - S/K)*S - b*P*S - lam*V*S - beta*W*S + psi*V + phi*W
    dV/dt = lam*V*S - psi*V - mu*V - e*P*V
    dW/dt = beta*W*S - phi*W - nu*W - f*P*W

All parameters are nonnegative rates/capacities; the growth rates and
carrying capacities (``s``, ``r``, ``L``, ``K``) must be strictly positive.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

__all__ = [
    "ModelParameters",
    "StateVector",
    "BoundednessCertificate",
    "ReducedSystem",
    "COMPETITION_PS",
    "ONE_STRAIN_SV",
    "ONE_STRAIN_SW",
    "SUBSYSTEMS",
    "PARAMETER_KEYS",
    "rhs",
    "jacobian",
    "total_population",
    "reduce_system",
    "boundedness_certificate",
]

# Config-file key order; "lambda" is a Python keyword, stored as field `lam`.
PARAMETER_KEYS = (
    "s", "L", "a", "r", "K", "b", "lambda", "beta",
    "psi", "phi", "mu", "nu", "e", "f",
)

_STRICTLY_POSITIVE = ("s", "r", "L", "K")

COMPETITION_PS = "competition_PS"
ONE_STRAIN_SV = "one_strain_SV"
ONE_STRAIN_SW = "one_strain_SW"
SUBSYSTEMS = (COMPETITION_PS, ONE_STRAIN_SV, ONE_STRAIN_SW)


@dataclass(frozen=True)
class ModelParameters:
    """Rate constants of the full four-compartment model.

    Attributes:
        s: intrinsic growth rate of the first competitor.
        L: carrying capacity of the first competitor.
        a: competition pressure of S on P.
        r: intrinsic growth rate of the susceptible pool.
        K: carrying capacity of the second competitor.
        b: competition pressure of P on S.
        lam: transmission rate of strain one (config key "lambda").
        beta: transmission rate of strain two.
        psi: recovery rate from strain one.
        phi: recovery rate from strain two.
        mu: disease-induced mortality of strain one.
        nu: disease-induced mortality of strain two.
        e: pressure of P on strain-one infected.
        f: pressure of P on strain-two infected.
    """

    s: float
    L: float
    a: float
    r: float
    K: float
    b: float
    lam: float
    beta: float
    psi: float
    phi: float
    mu: float
    nu: float
    e: float
    f: float

    def __post_init__(self) -> None:
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise TypeError(f"parameter {field.name!r} must be a real number")
            value = float(value)
            if not math.isfinite(value):
                raise ValueError(f"parameter {field.name!r} must be finite")
            if value < 0.0:
                raise ValueError(f"parameter {field.name!r} must be >= 0, got {value}")
            object.__setattr__(self, field.name, value)
        for name in _STRICTLY_POSITIVE:
            if getattr(self, name) == 0.0:
                raise ValueError(f"parameter {name!r} must be > 0")

    def replace(self, **changes: float) -> "ModelParameters":
        """Return a copy with the given fields substituted (revalidates)."""
        if "lambda" in changes:
            changes["lam"] = changes.pop("lambda")
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        """Map external key names (including "lambda") to values."""
        out = {}
        for key in PARAMETER_KEYS:
            out[key] = getattr(self, "lam" if key == "lambda" else key)
        return out

    @classmethod
    def from_dict(cls, values: dict[str, float]) -> "ModelParameters":
        """Build from external key names; unknown or missing keys raise."""
        extra = set(values) - set(PARAMETER_KEYS)
        if extra:
            raise ValueError(f"unknown parameter keys: {sorted(extra)}")
        missing = set(PARAMETER_KEYS) - set(values)
        if missing:
            raise ValueError(f"missing parameter keys: {sorted(missing)}")
        kwargs = {("lam" if k == "lambda" else k): float(v) for k, v in values.items()}
        return cls(**kwargs)


@dataclass(frozen=True)
class StateVector:
    """A point in the nonnegative state space (P, S, V, W)."""

    P: float
    S: float
    V: float
    W: float

    def __post_init__(self) -> None:
        for name in ("P", "S", "V", "W"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"component {name} must be finite")
            if value < 0.0:
                raise ValueError(f"component {name} must be >= 0, got {value}")
            object.__setattr__(self, name, value)

    def __iter__(self) -> Iterator[float]:
        return iter((self.P, self.S, self.V, self.W))

    def __len__(self) -> int:
        return 4

    def __getitem__(self, i: int) -> float:
        return (self.P, self.S, self.V, self.W)[i]

    def as_array(self) -> np.ndarray:
        return np.array((self.P, self.S, self.V, self.W), dtype=float)

    @classmethod
    def from_array(cls, x: Sequence[float]) -> "StateVector":
        P, S, V, W = (float(v) for v in x)
        return cls(P, S, V, W)


def _components(x: "StateVector | Sequence[float] | np.ndarray") -> tuple[float, float, float, float]:
    P, S, V, W = x
    return float(P), float(S), float(V), float(W)


def scalar_field(params: ModelParameters) -> Callable[[float, float, float, float], tuple[float, float, float, float]]:
    """Return a plain-float callback computing the time derivatives.

    The returned function closes over unpacked parameter values, which keeps
    per-call overhead low inside integrator inner loops.
    """
    s, L, a = params.s, params.L, params.a
    r, K, b = params.r, params.K, params.b
    lam, beta = params.lam, params.beta
    psi, phi = params.psi, params.phi
    mu, nu = params.mu, params.nu
    e, f = params.e, params.f

    def field(P: float, S: float, V: float, W: float) -> tuple[float, float, float, float]:
        return (
            s * (1.0 - P / L) * P - a * P * S,
            r * (1.0 - S / K) * S - b * P * S - lam * V * S - beta * W * S + psi * V + phi * W,
            lam * V * S - psi * V - mu * V - e * P * V,
            beta * W * S - phi * W - nu * W - f * P * W,
        )

    return field


def rhs(params: ModelParameters, x: "StateVector | Sequence[float] | np.ndarray") -> np.ndarray:
    """Time derivative of the state at ``x``."""
    P, S, V, W = _components(x)
    return np.array(scalar_field(params)(P, S, V, W), dtype=float)


def jacobian(params: ModelParameters, x: "StateVector | Sequence[float] | np.ndarray") -> np.ndarray:
    """Exact 4x4 Jacobian of the vector field at ``x``.

    Rows follow the (P, S, V, W) equation order. The structural zeros
    (P does not couple directly to V or W, and the strains never couple
    directly to each other) are kept exact.
    """
    P, S, V, W = _components(x)
    p = params
    J = np.zeros((4, 4), dtype=float)
    J[0, 0] = p.s - 2.0 * p.s * P / p.L - p.a * S
    J[0, 1] = -p.a * P
    J[1, 0] = -p.b * S
    J[1, 1] = p.r * (1.0 - S / p.K) - p.r * S / p.K - p.lam * V - p.beta * W - p.b * P
    J[1, 2] = -p.lam * S + p.psi
    J[1, 3] = -p.beta * S + p.phi
    J[2, 0] = -p.e * V
    J[2, 1] = p.lam * V
    J[2, 2] = p.lam * S - p.psi - p.mu - p.e * P
    J[3, 0] = -p.f * W
    J[3, 1] = p.beta * W
    J[3, 3] = p.beta * S - p.phi - p.nu - p.f * P
    return J


def total_population(x: "StateVector | Sequence[float] | np.ndarray") -> float:
    """Sum of all four compartments."""
    P, S, V, W = _components(x)
    return P + S + V + W


@dataclass(frozen=True)
class ReducedSystem:
    """A two-dimensional restriction of the model to an invariant face.

    ``rhs`` and ``jacobian`` act on 2-vectors in the retained coordinates.
    """

    name: str
    variables: tuple[str, str]
    rhs: Callable[[Sequence[float]], np.ndarray]
    jacobian: Callable[[Sequence[float]], np.ndarray]


def reduce_system(params: ModelParameters, subsystem: str) -> ReducedSystem:
    """Restrict the model to one of its invariant two-species faces.

    Supported faces: "competition_PS" (V = W = 0), "one_strain_SV"
    (P = W = 0) and "one_strain_SW" (P = V = 0). The restriction agrees
    exactly with the full field evaluated on the face.
    """
    p = params
    if subsystem == COMPETITION_PS:

        def rhs2(x: Sequence[float]) -> np.ndarray:
            P, S = float(x[0]), float(x[1])
            return np.array(
                (
                    p.s * (1.0 - P / p.L) * P - p.a * P * S,
                    p.r * (1.0 - S / p.K) * S - p.b * P * S,
                )
            )

        def jac2(x: Sequence[float]) -> np.ndarray:
            P, S = float(x[0]), float(x[1])
            return np.array(
                (
                    (p.s - 2.0 * p.s * P / p.L - p.a * S, -p.a * P),
                    (-p.b * S, p.r * (1.0 - S / p.K) - p.r * S / p.K - p.b * P),
                )
            )

        return ReducedSystem(subsystem, ("P", "S"), rhs2, jac2)

    if subsystem in (ONE_STRAIN_SV, ONE_STRAIN_SW):
        if subsystem == ONE_STRAIN_SV:
            trans, rec, death = p.lam, p.psi, p.mu
            names = ("S", "V")
        else:
            trans, rec, death = p.beta, p.phi, p.nu
            names = ("S", "W")

        def rhs2(x: Sequence[float]) -> np.ndarray:
            S, I = float(x[0]), float(x[1])
            return np.array(
                (
                    p.r * (1.0 - S / p.K) * S - trans * I * S + rec * I,
                    trans * I * S - rec * I - death * I,
                )
            )

        def jac2(x: Sequence[float]) -> np.ndarray:
            S, I = float(x[0]), float(x[1])
            return np.array(
                (
                    (p.r * (1.0 - S / p.K) - p.r * S / p.K - trans * I, -trans * S + rec),
                    (trans * I, trans * S - rec - death),
                )
            )

        return ReducedSystem(subsystem, names, rhs2, jac2)

    raise ValueError(f"unknown subsystem {subsystem!r}; expected one of {SUBSYSTEMS}")


@dataclass(frozen=True)
class BoundednessCertificate:
    """Witness of an explicit forward-in-time bound on the total population.

    For any ``epsilon`` with ``0 < epsilon < min(mu, nu)`` the total
    population ``N = P + S + V + W`` satisfies
    ``N(t) <= max(N(0), C / epsilon)`` with
    ``C = (s + epsilon) * L + (r + epsilon) * K``: for all ``t >= 0``
    once the healthy pools sit at or below their carrying capacities,
    and beyond a transient of order ``5 / epsilon`` from any start
    (capacity overshoot decays at least logistically, after which the
    differential inequality ``N' <= C - epsilon * N`` applies).
    """

    epsilon: float
    C: float
    bound: float

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon:
            raise ValueError("epsilon must be positive")
        if self.C <= 0.0:
            raise ValueError("C must be positive")
        if self.bound < self.C / self.epsilon:
            raise ValueError("bound must be at least C / epsilon")


def boundedness_certificate(
    params: ModelParameters,
    x0: "StateVector | Sequence[float] | np.ndarray",
    epsilon: float | None = None,
) -> BoundednessCertificate:
    """Construct the explicit population bound for a given start state.

    ``epsilon`` defaults to ``min(mu, nu) / 2`` and must satisfy
    ``0 < epsilon < min(mu, nu)``; both mortalities must therefore be
    positive for a certificate to exist.
    """
    cap = min(params.mu, params.nu)
    if cap <= 0.0:
        raise ValueError("certificate requires mu > 0 and nu > 0")
    if epsilon is None:
        epsilon = cap / 2.0
    if not 0.0 < epsilon < cap:
        raise ValueError(f"epsilon must lie in (0, {cap}), got {epsilon}")
    C = (params.s + epsilon) * params.L + (params.r + epsilon) * params.K
    bound = max(total_population(x0), C / epsilon)
    return BoundednessCertificate(epsilon=epsilon, C=C, bound=bound)
