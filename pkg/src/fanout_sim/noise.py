"""Error channels: depolarizing gate/idle noise and readout misassignment.

All channels preserve trace and Hermiticity. Trajectory unraveling of a
depolarizing channel with probability p samples a uniform non-identity
Pauli with probability p * (d^2 - 1) / d^2 (see ``depolarizing_sample_prob``),
so that averaging trajectories reproduces the channel exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable

import numpy as np

from .states import DensityState

#: Non-identity Pauli letter tuples for one and two qubits.
_PAULI_1Q = (("X",), ("Y",), ("Z",))
_PAULI_2Q = tuple(p for p in product("IXYZ", repeat=2) if p != ("I", "I"))


@dataclass(frozen=True)
class ConfusionMatrix:
    """Readout misassignment probabilities for a single qubit."""

    p01: float = 0.0  # P(read 0 | prepared 1)
    p10: float = 0.0  # P(read 1 | prepared 0)

    def __post_init__(self):
        for name, p in (("p01", self.p01), ("p10", self.p10)):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name}={p} outside [0, 1]")

    @property
    def epsilon_ro(self) -> float:
        """Two-state readout error, the average of both misassignments."""
        return 0.5 * (self.p01 + self.p10)

    def matrix(self) -> np.ndarray:
        """Column-stochastic matrix M[reported, true]."""
        return np.array([[1.0 - self.p10, self.p01], [self.p10, 1.0 - self.p01]])

    def inverse(self) -> np.ndarray:
        det = 1.0 - self.p01 - self.p10
        if abs(det) < 1e-12:
            raise ValueError("confusion matrix is singular and cannot be inverted")
        return np.linalg.inv(self.matrix())


def idle_error_probability(duration: float, t2_echo: float) -> float:
    """Idle depolarizing probability 1 - exp(-duration / t2_echo), in seconds."""
    if duration < 0.0:
        raise ValueError("duration must be nonnegative")
    if not t2_echo > 0.0:
        raise ValueError("t2_echo must be positive")
    if math.isinf(t2_echo):
        return 0.0
    return 1.0 - math.exp(-duration / t2_echo)


def idle_law_exponential(t2_echo: float) -> Callable[[float], float]:
    return lambda duration: idle_error_probability(duration, t2_echo)


def idle_law_linear(t2_echo: float) -> Callable[[float], float]:
    """Alternative small-time reading p = duration / t2_echo, capped at 1."""
    if not t2_echo > 0.0:
        raise ValueError("t2_echo must be positive")

    def law(duration: float) -> float:
        if duration < 0.0:
            raise ValueError("duration must be nonnegative")
        return min(duration / t2_echo, 1.0)

    return law


IDLE_LAWS = {"exponential": idle_law_exponential, "linear": idle_law_linear}

#: Median average gate errors from randomized benchmarking.
MEDIAN_EPS_1Q = 0.0005
MEDIAN_EPS_2Q = 0.011


def depol_from_average_error(eps: float, n_qubits: int) -> float:
    """Depolarizing probability matching an average gate error.

    A depolarizing channel of probability p has average gate fidelity
    1 - p (d-1)/d, so benchmarking errors convert as p = eps * d / (d-1).
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"average error {eps} outside [0, 1]")
    d = 2**n_qubits
    return eps * d / (d - 1)


@dataclass
class NoiseModel:
    """Depolarizing gate/idle rates plus per-qubit readout confusion.

    ``two_qubit_depol`` and ``single_qubit_depol`` are depolarizing channel
    probabilities; the defaults convert the median benchmarking errors via
    ``depol_from_average_error``. ``idle_law`` maps an idle duration in
    seconds to an error probability; when None the exponential law at
    ``t2_echo`` is used. The functional form is configurable because only
    the rate and duration are pinned by the device characterization.
    """

    two_qubit_depol: float = depol_from_average_error(MEDIAN_EPS_2Q, 2)
    single_qubit_depol: float = depol_from_average_error(MEDIAN_EPS_1Q, 1)
    confusion: ConfusionMatrix = field(default_factory=lambda: ConfusionMatrix(0.006, 0.006))
    t2_echo: float = 48e-6
    idle_law: Callable[[float], float] | None = None
    confusion_overrides: dict[int, ConfusionMatrix] = field(default_factory=dict)

    def __post_init__(self):
        for name, p in (
            ("two_qubit_depol", self.two_qubit_depol),
            ("single_qubit_depol", self.single_qubit_depol),
        ):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name}={p} outside [0, 1]")
        if not self.t2_echo > 0.0:
            raise ValueError("t2_echo must be positive")

    @classmethod
    def device_medians(cls) -> "NoiseModel":
        """Median device parameters: gate, readout, and coherence figures."""
        return cls()

    def idle_probability(self, duration_s: float) -> float:
        law = self.idle_law or idle_law_exponential(self.t2_echo)
        p = law(duration_s)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"idle law returned {p}, outside [0, 1]")
        return p

    def confusion_for(self, qubit: int) -> ConfusionMatrix:
        return self.confusion_overrides.get(qubit, self.confusion)

    @classmethod
    def from_mapping(cls, values: dict) -> "NoiseModel":
        """Build from a flat key/value mapping (e.g. a parsed config file).

        ``eps_1q``/``eps_2q`` give average gate errors (converted to channel
        probabilities); ``single_qubit_depol``/``two_qubit_depol`` set the
        channel probabilities directly.
        """
        known = {
            "eps_1q",
            "eps_2q",
            "two_qubit_depol",
            "single_qubit_depol",
            "readout_p01",
            "readout_p10",
            "t2_echo_s",
            "idle_law",
        }
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown noise parameters: {sorted(unknown)}")
        if "eps_2q" in values and "two_qubit_depol" in values:
            raise ValueError("give eps_2q or two_qubit_depol, not both")
        if "eps_1q" in values and "single_qubit_depol" in values:
            raise ValueError("give eps_1q or single_qubit_depol, not both")
        law_name = str(values.get("idle_law", "exponential"))
        if law_name not in IDLE_LAWS:
            raise ValueError(f"unknown idle law {law_name!r}")
        t2 = float(values.get("t2_echo_s", 48e-6))
        if "two_qubit_depol" in values:
            p2 = float(values["two_qubit_depol"])
        else:
            p2 = depol_from_average_error(float(values.get("eps_2q", MEDIAN_EPS_2Q)), 2)
        if "single_qubit_depol" in values:
            p1 = float(values["single_qubit_depol"])
        else:
            p1 = depol_from_average_error(float(values.get("eps_1q", MEDIAN_EPS_1Q)), 1)
        return cls(
            two_qubit_depol=p2,
            single_qubit_depol=p1,
            confusion=ConfusionMatrix(
                p01=float(values.get("readout_p01", 0.006)),
                p10=float(values.get("readout_p10", 0.006)),
            ),
            t2_echo=t2,
            idle_law=IDLE_LAWS[law_name](t2),
        )


def apply_depolarizing(state: DensityState, qubits, p: float) -> DensityState:
    """Depolarize the target qubits: rho -> (1-p) rho + p * (mixed x rest)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability {p} outside [0, 1]")
    targets = tuple(int(q) for q in qubits)
    if len(targets) not in (1, 2) or len(set(targets)) != len(targets):
        raise ValueError("depolarizing acts on one or two distinct qubits")
    for q in targets:
        state._check_qubit(q)
    if p == 0.0:
        return state
    n = state.n
    k = len(targets)
    dim_t = 2**k
    row_axes = targets
    col_axes = tuple(n + q for q in targets)
    t = np.moveaxis(state._tensor(), row_axes + col_axes, tuple(range(2 * k)))
    rest = t.shape[2 * k :]
    t = t.reshape((dim_t, dim_t) + rest).copy()
    tau = np.trace(t, axis1=0, axis2=1)
    t *= 1.0 - p
    for i in range(dim_t):
        t[i, i] += (p / dim_t) * tau
    t = t.reshape((2,) * (2 * k) + rest)
    t = np.moveaxis(t, tuple(range(2 * k)), row_axes + col_axes)
    dim = 2**n
    state.matrix = t.reshape(dim, dim)
    return state


def sample_pauli_error(qubits, p: float, rng: np.random.Generator) -> tuple[str, ...]:
    """Sample an error: all-identity with probability 1-p, else a uniform
    non-identity Pauli on the targets."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"error probability {p} outside [0, 1]")
    targets = tuple(qubits)
    if len(targets) not in (1, 2):
        raise ValueError("pauli errors act on one or two qubits")
    if p > 0.0 and rng.random() < p:
        table = _PAULI_1Q if len(targets) == 1 else _PAULI_2Q
        return table[rng.integers(len(table))]
    return ("I",) * len(targets)


def depolarizing_sample_prob(p: float, n_qubits: int) -> float:
    """Non-identity sampling probability whose trajectory average equals a
    depolarizing channel of probability p on ``n_qubits`` targets."""
    d2 = 4**n_qubits
    return p * (d2 - 1) / d2


def noisy_readout(true_outcome: int, confusion: ConfusionMatrix, rng: np.random.Generator) -> int:
    """Classically flip a measured bit according to the confusion matrix."""
    if true_outcome not in (0, 1):
        raise ValueError("outcome must be a bit")
    flip_p = confusion.p01 if true_outcome == 1 else confusion.p10
    if flip_p > 0.0 and rng.random() < flip_p:
        return 1 - true_outcome
    return true_outcome
