"""Classical control: recovery rules, lookup tables, and Pauli-frame tracking.

A fan-out run with n outputs measures n-1 qubit pairs, yielding bits
(z_1, x_1, ..., z_{n-1}, x_{n-1}). The recovery on output q is X raised to
the parity of x_1..x_q followed by Z raised to z_q; the last output needs
no Z. Two-bit recovery indices are encoded 0=I, 1=X, 2=Z, 3=Z*X.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

RECOVERY_LABELS = ("I", "X", "Z", "ZX")


@dataclass(frozen=True)
class BellOutcome:
    """Measurement record of the n-1 pair measurements."""

    z: tuple[int, ...]
    x: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(int(b) for b in self.z))
        object.__setattr__(self, "x", tuple(int(b) for b in self.x))
        if len(self.z) != len(self.x):
            raise ValueError("z and x bit vectors must have equal length")
        for b in self.z + self.x:
            if b not in (0, 1):
                raise ValueError("outcome entries must be bits")

    @property
    def pairs(self) -> int:
        return len(self.z)

    def key(self) -> str:
        """Interleaved bit key z1 x1 z2 x2 ..."""
        return "".join(f"{z}{x}" for z, x in zip(self.z, self.x))

    @classmethod
    def from_key(cls, key: str) -> "BellOutcome":
        if len(key) % 2 or set(key) - {"0", "1"}:
            raise ValueError(f"malformed outcome key {key!r}")
        bits = [int(c) for c in key]
        return cls(z=tuple(bits[0::2]), x=tuple(bits[1::2]))


@dataclass(frozen=True)
class RecoveryOp:
    """Conditional correction on one output qubit: X^apply_x then Z^apply_z."""

    apply_x: int
    apply_z: int

    def __post_init__(self):
        if self.apply_x not in (0, 1) or self.apply_z not in (0, 1):
            raise ValueError("recovery flags must be bits")

    @property
    def index(self) -> int:
        return 2 * self.apply_z + self.apply_x

    @property
    def label(self) -> str:
        return RECOVERY_LABELS[self.index]


@dataclass(frozen=True)
class PauliFrame:
    """Accumulated virtual X/Z corrections, one flag pair per output qubit."""

    x_flips: tuple[int, ...]
    z_flips: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "x_flips", tuple(int(b) for b in self.x_flips))
        object.__setattr__(self, "z_flips", tuple(int(b) for b in self.z_flips))
        if len(self.x_flips) != len(self.z_flips):
            raise ValueError("frame flag vectors must have equal length")

    @classmethod
    def identity(cls, n: int) -> "PauliFrame":
        return cls((0,) * n, (0,) * n)

    @property
    def size(self) -> int:
        return len(self.x_flips)


def recovery_ops(outcome: BellOutcome, n: int) -> list[RecoveryOp]:
    """Recovery for each of the n outputs given a pair-measurement record."""
    if outcome.pairs != n - 1:
        raise ValueError(f"outcome holds {outcome.pairs} pairs, expected {n - 1}")
    ops = []
    parity = 0
    for q in range(1, n):
        parity ^= outcome.x[q - 1]
        ops.append(RecoveryOp(apply_x=parity, apply_z=outcome.z[q - 1]))
    ops.append(RecoveryOp(apply_x=parity, apply_z=0))
    return ops


def build_lookup_table(n: int) -> dict[str, tuple[int, ...]]:
    """All 2^(2(n-1)) outcome keys mapped to n two-bit recovery indices."""
    if n < 2:
        raise ValueError("need at least two outputs")
    table = {}
    for bits in product((0, 1), repeat=2 * (n - 1)):
        outcome = BellOutcome(z=bits[0::2], x=bits[1::2])
        table[outcome.key()] = tuple(op.index for op in recovery_ops(outcome, n))
    return table


def frame_update(frame: PauliFrame, outcome: BellOutcome) -> PauliFrame:
    """XOR the recovery implied by an outcome into the frame."""
    n = frame.size
    ops = recovery_ops(outcome, n)
    return PauliFrame(
        x_flips=tuple(f ^ op.apply_x for f, op in zip(frame.x_flips, ops)),
        z_flips=tuple(f ^ op.apply_z for f, op in zip(frame.z_flips, ops)),
    )


def adjust_pauli(observable: str, frame: PauliFrame) -> tuple[int, str]:
    """Sign picked up by an observable measured under a Pauli frame.

    The observable itself is unchanged; the sign flips once for every
    anticommuting pair (frame X against measured Z or Y, frame Z against
    measured X or Y).
    """
    if len(observable) != frame.size:
        raise ValueError("observable length must match the frame size")
    sign = 1
    for letter, xf, zf in zip(observable, frame.x_flips, frame.z_flips):
        if letter not in "IXYZ":
            raise ValueError(f"invalid pauli letter {letter!r}")
        if xf and letter in "ZY":
            sign = -sign
        if zf and letter in "XY":
            sign = -sign
    return sign, observable


def serialize_lookup_table(table: dict[str, tuple[int, ...]]) -> str:
    """Plain-text table: one ``key -> indices`` line per outcome."""
    lines = [f"{key} -> {' '.join(str(i) for i in table[key])}" for key in sorted(table)]
    return "\n".join(lines) + "\n"
