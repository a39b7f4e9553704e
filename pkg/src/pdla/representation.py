"""Fixed-point integer encoding of feature rows and skip-sequence reduction."""
from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

import numpy as np

INT64_MIN = -(2 ** 63)
INT64_MAX = 2 ** 63 - 1


class EncodingOverflow(OverflowError):
    pass


@dataclass(frozen=True)
class IntegerChunk:
    """An ordered vector of symbolic integer units."""
    units: tuple[int, ...]

    def __post_init__(self):
        units = tuple(int(u) for u in self.units)
        if not units:
            raise ValueError("IntegerChunk needs at least one unit")
        for u in units:
            if not INT64_MIN <= u <= INT64_MAX:
                raise EncodingOverflow(f"unit {u} outside the signed 64-bit range")
        object.__setattr__(self, "units", units)

    def __len__(self):
        return len(self.units)

    def __iter__(self):
        return iter(self.units)

    def __getitem__(self, i):
        return self.units[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.units, dtype=np.int64)


def chunk(*units: int) -> IntegerChunk:
    return IntegerChunk(tuple(units))


@dataclass(frozen=True)
class EncoderConfig:
    scale_digits: int = 2

    def __post_init__(self):
        if not 0 <= self.scale_digits <= 9:
            raise ValueError(f"scale_digits must be in [0, 9], got {self.scale_digits}")


@dataclass(frozen=True)
class SksPolicy:
    sks: int = 1

    def __post_init__(self):
        if self.sks < 1:
            raise ValueError(f"sks must be >= 1, got {self.sks}")


def encode(features: Sequence[float], cfg: EncoderConfig = EncoderConfig()) -> IntegerChunk:
    # Scaling goes through the shortest decimal repr so that 1.005 at d=2
    # rounds to 101 rather than to the binary float's 100.4999...
    scale = Decimal(10) ** cfg.scale_digits
    units = []
    for x in features:
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError(f"cannot encode non-finite value {x}")
        q = (Decimal(repr(float(x))) * scale).to_integral_value(rounding=ROUND_HALF_UP)
        u = int(q)
        if not INT64_MIN <= u <= INT64_MAX:
            raise EncodingOverflow(f"{x} scaled by 10^{cfg.scale_digits} overflows int64")
        units.append(u)
    return IntegerChunk(tuple(units))


def decode(c: IntegerChunk, cfg: EncoderConfig = EncoderConfig()) -> list[float]:
    scale = 10 ** cfg.scale_digits
    return [u / scale for u in c.units]


def apply_sks(sequences: Sequence, policy: SksPolicy | int) -> list:
    """Keep one of every ``sks`` sequences, starting with the first."""
    step = policy.sks if isinstance(policy, SksPolicy) else SksPolicy(int(policy)).sks
    return list(sequences[::step])


def retained_indices(length: int, policy: SksPolicy | int) -> list[int]:
    step = policy.sks if isinstance(policy, SksPolicy) else SksPolicy(int(policy)).sks
    return list(range(0, length, step))
