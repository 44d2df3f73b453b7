"""Finite-support, piecewise-constant central potentials."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PotentialError(ValueError):
    """Invalid potential parameters or evaluation domain."""


@dataclass(frozen=True)
class PotentialSpec:
    """Piecewise-constant potential, zero beyond the last breakpoint.

    ``segments`` is a tuple of ``(r_end, value)`` pairs; segment ``j``
    covers ``[r_end[j-1], r_end[j])`` with ``r_end[-1] = 0``.  Values at a
    breakpoint belong to the segment on the right.
    """

    segments: tuple[tuple[float, float], ...]

    def __post_init__(self):
        segs = tuple((float(r), float(v)) for r, v in self.segments)
        if not segs:
            raise PotentialError("potential needs at least one segment")
        ends = [r for r, _ in segs]
        if ends[0] <= 0 or any(b <= a for a, b in zip(ends, ends[1:])):
            raise PotentialError(f"segment ends must be positive and strictly increasing, got {ends}")
        if not all(np.isfinite(v) for _, v in segs):
            raise PotentialError("segment values must be finite")
        object.__setattr__(self, "segments", segs)

    @property
    def r0(self) -> float:
        """Support radius."""
        return self.segments[-1][0]

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([0.0] + [r for r, _ in self.segments])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.segments])

    def __call__(self, r):
        return evaluate(self, r)

    def to_dict(self) -> dict:
        return {"segments": [{"r_end": r, "value": v} for r, v in self.segments]}


@dataclass(frozen=True)
class WellBarrierParams:
    """Square well of depth ``V0`` on ``[0, Delta)`` followed by a barrier of
    height ``lam`` on ``[Delta, r0)``."""

    V0: float
    Delta: float
    r0: float
    lam: float = 0.0

    def __post_init__(self):
        if min(self.V0, self.lam) < 0:
            raise PotentialError(f"V0 and lambda must be non-negative (V0={self.V0}, lambda={self.lam})")
        if not 0 < self.Delta < self.r0:
            raise PotentialError(f"need 0 < Delta < r0, got Delta={self.Delta}, r0={self.r0}")

    def with_lambda(self, lam: float) -> "WellBarrierParams":
        return WellBarrierParams(self.V0, self.Delta, self.r0, lam)

    def family(self) -> "LambdaFamily":
        return LambdaFamily(((self.Delta, -self.V0), (self.r0, 0.0)), slot=1)


@dataclass(frozen=True)
class LambdaFamily:
    """Piecewise-constant potentials whose segment ``slot`` (0-based) has value lambda.

    The stored value of that segment is ignored.
    """

    segments: tuple[tuple[float, float], ...]
    slot: int

    def __post_init__(self):
        spec = PotentialSpec(self.segments)
        if not 0 <= self.slot < len(spec.segments):
            raise PotentialError(f"lambda slot {self.slot} outside 0..{len(spec.segments) - 1}")
        object.__setattr__(self, "segments", spec.segments)

    @property
    def r0(self) -> float:
        return self.segments[-1][0]

    def at(self, lam: float) -> PotentialSpec:
        segs = list(self.segments)
        segs[self.slot] = (segs[self.slot][0], float(lam))
        return PotentialSpec(tuple(segs))

    def fixed_part(self) -> list[tuple[float, float, float]]:
        """``(r_start, r_end, value)`` for every segment except the lambda slot."""
        edges = [0.0] + [r for r, _ in self.segments]
        return [(edges[j], edges[j + 1], v) for j, (_, v) in enumerate(self.segments) if j != self.slot]

    @property
    def slot_range(self) -> tuple[float, float]:
        edges = [0.0] + [r for r, _ in self.segments]
        return edges[self.slot], edges[self.slot + 1]


def well_barrier(params: WellBarrierParams) -> PotentialSpec:
    return PotentialSpec(((params.Delta, -params.V0), (params.r0, params.lam)))


def evaluate(spec: PotentialSpec, r):
    """Potential at ``r`` (scalar or array); exactly zero for ``r >= r0``."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0) or np.any(np.isnan(r_arr)):
        raise PotentialError("potential evaluated at negative radius")
    ends = np.array([e for e, _ in spec.segments])
    vals = np.append(spec.values, 0.0)
    out = vals[np.searchsorted(ends, r_arr, side="right")]
    return float(out) if out.ndim == 0 else out
