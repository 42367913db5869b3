"""Data types for the closed-form catalog."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from ..errors import DomainError
from ..structures import BlockStructure, GeneratingData

Accept = Callable[[np.ndarray], bool]


def _always(_u) -> bool:
    return True


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box in DH coordinates minus the loci rejected by ``accept``."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    accept: Accept = _always
    excluded: str = ""

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("box bounds have different lengths")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("empty box")

    @property
    def n(self) -> int:
        return len(self.lower)

    def contains(self, u) -> bool:
        u = np.asarray(u, dtype=float)
        lo, hi = np.array(self.lower), np.array(self.upper)
        if np.any(u < lo) or np.any(u > hi):
            return False
        try:
            return bool(self.accept(u))
        except (DomainError, ZeroDivisionError, ValueError, OverflowError):
            return False

    def with_box(self, index: int, lo: float, hi: float) -> "Domain":
        lower, upper = list(self.lower), list(self.upper)
        lower[index], upper[index] = lo, hi
        return Domain(tuple(lower), tuple(upper), self.accept, self.excluded)

    def sample(self, n_points: int, rng: np.random.Generator, max_tries: int = 200) -> np.ndarray:
        """Rejection-sample ``n_points`` uniformly distributed admissible points."""
        lo, hi = np.array(self.lower), np.array(self.upper)
        out = []
        tries = 0
        while len(out) < n_points:
            if tries > max_tries * max(n_points, 1):
                raise DomainError(f"could not sample {n_points} admissible points ({self.excluded})")
            tries += 1
            u = lo + (hi - lo) * rng.random(len(lo))
            if self.contains(u):
                out.append(u)
        return np.array(out).reshape(n_points, len(lo))


def point_rng(seed: int, *labels: str) -> np.random.Generator:
    """PCG64 generator keyed by the run seed and CRC32 of the labels.

    The CRC keeps streams stable across processes and Python versions
    (``hash`` of a str is salted per process).
    """
    keys = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [zlib.crc32(s.encode()) for s in labels]
    return np.random.default_rng(np.random.SeedSequence(keys))


@dataclass(frozen=True)
class FlatMap:
    """u -> x with the constant data expected in flat coordinates.

    ``eta`` and ``E`` are the printed values, or None when nothing is printed
    for this branch (then only constancy of the pushed-forward metric is tested).
    """

    func: Callable[[Sequence], list]
    branch: str
    eta: Optional[np.ndarray] = None
    E: Optional[Callable[[np.ndarray], np.ndarray]] = None
    e: Optional[np.ndarray] = None
    note: str = ""

    def __call__(self, u):
        return self.func(u)


@dataclass(frozen=True)
class Prepotential:
    func: Callable[[Sequence], object]
    x_accept: Accept = _always
    eta: Optional[np.ndarray] = None
    note: str = ""

    def __call__(self, x):
        return self.func(x)


@dataclass(frozen=True)
class FamilySpec:
    id: str
    variant: str
    n: int
    d: float
    constants: Mapping[str, float]
    C1: float
    C2: float
    f: Callable
    domain: Domain
    kind: str
    printed_F: Optional[Callable] = None
    ode: Mapping[str, Callable] = field(default_factory=dict)
    flat_map: Optional[FlatMap] = None
    prepotential: Optional[Prepotential] = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n not in (2, 3, 4):
            raise ValueError("n must be 2, 3 or 4")
        if self.d != 0 and self.C1 != 0:
            raise ValueError(f"{self.key}: C1 must vanish when d != 0")
        if self.domain.n != self.n:
            raise ValueError(f"{self.key}: domain dimension mismatch")

    @property
    def key(self) -> str:
        return f"{self.id}[{self.variant}]" if self.variant else self.id

    @property
    def block(self) -> BlockStructure:
        return BlockStructure.single(self.n)

    def generating_data(self, f: Callable | None = None) -> GeneratingData:
        return GeneratingData(f or self.f, self.C1, self.C2, self.d)

    @property
    def checks(self) -> tuple[str, ...]:
        out = ["axioms", "negative-control", "ode", "pencil"]
        if self.flat_map is not None:
            out.append("flat")
        if self.prepotential is not None:
            out.append("wdvv")
        return tuple(out)

    def to_json(self) -> dict:
        return {
            "key": self.key,
            "id": self.id,
            "variant": self.variant,
            "n": self.n,
            "d": self.d,
            "constants": dict(self.constants),
            "toolkit_C1": self.C1,
            "toolkit_C2": self.C2,
            "domain": {
                "lower": list(self.domain.lower),
                "upper": list(self.domain.upper),
                "excluded": self.domain.excluded,
            },
            "flat_map": None if self.flat_map is None else self.flat_map.branch,
            "prepotential": self.prepotential is not None,
            "checks": list(self.checks),
            "notes": list(self.notes),
        }
