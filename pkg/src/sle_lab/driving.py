"""Driving functions on uniform grids and their modulus-of-continuity check.

A driving function is stored as samples U_0..U_n on a uniform grid of
spacing dt, always with U_0 = 0, together with the capacity rate `a` of
the flow it is meant to drive.  Two Brownian normalizations are used:

    brownian_std: U is standard Brownian motion, a = 2/kappa
    brownian_sle: U = sqrt(kappa) B, a = 2

Both come from the same underlying stream, so the brownian_sle path for
a given seed is exactly sqrt(kappa) times the brownian_std path.

The regularity gate for trace estimates is a weak Holder-1/2 modulus:
|U_{t+s} - U_t| <= sqrt(r) phi(1/r) for all |s| <= r, with phi a slowly
growing (subpower) envelope phi(x) = c (log(e + x))^p.  Levy's modulus
says Brownian motion satisfies this with any c > sqrt(2), p = 1/2.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from ._rng import stream
from .errors import BadGrid, NonPositiveKappa, ValidationError

__all__ = [
    "DrivingPath",
    "SubpowerEnvelope",
    "WeakHolderCheck",
    "sample_brownian",
    "deterministic_driver",
    "check_weak_holder",
    "save_driver",
    "load_driver",
]

_KINDS = ("brownian_std", "brownian_sle", "constant", "linear", "custom")


@dataclass(frozen=True, eq=False)
class DrivingPath:
    """Uniform-grid driving function plus the capacity rate of its flow.

    values[k] is the driver at time k*dt; values[0] must be 0.  The
    array is frozen read-only so paths can be shared across workers.
    """

    dt: float
    values: np.ndarray
    a: float
    kind: str = "custom"
    seed: Optional[int] = None
    kappa: Optional[float] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise BadGrid(f"dt must be positive, got {self.dt}")
        if not self.a > 0:
            raise ValidationError(f"capacity rate a must be positive, got {self.a}")
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown driver kind {self.kind!r}")
        values = np.ascontiguousarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise BadGrid("driver needs at least two grid values")
        if values[0] != 0.0:
            raise ValidationError("driver must start at 0")
        if not np.all(np.isfinite(values)):
            raise ValidationError("driver contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_steps(self) -> int:
        return self.values.size - 1

    @property
    def horizon(self) -> float:
        return self.dt * self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * self.dt


def _grid_steps(T: float, dt: float) -> int:
    if not dt > 0 or not T > 0 or dt > T * (1 + 1e-12):
        raise BadGrid(f"need 0 < dt <= T, got dt={dt}, T={T}")
    # ceil with a guard against T/dt landing a hair above an integer
    return max(1, int(math.ceil(T / dt - 1e-9)))


def sample_brownian(
    kappa: float,
    T: float,
    dt: float,
    seed: int,
    normalization: str = "brownian_std",
) -> DrivingPath:
    """Brownian driver on [0, T] with ceil(T/dt) steps.

    normalization selects the capacity rate: 'brownian_std' runs a
    standard Brownian motion with a = 2/kappa, 'brownian_sle' scales
    the same stream by sqrt(kappa) and uses a = 2.
    """
    if not kappa > 0:
        raise NonPositiveKappa(f"kappa must be positive, got {kappa}")
    n = _grid_steps(T, dt)
    xi = stream(seed, 0).standard_normal(n)
    u = np.empty(n + 1)
    u[0] = 0.0
    np.cumsum(xi * math.sqrt(dt), out=u[1:])
    if normalization == "brownian_std":
        a = 2.0 / kappa
    elif normalization == "brownian_sle":
        u *= math.sqrt(kappa)
        a = 2.0
    else:
        raise ValidationError(f"unknown normalization {normalization!r}")
    return DrivingPath(dt=dt, values=u, a=a, kind=normalization, seed=int(seed), kappa=float(kappa))


def deterministic_driver(
    kind: str,
    T: float,
    dt: float,
    *,
    u0: float = 0.0,
    slope: float = 1.0,
    a: float = 1.0,
) -> DrivingPath:
    """Constant or linear test driver.

    'constant' keeps the driver at u0 (only u0 = 0 is a valid driver,
    anything else is rejected); 'linear' moves at the given slope.
    """
    n = _grid_steps(T, dt)
    t = np.arange(n + 1) * dt
    if kind == "constant":
        values = np.full(n + 1, float(u0))
    elif kind == "linear":
        values = slope * t
    else:
        raise ValidationError(f"unknown deterministic kind {kind!r}")
    return DrivingPath(dt=dt, values=values, a=a, kind=kind)


@dataclass(frozen=True)
class SubpowerEnvelope:
    """phi(x) = c (log(e + x))^p, a function growing slower than any power."""

    c: float
    p: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValidationError(f"envelope scale c must be positive, got {self.c}")
        if self.p < 0:
            raise ValidationError(f"envelope power p must be >= 0, got {self.p}")

    def __call__(self, x):
        return self.c * np.log(np.e + np.asarray(x, dtype=float)) ** self.p


@dataclass(frozen=True)
class WeakHolderCheck:
    """Result of the modulus check: worst ratio and exact violation count."""

    max_ratio: float
    violations: int
    scales: np.ndarray
    ratios: np.ndarray


def check_weak_holder(path: DrivingPath, envelope: SubpowerEnvelope) -> WeakHolderCheck:
    """Test sup_{|s|<=r} |U_{t+s} - U_t| <= sqrt(r) phi(1/r) at dyadic r.

    Scales run over r = dt, 2 dt, 4 dt, ... capped at T/512: the modulus
    is a small-scale statement, and windows comparable to the horizon
    measure the global range, which exceeds any fixed envelope with
    positive probability.  (On grids too coarse for the cap the single
    scale r = dt is still tested.)  The supremum at each scale is a
    rolling max-minus-min over windows of 2^k + 1 grid points, which is
    O(n) per scale; pairs are only enumerated (to count violations
    exactly) at scales whose supremum actually exceeds the bound.
    """
    u = path.values
    n = path.n_steps
    cap_steps = max(n // 512, 1)
    scales, ratios = [], []
    violations = 0
    k = 0
    while (1 << k) <= cap_steps:
        w = 1 << k
        r = w * path.dt
        bound = math.sqrt(r) * float(envelope(1.0 / r))
        hi = maximum_filter1d(u, size=w + 1, mode="nearest")
        lo = minimum_filter1d(u, size=w + 1, mode="nearest")
        sup = float(np.max(hi - lo))
        scales.append(r)
        ratios.append(sup / bound)
        if sup > bound:
            for off in range(1, w + 1):
                violations += int(np.count_nonzero(np.abs(u[off:] - u[:-off]) > bound))
        k += 1
    ratios = np.asarray(ratios)
    return WeakHolderCheck(
        max_ratio=float(ratios.max()),
        violations=violations,
        scales=np.asarray(scales),
        ratios=ratios,
    )


def save_driver(path: DrivingPath, file) -> None:
    """Write the driver as CSV with header t,u at 17 significant digits.

    17 digits round-trips IEEE doubles exactly, so load_driver restores
    the values bit for bit.
    """
    close = False
    if isinstance(file, (str, bytes)) or hasattr(file, "__fspath__"):
        file = open(file, "w", encoding="utf-8", newline="")
        close = True
    try:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(["t", "u"])
        for k, u in enumerate(path.values):
            writer.writerow([f"{k * path.dt:.17g}", f"{u:.17g}"])
    finally:
        if close:
            file.close()


def load_driver(
    file,
    a: float,
    kind: str = "custom",
    seed: Optional[int] = None,
    kappa: Optional[float] = None,
) -> DrivingPath:
    """Read a t,u CSV back into a DrivingPath.

    The capacity rate is not stored in the CSV and must be supplied.
    """
    close = False
    if isinstance(file, (str, bytes)) or hasattr(file, "__fspath__"):
        file = open(file, "r", encoding="utf-8", newline="")
        close = True
    try:
        reader = csv.reader(file)
        header = next(reader)
        if [h.strip() for h in header] != ["t", "u"]:
            raise ValidationError(f"expected header t,u, got {header}")
        rows = [(float(t), float(u)) for t, u in reader]
    finally:
        if close:
            file.close()
    if len(rows) < 2:
        raise BadGrid("driver CSV needs at least two rows")
    t = np.array([row[0] for row in rows])
    u = np.array([row[1] for row in rows])
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=1e-12, atol=1e-15):
        raise BadGrid("driver CSV grid is not uniform")
    return DrivingPath(dt=float(dt), values=u, a=a, kind=kind, seed=seed, kappa=kappa)
