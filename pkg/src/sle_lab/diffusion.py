"""Radial diffusion surrogate for reverse-flow derivative statistics.

Centering the reverse flow at z = i and passing to the time change
sigma(t) = int_0^t exp(2 a s) cosh^2(J_s) ds turns the angular
coordinate J = arcsinh(X/Y) into an autonomous one-dimensional
diffusion:

    dJ = -r_c tanh(J) dt + dW      under the plain measure P
    dJ = -q  tanh(J) dt + dB       under the weighted measure P*

with r_c = (1 + 4a)/2 and q = r_c - r.  With
L_t = t - int_0^t 2/cosh^2(J_s) ds and eta = sigma^{-1}, the triple

    (exp(a L_{eta(s)}),  exp(a eta(s)),  cosh J_{eta(s)})

has the joint law of (|h'_s(i)|, Y_s, 1/S_s) along the flow, so flow
statistics can be sampled thousands of times faster than by running
slit maps.  The change of measure is the exponential martingale

    N_t = exp(a lambda L_t) exp(a zeta t) cosh(J_t)^r,   E_P[N_t] = 1,

and under P* the coordinate J has invariant density
v(x) = Gamma(q+1/2) / (sqrt(pi) Gamma(q)) cosh(x)^{-2q} with
int (1 - 2/cosh^2 x) v(x) dx = (1 - 2q)/(1 + 2q) = beta.

Discretization: J moves by Euler steps; L and sigma integrate their
integrands as frozen over each step (left endpoint), matching the
piecewise-constant philosophy of the slit-map flow.  The exponential
factor inside sigma is integrated in closed form, so in the zero-noise
mode (J identically 0) sigma, L, and the surrogate derivative are exact
to rounding, and the deterministic bound sigma(t) >= (e^{2at}-1)/(2a)
holds pointwise for every discrete path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from . import _mc
from ._rng import BlockStreams, stream
from .errors import (
    BadGrid,
    BadTime,
    HorizonExceeded,
    SupercriticalR,
    TooFewPoints,
    ValidationError,
    WrongMeasure,
)
from .exponents import ExponentSet

__all__ = [
    "DiffusionPath",
    "SurrogateSamples",
    "SigmaTail",
    "simulate_J",
    "martingale_N",
    "invariant_density",
    "beta_from_density",
    "surrogate_derivative",
    "sigma_tail",
    "martingale_terminal",
    "surrogate_terminal",
    "max_abs_J",
]

MEASURES = ("P", "Pstar")

_RNG_BLOCK = 512


def _logcosh(x):
    x = np.abs(np.asarray(x, dtype=float))
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


def _drift_coefficient(params: ExponentSet, measure: str) -> float:
    if measure == "P":
        return params.r_c
    if measure == "Pstar":
        return params.q
    raise WrongMeasure(f"measure must be one of {MEASURES}, got {measure!r}")


@dataclass(frozen=True)
class DiffusionPath:
    """Euler path of J with its accumulated L and sigma integrals.

    sigma is also kept in log form; for long horizons exp(2 a t) leaves
    the double range and only log_sigma stays meaningful.
    """

    dt: float
    J: np.ndarray
    L: np.ndarray
    sigma: np.ndarray
    log_sigma: np.ndarray
    measure: str
    params: ExponentSet
    seed: Optional[int] = None
    zero_noise: bool = False

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.J.size) * self.dt

    @property
    def horizon(self) -> float:
        return self.dt * (self.J.size - 1)


def simulate_J(
    params: ExponentSet,
    T: float,
    dt: float,
    seed: int = 0,
    measure: str = "P",
    j0: float = 0.0,
    zero_noise: bool = False,
) -> DiffusionPath:
    """Euler-Maruyama path of the radial diffusion on [0, T]."""
    if not dt > 0 or not T > 0 or dt > T * (1 + 1e-12):
        raise BadGrid(f"need 0 < dt <= T, got dt={dt}, T={T}")
    drift = _drift_coefficient(params, measure)
    n = max(1, int(math.ceil(T / dt - 1e-9)))
    j = np.empty(n + 1)
    j[0] = float(j0)
    if zero_noise:
        dw = np.zeros(n)
    else:
        dw = stream(seed, 0).standard_normal(n) * math.sqrt(dt)
    x = float(j0)
    for k in range(n):
        x = x - drift * math.tanh(x) * dt + dw[k]
        j[k + 1] = x

    a = params.a
    # L and sigma with integrands frozen over each step (left endpoint);
    # the exp(2 a s) factor inside sigma is integrated exactly.
    inv_cosh2 = 1.0 / np.cosh(j[:-1]) ** 2
    L = np.concatenate(([0.0], np.arange(1, n + 1) * dt - np.cumsum(2.0 * dt * inv_cosh2)))
    t_left = np.arange(n) * dt
    log_terms = 2.0 * _logcosh(j[:-1]) + 2.0 * a * t_left + math.log(math.expm1(2.0 * a * dt) / (2.0 * a))
    log_sigma = np.concatenate(([-np.inf], np.logaddexp.accumulate(log_terms)))
    with np.errstate(over="ignore"):
        sigma = np.exp(log_sigma)
    return DiffusionPath(
        dt=float(dt), J=j, L=L, sigma=sigma, log_sigma=log_sigma,
        measure=measure, params=params, seed=int(seed), zero_noise=zero_noise,
    )


def martingale_N(path: DiffusionPath) -> np.ndarray:
    """N_t = exp(a lambda L_t + a zeta t) cosh(J_t)^r along the path.

    Only defined under P; under P* the same formula is not a martingale
    and asking for it is almost surely a bug.
    """
    if path.measure != "P":
        raise WrongMeasure("martingale_N needs a path simulated under P")
    p = path.params
    expo = p.a * p.lam * path.L + p.a * p.zeta * path.times + p.r * _logcosh(path.J)
    return np.exp(expo)


def invariant_density(q: float, x) -> np.ndarray:
    """Stationary density of J under P*: propto cosh(x)^(-2q), q > 0."""
    if not q > 0:
        raise SupercriticalR(f"invariant density needs q > 0, got q={q}")
    norm = math.exp(gammaln(q + 0.5) - gammaln(q)) / math.sqrt(math.pi)
    return norm * np.exp(-2.0 * q * _logcosh(x))


def beta_from_density(q: float) -> float:
    """int (1 - 2/cosh^2 x) v(x) dx, which equals (1-2q)/(1+2q)."""
    if not q > 0:
        raise SupercriticalR(f"beta_from_density needs q > 0, got q={q}")

    log_norm = gammaln(q + 0.5) - gammaln(q) - 0.5 * math.log(math.pi)

    def integrand(x):
        # sech^2 and cosh^(-2q) via exp(-2x) so quad can probe x ~ 1e3
        e2 = math.exp(-2.0 * x)
        c2 = 4.0 * e2 / (1.0 + e2) ** 2
        v = math.exp(log_norm - 2.0 * q * float(_logcosh(x)))
        return (1.0 - 2.0 * c2) * v

    val, _ = quad(integrand, 0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)
    return 2.0 * val


@dataclass(frozen=True)
class SurrogateSamples:
    """Flow-law samples read off a diffusion path at flow times s."""

    s: np.ndarray
    abs_h_prime: np.ndarray
    Y: np.ndarray
    inv_S: np.ndarray


def surrogate_derivative(path: DiffusionPath, s_grid: Sequence[float]) -> SurrogateSamples:
    """(|h'_s(i)|, Y_s, 1/S_s) surrogate at flow times s = sigma(eta).

    eta(s) inverts sigma by linear interpolation of log sigma on the
    grid; s = 0 returns (1, 1, 1) exactly.
    """
    if path.measure != "P":
        raise WrongMeasure("the flow identification holds under P")
    s_grid = np.atleast_1d(np.asarray(s_grid, dtype=float))
    if np.any(s_grid < 0) or not np.all(np.isfinite(s_grid)):
        raise BadTime("flow times must be finite and >= 0")
    sigma_top = path.log_sigma[-1]
    with np.errstate(divide="ignore"):
        log_s = np.log(s_grid)
    if np.any(log_s > sigma_top):
        raise HorizonExceeded(
            f"flow time {s_grid.max()} beyond sigma(T) = exp({sigma_top})")
    times = path.times
    eta = np.interp(log_s, path.log_sigma, times)
    L_eta = np.interp(eta, times, path.L)
    J_eta = np.interp(eta, times, path.J)
    zero = s_grid == 0.0
    if np.any(zero):
        eta = np.where(zero, 0.0, eta)
        L_eta = np.where(zero, 0.0, L_eta)
        J_eta = np.where(zero, 0.0, J_eta)
    a = path.params.a
    return SurrogateSamples(
        s=s_grid,
        abs_h_prime=np.exp(a * L_eta),
        Y=np.exp(a * eta),
        inv_S=np.cosh(J_eta),
    )


# ---------------------------------------------------------------------------
# chunked batch samplers (pure functions of (start, stop, seed, scalars))


def _scan_block(seed, start, stop, n_steps, dt):
    """Generator of per-step noise columns for samples [start, stop)."""
    streams = BlockStreams(seed, range(start, stop))
    done = 0
    root = math.sqrt(dt)
    while done < n_steps:
        take = min(_RNG_BLOCK, n_steps - done)
        yield streams.next_block(take) * root
        done += take


def _mart_chunk(start, stop, seed, a, r, r_c, lam, zeta, T, dt):
    w = stop - start
    n = max(1, int(math.ceil(T / dt - 1e-9)))
    J = np.zeros(w)
    L = np.zeros(w)
    for block in _scan_block(seed, start, stop, n, dt):
        for k in range(block.shape[0]):
            L += dt - 2.0 * dt / np.cosh(J) ** 2
            J += -r_c * np.tanh(J) * dt + block[k]
    t_end = n * dt
    return np.exp(a * lam * L + a * zeta * t_end + r * _logcosh(J))


def martingale_terminal(
    params: ExponentSet, T: float, dt: float, seed: int, samples: int, workers: int = 1
) -> np.ndarray:
    """N_T across independent paths under P (streaming, O(1) memory/path)."""
    if samples < 1:
        raise TooFewPoints("need at least one sample")
    return _mc.run_chunked(
        _mart_chunk, samples, seed, params.a, params.r, params.r_c,
        params.lam, params.zeta, T, dt, workers=workers,
    )


def _surrogate_chunk(start, stop, seed, a, r_c, s_values, dt):
    w = stop - start
    s_values = np.asarray(s_values, dtype=float)
    n_targets = s_values.size
    log_targets = np.log(s_values)
    # sigma(t) >= (exp(2at)-1)/(2a) guarantees every target is crossed by T
    T = math.log1p(2.0 * a * float(s_values.max())) / (2.0 * a)
    n = int(math.ceil(T / dt - 1e-9)) + 1
    J = np.zeros(w)
    L = np.zeros(w)
    log_sig = np.full(w, -np.inf)
    ptr = np.zeros(w, dtype=np.int64)
    out_L = np.empty((n_targets, w))
    out_eta = np.empty((n_targets, w))
    out_J = np.empty((n_targets, w))
    log_step_factor = math.log(math.expm1(2.0 * a * dt) / (2.0 * a))
    k = 0
    for block in _scan_block(seed, start, stop, n, dt):
        for row in range(block.shape[0]):
            t_left = k * dt
            term = 2.0 * _logcosh(J) + 2.0 * a * t_left + log_step_factor
            log_sig_new = np.logaddexp(log_sig, term)
            L_new = L + dt - 2.0 * dt / np.cosh(J) ** 2
            J_new = J - r_c * np.tanh(J) * dt + block[row]
            # record every target crossed inside this step
            while True:
                live = ptr < n_targets
                if not np.any(live):
                    break
                tgt = log_targets[np.minimum(ptr, n_targets - 1)]
                hit = live & (log_sig_new >= tgt)
                if not np.any(hit):
                    break
                span = log_sig_new - log_sig
                frac = np.where(
                    np.isfinite(log_sig), (tgt - log_sig) / np.where(span > 0, span, 1.0), 1.0
                )
                frac = np.clip(frac, 0.0, 1.0)
                idx = (ptr[hit], np.nonzero(hit)[0])
                out_eta[idx] = t_left + frac[hit] * dt
                out_L[idx] = L[hit] + frac[hit] * (L_new[hit] - L[hit])
                out_J[idx] = J[hit] + frac[hit] * (J_new[hit] - J[hit])
                ptr[hit] += 1
            log_sig = log_sig_new
            L = L_new
            J = J_new
            k += 1
            if np.all(ptr == n_targets):
                break
        if np.all(ptr == n_targets):
            break
    if not np.all(ptr == n_targets):
        raise ArithmeticError("sigma failed to cross a requested flow time")
    return np.exp(a * out_L), np.exp(a * out_eta), np.cosh(out_J)


def surrogate_terminal(
    params: ExponentSet,
    s_values: Sequence[float],
    dt: float,
    seed: int,
    samples: int,
    workers: int = 1,
):
    """(abs_h_prime, Y, inv_S) arrays of shape (len(s_values), samples).

    Streaming version of surrogate_derivative across many paths under P:
    each path is scanned once and read out at the requested flow times.
    """
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    if np.any(s_values <= 0):
        raise BadTime("flow times must be positive")
    if np.any(np.diff(s_values) <= 0):
        raise ValidationError("flow times must be strictly increasing")
    return _mc.run_chunked(
        _surrogate_chunk, samples, seed, params.a, params.r_c,
        s_values, dt, workers=workers,
    )


def _sigma_chunk(start, stop, seed, a, drift, t, dt):
    w = stop - start
    n = max(1, int(math.ceil(t / dt - 1e-9)))
    J = np.zeros(w)
    log_sig = np.full(w, -np.inf)
    log_step_factor = math.log(math.expm1(2.0 * a * dt) / (2.0 * a))
    k = 0
    for block in _scan_block(seed, start, stop, n, dt):
        for row in range(block.shape[0]):
            term = 2.0 * _logcosh(J) + 2.0 * a * (k * dt) + log_step_factor
            log_sig = np.logaddexp(log_sig, term)
            J += -drift * np.tanh(J) * dt + block[row]
            k += 1
    return log_sig


@dataclass(frozen=True)
class SigmaTail:
    """Empirical tail of sigma(t) under P* against the u^(-2q) envelope."""

    t: float
    u_grid: np.ndarray
    prob: np.ndarray
    slope: float
    samples: int
    params: ExponentSet


def sigma_tail(
    params: ExponentSet,
    t: float,
    u_grid: Sequence[float],
    samples: int,
    seed: int,
    dt: float = 1e-3,
    workers: int = 1,
) -> SigmaTail:
    """Empirical P*{sigma(t) >= u^2 exp(2at)} with a log-log tail slope.

    The slope is fit over the largest decade of u (points with u above
    u_max/10 and a nonzero empirical probability); the stationary-tail
    bound predicts slope <= -2q.
    """
    u_grid = np.sort(np.atleast_1d(np.asarray(u_grid, dtype=float)))
    if u_grid.size < 3 or np.any(u_grid <= 0):
        raise ValidationError("need at least three positive thresholds")
    log_sig = _mc.run_chunked(
        _sigma_chunk, samples, seed, params.a, params.q, t, dt, workers=workers
    )
    n_steps = max(1, int(math.ceil(t / dt - 1e-9)))
    t_end = n_steps * dt
    thresholds = 2.0 * np.log(u_grid) + 2.0 * params.a * t_end
    prob = np.array([(log_sig >= thr).mean() for thr in thresholds])
    sel = (u_grid >= u_grid.max() / 10.0) & (prob > 0)
    if sel.sum() < 3:
        raise TooFewPoints("not enough populated thresholds in the top decade")
    x = np.log(u_grid[sel])
    y = np.log(prob[sel])
    slope = float(np.polyfit(x, y, 1)[0])
    return SigmaTail(t=t_end, u_grid=u_grid, prob=prob, slope=slope,
                     samples=int(samples), params=params)


def _max_abs_chunk(start, stop, seed, drift, j0, t0, t1, dt):
    w = stop - start
    n = max(1, int(math.ceil(t1 / dt - 1e-9)))
    J = np.full(w, float(j0))
    best = np.abs(J) if t0 <= 0 else np.zeros(w)
    k = 0
    for block in _scan_block(seed, start, stop, n, dt):
        for row in range(block.shape[0]):
            J += -drift * np.tanh(J) * dt + block[row]
            k += 1
            if k * dt >= t0:
                np.maximum(best, np.abs(J), out=best)
    return best


def max_abs_J(
    params: ExponentSet,
    measure: str,
    j0: float,
    window: tuple,
    dt: float,
    seed: int,
    samples: int,
    workers: int = 1,
) -> np.ndarray:
    """max |J| over the time window per path, for excursion-tail checks."""
    drift = _drift_coefficient(params, measure)
    t0, t1 = float(window[0]), float(window[1])
    if not 0 <= t0 < t1:
        raise BadTime(f"bad window {window}")
    return _mc.run_chunked(
        _max_abs_chunk, samples, seed, drift, j0, t0, t1, dt, workers=workers
    )


def _terminal_chunk(start, stop, seed, drift, T, dt):
    w = stop - start
    n = max(1, int(math.ceil(T / dt - 1e-9)))
    J = np.zeros(w)
    for block in _scan_block(seed, start, stop, n, dt):
        for row in range(block.shape[0]):
            J += -drift * np.tanh(J) * dt + block[row]
    return J


def terminal_J(
    params: ExponentSet,
    measure: str,
    T: float,
    dt: float,
    seed: int,
    samples: int,
    workers: int = 1,
) -> np.ndarray:
    """J_T across independent paths started at 0 (histogram fodder)."""
    drift = _drift_coefficient(params, measure)
    if not T > 0:
        raise BadTime(f"need T > 0, got {T}")
    return _mc.run_chunked(
        _terminal_chunk, samples, seed, drift, T, dt, workers=workers
    )
