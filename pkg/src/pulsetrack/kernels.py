"""Gaussian smoothing kernels over note events.

A performance is a set of timestamped, velocity-weighted note onsets.
Placing a Gaussian bump of fixed width on every onset turns the discrete
set into a smooth curve whose height near an instant reflects how much
emphasis the player put there.  Because a product of two Gaussians
integrates to a Gaussian in the time shift, the correlation of two such
curves collapses to a closed-form double sum over onset pairs -- no
sampling grid, no FFT.  Everything in this module is that double sum,
evaluated at one shift or over a grid of shifts.

All times are milliseconds.  Kernel width ``sigma`` and the preferred
pulse period ``spontaneous_tempo`` live in :class:`KernelConfig`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "KernelConfig",
    "NoteEventSet",
    "VELOCITY_FLOOR",
    "gaussify_eval",
    "correlation",
    "autocorrelation",
    "correlation_grid",
    "autocorrelation_grid",
    "parncutt_salience",
]

# Smallest velocity an ingested event may carry (MIDI's minimum positive
# velocity).  Velocities are weights in (0, 1]; zero would erase the event.
VELOCITY_FLOOR = 1.0 / 127.0

# Pair terms whose exponent falls below -50 contribute < 2e-22 each -- far
# under every tolerance used anywhere downstream -- and may be dropped.
# exponent = -z^2/2 < -50  <=>  |t - d| > 10 sigma.
_NEGLIGIBLE_Z = 10.0


@dataclass(frozen=True)
class KernelConfig:
    """Width of the event kernel and the preferred pulse period.

    sigma : standard deviation of the Gaussian placed on each onset, ms.
    spontaneous_tempo : pulse period of maximal salience, ms (120 bpm).
    """

    sigma: float = 25.0
    spontaneous_tempo: float = 500.0

    def __post_init__(self) -> None:
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise ValueError("sigma must be a positive, finite number of ms")
        if not (self.spontaneous_tempo > 0.0 and np.isfinite(self.spontaneous_tempo)):
            raise ValueError("spontaneous_tempo must be a positive, finite number of ms")


class NoteEventSet:
    """Immutable, time-ordered set of (onset, velocity) note events.

    Onsets are milliseconds on whatever clock the caller uses; velocities
    are weights in (0, 1].  Construction validates; use :meth:`from_raw`
    for unchecked live input (sorts, clamps, warns).
    """

    __slots__ = ("onsets", "velocities")

    def __init__(self, onsets, velocities) -> None:
        t = np.array(onsets, dtype=np.float64, copy=True).reshape(-1)
        v = np.array(velocities, dtype=np.float64, copy=True).reshape(-1)
        if t.shape != v.shape:
            raise ValueError("onsets and velocities must have the same length")
        if t.size:
            if not (np.isfinite(t).all() and np.isfinite(v).all()):
                raise ValueError("onsets and velocities must be finite")
            if np.any(np.diff(t) < 0.0):
                raise ValueError("onsets must be sorted non-decreasing")
            if v.min() <= 0.0 or v.max() > 1.0:
                raise ValueError("velocities must lie in (0, 1]")
        t.setflags(write=False)
        v.setflags(write=False)
        self.onsets = t
        self.velocities = v

    @classmethod
    def from_raw(cls, onsets, velocities) -> "NoteEventSet":
        """Build a set from unchecked input: sort by onset, clamp velocities.

        Velocities outside [1/127, 1] are clamped with a warning rather than
        rejected; live sources routinely mis-scale and any positive weight
        is usable.
        """
        t = np.asarray(onsets, dtype=np.float64).reshape(-1)
        v = np.asarray(velocities, dtype=np.float64).reshape(-1)
        if t.shape != v.shape:
            raise ValueError("onsets and velocities must have the same length")
        order = np.argsort(t, kind="stable")
        t = t[order]
        v = v[order]
        if v.size and (v.min() < VELOCITY_FLOOR or v.max() > 1.0):
            warnings.warn(
                "velocities outside [1/127, 1] were clamped", stacklevel=2
            )
            v = np.clip(v, VELOCITY_FLOOR, 1.0)
        return cls(t, v)

    def __len__(self) -> int:
        return int(self.onsets.size)

    def tail(self, n: int) -> "NoteEventSet":
        """The most recent ``n`` events (all of them if fewer)."""
        if n < 0:
            raise ValueError("n must be non-negative")
        if n >= len(self):
            return self
        return NoteEventSet(self.onsets[len(self) - n :], self.velocities[len(self) - n :])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NoteEventSet):
            return NotImplemented
        return np.array_equal(self.onsets, other.onsets) and np.array_equal(
            self.velocities, other.velocities
        )

    def __repr__(self) -> str:
        if not len(self):
            return "NoteEventSet(empty)"
        return (
            f"NoteEventSet({len(self)} events, "
            f"{self.onsets[0]:.1f}..{self.onsets[-1]:.1f} ms)"
        )


def gaussify_eval(events: NoteEventSet, t: float, cfg: KernelConfig | None = None) -> float:
    """Height of the smoothed event curve at time ``t``.

    Each event contributes v * exp(-(t - onset)^2 / (2 sigma^2)); kernels are
    deliberately not normalized so an isolated event peaks at exactly its
    velocity.  Empty sets evaluate to 0.
    """
    cfg = cfg or KernelConfig()
    if not len(events):
        return 0.0
    z = (t - events.onsets) / cfg.sigma
    return float(np.dot(events.velocities, np.exp(-0.5 * z * z)))


def correlation(
    a: NoteEventSet, b: NoteEventSet, t: float, cfg: KernelConfig | None = None
) -> float:
    """Correlation of two smoothed event sets at time shift ``t``.

    The closed form is sum_ij va_i * vb_j * exp(-(t - (ta_i - tb_j))^2 /
    (2 sigma^2)): every onset pair votes for the shift equal to its time
    difference, with a Gaussian tolerance.  Zero when either set is empty.
    """
    cfg = cfg or KernelConfig()
    if not len(a) or not len(b):
        return 0.0
    d = a.onsets[:, None] - b.onsets[None, :]
    w = a.velocities[:, None] * b.velocities[None, :]
    z = (t - d) / cfg.sigma
    return float(np.sum(w * np.exp(-0.5 * z * z)))


def autocorrelation(events: NoteEventSet, t: float, cfg: KernelConfig | None = None) -> float:
    """Correlation of an event set with itself at lag ``t``.

    Symmetric in t, maximal at 0.
    """
    return correlation(events, events, t, cfg)


def _pair_terms(a: NoteEventSet, b: NoteEventSet) -> tuple[np.ndarray, np.ndarray]:
    """All ordered onset differences a_i - b_j with their velocity products."""
    d = (a.onsets[:, None] - b.onsets[None, :]).ravel()
    w = (a.velocities[:, None] * b.velocities[None, :]).ravel()
    return d, w


def _dense_grid_sum(
    diffs: np.ndarray, weights: np.ndarray, shifts: np.ndarray, sigma: float
) -> np.ndarray:
    """Exact pair sum at every shift, chunked so intermediates stay in cache.

    A fixed row count per chunk keeps the loop overhead proportional to the
    pair count, so measured cost scales with pairs x shifts alone.
    """
    rows = 128
    out = np.empty(shifts.size, dtype=np.float64)
    if not diffs.size or not shifts.size:
        out.fill(0.0)
        return out
    sd = diffs / sigma
    ss = shifts / sigma
    buf = np.empty((min(rows, shifts.size), diffs.size), dtype=np.float64)
    for start in range(0, shifts.size, rows):
        r = min(rows, shifts.size - start)
        b = buf[:r]
        np.subtract(ss[start : start + r, None], sd[None, :], out=b)
        np.multiply(b, b, out=b)
        np.multiply(b, -0.5, out=b)
        np.exp(b, out=b)
        out[start : start + r] = b @ weights
    return out


def _banded_grid_sum(
    diffs: np.ndarray, weights: np.ndarray, shifts: np.ndarray, sigma: float
) -> np.ndarray:
    """Pair sum at every shift, dropping terms beyond 10 sigma of the shift.

    Sorting the differences turns the quadratic sum into a near-band gather:
    each shift only touches the pairs whose difference lies within reach.
    """
    out = np.zeros(shifts.size, dtype=np.float64)
    if not diffs.size or not shifts.size:
        return out
    order = np.argsort(diffs, kind="stable")
    d = diffs[order]
    w = weights[order]
    reach = _NEGLIGIBLE_Z * sigma
    lo = np.searchsorted(d, shifts - reach, side="left")
    hi = np.searchsorted(d, shifts + reach, side="right")
    counts = hi - lo
    total = int(counts.sum())
    if total == 0:
        return out
    q_idx = np.repeat(np.arange(shifts.size), counts)
    band_start = np.repeat(np.cumsum(counts) - counts, counts)
    p_idx = np.repeat(lo, counts) + (np.arange(total) - band_start)
    z = (shifts[q_idx] - d[p_idx]) / sigma
    vals = w[p_idx] * np.exp(-0.5 * z * z)
    return np.bincount(q_idx, weights=vals, minlength=shifts.size)


def correlation_grid(
    a: NoteEventSet,
    b: NoteEventSet,
    shifts: np.ndarray,
    cfg: KernelConfig | None = None,
    *,
    skip_negligible: bool = False,
) -> np.ndarray:
    """Correlation of ``a`` with ``b`` at every shift in ``shifts``.

    Parameters
    ----------
    shifts : array of time shifts, ms.
    skip_negligible : drop pair terms whose exponent is below -50 (each
        contributes < 2e-22).  Turns the quadratic pair sum into a banded
        gather on sorted differences; use it for long, fine grids.

    Returns
    -------
    Array of correlation values, same length as ``shifts``.
    """
    cfg = cfg or KernelConfig()
    shifts = np.asarray(shifts, dtype=np.float64)
    if not len(a) or not len(b):
        return np.zeros(shifts.size, dtype=np.float64)
    diffs, weights = _pair_terms(a, b)
    if skip_negligible:
        return _banded_grid_sum(diffs, weights, shifts, cfg.sigma)
    return _dense_grid_sum(diffs, weights, shifts, cfg.sigma)


def autocorrelation_grid(
    events: NoteEventSet,
    lags: np.ndarray,
    cfg: KernelConfig | None = None,
    *,
    skip_negligible: bool = False,
) -> np.ndarray:
    """Autocorrelation of ``events`` at every lag in ``lags``."""
    return correlation_grid(events, events, lags, cfg, skip_negligible=skip_negligible)


def parncutt_salience(t, cfg: KernelConfig | None = None):
    """Perceptual salience of a pulse period, peaked at the spontaneous tempo.

    exp(-2 * log2(t / spontaneous_tempo)^2): exactly 1 at the spontaneous
    tempo, e^-2 at half and double, falling off symmetrically per octave.
    Accepts a scalar or an array of periods; periods must be positive.
    """
    cfg = cfg or KernelConfig()
    arr = np.asarray(t, dtype=np.float64)
    if np.any(arr <= 0.0):
        raise ValueError("pulse period must be positive")
    x = np.log2(arr / cfg.spontaneous_tempo)
    out = np.exp(-2.0 * x * x)
    if arr.ndim == 0:
        return float(out)
    return out
