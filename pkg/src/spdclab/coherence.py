"""First-order coherence |g1(tau)| from the source spectrum.

|g1| is the modulus of the normalized discrete Fourier sum of the sampled
spectral density,

    |g1(tau)| = |sum_k S_k exp(i 2 pi nu_k tau)| / sum_k S_k,

evaluated as a direct sum (not an FFT) so arbitrary non-uniform delay grids
are supported.  For the comb-structured source spectrum this produces the
interference revivals spaced by the round-trip time 1/FSR, an envelope
decaying on the inverse mode-linewidth scale, and a central peak whose width
is set by the inverse of the full down-conversion bandwidth.
"""

from dataclasses import dataclass

import numpy as np

from .errors import FitError, ResolutionError

_CHUNK = 512


@dataclass
class CoherenceTrace:
    """Fringe visibility |g1| versus interferometer delay."""

    delays_ps: np.ndarray
    visibility: np.ndarray

    def __post_init__(self):
        self.delays_ps = np.asarray(self.delays_ps, dtype=float)
        self.visibility = np.asarray(self.visibility, dtype=float)
        if self.delays_ps.shape != self.visibility.shape:
            raise ValueError("delay and visibility arrays must have the same shape")


def default_delay_grid(fine_until_ps=20.0, fine_step_ps=0.05, max_ps=5000.0, coarse_step_ps=1.0):
    """Two-resolution delay grid: fine near zero, coarse out to a few ns."""
    fine = np.arange(0.0, fine_until_ps, fine_step_ps)
    coarse = np.arange(fine_until_ps, max_ps + coarse_step_ps / 2, coarse_step_ps)
    return np.concatenate([fine, coarse])


def _uniform_runs(delays):
    """Yield (start, stop) index ranges over which the grid step is constant."""
    n = delays.size
    start = 0
    while start < n:
        stop = start + 1
        if stop < n:
            step = delays[stop] - delays[start]
            while stop + 1 < n and abs((delays[stop + 1] - delays[stop]) - step) <= 1e-9 * max(abs(step), 1.0):
                stop += 1
            stop += 1
        yield start, stop
        start = stop


def g1_from_spectrum(spectrum, delays_ps):
    """Fringe visibility |g1(tau)| of a sampled spectrum at the given delays.

    Evaluates the direct sum; on uniform stretches of the delay grid the
    per-delay phases are advanced by a constant rotation instead of
    re-exponentiating, which is the same sum up to float rounding.
    """
    delays_ps = np.asarray(delays_ps, dtype=float)
    s = spectrum.intensity.astype(complex)
    norm = spectrum.intensity.sum()
    if norm <= 0:
        raise ValueError("spectrum is identically zero; |g1| undefined")
    nu = spectrum.detuning_ghz
    flat = delays_ps.ravel()
    res = np.empty(flat.size, dtype=float)
    for start, stop in _uniform_runs(flat):
        w = s * np.exp(1j * 2e-3 * np.pi * flat[start] * nu)
        res[start] = np.abs(w.sum()) / norm
        if stop - start > 1:
            rot = np.exp(1j * 2e-3 * np.pi * (flat[start + 1] - flat[start]) * nu)
            for k in range(start + 1, stop):
                w *= rot
                res[k] = np.abs(w.sum()) / norm
    return CoherenceTrace(delays_ps, res.reshape(delays_ps.shape))


def visibility(i_max, i_min):
    """Michelson fringe contrast (Imax - Imin) / (Imax + Imin)."""
    if i_min < 0 or i_max < i_min:
        raise ValueError("need i_max >= i_min >= 0")
    if i_max <= 0:
        raise ValueError("both intensities are zero; visibility undefined")
    return (i_max - i_min) / (i_max + i_min)


def revival_peaks(trace, fsr_ghz, min_visibility=0.01):
    """Locate interference revivals: local maxima with minimum separation 0.5/FSR.

    The tau = 0 peak is excluded.  Returns (delays_ps, heights).
    """
    t, v = trace.delays_ps, trace.visibility
    min_sep_ps = 0.5 / fsr_ghz * 1e3
    cand = np.flatnonzero((v[1:-1] >= v[:-2]) & (v[1:-1] > v[2:]) & (v[1:-1] > min_visibility)) + 1
    cand = cand[t[cand] > min_sep_ps]
    picked = []
    for i in cand:
        if picked and t[i] - t[picked[-1]] < min_sep_ps:
            if v[i] > v[picked[-1]]:
                picked[-1] = i
        else:
            picked.append(i)
    return t[picked], v[picked]


def coherence_time(trace, fsr_ghz=None, min_peaks=3):
    """1/e decay time (ps) of an exponential fit through the revival maxima.

    ``fsr_ghz`` sets the peak-separation scale for revival detection; if not
    given it is estimated from the first revival position.
    """
    if fsr_ghz is None:
        # first local max beyond the central peak sets the revival scale
        t, v = trace.delays_ps, trace.visibility
        cand = np.flatnonzero((v[1:-1] >= v[:-2]) & (v[1:-1] > v[2:]) & (v[1:-1] > 0.05)) + 1
        cand = cand[t[cand] > 5.0]
        if cand.size == 0:
            raise FitError("no revival structure found (no decay to fit)")
        fsr_ghz = 1e3 / t[cand[0]]
    peaks_t, peaks_v = revival_peaks(trace, fsr_ghz)
    if len(peaks_t) < min_peaks:
        raise FitError(
            f"need at least {min_peaks} revival peaks for an envelope fit, "
            f"found {len(peaks_t)}")
    coef = np.polyfit(peaks_t, np.log(peaks_v), 1)
    if coef[0] >= 0:
        raise FitError("revival envelope does not decay; no decay to fit")
    return -1.0 / coef[0]


def central_peak_width(trace, threshold=0.5, min_points=4):
    """Exponential-decay lifetime (ps) of the central |g1| peak.

    Fits the contiguous region from tau = 0 where visibility stays at or
    above ``threshold`` (the upper half of the peak) with a
    visibility-weighted log-linear regression.  Requires sampling no coarser
    than 0.2 ps there.
    """
    t, v = trace.delays_ps, trace.visibility
    order = np.argsort(t)
    t, v = t[order], v[order]
    above = v >= threshold
    if not above[0]:
        raise FitError("trace does not start on the central peak (visibility(0) < threshold)")
    stop = int(np.argmin(above)) if not above.all() else above.size
    t_fit, v_fit = t[:stop], v[:stop]
    if t_fit.size < min_points:
        raise ResolutionError(
            f"only {t_fit.size} samples on the central peak above {threshold}; "
            "sample delays at 0.2 ps or finer near tau = 0")
    if t_fit.size > 1 and np.max(np.diff(t_fit)) > 0.2 + 1e-12:
        raise ResolutionError("central-peak sampling coarser than 0.2 ps")
    w = v_fit
    design = np.vstack([np.ones_like(t_fit), t_fit]).T * w[:, None]
    coef, *_ = np.linalg.lstsq(design, np.log(v_fit) * w, rcond=None)
    if coef[1] >= 0:
        raise FitError("central peak does not decay")
    return -1.0 / coef[1]
