"""Spectral/temporal mode overlap and cavity-length matching to a target emitter.

For pure one-sided exponential wavepackets with decay rates g_a = 1/tau_a and
g_b = 1/tau_b the squared overlap of the normalized amplitudes is

    |int sqrt(g_a g_b) exp(-(g_a + g_b) t / 2) dt|^2 = 4 g_a g_b / (g_a + g_b)^2
                                                     = 4 tau_a tau_b / (tau_a + tau_b)^2,

the transform-limited upper bound on two-photon interference visibility.
The cavity photon intensity lifetime is finesse / (2 pi FSR); matching a
target emitter lifetime is a one-dimensional golden-section search over the
air gap (the lifetime is smooth and monotone in the gap, so nothing heavier
is warranted).  Beat-induced temporal modulation is excluded from the
default overlap metric (TEM00 only).
"""

from dataclasses import dataclass, replace

import numpy as np

from .cavity import finesse, free_spectral_range
from .errors import InfeasibleError

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass
class OverlapReport:
    """Mode-overlap summary between the source photon and the target emitter."""

    temporal_overlap: float
    spectral_overlap: float
    lifetime_spdc_ps: float
    lifetime_target_ps: float
    mismatch: float

    def as_dict(self):
        return {
            "temporal_overlap": self.temporal_overlap,
            "spectral_overlap": self.spectral_overlap,
            "lifetime_spdc_ps": self.lifetime_spdc_ps,
            "lifetime_target_ps": self.lifetime_target_ps,
            "mismatch": self.mismatch,
        }


def temporal_overlap(tau_a_ps, tau_b_ps):
    """Squared amplitude overlap of two one-sided exponentials; 1 iff equal."""
    if tau_a_ps <= 0 or tau_b_ps <= 0:
        raise ValueError("lifetimes must be positive")
    return 4.0 * tau_a_ps * tau_b_ps / (tau_a_ps + tau_b_ps) ** 2


def spectral_overlap(s_a, s_b):
    """Normalized inner product of two intensity spectra, in [0, 1].

    Spectra on different grids are resampled onto the union grid (zero
    outside their support) before taking the cosine similarity.
    """
    if np.array_equal(s_a.detuning_ghz, s_b.detuning_ghz):
        va, vb = s_a.intensity, s_b.intensity
    else:
        grid = np.union1d(s_a.detuning_ghz, s_b.detuning_ghz)
        va = s_a.resampled(grid).intensity
        vb = s_b.resampled(grid).intensity
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0 or nb == 0:
        raise ValueError("cannot compute overlap with an all-zero spectrum")
    return float(np.dot(va, vb) / (na * nb))


def cavity_photon_lifetime_ps(cavity, wavelength_nm, temperature_c):
    """Intensity decay time of the cavity photon: finesse / (2 pi FSR)."""
    fin = finesse(cavity.mirror_reflectivity_high, cavity.mirror_reflectivity_out)
    fsr_ghz = free_spectral_range(cavity, wavelength_nm, temperature_c, "signal")
    return fin / (2.0 * np.pi * fsr_ghz) * 1e3  # 1/GHz = 1000 ps


def match_cavity_length(target_lifetime_ps, cavity, gap_bounds_mm,
                        wavelength_nm=941.85, temperature_c=27.0,
                        tol_mm=1e-6, trace=None):
    """Find the air gap whose cavity photon lifetime hits the target.

    Golden-section search on |lifetime(gap) - target| over ``gap_bounds_mm``.
    The lifetime is monotone increasing in the gap, so the target must lie
    within the achievable [min, max] range; otherwise an InfeasibleError
    reporting that range is raised.  ``trace``, if a list, receives
    (iteration, gap_mm, lifetime_ps) tuples.

    Returns (gap_mm, achieved_lifetime_ps).
    """
    lo, hi = float(gap_bounds_mm[0]), float(gap_bounds_mm[1])
    if not 0 <= lo < hi:
        raise ValueError("gap bounds must satisfy 0 <= lo < hi")

    def lifetime(gap):
        return cavity_photon_lifetime_ps(replace(cavity, air_gap_mm=gap),
                                         wavelength_nm, temperature_c)

    t_lo, t_hi = lifetime(lo), lifetime(hi)
    if not t_lo <= target_lifetime_ps <= t_hi:
        raise InfeasibleError(
            f"target lifetime {target_lifetime_ps:g} ps outside the achievable "
            f"range [{t_lo:.1f}, {t_hi:.1f}] ps for gaps in [{lo:g}, {hi:g}] mm",
            achievable=(t_lo, t_hi))

    def objective(gap):
        return abs(lifetime(gap) - target_lifetime_ps)

    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = objective(c), objective(d)
    iteration = 0
    while b - a > tol_mm:
        iteration += 1
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = objective(c)
            probe = c
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = objective(d)
            probe = d
        if trace is not None:
            trace.append((iteration, probe, lifetime(probe)))
    gap = 0.5 * (a + b)
    return gap, lifetime(gap)


def overlap_report(cavity, qd, source_spectrum, qd_spectrum,
                   wavelength_nm=941.85, temperature_c=27.0):
    """Assemble the full overlap summary for the current geometry."""
    tau_spdc = cavity_photon_lifetime_ps(cavity, wavelength_nm, temperature_c)
    return OverlapReport(
        temporal_overlap=temporal_overlap(tau_spdc, qd.lifetime_ps),
        spectral_overlap=spectral_overlap(source_spectrum, qd_spectrum),
        lifetime_spdc_ps=tau_spdc,
        lifetime_target_ps=qd.lifetime_ps,
        mismatch=abs(tau_spdc - qd.lifetime_ps) / qd.lifetime_ps,
    )
