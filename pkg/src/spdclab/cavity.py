"""Single-sided semi-confocal cavity: finesse, mode comb, and output spectrum.

The cavity is formed by the coated outer faces of the down-conversion crystal
and the birefringence compensator, plus an air gap.  The compensator's optic
axes are rotated 90 degrees relative to the down-conversion crystal, so the
signal field propagates along the compensator axis the idler uses in the
poled crystal and vice versa; this is what pulls the signal-idler FSR
mismatch down to the ~0.2 GHz scale.  Free spectral ranges are computed from
group optical lengths so that 1/FSR equals the round-trip group delay.

The air-gap length is a calibration constant: the shipped default
configuration fixes it once so the paper geometry yields 1/FSR = 113.6 ps.
The transverse-mode splitting is likewise a direct configuration parameter
(the mirror geometry needed to derive it from Gouy phases is not specified).
"""

from dataclasses import dataclass

import numpy as np

from .dispersion import group_index
from .spectra import C_MM_GHZ, SpectralDensity


@dataclass(frozen=True)
class CavityElement:
    """Intracavity crystal slab with per-polarization axis assignment."""

    length_mm: float
    signal_axis: str
    idler_axis: str
    material: dict  # axis label -> SellmeierSet

    def __post_init__(self):
        if self.length_mm < 0:
            raise ValueError("element length must be non-negative")


@dataclass(frozen=True)
class CavitySpec:
    """Mirror and geometry description of the source cavity."""

    mirror_reflectivity_high: float = 0.998
    mirror_reflectivity_out: float = 0.90
    elements: tuple = ()
    air_gap_mm: float = 4.3246
    transverse_splitting_ghz: float = 2.8
    transverse_mode_weight: float = 0.35

    def __post_init__(self):
        for r in (self.mirror_reflectivity_high, self.mirror_reflectivity_out):
            if not 0.0 < r < 1.0:
                raise ValueError(f"mirror reflectivity must be in (0, 1), got {r}")
        if self.air_gap_mm < 0:
            raise ValueError("air gap must be non-negative")
        if not 0.0 <= self.transverse_mode_weight <= 1.0:
            raise ValueError("transverse_mode_weight must be in [0, 1]")


@dataclass(frozen=True)
class ModeComb:
    """Longitudinal/transverse resonance comb of the cavity for one field."""

    fsr_ghz: float
    mode_linewidth_fwhm_ghz: float
    center_frequency_offset_ghz: float = 0.0
    transverse_offsets_ghz: tuple = ()
    transverse_weight: float = 0.0
    signal_idler_fsr_mismatch_ghz: float = 0.0

    def __post_init__(self):
        if self.fsr_ghz <= 0:
            raise ValueError("FSR must be positive")
        if self.mode_linewidth_fwhm_ghz >= self.fsr_ghz:
            raise ValueError("mode linewidth must be below the FSR")
        if self.signal_idler_fsr_mismatch_ghz < 0:
            raise ValueError("FSR mismatch is a magnitude, must be >= 0")

    @property
    def finesse(self):
        return self.fsr_ghz / self.mode_linewidth_fwhm_ghz


@dataclass(frozen=True)
class EtalonSpec:
    """Spectral filter etalon placed after the source."""

    fsr_ghz: float = 1500.0
    bandwidth_fwhm_ghz: float = 6.0
    center_offset_ghz: float = 0.0

    def __post_init__(self):
        if not 0 < self.bandwidth_fwhm_ghz < self.fsr_ghz:
            raise ValueError("etalon bandwidth must be positive and below its FSR")


def finesse(r_high, r_out):
    """Cavity finesse pi (R1 R2)^(1/4) / (1 - sqrt(R1 R2))."""
    for r in (r_high, r_out):
        if not 0.0 < r < 1.0:
            raise ValueError(f"reflectivity must be in (0, 1), got {r}")
    rr = np.sqrt(r_high * r_out)
    return float(np.pi * np.sqrt(rr) / (1.0 - rr))


def optical_length_mm(cavity, wavelength_nm, temperature_c, polarization="signal"):
    """Round-trip-defining group optical length sum(n_g L) + air gap, in mm."""
    lam_um = wavelength_nm * 1e-3
    total = cavity.air_gap_mm
    for el in cavity.elements:
        axis = el.signal_axis if polarization == "signal" else el.idler_axis
        total += el.length_mm * group_index(el.material[axis], lam_um, temperature_c)
    return total


def free_spectral_range(cavity, wavelength_nm, temperature_c, polarization="signal"):
    """FSR = c / (2 * optical length) in GHz."""
    L = optical_length_mm(cavity, wavelength_nm, temperature_c, polarization)
    if L <= 0:
        raise ValueError("total optical length must be positive")
    return C_MM_GHZ / (2.0 * L)


def mode_comb(cavity, wavelength_nm, temperature_c, center_offset_ghz=0.0):
    """Build the resonance comb for the signal field at the operating point."""
    fsr_s = free_spectral_range(cavity, wavelength_nm, temperature_c, "signal")
    fsr_i = free_spectral_range(cavity, wavelength_nm, temperature_c, "idler")
    fin = finesse(cavity.mirror_reflectivity_high, cavity.mirror_reflectivity_out)
    offsets = (cavity.transverse_splitting_ghz,) if cavity.transverse_mode_weight > 0 else ()
    return ModeComb(
        fsr_ghz=fsr_s,
        mode_linewidth_fwhm_ghz=fsr_s / fin,
        center_frequency_offset_ghz=center_offset_ghz,
        transverse_offsets_ghz=offsets,
        transverse_weight=cavity.transverse_mode_weight,
        signal_idler_fsr_mismatch_ghz=abs(fsr_s - fsr_i),
    )


def airy_transmission(comb, detuning_ghz):
    """Airy transmission of the comb at a detuning from the comb center, in (0, 1]."""
    f = comb.finesse
    delta = np.asarray(detuning_ghz, dtype=float) - comb.center_frequency_offset_ghz
    t = 1.0 / (1.0 + (2.0 * f / np.pi) ** 2 * np.sin(np.pi * delta / comb.fsr_ghz) ** 2)
    return float(t) if t.ndim == 0 else t


def etalon_transmission(filt, detuning_ghz):
    """Airy transmission of the filter etalon (peak 1 at its center offset)."""
    f = filt.fsr_ghz / filt.bandwidth_fwhm_ghz
    delta = np.asarray(detuning_ghz, dtype=float) - filt.center_offset_ghz
    t = 1.0 / (1.0 + (2.0 * f / np.pi) ** 2 * np.sin(np.pi * delta / filt.fsr_ghz) ** 2)
    return float(t) if t.ndim == 0 else t


def comb_transmission(comb, detuning_ghz):
    """TEM00 comb plus weighted higher-order transverse comb."""
    t = airy_transmission(comb, detuning_ghz)
    for off in comb.transverse_offsets_ghz:
        shifted = ModeComb(comb.fsr_ghz, comb.mode_linewidth_fwhm_ghz,
                           comb.center_frequency_offset_ghz + off)
        t = t + comb.transverse_weight * airy_transmission(shifted, detuning_ghz)
    return t


def default_detuning_grid(comb, span_ghz):
    """Uniform grid over [-span, span] with step mode_linewidth/10, tooth-aligned."""
    step = comb.mode_linewidth_fwhm_ghz / 10.0
    n = int(np.ceil(span_ghz / step))
    return np.linspace(-n * step, n * step, 2 * n + 1)


def output_spectrum(gain, comb, pump, filt=None):
    """Filtered source spectrum: gain envelope x mode comb x etalon transmission.

    The pulsed pump populates every longitudinal mode under the gain envelope,
    so the comb is applied without per-mode suppression.  The gain grid must
    be uniform with step at most mode_linewidth/10 (coarser grids alias the
    comb teeth) and must cover the filter passband when a filter is given.
    The result is normalized to peak 1.
    """
    del pump  # pulsed operation: all modes occupied, no pump-dependent selection
    grid = gain.detuning_ghz
    if not gain.is_uniform(rtol=1e-6):
        raise ValueError("gain spectrum grid must be uniform")
    if gain.step > comb.mode_linewidth_fwhm_ghz / 10.0 * (1 + 1e-9):
        raise ValueError(
            f"grid step {gain.step:g} GHz too coarse to resolve the "
            f"{comb.mode_linewidth_fwhm_ghz:g} GHz cavity modes (need <= linewidth/10)")
    vals = gain.intensity * comb_transmission(comb, grid)
    if filt is not None:
        half_band = 3.0 * filt.bandwidth_fwhm_ghz
        if filt.center_offset_ghz - half_band < grid[0] or filt.center_offset_ghz + half_band > grid[-1]:
            raise ValueError("gain grid does not cover the filter passband")
        vals = vals * etalon_transmission(filt, grid)
    peak = vals.max()
    if peak <= 0:
        raise ValueError("output spectrum is identically zero")
    return SpectralDensity(grid, vals / peak)


def count_modes_above_half_max(spectrum):
    """Number of comb peaks rising above half the spectrum's maximum."""
    v = spectrum.intensity
    half = 0.5 * v.max()
    peaks = (v[1:-1] >= v[:-2]) & (v[1:-1] > v[2:]) & (v[1:-1] > half)
    return int(np.count_nonzero(peaks))
