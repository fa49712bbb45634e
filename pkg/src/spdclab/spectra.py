"""Sampled spectral densities on a frequency-detuning grid."""

from dataclasses import dataclass

import numpy as np

C_M_S = 299792458.0          # speed of light, m/s
C_UM_GHZ = 299792.458        # c as (um * GHz): vacuum wavelength in um at 1 GHz
C_MM_GHZ = 299.792458        # c as (mm * GHz): FSR_GHz = C_MM_GHZ / (2 * L_mm)
C_UM_PS = 299.792458         # c in um/ps


@dataclass
class SpectralDensity:
    """Non-negative spectral intensity sampled on a detuning grid.

    detuning_ghz : strictly increasing grid of ordinary-frequency detunings
        relative to the degenerate/center frequency, in GHz.
    intensity : non-negative samples, same length as the grid.
    """

    detuning_ghz: np.ndarray
    intensity: np.ndarray

    def __post_init__(self):
        self.detuning_ghz = np.asarray(self.detuning_ghz, dtype=float)
        self.intensity = np.asarray(self.intensity, dtype=float)
        if self.detuning_ghz.ndim != 1 or self.detuning_ghz.size == 0:
            raise ValueError("detuning grid must be a non-empty 1-D array")
        if self.intensity.shape != self.detuning_ghz.shape:
            raise ValueError("intensity and grid shapes differ")
        if np.any(np.diff(self.detuning_ghz) <= 0):
            raise ValueError("detuning grid must be strictly increasing")
        if np.any(self.intensity < 0):
            raise ValueError("spectral intensity must be non-negative")

    @property
    def step(self):
        return float(self.detuning_ghz[1] - self.detuning_ghz[0]) if self.detuning_ghz.size > 1 else 0.0

    def is_uniform(self, rtol=1e-9):
        d = np.diff(self.detuning_ghz)
        return bool(d.size == 0 or np.allclose(d, d[0], rtol=rtol))

    def total(self):
        return float(self.intensity.sum())

    def normalized(self):
        """Copy scaled to peak intensity 1."""
        peak = self.intensity.max()
        if peak <= 0:
            raise ValueError("cannot normalize an all-zero spectrum")
        return SpectralDensity(self.detuning_ghz.copy(), self.intensity / peak)

    def area_normalized(self):
        """Copy scaled to unit area (trapezoid rule), usable as a density in 1/GHz."""
        area = np.trapz(self.intensity, self.detuning_ghz)
        if area <= 0:
            raise ValueError("cannot normalize an all-zero spectrum")
        return SpectralDensity(self.detuning_ghz.copy(), self.intensity / area)

    def resampled(self, grid_ghz):
        """Linear resample onto a new grid; zero outside the original support."""
        grid_ghz = np.asarray(grid_ghz, dtype=float)
        vals = np.interp(grid_ghz, self.detuning_ghz, self.intensity, left=0.0, right=0.0)
        return SpectralDensity(grid_ghz, vals)
