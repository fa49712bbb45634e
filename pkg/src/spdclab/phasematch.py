"""Quasi-phase-matched mismatch, gain spectrum, bandwidth, and tuning curves.

The wave-vector mismatch for collinear type-II down-conversion in a poled
crystal is

    delta_k0 = k_p - k_s - k_i - 2 pi / Lambda + 2 phi / L

where ``phi`` is the crystal's configurable phase offset (walk-off plus
compensator contribution, calibrated in the default configuration).  The
single-pass gain is sinc^2(delta_k L / 2); its FWHM in ordinary frequency is

    2 * (2 * 1.39 * c) / (2 pi L |n_gs - n_gi|)

which evaluates to ~540 GHz for the 5 mm crystal at 941.85 nm.  All spectra
use the zero-pump-bandwidth limit (signal and idler detunings equal and
opposite); the pump's pulsed nature enters only through the cavity module's
mode-occupation assumption.
"""

from dataclasses import dataclass, replace

import numpy as np

from .dispersion import group_index, wavevector
from .errors import RootNotFoundError, SpdclabError
from .spectra import C_UM_GHZ, SpectralDensity

SINC_HALF_MAX_ARG = 1.39      # sinc^2(x) = 1/2 at x ~= 1.39; the closed form uses this rounding
SECH2_TBP = 0.315             # time-bandwidth product of a transform-limited sech^2 pulse


@dataclass(frozen=True)
class PumpSpec:
    """Pulsed pump laser driving the down-conversion."""

    center_wavelength_nm: float = 470.98
    repetition_rate_mhz: float = 76.0
    pulse_fwhm_ps: float = 50.0
    average_power_mw: float = 5.0

    def __post_init__(self):
        if self.repetition_rate_mhz <= 0:
            raise ValueError("repetition rate must be positive")
        if self.pulse_fwhm_ps <= 0:
            raise ValueError("pulse width must be positive")

    @property
    def spectral_fwhm_ghz(self):
        # transform-limited sech^2 pulse; 0.315/50 ps = 6.3 GHz
        return SECH2_TBP / self.pulse_fwhm_ps * 1e3

    @property
    def degenerate_wavelength_nm(self):
        return 2.0 * self.center_wavelength_nm

    @property
    def pulse_period_ns(self):
        return 1e3 / self.repetition_rate_mhz


@dataclass
class TuningCurve:
    """Normalized down-conversion intensity over a (temperature, wavelength) grid.

    ``intensity`` is the per-branch-normalized combined map (elementwise max of
    the two branches); the individual branches are kept for analysis.
    """

    temperatures_c: np.ndarray
    wavelengths_nm: np.ndarray
    intensity: np.ndarray
    signal_branch: np.ndarray = None
    idler_branch: np.ndarray = None

    def branch_peaks(self):
        """Per-temperature wavelength of each branch maximum (nm)."""
        sig = self.wavelengths_nm[np.argmax(self.signal_branch, axis=1)]
        idl = self.wavelengths_nm[np.argmax(self.idler_branch, axis=1)]
        return sig, idl


def _conjugate_wavelength_nm(pump_nm, partner_nm):
    # energy conservation 1/lp = 1/ls + 1/li
    inv = 1.0 / pump_nm - 1.0 / partner_nm
    return 1.0 / inv


def delta_k0(crystal, pump, signal_wavelength_nm, idler_wavelength_nm):
    """Quasi-phase-matched wave-vector mismatch in rad/um.

    The caller must supply wavelengths satisfying energy conservation
    1/lambda_p = 1/lambda_s + 1/lambda_i to 1e-9 nm^-1.
    """
    lhs = 1.0 / pump.center_wavelength_nm
    rhs = 1.0 / np.asarray(signal_wavelength_nm, dtype=float) + 1.0 / np.asarray(idler_wavelength_nm, dtype=float)
    if np.any(np.abs(lhs - rhs) > 1e-9):
        raise ValueError(
            "signal/idler wavelengths violate energy conservation with the pump "
            f"(|1/lp - 1/ls - 1/li| up to {float(np.max(np.abs(lhs - rhs))):.3e} nm^-1)")
    T = crystal.temperature_c
    k_p = wavevector(crystal.axis_set(crystal.pump_axis), pump.center_wavelength_nm * 1e-3, T)
    k_s = wavevector(crystal.axis_set(crystal.signal_axis), np.asarray(signal_wavelength_nm) * 1e-3, T)
    k_i = wavevector(crystal.axis_set(crystal.idler_axis), np.asarray(idler_wavelength_nm) * 1e-3, T)
    dk = k_p - k_s - k_i
    if crystal.poling_period_um is not None:
        dk = dk - 2.0 * np.pi / crystal.poling_period_um
    dk = dk + 2.0 * crystal.phase_offset_rad / crystal.length_um
    return float(dk) if np.ndim(dk) == 0 else dk


def _delta_k_at_detuning(crystal, pump, detuning_ghz, linearize=False):
    """delta_k over a symmetric signal/idler detuning (GHz), zero pump bandwidth."""
    nu0 = C_UM_GHZ / (pump.center_wavelength_nm * 1e-3) / 2.0  # degenerate frequency, GHz
    if linearize:
        lam0_um = pump.degenerate_wavelength_nm * 1e-3
        dk0 = delta_k0(crystal, pump, pump.degenerate_wavelength_nm, pump.degenerate_wavelength_nm)
        ngs = group_index(crystal.axis_set(crystal.signal_axis), lam0_um, crystal.temperature_c)
        ngi = group_index(crystal.axis_set(crystal.idler_axis), lam0_um, crystal.temperature_c)
        # Taylor term: (n_gs - n_gi)/c * delta_omega, c in um*GHz (angular)
        return dk0 + (ngs - ngi) * 2.0 * np.pi * np.asarray(detuning_ghz) / C_UM_GHZ
    nu_s = nu0 + np.asarray(detuning_ghz, dtype=float)
    nu_i = nu0 - np.asarray(detuning_ghz, dtype=float)
    lam_s_nm = C_UM_GHZ / nu_s * 1e3
    lam_i_nm = C_UM_GHZ / nu_i * 1e3
    return delta_k0(crystal, pump, lam_s_nm, lam_i_nm)


def gain_spectrum(crystal, pump, detuning_grid_ghz, linearize=False):
    """Single-pass down-conversion gain sinc^2(delta_k L/2) on a detuning grid.

    The grid must be symmetric about zero detuning (signal and idler move by
    equal and opposite amounts).  The returned spectrum is normalized to a
    peak of 1.
    """
    grid = np.asarray(detuning_grid_ghz, dtype=float)
    if grid.size == 0:
        raise ValueError("detuning grid is empty")
    if not np.allclose(grid, -grid[::-1], atol=1e-9 * max(1.0, float(np.max(np.abs(grid))))):
        raise ValueError("detuning grid must be symmetric about 0")
    dk = _delta_k_at_detuning(crystal, pump, grid, linearize=linearize)
    x = dk * crystal.length_um / 2.0
    vals = np.sinc(x / np.pi) ** 2
    return SpectralDensity(grid, vals / vals.max())


def fwhm_bandwidth(crystal, center_wavelength_nm):
    """Closed-form gain FWHM in ordinary-frequency GHz.

    Requires type-II operation: the signal/idler group indices must differ.
    """
    lam_um = center_wavelength_nm * 1e-3
    ngs = group_index(crystal.axis_set(crystal.signal_axis), lam_um, crystal.temperature_c)
    ngi = group_index(crystal.axis_set(crystal.idler_axis), lam_um, crystal.temperature_c)
    dn = abs(ngs - ngi)
    if dn <= 1e-6:
        raise SpdclabError(
            "signal and idler group indices are degenerate; the type-0/type-I "
            "case has no group-mismatch-limited bandwidth and is unsupported")
    return 2.0 * (2.0 * SINC_HALF_MAX_ARG * C_UM_GHZ) / (2.0 * np.pi * crystal.length_um * dn)


def tuning_curve(crystal, pump, temperatures_c, wavelengths_nm):
    """Signal/idler emission map versus crystal temperature (the 'X' curves).

    For each temperature row the signal branch evaluates the gain with the
    grid wavelength as the signal (idler at the energy-conserving conjugate),
    and the idler branch vice versa.  Both branches are normalized to a
    maximum of 1; the combined map is their elementwise maximum.
    """
    temps = np.asarray(temperatures_c, dtype=float)
    lams = np.asarray(wavelengths_nm, dtype=float)
    if temps.size == 0 or lams.size == 0:
        raise ValueError("temperature and wavelength grids must be non-empty")
    if not (lams.min() < pump.degenerate_wavelength_nm < lams.max()):
        raise ValueError("wavelength range must contain the degenerate wavelength 2*lambda_p")
    conj = _conjugate_wavelength_nm(pump.center_wavelength_nm, lams)

    sig = np.empty((temps.size, lams.size))
    idl = np.empty_like(sig)
    for i, T in enumerate(temps):
        cry = _crystal_at(crystal, T)
        dk_sig = delta_k0(cry, pump, lams, conj)
        dk_idl = delta_k0(cry, pump, conj, lams)
        sig[i] = np.sinc(dk_sig * crystal.length_um / 2.0 / np.pi) ** 2
        idl[i] = np.sinc(dk_idl * crystal.length_um / 2.0 / np.pi) ** 2
    sig /= sig.max()
    idl /= idl.max()
    return TuningCurve(temps, lams, np.maximum(sig, idl), sig, idl)


def _crystal_at(crystal, temperature_c):
    return replace(crystal, temperature_c=temperature_c)


def degeneracy_temperature(crystal, pump, t_bracket_c, tol_c=1e-4):
    """Temperature where delta_k0 vanishes at the degenerate wavelength.

    Bisection over ``t_bracket_c``; raises RootNotFoundError if delta_k0 does
    not change sign over the bracket.
    """
    lam = pump.degenerate_wavelength_nm

    def f(T):
        return delta_k0(_crystal_at(crystal, T), pump, lam, lam)

    lo, hi = float(t_bracket_c[0]), float(t_bracket_c[1])
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise RootNotFoundError(
            f"delta_k0 does not change sign over [{lo:g}, {hi:g}] degC "
            f"(delta_k0 = {flo:.3e} and {fhi:.3e} rad/um)")
    while hi - lo > tol_c:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def degeneracy_band_c(curve, peak_floor=0.15):
    """Temperature span over which signal and idler are spectrally unresolved.

    A temperature row counts as degenerate when the summed signal+idler
    spectrum at that temperature is single-peaked (exactly one local maximum
    above ``peak_floor`` of the row maximum; the floor suppresses sinc
    side lobes).  Returns the width in degC of the contiguous single-peak
    region around the branch crossing.
    """
    combined = curve.signal_branch + curve.idler_branch
    n_rows = combined.shape[0]
    single = np.zeros(n_rows, dtype=bool)
    for i in range(n_rows):
        row = combined[i]
        floor = peak_floor * row.max()
        interior = (row[1:-1] >= row[:-2]) & (row[1:-1] > row[2:]) & (row[1:-1] > floor)
        n_peaks = int(np.count_nonzero(interior))
        # edge maxima count too: a branch peaked at the grid boundary
        if row[0] > row[1] and row[0] > floor:
            n_peaks += 1
        if row[-1] > row[-2] and row[-1] > floor:
            n_peaks += 1
        single[i] = n_peaks == 1
    if not single.any():
        return 0.0
    sig, idl = curve.branch_peaks()
    i_cross = int(np.argmin(np.abs(sig - idl)))
    if not single[i_cross]:
        return 0.0
    lo = i_cross
    while lo > 0 and single[lo - 1]:
        lo -= 1
    hi = i_cross
    while hi < n_rows - 1 and single[hi + 1]:
        hi += 1
    return float(curve.temperatures_c[hi] - curve.temperatures_c[lo])
