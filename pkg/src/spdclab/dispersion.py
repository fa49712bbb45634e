"""Refractive index, group index, and wave vector from tabulated dispersion data.

The index model is the fixed two-pole Sellmeier form

    n(lambda)^2 = c0 + c1/(lambda^2 - c2) + c3/(lambda^2 - c4)      (lambda in um)

with a thermo-optic correction linearized about the data set's reference
temperature,

    n(lambda, T) = n(lambda, T_ref) + dn/dT(lambda) * (T - T_ref),
    dn/dT(lambda) = d0 + d1/lambda + d2/lambda^2 + d3/lambda^3      (1/degC).

Coefficients are shipped as plain-text data files (one record per crystal
axis, see ``load_material``) so the physics data stays out of the code and
carries its own provenance header.  The wavelength derivative used by
``group_index`` is the exact symbolic derivative of the model above; the
central-difference version exists only in the test suite as an oracle.
"""

import ast
import re
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import WavelengthRangeError

AXES = ("x", "y", "z")


@dataclass(frozen=True)
class SellmeierSet:
    """Dispersion plus thermo-optic record for one crystal axis."""

    axis_label: str
    sellmeier_coeffs: tuple          # (c0, c1, c2, c3, c4), um^2 scale poles
    thermo_optic_coeffs: tuple       # (d0, d1, d2, d3) of 1/lambda^k, 1/degC
    valid_wavelength_range: tuple    # (min_um, max_um)
    reference_temperature: float     # degC

    def __post_init__(self):
        if self.axis_label not in AXES:
            raise ValueError(f"axis_label must be one of {AXES}, got {self.axis_label!r}")
        lo, hi = self.valid_wavelength_range
        if not lo < hi:
            raise ValueError("valid_wavelength_range must satisfy min < max")
        if len(self.sellmeier_coeffs) != 5:
            raise ValueError("sellmeier_coeffs must have exactly 5 entries")


@dataclass(frozen=True)
class CrystalSpec:
    """Poled (or bulk) nonlinear crystal with its operating point.

    ``poling_period_um`` of ``None`` means unpoled: the quasi-phase-matching
    term is dropped entirely.  ``phase_offset_rad`` is a single configurable
    phase (applied as an offset to delta_k * L/2) that absorbs birefringent
    walk-off and the compensator crystal's phase contribution; the shipped
    default configuration calibrates it so degenerate phase matching occurs
    at the 27 degC operating temperature.
    """

    material: dict                   # axis label -> SellmeierSet
    length_mm: float
    poling_period_um: float | None
    temperature_c: float
    pump_axis: str = "y"
    signal_axis: str = "y"
    idler_axis: str = "z"
    phase_offset_rad: float = 0.0

    def __post_init__(self):
        if self.length_mm <= 0:
            raise ValueError("crystal length must be positive")
        if self.poling_period_um is not None and self.poling_period_um <= 0:
            raise ValueError("poling period must be positive when poled")
        for ax in (self.pump_axis, self.signal_axis, self.idler_axis):
            if ax not in self.material:
                raise ValueError(f"material bundle has no axis {ax!r}")

    @property
    def length_um(self):
        return self.length_mm * 1e3

    def axis_set(self, axis):
        return self.material[axis]


def _check_range(dset, wavelength_um, interior=False):
    lo, hi = dset.valid_wavelength_range
    w = np.asarray(wavelength_um, dtype=float)
    bad = (w < lo) | (w > hi) if not interior else (w <= lo) | (w >= hi)
    if np.any(bad):
        offending = float(np.atleast_1d(w)[np.atleast_1d(bad)][0])
        kind = "strictly inside" if interior else "inside"
        raise WavelengthRangeError(
            f"wavelength {offending:g} um not {kind} the valid range "
            f"[{lo:g}, {hi:g}] um of axis {dset.axis_label!r}")


def _n_sellmeier(coeffs, wavelength_um):
    c0, c1, c2, c3, c4 = coeffs
    l2 = wavelength_um ** 2
    return np.sqrt(c0 + c1 / (l2 - c2) + c3 / (l2 - c4))


def _dn_dT(coeffs, wavelength_um):
    d0, d1, d2, d3 = coeffs
    inv = 1.0 / wavelength_um
    return d0 + d1 * inv + d2 * inv ** 2 + d3 * inv ** 3


def refractive_index(dset, wavelength_um, temperature_c):
    """Refractive index n(lambda, T) for one axis.

    Parameters
    ----------
    dset : SellmeierSet
    wavelength_um : float or ndarray, must lie inside the valid range
    temperature_c : float

    Returns
    -------
    float or ndarray, dimensionless index (> 1 inside the valid range)
    """
    _check_range(dset, wavelength_um)
    wavelength_um = np.asarray(wavelength_um, dtype=float)
    n0 = _n_sellmeier(dset.sellmeier_coeffs, wavelength_um)
    dT = temperature_c - dset.reference_temperature
    out = n0 + _dn_dT(dset.thermo_optic_coeffs, wavelength_um) * dT
    return out if out.ndim else float(out)


def group_index(dset, wavelength_um, temperature_c):
    """Group index n_g = n - lambda * dn/dlambda, with analytic dn/dlambda.

    The wavelength must lie strictly inside the valid range (the derivative
    needs a neighborhood).
    """
    _check_range(dset, wavelength_um, interior=True)
    wavelength_um = np.asarray(wavelength_um, dtype=float)
    c0, c1, c2, c3, c4 = dset.sellmeier_coeffs
    l2 = wavelength_um ** 2
    n0 = _n_sellmeier(dset.sellmeier_coeffs, wavelength_um)
    # d(n^2)/dlambda = -2 lambda (c1/(l2-c2)^2 + c3/(l2-c4)^2)
    dn0 = -wavelength_um * (c1 / (l2 - c2) ** 2 + c3 / (l2 - c4) ** 2) / n0
    # thermo-optic part: d/dlambda sum_k d_k lambda^-k
    d0, d1, d2, d3 = dset.thermo_optic_coeffs
    inv = 1.0 / wavelength_um
    ddndT = -(d1 * inv ** 2 + 2 * d2 * inv ** 3 + 3 * d3 * inv ** 4)
    dT = temperature_c - dset.reference_temperature
    n = n0 + _dn_dT(dset.thermo_optic_coeffs, wavelength_um) * dT
    dn = dn0 + ddndT * dT
    out = n - wavelength_um * dn
    return out if out.ndim else float(out)


def wavevector(dset, wavelength_um, temperature_c):
    """Wave vector k = 2 pi n / lambda in rad/um."""
    n = refractive_index(dset, wavelength_um, temperature_c)
    return 2.0 * np.pi * n / np.asarray(wavelength_um, dtype=float)


# ---------------------------------------------------------------------------
# data file loading

_LIST_RE = re.compile(r"^\[.*\]$")


def _parse_records(text, source):
    records = []
    current = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "axis" and current.get("axis") is not None:
            records.append(current)
            current = {k: v for k, v in current.items() if k == "material"}
        if _LIST_RE.match(value):
            current[key] = ast.literal_eval(value)
        else:
            try:
                current[key] = float(value)
            except ValueError:
                current[key] = value
    if current.get("axis") is not None:
        records.append(current)
    return records


def load_material(path_or_name):
    """Load a per-axis SellmeierSet bundle from a dispersion data file.

    ``path_or_name`` is either a filesystem path or the stem of a data file
    shipped with the package (e.g. ``"ktp_kato_takaoka_2002"``).  Returns a
    dict mapping axis label to SellmeierSet.
    """
    try:
        with open(path_or_name, encoding="utf-8") as fh:
            text = fh.read()
        source = str(path_or_name)
    except (FileNotFoundError, IsADirectoryError):
        source = f"{path_or_name}.txt"
        text = resources.files("spdclab.data").joinpath(source).read_text(encoding="utf-8")

    bundle = {}
    for rec in _parse_records(text, source):
        missing = {"axis", "coeffs", "dn_dT", "range_um", "T_ref_C"} - rec.keys()
        if missing:
            raise ValueError(f"{source}: axis record missing keys {sorted(missing)}")
        dset = SellmeierSet(
            axis_label=str(rec["axis"]),
            sellmeier_coeffs=tuple(float(v) for v in rec["coeffs"]),
            thermo_optic_coeffs=tuple(float(v) for v in rec["dn_dT"]),
            valid_wavelength_range=tuple(float(v) for v in rec["range_um"]),
            reference_temperature=float(rec["T_ref_C"]),
        )
        bundle[dset.axis_label] = dset
    if not bundle:
        raise ValueError(f"{source}: no axis records found")
    return bundle


def constant_index_set(n, axis="y", wavelength_range=(0.1, 10.0)):
    """Toy dispersion-free set with n(lambda, T) identically ``n`` (for tests)."""
    return SellmeierSet(
        axis_label=axis,
        sellmeier_coeffs=(n * n, 0.0, 0.01, 0.0, 100.0),
        thermo_optic_coeffs=(0.0, 0.0, 0.0, 0.0),
        valid_wavelength_range=tuple(wavelength_range),
        reference_temperature=20.0,
    )
