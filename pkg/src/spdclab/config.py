"""Configuration ingestion, validation, and canonical serialization.

Configurations are flat-sectioned INI-style key-value files (diff-friendly
for regression testing).  ``load_config`` validates everything and reports
every violated invariant at once; unknown sections or keys are rejected.
The canonical serialization round-trips (parse -> serialize -> parse is the
identity) and feeds the config hash embedded in every output file header.
"""

import configparser
import hashlib
import io
from dataclasses import dataclass
from importlib import resources

from .cavity import CavityElement, CavitySpec, EtalonSpec
from .dispersion import CrystalSpec, load_material
from .errors import ConfigError
from .phasematch import PumpSpec
from .photostat import DISTRIBUTIONS, DetectorSpec, SourceStatModel
from .qdscatter import QDSpec


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float_list(text):
    return tuple(float(part) for part in text.split(","))


def _parse_scan(text):
    parts = tuple(float(p) for p in text.split(","))
    if len(parts) != 3:
        raise ValueError("scan needs exactly (min, max, points)")
    return (parts[0], parts[1], int(parts[2]))


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


_in01 = ("must be in (0, 1)", lambda v: 0.0 < v < 1.0)
_in01c = ("must be in [0, 1]", lambda v: 0.0 <= v <= 1.0)
_pos = ("must be > 0", lambda v: v > 0)
_nonneg = ("must be >= 0", lambda v: v >= 0)
_any = (None, lambda v: True)
_axis = ("must be one of x, y, z", lambda v: v in ("x", "y", "z"))
_posint = ("must be a positive integer", lambda v: v >= 1)


def _scan_ok(v):
    return v[0] < v[1] and v[2] >= 2


# section -> key -> (parser, (message, predicate))
SCHEMA = {
    "crystal": {
        "material": (str, _any),
        "length_mm": (float, _pos),
        "poling_period_um": (str, ("must be > 0 or 'unpoled'",
                                   lambda v: v == "unpoled" or (_is_float(v) and float(v) > 0))),
        "temperature_c": (float, _any),
        "pump_axis": (str, _axis),
        "signal_axis": (str, _axis),
        "idler_axis": (str, _axis),
        "phase_offset_rad": (float, _any),
    },
    "pump": {
        "center_wavelength_nm": (float, _pos),
        "repetition_rate_mhz": (float, _pos),
        "pulse_fwhm_ps": (float, _pos),
        "average_power_mw": (float, _nonneg),
    },
    "cavity": {
        "mirror_reflectivity_high": (float, _in01),
        "mirror_reflectivity_out": (float, _in01),
        "compensator_length_mm": (float, _nonneg),
        "air_gap_mm": (float, _nonneg),
        "transverse_splitting_ghz": (float, _pos),
        "transverse_mode_weight": (float, _in01c),
    },
    "filter": {
        "enabled": (_parse_bool, _any),
        "fsr_ghz": (float, _pos),
        "bandwidth_fwhm_ghz": (float, _pos),
        "center_offset_ghz": (float, _any),
    },
    "qd": {
        "center_wavelength_nm": (float, _pos),
        "lifetime_ps": (float, _pos),
        "broadened_fwhm_mhz": (float, _pos),
        "stark_slope_ghz_per_v": (float, _pos),
        "reference_bias_v": (float, _any),
    },
    "detectors": {
        "efficiency_idler": (float, _in01c),
        "efficiency_transmit": (float, _in01c),
        "efficiency_reflect": (float, _in01c),
        "dark_count_rate_hz": (float, _nonneg),
        "coincidence_window_ns": (float, _nonneg),
        "splitter_transmission": (float, _in01c),
    },
    "source": {
        "pair_distribution": (str, (f"must be one of {DISTRIBUTIONS}",
                                    lambda v: v in DISTRIBUTIONS)),
        "mu_per_mw": (float, _nonneg),
        "schmidt_modes": (int, _posint),
    },
    "run": {
        "seed": (int, _nonneg),
        "workers": (int, _posint),
        "pulses": (int, _posint),
        "powers_mw": (_parse_float_list, ("must be non-empty", lambda v: len(v) > 0)),
        "temperature_scan_c": (_parse_scan, ("must be (min, max, points>=2) with min < max", _scan_ok)),
        "wavelength_scan_nm": (_parse_scan, ("must be (min, max, points>=2) with min < max", _scan_ok)),
        "gain_span_ghz": (float, _pos),
        "integration_time_s": (float, _pos),
        "incident_rate_hz": (float, _nonneg),
        "collection_efficiency": (float, _in01c),
        "scattering_strength": (float, _nonneg),
        "bias_scan_v": (_parse_scan, ("must be (min, max, points>=2) with min < max", _scan_ok)),
        "target_lifetime_ps": (float, _pos),
        "gap_bounds_mm": (_parse_float_list, ("must be (lo, hi) with 0 <= lo < hi",
                                              lambda v: len(v) == 2 and 0 <= v[0] < v[1])),
        "wavepacket_lifetime_ps": (float, _pos),
        "wavepacket_beat_ghz": (float, _nonneg),
        "wavepacket_beat_visibility": (float, _in01c),
        "wavepacket_phase_rad": (float, _any),
        "wavepacket_amplitude": (float, _pos),
        "wavepacket_span_ps": (float, _pos),
        "wavepacket_step_ps": (float, _pos),
    },
}


def _is_float(text):
    try:
        float(text)
        return True
    except (TypeError, ValueError):
        return False


@dataclass
class SimulationConfig:
    """Validated configuration; ``values[section][key]`` holds typed entries."""

    values: dict

    def get(self, section, key):
        return self.values[section][key]

    # ------------------------------------------------------------------ build
    def crystal(self):
        material = load_material(self.get("crystal", "material"))
        period = self.get("crystal", "poling_period_um")
        return CrystalSpec(
            material=material,
            length_mm=self.get("crystal", "length_mm"),
            poling_period_um=None if period == "unpoled" else float(period),
            temperature_c=self.get("crystal", "temperature_c"),
            pump_axis=self.get("crystal", "pump_axis"),
            signal_axis=self.get("crystal", "signal_axis"),
            idler_axis=self.get("crystal", "idler_axis"),
            phase_offset_rad=self.get("crystal", "phase_offset_rad"),
        )

    def pump(self):
        return PumpSpec(
            center_wavelength_nm=self.get("pump", "center_wavelength_nm"),
            repetition_rate_mhz=self.get("pump", "repetition_rate_mhz"),
            pulse_fwhm_ps=self.get("pump", "pulse_fwhm_ps"),
            average_power_mw=self.get("pump", "average_power_mw"),
        )

    def cavity(self):
        material = load_material(self.get("crystal", "material"))
        sig = self.get("crystal", "signal_axis")
        idl = self.get("crystal", "idler_axis")
        elements = (
            CavityElement(self.get("crystal", "length_mm"), sig, idl, material),
            # compensator axes are rotated 90 degrees: signal and idler swap
            CavityElement(self.get("cavity", "compensator_length_mm"), idl, sig, material),
        )
        return CavitySpec(
            mirror_reflectivity_high=self.get("cavity", "mirror_reflectivity_high"),
            mirror_reflectivity_out=self.get("cavity", "mirror_reflectivity_out"),
            elements=elements,
            air_gap_mm=self.get("cavity", "air_gap_mm"),
            transverse_splitting_ghz=self.get("cavity", "transverse_splitting_ghz"),
            transverse_mode_weight=self.get("cavity", "transverse_mode_weight"),
        )

    def filter(self):
        if not self.get("filter", "enabled"):
            return None
        return EtalonSpec(
            fsr_ghz=self.get("filter", "fsr_ghz"),
            bandwidth_fwhm_ghz=self.get("filter", "bandwidth_fwhm_ghz"),
            center_offset_ghz=self.get("filter", "center_offset_ghz"),
        )

    def qd(self):
        return QDSpec(
            center_wavelength_nm=self.get("qd", "center_wavelength_nm"),
            lifetime_ps=self.get("qd", "lifetime_ps"),
            broadened_fwhm_mhz=self.get("qd", "broadened_fwhm_mhz"),
            stark_slope_ghz_per_v=self.get("qd", "stark_slope_ghz_per_v"),
            reference_bias_v=self.get("qd", "reference_bias_v"),
        )

    def detectors(self):
        dark = self.get("detectors", "dark_count_rate_hz")
        window = self.get("detectors", "coincidence_window_ns")
        return tuple(
            DetectorSpec(self.get("detectors", key), dark, window)
            for key in ("efficiency_idler", "efficiency_transmit", "efficiency_reflect"))

    def source_model(self):
        return SourceStatModel(
            mu_per_mw=self.get("source", "mu_per_mw"),
            pair_number_distribution=self.get("source", "pair_distribution"),
            schmidt_modes=self.get("source", "schmidt_modes"),
        )

    # -------------------------------------------------------------- serialize
    def serialize(self):
        """Canonical text form: schema ordering, repr-round-trip floats."""
        lines = []
        for section in SCHEMA:
            lines.append(f"[{section}]")
            for key in SCHEMA[section]:
                lines.append(f"{key} = {_fmt(self.values[section][key])}")
            lines.append("")
        return "\n".join(lines)

    def config_hash(self):
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()[:16]

    def with_overrides(self, overrides):
        """New config with ``section.key=value`` string overrides applied."""
        values = {s: dict(kv) for s, kv in self.values.items()}
        violations = []
        for item in overrides:
            if "=" not in item or "." not in item.split("=", 1)[0]:
                violations.append(f"override {item!r} is not of the form section.key=value")
                continue
            target, raw = (part.strip() for part in item.split("=", 1))
            section, key = (part.strip() for part in target.split(".", 1))
            if section not in SCHEMA or key not in SCHEMA.get(section, {}):
                violations.append(f"override targets unknown key [{section}] {key}")
                continue
            parser, (msg, pred) = SCHEMA[section][key]
            try:
                value = parser(raw)
            except (TypeError, ValueError):
                violations.append(f"[{section}] {key}: cannot parse {raw!r}")
                continue
            if not pred(value):
                violations.append(f"[{section}] {key} {msg}")
                continue
            values[section][key] = value
        if violations:
            raise ConfigError("invalid overrides", violations)
        return SimulationConfig(values)


def _validate(raw_values):
    violations = []
    values = {}
    for section, keys in SCHEMA.items():
        if section not in raw_values:
            violations.append(f"missing required section [{section}]")
            continue
        values[section] = {}
        for key, (parser, (msg, pred)) in keys.items():
            if key not in raw_values[section]:
                violations.append(f"[{section}] missing required key {key!r}")
                continue
            raw = raw_values[section][key]
            try:
                value = parser(raw)
            except (TypeError, ValueError):
                violations.append(f"[{section}] {key}: cannot parse {raw!r}")
                continue
            if not pred(value):
                violations.append(f"[{section}] {key} {msg}")
                continue
            values[section][key] = value
        unknown = set(raw_values[section]) - set(keys)
        for key in sorted(unknown):
            violations.append(f"[{section}] unknown key {key!r}")
    for section in sorted(set(raw_values) - set(SCHEMA)):
        violations.append(f"unknown section [{section}]")

    # cross-field invariants (only when the involved keys parsed cleanly)
    def have(section, *keys):
        return section in values and all(k in values[section] for k in keys)

    if have("filter", "fsr_ghz", "bandwidth_fwhm_ghz"):
        if values["filter"]["bandwidth_fwhm_ghz"] >= values["filter"]["fsr_ghz"]:
            violations.append("[filter] bandwidth_fwhm_ghz must be below fsr_ghz")
    if have("qd", "lifetime_ps", "broadened_fwhm_mhz"):
        natural = 1.0 / (2.0 * 3.141592653589793 * values["qd"]["lifetime_ps"] * 1e-12) / 1e6
        if values["qd"]["broadened_fwhm_mhz"] < natural:
            violations.append(
                f"[qd] broadened_fwhm_mhz below the radiative limit {natural:.1f} MHz")
    return values, violations


def parse_config_text(text, source="<config>"):
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",),
        strict=True, interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {source}: {exc}") from exc
    raw = {s: dict(parser.items(s)) for s in parser.sections()}
    if not raw:
        raise ConfigError(
            f"{source} defines no sections; required sections are "
            + ", ".join(f"[{s}]" for s in SCHEMA))
    values, violations = _validate(raw)
    if violations:
        raise ConfigError(f"{source} is invalid", violations)
    return SimulationConfig(values)


def load_config(path):
    """Load and fully validate a configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def default_config():
    """The configuration shipped with the package."""
    text = resources.files("spdclab.data").joinpath("default.cfg").read_text(encoding="utf-8")
    return parse_config_text(text, source="default.cfg")
