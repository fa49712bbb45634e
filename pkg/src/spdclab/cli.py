"""Command-line interface: figure-regeneration runs from a config file.

Each subcommand rebuilds one theory-side result of the source
characterization (tuning curves, gain envelope, filtered spectrum, coherence
trace, temporal wavepacket, heralded-g3 power sweep, dot scattering scan,
cavity-length matching) and writes CSV/key-value files under ``--out``.
Every emitted file starts with ``#`` metadata lines carrying the config
hash, tool version, command, and seed, and runs are byte-reproducible for a
fixed seed and worker count.

Exit codes: 0 success, 2 configuration error, 3 numeric/fit error,
4 infeasible optimization target.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .cavity import default_detuning_grid, mode_comb, output_spectrum
from .coherence import central_peak_width, coherence_time, default_delay_grid, g1_from_spectrum, revival_peaks
from .config import default_config, load_config
from .errors import ConfigError, InfeasibleError, SpdclabError
from .modematch import match_cavity_length
from .phasematch import fwhm_bandwidth, gain_spectrum, tuning_curve
from .photostat import g3_power_sweep
from .qdscatter import fit_double_peak, scattering_scan
from .temporal import fit_exp_beat, synth_wavepacket

COMMANDS = ("tuning-curve", "gain", "spectrum", "g1", "wavepacket",
            "g3-sweep", "qd-scan", "match")

# config sections each command reads, surfaced when its errors propagate
_SECTIONS = {
    "tuning-curve": "[crystal] [pump] [run]",
    "gain": "[crystal] [pump] [run]",
    "spectrum": "[crystal] [pump] [cavity] [filter] [run]",
    "g1": "[crystal] [pump] [cavity] [run]",
    "wavepacket": "[run]",
    "g3-sweep": "[source] [detectors] [run]",
    "qd-scan": "[crystal] [pump] [cavity] [filter] [qd] [detectors] [run]",
    "match": "[cavity] [run]",
}


def _header(config, command):
    return [
        f"# tool: spdclab {__version__}",
        f"# command: {command}",
        f"# config_hash: {config.config_hash()}",
        f"# seed: {config.get('run', 'seed')}",
    ]


def _write_lines(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_csv(path, config, command, columns, rows):
    lines = _header(config, command)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_num(v) for v in row))
    _write_lines(path, lines)


def _write_keyvalue(path, config, command, pairs):
    lines = _header(config, command)
    lines.extend(f"{key} = {_num(value)}" for key, value in pairs)
    _write_lines(path, lines)


def _num(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".9g")


def _linspace(scan):
    lo, hi, n = scan
    return np.linspace(lo, hi, n)


def _degenerate_nm(config):
    return 2.0 * config.get("pump", "center_wavelength_nm")


def _source_comb(config):
    cavity = config.cavity()
    return mode_comb(cavity, _degenerate_nm(config), config.get("crystal", "temperature_c"))


def _filtered_spectrum(config, filtered=True):
    crystal, pump = config.crystal(), config.pump()
    comb = _source_comb(config)
    grid = default_detuning_grid(comb, config.get("run", "gain_span_ghz"))
    gain = gain_spectrum(crystal, pump, grid)
    return output_spectrum(gain, comb, pump, config.filter() if filtered else None), comb


# ----------------------------------------------------------------- commands

def _cmd_tuning_curve(config, out_dir):
    curve = tuning_curve(config.crystal(), config.pump(),
                         _linspace(config.get("run", "temperature_scan_c")),
                         _linspace(config.get("run", "wavelength_scan_nm")))
    lines = _header(config, "tuning-curve")
    lines.append("temperature_c," + ",".join(_num(w) for w in curve.wavelengths_nm))
    for i, temp in enumerate(curve.temperatures_c):
        lines.append(_num(temp) + "," + ",".join(_num(v) for v in curve.intensity[i]))
    _write_lines(os.path.join(out_dir, "tuning_curve.csv"), lines)
    return ["tuning_curve.csv"]


def _cmd_gain(config, out_dir):
    crystal, pump = config.crystal(), config.pump()
    span = config.get("run", "gain_span_ghz")
    grid = np.linspace(-span, span, 4001)
    gain = gain_spectrum(crystal, pump, grid)
    _write_csv(os.path.join(out_dir, "gain_spectrum.csv"), config, "gain",
               ("detuning_ghz", "intensity"),
               zip(gain.detuning_ghz, gain.intensity))
    _write_keyvalue(os.path.join(out_dir, "gain_summary.txt"), config, "gain",
                    [("fwhm_closed_form_ghz", fwhm_bandwidth(crystal, _degenerate_nm(config)))])
    return ["gain_spectrum.csv", "gain_summary.txt"]


def _cmd_spectrum(config, out_dir):
    spectrum, _ = _filtered_spectrum(config)
    _write_csv(os.path.join(out_dir, "output_spectrum.csv"), config, "spectrum",
               ("detuning_ghz", "intensity"),
               zip(spectrum.detuning_ghz, spectrum.intensity))
    return ["output_spectrum.csv"]


def _cmd_g1(config, out_dir):
    spectrum, comb = _filtered_spectrum(config, filtered=False)
    trace = g1_from_spectrum(spectrum, default_delay_grid())
    _write_csv(os.path.join(out_dir, "g1.csv"), config, "g1",
               ("delay_ps", "visibility"),
               zip(trace.delays_ps, trace.visibility))
    peaks_t, _ = revival_peaks(trace, comb.fsr_ghz)
    pairs = [
        ("mode_linewidth_ghz", comb.mode_linewidth_fwhm_ghz),
        ("revival_spacing_ps", float(np.median(np.diff(peaks_t))) if len(peaks_t) > 1 else float("nan")),
        ("coherence_time_ps", coherence_time(trace, comb.fsr_ghz)),
        ("central_peak_lifetime_ps", central_peak_width(trace)),
    ]
    _write_keyvalue(os.path.join(out_dir, "g1_summary.txt"), config, "g1", pairs)
    return ["g1.csv", "g1_summary.txt"]


def _cmd_wavepacket(config, out_dir):
    get = lambda key: config.get("run", key)
    times = np.arange(0.0, get("wavepacket_span_ps"), get("wavepacket_step_ps"))
    profile = synth_wavepacket(
        get("wavepacket_lifetime_ps"), get("wavepacket_beat_ghz"),
        get("wavepacket_beat_visibility"), get("wavepacket_phase_rad"),
        times, amplitude=get("wavepacket_amplitude"), seed=get("seed"))
    _write_csv(os.path.join(out_dir, "wavepacket.csv"), config, "wavepacket",
               ("time_ps", "counts"),
               zip(profile.times_ps, profile.counts))
    fit = fit_exp_beat(profile)
    pairs = [("lifetime_ps", fit.lifetime_ps), ("lifetime_stderr_ps", fit.lifetime_stderr_ps)]
    if fit.beat_frequency_ghz is not None:
        pairs += [("beat_frequency_ghz", fit.beat_frequency_ghz),
                  ("beat_frequency_stderr_ghz", fit.beat_frequency_stderr_ghz),
                  ("beat_visibility", fit.beat_visibility),
                  ("phase_rad", fit.phase_rad)]
    if fit.note:
        pairs.append(("note", fit.note))
    pairs.append(("reduced_chi_square", fit.reduced_chi_square))
    _write_keyvalue(os.path.join(out_dir, "wavepacket_fit.txt"), config, "wavepacket", pairs)
    return ["wavepacket.csv", "wavepacket_fit.txt"]


def _cmd_g3_sweep(config, out_dir):
    det_i, det_t, det_r = config.detectors()
    results = g3_power_sweep(
        config.source_model(), config.get("run", "powers_mw"),
        det_i, det_t, det_r, config.get("detectors", "splitter_transmission"),
        config.get("run", "pulses"), config.get("run", "seed"),
        workers=config.get("run", "workers"))
    _write_csv(os.path.join(out_dir, "g3_sweep.csv"), config, "g3-sweep",
               ("power_mw", "g3", "stderr"),
               [(p, g, e) for p, g, e, _ in results])
    tally_pairs = []
    for power, _, _, counts in results:
        for key, val in counts.as_dict().items():
            tally_pairs.append((f"power_{_num(power)}_mw.{key}", val))
    _write_keyvalue(os.path.join(out_dir, "g3_tallies.txt"), config, "g3-sweep", tally_pairs)
    return ["g3_sweep.csv", "g3_tallies.txt"]


def _cmd_qd_scan(config, out_dir):
    spectrum, _ = _filtered_spectrum(config)
    strength = config.get("run", "scattering_strength")
    scan = scattering_scan(
        spectrum, config.qd(), _linspace(config.get("run", "bias_scan_v")),
        config.get("run", "incident_rate_hz"), config.get("run", "collection_efficiency"),
        config.get("detectors", "dark_count_rate_hz"), config.get("run", "integration_time_s"),
        config.get("run", "seed"), scattering_strength=strength)
    _write_csv(os.path.join(out_dir, "qd_scan.csv"), config, "qd-scan",
               ("bias_v", "detuning_ghz", "counts", "background"),
               zip(scan.biases_v, scan.detuning_ghz, scan.counts, scan.background))
    files = ["qd_scan.csv"]
    if strength > 0:
        separation, widths, ratio = fit_double_peak(scan)
        _write_keyvalue(os.path.join(out_dir, "qd_scan_fit.txt"), config, "qd-scan",
                        [("peak_separation_ghz", separation),
                         ("fwhm_a_ghz", widths[0]), ("fwhm_b_ghz", widths[1]),
                         ("amplitude_ratio", ratio)])
        files.append("qd_scan_fit.txt")
    return files


def _cmd_match(config, out_dir):
    trace = []
    gap, achieved = match_cavity_length(
        config.get("run", "target_lifetime_ps"), config.cavity(),
        config.get("run", "gap_bounds_mm"),
        wavelength_nm=_degenerate_nm(config),
        temperature_c=config.get("crystal", "temperature_c"),
        trace=trace)
    _write_keyvalue(os.path.join(out_dir, "match.txt"), config, "match",
                    [("target_lifetime_ps", config.get("run", "target_lifetime_ps")),
                     ("gap_mm", gap), ("achieved_lifetime_ps", achieved)])
    _write_csv(os.path.join(out_dir, "match_trace.csv"), config, "match",
               ("iteration", "gap_mm", "lifetime_ps"), trace)
    return ["match.txt", "match_trace.csv"]


_RUNNERS = {
    "tuning-curve": _cmd_tuning_curve,
    "gain": _cmd_gain,
    "spectrum": _cmd_spectrum,
    "g1": _cmd_g1,
    "wavepacket": _cmd_wavepacket,
    "g3-sweep": _cmd_g3_sweep,
    "qd-scan": _cmd_qd_scan,
    "match": _cmd_match,
}


def run(command, config, out_dir):
    """Execute one subcommand; returns the list of files written."""
    if command not in _RUNNERS:
        raise ValueError(f"unknown command {command!r}; choose from {COMMANDS}")
    os.makedirs(out_dir, exist_ok=True)
    return _RUNNERS[command](config, out_dir)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spdclab",
        description="Cavity-SPDC source design and simulation toolkit.")
    parser.add_argument("command", choices=COMMANDS, help="figure-regeneration run to perform")
    parser.add_argument("--config", default=None,
                        help="configuration file (default: $SPDCLAB_CONFIG or the built-in defaults)")
    parser.add_argument("--out", default="spdclab-out", help="output directory (default: %(default)s)")
    parser.add_argument("--seed", type=int, default=None, help="override the run seed")
    parser.add_argument("--override", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a single config value (repeatable)")
    parser.add_argument("--version", action="version", version=f"spdclab {__version__}")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        path = args.config or os.environ.get("SPDCLAB_CONFIG")
        config = load_config(path) if path else default_config()
        overrides = list(args.override)
        if args.seed is not None:
            overrides.append(f"run.seed={args.seed}")
        if overrides:
            config = config.with_overrides(overrides)
        files = run(args.command, config, args.out)
    except ConfigError as exc:
        print(f"spdclab: config error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleError as exc:
        print(f"spdclab: infeasible: {exc}", file=sys.stderr)
        return 4
    except (SpdclabError, ValueError) as exc:
        sections = _SECTIONS.get(args.command, "")
        print(f"spdclab: error in {args.command}: {exc}"
              + (f" (parameters involved: {sections})" if sections else ""), file=sys.stderr)
        return 3
    for name in files:
        print(os.path.join(args.out, name))
    return 0


if __name__ == "__main__":
    sys.exit(main())
