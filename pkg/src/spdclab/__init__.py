"""Design and simulation toolkit for a cavity-enhanced type-II SPDC
single-photon source matched to a quantum-dot emitter.

Modules
-------
dispersion : Sellmeier/thermo-optic index, group index, wave vector
phasematch : quasi-phase-matched mismatch, gain spectrum, tuning curves
cavity     : finesse, mode comb, filtered output spectrum
coherence  : |g1(tau)| from the spectrum, coherence time, fringe visibility
temporal   : wavepacket synthesis and lifetime/beat fitting
photostat  : heralded-g3 Monte Carlo and exact enumeration oracle
qdscatter  : Stark-scanned trion scattering simulation
modematch  : spectral/temporal overlap and cavity-length matching
config     : configuration files, validation, canonical serialization
cli        : the ``spdclab`` command-line entry point
"""

__version__ = "0.1.0"
