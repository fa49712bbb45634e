"""Pulsed pair generation, heralded triple-coincidence counting, and g3.

Per pump pulse the pair number m is drawn from the configured distribution
(Poissonian by default: the source occupies many spectral modes, and a sum of
many thermal modes approaches Poissonian; single- or few-mode thermal is
available for comparison).  Each idler photon reaches the heralding detector
with its arm efficiency; each signal photon independently routes through the
50:50 splitter and onto the transmitted/reflected detectors.  Detectors are
threshold (click/no-click, at most one click per 3 ns window) and add an
independent dark-click Bernoulli per window.  The heralded correlation is

    g3 = N1 * N123 / (N12 * N13)

from the accumulated tallies.  An exact enumeration over pair numbers
provides the oracle the Monte Carlo must converge to.

Monte Carlo streams are split into fixed-size pulse blocks; block b derives
its generator from (seed, b), so tallies are reproducible and independent of
how blocks are distributed over workers.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import InsufficientStatisticsError, TailMassError

BLOCK_PULSES = 1_000_000

DISTRIBUTIONS = ("poissonian", "thermal", "fixed", "coherent")


@dataclass(frozen=True)
class SourceStatModel:
    """Photon-pair statistics of the source versus pump power.

    ``mu_per_mw`` maps pump power linearly to the mean pair number per pulse
    (mu = mu_per_mw * power); the default value is calibrated once so that
    g3 at 5 mW reproduces 0.071.  ``pair_number_distribution``:

    - ``poissonian``: independent pairs (highly multimode source, default)
    - ``thermal``: negative binomial with ``schmidt_modes`` thermal modes
    - ``fixed``: exactly round(mu) pairs every pulse (diagnostics)
    - ``coherent``: benchmark light, idler and signal photon numbers drawn
      independently (uncorrelated herald); gives g3 = 1
    """

    mu_per_mw: float = 0.0085498
    pair_number_distribution: str = "poissonian"
    schmidt_modes: int = 1

    def __post_init__(self):
        if self.mu_per_mw < 0:
            raise ValueError("mu_per_mw must be >= 0")
        if self.pair_number_distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown pair number distribution {self.pair_number_distribution!r}")
        if self.schmidt_modes < 1:
            raise ValueError("schmidt_modes must be a positive integer")

    def mean_pairs(self, power_mw):
        if power_mw < 0:
            raise ValueError("pump power must be >= 0")
        return self.mu_per_mw * power_mw


@dataclass(frozen=True)
class DetectorSpec:
    """Threshold single-photon detector."""

    efficiency: float = 0.25
    dark_count_rate_hz: float = 110.0
    coincidence_window_ns: float = 3.0

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("detector efficiency must be in [0, 1]")
        if self.dark_count_rate_hz < 0 or self.coincidence_window_ns < 0:
            raise ValueError("dark rate and window must be >= 0")

    @property
    def dark_click_probability(self):
        return self.dark_count_rate_hz * self.coincidence_window_ns * 1e-9


@dataclass
class CountsRecord:
    """Singles and coincidence tallies from a simulated run."""

    n1: int
    n12: int
    n13: int
    n123: int
    pulses: int

    def __post_init__(self):
        ok = (0 <= self.n123 <= min(self.n12, self.n13)
              and max(self.n12, self.n13) <= self.n1 <= self.pulses)
        if not ok:
            raise ValueError("tally ordering violated: need n123 <= n12,n13 <= n1 <= pulses")

    def __add__(self, other):
        return CountsRecord(self.n1 + other.n1, self.n12 + other.n12,
                            self.n13 + other.n13, self.n123 + other.n123,
                            self.pulses + other.pulses)

    def as_dict(self):
        return {"n1": self.n1, "n12": self.n12, "n13": self.n13,
                "n123": self.n123, "pulses": self.pulses}


def _draw_pairs(rng, model, mu, size):
    dist = model.pair_number_distribution
    if dist in ("poissonian", "coherent"):
        return rng.poisson(mu, size)
    if dist == "thermal":
        m = model.schmidt_modes
        p = m / (m + mu) if mu > 0 else 1.0
        return rng.negative_binomial(m, p, size) if mu > 0 else np.zeros(size, dtype=np.int64)
    if dist == "fixed":
        return np.full(size, int(round(mu)), dtype=np.int64)
    raise ValueError(dist)


def _simulate_block(seed, block_index, pulses, model, mu, det_idler, det_t, det_r, splitter_t):
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(block_index,)))
    m = _draw_pairs(rng, model, mu, pulses)
    if model.pair_number_distribution == "coherent":
        m_idler = _draw_pairs(rng, model, mu, pulses)
    else:
        m_idler = m

    k_i = rng.binomial(m_idler, det_idler.efficiency)
    # exclusive routing: detected-in-T with prob t*eta_T, then detected-in-R
    # among the remainder with the renormalized probability
    p_t = splitter_t * det_t.efficiency
    p_r = (1.0 - splitter_t) * det_r.efficiency
    k_t = rng.binomial(m, p_t)
    k_r = rng.binomial(m - k_t, p_r / (1.0 - p_t)) if p_t < 1.0 else np.zeros_like(m)

    click_i = k_i > 0
    click_t = k_t > 0
    click_r = k_r > 0
    for click, det in ((click_i, det_idler), (click_t, det_t), (click_r, det_r)):
        d = det.dark_click_probability
        if d > 0:
            click |= rng.random(pulses) < d

    n1 = int(np.count_nonzero(click_i))
    n12 = int(np.count_nonzero(click_i & click_t))
    n13 = int(np.count_nonzero(click_i & click_r))
    n123 = int(np.count_nonzero(click_i & click_t & click_r))
    return CountsRecord(n1, n12, n13, n123, pulses)


def simulate_counts(model, power_mw, det_idler, det_t, det_r, splitter_t, pulses, seed,
                    workers=1):
    """Monte-Carlo tallies for a pulsed heralded-HBT run.

    Deterministic for fixed (seed, pulses, parameters) and independent of
    ``workers``: pulses are processed in fixed-size blocks, each with its own
    generator derived from (seed, block index).
    """
    if not 0.0 <= splitter_t <= 1.0:
        raise ValueError("splitter transmission must be in [0, 1]")
    if pulses < 1:
        raise ValueError("need at least one pulse")
    mu = model.mean_pairs(power_mw)
    blocks = [(b, min(BLOCK_PULSES, pulses - b * BLOCK_PULSES))
              for b in range((pulses + BLOCK_PULSES - 1) // BLOCK_PULSES)]

    def run(args):
        b, n = args
        return _simulate_block(seed, b, n, model, mu, det_idler, det_t, det_r, splitter_t)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, blocks))
    else:
        results = [run(b) for b in blocks]
    total = results[0]
    for rec in results[1:]:
        total = total + rec
    return total


def g3_heralded(counts):
    """Heralded triple-coincidence correlation N1 N123 / (N12 N13)."""
    if counts.n12 <= 0 or counts.n13 <= 0:
        raise InsufficientStatisticsError(
            f"insufficient statistics: N12 = {counts.n12}, N13 = {counts.n13} "
            "(double-coincidence denominator is zero)", counts=counts)
    return counts.n1 * counts.n123 / (counts.n12 * counts.n13)


def g3_stderr(counts):
    """Poisson error propagation through the g3 estimator.

    Uses sqrt(N) per tally; a zero triple count contributes the one-count
    scale so the error bar stays meaningful at g3 = 0.
    """
    g = g3_heralded(counts)
    rel = np.sqrt(1.0 / max(counts.n123, 1) + 1.0 / counts.n1
                  + 1.0 / counts.n12 + 1.0 / counts.n13)
    scale = g if counts.n123 > 0 else counts.n1 / (counts.n12 * counts.n13)
    return float(scale * rel)


def g3_power_sweep(model, power_list_mw, det_idler, det_t, det_r, splitter_t,
                   pulses_per_point, seed, workers=1):
    """g3 versus pump power.

    Returns a list of (power_mw, g3, stderr, CountsRecord); the raw tallies
    are kept for audit dumps.  Each power point uses its own seed offset.
    """
    if len(power_list_mw) == 0:
        raise ValueError("power list is empty")
    out = []
    for i, power in enumerate(power_list_mw):
        counts = simulate_counts(model, power, det_idler, det_t, det_r, splitter_t,
                                 pulses_per_point, seed + i, workers=workers)
        out.append((float(power), g3_heralded(counts), g3_stderr(counts), counts))
    return out


def _pair_pmf(model, mu, cutoff):
    m = np.arange(cutoff + 1)
    dist = model.pair_number_distribution
    if dist in ("poissonian", "coherent"):
        return stats.poisson.pmf(m, mu)
    if dist == "thermal":
        M = model.schmidt_modes
        return stats.nbinom.pmf(m, M, M / (M + mu)) if mu > 0 else (m == 0).astype(float)
    if dist == "fixed":
        return (m == int(round(mu))).astype(float)
    raise ValueError(dist)


def g3_enumerate(model, power_mw, det_idler, det_t, det_r, splitter_t,
                 m_cutoff=80, tail_tol=1e-12, return_tallies=False):
    """Exact expected g3 by enumerating pair numbers and click outcomes.

    This is the brute-force oracle the Monte Carlo estimator must converge
    to.  Raises TailMassError when the pair-number distribution leaves more
    than ``tail_tol`` probability beyond ``m_cutoff``.
    """
    mu = model.mean_pairs(power_mw)
    pm = _pair_pmf(model, mu, m_cutoff)
    tail = 1.0 - pm.sum()
    if tail > tail_tol:
        raise TailMassError(
            f"pair-number tail mass {tail:.3e} beyond cutoff {m_cutoff} exceeds {tail_tol:.1e}")
    m = np.arange(m_cutoff + 1)
    p_t = splitter_t * det_t.efficiency
    p_r = (1.0 - splitter_t) * det_r.efficiency
    # photon-click probabilities conditioned on m signal (and idler) photons
    pc_i = 1.0 - (1.0 - det_idler.efficiency) ** m
    pc_t = 1.0 - (1.0 - p_t) ** m
    pc_r = 1.0 - (1.0 - p_r) ** m
    pc_tr = 1.0 - (1.0 - p_t) ** m - (1.0 - p_r) ** m + (1.0 - p_t - p_r) ** m
    d_i, d_t, d_r = (d.dark_click_probability for d in (det_idler, det_t, det_r))

    def with_dark(p, d):
        return 1.0 - (1.0 - p) * (1.0 - d)

    q_t = with_dark(pc_t, d_t)
    q_r = with_dark(pc_r, d_r)
    # joint T&R click with independent dark ORs:
    # P(T&R) = q_t + q_r - 1 + P(no T, no R) and
    # P(no T, no R) = (1-d_t)(1-d_r) P(no photon click on either)
    q_tr = q_t + q_r - 1.0 + (1.0 - d_t) * (1.0 - d_r) * (1.0 - pc_t - pc_r + pc_tr)

    if model.pair_number_distribution == "coherent":
        # idler arm fed by an independent photon stream with the same mean
        e1 = float((pm * with_dark(pc_i, d_i)).sum())
        e12 = e1 * float((pm * q_t).sum())
        e13 = e1 * float((pm * q_r).sum())
        e123 = e1 * float((pm * q_tr).sum())
    else:
        q_i = with_dark(pc_i, d_i)
        e1 = float((pm * q_i).sum())
        e12 = float((pm * q_i * q_t).sum())
        e13 = float((pm * q_i * q_r).sum())
        e123 = float((pm * q_i * q_tr).sum())

    if e12 <= 0 or e13 <= 0:
        raise InsufficientStatisticsError(
            "expected double-coincidence rate is zero; g3 undefined",
            counts={"n1": e1, "n12": e12, "n13": e13, "n123": e123})
    g3 = e1 * e123 / (e12 * e13)
    if return_tallies:
        return g3, {"n1": e1, "n12": e12, "n13": e13, "n123": e123}
    return g3


def calibrate_mu_per_mw(target_g3, power_mw, det_idler, det_t, det_r, splitter_t,
                        distribution="poissonian", schmidt_modes=1):
    """Solve for the mu(power) slope that reproduces a target g3 at one power."""
    from scipy.optimize import brentq

    def f(alpha):
        model = SourceStatModel(alpha, distribution, schmidt_modes)
        return g3_enumerate(model, power_mw, det_idler, det_t, det_r, splitter_t) - target_g3

    return brentq(f, 1e-6, 1.0, xtol=1e-12)
