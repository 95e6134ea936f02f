"""Synthetic two-regime telemetry: a stand-in fault stream for exercising
the resample -> fit -> eval pipeline when no real flight logs are at hand.

Channels are coupled through a few smooth latent factors (telemetry
channels are never independent on a real airframe) with a small
independent noise floor; the fault regime displaces a subset of channels
by a fixed multiple of their marginal standard deviation.
"""

import json
import os

import numpy as np

from .dataset import ALFA_FEATURES, TelemetrySeries, atomic_write_text
from .seeding import derive_seed

_N_LATENT = 3
_N_MODES = 12
_NOISE_FRACTION = 0.3


def _latent_factors(rng, duration):
    """Band-limited Gaussian processes, unit variance, smooth over seconds."""
    periods = rng.uniform(4.0, 40.0, size=(_N_LATENT, _N_MODES))
    omegas = 2.0 * np.pi / periods
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(_N_LATENT, _N_MODES))
    amps = rng.normal(0.0, np.sqrt(1.0 / _N_MODES), size=(_N_LATENT, _N_MODES))

    def evaluate(ts):
        arg = omegas[:, :, None] * ts[None, None, :] + phases[:, :, None]
        return np.einsum("km,kmt->kt", amps * np.sqrt(2.0), np.cos(arg))

    return evaluate


def two_regime_telemetry(
    duration: float = 120.0,
    fault_time: float = 80.0,
    n_shifted: int = 4,
    shift_sigmas: float = 2.0,
    seed: int = 0,
) -> list[TelemetrySeries]:
    """Correlated Gaussian telemetry on every channel, each sampled at its
    own irregular rate; after fault_time the first n_shifted channels run
    with their mean displaced by shift_sigmas marginal standard deviations."""
    if not 0.0 < fault_time < duration:
        raise ValueError("fault_time must fall inside (0, duration)")
    rng = np.random.default_rng(derive_seed(seed, "synth"))
    latent = _latent_factors(rng, duration)
    series = []
    for idx, name in enumerate(ALFA_FEATURES):
        rate = rng.uniform(3.0, 9.0)
        n_points = max(int(duration * rate), 8)
        gaps = rng.uniform(0.5 / rate, 1.5 / rate, size=n_points)
        ts = np.cumsum(gaps)
        ts *= duration / ts[-1]
        loadings = rng.normal(size=_N_LATENT)
        loadings /= np.linalg.norm(loadings)
        shared = loadings @ latent(ts)
        structured = np.sqrt(1.0 - _NOISE_FRACTION**2) * shared
        noise = _NOISE_FRACTION * rng.normal(size=n_points)
        center = rng.uniform(-5.0, 5.0)
        scale = rng.uniform(0.5, 3.0)
        values = center + scale * (structured + noise)
        if idx < n_shifted:
            values = np.where(ts >= fault_time, values + shift_sigmas * scale, values)
        series.append(TelemetrySeries(ts, values, name))
    return series


def write_telemetry_export(
    series: list[TelemetrySeries], fault_time: float | None, out_dir
) -> str:
    """Write one t,value CSV per channel plus the manifest; returns its path."""
    os.makedirs(out_dir, exist_ok=True)
    mapping = {}
    for s in series:
        rows = "\n".join(
            f"{repr(float(t))},{repr(float(v))}" for t, v in zip(s.timestamps, s.values)
        )
        filename = f"{s.feature_name}.csv"
        atomic_write_text(os.path.join(out_dir, filename), f"t,value\n{rows}\n")
        mapping[s.feature_name] = filename
    manifest = {"fault_time": fault_time, "features": mapping}
    path = os.path.join(out_dir, "manifest.json")
    atomic_write_text(path, json.dumps(manifest, indent=2) + "\n")
    return path
