#!/usr/bin/env python3
"""Generate a synthetic two-regime telemetry export (one t,value CSV per
channel plus a manifest) for exercising the resample/fit/eval pipeline:

    python scripts/make_synthetic_telemetry.py --out export/ --seed 0
    tgakelm resample export/manifest.json --out dataset.csv
"""

import argparse
import sys

from tgakelm.synth import two_regime_telemetry, write_telemetry_export


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="export directory")
    parser.add_argument("--duration", type=float, default=120.0)
    parser.add_argument("--fault-time", type=float, default=80.0)
    parser.add_argument("--shifted", type=int, default=4,
                        help="number of channels displaced after the fault")
    parser.add_argument("--shift-sigmas", type=float, default=2.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    series = two_regime_telemetry(
        duration=args.duration,
        fault_time=args.fault_time,
        n_shifted=args.shifted,
        shift_sigmas=args.shift_sigmas,
        seed=args.seed,
    )
    manifest = write_telemetry_export(series, args.fault_time, args.out)
    total = sum(len(s.timestamps) for s in series)
    print(f"{len(series)} channels, {total} points, fault at {args.fault_time}s")
    print(f"manifest: {manifest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
