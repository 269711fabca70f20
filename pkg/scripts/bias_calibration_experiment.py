#!/usr/bin/env python3
"""Boresight/clock bias calibration experiment.

Simulates a batch of acquisitions suffering from an unknown imager
misalignment (roll, pitch) and a drifting clock offset, measures the
georeferencing error of each scene against truth, inverts the batch into
bias estimates, and verifies that applying the estimates collapses the
systematic error means.

Usage: python scripts/bias_calibration_experiment.py [n_scenes]
"""

import sys

from pushproc.georef.accuracy import SceneErrorSample, estimate_bias
from pushproc.georef.geolocate import build_geogrid
from pushproc.synthscene import SynthSpec, generate, truth_georef_error

INJECTED = {"roll_deg": 0.401, "pitch_deg": 1.09, "time_s": 0.35}


def make_scene(k: int, drift: float):
    spec = SynthSpec(
        seed=100 + k, width=256, lines=64, texture="flat", vignette_falloff=0.0,
        grid_step=64,
        orbit={"kind": "circular", "altitude_km": 510.0, "inclination_deg": 97.6,
               "raan_deg": 3.0 * k, "arg_lat0_deg": -1.0 + 0.5 * k,
               "epoch_unix": 1_525_487_400.0 + 86_400.0 * k},
        injected_bias=(INJECTED["roll_deg"], INJECTED["pitch_deg"], INJECTED["time_s"]),
        time_drift=drift,
    )
    return generate(spec)


def main() -> int:
    n_scenes = int(sys.argv[1]) if len(sys.argv) > 1 else 8
    print(f"simulating {n_scenes} scenes with injected bias "
          f"roll={INJECTED['roll_deg']} deg, pitch={INJECTED['pitch_deg']} deg, "
          f"clock={INJECTED['time_s']} s/drift-unit\n")

    scenes = []
    samples = []
    print(f"{'scene':>5s} {'drift':>6s} {'across km':>10s} {'along km':>10s}")
    for k in range(n_scenes):
        drift = 2.0 * k / max(n_scenes - 1, 1)
        raw, truth = make_scene(k, drift)
        grid = build_geogrid(raw, truth.metadata, step=64)
        stats = truth_georef_error(truth, grid)
        print(f"{k:5d} {drift:6.2f} {stats.mean_across_km:10.3f} {stats.mean_along_km:10.3f}")
        samples.append(SceneErrorSample(stats.mean_across_km, stats.mean_along_km,
                                        drift, truth.ground_speed_kms))
        scenes.append((raw, truth, stats))

    est = estimate_bias(samples, altitude_km=510.0)
    print(f"\nestimated: roll {est.roll_offset_deg:+.4f} deg "
          f"(true {INJECTED['roll_deg']}), pitch {est.pitch_offset_deg:+.4f} deg "
          f"(true {INJECTED['pitch_deg']}), clock {est.time_offset_s:+.4f} s "
          f"(true {INJECTED['time_s']})")

    print("\napplying the estimates:")
    print(f"{'scene':>5s} {'across km':>10s} {'along km':>10s} {'reduction':>10s}")
    for k, (raw, truth, before) in enumerate(scenes):
        imager = truth.metadata.imager.with_offsets(
            d_roll_deg=est.roll_offset_deg,
            d_pitch_deg=est.pitch_offset_deg,
            d_time_s=est.time_offset_s * truth.time_drift,
        )
        grid = build_geogrid(raw, truth.metadata, imager=imager, step=64)
        after = truth_georef_error(truth, grid)
        reduction = 100.0 * (1.0 - after.rms_total_km / before.rms_total_km)
        print(f"{k:5d} {after.mean_across_km:10.4f} {after.mean_along_km:10.4f} "
              f"{reduction:9.1f}%")
    return 0


if __name__ == "__main__":
    sys.exit(main())
