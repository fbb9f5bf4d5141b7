#!/usr/bin/env python3
"""Write a synthetic transmittance table in the hapq CSV schema.

Extinction follows an exponential atmosphere: the optical depth along a ray
is tau_v / Hs * integral exp(-h(s)/Hs) ds over the spherical-Earth ray from
the ground station to the platform. At 90 deg zenith the ray is the full
chord between two platforms at altitude H whose lowest point is ground_alt.
tau_v is chosen so that the vertical path from the reference ground
altitude to the reference platform altitude has the requested transmittance.
"""

import argparse
import math

EARTH_RADIUS = 6_371_000.0

ZENITH_DEG = [0, 10, 20, 30, 40, 50, 55, 60, 65, 68, 70, 72, 75, 80, 85, 90]
GROUND_ALT = [0, 20, 500, 1000, 2000, 15000, 18000, 20000, 23000, 24000, 24500, 25000,
              28000, 29000, 29500, 30000, 33000, 34000, 34500, 35000, 37000, 38000]
PLATFORM_ALT = [18000, 20000, 25000, 30000, 35000, 38000]


def column(h0, H, zenith, scale_height, steps=4000):
    """Integral of exp(-h/Hs) along the ray, in metres."""
    if H <= h0:
        return 0.0
    rg = EARTH_RADIUS + h0
    rs = EARTH_RADIUS + H
    if zenith >= 90.0:
        # tangent at h0: chord of length 2 sqrt(rs^2 - rg^2)
        half = math.sqrt(rs * rs - rg * rg)
        a, b, mu, doubled = 0.0, half, 0.0, True
    else:
        mu = math.cos(math.radians(zenith))
        b = math.sqrt(rs * rs + rg * rg * (mu * mu - 1.0)) - rg * mu
        a, doubled = 0.0, False
    h = (b - a) / steps
    acc = 0.0
    for i in range(steps + 1):
        s = a + i * h
        r = math.sqrt(rg * rg + s * s + 2.0 * rg * s * mu)
        w = 1.0 if i in (0, steps) else (4.0 if i % 2 else 2.0)
        acc += w * math.exp(-(r - EARTH_RADIUS) / scale_height)
    acc *= h / 3.0
    return 2.0 * acc if doubled else acc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--vertical", type=float, default=0.7934,
                    help="transmittance of the vertical reference path")
    ap.add_argument("--ref-ground", type=float, default=20.0)
    ap.add_argument("--ref-platform", type=float, default=35000.0)
    ap.add_argument("--scale-height", type=float, default=8000.0)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    hs = args.scale_height
    ref = column(args.ref_ground, args.ref_platform, 0.0, hs)
    k = -math.log(args.vertical) / ref  # extinction per metre of sea-level air

    with open(args.out, "w", encoding="utf-8") as f:
        f.write("# synthetic exponential-atmosphere transmittance, not a radiative-transfer run\n")
        f.write(f"# vertical {args.ref_ground:g} m -> {args.ref_platform:g} m = {args.vertical}, "
                f"scale height {hs:g} m\n")
        f.write("# zenith 90 rows: full chord between two platforms whose lowest point is ground_alt_m\n")
        f.write("# lambda_nm=1550\n")
        f.write("zenith_deg,ground_alt_m,platform_alt_m,transmittance\n")
        for z in ZENITH_DEG:
            for h0 in GROUND_ALT:
                for H in PLATFORM_ALT:
                    t = math.exp(-k * column(h0, H, z, hs))
                    f.write(f"{z},{h0},{H},{t:.6f}\n")


if __name__ == "__main__":
    main()
