#!/usr/bin/env python3
"""Regenerates the bundled spectral tables under data/.

The Jerlov tables are produced by a simple bio-optical model (pure water +
phytoplankton + CDOM + mineral particles). Constituent loads increase
monotonically from type I to type 9C, so every coefficient curve is ordered
pointwise across the ten classes. Drop published tables with the same CSV
layout into a directory and point AQUASYNTH_DATA_DIR at it to replace them.

The camera table is a smooth three-lobe approximation of a consumer DSLR
(Nikon D90 class) RGB sensitivity.
"""

import math
import pathlib

WAVELENGTHS = list(range(400, 701, 10))

# Pure water absorption (1/m), 10 nm steps from 400 nm.
PURE_WATER_ABS = [
    0.00663, 0.00473, 0.00454, 0.00495, 0.00635, 0.00922, 0.00979, 0.01060,
    0.01270, 0.01500, 0.02040, 0.03250, 0.04090, 0.04340, 0.04740, 0.05650,
    0.06190, 0.06950, 0.08960, 0.13510, 0.22240, 0.26440, 0.27550, 0.29160,
    0.31080, 0.34000, 0.41000, 0.43900, 0.46500, 0.51600, 0.62400,
]

# name: (chl mg/m^3, cdom a(440), mineral a(440), mineral b(550), particle slope)
WATER_TYPES = {
    "I":   (0.01, 0.001, 0.000, 0.00, 1.0),
    "IA":  (0.05, 0.005, 0.000, 0.00, 1.0),
    "IB":  (0.15, 0.012, 0.000, 0.00, 1.0),
    "II":  (0.40, 0.030, 0.000, 0.00, 1.0),
    "III": (1.20, 0.070, 0.000, 0.00, 1.0),
    "1C":  (1.50, 0.120, 0.020, 0.30, 0.8),
    "3C":  (2.50, 0.250, 0.050, 0.60, 0.7),
    "5C":  (4.00, 0.450, 0.100, 1.00, 0.6),
    "7C":  (6.00, 0.750, 0.180, 1.60, 0.5),
    "9C":  (9.00, 1.200, 0.300, 2.50, 0.5),
}


def phyto_shape(wl):
    raw = lambda x: (0.08 + math.exp(-0.5 * ((x - 435.0) / 45.0) ** 2)
                     + 0.5 * math.exp(-0.5 * ((x - 675.0) / 12.0) ** 2))
    return raw(wl) / raw(440.0)


def water_table(chl, cdom, min_abs, min_scat, slope):
    rows = []
    for wl, aw in zip(WAVELENGTHS, PURE_WATER_ABS):
        bw = 0.00288 * (500.0 / wl) ** 4.32
        a_ph = 0.06 * chl ** 0.65 * phyto_shape(wl)
        a_g = cdom * math.exp(-0.015 * (wl - 440.0))
        a_d = min_abs * math.exp(-0.011 * (wl - 440.0))
        b_p = (0.3 * chl ** 0.62 + min_scat) * (550.0 / wl) ** slope
        a = aw + a_ph + a_g + a_d
        b = bw + b_p
        bb = 0.5 * bw + (0.010 if min_scat == 0.0 else 0.019) * b_p
        kd = (a + bb) / 0.85
        rows.append((wl, a, b, kd))
    return rows


def camera_table():
    lobe = lambda x, c, s: math.exp(-0.5 * ((x - c) / s) ** 2)
    rows = []
    for wl in WAVELENGTHS:
        r = 0.82 * lobe(wl, 600.0, 28.0) + 0.04 * lobe(wl, 450.0, 30.0)
        g = 1.00 * lobe(wl, 530.0, 36.0) + 0.02
        b = 0.90 * lobe(wl, 460.0, 30.0) + 0.03 * lobe(wl, 600.0, 40.0)
        rows.append((wl, r, g, b))
    return rows


def main():
    root = pathlib.Path(__file__).resolve().parent.parent / "data"
    (root / "jerlov").mkdir(parents=True, exist_ok=True)
    (root / "camera").mkdir(parents=True, exist_ok=True)
    for name, params in WATER_TYPES.items():
        with open(root / "jerlov" / f"{name}.csv", "w", newline="\n") as f:
            f.write("wavelength_nm,a,b,kd\n")
            for wl, a, b, kd in water_table(*params):
                f.write(f"{wl},{a:.6g},{b:.6g},{kd:.6g}\n")
    with open(root / "camera" / "nikon_d90.csv", "w", newline="\n") as f:
        f.write("wavelength_nm,r,g,b\n")
        for wl, r, g, b in camera_table():
            f.write(f"{wl},{r:.6g},{g:.6g},{b:.6g}\n")


if __name__ == "__main__":
    main()
