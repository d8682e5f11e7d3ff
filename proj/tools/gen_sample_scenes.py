#!/usr/bin/env python3
"""Writes two small synthetic scenes (RGB PNG + relative-depth PFM) to samples/scenes/."""

import math
import pathlib
import random
import struct
import zlib

W, H = 96, 64


def write_png(path, rows):
    raw = b"".join(b"\x00" + bytes(v for px in row for v in px) for row in rows)

    def chunk(tag, data):
        body = tag + data
        return struct.pack(">I", len(data)) + body + struct.pack(">I", zlib.crc32(body))

    ihdr = struct.pack(">IIBBBBB", W, H, 8, 2, 0, 0, 0)
    path.write_bytes(b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"IDAT", zlib.compress(raw, 9))
                     + chunk(b"IEND", b""))


def write_pfm(path, depth):
    # PFM stores rows bottom-up; negative scale marks little-endian.
    body = b"".join(struct.pack("<%df" % W, *depth[y]) for y in reversed(range(H)))
    path.write_bytes(b"Pf\n%d %d\n-1.0\n" % (W, H) + body)


def reef(rng):
    rows, depth = [], []
    for y in range(H):
        row, drow = [], []
        for x in range(W):
            floor = y / (H - 1)
            rock = math.hypot(x - 30, y - 44) < 14 or math.hypot(x - 70, y - 50) < 10
            if rock:
                c = (180 + rng.randint(-20, 20), 90 + rng.randint(-15, 15), 60)
                z = 0.15 + 0.1 * floor
            elif y > 36:
                c = (200, 180 + rng.randint(-10, 10), 130)
                z = 1.0 - floor
            else:
                c = (60 + x, 140, 200 - y)
                z = 1.0
            row.append(c)
            drow.append(z)
        rows.append(row)
        depth.append(drow)
    return rows, depth


def wreck(rng):
    rows, depth = [], []
    for y in range(H):
        row, drow = [], []
        for x in range(W):
            hull = 20 < y < 50 and 10 + (y - 20) // 3 < x < 86 - (y - 20) // 3
            stripe = hull and (x // 8) % 2 == 0
            if hull:
                c = (230, 230, 220) if stripe else (170, 40, 35)
                z = 0.3 + 0.5 * x / W
            else:
                c = (90 + rng.randint(-8, 8), 110, 100)
                z = 0.6 + 0.4 * (1 - y / (H - 1))
            row.append(c)
            drow.append(z)
        rows.append(row)
        depth.append(drow)
    return rows, depth


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "samples" / "scenes"
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(11)
    for name, make in (("reef", reef), ("wreck", wreck)):
        rows, depth = make(rng)
        write_png(out / f"{name}.png", rows)
        write_pfm(out / f"{name}.pfm", depth)


if __name__ == "__main__":
    main()
