#!/usr/bin/env python3
"""Regenerates the small CSV corpus used by the tests. Deterministic."""

import math
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))


def fixed(x, places):
    # Round first so values near zero print as 0.00, not -0.00.
    return "%.*f" % (places, round(x, places) + 0.0)


def write(name, header, rows):
    with open(os.path.join(HERE, name), "w") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(r) + "\n")


def mixture(rng):
    centers = [[rng.uniform(-10, 10) for _ in range(3)] for _ in range(4)]
    rows = []
    for _ in range(4000):
        c = centers[rng.randrange(4)]
        rows.append([fixed(x + rng.gauss(0, 1), 2) for x in c])
    write("mixture.csv", ["x", "y", "z"], rows)


def sensors(rng):
    rows = []
    temp, hum = 21.0, 40.0
    for t in range(3000):
        temp += rng.gauss(0, 0.05)
        hum += rng.gauss(0, 0.1)
        rows.append([str(1700000000 + 60 * t), str(rng.randrange(8)), fixed(temp, 1), fixed(hum, 1),
                     str(1000 + rng.randrange(32))])
    write("sensors.csv", ["ts", "device", "temp", "humidity", "pressure"], rows)


def ints_wide(rng):
    rows = []
    for _ in range(1500):
        rows.append([str(rng.randrange(-2**63, 2**63)), str(rng.randrange(-5, 5)), str(rng.randrange(2**40))])
    rows.append([str(-2**63), "0", "0"])
    rows.append([str(2**63 - 1), "0", str(2**40 - 1)])
    write("ints_wide.csv", ["wide", "small", "mid"], rows)


def raw_floats(rng):
    rows = []
    for _ in range(1000):
        rows.append([repr(rng.gauss(0, 1) * 1e3), repr(math.exp(rng.uniform(-20, 20))), "%.3f" % rng.uniform(0, 1)])
    rows.append(["-0.0", "1e-300", "0.5"])
    write("raw_floats.csv", ["normal", "lognormal", "fixed"], rows)


def main():
    rng = random.Random(20240501)
    mixture(rng)
    sensors(rng)
    ints_wide(rng)
    raw_floats(rng)
    write("tiny.csv", ["a", "b"], [["7", "-1.5"]])
    write("constant.csv", ["a", "b", "c"], [["3", "2.25", "-9"]] * 200)
    write("nibbles.csv", ["v"], [["8"], ["9"], ["10"], ["2"], ["3"]])


if __name__ == "__main__":
    main()
