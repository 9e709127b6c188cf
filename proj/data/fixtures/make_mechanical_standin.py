"""Regenerate mechanical-properties-standin.csv.

Synthetic table with the column layout of the featurized mechanical-properties
data: categorical processing / crystal structure / test type, a measurement
temperature used as a filter, six composition descriptors and two outputs.
Compression rows follow a shifted response that the tension rows do not
reveal, which is what the imbalanced-split study exercises. A few rows are
incomplete, off-temperature or duplicated so the preparation rules have
something to do.
"""

import csv
import math
import random

rng = random.Random(20240611)

PROCESSING = {"cast": 0.0, "wrought": 8.0, "anneal": -5.0, "powder": 12.0, "other": 3.0}
STRUCTURE = {"BCC": 25.0, "FCC": -15.0, "other": 0.0}
ELEMENTS = ["Al", "Co", "Cr", "Cu", "Fe", "Mn", "Mo", "Nb", "Ni", "Ti", "V", "W", "Zr"]


def descriptors():
    z = [rng.random() for _ in range(6)]
    return z, {
        "f_mean_atomic_mass": 45.0 + 60.0 * z[0],
        "f_mean_electronegativity": 1.5 + 0.4 * z[1],
        "f_mean_atomic_radius": 1.25 + 0.2 * z[2],
        "f_mean_valence_electrons": 4.0 + 6.0 * z[3],
        "f_mixing_entropy": 1.0 + 0.8 * z[4],
        "f_radius_mismatch": 0.01 + 0.07 * z[5],
    }


def outputs(z, processing, structure, test_type):
    e = (150.0 + 60.0 * z[0] - 40.0 * z[1] + 25.0 * math.sin(3.0 * z[2]) + 20.0 * z[3] * z[4]
         + STRUCTURE[structure] + PROCESSING[processing])
    elong = 35.0 - 0.08 * e + 10.0 * z[1]
    if test_type == "compression":
        e += 30.0 + 50.0 * z[5]
        elong += 15.0 + 10.0 * z[4]
    return e + rng.gauss(0.0, 6.0), max(0.5, elong + rng.gauss(0.0, 4.0))


def formula():
    picks = rng.sample(ELEMENTS, rng.choice([4, 5, 6]))
    return "".join(f"{el}{rng.choice([0.5, 1, 1.5, 2])}" for el in picks)


rows = []
for test_type, count in (("tension", 118), ("compression", 52)):
    for _ in range(count):
        z, feats = descriptors()
        processing = rng.choice(list(PROCESSING))
        structure = rng.choice(list(STRUCTURE))
        e, elong = outputs(z, processing, structure, test_type)
        rows.append({"formula": formula(), "processing": processing, "crystal_structure": structure,
                     "test_type": test_type, "temperature_c": round(rng.uniform(20.0, 25.0), 1), **feats,
                     "youngs_modulus_gpa": e, "elongation_pct": elong, "_z": z})

extra = []
# Repeat measurements of existing alloys: identical inputs, fresh outputs.
for src in rng.sample(rows, 10):
    e, elong = outputs(src["_z"], src["processing"], src["crystal_structure"], src["test_type"])
    extra.append({**src, "youngs_modulus_gpa": e, "elongation_pct": elong})
# Off-room-temperature measurements.
for src in rng.sample(rows, 8):
    extra.append({**src, "temperature_c": rng.choice([300.0, 600.0, -196.0])})
# Incomplete rows.
for k, src in enumerate(rng.sample(rows, 8)):
    row = dict(src)
    row[["youngs_modulus_gpa", "elongation_pct", "processing", "f_mixing_entropy"][k % 4]] = ""
    extra.append(row)

rows += extra
rng.shuffle(rows)

fields = ["formula", "processing", "crystal_structure", "test_type", "temperature_c", "f_mean_atomic_mass",
          "f_mean_electronegativity", "f_mean_atomic_radius", "f_mean_valence_electrons", "f_mixing_entropy",
          "f_radius_mismatch", "youngs_modulus_gpa", "elongation_pct"]
with open("mechanical-properties-standin.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(fields)
    for r in rows:
        w.writerow([r[f] if isinstance(r[f], str) else f"{r[f]:.6g}" for f in fields])
