#!/usr/bin/env python3
"""Regenerates the frozen count fixtures in this directory.

Each fixture holds integer correct-response counts out of 30 subjects,
chosen by a seeded local search so that the group means and population
standard deviations match published summary statistics. The counts are
synthetic: only the summaries are reproduced, not the individual values.

Usage: python3 generate.py   (rewrites the JSON files next to this script)
"""
import json
import os
import random
import statistics

N = 30
HERE = os.path.dirname(os.path.abspath(__file__))


def fit(n, total, sd, lo, hi, rng, iters=200000):
    """n integers in [lo, hi] summing to `total` with population SD near sd."""
    vals = [total // n] * n
    for i in range(total - sum(vals)):
        vals[i] += 1
    assert all(lo <= v <= hi for v in vals), "mean outside bounds"

    def err(vs):
        return (statistics.pstdev(vs) / N - sd) ** 2

    best = err(vals)
    for _ in range(iters):
        i, j = rng.randrange(n), rng.randrange(n)
        step = rng.choice([1, 2, 3])
        if i == j or vals[i] + step > hi or vals[j] - step < lo:
            continue
        vals[i] += step
        vals[j] -= step
        e = err(vals)
        if e <= best:
            best = e
        else:
            vals[i] -= step
            vals[j] += step
    return vals


def triplets(name, means, sds, rng, description):
    n = 20
    rec = fit(n, round(means[0] * n * N), sds[0], 16, 30, rng)
    spa = fit(n, round(means[1] * n * N), sds[1], 0, 15, rng)
    tem = fit(n, round(means[2] * n * N), sds[2], 0, 15, rng)
    rng.shuffle(spa)
    rng.shuffle(tem)
    doc = {
        "description": description,
        "n_subjects": N,
        "triplets": [
            {"id": f"{name}-{i + 1:02d}", "minimal": m, "spatial": s, "temporal": t}
            for i, (m, s, t) in enumerate(zip(rec, spa, tem))
        ],
    }
    with open(os.path.join(HERE, f"{name}.json"), "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def components(rng):
    sizes = [7, 6, 6, 6, 6]
    names = [
        ["oar", "arm", "head", "boat", "water", "torso", "hand"],
        ["mop", "bucket", "hand", "floor", "head", "arm"],
        ["needle", "thread", "hand", "fabric", "finger", "arm"],
        ["brush", "teeth", "hand", "mouth", "face", "arm"],
        ["ball", "racket", "arm", "head", "net", "leg"],
    ]
    total = round(0.77 * 31 * N)
    vals = fit(31, total, 0.17, 0, 30, rng)
    rng.shuffle(vals)
    videos, k = [], 0
    for v, size in enumerate(sizes):
        comps = [{"name": names[v][c], "n_correct": vals[k + c]} for c in range(size)]
        k += size
        videos.append({"video": f"video-{v + 1}", "components": comps})
    doc = {
        "description": "Synthetic probe-trial counts for 31 components in 5 minimal videos, "
        "reproducing a published aggregate of 0.77 +/- 0.17.",
        "n_subjects": N,
        "videos": videos,
    }
    with open(os.path.join(HERE, "components.json"), "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def main():
    rng = random.Random(20240607)
    triplets(
        "group_rates",
        (0.71, 0.29, 0.16),
        (0.11, 0.15, 0.14),
        rng,
        "Synthetic counts for 20 minimal / spatial / temporal triplets reproducing "
        "published group rates 0.71 +/- 0.11, 0.29 +/- 0.15, 0.16 +/- 0.14.",
    )
    triplets(
        "gap_rates",
        (0.80, 0.17, 0.12),
        (0.10, 0.12, 0.10),
        rng,
        "Synthetic counts for 20 triplets reproducing published mean recognition "
        "gaps of 0.63 (spatial) and 0.68 (temporal).",
    )
    components(rng)


if __name__ == "__main__":
    main()
