# Copyright 2026 The chromanneal Authors
#
#    Licensed under the Apache License, Version 2.0 (the "License");
#    you may not use this file except in compliance with the License.
#    You may obtain a copy of the License at
#
#        http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS,
#    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#    See the License for the specific language governing permissions and
#    limitations under the License.

"""Regenerates the toy bedGraph tracks. Output is deterministic."""

import pathlib
import random

MARKERS = ["H3K4me3", "H3K27ac", "H3K27me3", "H3K9me3"]
CHROM, START, BINS, BIN = "chr1", 1_000_000, 600, 200
# per-domain probability that each marker is present in a bin
DOMAINS = {
    "active": [0.55, 0.7, 0.05, 0.02],
    "polycomb": [0.1, 0.05, 0.75, 0.1],
    "hetero": [0.02, 0.02, 0.15, 0.8],
    "quiet": [0.05, 0.08, 0.12, 0.12],
}
# a promoter-dense region that the example config uses as the bias template
PROMOTER = (300, 340)


def main():
    rng = random.Random(20260101)
    states = []
    while len(states) < BINS:
        kind = rng.choice(["polycomb", "hetero", "quiet", "quiet", "active"])
        states += [kind] * rng.randint(8, 40)
    states = states[:BINS]
    for b in range(*PROMOTER):
        states[b] = "active"
    out = pathlib.Path(__file__).parent
    for m, name in enumerate(MARKERS):
        with open(out / f"{name}.bedGraph", "w") as f:
            f.write(f"track type=bedGraph name={name}\n")
            for b in range(BINS):
                p = DOMAINS[states[b]][m]
                if PROMOTER[0] <= b < PROMOTER[1] and m < 2:
                    p = 0.9 if (b // 4) % 3 else 0.2
                on = rng.random() < p
                # two half-bin intervals so that binning averages
                for half in range(2):
                    v = rng.uniform(0.7, 3.0) if on else rng.uniform(0.0, 0.3)
                    s = START + b * BIN + half * BIN // 2
                    f.write(f"{CHROM}\t{s}\t{s + BIN // 2}\t{v:.3f}\n")


if __name__ == "__main__":
    main()
