#!/usr/bin/env python3
# Copyright 2026 The pprlkit Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the bundled synthetic frequency tables under data/.

The real source lists (surname registers, state baby-name releases, mesh
block populations) cannot be redistributed, so the generator ships with a
synthetic stand-in: syllable-built names, a Zipf surname tail under a
dominant "smith", drifting first-name popularity, and a log-normal mesh
block population. Output is deterministic for a given --seed.
"""

import argparse
import math
import os
import random

SURNAME_ONSETS = [
    ("s", 14), ("b", 9), ("w", 8), ("h", 8), ("p", 6), ("g", 6), ("f", 4),
    ("v", 3), ("y", 1), ("z", 1), ("q", 0.3), ("x", 0.1), ("st", 3),
    ("br", 3), ("ch", 2), ("gr", 2), ("th", 1), ("sh", 2), ("kr", 1),
    ("tr", 1), ("bl", 1), ("fr", 1), ("o", 2), ("u", 1),
]
MALE_ONSETS = [
    ("j", 7), ("m", 7), ("d", 6), ("r", 6), ("t", 5), ("a", 5), ("c", 5),
    ("l", 5), ("k", 4), ("n", 4), ("g", 3), ("e", 3), ("i", 2), ("", 3),
]
FEMALE_ONSETS = [
    ("j", 6), ("m", 7), ("a", 6), ("l", 6), ("k", 5), ("c", 5), ("e", 5),
    ("r", 4), ("n", 4), ("t", 3), ("d", 3), ("i", 3), ("", 4),
]
VOWELS = [
    ("a", 10), ("e", 9), ("i", 7), ("o", 7), ("u", 4), ("ai", 1), ("ee", 1),
    ("ou", 1), ("ia", 1), ("y", 1),
]
MIDDLES = [
    ("r", 6), ("n", 6), ("l", 6), ("t", 4), ("s", 3), ("m", 3), ("k", 3),
    ("d", 3), ("ll", 2), ("nn", 1.5), ("tt", 1.5), ("ck", 1), ("ng", 1),
    ("v", 1), ("z", 1), ("p", 2), ("g", 2), ("b", 2), ("ch", 1), ("sh", 0.7),
    ("rr", 0.7),
]
SURNAME_ENDINGS = [
    ("", 6), ("n", 3), ("s", 3), ("r", 3), ("son", 2), ("er", 3),
    ("ley", 1.5), ("ton", 1.5), ("man", 1), ("ski", 0.7), ("ic", 0.7),
    ("ov", 0.5), ("ez", 0.5), ("ini", 0.5), ("ell", 1), ("ett", 0.8),
    ("ard", 0.7), ("ins", 0.6),
]
MALE_ENDINGS = [("", 5), ("n", 4), ("s", 2), ("d", 2), ("el", 1), ("o", 1),
                ("y", 2), ("an", 2), ("er", 1)]
FEMALE_ENDINGS = [("a", 8), ("e", 4), ("ie", 2), ("y", 2), ("elle", 1),
                  ("ine", 1), ("ah", 1), ("", 2)]

# Common surnames that head the table, most frequent first.
HEAD_SURNAMES = [
    "smith", "jones", "williams", "brown", "wilson", "taylor", "johnson",
    "white", "martin", "anderson", "thompson", "nguyen", "thomas", "walker",
    "harris", "lee", "ryan", "robinson", "kelly", "king",
]
# Names whose boundary-padded bi-gram sets coincide pairwise.
IDENTICAL_BIGRAM_NAMES = [
    "petitt", "pettit", "pettitt", "mamara", "marama", "maramara",
    "lewellyn", "llewellyn", "llewelyn", "takata", "takataka", "tataka",
    "linemann", "linneman", "linnemann", "mulally", "mullally", "mullaly",
    "bebee", "beebe", "beebee", "kirisits", "kiritsis", "kitsiris",
    "minisi", "minisini", "misini", "kaparas", "karapapas", "karapas",
    "hanemann", "hanneman", "hannemann", "amara", "amarama", "arama",
    "pulella", "pullela", "pullella", "debeen", "deebeen", "deeben",
    "peirrera", "pereirra", "perreira",
]


def pick(rng, table):
    total = sum(w for _, w in table)
    r = rng.random() * total
    for value, w in table:
        r -= w
        if r < 0:
            return value
    return table[-1][0]


def make_name(rng, onsets, endings, syllables):
    parts = [pick(rng, onsets), pick(rng, VOWELS)]
    for _ in range(syllables - 1):
        parts.append(pick(rng, MIDDLES))
        parts.append(pick(rng, VOWELS))
    parts.append(pick(rng, endings))
    return "".join(parts)


def unique_names(rng, count, onsets, endings, syllable_weights, taken):
    out = []
    while len(out) < count:
        name = make_name(rng, onsets, endings, pick(rng, syllable_weights))
        if len(name) < 2 or name in taken:
            continue
        taken.add(name)
        out.append(name)
    return out


def write_surnames(rng, path, n_names, dominant_share, tail_exponent, total):
    taken = set(HEAD_SURNAMES) | set(IDENTICAL_BIGRAM_NAMES)
    tail = unique_names(rng, n_names - len(taken), SURNAME_ONSETS,
                        SURNAME_ENDINGS, [(1, 2), (2, 5), (3, 2)], taken)
    others = HEAD_SURNAMES[1:] + tail
    # Interleave the identical-bigram names into the mid-frequency range.
    for i, name in enumerate(IDENTICAL_BIGRAM_NAMES):
        others.insert(2000 + 37 * i, name)
    weights = [(r + 2) ** -tail_exponent for r in range(len(others))]
    scale = (1.0 - dominant_share) * total / sum(weights)
    rows = [("smith", int(round(dominant_share * total)))]
    rows += [(n, max(1, int(round(w * scale)))) for n, w in zip(others, weights)]
    with open(path, "w") as f:
        f.write("value,count\n")
        for name, count in rows:
            f.write(f"{name},{count}\n")
    return rows


def write_first_names(rng, path, first_year, last_year, per_year, exponent,
                      pool_size, min_width, max_width):
    taken = set()
    pools = {}
    for sex, onsets, endings in (("M", MALE_ONSETS, MALE_ENDINGS),
                                 ("F", FEMALE_ONSETS, FEMALE_ENDINGS)):
        names = unique_names(rng, pool_size, onsets, endings,
                             [(1, 4), (2, 5), (3, 0.5)], taken)
        pools[sex] = [(n, rng.uniform(first_year - 10, last_year + 10),
                       rng.uniform(min_width, max_width),
                       math.exp(rng.gauss(0, 1.0))) for n in names]
    with open(path, "w") as f:
        f.write("yob,sex,value,count\n")
        for year in range(first_year, last_year + 1):
            for sex in ("M", "F"):
                scored = sorted(
                    ((base * math.exp(-((year - peak) / width) ** 2 / 2), n)
                     for n, peak, width, base in pools[sex]),
                    reverse=True)[:per_year]
                # Rank-based popularity within the year's top list.
                for rank, (_, name) in enumerate(scored):
                    count = int(round(4000 * (rank + 1) ** -exponent))
                    f.write(f"{year},{sex},{name},{max(count, 5)}\n")


def write_meshblocks(rng, path, n_blocks, n_sa3):
    sa3_codes = rng.sample(range(101, 999), n_sa3)
    taken = set()
    with open(path, "w") as f:
        f.write("value,count\n")
        for _ in range(n_blocks):
            while True:
                code = f"{rng.choice(sa3_codes)}{rng.randrange(10**8):08d}"
                if code not in taken:
                    taken.add(code)
                    break
            pop = max(1, int(round(math.exp(rng.gauss(math.log(60), 0.6)))))
            f.write(f"{code},{pop}\n")


def write_demographics(path, first_year, last_year):
    with open(path, "w") as f:
        f.write("yob,sex,count\n")
        for year in range(first_year, last_year + 1):
            if year >= 1946:
                w = 36000 + 4000 * math.sin((year - 1946) / 9.0)
            else:
                w = 36000 * math.exp(-((1946 - year) / 14.0) ** 1.6)
            older = max(0, 1960 - year) / 60.0
            f.write(f"{year},M,{int(round(w * (0.5 - 0.15 * older)))}\n")
            f.write(f"{year},F,{int(round(w * (0.5 + 0.15 * older)))}\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=os.path.join(
        os.path.dirname(os.path.abspath(__file__)), "..", "data"))
    parser.add_argument("--seed", type=int, default=20170901)
    parser.add_argument("--surnames", type=int, default=120000)
    parser.add_argument("--dominant-share", type=float, default=0.045)
    parser.add_argument("--tail-exponent", type=float, default=0.72)
    parser.add_argument("--first-name-exponent", type=float, default=1.1)
    parser.add_argument("--first-name-pool", type=int, default=2000)
    parser.add_argument("--first-year", type=int, default=1930)
    parser.add_argument("--min-width", type=float, default=1.5)
    parser.add_argument("--max-width", type=float, default=3.5)
    parser.add_argument("--meshblocks", type=int, default=34000)
    parser.add_argument("--sa3", type=int, default=340)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    os.makedirs(args.out, exist_ok=True)
    write_surnames(rng, os.path.join(args.out, "surnames.csv"), args.surnames,
                   args.dominant_share, args.tail_exponent, 3_000_000)
    write_first_names(rng, os.path.join(args.out, "first_names.csv"),
                      args.first_year, 2015, 100, args.first_name_exponent,
                      args.first_name_pool, args.min_width, args.max_width)
    write_meshblocks(rng, os.path.join(args.out, "meshblocks.csv"),
                     args.meshblocks, args.sa3)
    write_demographics(os.path.join(args.out, "demographics.csv"), 1916, 2016)


if __name__ == "__main__":
    main()
