#!/usr/bin/env python3
"""Build the bundled gazetteer TSV from the 1990 US Census name frequency files.

Usage: build_gazetteer.py <dir with dist.male.first, dist.female.first, dist.all.last> <out.tsv>

The census files ship with the `names` package on PyPI. Each line is
`NAME FREQ CUMFREQ RANK`. We keep the 1000 most frequent male and female
first names and the 2000 most frequent last names. A first name listed for
both genders becomes `unisex` when the rarer gender's frequency is at least a
quarter of the dominant one, otherwise it is assigned to the dominant gender.
Ranks are renumbered 1.. within each (part, gender). The census carries no
per-year data, so every era is "-".
"""
import sys
from pathlib import Path

STOP = {"in", "an", "so", "he", "on", "the", "or", "to", "no", "but", "her", "his", "my"}


def read(path, limit):
    out = []
    for line in Path(path).read_text().splitlines()[:limit]:
        name, freq, _cum, _rank = line.split()
        out.append((name.lower(), float(freq)))
    return out


def main():
    src, dst = Path(sys.argv[1]), Path(sys.argv[2])
    male = dict(read(src / "dist.male.first", 1000))
    female = dict(read(src / "dist.female.first", 1000))
    last = read(src / "dist.all.last", 2000)

    firsts = {}
    for name in set(male) | set(female):
        if name in STOP:
            continue
        m, f = male.get(name, 0.0), female.get(name, 0.0)
        hi, lo = max(m, f), min(m, f)
        if lo > 0 and lo >= hi / 4:
            gender = "unisex"
        else:
            gender = "male" if m >= f else "female"
        firsts[name] = (gender, hi)

    rows = []
    for gender in ("male", "female", "unisex"):
        group = sorted(
            ((n, fr) for n, (g, fr) in firsts.items() if g == gender),
            key=lambda x: (-x[1], x[0]),
        )
        rows += [(n, "first", gender, i + 1) for i, (n, _) in enumerate(group)]
    group = sorted(((n, fr) for n, fr in last if n not in STOP), key=lambda x: (-x[1], x[0]))
    rows += [(n, "last", "unknown", i + 1) for i, (n, _) in enumerate(group)]

    with dst.open("w") as fh:
        fh.write("name\tpart\tgender\trank\tera\n")
        for n, part, g, r in rows:
            fh.write(f"{n}\t{part}\t{g}\t{r}\t-\n")


if __name__ == "__main__":
    main()
