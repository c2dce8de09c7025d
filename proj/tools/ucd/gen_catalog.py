#!/usr/bin/env python3
"""Generate the code-point range table used by embedgeo::UnicodeCatalog.

Reads UCD range files (Scripts.txt and DerivedGeneralCategory.txt, either the
upstream files or the range-form copies under data/ucd/<version>/) and writes a
C++ include with sorted, non-overlapping ranges covering U+0000..U+10FFFF.
"""
import argparse
import re
import sys

MAX_CP = 0x10FFFF
CLASSES = "LMNPSZC"
NO_SCRIPT = 0xFFFF
LINE = re.compile(r"^([0-9A-Fa-f]{4,6})(?:\.\.([0-9A-Fa-f]{4,6}))?\s*;\s*([A-Za-z_]+)")


def read_ranges(path):
    out = []
    with open(path, encoding="utf-8") as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            m = LINE.match(line)
            if not m:
                sys.exit(f"{path}: cannot parse line: {raw.rstrip()}")
            lo = int(m.group(1), 16)
            hi = int(m.group(2), 16) if m.group(2) else lo
            out.append((lo, hi, m.group(3)))
    return out


def script_label(name):
    # Han ideographs form one CJK bucket.
    if name == "Han":
        return "CJK"
    return name.upper()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scripts", required=True)
    ap.add_argument("--categories", required=True)
    ap.add_argument("--version", required=True)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    gc = bytearray(b"C" * (MAX_CP + 1))
    for lo, hi, value in read_ranges(args.categories):
        cls = value[0]
        if cls not in CLASSES:
            sys.exit(f"unknown general category {value}")
        gc[lo:hi + 1] = cls.encode() * (hi - lo + 1)

    sc = ["UNKNOWN"] * (MAX_CP + 1)
    for lo, hi, value in read_ranges(args.scripts):
        label = script_label(value)
        for cp in range(lo, hi + 1):
            sc[cp] = label

    names = sorted({sc[cp] for cp in range(MAX_CP + 1) if gc[cp] == ord("L")})
    index = {n: i for i, n in enumerate(names)}

    ranges = []
    lo = 0
    def key(cp):
        cls = chr(gc[cp])
        return (CLASSES.index(cls), index[sc[cp]] if cls == "L" else NO_SCRIPT)
    cur = key(0)
    for cp in range(1, MAX_CP + 1):
        k = key(cp)
        if k != cur:
            ranges.append((lo, cp - 1) + cur)
            lo, cur = cp, k
    ranges.append((lo, MAX_CP) + cur)

    with open(args.out, "w", encoding="utf-8") as f:
        f.write("// Generated by tools/ucd/gen_catalog.py. Do not edit.\n")
        f.write(f'inline constexpr std::string_view kUnicodeVersion = "{args.version}";\n\n')
        f.write(f"inline constexpr std::array<std::string_view, {len(names)}> kScriptNames = {{\n")
        for n in names:
            f.write(f'    "{n}",\n')
        f.write("};\n\n")
        f.write(f"inline constexpr std::array<CatalogRange, {len(ranges)}> kCatalogRanges = {{{{\n")
        for lo, hi, cls, script in ranges:
            f.write(f"    {{0x{lo:X}, 0x{hi:X}, {cls}, 0x{script:X}}},\n")
        f.write("}};\n")


if __name__ == "__main__":
    main()
