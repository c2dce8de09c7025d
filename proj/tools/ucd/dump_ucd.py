#!/usr/bin/env python3
"""Write range-form Scripts and DerivedGeneralCategory files from the UCD
tables bundled with perl (Unicode::UCD) and Python (unicodedata).

Usage: dump_ucd.py OUTDIR
Both runtimes must carry the same Unicode version; it names the output files.
"""

import subprocess
import sys
import unicodedata
from pathlib import Path

PERL = r"""
use strict;
use Unicode::UCD qw(prop_invmap);
print Unicode::UCD::UnicodeVersion(), "\n";
my ($r, $v) = prop_invmap("Script");
print "$r->[$_]\t$v->[$_]\n" for 0 .. $#$r;
"""


def runs(values, skip):
    start = 0
    for cp in range(1, 0x110001):
        if cp == 0x110000 or values[cp] != values[start]:
            if values[start] != skip:
                yield start, cp - 1, values[start]
            start = cp


def fmt(lo, hi, value):
    rng = f"{lo:04X}" if lo == hi else f"{lo:04X}..{hi:04X}"
    return f"{rng:<14}; {value}" if len(rng) < 14 else f"{rng}; {value}"


def write(path, header, rows):
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("\n".join(header) + "\n\n")
        for lo, hi, v in rows:
            f.write(fmt(lo, hi, v) + "\n")


def main():
    out = Path(sys.argv[1])
    lines = subprocess.run(["perl", "-e", PERL], capture_output=True, text=True, check=True).stdout.splitlines()
    version = lines[0]
    if version != unicodedata.unidata_version:
        sys.exit(f"perl has Unicode {version}, python has {unicodedata.unidata_version}")
    starts = [tuple(l.split("\t")) for l in lines[1:]]
    script = [None] * 0x110000
    for i, (s, name) in enumerate(starts):
        end = int(starts[i + 1][0]) if i + 1 < len(starts) else 0x110000
        script[int(s):end] = [name] * (end - int(s))
    gc = [unicodedata.category(chr(cp)) for cp in range(0x110000)]

    out.mkdir(parents=True, exist_ok=True)
    write(out / "Scripts.txt",
          [f"# Scripts-{version}.txt (range form)",
           f"# Unicode {version} Script property values; unlisted code points are Unknown.",
           "# Field format: <range> ; <Script>"],
          runs(script, "Unknown"))
    write(out / "DerivedGeneralCategory.txt",
          [f"# DerivedGeneralCategory-{version}.txt (range form)",
           f"# Unicode {version} General_Category values; unlisted code points are Cn.",
           "# Field format: <range> ; <General_Category>"],
          runs(gc, "Cn"))


if __name__ == "__main__":
    main()
