#!/usr/bin/env python3
"""Categorize every Unicode scalar value through the CLI and compare with two
independent sources: Python's unicodedata for the general category and perl's
Unicode::UCD for the Script property."""

import argparse
import csv
import io
import json
import subprocess
import sys
import tempfile
import unicodedata
from pathlib import Path

NUL_STANDIN = "\uffff\uffff"

PERL = r"""
use strict;
use Unicode::UCD qw(prop_invmap);
print Unicode::UCD::UnicodeVersion(), "\n";
my ($ranges, $values) = prop_invmap("Script");
for my $i (0 .. $#$ranges) { print "$ranges->[$i]\t$values->[$i]\n"; }
"""


def perl_scripts():
    out = subprocess.run(["perl", "-e", PERL], capture_output=True, text=True, check=True).stdout.splitlines()
    version = out[0]
    starts, names = [], []
    for line in out[1:]:
        s, v = line.split("\t")
        starts.append(int(s))
        names.append(v)
    return version, starts, names


def expand(starts, names):
    table = [None] * 0x110000
    for i, s in enumerate(starts):
        e = starts[i + 1] if i + 1 < len(starts) else 0x110000
        for cp in range(s, e):
            table[cp] = names[i]
    return table


def expected(cp, scripts):
    gc = unicodedata.category(chr(cp))
    if gc[0] != "L":
        return gc[0]
    name = scripts[cp]
    return "CJK" if name == "Han" else name.upper()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--bin", required=True)
    args = ap.parse_args()
    binary = str(Path(args.bin).resolve())

    perl_version, starts, names = perl_scripts()
    py_version = unicodedata.unidata_version
    print(f"python unicodedata {py_version}, perl Unicode::UCD {perl_version}")
    scripts = expand(starts, names)

    cps = [cp for cp in range(0x110000) if not 0xD800 <= cp <= 0xDFFF]
    with tempfile.TemporaryDirectory() as tmp:
        d = Path(tmp)
        (d / "all.json").write_text(json.dumps([chr(cp) for cp in cps]), encoding="utf-8")
        p = subprocess.run([binary, "categorize", "--scheme", "sentencepiece", "all.json", "--out", "all.csv"],
                           cwd=d, capture_output=True, text=True)
        if p.returncode != 0:
            print(p.stderr)
            print("FAIL  categorize exited", p.returncode)
            return 1
        manifest = json.loads((d / "all.csv.manifest.json").read_text())["manifest"]
        # csv in older Pythons rejects NUL; tokens are single scalars so a pair cannot collide
        text = open(d / "all.csv", newline="", encoding="utf-8").read().replace("\0", NUL_STANDIN)
        rows = [[c.replace(NUL_STANDIN, "\0") for c in r] for r in csv.reader(io.StringIO(text, newline=""))]

    failures = 0
    if manifest["unicode_version"] != py_version or py_version != perl_version:
        print(f"FAIL  version mismatch: tool {manifest['unicode_version']}, python {py_version}, perl {perl_version}")
        failures += 1
    if len(rows) != len(cps) + 1:
        print(f"FAIL  expected {len(cps)} rows, got {len(rows) - 1}")
        return 1

    mismatches = []
    for cp, (tok, got) in zip(cps, rows[1:]):
        if tok != chr(cp):
            mismatches.append((cp, "token text changed", repr(tok)))
            continue
        want = expected(cp, scripts)
        if got != want:
            mismatches.append((cp, want, got))
    for cp, want, got in mismatches[:20]:
        print(f"      U+{cp:04X} expected {want} got {got}")
    print(("ok    " if not mismatches else "FAIL  ") + f"{len(cps) - len(mismatches)}/{len(cps)} scalars agree")
    failures += bool(mismatches)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
