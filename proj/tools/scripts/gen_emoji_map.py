#!/usr/bin/env python3
"""Regenerate data/emoji_cldr.tsv from the `emoji` package's CLDR names.

Output format: <codepoints-hex, space separated>\t<short-name>
Short names are lowercase ASCII joined by hyphens; flags get a "flag-" prefix.
"""
import re
import sys
import unicodedata

import emoji


def is_flag(seq: str) -> bool:
    cps = [ord(c) for c in seq]
    if len(cps) == 2 and all(0x1F1E6 <= c <= 0x1F1FF for c in cps):
        return True
    return cps[0] == 0x1F3F4 and any(0xE0020 <= c <= 0xE007F for c in cps)


def short_name(seq: str, raw: str) -> str:
    name = raw.strip(":")
    name = unicodedata.normalize("NFKD", name)
    name = "".join(c for c in name if ord(c) < 128)
    name = name.lower().replace("&", "and")
    name = re.sub(r"[^a-z0-9]+", "-", name).strip("-")
    if is_flag(seq) and not name.startswith("flag-"):
        name = "flag-" + name
    return name


def main() -> None:
    out = sys.stdout if len(sys.argv) < 2 else open(sys.argv[1], "w", encoding="utf-8")
    rows = []
    for seq, info in emoji.EMOJI_DATA.items():
        hexes = " ".join(f"{ord(c):X}" for c in seq)
        rows.append((hexes, short_name(seq, info["en"])))
    rows.sort()
    for hexes, name in rows:
        out.write(f"{hexes}\t{name}\n")


if __name__ == "__main__":
    main()
