#!/usr/bin/env python3
"""Build the small font corpus under assets/fonts used by the test suite.

The source faces come from the @expo-google-fonts npm packages (Google Fonts,
SIL Open Font License / Apache 2.0). Each face is subset to the alphabets the
tests exercise so the corpus stays small.

    mkdir /tmp/fonts && cd /tmp/fonts
    for p in <packages>; do npm pack @expo-google-fonts/$p; done
    for f in *.tgz; do mkdir -p x/${f%.tgz}; tar xzf $f -C x/${f%.tgz}; done
    python3 scripts/subset_fonts.py /tmp/fonts/x assets/fonts
"""
import pathlib
import sys

from fontTools import subset
from fontTools.ttLib import TTFont

FACES = [
    # latin / greek / cyrillic / hebrew
    "Arimo_400Regular", "Arimo_700Bold",
    "Cousine_400Regular", "Cousine_700Bold",
    "DidactGothic_400Regular",
    "EBGaramond_400Regular",
    "FiraSans_400Regular",
    "Heebo_400Regular",
    "NotoSans_400Regular",
    "NotoSerif_400Regular",
    "OpenSans_400Regular", "OpenSans_700Bold", "OpenSans_400Regular_Italic",
    "Pacifico_400Regular",
    "Roboto_400Regular", "Roboto_700Bold", "Roboto_400Regular_Italic",
    "RobotoSlab_400Regular",
    "Rubik_400Regular",
    "Tinos_400Regular", "Tinos_700Bold", "Tinos_400Regular_Italic",
    # hangul
    "GamjaFlower_400Regular",
    "GothicA1_400Regular", "GothicA1_700Bold",
    "NanumBrushScript_400Regular",
    "NanumGothic_400Regular", "NanumGothic_700Bold",
    "NanumMyeongjo_400Regular",
    "NanumPenScript_400Regular",
    "NotoSansKR_400Regular",
    "NotoSerifKR_400Regular",
    "PoorStory_400Regular",
]

# Faces whose license reserves the family name are renamed, since a subset is a
# modified version.
RENAME = {
    "NanumBrushScript": "Hangul Brush",
    "NanumGothic": "Hangul Gothic",
    "NanumMyeongjo": "Hangul Myeongjo",
    "NanumPenScript": "Hangul Pen",
}

KEEP = (
    list(range(0x61, 0x7B))
    + list(range(0x3B1, 0x3CA))
    + list(range(0x430, 0x450))
    + list(range(0x5D0, 0x5EB))
    + [0x25A0, 0x25B2, 0x25CF]
    + list(range(0xAC00, 0xAC00 + 1000))
)


def main(src, dst):
    src, dst = pathlib.Path(src), pathlib.Path(dst)
    dst.mkdir(parents=True, exist_ok=True)
    found = {p.stem: p for p in src.rglob("*.ttf")}
    for face in FACES:
        path = found[face]
        cmap = TTFont(path).getBestCmap()
        opts = subset.Options()
        opts.hinting = False
        opts.layout_features = []
        opts.name_IDs = [0, 1, 2, 3, 4, 5, 6, 13, 14]
        opts.notdef_outline = True
        font = subset.load_font(str(path), opts)
        sub = subset.Subsetter(opts)
        sub.populate(unicodes=[c for c in KEEP if c in cmap])
        sub.subset(font)
        stem, style = face.split("_", 1)
        if stem in RENAME:
            rename(font, RENAME[stem])
            face = RENAME[stem].replace(" ", "") + "_" + style
        subset.save_font(font, str(dst / f"{face}.ttf"), opts)


def rename(font, family):
    table = font["name"]
    sub = table.getDebugName(2) or "Regular"
    full = f"{family} {sub}" if sub != "Regular" else family
    for rec in list(table.names):
        if rec.nameID in (1, 16):
            rec.string = family
        elif rec.nameID in (3, 4):
            rec.string = full
        elif rec.nameID == 6:
            rec.string = full.replace(" ", "")
        elif rec.nameID == 0:
            rec.string = rec.toUnicode() + " Subset and renamed."


if __name__ == "__main__":
    main(*sys.argv[1:3])
