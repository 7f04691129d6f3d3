#!/usr/bin/env python3
"""Regenerate data/ipa_features.csv from articulatory descriptors.

Rows are ternary (+, -, 0) over 22 features. Consonants are described by
place, manner and voicing; vowels by height, backness and rounding.
Modifiers (length, nasalization, palatalization, aspiration) are applied at
parse time by the C++ loader, so only base symbols and tie-barred
affricates appear here.
"""

import csv
import sys

FEATURES = [
    "syl", "son", "cons", "cont", "delrel", "lat", "nas", "strid", "voi",
    "sg", "cg", "ant", "cor", "distr", "lab", "hi", "lo", "back", "round",
    "velaric", "tense", "long",
]

# place -> (ant, cor, distr, lab, hi, lo, back)
PLACES = {
    "bilabial":       ("+", "-", "0", "+", "-", "-", "-"),
    "labiodental":    ("+", "-", "-", "+", "-", "-", "-"),
    "dental":         ("+", "+", "+", "-", "-", "-", "-"),
    "alveolar":       ("+", "+", "-", "-", "-", "-", "-"),
    "postalveolar":   ("-", "+", "+", "-", "+", "-", "-"),
    "retroflex":      ("-", "+", "-", "-", "-", "-", "-"),
    "alveolopalatal": ("-", "+", "+", "-", "+", "-", "-"),
    "palatal":        ("-", "-", "0", "-", "+", "-", "-"),
    "velar":          ("-", "-", "0", "-", "+", "-", "+"),
    "labiovelar":     ("-", "-", "0", "+", "+", "-", "+"),
    "labiopalatal":   ("-", "-", "0", "+", "+", "-", "-"),
    "uvular":         ("-", "-", "0", "-", "-", "-", "+"),
    "pharyngeal":     ("-", "-", "0", "-", "-", "+", "+"),
    "glottal":        ("-", "-", "0", "-", "-", "-", "-"),
}

# manner -> (son, cons, cont, delrel, lat, nas)
MANNERS = {
    "plosive":     ("-", "+", "-", "-", "-", "-"),
    "nasal":       ("+", "+", "-", "-", "-", "+"),
    "trill":       ("+", "+", "+", "-", "-", "-"),
    "tap":         ("+", "+", "+", "-", "-", "-"),
    "fricative":   ("-", "+", "+", "-", "-", "-"),
    "latfric":     ("-", "+", "+", "-", "+", "-"),
    "approx":      ("+", "+", "+", "-", "-", "-"),
    "glide":       ("+", "-", "+", "-", "-", "-"),
    "latapprox":   ("+", "+", "+", "-", "+", "-"),
    "affricate":   ("-", "+", "-", "+", "-", "-"),
    "trillfric":   ("-", "+", "+", "-", "-", "-"),
}

STRIDENT = {"f", "v", "s", "z", "ʃ", "ʒ", "χ", "ʁ", "t͡s", "d͡z", "t͡ʃ",
            "d͡ʒ", "p͡f", "t͡ɕ", "d͡ʑ", "ʈ͡ʂ", "ʂ", "ʐ", "ɕ", "ʑ", "r̝", "ɼ"}

CONSONANTS = [
    ("p", "bilabial", "plosive", "-"), ("b", "bilabial", "plosive", "+"),
    ("t", "alveolar", "plosive", "-"), ("d", "alveolar", "plosive", "+"),
    ("ʈ", "retroflex", "plosive", "-"), ("ɖ", "retroflex", "plosive", "+"),
    ("c", "palatal", "plosive", "-"), ("ɟ", "palatal", "plosive", "+"),
    ("k", "velar", "plosive", "-"), ("g", "velar", "plosive", "+"),
    ("ɡ", "velar", "plosive", "+"),
    ("q", "uvular", "plosive", "-"), ("ɢ", "uvular", "plosive", "+"),
    ("ʔ", "glottal", "plosive", "-"),
    ("m", "bilabial", "nasal", "+"), ("ɱ", "labiodental", "nasal", "+"),
    ("n", "alveolar", "nasal", "+"), ("ɳ", "retroflex", "nasal", "+"),
    ("ɲ", "palatal", "nasal", "+"), ("ŋ", "velar", "nasal", "+"),
    ("ɴ", "uvular", "nasal", "+"),
    ("ʙ", "bilabial", "trill", "+"), ("r", "alveolar", "trill", "+"),
    ("ʀ", "uvular", "trill", "+"),
    ("ɾ", "alveolar", "tap", "+"), ("ɽ", "retroflex", "tap", "+"),
    ("r̝", "alveolar", "trillfric", "+"), ("ɼ", "alveolar", "trillfric", "+"),
    ("ɸ", "bilabial", "fricative", "-"), ("β", "bilabial", "fricative", "+"),
    ("f", "labiodental", "fricative", "-"),
    ("v", "labiodental", "fricative", "+"),
    ("θ", "dental", "fricative", "-"), ("ð", "dental", "fricative", "+"),
    ("s", "alveolar", "fricative", "-"), ("z", "alveolar", "fricative", "+"),
    ("ʃ", "postalveolar", "fricative", "-"),
    ("ʒ", "postalveolar", "fricative", "+"),
    ("ʂ", "retroflex", "fricative", "-"), ("ʐ", "retroflex", "fricative", "+"),
    ("ɕ", "alveolopalatal", "fricative", "-"),
    ("ʑ", "alveolopalatal", "fricative", "+"),
    ("ç", "palatal", "fricative", "-"), ("ʝ", "palatal", "fricative", "+"),
    ("x", "velar", "fricative", "-"), ("ɣ", "velar", "fricative", "+"),
    ("χ", "uvular", "fricative", "-"), ("ʁ", "uvular", "fricative", "+"),
    ("ħ", "pharyngeal", "fricative", "-"),
    ("ʕ", "pharyngeal", "fricative", "+"),
    ("h", "glottal", "fricative", "-"), ("ɦ", "glottal", "fricative", "+"),
    ("ɬ", "alveolar", "latfric", "-"), ("ɮ", "alveolar", "latfric", "+"),
    ("ʋ", "labiodental", "approx", "+"), ("ɹ", "alveolar", "approx", "+"),
    ("ɻ", "retroflex", "approx", "+"),
    ("j", "palatal", "glide", "+"), ("ɰ", "velar", "glide", "+"),
    ("w", "labiovelar", "glide", "+"), ("ɥ", "labiopalatal", "glide", "+"),
    ("ʍ", "labiovelar", "glide", "-"),
    ("l", "alveolar", "latapprox", "+"), ("ɭ", "retroflex", "latapprox", "+"),
    ("ʎ", "palatal", "latapprox", "+"), ("ʟ", "velar", "latapprox", "+"),
    ("ɫ", "velar", "latapprox", "+"),
    ("p͡f", "labiodental", "affricate", "-"),
    ("t͡s", "alveolar", "affricate", "-"), ("d͡z", "alveolar", "affricate", "+"),
    ("t͡ʃ", "postalveolar", "affricate", "-"),
    ("d͡ʒ", "postalveolar", "affricate", "+"),
    ("t͡ɕ", "alveolopalatal", "affricate", "-"),
    ("d͡ʑ", "alveolopalatal", "affricate", "+"),
    ("ʈ͡ʂ", "retroflex", "affricate", "-"),
]

# height -> (hi, lo, tense)
HEIGHTS = {
    "close": ("+", "-", "+"), "nearclose": ("+", "-", "-"),
    "closemid": ("-", "-", "+"), "mid": ("-", "-", "-"),
    "openmid": ("-", "-", "-"), "nearopen": ("-", "+", "-"),
    "open": ("-", "+", "+"),
}
BACKNESS = {"front": "-", "central": "0", "back": "+"}

VOWELS = [
    ("i", "close", "front", "-"), ("y", "close", "front", "+"),
    ("ɨ", "close", "central", "-"), ("ʉ", "close", "central", "+"),
    ("ɯ", "close", "back", "-"), ("u", "close", "back", "+"),
    ("ɪ", "nearclose", "front", "-"), ("ʏ", "nearclose", "front", "+"),
    ("ʊ", "nearclose", "back", "+"),
    ("e", "closemid", "front", "-"), ("ø", "closemid", "front", "+"),
    ("ɘ", "closemid", "central", "-"), ("ɵ", "closemid", "central", "+"),
    ("ɤ", "closemid", "back", "-"), ("o", "closemid", "back", "+"),
    ("ə", "mid", "central", "-"), ("ɚ", "mid", "central", "-"),
    ("ɛ", "openmid", "front", "-"), ("œ", "openmid", "front", "+"),
    ("ɜ", "openmid", "central", "-"), ("ɝ", "openmid", "central", "-"),
    ("ɞ", "openmid", "central", "+"),
    ("ʌ", "openmid", "back", "-"), ("ɔ", "openmid", "back", "+"),
    ("æ", "nearopen", "front", "-"), ("ɐ", "nearopen", "central", "-"),
    ("a", "open", "front", "-"), ("ɶ", "open", "front", "+"),
    ("ɑ", "open", "back", "-"), ("ɒ", "open", "back", "+"),
]
RHOTIC = {"ɚ", "ɝ"}


def consonant_row(sym, place, manner, voi):
    ant, cor, distr, lab, hi, lo, back = PLACES[place]
    son, cons, cont, delrel, lat, nas = MANNERS[manner]
    strid = "+" if sym in STRIDENT else "-"
    sg = "+" if sym in ("h", "ʍ") else "-"
    cg = "+" if sym == "ʔ" else "-"
    rnd = "+" if place in ("labiovelar", "labiopalatal") else "-"
    return {
        "syl": "-", "son": son, "cons": cons, "cont": cont, "delrel": delrel,
        "lat": lat, "nas": nas, "strid": strid, "voi": voi, "sg": sg,
        "cg": cg, "ant": ant, "cor": cor, "distr": distr, "lab": lab,
        "hi": hi, "lo": lo, "back": back, "round": rnd, "velaric": "-",
        "tense": "0", "long": "-",
    }


def vowel_row(sym, height, backness, rnd):
    hi, lo, tense = HEIGHTS[height]
    return {
        "syl": "+", "son": "+", "cons": "-", "cont": "+", "delrel": "-",
        "lat": "-", "nas": "-", "strid": "0", "voi": "+", "sg": "-",
        "cg": "-", "ant": "0", "cor": "+" if sym in RHOTIC else "-",
        "distr": "0", "lab": rnd, "hi": hi, "lo": lo,
        "back": BACKNESS[backness], "round": rnd, "velaric": "-",
        "tense": tense, "long": "-",
    }


def main(path):
    rows = [(s, consonant_row(s, p, m, v)) for s, p, m, v in CONSONANTS]
    rows += [(s, vowel_row(s, h, b, r)) for s, h, b, r in VOWELS]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["symbol"] + FEATURES)
        for sym, row in rows:
            out.writerow([sym] + [row[f] for f in FEATURES])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/ipa_features.csv")
