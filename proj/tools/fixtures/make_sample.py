#!/usr/bin/env python3
"""Writes the small labeled news-style corpus used by the CLI examples and tests.

Every sentence has at most 12 tokens. Triggers mark ongoing events; the same
nouns in past or hypothetical frames stay unlabeled.
"""
import json
import random
import sys
from pathlib import Path

CITIES = ["Lima", "Kyiv", "Quito", "Dhaka", "Lagos", "Manila", "Bogota", "Nairobi"]
ORGS = [("UN", "ORG"), ("NATO", "ORG"), ("Reuters", "ORG"), ("FIFA", "ORG")]
PEOPLE = ["Ortiz", "Mensah", "Novak", "Silva", "Tanaka", "Haddad"]

# (text, pos, tag, dep, label); "{CITY}" etc. are filled in per sentence.
TEMPLATES = [
    [("Protests", "NOUN", "NNS", "nsubj", 1), ("continue", "VERB", "VBP", "ROOT", 0), ("in", "ADP", "IN", "prep", 0),
     ("{CITY}", "PROPN", "NNP", "pobj", 0), ("as", "SCONJ", "IN", "mark", 0), ("police", "NOUN", "NNS", "nsubj", 0),
     ("clash", "VERB", "VBP", "advcl", 1), ("with", "ADP", "IN", "prep", 0), ("crowds", "NOUN", "NNS", "pobj", 0),
     (".", "PUNCT", ".", "punct", 0)],
    [("Floods", "NOUN", "NNS", "nsubj", 1), ("are", "AUX", "VBP", "aux", 0), ("spreading", "VERB", "VBG", "ROOT", 0),
     ("across", "ADP", "IN", "prep", 0), ("{CITY}", "PROPN", "NNP", "pobj", 0), (",", "PUNCT", ",", "punct", 0),
     ("{ORG}", "PROPN", "NNP", "nsubj", 0), ("says", "VERB", "VBZ", "parataxis", 0), (".", "PUNCT", ".", "punct", 0)],
    [("The", "DET", "DT", "det", 0), ("2010", "NUM", "CD", "nummod", 0), ("floods", "NOUN", "NNS", "nsubj", 0),
     ("in", "ADP", "IN", "prep", 0), ("{CITY}", "PROPN", "NNP", "pobj", 0), ("killed", "VERB", "VBD", "ROOT", 0),
     ("hundreds", "NOUN", "NNS", "dobj", 0), (".", "PUNCT", ".", "punct", 0)],
    [("{PERSON}", "PROPN", "NNP", "nsubj", 0), ("is", "AUX", "VBZ", "aux", 0), ("leading", "VERB", "VBG", "ROOT", 1),
     ("talks", "NOUN", "NNS", "dobj", 1), ("with", "ADP", "IN", "prep", 0), ("{ORG}", "PROPN", "NNP", "pobj", 0),
     ("in", "ADP", "IN", "prep", 0), ("{CITY}", "PROPN", "NNP", "pobj", 0), (".", "PUNCT", ".", "punct", 0)],
    [("A", "DET", "DT", "det", 0), ("strike", "NOUN", "NN", "nsubj", 1), ("has", "AUX", "VBZ", "aux", 0),
     ("shut", "VERB", "VBN", "ROOT", 0), ("ports", "NOUN", "NNS", "dobj", 0), ("in", "ADP", "IN", "prep", 0),
     ("{CITY}", "PROPN", "NNP", "pobj", 0), ("since", "ADP", "IN", "prep", 0), ("Monday", "PROPN", "NNP", "pobj", 0),
     (".", "PUNCT", ".", "punct", 0)],
    [("A", "DET", "DT", "det", 0), ("strike", "NOUN", "NN", "nsubj", 0), ("could", "AUX", "MD", "aux", 0),
     ("hit", "VERB", "VB", "ROOT", 0), ("{CITY}", "PROPN", "NNP", "dobj", 0), ("next", "ADJ", "JJ", "amod", 0),
     ("year", "NOUN", "NN", "npadvmod", 0), (".", "PUNCT", ".", "punct", 0)],
    [("Fighting", "NOUN", "NN", "nsubj", 1), ("rages", "VERB", "VBZ", "ROOT", 0), ("near", "ADP", "IN", "prep", 0),
     ("{CITY}", "PROPN", "NNP", "pobj", 0), (",", "PUNCT", ",", "punct", 0), ("{PERSON}", "PROPN", "NNP", "nsubj", 0),
     ("reports", "VERB", "VBZ", "parataxis", 0), (".", "PUNCT", ".", "punct", 0)],
    [("{PERSON}", "PROPN", "NNP", "nsubj", 0), ("recalled", "VERB", "VBD", "ROOT", 0), ("the", "DET", "DT", "det", 0),
     ("fighting", "NOUN", "NN", "dobj", 0), ("of", "ADP", "IN", "prep", 0), ("1995", "NUM", "CD", "pobj", 0),
     (".", "PUNCT", ".", "punct", 0)],
    [("Voters", "NOUN", "NNS", "nsubj", 0), ("in", "ADP", "IN", "prep", 0), ("{CITY}", "PROPN", "NNP", "pobj", 0),
     ("are", "AUX", "VBP", "aux", 0), ("casting", "VERB", "VBG", "ROOT", 1), ("ballots", "NOUN", "NNS", "dobj", 0),
     ("today", "NOUN", "NN", "npadvmod", 0), (".", "PUNCT", ".", "punct", 0)],
    [("{ORG}", "PROPN", "NNP", "nsubj", 0), ("warns", "VERB", "VBZ", "ROOT", 0), ("of", "ADP", "IN", "prep", 0),
     ("a", "DET", "DT", "det", 0), ("possible", "ADJ", "JJ", "amod", 0), ("famine", "NOUN", "NN", "pobj", 0),
     (".", "PUNCT", ".", "punct", 0)],
    [("Rescuers", "NOUN", "NNS", "nsubj", 0), ("search", "VERB", "VBP", "ROOT", 1), ("the", "DET", "DT", "det", 0),
     ("rubble", "NOUN", "NN", "dobj", 0), ("in", "ADP", "IN", "prep", 0), ("{CITY}", "PROPN", "NNP", "pobj", 0),
     ("after", "ADP", "IN", "prep", 0), ("the", "DET", "DT", "det", 0), ("quake", "NOUN", "NN", "pobj", 0),
     (".", "PUNCT", ".", "punct", 0)],
]


def fill(template, rng):
    city = rng.choice(CITIES)
    org, org_type = rng.choice(ORGS)
    person = rng.choice(PEOPLE)
    tokens = []
    for text, pos, tag, dep, label in template:
        ent = "O"
        if text == "{CITY}":
            text, ent = city, "B-GPE"
        elif text == "{ORG}":
            text, ent = org, "B-" + org_type
        elif text == "{PERSON}":
            text, ent = person, "B-PERSON"
        elif pos == "NUM" or text in ("Monday", "today"):
            ent = "B-DATE"
        tokens.append({"t": text, "y": label, "pos": pos, "tag": tag, "dep": dep, "ent": ent})
    return tokens


def write(path, prefix, count, rng):
    with open(path, "w", encoding="utf-8") as out:
        for i in range(count):
            template = TEMPLATES[rng.randrange(len(TEMPLATES))]
            date = "2021-%02d-%02d" % (rng.randint(1, 12), rng.randint(1, 28))
            record = {"id": "%s-%03d" % (prefix, i + 1), "date": date, "tokens": fill(template, rng)}
            out.write(json.dumps(record, ensure_ascii=False) + "\n")


def main():
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[2] / "fixtures"
    root.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20211)
    write(root / "sample.jsonl", "s", 40, rng)
    write(root / "sample_test.jsonl", "t", 12, rng)
    (root / "sample.manifest").write_text("trainval: sample.jsonl\ntest: sample_test.jsonl\n")


if __name__ == "__main__":
    main()
