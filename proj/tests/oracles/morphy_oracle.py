"""Reference noun extraction: tokenise, keep dictionary nouns, reduce them to
their base form with WordNet's morphy procedure, dedupe in first-seen order.

Base forms follow the WordNet/NLTK morphy lookup: candidates are the word
itself (plus its exception-list lemmas, if any) followed by the results of the
noun detachment rules; the first candidate present in index.noun wins.

usage: morphy_oracle.py <wordnet dir> <captions.txt> <out.json>
"""
import json
import re
import sys

RULES = [("s", ""), ("ses", "s"), ("xes", "x"), ("zes", "z"), ("ches", "ch"), ("shes", "sh"),
         ("men", "man"), ("ies", "y")]

STOP = set("""a an the and or but of in on at to for with by from up down over under into onto near
is are was were be been being it its this that these those there here some two three one his her
their he she they we as next while other very out off""".split())


def load(dirname):
    nouns = set()
    with open(f"{dirname}/index.noun") as f:
        for line in f:
            if line.startswith(" ") or not line.strip():
                continue
            nouns.add(line.split()[0])
    exc = {}
    with open(f"{dirname}/noun.exc") as f:
        for line in f:
            parts = line.split()
            if len(parts) >= 2:
                exc.setdefault(parts[0], parts[1:])
    return nouns, exc


def morphy(word, nouns, exc):
    if word in exc:
        candidates = exc[word] + [word]
    else:
        candidates = [word] + [word[: -len(old)] + new for old, new in RULES
                               if word.endswith(old) and len(word) > len(old)]
    for c in candidates:
        if c in nouns:
            return c
    return None


def extract(caption, nouns, exc):
    out = []
    for tok in re.findall(r"[a-z]+", caption.lower()):
        if tok in STOP:
            continue
        lemma = morphy(tok, nouns, exc)
        if lemma is not None and lemma not in out:
            out.append(lemma)
    return out


def main(wn_dir, captions_path, out_path):
    nouns, exc = load(wn_dir)
    with open(captions_path) as f:
        captions = [line.rstrip("\n") for line in f if line.strip()]
    result = [{"caption": c, "nouns": extract(c, nouns, exc)} for c in captions]
    with open(out_path, "w") as f:
        json.dump(result, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main(*sys.argv[1:4])
