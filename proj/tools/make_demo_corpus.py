#!/usr/bin/env python3
"""Generate the synthetic demo corpus under data/demo/.

Talks are built from a small vocabulary; each talk has a hidden style mix
that shifts both its word choice and its rating shares, so models have
something to pick up. Views are log-normal and multiply every category.
"""

import json
import math
import random
from pathlib import Path

CATEGORIES = ["Beautiful", "Confusing", "Courageous", "Fascinating", "Funny", "Informative",
              "Ingenious", "Inspiring", "Jaw-Dropping", "Long-winded", "Obnoxious", "OK",
              "Persuasive", "Unconvincing"]

# word -> POS tag; grouped by the style that favours them
STYLE_WORDS = {
    "warm": {"love": "NOUN", "hope": "NOUN", "family": "NOUN", "beautiful": "ADJ", "dream": "VERB",
             "heart": "NOUN", "brave": "ADJ", "together": "ADV", "share": "VERB", "kind": "ADJ"},
    "science": {"data": "NOUN", "cell": "NOUN", "measure": "VERB", "energy": "NOUN", "model": "NOUN",
                "brain": "NOUN", "precise": "ADJ", "discover": "VERB", "signal": "NOUN", "rapidly": "ADV"},
    "comic": {"joke": "NOUN", "laugh": "VERB", "silly": "ADJ", "cat": "NOUN", "funny": "ADJ",
              "pizza": "NOUN", "dance": "VERB", "weird": "ADJ", "honestly": "ADV", "party": "NOUN"},
    "ramble": {"basically": "ADV", "stuff": "NOUN", "thing": "NOUN", "whatever": "PRON", "maybe": "ADV",
               "kind-of": "ADV", "sort": "NOUN", "um": "INTJ", "anyway": "ADV", "vague": "ADJ"},
}
FUNCTION_WORDS = {"the": "DET", "a": "DET", "we": "PRON", "i": "PRON", "you": "PRON", "is": "AUX",
                  "and": "CCONJ", "of": "ADP", "in": "ADP", "to": "PART", "this": "DET", "it": "PRON",
                  "think": "VERB", "see": "VERB", "make": "VERB", "world": "NOUN", "people": "NOUN",
                  "idea": "NOUN", "new": "ADJ", "very": "ADV"}

# how strongly each style lifts each category's share
STYLE_RATINGS = {
    "warm": {"Beautiful": 3.0, "Courageous": 2.0, "Inspiring": 3.0},
    "science": {"Fascinating": 3.0, "Informative": 3.0, "Ingenious": 2.0, "Jaw-Dropping": 1.5},
    "comic": {"Funny": 4.0, "OK": 1.5, "Obnoxious": 1.2},
    "ramble": {"Confusing": 3.0, "Long-winded": 3.0, "Unconvincing": 2.0, "Obnoxious": 1.5},
}

OOV_WORDS = {"um", "pizza"}  # left out of the vector file on purpose


def make_sentence(rng, style_weights):
    length = rng.randint(6, 14)
    words = []
    for _ in range(length):
        if rng.random() < 0.45:
            w = rng.choice(list(FUNCTION_WORDS))
        else:
            style = rng.choices(list(STYLE_WORDS), weights=style_weights)[0]
            w = rng.choice(list(STYLE_WORDS[style]))
        words.append(w)
    return words


def pos_of(word):
    for table in STYLE_WORDS.values():
        if word in table:
            return table[word]
    return FUNCTION_WORDS[word]


def tree_lines(rng, talk_id, sent_id, words):
    # Token 1 heads the sentence; every later token attaches to an earlier
    # one, and the final period attaches to the root.
    tokens = words + ["."]
    lines = [f"# talk_id = {talk_id}", f"# sent_id = {sent_id}", "# text = " + " ".join(tokens)]
    for i, tok in enumerate(tokens, start=1):
        if i == 1:
            head, rel, pos = 0, "root", pos_of(tok)
        elif tok == ".":
            head, rel, pos = 1, "punct", "PUNCT"
        else:
            head = rng.randint(1, i - 1)
            pos = pos_of(tok)
            rel = {"NOUN": "obj", "PRON": "nsubj", "ADJ": "amod", "ADV": "advmod", "DET": "det",
                   "ADP": "case", "VERB": "xcomp", "AUX": "aux", "CCONJ": "cc", "PART": "mark",
                   "INTJ": "discourse"}[pos]
        lines.append("\t".join([str(i), tok, tok, pos, "_", "_", str(head), rel, "_", "_"]))
    return lines + [""]


def main():
    rng = random.Random(20240601)
    root = Path(__file__).resolve().parent.parent / "data" / "demo"
    root.mkdir(parents=True, exist_ok=True)

    styles = list(STYLE_WORDS)
    talks, trees = [], []
    for n in range(20):
        talk_id = f"demo-{n + 1:02d}"
        weights = [rng.random() ** 2 for _ in styles]
        weights[n % len(styles)] += 1.5
        total = sum(weights)
        weights = [w / total for w in weights]

        sentences = []
        while sum(len(s) + 1 for s in sentences) < 470:
            sentences.append(make_sentence(rng, weights))
        transcript = " ".join(" ".join(s).capitalize() + "." for s in sentences)
        for k, s in enumerate(sentences):
            trees.extend(tree_lines(rng, talk_id, k, s))

        views = int(math.exp(rng.gauss(13.0, 0.8)))
        share = {c: 1.0 for c in CATEGORIES}
        for style, w in zip(styles, weights):
            for c, lift in STYLE_RATINGS[style].items():
                share[c] += 4.0 * w * lift
        z = sum(share.values())
        rate = 0.002 * rng.uniform(0.8, 1.2)
        ratings = {c: max(1, int(views * rate * share[c] / z * rng.uniform(0.9, 1.1))) for c in CATEGORIES}

        talks.append({
            "id": talk_id,
            "title": f"Demo talk {n + 1}",
            "transcript": transcript,
            "ratings": ratings,
            "views": views,
            "age_days": rng.randint(200, 4000),
            "keywords": ["demo", styles[n % len(styles)]],
        })

    with open(root / "talks.jsonl", "w") as f:
        for t in talks:
            f.write(json.dumps(t) + "\n")
    with open(root / "trees.conllu", "w") as f:
        f.write("\n".join(trees))

    vocab = sorted((set(FUNCTION_WORDS) | {w for t in STYLE_WORDS.values() for w in t} | {"."}) - OOV_WORDS)
    with open(root / "vectors.txt", "w") as f:
        for w in vocab:
            f.write(w + " " + " ".join(f"{rng.gauss(0, 0.3):.6f}" for _ in range(50)) + "\n")

    lexicon = {
        "posemo": ["love", "hope", "beautiful", "kind", "brave", "dream*"],
        "cogproc": ["think", "idea", "model", "measure", "discover*", "precise"],
        "humor": ["joke", "laugh*", "silly", "funny", "weird", "party"],
        "tentat": ["maybe", "basically", "kind-of", "sort", "whatever", "vague"],
        "social": ["we", "you", "people", "family", "together", "share"],
        "science": ["data", "cell", "energy", "brain", "signal"],
        "filler": ["um", "anyway", "stuff", "thing"],
        "pronoun": ["i", "we", "you", "it"],
    }
    with open(root / "lexicon.txt", "w") as f:
        f.write("# Toy word-category lexicon for the demo corpus.\n")
        for name, words in lexicon.items():
            f.write(f"{name}: {' '.join(words)}\n")


if __name__ == "__main__":
    main()
