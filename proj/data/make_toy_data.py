"""Regenerates the toy corpora in data/toy/ (deterministic)."""
import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent / "toy"

SPECIAL = ["<pad>", "<unk>", "<s>", "</s>"]
LETTERS = [chr(c) for c in range(ord("a"), ord("z") + 1)]
GREEK = list("αβγδεζηθικ")
PIECES = [" ", ".", ",", "th", "he", "in", "er", "an", "re", "on", "at", "en",
          "nd", "the", "ing", "ion", "and", "to", "of", "is", "it", "ou", "ed"]

SRC_WORDS = ["the", "cat", "sat", "on", "a", "mat", "dog", "ran", "to", "house",
             "and", "it", "is", "green", "river", "over", "bridge", "morning", "rain", "city"]
REF_WORDS = ["neko", "ga", "matto", "no", "ue", "ni", "suwatta", "inu", "ie", "made",
             "hashitta", "soshite", "midori", "kawa", "hashi", "asa", "ame", "machi", "desu", "wa"]
GREEK_WORDS = ["αβγ", "δεζ", "ηθι", "κα", "βεθ", "γιδ", "ζηκ", "θαι"]


def sentence(rng, words, lo=3, hi=8):
    n = rng.randint(lo, hi)
    return " ".join(rng.choice(words) for _ in range(n)) + "."


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    vocab = SPECIAL + LETTERS + GREEK + PIECES
    assert len(vocab) == len(set(vocab)) == 63
    vocab.append("!")
    (OUT / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")

    rng = random.Random(20241019)
    tune = [{"id": f"tune-{k}", "src": sentence(rng, SRC_WORDS), "ref": sentence(rng, REF_WORDS)} for k in range(20)]
    test = [{"id": f"test-{k}", "src": sentence(rng, SRC_WORDS), "ref": sentence(rng, REF_WORDS)} for k in range(10)]
    greek = [{"id": f"greek-{k}", "src": sentence(rng, GREEK_WORDS), "ref": sentence(rng, GREEK_WORDS)} for k in range(10)]
    write_jsonl(OUT / "tune.jsonl", tune)
    write_jsonl(OUT / "test.jsonl", test)
    write_jsonl(OUT / "greek.jsonl", greek)

    baselines = []
    for row in test:
        words = row["ref"].rstrip(".").split()
        kept = [w for w in words if rng.random() > 0.3] or words[:1]
        baselines.append({"id": row["id"], "hyp": " ".join(kept) + "."})
    write_jsonl(OUT / "test_baselines.jsonl", baselines)


if __name__ == "__main__":
    main()
