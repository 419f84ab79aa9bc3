"""Builders shared across test modules: tiny corpora, seeded candidate sets."""

import random

from mbrkit.corpus import CandidateSet, Corpus, SegmentPair

# Small fixed vocabulary; enough variety that character n-grams overlap
# between related sentences but full duplicates stay rare.
VOCAB = (
    "the a this that train model data score beam sample noise clean "
    "river stone light paper metric corpus target source system output "
    "quick brown fox lazy dog winter summer garden window market street "
    "quality signal filter margin copper silver border anchor trellis"
).split()


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def write_lines(path, lines):
    write_text(path, "".join(line + "\n" for line in lines))


def corpus_from_pairs(rows):
    return Corpus(
        [
            SegmentPair(id=i, source=source, target=target)
            for i, (source, target) in enumerate(rows)
        ]
    )


def sentence(rng, lo=4, hi=9):
    return " ".join(rng.choice(VOCAB) for _ in range(rng.randint(lo, hi)))


def reference_corpus(n_segments, seed=11):
    """Corpus of seeded word-salad targets with placeholder sources."""
    rng = random.Random(seed)
    rows = []
    for i in range(n_segments):
        target = sentence(rng)
        rows.append((f"src {i} {target.upper()}", target))
    return corpus_from_pairs(rows)


def random_text(rng, alphabet="abcdef ", lo=1, hi=12):
    text = "".join(rng.choice(alphabet) for _ in range(rng.randint(lo, hi)))
    return text.strip() or rng.choice(alphabet.strip())


def random_sets(count, max_n=8, seed=0, alphabet="abcdef ", min_n=1):
    """Seeded candidate sets over a small alphabet (collisions intended)."""
    rng = random.Random(seed)
    sets = []
    for i in range(count):
        n = rng.randint(min_n, max_n)
        sets.append(
            CandidateSet(
                segment_id=i,
                candidates=[random_text(rng, alphabet) for _ in range(n)],
            )
        )
    return sets
