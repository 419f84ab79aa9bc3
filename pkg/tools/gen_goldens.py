"""Regenerate the frozen metric goldens under tests/data/.

Golden scores come from an independent sacrebleu installation, not from
this package.  Point SACREBLEU_PY at a sacrebleu 1.x single-file module,
or pip-install sacrebleu 1.x, before running:

    SACREBLEU_PY=/path/to/sacrebleu.py python3 tools/gen_goldens.py

sacrebleu 1.x reports chrF on 0..1, so values are scaled to 0..100 here.
The generated corpus avoids hypothesis/reference pairs with no n-gram
overlap at all; on those this package scores 0 by design where
sacrebleu 1.x would report a purely smoothed BLEU.
"""

import importlib.util
import json
import os
import random
import sys
import types

DATA_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "tests", "data")


def load_sacrebleu():
    path = os.environ.get("SACREBLEU_PY")
    if not path:
        import sacrebleu

        return sacrebleu
    # 1.4.x imports portalocker and MeCab at module scope for features we
    # never touch; satisfy the imports with inert stand-ins.
    fake_lock = types.ModuleType("portalocker")

    class _Lock:
        def __init__(self, *args, **kwargs):
            pass

        def __enter__(self):
            return self

        def __exit__(self, *exc):
            return False

    fake_lock.Lock = _Lock
    sys.modules.setdefault("portalocker", fake_lock)

    fake_mecab = types.ModuleType("MeCab")

    class _DictInfo:
        size = 392126
        next = None

    class _Tagger:
        def __init__(self, *args):
            pass

        def dictionary_info(self):
            return _DictInfo()

        def parse(self, text):
            return text

    fake_mecab.Tagger = _Tagger
    sys.modules.setdefault("MeCab", fake_mecab)

    spec = importlib.util.spec_from_file_location("sacrebleu_ref", path)
    module = importlib.util.module_from_spec(spec)
    sys.modules["sacrebleu_ref"] = module
    spec.loader.exec_module(module)
    return module


REFERENCES = [
    "The cat sat on the mat and watched the rain.",
    "Results improve steadily when the beam grows larger.",
    "The committee approved the budget on 14 March 2019.",
    "Die Katze saß auf der Matte und beobachtete den Regen.",
    "Der Zug nach München fährt um 8.45 Uhr von Gleis 3 ab.",
    "Qualität und Geschwindigkeit sind selten dasselbe.",
    "Kočka seděla na rohožce a dívala se na déšť.",
    "Переклад має зберігати зміст і стиль оригіналу.",
    "Вартість проекту зросла до 2,5 мільйона гривень.",
    "She bought 3.5 kilograms of apples for the pie.",
    "Prices rose by 12 percent in the first quarter.",
    "He said: \"We will not give up, no matter the cost.\"",
    "The e-mail arrived late, but the attachment was missing.",
    "A well-known off-line method still wins in practice.",
    "Between 2010 and 2020 the population doubled.",
    "The U-21 team won 4-2 after extra time.",
    "Ein kleines Haus stand am Ende der Straße.",
    "Die Übung dauert ungefähr vierzig Minuten.",
    "The model translates short sentences surprisingly well.",
    "Long documents remain difficult for every system.",
    "The river flooded the valley after three days of rain.",
    "Nobody expected the answer to be so simple.",
    "The library opens at nine and closes at midnight.",
    "Его ответ был коротким и ясным.",
    "Система перекладу покращується з кожною ітерацією.",
]

SUBSTITUTES = {
    "cat": "dog", "mat": "rug", "rain": "snow", "beam": "stack",
    "larger": "bigger", "approved": "accepted", "budget": "plan",
    "Katze": "Hündin", "Regen": "Schnee", "déšť": "sníh",
    "apples": "pears", "percent": "points", "cost": "price",
    "attachment": "document", "method": "approach", "population": "city",
    "team": "club", "Haus": "Boot", "Minuten": "Stunden",
    "sentences": "phrases", "documents": "texts", "valley": "village",
    "answer": "question", "library": "museum", "midnight": "noon",
    "short": "small", "simple": "easy", "late": "early",
}


def degrade(text, rng):
    """Word-level noise that keeps most tokens shared with the source."""
    words = text.split()
    out = []
    for word in words:
        roll = rng.random()
        bare = word.strip(".,:;\"!?")
        if roll < 0.12 and bare in SUBSTITUTES:
            out.append(word.replace(bare, SUBSTITUTES[bare]))
        elif roll < 0.18 and len(words) > 6:
            continue
        elif roll < 0.22:
            out.append(word)
            out.append(word)
        else:
            out.append(word)
    if rng.random() < 0.25 and len(out) > 2:
        i = rng.randrange(len(out) - 1)
        out[i], out[i + 1] = out[i + 1], out[i]
    return " ".join(out)


def build_corpus():
    rng = random.Random(7202)
    refs = []
    hyps = []
    for base in REFERENCES:
        refs.append(base)
        hyps.append(degrade(base, rng))
        refs.append(base)
        hyps.append(degrade(base, rng))
    return hyps[:50], refs[:50]


def main():
    sb = load_sacrebleu()
    hyps, refs = build_corpus()
    assert len(hyps) == len(refs) == 50

    def s_chrf(h, r):
        return sb.sentence_chrf(h, r).score * 100.0

    def s_bleu(h, r):
        result = sb.sentence_bleu(
            h, r, smooth_method="exp", use_effective_order=True
        )
        return result.score if hasattr(result, "score") else result

    def c_chrf(hs, rs):
        return sb.corpus_chrf(hs, rs).score * 100.0

    def c_bleu(hs, rs):
        return sb.corpus_bleu(
            hs, [rs], smooth_method="exp", force=True, use_effective_order=False
        ).score

    # every golden pair must share at least one unigram (see module docstring)
    for h, r in zip(hyps, refs):
        shared = set(h.split()) & set(r.split())
        assert shared, (h, r)

    with open(os.path.join(DATA_DIR, "golden_corpus_hyp.txt"), "w") as out:
        out.write("\n".join(hyps) + "\n")
    with open(os.path.join(DATA_DIR, "golden_corpus_ref.txt"), "w") as out:
        out.write("\n".join(refs) + "\n")

    golden = {
        "generator": f"sacrebleu {sb.VERSION} (chrF scaled to 0..100)",
        "chrf_corpus": c_chrf(hyps, refs),
        "bleu_corpus": c_bleu(hyps, refs),
        "chrf_sentences": [s_chrf(h, r) for h, r in zip(hyps, refs)],
        "bleu_sentences": [s_bleu(h, r) for h, r in zip(hyps, refs)],
    }
    with open(os.path.join(DATA_DIR, "golden_corpus_scores.json"), "w") as out:
        json.dump(golden, out, indent=1)

    toy_hyps = [
        "The cat sat on the mat.",
        "It rained all day yesterday.",
        "Results improve with larger beams.",
    ]
    toy_refs = [
        "The cat sat on the mat.",
        "It rained the whole day yesterday.",
        "Results improve when beams grow larger.",
    ]
    tok_texts = [
        "Hello, world!",
        "It costs 3.5 dollars.",
        "A B-52 flew over; we watched.",
        "\"Quoted\" — said no-one, ever.",
        "Rates: 4,200.50 (up 3%)",
        "&quot;escaped&amp;entities&gt;here&lt;",
        "U-21 match ended 4-2.",
        "  leading and trailing   ",
    ]
    cases = {
        "generator": f"sacrebleu {sb.VERSION} (chrF scaled to 0..100)",
        "chrf_sentence": [
            {"hyp": h, "ref": r, "score": s_chrf(h, r)}
            for h, r in [
                ("the cat sat", "the cat sat on the mat"),
                ("the cat sat on the mat", "the cat sat"),
                ("abc", "abc"),
                ("Die Katze schläft.", "Die Katze schläft tief."),
                ("переклад якість", "якість перекладу"),
                ("a b c d", "abcd"),
            ]
        ],
        "bleu_sentence": [
            {"hyp": h, "ref": r, "score": s_bleu(h, r)}
            for h, r in [
                ("the the the", "the cat"),
                ("the cat sat on the mat", "the cat sat on the mat"),
                ("the cat sat on the mat", "the cat was on the mat"),
                ("one two three four five six", "one two three four five seven"),
                ("Der Zug fährt um 8.45 Uhr.", "Der Zug fährt um 8.45 Uhr ab."),
            ]
        ],
        "chrf_corpus": [{"hyps": toy_hyps, "refs": toy_refs,
                         "score": c_chrf(toy_hyps, toy_refs)}],
        "bleu_corpus": [{"hyps": toy_hyps, "refs": toy_refs,
                         "score": c_bleu(toy_hyps, toy_refs)}],
        "tokenize_13a": [
            {"text": t, "tokens": sb.TOKENIZERS["13a"](t).split()} for t in tok_texts
        ],
    }
    with open(os.path.join(DATA_DIR, "golden_metric_cases.json"), "w") as out:
        json.dump(cases, out, indent=1, ensure_ascii=False)

    print("chrf_corpus", golden["chrf_corpus"])
    print("bleu_corpus", golden["bleu_corpus"])
    print("wrote", DATA_DIR)


if __name__ == "__main__":
    main()
