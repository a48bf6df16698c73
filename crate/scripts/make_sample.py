#!/usr/bin/env python3
"""Regenerates the bundled sample run under sample/.

English and German image corpora with planted pairs: most are valid, and
one pair per filter is built to fail exactly that filter. Also writes the
lexicons, word lists, translations, embeddings, features, test questions,
and a judgment CSV. Output is fully determined by SEED; sample/anpkit.toml
is maintained by hand.
"""

import json
import random
from pathlib import Path

SEED = 20161015
ROOT = Path(__file__).resolve().parent.parent / "sample"

EMOTIONS = [
    "ecstasy", "joy", "serenity", "admiration", "trust", "acceptance",
    "terror", "fear", "apprehension", "amazement", "surprise", "distraction",
    "grief", "sadness", "pensiveness", "loathing", "disgust", "boredom",
    "rage", "anger", "annoyance", "vigilance", "anticipation", "interest",
]
DE_KEYWORDS = [
    "ekstase", "freude", "gelassenheit", "bewunderung", "vertrauen", "akzeptanz",
    "schrecken", "angst", "besorgnis", "erstaunen", "überraschung", "ablenkung",
    "kummer", "traurigkeit", "nachdenklichkeit", "abscheu", "ekel", "langeweile",
    "wut", "ärger", "verärgerung", "wachsamkeit", "vorfreude", "interesse",
]

# (adj, noun, images, uploader pool size, emotions)
EN_PAIRS = [
    ("beautiful", "sky", 52, 9, ["joy", "serenity", "admiration"]),
    ("happy", "dog", 48, 8, ["joy", "ecstasy"]),
    ("cute", "cat", 46, 7, ["joy", "trust"]),
    ("bright", "flower", 44, 6, ["serenity", "joy", "interest"]),
    ("sad", "face", 47, 8, ["sadness", "grief"]),
    ("dark", "night", 50, 9, ["fear", "apprehension"]),
    ("dark", "street", 44, 6, ["fear", "pensiveness"]),
    ("dark", "storm", 43, 6, ["terror", "fear"]),
    ("lonely", "street", 45, 7, ["sadness", "pensiveness"]),
    ("scary", "storm", 42, 6, ["terror", "fear", "surprise"]),
    ("angry", "face", 41, 5, ["anger", "rage", "annoyance"]),
    ("old", "house", 40, 5, ["boredom", "pensiveness", "acceptance"]),
    # fourth "dark" noun: over the per-adjective cap of 3
    ("dark", "house", 41, 5, ["fear", "boredom"]),
    # named entity and technical term
    ("beautiful", "paris", 45, 6, ["admiration", "joy"]),
    ("sad", "iphone", 44, 6, ["annoyance", "sadness"]),
    # neutral
    ("wooden", "table", 45, 6, ["boredom"]),
    # one short of the English frequency threshold
    ("happy", "cat", 39, 6, ["joy"]),
    # two uploaders
    ("sad", "dog", 45, 2, ["sadness"]),
]

DE_PAIRS = [
    ("schön", "himmel", 24, 6, ["freude", "gelassenheit"]),
    ("glücklich", "hund", 22, 5, ["freude", "ekstase"]),
    ("süß", "katze", 20, 5, ["freude", "vertrauen"]),
    ("schön", "blume", 21, 5, ["gelassenheit", "bewunderung"]),
    ("traurig", "gesicht", 23, 6, ["traurigkeit", "kummer"]),
    ("dunkel", "nacht", 22, 5, ["angst", "besorgnis"]),
    ("einsam", "straße", 20, 5, ["traurigkeit", "nachdenklichkeit"]),
    # inflected duplicate of "schön blume"
    ("schöne", "blume", 8, 4, ["bewunderung"]),
    # English adjective in a German tag
    ("happy", "hund", 12, 4, ["freude"]),
    ("schön", "berlin", 14, 4, ["bewunderung"]),
    ("alt", "tisch", 12, 4, ["langeweile"]),
    ("dunkel", "wald", 14, 2, ["angst"]),
]

EN_SENTIMENT = {
    "beautiful": 0.8, "happy": 0.7, "cute": 0.6, "bright": 0.5, "sad": -0.6,
    "dark": -0.4, "lonely": -0.5, "scary": -0.7, "angry": -0.6, "old": -0.2,
    "wooden": 0.0, "table": 0.0, "sky": 0.1, "dog": 0.1, "cat": 0.1,
    "flower": 0.3, "face": 0.0, "night": -0.1, "street": 0.0, "storm": -0.3,
    "house": 0.0, "paris": 0.2, "iphone": 0.1,
}
DE_SENTIMENT = {
    "schön": 0.8, "schöne": 0.8, "glücklich": 0.7, "süß": 0.6, "traurig": -0.6,
    "dunkel": -0.4, "einsam": -0.5, "alt": 0.0, "tisch": 0.0, "himmel": 0.1,
    "hund": 0.1, "katze": 0.1, "blume": 0.3, "gesicht": 0.0, "nacht": -0.1,
    "straße": 0.0, "wald": 0.1, "berlin": 0.2,
}
EN_ADJ = ["beautiful", "happy", "cute", "bright", "sad", "dark", "lonely", "scary", "angry", "old", "wooden"]
EN_NOUN = ["sky", "dog", "cat", "flower", "face", "night", "street", "storm", "house", "paris", "iphone", "table"]
DE_ADJ = ["schön", "schöne", "glücklich", "süß", "traurig", "dunkel", "einsam", "alt"]
DE_NOUN = ["himmel", "hund", "katze", "blume", "gesicht", "nacht", "straße", "wald", "berlin", "tisch"]

TRANSLATIONS = [
    ("de", "schön himmel", "beautiful sky"),
    ("de", "glücklich hund", "happy dog"),
    ("de", "süß katze", "cute cat"),
    ("de", "schön blume", "beautiful flower"),
    ("de", "traurig gesicht", "sad face"),
    ("de", "dunkel nacht", "dark night"),
    ("de", "einsam straße", "lonely street"),
    ("de", "schön", "beautiful"),
    ("de", "schöne", "beautiful"),
    ("de", "glücklich", "happy"),
    ("de", "süß", "cute"),
    ("de", "traurig", "sad"),
    ("de", "dunkel", "dark"),
    ("de", "einsam", "lonely"),
    ("de", "himmel", "sky"),
    ("de", "hund", "dog"),
    ("de", "katze", "cat"),
    ("de", "blume", "flower"),
    ("de", "nacht", "night"),
    ("de", "straße", "street"),
    ("de", "gesicht", "face"),
]

NOUN_GROUPS = {
    "dog": 0, "cat": 0,
    "sky": 1, "storm": 1, "night": 1,
    "street": 2, "house": 2,
    "flower": 3,
    "face": 4,
}

TEST_QUESTIONS = [
    ("beautiful", "sky", True), ("happy", "dog", True), ("old", "house", True),
    ("dark", "night", True), ("cute", "baby", True), ("green", "grass", True),
    ("cold", "winter", True), ("red", "car", True), ("quiet", "lake", True),
    ("sad", "girl", True),
    ("run", "quickly", False), ("very", "much", False), ("sky", "beautiful", False),
    ("of", "the", False), ("eat", "slowly", False), ("and", "happy", False),
    ("dog", "barking", False), ("quickly", "green", False), ("is", "blue", False),
    ("under", "table", False),
]

# Votes per English pair, one per worker w1..w3; pairs not listed get
# three yes votes.
VOTES = {
    ("old", "house"): [0, 0, 1],
    ("dark", "storm"): [1, 1, 0],
    ("angry", "face"): [1, 0, 1],
    ("dark", "street"): [1, 1, 0],
}


def sign(x):
    return (x > 0) - (x < 0)


def pair_sentiment(sa, sn):
    return sa if sa * sn < 0 else sa + sn


def corpus(lang, pairs, keywords, rng):
    rows = []
    for adj, noun, n, pool, emotions in pairs:
        uploaders = [f"{lang}-u{i:02d}" for i in rng.sample(range(1, 31), pool)]
        for j in range(n):
            tags = [emotions[j % len(emotions)], f"{adj} {noun}"]
            if j % 3 == 0:
                tags.append("photo" if lang == "en" else "foto")
            if j % 4 == 0:
                tags.append(keywords[rng.randrange(len(keywords))])
            rows.append({
                "uploader": uploaders[j % pool],
                "lang": lang,
                "tags": tags,
                "title": "",
                "description": "",
                "pair": (adj, noun),
            })
    rng.shuffle(rows)
    for i, r in enumerate(rows):
        r["id"] = f"{lang}{i:05d}"
        r["relevance_rank"] = i
        r["upload_time"] = 1_400_000_000 + 3_600 * i
    return rows


def write_lines(path, lines):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(l + "\n" for l in lines), encoding="utf-8")


def main():
    rng = random.Random(SEED)
    en = corpus("en", EN_PAIRS, EMOTIONS, rng)
    de = corpus("de", DE_PAIRS, DE_KEYWORDS, rng)
    for lang, rows in (("en", en), ("de", de)):
        keys = ["id", "uploader", "lang", "tags", "title", "description", "relevance_rank", "upload_time"]
        write_lines(ROOT / f"corpus/{lang}.jsonl",
                    [json.dumps({k: r[k] for k in keys}, ensure_ascii=False) for r in rows])

    seeds = {"en": [[e] for e in EMOTIONS], "de": [[k] for k in DE_KEYWORDS]}
    (ROOT / "seeds.json").write_text(json.dumps(seeds, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")

    write_lines(ROOT / "lexicon/en_pos.tsv",
                [f"{w}\tADJ" for w in EN_ADJ] + [f"{w}\tNOUN" for w in EN_NOUN])
    write_lines(ROOT / "lexicon/de_pos.tsv",
                [f"{w}\tADJ" for w in DE_ADJ] + [f"{w}\tNOUN" for w in DE_NOUN] + ["happy\tADJ"])
    write_lines(ROOT / "lexicon/en_sentiment.tsv", [f"{w}\t{s}" for w, s in EN_SENTIMENT.items()])
    write_lines(ROOT / "lexicon/de_sentiment.tsv", [f"{w}\t{s}" for w, s in DE_SENTIMENT.items()])
    write_lines(ROOT / "lexicon/de_stems.tsv", ["schöne\tschön"])
    write_lines(ROOT / "lists/en_dictionary.txt", sorted(set(EN_ADJ + EN_NOUN)))
    write_lines(ROOT / "lists/de_dictionary.txt", sorted(set(DE_ADJ + DE_NOUN)))
    write_lines(ROOT / "lists/named_entities.txt", ["paris", "berlin"])
    write_lines(ROOT / "lists/technical_terms.txt", ["iphone"])
    write_lines(ROOT / "translations.tsv", [f"{l}\t{p}\t{e}" for l, p, e in TRANSLATIONS])

    dim = 6
    centers = [[rng.gauss(0, 3) for _ in range(dim)] for _ in range(5)]
    emb = []
    for noun, g in NOUN_GROUPS.items():
        emb.append((noun, [c + rng.gauss(0, 0.3) for c in centers[g]]))
    for adj in EN_ADJ:
        emb.append((adj, [rng.gauss(0, 1) for _ in range(dim)]))
    write_lines(ROOT / "embeddings.txt",
                [f"{len(emb)} {dim}"] + [w + " " + " ".join(f"{v:.4f}" for v in vec) for w, vec in emb])

    lex = {"en": EN_SENTIMENT, "de": DE_SENTIMENT}
    shift = {"en": [0.0, 1.0], "de": [1.0, 0.0]}
    feats = []
    for rows in (en, de):
        for r in rows:
            adj, noun = r["pair"]
            score = lambda w: lex[r["lang"]].get(w, EN_SENTIMENT.get(w, 0.0))
            s = sign(pair_sentiment(score(adj), score(noun)))
            vec = [1.5 * s + rng.gauss(0, 1)]
            vec += [shift[r["lang"]][0] + rng.gauss(0, 1), shift[r["lang"]][1] + rng.gauss(0, 1)]
            vec += [rng.gauss(0, 1) for _ in range(5)]
            feats.append(f"{r['id']} {adj}_{noun} {r['lang']} " + " ".join(f"{v:.4f}" for v in vec))
    write_lines(ROOT / "features.txt", feats)

    tq = [{"adj": a, "noun": n, "ground_truth": g} for a, n, g in TEST_QUESTIONS]
    (ROOT / "test_questions_en.json").write_text(json.dumps(tq, indent=1) + "\n", encoding="utf-8")

    rows = ["worker,adj,noun,verdict,is_test,timestamp"]
    ts = 1_700_000_000
    for adj, noun, *_ in EN_PAIRS:
        for w, v in enumerate(VOTES.get((adj, noun), [1, 1, 1]), start=1):
            rows.append(f"w{w},{adj},{noun},{'yes' if v else 'no'},no,{ts}")
            ts += 1
    for w in (1, 2, 3):
        for adj, noun, truth in (TEST_QUESTIONS[0], TEST_QUESTIONS[10]):
            rows.append(f"w{w},{adj},{noun},{'yes' if truth else 'no'},yes,{ts}")
            ts += 1
    rows.append(f"w1,purple,moon,yes,no,{ts}")
    write_lines(ROOT / "judgments/en.csv", rows)


if __name__ == "__main__":
    main()
