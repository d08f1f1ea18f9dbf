#!/usr/bin/env python3
"""Produce frozen oracle values for the C++ test suites.

Every value here is computed by an implementation that shares no code with
the library: scikit-learn, scipy, mpmath, NLTK, and gensim (when installed).
Run once; the outputs are committed under tests/data/.
"""
import json
import math
import pathlib
import random

import mpmath
import numpy as np
from scipy import stats
from sklearn.metrics import adjusted_mutual_info_score, silhouette_samples

HERE = pathlib.Path(__file__).resolve().parent
DATA = HERE.parent / "data"

mpmath.mp.dps = 50


# --- Bayes factor keyness (4-cell G^2, BIC approximation) --------------------
def bf_mp(kc, nc, kr, nr):
    kc, nc, kr, nr = map(mpmath.mpf, (kc, nc, kr, nr))
    n = nc + nr
    rate = (kc + kr) / n
    cells = [(kc, nc * rate), (nc - kc, nc * (1 - rate)),
             (kr, nr * rate), (nr - kr, nr * (1 - rate))]
    g2 = 2 * sum(o * mpmath.log(o / e) for o, e in cells if o > 0)
    return g2, mpmath.exp((g2 - mpmath.log(n)) / 2)


# --- JSD ----------------------------------------------------------------------
def jsd_mp(p, q):
    m = [(a + b) / 2 for a, b in zip(p, q)]
    kl = lambda x: sum(a * mpmath.log(a / c, 2) for a, c in zip(x, m) if a > 0)
    return (kl(p) + kl(q)) / 2


# --- C_V, following gensim's boolean-sliding-window + NPMI + indirect cosine --
EPS = 1e-12


def cv_reference(texts, topn, window=110):
    top = list(topn)
    idx = {w: i for i, w in enumerate(top)}
    occ = np.zeros(len(top))
    co = np.zeros((len(top), len(top)))
    nwin = 0
    for doc in texts:
        wins = [doc] if len(doc) < window else [doc[s:s + window] for s in range(len(doc) - window + 1)]
        for w in wins:
            nwin += 1
            present = sorted({idx[t] for t in w if t in idx})
            for a in present:
                occ[a] += 1
            for x in range(len(present)):
                for y in range(x + 1, len(present)):
                    co[present[x], present[y]] += 1
                    co[present[y], present[x]] += 1
    for a in range(len(top)):
        co[a, a] = occ[a]

    def npmi(a, b):
        pab = co[a, b] / nwin
        pa, pb = occ[a] / nwin, occ[b] / nwin
        lr = math.log((pab + EPS) / (pa * pb))
        return lr / -math.log(pab + EPS)

    n = len(top)
    m = np.array([[npmi(a, b) for b in range(n)] for a in range(n)])
    topic = m.sum(axis=0)
    sims = [float(m[a] @ topic / (np.linalg.norm(m[a]) * np.linalg.norm(topic))) for a in range(n)]
    return float(np.mean(sims))


def cv_gensim(texts, topn, window=110):
    try:
        from gensim.corpora import Dictionary
        from gensim.models.coherencemodel import CoherenceModel
    except ImportError:
        return None
    d = Dictionary(texts)
    cm = CoherenceModel(topics=[list(topn)], texts=texts, dictionary=d,
                        coherence="c_v", window_size=window, processes=1)
    return float(cm.get_coherence())


def make_cv_corpus():
    rng = random.Random(20240517)
    groups = [
        ["maga", "trump", "flag-united-states", "kag", "patriot", "god", "america"],
        ["mom", "wife", "grandma", "love", "family", "dog", "red-heart"],
        ["resist", "blm", "democrat", "biden", "vote", "science", "rainbow-flag"],
    ]
    background = ["life", "news", "music", "fan", "sports", "coffee", "writer",
                  "travel", "teacher", "retired", "nurse", "student", "tweets"]
    docs = []
    for i in range(200):
        g = groups[i % 3] if rng.random() < 0.8 else groups[rng.randrange(3)]
        length = rng.randint(4, 18)
        if i % 23 == 5:
            doc = [rng.choice(background[1:]) for _ in range(length)]
        elif i == 61:
            doc = []
        else:
            doc = [rng.choice(g) if rng.random() < 0.55 else rng.choice(background) for _ in range(length)]
        docs.append(doc)
    top = ["maga", "trump", "patriot", "god", "america", "mom", "love", "family", "vote", "life"]
    return docs, top


def make_cv_long_corpus():
    # A few documents longer than the window, so windows actually slide.
    rng = random.Random(77)
    vocab = ["alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"]
    filler = ["f%d" % k for k in range(40)]
    docs = []
    for i in range(30):
        length = rng.randint(120, 180) if i % 5 == 0 else rng.randint(3, 15)
        docs.append([rng.choice(vocab) if rng.random() < 0.15 else rng.choice(filler) for _ in range(length)])
    return docs, vocab[:6]


def main():
    out = {}

    # keyness
    g2, bf = bf_mp(50, 100, 50, 10000)
    out["bf_enriched"] = {"kc": 50, "nc": 100, "kr": 50, "nr": 10000,
                          "g2": float(g2), "bf": float(bf), "log_bf": float(mpmath.log(bf))}
    g2, bf = bf_mp(5, 100, 50, 1000)
    out["bf_equal_rate"] = {"g2": float(g2), "bf": float(bf)}
    g2, bf = bf_mp(50, 1000, 0, 37000)
    out["bf_violin"] = {"g2": float(g2), "log_bf": float(mpmath.log(bf))}

    # JSD hand case
    t = mpmath.mpf(1) / 3
    out["jsd_hand"] = float(jsd_mp([2 * t, t], [t, 2 * t]))

    # Spearman tie case
    x, y = [1, 2, 2, 4], [1, 3, 2, 4]
    out["spearman_tie"] = {"x": x, "y": y, "rho": float(stats.spearmanr(x, y).statistic)}
    rng = np.random.default_rng(7)
    xs = rng.integers(1, 6, size=40).tolist()
    ys = rng.integers(1, 6, size=40).tolist()
    out["spearman_likert"] = {"x": xs, "y": ys, "rho": float(stats.spearmanr(xs, ys).statistic)}

    # AMI against scikit-learn (arithmetic normalisation)
    ami_cases = []
    for seed, n, ka, kb in [(1, 60, 3, 4), (2, 200, 10, 10), (3, 35, 2, 5), (4, 500, 7, 3)]:
        r = np.random.default_rng(seed)
        a = r.integers(0, ka, size=n)
        b = np.where(r.random(n) < 0.5, a % kb, r.integers(0, kb, size=n))
        ami_cases.append({"a": a.tolist(), "b": b.tolist(),
                          "ami": float(adjusted_mutual_info_score(a, b, average_method="arithmetic"))})
    out["ami_cases"] = ami_cases

    # silhouette against scikit-learn
    r = np.random.default_rng(11)
    X = r.normal(size=(40, 4))
    labels = r.integers(0, 3, size=40)
    labels[0] = 3  # singleton cluster
    out["silhouette_sklearn"] = {
        "X": X.tolist(), "labels": labels.tolist(),
        "cosine": silhouette_samples(X, labels, metric="cosine").tolist(),
        "euclidean": silhouette_samples(X, labels, metric="euclidean").tolist(),
    }

    # ICC(2,k): Shrout & Fleiss (1979) worked example, 6 targets x 4 judges
    grid = np.array([[9, 2, 5, 8], [6, 1, 3, 2], [8, 4, 6, 8],
                     [7, 1, 2, 6], [10, 5, 6, 9], [6, 2, 4, 7]], dtype=float)
    out["icc_shrout_fleiss"] = icc_reference(grid)
    r = np.random.default_rng(5)
    base = r.integers(1, 6, size=(40, 1))
    g2 = np.clip(base + r.integers(-1, 2, size=(40, 39)), 1, 5).astype(float)
    out["icc_likert_40x39"] = icc_reference(g2)
    out["icc_likert_40x39"]["grid"] = g2.tolist()
    try:
        import pandas as pd
        import pingouin as pg
        long = pd.DataFrame([(i, j, grid[i, j]) for i in range(6) for j in range(4)],
                            columns=["t", "r", "s"])
        res = pg.intraclass_corr(long, targets="t", raters="r", ratings="s").set_index("Type")
        label = "ICC(A,k)" if "ICC(A,k)" in res.index else "ICC2k"
        out["icc_shrout_fleiss"]["pingouin_icc2k"] = float(res.loc[label, "ICC"])
    except ImportError:
        pass

    # C_V
    docs, top = make_cv_corpus()
    (DATA / "cv_corpus.json").write_text(json.dumps({"docs": docs, "top_words": top}) + "\n")
    out["cv_fixture"] = {"reference": cv_reference(docs, top)}
    g = cv_gensim(docs, top)
    if g is not None:
        assert abs(g - out["cv_fixture"]["reference"]) < 1e-9, (g, out["cv_fixture"])
        out["cv_fixture"]["gensim"] = g
    # gensim clears a token leaving the window even when the token recurs
    # inside it, so on long documents it drifts from the boolean definition.
    docs, top = make_cv_long_corpus()
    out["cv_long"] = {"docs": docs, "top_words": top, "reference": cv_reference(docs, top)}
    g = cv_gensim(docs, top)
    if g is not None:
        out["cv_long"]["gensim"] = g

    # Porter stemmer vectors
    from nltk.stem.porter import PorterStemmer
    ps = PorterStemmer(mode=PorterStemmer.MARTIN_EXTENSIONS)
    words = (HERE / "porter_words.txt").read_text().split()
    with open(DATA / "porter_vectors.tsv", "w") as f:
        for w in words:
            f.write(f"{w}\t{ps.stem(w)}\n")
    out["porter_non_idempotent"] = sorted(w for w in words if ps.stem(ps.stem(w)) != ps.stem(w))

    (DATA / "oracle_fixtures.json").write_text(json.dumps(out, indent=1) + "\n")
    print(json.dumps({k: v for k, v in out.items()
                      if k not in ("silhouette_sklearn", "ami_cases", "icc_likert_40x39")}, indent=1))


def icc_reference(grid):
    n, k = grid.shape
    gm = grid.mean()
    ssr = k * ((grid.mean(axis=1) - gm) ** 2).sum()
    ssc = n * ((grid.mean(axis=0) - gm) ** 2).sum()
    sst = ((grid - gm) ** 2).sum()
    sse = sst - ssr - ssc
    msr, msc = ssr / (n - 1), ssc / (k - 1)
    mse = sse / ((n - 1) * (k - 1))
    icc2 = (msr - mse) / (msr + (k - 1) * mse + k * (msc - mse) / n)
    icc2k = (msr - mse) / (msr + (msc - mse) / n)
    # McGraw & Wong (1996) interval, as used by common statistics packages
    fj = msc / mse
    vn = (k - 1) * (n - 1) * (k * icc2 * fj + n * (1 + (k - 1) * icc2) - k * icc2) ** 2
    vd = (n - 1) * k ** 2 * icc2 ** 2 * fj ** 2 + (n * (1 + (k - 1) * icc2) - k * icc2) ** 2
    v = vn / vd
    f2u = stats.f.ppf(0.975, n - 1, v)
    f2l = stats.f.ppf(0.975, v, n - 1)
    l2 = n * (msr - f2u * mse) / (f2u * (k * msc + (k * n - k - n) * mse) + n * msr)
    u2 = n * (f2l * msr - mse) / (k * msc + (k * n - k - n) * mse + n * f2l * msr)
    return {"grid": grid.tolist(), "icc2k": float(icc2k), "f": float(msr / mse),
            "df1": n - 1, "df2": (n - 1) * (k - 1),
            "ci_low": float(l2 * k / (1 + l2 * (k - 1))), "ci_high": float(u2 * k / (1 + u2 * (k - 1))),
            "ssr": float(ssr), "ssc": float(ssc), "sse": float(sse), "sst": float(sst)}


if __name__ == "__main__":
    main()
