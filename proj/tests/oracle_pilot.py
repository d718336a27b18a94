#!/usr/bin/env python3
"""Independent reference for the early-vs-final reward correlation study.

Re-derives the whole pipeline from the written definitions alone — counter
RNG, vocabulary order, bigram counts with additive smoothing and backoff,
inverse-CDF sampling, discounted lexical scoring, per-prompt Pearson, median —
sharing no code with the C++ engine.  Both sides perform the same IEEE-754
operations in the same order, so agreement is expected to the last bit, and
the engine's acceptance gate holds itself to this script's pinned median.

Run with no flags to print the median; --check-pinned re-derives it and fails
if the data files or this script drift from the frozen value.
"""

import argparse
import bisect
import json
import math
import os
import sys

MASK = (1 << 64) - 1

# Frozen study parameters: bigram model, additive smoothing 1/16, 200 samples
# per prompt, generation capped at 64 tokens, scores compared at length 32.
ORDER = 2
SMOOTHING = 0.0625
SAMPLES = 200
MAX_NEW_TOKENS = 64
TAU = 32
RUN_SEED = 20240817

# Median per-prompt Pearson over the shipped data, frozen from the first run
# of this script.  The engine must land within +/-0.02 of this; the same
# constant is pinned in the acceptance gate.
PINNED_MEDIAN = 0.9779515264704433


def mix64(z):
    z &= MASK
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK
    z ^= z >> 31
    return z


def draw_bits(seed, stream, step):
    h = mix64(seed ^ 0xD6E8FEB86659FD93)
    h = mix64(h ^ stream)
    h = mix64(h ^ step)
    return h


def draw_unit(seed, stream, step):
    return (draw_bits(seed, stream, step) >> 11) * 2.0 ** -53


def fnv1a64(s):
    h = 0xCBF29CE484222325
    for b in s.encode("utf-8"):
        h ^= b
        h = (h * 0x100000001B3) & MASK
    return h


def derive_prompt_seed(run_seed, prompt_id):
    return mix64(mix64(run_seed ^ 0x9E3779B97F4A7C15) ^ fnv1a64(prompt_id))


class Bigram:
    """Vocabulary ids in first-appearance order after <unk>=0, <eos>=1; counts
    for context lengths 0 and 1; smoothed distribution with backoff to the
    unigram row when a context was never seen."""

    def __init__(self, lines):
        self.ids = {"<unk>": 0, "<eos>": 1}
        self.unigram = {}
        self.unigram_total = 0
        self.bigram = {}        # last-token id -> {next id: count}
        self.bigram_total = {}
        for line in lines:
            words = line.split()
            if not words:
                continue
            doc = [self.intern(w) for w in words] + [1]
            for i, tok in enumerate(doc):
                self.unigram[tok] = self.unigram.get(tok, 0) + 1
                self.unigram_total += 1
                if i >= 1:
                    prev = doc[i - 1]
                    row = self.bigram.setdefault(prev, {})
                    row[tok] = row.get(tok, 0) + 1
                    self.bigram_total[prev] = self.bigram_total.get(prev, 0) + 1
        self.size = len(self.ids)
        self.cdf_cache = {}

    def intern(self, word):
        if word not in self.ids:
            self.ids[word] = len(self.ids)
        return self.ids[word]

    def lookup(self, word):
        return self.ids.get(word, 0)

    def cdf_after(self, last_token):
        cached = self.cdf_cache.get(last_token)
        if cached is not None:
            return cached
        if self.bigram_total.get(last_token, 0) > 0:
            row, total = self.bigram[last_token], self.bigram_total[last_token]
        else:
            row, total = self.unigram, self.unigram_total
        denom = total + SMOOTHING * self.size
        cdf = []
        acc = 0.0
        for tok in range(self.size):
            acc += (row.get(tok, 0) + SMOOTHING) / denom
            cdf.append(acc)
        self.cdf_cache[last_token] = cdf
        return cdf

    def sample(self, last_token, u):
        cdf = self.cdf_after(last_token)
        idx = bisect.bisect_right(cdf, u)
        return idx if idx < self.size else self.size - 1


def load_rewards(path):
    gamma = bias = None
    weights = {}
    with open(path) as f:
        for line in f:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            key, value = line.split("\t", 1)
            if gamma is None and key == "gamma":
                gamma = float(value)
            elif bias is None and key == "bias":
                bias = float(value)
            else:
                weights[key] = float(value)
    if gamma is None or bias is None:
        raise SystemExit("reward table must set gamma and bias")
    return gamma, bias, weights


def lexical_prefix(tokens, k, id_to_word, gamma, bias, weights):
    score = bias
    disc = 1.0
    for i in range(k):
        score += disc * weights.get(id_to_word[tokens[i]], 0.0)
        disc *= gamma
    return score


def pearson(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sxx = syy = 0.0
    for xi, yi in zip(x, y):
        dx = xi - mx
        dy = yi - my
        sxy += dx * dy
        sxx += dx * dx
        syy += dy * dy
    if sxx == 0.0 or syy == 0.0:
        return None  # zero variance: excluded, like the engine's error path
    return sxy / math.sqrt(sxx * syy)


def median(values):
    v = sorted(values)
    n = len(v)
    if n % 2 == 1:
        return v[n // 2]
    return 0.5 * (v[n // 2 - 1] + v[n // 2])


def run(data_dir):
    with open(os.path.join(data_dir, "corpus.txt")) as f:
        model = Bigram([line.rstrip("\n") for line in f])
    gamma, bias, weights = load_rewards(os.path.join(data_dir, "lexical_rewards.tsv"))
    id_to_word = {i: w for w, i in model.ids.items()}

    prompts = []
    with open(os.path.join(data_dir, "prompts.jsonl")) as f:
        for line in f:
            if line.strip():
                doc = json.loads(line)
                prompts.append((doc["id"], doc["prompt"]))

    per_prompt = []
    for prompt_id, text in prompts:
        seed_p = derive_prompt_seed(RUN_SEED, prompt_id)
        prompt_ids = [model.lookup(w) for w in text.split()]
        partials = []
        finals = []
        for stream in range(SAMPLES):
            generated = []
            last = prompt_ids[-1]
            while True:
                u = draw_unit(seed_p, stream, len(generated))
                tok = model.sample(last, u)
                generated.append(tok)
                last = tok
                if tok == 1 or len(generated) >= MAX_NEW_TOKENS:
                    break
            at = min(TAU, len(generated))
            partials.append(lexical_prefix(generated, at, id_to_word, gamma, bias, weights))
            finals.append(lexical_prefix(generated, len(generated), id_to_word, gamma,
                                         bias, weights))
        r = pearson(partials, finals)
        if r is not None:
            per_prompt.append(r)
    return median(per_prompt), len(per_prompt)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--data-dir", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--check-pinned", action="store_true",
                    help="fail unless the recomputed median equals the frozen one")
    args = ap.parse_args()

    med, defined = run(args.data_dir)
    print("prompts with defined correlation:", defined)
    print("median per-prompt pearson:", repr(med))
    if args.check_pinned:
        if PINNED_MEDIAN is None:
            print("FAIL: no pinned value recorded yet", file=sys.stderr)
            return 1
        if abs(med - PINNED_MEDIAN) > 1e-12:
            print("FAIL: drifted from pinned median", repr(PINNED_MEDIAN), file=sys.stderr)
            return 1
        print("pinned median confirmed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
