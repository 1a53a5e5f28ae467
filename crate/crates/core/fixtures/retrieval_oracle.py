#!/usr/bin/env python3
"""Brute-force reference for declaration ranking.

Scores every name in a small index against a query and prints the full
ranking.  Written independently of the Rust scorer; its output is frozen
into crates/core/tests/retrieval.rs.

    score = 0.5 * J(trigrams of lowercased last segment)
          + 0.3 * J(lowercased name tokens)
          + 0.2 * (1 - levenshtein / max_len)
    exact match -> 1.0
"""
import re
import sys

TOY = [
    "AntitoneOn.sum_le_integral_Ico",
    "AntitoneOn.integral_le_sum",
    "MonotoneOn.sum_le_integral_Ico",
    "MonotoneOn.sum_le_integral",
    "Nat.succ_le_iff",
    "Nat.succ_le_of_lt",
    "Nat.le_succ",
    "Finset.sum_range_succ",
    "mul_pos",
    "sq_nonneg",
]

QUERIES = ["AntitoneOn.sum_le_integral_Icc", "Nat.succ_le_if", "Finset.sum_range_succ", "mul_nonneg"]


def trigrams(name):
    seg = name.split(".")[-1].lower()
    if len(seg) < 3:
        return {seg} if seg else set()
    return {seg[i : i + 3] for i in range(len(seg) - 2)}


def tokens(name):
    out = set()
    for part in re.split(r"[._]", name):
        # Acronym runs, capitalized words, lowercase/digit runs.
        for t in re.findall(r"[A-Z]+(?=[A-Z][a-z])|[A-Z][a-z0-9]*|[a-z0-9]+", part):
            out.add(t.lower())
    return out


def jaccard(a, b):
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def levenshtein(a, b):
    d = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        d[i][0] = i
    for j in range(len(b) + 1):
        d[0][j] = j
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1]))
    return d[len(a)][len(b)]


def score(q, n):
    if q == n:
        return 1.0
    edit = 1 - levenshtein(q, n) / max(len(q), len(n))
    return 0.5 * jaccard(trigrams(q), trigrams(n)) + 0.3 * jaccard(tokens(q), tokens(n)) + 0.2 * edit


def main():
    queries = sys.argv[1:] or QUERIES
    for q in queries:
        ranked = sorted(TOY, key=lambda n: (-score(q, n), n))
        print(q)
        for n in ranked:
            print(f"  {score(q, n):.12f}  {n}")


if __name__ == "__main__":
    main()
