#!/usr/bin/env python3
"""Generates declarations_1k.jsonl, a Mathlib-shaped declaration dump.

Names combine common Mathlib namespaces with lemma stems.  The
AntitoneOn/MonotoneOn integral-comparison neighborhoods are always
present; `AntitoneOn.sum_le_integral_Icc` deliberately is not, so it
can serve as a misremembered name.

    python3 gen_declarations.py > declarations_1k.jsonl
"""
import json
import random

COUNT = 1000
SEED = 20240521

NEIGHBORHOODS = [
    ("AntitoneOn.sum_le_integral_Ico", "{x₀ : ℝ} {a b : ℕ} {f : ℝ → ℝ} (hab : a ≤ b) (hf : AntitoneOn f (Set.Icc x₀ (x₀ + ↑(b - a)))) : ∑ i ∈ Finset.Ico a b, f (x₀ + ↑(i - a)) ≤ ∫ x in x₀ - 1..x₀ + ↑(b - a) - 1, f x"),
    ("AntitoneOn.integral_le_sum_Ico", "{x₀ : ℝ} {a b : ℕ} {f : ℝ → ℝ} (hab : a ≤ b) (hf : AntitoneOn f (Set.Icc x₀ (x₀ + ↑(b - a)))) : ∫ x in x₀..x₀ + ↑(b - a), f x ≤ ∑ i ∈ Finset.Ico a b, f (x₀ + ↑(i - a))"),
    ("AntitoneOn.sum_le_integral", "{x₀ : ℝ} {a : ℕ} {f : ℝ → ℝ} (hf : AntitoneOn f (Set.Icc x₀ (x₀ + ↑a))) : ∑ i ∈ Finset.range a, f (x₀ + ↑(i + 1)) ≤ ∫ x in x₀..x₀ + ↑a, f x"),
    ("AntitoneOn.integral_le_sum", "{x₀ : ℝ} {a : ℕ} {f : ℝ → ℝ} (hf : AntitoneOn f (Set.Icc x₀ (x₀ + ↑a))) : ∫ x in x₀..x₀ + ↑a, f x ≤ ∑ i ∈ Finset.range a, f (x₀ + ↑i)"),
    ("MonotoneOn.sum_le_integral_Ico", "{x₀ : ℝ} {a b : ℕ} {f : ℝ → ℝ} (hab : a ≤ b) (hf : MonotoneOn f (Set.Icc x₀ (x₀ + ↑(b - a)))) : ∑ i ∈ Finset.Ico a b, f (x₀ + ↑(i - a)) ≤ ∫ x in x₀..x₀ + ↑(b - a), f x"),
    ("MonotoneOn.integral_le_sum_Ico", "{x₀ : ℝ} {a b : ℕ} {f : ℝ → ℝ} (hab : a ≤ b) (hf : MonotoneOn f (Set.Icc x₀ (x₀ + ↑(b - a)))) : ∫ x in x₀..x₀ + ↑(b - a), f x ≤ ∑ i ∈ Finset.Ico a b, f (x₀ + ↑(i - a + 1))"),
    ("MonotoneOn.sum_le_integral", "{x₀ : ℝ} {a : ℕ} {f : ℝ → ℝ} (hf : MonotoneOn f (Set.Icc x₀ (x₀ + ↑a))) : ∑ i ∈ Finset.range a, f (x₀ + ↑i) ≤ ∫ x in x₀..x₀ + ↑a, f x"),
    ("MonotoneOn.integral_le_sum", "{x₀ : ℝ} {a : ℕ} {f : ℝ → ℝ} (hf : MonotoneOn f (Set.Icc x₀ (x₀ + ↑a))) : ∫ x in x₀..x₀ + ↑a, f x ≤ ∑ i ∈ Finset.range a, f (x₀ + ↑(i + 1))"),
]

NAMESPACES = [
    "", "Nat", "Int", "Real", "Finset", "Set", "Polynomial", "Complex", "MeasureTheory",
    "intervalIntegral", "AntitoneOn", "MonotoneOn", "StrictMono", "Filter", "ZMod", "Rat",
]
SUBJECTS = ["add", "mul", "sub", "div", "pow", "sum", "prod", "succ", "pred", "abs", "sqrt", "log", "exp",
            "card", "range", "integral", "dvd", "mod", "gcd", "lcm", "neg", "inv", "sq", "floor", "ceil"]
RELATIONS = ["le", "lt", "eq", "ne", "pos", "nonneg", "comm", "assoc", "mono", "cancel", "self", "zero", "one"]
SUFFIXES = ["", "_iff", "_of_lt", "_of_le", "_left", "_right", "'", "_Ico", "_Ioc", "_range", "_succ", "_two"]
DOCS = [
    "Monotonicity of the operation in its first argument.",
    "A basic rewriting lemma.",
    "The defining equation, stated as a simp lemma.",
    None,
    None,
]


def name_pool(rng):
    seen = {n for n, _ in NEIGHBORHOODS}
    while True:
        ns = rng.choice(NAMESPACES)
        stem = f"{rng.choice(SUBJECTS)}_{rng.choice(RELATIONS)}"
        if rng.random() < 0.4:
            stem += f"_{rng.choice(SUBJECTS)}"
        name = f"{ns}.{stem}{rng.choice(SUFFIXES)}" if ns else f"{stem}{rng.choice(SUFFIXES)}"
        if name not in seen and name != "AntitoneOn.sum_le_integral_Icc":
            seen.add(name)
            yield name


def record(name, signature, doc):
    ns = name.rsplit(".", 1)[0] if "." in name else ""
    return {"name": name, "signature": f"theorem {name} {signature}", "docstring": doc, "namespace": ns}


def main():
    rng = random.Random(SEED)
    out = [record(n, s, "Comparison of a sum with an integral.") for n, s in NEIGHBORHOODS]
    pool = name_pool(rng)
    while len(out) < COUNT:
        name = next(pool)
        a, b = rng.sample("abcmnxy", 2)
        sig = f"({a} {b} : ℕ) : {a} ≤ {a} + {b}"
        out.append(record(name, sig, rng.choice(DOCS)))
    rng.shuffle(out)
    for r in out:
        print(json.dumps(r, ensure_ascii=False))


if __name__ == "__main__":
    main()
