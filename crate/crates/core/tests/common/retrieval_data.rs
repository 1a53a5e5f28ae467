use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use leanagent_core::retrieval::{Declaration, Index};

pub fn fixture_index() -> Index {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/declarations_1k.jsonl");
    let (index, report) = Index::from_jsonl(BufReader::new(File::open(path).unwrap()), false).unwrap();
    assert!(report.skipped.is_empty());
    index
}

pub fn toy_index() -> Index {
    Index::build(
        [
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
        .map(|n| Declaration::new(n, format!("theorem {n}"), None)),
    )
    .unwrap()
}

// Full rankings from fixtures/retrieval_oracle.py.
pub const TOY_RANKINGS: &[(&str, &[(f64, &str)])] = &[
    (
        "AntitoneOn.sum_le_integral_Icc",
        &[
            (0.852063492063, "AntitoneOn.sum_le_integral_Ico"),
            (0.761111111111, "MonotoneOn.sum_le_integral_Ico"),
            (0.700448179272, "MonotoneOn.sum_le_integral"),
            (0.613333333333, "AntitoneOn.integral_le_sum"),
            (0.151884057971, "Nat.succ_le_iff"),
            (0.143703703704, "Finset.sum_range_succ"),
            (0.121794871795, "Nat.succ_le_of_lt"),
            (0.107976190476, "Nat.le_succ"),
            (0.033333333333, "sq_nonneg"),
            (0.020000000000, "mul_pos"),
        ],
    ),
    (
        "Nat.succ_le_if",
        &[
            (0.811111111111, "Nat.succ_le_iff"),
            (0.533710407240, "Nat.succ_le_of_lt"),
            (0.446428571429, "Nat.le_succ"),
            (0.182371794872, "MonotoneOn.sum_le_integral"),
            (0.155555555556, "Finset.sum_range_succ"),
            (0.154848484848, "AntitoneOn.sum_le_integral_Ico"),
            (0.154848484848, "MonotoneOn.sum_le_integral_Ico"),
            (0.136285425101, "AntitoneOn.integral_le_sum"),
            (0.028571428571, "mul_pos"),
            (0.014285714286, "sq_nonneg"),
        ],
    ),
    (
        "Finset.sum_range_succ",
        &[
            (1.0, "Finset.sum_range_succ"),
            (0.280036630037, "Nat.le_succ"),
            (0.167220279720, "AntitoneOn.integral_le_sum"),
            (0.152631578947, "Nat.succ_le_iff"),
            (0.142516722408, "MonotoneOn.sum_le_integral"),
            (0.137037037037, "AntitoneOn.sum_le_integral_Ico"),
            (0.137037037037, "MonotoneOn.sum_le_integral_Ico"),
            (0.132738095238, "Nat.succ_le_of_lt"),
            (0.038095238095, "sq_nonneg"),
            (0.028571428571, "mul_pos"),
        ],
    ),
    (
        "mul_nonneg",
        &[
            (0.490000000000, "sq_nonneg"),
            (0.290909090909, "mul_pos"),
            (0.038461538462, "AntitoneOn.integral_le_sum"),
            (0.038461538462, "MonotoneOn.sum_le_integral"),
            (0.038095238095, "Finset.sum_range_succ"),
            (0.035294117647, "Nat.succ_le_of_lt"),
            (0.033333333333, "AntitoneOn.sum_le_integral_Ico"),
            (0.033333333333, "MonotoneOn.sum_le_integral_Ico"),
            (0.026666666667, "Nat.succ_le_iff"),
            (0.0, "Nat.le_succ"),
        ],
    ),
];
