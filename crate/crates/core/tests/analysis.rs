use bbhpo_core::analysis::{pareto_filter, summarize_top_k, ScoreTable};
use proptest::prelude::*;

// Top ten models of the NOMAD run, ranked by validation loss.
const NOMAD_TOP10: [[f64; 4]; 10] = [
    [45.94, 32.51, 29.71, 17.07],
    [46.00, 32.68, 30.95, 17.68],
    [46.18, 32.16, 30.63, 15.85],
    [46.70, 32.37, 30.15, 18.29],
    [46.42, 32.07, 30.33, 18.29],
    [45.98, 32.99, 29.77, 17.68],
    [46.46, 32.50, 30.95, 18.90],
    [46.57, 32.60, 29.67, 14.63],
    [46.28, 32.42, 30.29, 16.46],
    [45.88, 32.67, 30.39, 14.63],
];

fn nomad() -> ScoreTable {
    ScoreTable::new(
        ["MMLU", "BBH", "DROP", "HumanEval"].map(String::from).to_vec(),
        NOMAD_TOP10
            .iter()
            .enumerate()
            .map(|(i, r)| ((i + 1).to_string(), r.to_vec()))
            .collect(),
    )
    .unwrap()
}

#[test]
fn nomad_front() {
    assert_eq!(pareto_filter(&nomad()), ["2", "4", "6", "7", "8"]);
}

#[test]
fn nomad_mmlu_and_humaneval_rows() {
    let stats = summarize_top_k(&nomad(), 10).unwrap();
    assert_eq!(stats[0].report_line(), "45.88 46.70 46.24 0.29");
    // hand check: mean 46.241, sum of squared deviations 0.75129
    assert!((stats[0].mean - 46.241).abs() < 1e-9);
    assert!((stats[0].std - (0.75129f64 / 9.0).sqrt()).abs() < 1e-9);
    let he = &stats[3];
    assert_eq!((he.min, he.max), (14.63, 18.90));
    assert_eq!(format!("{:.2}", bbhpo_core::round_half_away(he.std, 2)), "1.52");
}

#[test]
fn k_bounds() {
    assert!(summarize_top_k(&nomad(), 0).is_err());
    assert!(summarize_top_k(&nomad(), 11).is_err());
    let one = summarize_top_k(&nomad(), 1).unwrap();
    assert_eq!(one[0].report_line(), "45.94 45.94 45.94 0.00 (n=1)");
}

proptest! {
    #[test]
    fn full_table_min_is_column_min(rows in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 3), 1..30)) {
        let t = ScoreTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            rows.iter().enumerate().map(|(i, r)| (i.to_string(), r.clone())).collect(),
        ).unwrap();
        let stats = summarize_top_k(&t, rows.len()).unwrap();
        for (j, s) in stats.iter().enumerate() {
            let col_min = rows.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
            let col_max = rows.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(s.min, col_min);
            prop_assert_eq!(s.max, col_max);
            prop_assert!(s.min <= s.mean + 1e-9 && s.mean <= s.max + 1e-9);
        }
    }
}
