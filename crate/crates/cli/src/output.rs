//! Result rows, the CSV writer and the quantity vocabulary.

use std::fmt::Write as _;

use crate::config::Study;

/// Every `(study, quantity)` pair a run may emit.
pub const VOCABULARY: &[(Study, &[&str])] = &[
    (Study::Convergence, &["trace_distance_1", "trace_distance_2", "deficit", "sector_dimension", "exponent_1"]),
    (Study::Growth, &["number_expectation", "deficit", "fit_prefactor", "fit_rate", "fit_residual"]),
    (
        Study::Bogoliubov,
        &["identity_deviation_norm", "identity_deviation_pairing", "hs_norm_v", "btu_relative_deviation", "btu_deficit"],
    ),
    (
        Study::Clt,
        &[
            "mean",
            "variance",
            "fourth_moment",
            "excess_kurtosis",
            "sigma2",
            "classical_variance",
            "residual",
            "lln_bound",
            "residual_exponent",
            "discriminator_ratio",
        ],
    ),
];

pub fn in_vocabulary(study: &str, quantity: &str) -> bool {
    VOCABULARY.iter().any(|(s, qs)| s.name() == study && qs.contains(&quantity))
}

pub const CSV_HEADER: &str = "study,M,N,t,quantity,value";

/// One CSV line. `n` and `t` are empty for aggregates over them.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub study: Study,
    pub sites: usize,
    pub n: Option<usize>,
    pub t: Option<f64>,
    pub quantity: &'static str,
    pub value: f64,
}

impl Row {
    pub fn new(study: Study, sites: usize, n: Option<usize>, t: Option<f64>, quantity: &'static str, value: f64) -> Self {
        debug_assert!(in_vocabulary(study.name(), quantity), "{quantity}");
        Self { study, sites, n, t, quantity, value }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let n = r.n.map(|n| n.to_string()).unwrap_or_default();
        let t = r.t.map(float).unwrap_or_default();
        writeln!(out, "{},{},{},{},{},{}", r.study.name(), r.sites, n, t, r.quantity, float(r.value)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_layout() {
        let rows = [
            Row::new(Study::Convergence, 6, Some(4), Some(0.5), "trace_distance_1", 0.125),
            Row::new(Study::Convergence, 6, None, Some(0.5), "exponent_1", -1.0),
        ];
        let text = csv(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "convergence,6,4,5.0000000000000000e-1,trace_distance_1,1.2500000000000000e-1");
        assert_eq!(lines[2], "convergence,6,,5.0000000000000000e-1,exponent_1,-1.0000000000000000e0");
    }

    #[test]
    fn vocabulary_covers_all_studies() {
        assert_eq!(VOCABULARY.len(), 4);
        assert!(in_vocabulary("clt", "sigma2"));
        assert!(!in_vocabulary("clt", "trace_distance_1"));
    }

    proptest! {
        #[test]
        fn floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let s = float(x);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
            let digits = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).count();
            prop_assert_eq!(digits, 17);
        }
    }
}
