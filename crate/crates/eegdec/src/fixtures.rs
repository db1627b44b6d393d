//! Bundled reference result tables (per-subject accuracies of the three
//! compared methods and the two ablation baselines) plus oracle statistics
//! for them computed once with an independent reference statistics package
//! and frozen here. `run_fixture_checks` verifies this crate's statistics
//! implementation against the oracle and evaluates the published claims
//! about these tables.

use ndarray::Array2;

use crate::error::Result;
use crate::eval::ResultTable;
use crate::stats::{bonferroni, levene, mean_std, paired_t_test, shapiro_wilk};

pub const SUBJECTS: [&str; 10] = [
    "S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8", "S9", "S10",
];

pub const TABLE1_PSD_SVM: [f64; 10] = [
    0.4723, 0.3471, 0.4386, 0.3972, 0.3550, 0.3477, 0.4631, 0.4055, 0.4382, 0.3550,
];
pub const TABLE1_CSP_LDA: [f64; 10] = [
    0.4944, 0.3840, 0.3621, 0.3967, 0.3735, 0.4070, 0.4736, 0.3742, 0.5072, 0.4291,
];
pub const PROPOSED: [f64; 10] = [
    0.6084, 0.5834, 0.5497, 0.5597, 0.5697, 0.5472, 0.5522, 0.5747, 0.5472, 0.5559,
];
pub const TABLE2_EEGNET: [f64; 10] = [
    0.5642, 0.5254, 0.5142, 0.5254, 0.5067, 0.4854, 0.5004, 0.4929, 0.4929, 0.4979,
];
pub const TABLE2_SEFE: [f64; 10] = [
    0.5361, 0.4911, 0.5536, 0.5374, 0.5111, 0.5124, 0.4899, 0.5111, 0.5186, 0.5111,
];

/// (printed Avg., printed Std.) per column.
pub const PRINTED_PSD_SVM: (f64, f64) = (0.4020, 0.0491);
pub const PRINTED_CSP_LDA: (f64, f64) = (0.4202, 0.0535);
pub const PRINTED_PROPOSED: (f64, f64) = (0.5648, 0.0197);
pub const PRINTED_EEGNET: (f64, f64) = (0.5106, 0.0233);
pub const PRINTED_SEFE: (f64, f64) = (0.5172, 0.0201);

/// Oracle statistics for the fixture columns, frozen from an independent
/// reference implementation.
pub mod oracle {
    /// Paired t-tests of the proposed column against each baseline
    /// (t, two-sided p).
    pub const T_PROPOSED_VS_PSD_SVM: (f64, f64) = (10.2653578520, 2.876161271980e-6);
    pub const T_PROPOSED_VS_CSP_LDA: (f64, f64) = (8.2667940516, 1.701539510601e-5);
    pub const T_PROPOSED_VS_EEGNET: (f64, f64) = (12.2125251432, 6.629468844623e-7);
    pub const T_PROPOSED_VS_SEFE: (f64, f64) = (5.3838338529, 4.422674288804e-4);

    /// Shapiro-Wilk (W, p) per column.
    pub const SHAPIRO_PSD_SVM: (f64, f64) = (0.8792583209, 0.1279578019);
    pub const SHAPIRO_CSP_LDA: (f64, f64) = (0.8781988607, 0.1244154648);
    pub const SHAPIRO_PROPOSED: (f64, f64) = (0.8590550799, 0.0743748142);
    pub const SHAPIRO_EEGNET: (f64, f64) = (0.8714732803, 0.1039939097);
    pub const SHAPIRO_SEFE: (f64, f64) = (0.9242602702, 0.3938603609);

    /// Mean-centered Levene across the three columns of each table (F, p).
    pub const LEVENE_TABLE1: (f64, f64) = (6.1975354071, 0.0060946022);
    pub const LEVENE_TABLE2: (f64, f64) = (0.0880945513, 0.9159363861);
}

pub fn table1() -> ResultTable {
    let mut acc = Array2::<f64>::zeros((10, 3));
    for i in 0..10 {
        acc[[i, 0]] = TABLE1_PSD_SVM[i];
        acc[[i, 1]] = TABLE1_CSP_LDA[i];
        acc[[i, 2]] = PROPOSED[i];
    }
    ResultTable::new(
        vec!["PSD-SVM".into(), "CSP-LDA".into(), "Proposed".into()],
        SUBJECTS.iter().map(|s| s.to_string()).collect(),
        acc,
    )
    .expect("fixture table1")
}

pub fn table2() -> ResultTable {
    let mut acc = Array2::<f64>::zeros((10, 3));
    for i in 0..10 {
        acc[[i, 0]] = TABLE2_EEGNET[i];
        acc[[i, 1]] = TABLE2_SEFE[i];
        acc[[i, 2]] = PROPOSED[i];
    }
    ResultTable::new(
        vec!["EEGNet".into(), "EEGNet+SEFE".into(), "Proposed".into()],
        SUBJECTS.iter().map(|s| s.to_string()).collect(),
        acc,
    )
    .expect("fixture table2")
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

const AVG_STD_TOL: f64 = 5e-5;
const T_TOL: f64 = 1e-3;
const W_TOL: f64 = 1e-3;

/// The fixture oracle suite: Avg./Std. reproduction, t-test/Shapiro/Levene
/// agreement with the frozen oracle, and the published claims about these
/// columns (all Bonferroni-adjusted p < 0.01; normality and homoscedasticity
/// not rejected at 0.05).
///
/// Note: the claim "Levene across the table-1 columns gives p > 0.05" is not
/// reproducible from the fixture values themselves (their spreads genuinely
/// differ; every standard homoscedasticity test rejects), so that check
/// reports an honest failure.
pub fn run_fixture_checks() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();

    let columns: [(&str, &[f64; 10], (f64, f64)); 5] = [
        ("table1.psd_svm", &TABLE1_PSD_SVM, PRINTED_PSD_SVM),
        ("table1.csp_lda", &TABLE1_CSP_LDA, PRINTED_CSP_LDA),
        ("proposed", &PROPOSED, PRINTED_PROPOSED),
        ("table2.eegnet", &TABLE2_EEGNET, PRINTED_EEGNET),
        ("table2.sefe", &TABLE2_SEFE, PRINTED_SEFE),
    ];
    for (name, col, (avg, std)) in columns {
        let (m, s) = mean_std(col.as_slice())?;
        out.push(CheckOutcome::new(
            &format!("avg[{name}]"),
            (m - avg).abs() <= AVG_STD_TOL,
            format!("computed {m:.6} vs printed {avg} (tol {AVG_STD_TOL})"),
        ));
        out.push(CheckOutcome::new(
            &format!("std[{name}]"),
            (s - std).abs() <= AVG_STD_TOL,
            format!("computed {s:.6} vs printed {std} (tol {AVG_STD_TOL})"),
        ));
    }

    let ttests: [(&str, &[f64; 10], (f64, f64)); 4] = [
        ("proposed_vs_psd_svm", &TABLE1_PSD_SVM, oracle::T_PROPOSED_VS_PSD_SVM),
        ("proposed_vs_csp_lda", &TABLE1_CSP_LDA, oracle::T_PROPOSED_VS_CSP_LDA),
        ("proposed_vs_eegnet", &TABLE2_EEGNET, oracle::T_PROPOSED_VS_EEGNET),
        ("proposed_vs_sefe", &TABLE2_SEFE, oracle::T_PROPOSED_VS_SEFE),
    ];
    let mut raw_ps_t1 = Vec::new();
    let mut raw_ps_t2 = Vec::new();
    for (i, (name, baseline, (t_oracle, p_oracle))) in ttests.iter().enumerate() {
        let r = paired_t_test(&PROPOSED, baseline.as_slice())?;
        out.push(CheckOutcome::new(
            &format!("t[{name}]"),
            (r.t - t_oracle).abs() <= T_TOL,
            format!("computed t {:.6} vs oracle {t_oracle} (tol {T_TOL})", r.t),
        ));
        out.push(CheckOutcome::new(
            &format!("p[{name}]"),
            (r.p - p_oracle).abs() <= 1e-6 * p_oracle.max(1e-6),
            format!("computed p {:.6e} vs oracle {p_oracle:.6e}", r.p),
        ));
        if i < 2 {
            raw_ps_t1.push(r.p);
        } else {
            raw_ps_t2.push(r.p);
        }
    }
    // each table contributes one Bonferroni family of two comparisons
    for (family, raw) in [("table1", raw_ps_t1), ("table2", raw_ps_t2)] {
        let adjusted = bonferroni(&raw, raw.len())?;
        for (i, p) in adjusted.iter().enumerate() {
            out.push(CheckOutcome::new(
                &format!("claim.bonferroni[{family}.{i}] < 0.01"),
                *p < 0.01,
                format!("adjusted p {p:.6e}"),
            ));
        }
    }

    let shapiros: [(&str, &[f64; 10], (f64, f64)); 5] = [
        ("table1.psd_svm", &TABLE1_PSD_SVM, oracle::SHAPIRO_PSD_SVM),
        ("table1.csp_lda", &TABLE1_CSP_LDA, oracle::SHAPIRO_CSP_LDA),
        ("proposed", &PROPOSED, oracle::SHAPIRO_PROPOSED),
        ("table2.eegnet", &TABLE2_EEGNET, oracle::SHAPIRO_EEGNET),
        ("table2.sefe", &TABLE2_SEFE, oracle::SHAPIRO_SEFE),
    ];
    for (name, col, (w_oracle, p_oracle)) in shapiros {
        let r = shapiro_wilk(col.as_slice())?;
        out.push(CheckOutcome::new(
            &format!("shapiro_w[{name}]"),
            (r.w - w_oracle).abs() <= W_TOL,
            format!("computed W {:.6} vs oracle {w_oracle} (tol {W_TOL})", r.w),
        ));
        out.push(CheckOutcome::new(
            &format!("shapiro_p[{name}]"),
            (r.p - p_oracle).abs() <= 1e-4,
            format!("computed p {:.6} vs oracle {p_oracle}", r.p),
        ));
        out.push(CheckOutcome::new(
            &format!("claim.normality[{name}] p > 0.05"),
            r.p > 0.05,
            format!("p = {:.4}", r.p),
        ));
    }

    let groups1 = vec![
        TABLE1_PSD_SVM.to_vec(),
        TABLE1_CSP_LDA.to_vec(),
        PROPOSED.to_vec(),
    ];
    let groups2 = vec![
        TABLE2_EEGNET.to_vec(),
        TABLE2_SEFE.to_vec(),
        PROPOSED.to_vec(),
    ];
    for (name, groups, (f_oracle, p_oracle)) in [
        ("table1", groups1, oracle::LEVENE_TABLE1),
        ("table2", groups2, oracle::LEVENE_TABLE2),
    ] {
        let r = levene(&groups)?;
        out.push(CheckOutcome::new(
            &format!("levene_f[{name}]"),
            (r.f - f_oracle).abs() <= 1e-6,
            format!("computed F {:.8} vs oracle {f_oracle}", r.f),
        ));
        out.push(CheckOutcome::new(
            &format!("levene_p[{name}]"),
            (r.p - p_oracle).abs() <= 1e-6,
            format!("computed p {:.8} vs oracle {p_oracle}", r.p),
        ));
        out.push(CheckOutcome::new(
            &format!("claim.homoscedasticity[{name}] p > 0.05"),
            r.p > 0.05,
            format!("p = {:.4}", r.p),
        ));
    }

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_tables_are_consistent() {
        let t1 = table1();
        assert_eq!(t1.subjects.len(), 10);
        let stats = t1.avg_std().unwrap();
        assert!((stats[2].0 - 0.5648).abs() <= 5e-5);
        assert!((stats[2].1 - 0.0197).abs() <= 5e-5);
    }

    #[test]
    fn oracle_checks_pass_except_known_fixture_defects() {
        // Two checks cannot pass because the fixture tables themselves are
        // internally inconsistent: the table-2 EEGNet column's printed Avg.
        // (0.5106) differs from the mean of its printed values (0.51054) by
        // 6e-5, and the table-1 columns are genuinely heteroscedastic
        // (mean-centered Levene p = 0.0061). Everything else must pass.
        let outcomes = run_fixture_checks().unwrap();
        let failures: Vec<String> = outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| o.name.clone())
            .collect();
        assert_eq!(
            failures,
            vec![
                "avg[table2.eegnet]".to_string(),
                "claim.homoscedasticity[table1] p > 0.05".to_string(),
            ],
            "unexpected failure set"
        );
    }

    #[test]
    fn proposed_t_tests_remain_significant_after_bonferroni() {
        for baseline in [
            &TABLE1_PSD_SVM,
            &TABLE1_CSP_LDA,
            &TABLE2_EEGNET,
            &TABLE2_SEFE,
        ] {
            let r = paired_t_test(&PROPOSED, baseline.as_slice()).unwrap();
            let adj = bonferroni(&[r.p], 2).unwrap()[0];
            assert!(adj < 0.01, "adjusted p {adj}");
        }
    }
}
