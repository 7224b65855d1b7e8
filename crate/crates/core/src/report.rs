//! CSV rendering of the report types.
//!
//! JSON serialization comes straight from the serde derives (round-trip
//! exact floats); the CSV renderers here are the human-facing tables with
//! four-decimal values, one row per estimator and sample size, mirroring
//! the layout of the usual summary tables. Undefined ratios print `NA`.

use crate::dataset::SummaryStats;
use crate::simulation::{SimReport, SweepReport};
use crate::theory::TheoryReport;

/// Version of the JSON report schema emitted by consumers of these types.
pub const SCHEMA_VERSION: u32 = 1;

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_else(|| "NA".to_string())
}

/// Six-number summaries, one row per variable.
pub fn summary_csv(stats: &SummaryStats) -> String {
    let mut out = String::from("variable,min,lower_quartile,median,mean,upper_quartile,max\n");
    for (name, s) in [("y", &stats.y), ("x", &stats.x)] {
        out.push_str(&format!(
            "{name},{},{},{},{},{},{}\n",
            fmt(s.min),
            fmt(s.lower_quartile),
            fmt(s.median),
            fmt(s.mean),
            fmt(s.upper_quartile),
            fmt(s.max)
        ));
    }
    out
}

/// One row per sample size with every closed-form quantity.
pub fn theory_csv(reports: &[TheoryReport]) -> String {
    let mut out = String::from(
        "n,l1,k1,mse_naive,mse_ratio,mse_product,mse_tr,mse_tp,bias_tr,bias_tp,\
         l1_opt,k1_opt,mse_tr_opt,mse_tp_opt,mse_tp_opt_printed,re_ratio,re_tr,\
         rho,vs_naive,vs_ratio,threshold_vs_naive,threshold_vs_ratio\n",
    );
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            fmt(r.scalars.l1),
            fmt(r.scalars.k1),
            fmt(r.mse_naive),
            fmt(r.mse_ratio),
            fmt(r.mse_product),
            fmt(r.mse_tr),
            fmt(r.mse_tp),
            fmt(r.bias_tr),
            fmt(r.bias_tp),
            fmt(r.l1_opt),
            fmt(r.k1_opt),
            fmt(r.mse_tr_opt),
            fmt(r.mse_tp_opt),
            fmt(r.mse_tp_opt_printed),
            fmt(r.re_ratio),
            fmt(r.re_tr),
            fmt(r.efficiency.rho),
            r.efficiency.vs_naive,
            r.efficiency.vs_ratio,
            fmt(r.efficiency.threshold_vs_naive),
            fmt(r.efficiency.threshold_vs_ratio),
        ));
    }
    out
}

/// One row per estimator and sample size, the Monte Carlo table layout.
pub fn sim_csv(report: &SimReport) -> String {
    let mut out = String::from(
        "n,estimator,re_percent,sim_mse,arb,exact_mse,exact_over_sim_ratio,\
         coverage_percent,mean_estimate,lower_quartile,median,upper_quartile,\
         ci_lower,ci_upper,excluded\n",
    );
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.estimator.name(),
            fmt_opt(r.re_percent),
            fmt(r.sim_mse),
            fmt_opt(r.arb),
            fmt(r.exact_mse),
            fmt_opt(r.exact_over_sim_ratio),
            fmt(r.coverage_percent),
            fmt(r.mean_estimate),
            fmt(r.quartiles.lower),
            fmt(r.quartiles.median),
            fmt(r.quartiles.upper),
            fmt(r.sim_ci.lower),
            fmt(r.sim_ci.upper),
            r.excluded,
        ));
    }
    out
}

/// One row per grid point; the optimum row is marked.
pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from("l1,exact_mse,sim_mse,excluded,degenerate,is_optimum\n");
    for p in &report.points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.l1,
            fmt_opt(p.exact_mse),
            fmt_opt(p.sim_mse),
            p.excluded,
            p.degenerate,
            p.is_optimum,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{PairedPopulation, summarize};

    #[test]
    fn summary_layout() {
        let pop = PairedPopulation::new(
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            vec![2.0, 4.0, 6.0, 8.0, 10.0],
        )
        .unwrap();
        let csv = summary_csv(&summarize(&pop));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0],
            "variable,min,lower_quartile,median,mean,upper_quartile,max"
        );
        assert_eq!(lines[1], "y,1.0000,1.5000,3.0000,3.0000,4.5000,5.0000");
        assert!(lines[2].starts_with("x,2.0000,"));
    }
}
