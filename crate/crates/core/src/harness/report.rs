use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Method, Regime, ReplicationRecord, StudyConfig};

/// Mean with the sample standard deviation (divisor `k - 1`) and the
/// standard error of the mean.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> Self {
        let k = values.len();
        if k == 0 {
            return Self { mean: f64::NAN, sd: f64::NAN, se: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / k as f64;
        if k == 1 {
            return Self { mean, sd: 0.0, se: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
        let sd = var.sqrt();
        Self { mean, sd, se: sd / (k as f64).sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub cell: usize,
    pub method: Method,
    pub regime: Regime,
    /// Replications that produced a result.
    pub n_ok: usize,
    pub n_failed: usize,
    /// Set when only one replication contributed: the dispersion is then
    /// reported as 0 but is not an estimate.
    pub degenerate_dispersion: bool,
    pub retain_all: MetricSummary,
    pub covered: MetricSummary,
    pub excess: MetricSummary,
    /// Failure reasons with counts.
    pub failures: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub groups: Vec<GroupSummary>,
    pub records: Vec<ReplicationRecord>,
    pub elapsed_seconds: f64,
}

fn flag(b: bool) -> f64 {
    if b { 1.0 } else { 0.0 }
}

impl StudyReport {
    pub fn from_records(config: StudyConfig, mut records: Vec<ReplicationRecord>, elapsed_seconds: f64) -> Self {
        records.sort_by_key(|r| (r.cell, r.replication, r.regime, r.method));
        let mut grouped: BTreeMap<(usize, Method, Regime), Vec<&ReplicationRecord>> = BTreeMap::new();
        for r in &records {
            grouped.entry((r.cell, r.method, r.regime)).or_default().push(r);
        }
        let groups = grouped
            .into_iter()
            .map(|((cell, method, regime), recs)| {
                let ok: Vec<_> = recs.iter().filter(|r| r.error.is_none()).collect();
                let mut failures = BTreeMap::new();
                for r in recs.iter().filter_map(|r| r.error.as_ref()) {
                    *failures.entry(r.clone()).or_insert(0) += 1;
                }
                let metric = |f: &dyn Fn(&ReplicationRecord) -> f64| {
                    MetricSummary::of(&ok.iter().map(|r| f(r)).collect::<Vec<_>>())
                };
                GroupSummary {
                    cell,
                    method,
                    regime,
                    n_ok: ok.len(),
                    n_failed: recs.len() - ok.len(),
                    degenerate_dispersion: ok.len() == 1,
                    retain_all: metric(&|r| flag(r.retain_all)),
                    covered: metric(&|r| flag(r.covered)),
                    excess: metric(&|r| r.excess as f64),
                    failures,
                }
            })
            .collect();
        Self { config, groups, records, elapsed_seconds }
    }

    pub fn group(&self, cell: usize, method: Method, regime: Regime) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.cell == cell && g.method == method && g.regime == regime)
    }

    /// One row per cell, method, regime and metric.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let cells = self.config.effective_cells();
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "cell", "v_s0", "v_c0", "rho", "signal", "method", "regime", "metric", "mean", "sd", "se", "n_ok", "n_failed",
            "degenerate_dispersion",
        ])?;
        for g in &self.groups {
            let c = cells[g.cell];
            for (name, m) in [("retain_all", g.retain_all), ("covered", g.covered), ("excess", g.excess)] {
                w.write_record([
                    g.cell.to_string(),
                    c.var_signal.to_string(),
                    c.var_corr_noise.to_string(),
                    c.rho.to_string(),
                    c.sig_strength.to_string(),
                    serde_json::to_value(g.method).unwrap().as_str().unwrap().to_string(),
                    serde_json::to_value(g.regime).unwrap().as_str().unwrap().to_string(),
                    name.to_string(),
                    m.mean.to_string(),
                    m.sd.to_string(),
                    m.se.to_string(),
                    g.n_ok.to_string(),
                    g.n_failed.to_string(),
                    g.degenerate_dispersion.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Plain-text table with one row per cell: the retention probability for
    /// every method and regime, then coverage and excess for the reduction,
    /// each as `mean (sd)`.
    pub fn render_table(&self) -> String {
        let cells = self.config.effective_cells();
        let mut cols: Vec<(Method, Regime, &str)> = Vec::new();
        for &method in &[Method::Lasso, Method::Cb] {
            for &regime in &[Regime::Full, Regime::Split] {
                cols.push((method, regime, "retain_all"));
            }
        }
        for metric in ["covered", "excess"] {
            for &regime in &[Regime::Full, Regime::Split] {
                cols.push((Method::Cb, regime, metric));
            }
        }
        cols.retain(|&(m, r, _)| self.config.methods.contains(&m) && self.config.regimes.contains(&r));

        let mut s = String::new();
        let _ = write!(s, "{:>5} {:>5} {:>5} {:>6}", "v_S0", "v_C0", "rho", "signal");
        for (m, r, metric) in &cols {
            let _ = write!(s, " {:>16}", format!("{metric}:{m:?}/{r:?}").to_lowercase());
        }
        s.push('\n');
        for (i, c) in cells.iter().enumerate() {
            let _ = write!(s, "{:>5} {:>5} {:>5} {:>6}", c.var_signal, c.var_corr_noise, c.rho, c.sig_strength);
            for &(m, r, metric) in &cols {
                let cell = match self.group(i, m, r) {
                    Some(g) => {
                        let v = match metric {
                            "retain_all" => g.retain_all,
                            "covered" => g.covered,
                            _ => g.excess,
                        };
                        if metric == "excess" {
                            format!("{:.3} ({:.3})", v.mean, v.sd)
                        } else {
                            format!("{:.2} ({:.2})", v.mean, v.sd)
                        }
                    }
                    None => "-".into(),
                };
                let _ = write!(s, " {cell:>16}");
            }
            s.push('\n');
        }
        s
    }
}
