//! Human, JSON and CSV renderings of single-sample results.
//!
//! JSON and CSV numbers carry six significant digits, human tables three
//! decimals.

use std::fmt::Write as _;
use std::time::Duration;

use hwe_equiv::rng::RNG_ALGORITHM;
use hwe_equiv::simulation::sig6;
use hwe_equiv::{GenotypeCounts, GenotypeDistribution, TestResult, TestSpec};
use serde::Serialize;

use crate::commands::CmdResult;
use crate::Format;

/// Rounds to six significant digits for serialization.
fn r6(x: f64) -> f64 {
    sig6(x).parse().unwrap_or(x)
}

#[derive(Serialize)]
pub struct Inputs {
    data: String,
    k: usize,
    n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    alpha: f64,
    seed: u64,
    bootstrap_replicates: usize,
}

#[derive(Serialize)]
pub struct Distances {
    l2: f64,
    d: f64,
}

#[derive(Serialize)]
pub struct ResultRow {
    kind: &'static str,
    calib: &'static str,
    statistic: f64,
    distance: f64,
    sigma: f64,
    critical_value: f64,
    min_epsilon: f64,
    reject: bool,
}

#[derive(Serialize)]
pub struct RunReport {
    inputs: Inputs,
    kinds: Vec<&'static str>,
    calibrations: Vec<&'static str>,
    alleles: Vec<f64>,
    distances: Distances,
    results: Vec<ResultRow>,
    rng: &'static str,
    elapsed_seconds: f64,
}

fn push_unique(v: &mut Vec<&'static str>, s: &'static str) {
    if !v.contains(&s) {
        v.push(s);
    }
}

impl RunReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        data: &str,
        counts: &GenotypeCounts,
        p: &GenotypeDistribution,
        epsilon: f64,
        alpha: f64,
        seed: u64,
        bootstrap_replicates: usize,
        l2: f64,
        d: f64,
        results: &[TestResult],
        elapsed: Duration,
    ) -> Self {
        let mut kinds = Vec::new();
        let mut calibrations = Vec::new();
        for r in results {
            push_unique(&mut kinds, r.kind.short_name());
            push_unique(&mut calibrations, r.calibration.short_name());
        }
        Self {
            inputs: Inputs {
                data: data.to_string(),
                k: counts.k(),
                n: counts.n(),
                epsilon: Some(r6(epsilon)),
                alpha: r6(alpha),
                seed,
                bootstrap_replicates,
            },
            kinds,
            calibrations,
            alleles: p.alleles().freqs().iter().map(|&a| r6(a)).collect(),
            distances: Distances {
                l2: r6(l2),
                d: r6(d),
            },
            results: results
                .iter()
                .map(|r| ResultRow {
                    kind: r.kind.short_name(),
                    calib: r.calibration.short_name(),
                    statistic: r6(r.statistic),
                    distance: r6(r.distance),
                    sigma: r6(r.sigma),
                    critical_value: r6(r.critical_value),
                    min_epsilon: r6(r.min_epsilon),
                    reject: r.reject,
                })
                .collect(),
            rng: RNG_ALGORITHM,
            elapsed_seconds: r6(elapsed.as_secs_f64()),
        }
    }

    pub fn render(&self, format: Format) -> CmdResult<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => Ok(self.csv()),
            Format::Human => Ok(self.human()),
        }
    }

    fn csv(&self) -> String {
        let mut out = String::from(
            "data,kind,calib,eps,alpha,distance,statistic,sigma,critical_value,min_eps,reject\n",
        );
        let eps = self.inputs.epsilon.unwrap_or(f64::NAN);
        for r in &self.results {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                self.inputs.data.replace(',', "_"),
                r.kind,
                r.calib,
                sig6(eps),
                sig6(self.inputs.alpha),
                sig6(r.distance),
                sig6(r.statistic),
                sig6(r.sigma),
                sig6(r.critical_value),
                sig6(r.min_epsilon),
                r.reject
            );
        }
        out
    }

    fn human(&self) -> String {
        let i = &self.inputs;
        let mut out = String::new();
        let _ = writeln!(out, "data {}  k = {}  n = {}", i.data, i.k, i.n);
        let alleles: Vec<String> = self.alleles.iter().map(|a| format!("{a:.3}")).collect();
        let _ = writeln!(out, "allele frequencies {}", alleles.join(" "));
        let _ = writeln!(
            out,
            "l2 = {:.3}  d = {:.3}",
            self.distances.l2, self.distances.d
        );
        let _ = writeln!(
            out,
            "eps = {}  alpha = {}  B = {}  seed = {}",
            i.epsilon.unwrap_or(f64::NAN),
            i.alpha,
            i.bootstrap_replicates,
            i.seed
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "test  calib  statistic  sigma   critical  min eps  decision"
        );
        for r in &self.results {
            let decision = if r.reject {
                "reject H0 (close to HWE)"
            } else {
                "do not reject"
            };
            let _ = writeln!(
                out,
                "T_{:<3} {:<6} {:>9.3} {:>7.3} {:>9.3} {:>8.3}  {}",
                r.kind,
                if r.calib == "asym" { "A" } else { "B" },
                r.statistic,
                r.sigma,
                r.critical_value,
                r.min_epsilon,
                decision
            );
        }
        let _ = writeln!(out, "\n{:.3} s, {}", self.elapsed_seconds, self.rng);
        out
    }
}

pub struct MinEpsRow {
    pub test: TestSpec,
    pub sigma: f64,
    pub min_eps: f64,
}

#[derive(Serialize)]
struct MinEpsEntry {
    kind: &'static str,
    calib: &'static str,
    sigma: f64,
    min_epsilon: f64,
}

#[derive(Serialize)]
pub struct MinEpsReport {
    inputs: Inputs,
    #[serde(skip)]
    label: String,
    distances: Distances,
    min_epsilon: Vec<MinEpsEntry>,
    rng: &'static str,
    elapsed_seconds: f64,
}

impl MinEpsReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        data: &str,
        label: String,
        counts: &GenotypeCounts,
        alpha: f64,
        seed: u64,
        bootstrap_replicates: usize,
        l2: f64,
        d: f64,
        rows: Vec<MinEpsRow>,
        elapsed: Duration,
    ) -> Self {
        Self {
            inputs: Inputs {
                data: data.to_string(),
                k: counts.k(),
                n: counts.n(),
                epsilon: None,
                alpha: r6(alpha),
                seed,
                bootstrap_replicates,
            },
            label,
            distances: Distances {
                l2: r6(l2),
                d: r6(d),
            },
            min_epsilon: rows
                .iter()
                .map(|r| MinEpsEntry {
                    kind: r.test.kind.short_name(),
                    calib: r.test.calibration.short_name(),
                    sigma: r6(r.sigma),
                    min_epsilon: r6(r.min_eps),
                })
                .collect(),
            rng: RNG_ALGORITHM,
            elapsed_seconds: r6(elapsed.as_secs_f64()),
        }
    }

    pub fn render(&self, format: Format) -> CmdResult<String> {
        let mut out = String::new();
        match format {
            Format::Json => return Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => {
                out.push_str("dataset,n,l2,d");
                for e in &self.min_epsilon {
                    let _ = write!(out, ",{}_{}", e.kind, e.calib);
                }
                let _ = write!(
                    out,
                    "\n{},{},{},{}",
                    self.label,
                    self.inputs.n,
                    sig6(self.distances.l2),
                    sig6(self.distances.d)
                );
                for e in &self.min_epsilon {
                    let _ = write!(out, ",{}", sig6(e.min_epsilon));
                }
                out.push('\n');
            }
            Format::Human => {
                let _ = write!(out, "{:<8} {:>6} {:>6} {:>6}", "data set", "n", "l2", "d");
                for e in &self.min_epsilon {
                    let calib = if e.calib == "asym" { "A" } else { "B" };
                    let _ = write!(out, " {:>6}", format!("T_{} {calib}", e.kind));
                }
                let _ = write!(
                    out,
                    "\n{:<8} {:>6} {:>6.3} {:>6.3}",
                    self.label, self.inputs.n, self.distances.l2, self.distances.d
                );
                for e in &self.min_epsilon {
                    let _ = write!(out, " {:>6.3}", e.min_epsilon);
                }
                out.push('\n');
            }
        }
        Ok(out)
    }
}
