//! Multi-run paired evaluation campaigns and their report files.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use agents::checkpoint::load_checkpoint;
use agents::episodes::{mix, SampleError};
use agents::eval::{evaluate, EvalRow};
use agents::{normalize, EnvSpec, NetPolicy, OraclePolicy, Policy, RandomPolicy, ResultTable};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("policy {id}: {msg}")]
    Policy { id: String, msg: String },
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `oracle`, `random`, or the path of a checkpoint file (labelled by its
/// file stem).
pub fn load_policy(id: &str) -> Result<Box<dyn Policy>, CampaignError> {
    match id {
        "oracle" => Ok(Box::new(OraclePolicy::new())),
        "random" => Ok(Box::new(RandomPolicy)),
        path => {
            let bad = |msg: String| CampaignError::Policy { id: id.into(), msg };
            let file = fs::File::open(path).map_err(|e| bad(e.to_string()))?;
            let params = load_checkpoint(std::io::BufReader::new(file)).map_err(|e| bad(e.to_string()))?;
            let label = Path::new(path).file_stem().map_or(path.into(), |s| s.to_string_lossy().into_owned());
            Ok(Box::new(NetPolicy::new(Arc::new(params), label)))
        }
    }
}

/// Linear interpolation between order statistics; `q` in `[0, 1]`.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let x = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (x.floor() as usize, x.ceil() as usize);
    v[lo] + (v[hi] - v[lo]) * (x - lo as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub policy: String,
    pub size: usize,
    /// Quartiles of the per-run mean returns.
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub mean: f64,
    /// Normalized score of `mean`; the best policy per size gets 100.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignReport {
    pub runs: Vec<ResultTable>,
    pub summary: Vec<SummaryRow>,
}

impl CampaignReport {
    pub fn runs_csv(&self) -> String {
        let mut s = String::from("run,policy,size,mean,sd,episodes,normalized\n");
        for (k, t) in self.runs.iter().enumerate() {
            for r in &t.rows {
                s.push_str(&format!("{k},{},{},{},{},{},{}\n", r.policy, r.size, r.mean, r.sd, r.episodes, r.normalized));
            }
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("policy,size,p25,p50,p75,mean,normalized\n");
        for r in &self.summary {
            s.push_str(&format!("{},{},{},{},{},{},{}\n", r.policy, r.size, r.p25, r.p50, r.p75, r.mean, r.normalized));
        }
        s
    }

    /// Fixed-width table of the summary.
    pub fn table(&self) -> String {
        let mut s = format!("{:<16} {:>5} {:>8} {:>8} {:>8} {:>8} {:>10}\n", "policy", "size", "p25", "p50", "p75", "mean", "normalized");
        for r in &self.summary {
            s.push_str(&format!(
                "{:<16} {:>5} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>10.1}\n",
                r.policy, r.size, r.p25, r.p50, r.p75, r.mean, r.normalized
            ));
        }
        s
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("runs.csv"), self.runs_csv())?;
        fs::write(dir.join("summary.csv"), self.summary_csv())
    }
}

/// Evaluate every policy on the same maps for each run; run `k` draws its
/// maps from `mix([seed, k])`.
pub fn campaign_eval(
    policies: &[&dyn Policy],
    spec: &EnvSpec,
    sizes: &[usize],
    maps_per_size: usize,
    runs: usize,
    seed: u64,
) -> Result<CampaignReport, CampaignError> {
    let tables = (0..runs as u64)
        .map(|k| evaluate(policies, spec, sizes, maps_per_size, mix(&[seed, k])))
        .collect::<Result<Vec<_>, _>>()?;
    let mut avg = ResultTable::default();
    let mut quartiles = Vec::new();
    for &n in sizes {
        for p in policies {
            let name = p.name();
            let means: Vec<f64> = tables.iter().filter_map(|t| t.get(&name, n)).map(|r| r.mean).collect();
            let mean = means.iter().sum::<f64>() / means.len().max(1) as f64;
            avg.rows.push(EvalRow { policy: name, size: n, mean, sd: 0.0, episodes: 0, normalized: 0.0 });
            quartiles.push([0.25, 0.5, 0.75].map(|q| percentile(&means, q)));
        }
    }
    normalize(&mut avg);
    let summary = avg
        .rows
        .into_iter()
        .zip(quartiles)
        .map(|(r, [p25, p50, p75])| SummaryRow {
            policy: r.policy,
            size: r.size,
            p25,
            p50,
            p75,
            mean: r.mean,
            normalized: r.normalized,
        })
        .collect();
    Ok(CampaignReport { runs: tables, summary })
}
