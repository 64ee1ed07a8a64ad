//! Randomized trials comparing balanced routing, min-cost routing and the
//! node-splitting baseline on shared instances.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;

use balroute_core::metrics::jain_index;
use balroute_core::{
    generate_geometric, perturb_costs, solve, solve_split, split, BpError, GeometricParams, NetworkError,
    NetworkInstance, PenaltySpec, SolveResult,
};

use crate::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Balanced,
    MinCost,
    Split,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Balanced => "balanced",
            Method::MinCost => "mincost",
            Method::Split => "split",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "balanced" => Some(Method::Balanced),
            "mincost" => Some(Method::MinCost),
            "split" => Some(Method::Split),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One method on one instance. Min-cost routing does not depend on `alpha`;
/// its record is repeated under every `alpha` so each comparison group is
/// self-contained.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    pub k_over_n: f64,
    pub alpha: f64,
    pub method: Method,
    /// Routing cost `sum c_e x_e`.
    pub total_cost: f64,
    pub max_load: i64,
    pub jain: f64,
    pub t_star: usize,
    pub converged: bool,
    /// `None` when the certificate was not checked.
    pub certified: Option<bool>,
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("instance generation failed")]
    Network(#[from] NetworkError),
    #[error("solver failed")]
    Solver(#[from] BpError),
    #[error("no min-cost record for seed {seed}, k/n {k_over_n}, alpha {alpha}")]
    Unpaired { seed: u64, k_over_n: f64, alpha: f64 },
    #[error("trials.csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` at fraction index `frac`; independent of how the
/// trials are scheduled.
pub fn trial_seed(base: u64, frac: usize, trial: usize) -> u64 {
    mix(mix(mix(base) ^ frac as u64) ^ trial as u64)
}

/// The perturbed instance a trial runs on.
pub fn trial_instance(cfg: &ExperimentConfig, k_over_n: f64, seed: u64) -> Result<NetworkInstance, ExperimentError> {
    let params = GeometricParams {
        n: cfg.n,
        m: cfg.m,
        k: cfg.sources_for(k_over_n),
        radius_coeff: cfg.radius_coeff,
        cost_range: cfg.cost_range,
        capacity: cfg.capacity,
        ..GeometricParams::default()
    };
    let inst = generate_geometric(&params, seed)?;
    Ok(if cfg.perturbation > 0.0 {
        perturb_costs(&inst, cfg.perturbation, mix(seed ^ 0x5045_5254))
    } else {
        inst
    })
}

fn record(inst: &NetworkInstance, seed: u64, k_over_n: f64, alpha: f64, method: Method, r: &SolveResult) -> TrialRecord {
    let loads: Vec<f64> = r.flow.loads(inst).iter().map(|&y| y as f64).collect();
    TrialRecord {
        seed,
        k_over_n,
        alpha,
        method,
        total_cost: r.flow.total_cost(inst),
        max_load: r.flow.max_load(inst),
        // Every instance has at least one source, so some load is positive.
        jain: jain_index(&loads).unwrap_or(f64::NAN),
        t_star: r.t_star,
        converged: r.converged,
        certified: r.certified_optimal,
    }
}

/// Generates one instance and solves it with min-cost routing once and
/// with balanced routing (and the split baseline, if enabled) for every
/// alpha in `alphas`. Records come out per alpha as balanced, mincost, split.
pub fn run_instance(cfg: &ExperimentConfig, k_over_n: f64, alphas: &[f64], seed: u64) -> Result<Vec<TrialRecord>, ExperimentError> {
    let inst = trial_instance(cfg, k_over_n, seed)?;
    let mincost = solve(&inst, &PenaltySpec::min_cost(), &cfg.solver)?;
    let mut out = Vec::with_capacity(alphas.len() * 3);
    for &alpha in alphas {
        let pen = PenaltySpec::power_law(alpha, cfg.w)?;
        let balanced = solve(&inst, &pen, &cfg.solver)?;
        out.push(record(&inst, seed, k_over_n, alpha, Method::Balanced, &balanced));
        out.push(record(&inst, seed, k_over_n, alpha, Method::MinCost, &mincost));
        if cfg.split {
            let res = solve_split(&split(&inst, &pen)?, &cfg.solver)?;
            out.push(record(&inst, seed, k_over_n, alpha, Method::Split, &res));
        }
    }
    Ok(out)
}

pub fn run_trial(cfg: &ExperimentConfig, k_over_n: f64, alpha: f64, seed: u64) -> Result<Vec<TrialRecord>, ExperimentError> {
    run_instance(cfg, k_over_n, &[alpha], seed)
}

/// All trials of `cfg`, ordered by fraction, then trial, then alpha.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>, ExperimentError> {
    cfg.validate()?;
    let jobs: Vec<(f64, u64)> = cfg
        .source_fractions
        .iter()
        .enumerate()
        .flat_map(|(fi, &f)| (0..cfg.trials).map(move |t| (f, trial_seed(cfg.seed, fi, t))))
        .collect();
    let per_job: Vec<Vec<TrialRecord>> = jobs
        .par_iter()
        .map(|&(f, seed)| run_instance(cfg, f, &cfg.alphas, seed))
        .collect::<Result<_, _>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub k_over_n: f64,
    pub alpha: f64,
    pub method: Method,
    pub trials: usize,
    pub converged: usize,
    pub certified: usize,
    /// Means over converged trials.
    pub mean_total_cost: f64,
    pub mean_max_load: f64,
    pub mean_jain: f64,
    pub mean_t_star: f64,
    /// Mean of `(maxload_mincost - maxload) / maxload_mincost` over trials
    /// where both this method and min-cost routing converged.
    pub load_reduction: f64,
    /// Mean of `(cost - cost_mincost) / cost_mincost`, same trials.
    pub cost_increase: f64,
    /// Number of trials behind the two relative figures.
    pub paired: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CdfPoint {
    pub k_over_n: f64,
    pub alpha: f64,
    pub method: Method,
    pub t: usize,
    pub cdf: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub cdf: Vec<CdfPoint>,
}

impl Summary {
    pub fn row(&self, k_over_n: f64, alpha: f64, method: Method) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.k_over_n == k_over_n && r.alpha == alpha && r.method == method)
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if c == 0 {
        f64::NAN
    } else {
        s / c as f64
    }
}

/// Per `(k/n, alpha, method)` means and T* CDFs, groups in order of first
/// appearance. Only converged trials enter the means and CDFs.
pub fn aggregate(records: &[TrialRecord]) -> Result<Summary, ExperimentError> {
    type Key = (u64, u64, Method);
    let key = |r: &TrialRecord| -> Key { (r.k_over_n.to_bits(), r.alpha.to_bits(), r.method) };
    let mut groups: Vec<(Key, Vec<&TrialRecord>)> = Vec::new();
    for r in records {
        let k = key(r);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, v)) => v.push(r),
            None => groups.push((k, vec![r])),
        }
    }
    let partners: HashMap<(u64, u64, u64), &TrialRecord> = records
        .iter()
        .filter(|r| r.method == Method::MinCost)
        .map(|r| ((r.seed, r.k_over_n.to_bits(), r.alpha.to_bits()), r))
        .collect();
    let mincost = |r: &TrialRecord| {
        partners
            .get(&(r.seed, r.k_over_n.to_bits(), r.alpha.to_bits()))
            .copied()
            .ok_or(ExperimentError::Unpaired {
                seed: r.seed,
                k_over_n: r.k_over_n,
                alpha: r.alpha,
            })
    };

    let mut rows = Vec::new();
    let mut cdf = Vec::new();
    for (_, rs) in &groups {
        let head = rs[0];
        let conv: Vec<&TrialRecord> = rs.iter().copied().filter(|r| r.converged).collect();
        let mut rel = Vec::new();
        for r in rs {
            let base = mincost(r)?;
            if r.converged && base.converged {
                let dl = (base.max_load - r.max_load) as f64 / base.max_load as f64;
                let dc = (r.total_cost - base.total_cost) / base.total_cost;
                rel.push((dl, dc));
            }
        }
        rows.push(SummaryRow {
            k_over_n: head.k_over_n,
            alpha: head.alpha,
            method: head.method,
            trials: rs.len(),
            converged: conv.len(),
            certified: rs.iter().filter(|r| r.certified == Some(true)).count(),
            mean_total_cost: mean(conv.iter().map(|r| r.total_cost)),
            mean_max_load: mean(conv.iter().map(|r| r.max_load as f64)),
            mean_jain: mean(conv.iter().map(|r| r.jain)),
            mean_t_star: mean(conv.iter().map(|r| r.t_star as f64)),
            load_reduction: mean(rel.iter().map(|p| p.0)),
            cost_increase: mean(rel.iter().map(|p| p.1)),
            paired: rel.len(),
        });
        let mut ts: Vec<usize> = conv.iter().map(|r| r.t_star).collect();
        ts.sort_unstable();
        for (i, &t) in ts.iter().enumerate() {
            if ts.get(i + 1) != Some(&t) {
                cdf.push(CdfPoint {
                    k_over_n: head.k_over_n,
                    alpha: head.alpha,
                    method: head.method,
                    t,
                    cdf: (i + 1) as f64 / ts.len() as f64,
                });
            }
        }
    }
    Ok(Summary { rows, cdf })
}

pub const TRIALS_HEADER: &str = "# balroute trials v1\nseed,k_over_n,alpha,method,total_cost,max_load,jain,t_star,converged,certified\n";
pub const SUMMARY_HEADER: &str = "# balroute summary v1\nk_over_n,alpha,method,trials,converged,certified,mean_total_cost,mean_max_load,mean_jain,mean_t_star,load_reduction,cost_increase,paired\n";
pub const CDF_HEADER: &str = "# balroute tstar_cdf v1\nk_over_n,alpha,method,t,cdf\n";

pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut s = String::from(TRIALS_HEADER);
    for r in records {
        let cert = match r.certified {
            Some(c) => c.to_string(),
            None => String::new(),
        };
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.seed, r.k_over_n, r.alpha, r.method, r.total_cost, r.max_load, r.jain, r.t_star, r.converged, cert
        )
        .unwrap();
    }
    s
}

/// Reads back the output of [`trials_csv`].
pub fn parse_trials_csv(text: &str) -> Result<Vec<TrialRecord>, ExperimentError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        if line.starts_with('#') || line.starts_with("seed,") || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let err = |msg: &str| ExperimentError::Csv { line: ln, msg: msg.to_string() };
        if f.len() != 10 {
            return Err(err("expected 10 fields"));
        }
        fn p<T: std::str::FromStr>(s: &str, ln: usize, what: &str) -> Result<T, ExperimentError> {
            s.parse().map_err(|_| ExperimentError::Csv {
                line: ln,
                msg: format!("bad {what} `{s}`"),
            })
        }
        out.push(TrialRecord {
            seed: p(f[0], ln, "seed")?,
            k_over_n: p(f[1], ln, "k_over_n")?,
            alpha: p(f[2], ln, "alpha")?,
            method: Method::parse(f[3]).ok_or_else(|| err("bad method"))?,
            total_cost: p(f[4], ln, "total_cost")?,
            max_load: p(f[5], ln, "max_load")?,
            jain: p(f[6], ln, "jain")?,
            t_star: p(f[7], ln, "t_star")?,
            converged: p(f[8], ln, "converged")?,
            certified: if f[9].is_empty() { None } else { Some(p(f[9], ln, "certified")?) },
        });
    }
    Ok(out)
}

pub fn summary_csv(summary: &Summary) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    for r in &summary.rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.k_over_n,
            r.alpha,
            r.method,
            r.trials,
            r.converged,
            r.certified,
            r.mean_total_cost,
            r.mean_max_load,
            r.mean_jain,
            r.mean_t_star,
            r.load_reduction,
            r.cost_increase,
            r.paired
        )
        .unwrap();
    }
    s
}

pub fn cdf_csv(summary: &Summary) -> String {
    let mut s = String::from(CDF_HEADER);
    for p in &summary.cdf {
        writeln!(s, "{},{},{},{},{}", p.k_over_n, p.alpha, p.method, p.t, p.cdf).unwrap();
    }
    s
}

/// Writes `trials.csv`, `summary.csv`, `tstar_cdf.csv` and the effective
/// `config.txt` into `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, records: &[TrialRecord], dir: &Path) -> Result<Summary, ExperimentError> {
    let summary = aggregate(records)?;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("trials.csv"), trials_csv(records))?;
    fs::write(dir.join("summary.csv"), summary_csv(&summary))?;
    fs::write(dir.join("tstar_cdf.csv"), cdf_csv(&summary))?;
    fs::write(dir.join("config.txt"), cfg.to_text())?;
    Ok(summary)
}
