//! Experiment configuration and its `key = value` file format.

use std::fmt::Write as _;
use std::path::PathBuf;

use balroute_core::SolverConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Sources and relays.
    pub n: usize,
    /// Destinations.
    pub m: usize,
    /// Fractions `k / n` of nodes that generate one unit each.
    pub source_fractions: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Weight of the load penalty in the balanced objective.
    pub w: f64,
    pub trials: usize,
    pub seed: u64,
    pub radius_coeff: f64,
    pub cost_range: (f64, f64),
    /// Uniform edge capacity; `None` uses `k`.
    pub capacity: Option<i64>,
    /// Upper end of the uniform `(0, eps)` cost perturbation that breaks ties.
    pub perturbation: f64,
    /// Also run the node-splitting baseline.
    pub split: bool,
    pub solver: SolverConfig,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 50,
            m: 1,
            source_fractions: (1..=9).map(|i| i as f64 / 10.0).collect(),
            alphas: vec![1.5, 2.0],
            w: 0.5,
            trials: 200,
            seed: 1,
            radius_coeff: 1.6,
            cost_range: (1.0, 3.0),
            capacity: None,
            perturbation: 1e-6,
            split: true,
            // The slowest balanced runs at n = 50 need several hundred sweeps.
            solver: SolverConfig {
                max_iterations: 2000,
                ..SolverConfig::default()
            },
            out_dir: PathBuf::from("results"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("{0}")]
    Invalid(&'static str),
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 || self.m == 0 {
            return Err(ConfigError::Invalid("n and m must be positive"));
        }
        if self.source_fractions.is_empty() || self.source_fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return Err(ConfigError::Invalid("fractions must lie in (0, 1]"));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !a.is_finite() || *a < 1.0) {
            return Err(ConfigError::Invalid("alpha values must be finite and at least 1"));
        }
        if !(0.0..=1.0).contains(&self.w) {
            return Err(ConfigError::Invalid("w must lie in [0, 1]"));
        }
        if self.trials == 0 {
            return Err(ConfigError::Invalid("trials must be at least 1"));
        }
        if self.perturbation.is_nan() || self.perturbation < 0.0 {
            return Err(ConfigError::Invalid("perturbation must be non-negative"));
        }
        if self.solver.stability_window == 0 || self.solver.max_iterations < self.solver.stability_window {
            return Err(ConfigError::Invalid("need 1 <= stability_window <= max_iters"));
        }
        Ok(())
    }

    /// Number of sources for fraction `f`, at least one.
    pub fn sources_for(&self, f: f64) -> usize {
        ((f * self.n as f64).round() as usize).clamp(1, self.n)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        fn num<T: std::str::FromStr>(v: &str, bad: impl Fn() -> ConfigError) -> Result<T, ConfigError> {
            v.trim().parse().map_err(|_| bad())
        }
        fn list(v: &str, bad: impl Fn() -> ConfigError) -> Result<Vec<f64>, ConfigError> {
            v.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
        }
        match key {
            "n" => self.n = num(value, bad)?,
            "m" => self.m = num(value, bad)?,
            "fractions" => self.source_fractions = list(value, bad)?,
            "alpha" => self.alphas = list(value, bad)?,
            "w" => self.w = num(value, bad)?,
            "trials" => self.trials = num(value, bad)?,
            "seed" => self.seed = num(value, bad)?,
            "radius_coeff" => self.radius_coeff = num(value, bad)?,
            "cost_min" => self.cost_range.0 = num(value, bad)?,
            "cost_max" => self.cost_range.1 = num(value, bad)?,
            "capacity" => {
                self.capacity = match value.trim() {
                    "auto" => None,
                    v => Some(num(v, bad)?),
                }
            }
            "perturbation" => self.perturbation = num(value, bad)?,
            "split" => self.split = num(value, bad)?,
            "max_iters" => self.solver.max_iterations = num(value, bad)?,
            "stability_window" => self.solver.stability_window = num(value, bad)?,
            "certify" => self.solver.certificate_check = num(value, bad)?,
            "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Defaults overridden by the settings in `text`.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                msg: "expected `key = value`".into(),
            })?;
            cfg.set(k.trim(), v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        writeln!(s, "n = {}", self.n).unwrap();
        writeln!(s, "m = {}", self.m).unwrap();
        writeln!(s, "fractions = {}", join(&self.source_fractions)).unwrap();
        writeln!(s, "alpha = {}", join(&self.alphas)).unwrap();
        writeln!(s, "w = {}", self.w).unwrap();
        writeln!(s, "trials = {}", self.trials).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "radius_coeff = {}", self.radius_coeff).unwrap();
        writeln!(s, "cost_min = {}", self.cost_range.0).unwrap();
        writeln!(s, "cost_max = {}", self.cost_range.1).unwrap();
        match self.capacity {
            Some(c) => writeln!(s, "capacity = {c}").unwrap(),
            None => writeln!(s, "capacity = auto").unwrap(),
        }
        writeln!(s, "perturbation = {}", self.perturbation).unwrap();
        writeln!(s, "split = {}", self.split).unwrap();
        writeln!(s, "max_iters = {}", self.solver.max_iterations).unwrap();
        writeln!(s, "stability_window = {}", self.solver.stability_window).unwrap();
        writeln!(s, "certify = {}", self.solver.certificate_check).unwrap();
        writeln!(s, "out_dir = {}", self.out_dir.display()).unwrap();
        s
    }
}
