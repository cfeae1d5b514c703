//! Run configuration, read from flat TOML.
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    /// Trimmed Lloyd from a uniform random start.
    #[serde(rename = "lloyd")]
    Lloyd,
    /// k-means++ seeding, then trimmed Lloyd.
    #[serde(rename = "kmeans++")]
    KmeansPP,
    /// Penalized k-means++ over the penalty grid.
    #[serde(rename = "penalized")]
    Penalized,
    /// Penalized k-means++ with Metropolis-Hastings draws.
    #[serde(rename = "metropolized")]
    Metropolized,
    /// Sharded penalized k-means++ whose summaries are re-seeded centrally.
    #[serde(rename = "distributed")]
    Distributed,
    /// Penalized k-means++ plus k local search steps.
    #[serde(rename = "local-search")]
    LocalSearch,
    /// Local search with outliers over its own ladder.
    #[serde(rename = "ls-outliers")]
    LsOutliers,
    /// The fast subsampled pipeline.
    #[serde(rename = "fast")]
    Fast,
    /// The coordinator-model pipeline.
    #[serde(rename = "coordinator")]
    Coordinator,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lloyd => "lloyd",
            Algorithm::KmeansPP => "kmeans++",
            Algorithm::Penalized => "penalized",
            Algorithm::Metropolized => "metropolized",
            Algorithm::Distributed => "distributed",
            Algorithm::LocalSearch => "local-search",
            Algorithm::LsOutliers => "ls-outliers",
            Algorithm::Fast => "fast",
            Algorithm::Coordinator => "coordinator",
        }
    }

    /// Algorithms whose penalty is chosen from the grid.
    pub fn uses_grid(self) -> bool {
        matches!(
            self,
            Algorithm::Penalized | Algorithm::Metropolized | Algorithm::Distributed | Algorithm::LocalSearch
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoordinatorMode {
    #[serde(rename = "guha-simple")]
    GuhaSimple,
    #[serde(rename = "guha-refined")]
    GuhaRefined,
    #[serde(rename = "kmeans-par")]
    KmeansPar,
}

impl From<CoordinatorMode> for kmo_core::distributed::Mode {
    fn from(m: CoordinatorMode) -> Self {
        match m {
            CoordinatorMode::GuhaSimple => kmo_core::distributed::Mode::GuhaSimple,
            CoordinatorMode::GuhaRefined => kmo_core::distributed::Mode::GuhaRefined,
            CoordinatorMode::KmeansPar => kmo_core::distributed::Mode::KmeansPar,
        }
    }
}

/// Either one value or a list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Number of outliers: an integer count, or a fraction of `n` below one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutlierSpec {
    Count(u64),
    Fraction(f64),
}

impl OutlierSpec {
    pub fn resolve(self, n: usize) -> Result<u64, CliError> {
        match self {
            OutlierSpec::Count(z) => Ok(z),
            OutlierSpec::Fraction(f) if (0.0..1.0).contains(&f) => Ok((f * n as f64).floor() as u64),
            OutlierSpec::Fraction(f) => Err(CliError::Config(format!("z fraction {f} must lie in [0, 1)"))),
        }
    }
}

impl std::str::FromStr for OutlierSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if let Ok(z) = s.parse::<u64>() {
            return Ok(OutlierSpec::Count(z));
        }
        s.parse::<f64>()
            .map(OutlierSpec::Fraction)
            .map_err(|_| format!("`{s}` is neither a count nor a fraction"))
    }
}

/// Penalty grid: `"paper"` (ten geometric values from 1 to 1e10), `"ladder"`
/// (the local-search ladder for the dataset), or explicit values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaGrid {
    Named(String),
    Values(Vec<f64>),
}

impl ThetaGrid {
    pub fn paper() -> Vec<f64> {
        (0..10).map(|i| 10f64.powf(10.0 * i as f64 / 9.0)).collect()
    }
}

impl std::str::FromStr for ThetaGrid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paper" | "ladder" => Ok(ThetaGrid::Named(s.to_owned())),
            _ => s
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad penalty value `{v}`")))
                .collect::<Result<Vec<_>, _>>()
                .map(ThetaGrid::Values),
        }
    }
}

fn default_k() -> OneOrMany<usize> {
    OneOrMany::One(10)
}
fn default_z() -> OutlierSpec {
    OutlierSpec::Fraction(0.1)
}
fn default_seeds() -> OneOrMany<u64> {
    OneOrMany::One(1)
}
fn default_grid() -> ThetaGrid {
    ThetaGrid::Named("paper".into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    #[serde(default = "default_k")]
    pub k: OneOrMany<usize>,
    #[serde(default = "default_z")]
    pub z: OutlierSpec,
    pub eps: f64,
    #[serde(default = "default_seeds")]
    pub seeds: OneOrMany<u64>,
    #[serde(default = "default_grid")]
    pub theta_grid: ThetaGrid,
    /// Trimmed Lloyd iterations applied to every result; 0 disables refinement.
    pub refine_iters: usize,
    /// Chain length of the metropolized grid algorithm.
    pub mh_steps: usize,
    pub machines: usize,
    /// Centers per machine in the grid variant of the distributed algorithm, as a multiple of k.
    pub machine_ell_factor: usize,
    pub mode: CoordinatorMode,
    pub c1: f64,
    pub c2: f64,
    /// Penalty scale of the local-search ladder, `β = beta / ε`.
    pub beta: f64,
    pub c_mh: f64,
    pub c_est: f64,
    pub a: f64,
    pub alpha: f64,
    pub c_ell: f64,
    pub emit_centers: bool,
    /// Measure wall-clock time; when false `runtime_ms` is 0 and reports are reproducible byte for byte.
    pub record_timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algorithm: Algorithm::Penalized,
            k: default_k(),
            z: default_z(),
            eps: 0.2,
            seeds: default_seeds(),
            theta_grid: default_grid(),
            refine_iters: 10,
            mh_steps: 100,
            machines: 10,
            machine_ell_factor: 2,
            mode: CoordinatorMode::GuhaSimple,
            c1: 5.0,
            c2: 5.0,
            beta: 300.0,
            c_mh: 4.0,
            c_est: 4.0,
            a: 2.0,
            alpha: 1.0,
            c_ell: 2.0,
            emit_centers: true,
            record_timing: true,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_owned()));
        if self.k.to_vec().is_empty() || self.k.to_vec().contains(&0) {
            return bad("k must be a positive integer or a nonempty list of them");
        }
        if self.seeds.to_vec().is_empty() {
            return bad("seeds must not be empty");
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return bad("eps must lie in (0, 1]");
        }
        if let OutlierSpec::Fraction(f) = self.z {
            if !(0.0..1.0).contains(&f) {
                return bad("z fraction must lie in [0, 1)");
            }
        }
        match &self.theta_grid {
            ThetaGrid::Named(s) if s != "paper" && s != "ladder" => return bad("theta_grid must be \"paper\", \"ladder\" or a list"),
            ThetaGrid::Values(v) if v.is_empty() || v.iter().any(|t| t.is_nan() || *t < 0.0) => {
                return bad("theta_grid values must be nonnegative")
            }
            _ => {}
        }
        if self.mh_steps == 0 || self.machines == 0 || self.machine_ell_factor == 0 {
            return bad("mh_steps, machines and machine_ell_factor must be positive");
        }
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("beta", self.beta),
            ("c_mh", self.c_mh),
            ("c_est", self.c_est),
            ("alpha", self.alpha),
            ("c_ell", self.c_ell),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive")));
            }
        }
        if self.a.is_nan() || self.a < 1.0 {
            return bad("a must be at least 1");
        }
        Ok(())
    }
}
