//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, Fading};
use crate::coordination::PolicyId;
use crate::error::{Error, Result};
use crate::montecarlo::ActivityModel;
use crate::planner::{Engine, McEngine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Coverage,
    RateCdf,
    MinTau,
    Tradeoff,
    CoordEval,
    CoordSavings,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Coverage,
        ExperimentKind::RateCdf,
        ExperimentKind::MinTau,
        ExperimentKind::Tradeoff,
        ExperimentKind::CoordEval,
        ExperimentKind::CoordSavings,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Coverage => "coverage",
            ExperimentKind::RateCdf => "rate-cdf",
            ExperimentKind::MinTau => "min-tau",
            ExperimentKind::Tradeoff => "tradeoff",
            ExperimentKind::CoordEval => "coord-eval",
            ExperimentKind::CoordSavings => "coord-savings",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
            Error::Config(format!("unknown experiment '{s}'; valid experiments: {}", names.join(", ")))
        })
    }

    /// Optional fields the experiment reads, besides `channel`.
    pub fn fields(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Coverage => &["lambda_an", "lambda_ue", "activity", "theta_db_grid", "n_trials"],
            ExperimentKind::RateCdf => &["lambda_an", "lambda_ue", "activity", "engine", "n_trials"],
            ExperimentKind::MinTau => &["r0_grid", "engine", "tau_bracket", "tolerance"],
            ExperimentKind::Tradeoff => &["base_lambda_an", "base_lambda_ue", "densification_factor", "x_grid", "engine"],
            ExperimentKind::CoordEval => &["tau_grid", "n_ues", "area_km2", "n_rb", "n_realizations", "policies"],
            ExperimentKind::CoordSavings => &[
                "tau_grid",
                "n_ues",
                "area_km2",
                "n_rb",
                "n_realizations",
                "policies",
                "target_rates",
            ],
        }
    }

    pub(crate) fn is_coordination(self) -> bool {
        matches!(self, ExperimentKind::CoordEval | ExperimentKind::CoordSavings)
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The literal string `"off"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Off {
    Off,
}

/// A number, or `"off"` to disable the setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Setting {
    Value(f64),
    Off(Off),
}

impl Setting {
    fn from_option(v: Option<f64>) -> Self {
        v.map_or(Setting::Off(Off::Off), Setting::Value)
    }

    fn to_option(self) -> Option<f64> {
        match self {
            Setting::Value(v) => Some(v),
            Setting::Off(_) => None,
        }
    }
}

/// Overrides on top of the experiment's default channel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d0_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fading: Option<Fading>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_psd_dbm_hz: Option<Setting>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta0_db: Option<Setting>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_subchannels: Option<u32>,
}

impl ChannelSection {
    pub fn apply(&self, base: ChannelParams) -> ChannelParams {
        ChannelParams {
            alpha: self.alpha.unwrap_or(base.alpha),
            d0_m: self.d0_m.unwrap_or(base.d0_m),
            fading: self.fading.unwrap_or(base.fading),
            noise_psd_dbm_hz: self.noise_psd_dbm_hz.map_or(base.noise_psd_dbm_hz, Setting::to_option),
            bandwidth_hz: self.bandwidth_hz.unwrap_or(base.bandwidth_hz),
            tx_power_dbm: self.tx_power_dbm.unwrap_or(base.tx_power_dbm),
            theta0_db: self.theta0_db.map_or(base.theta0_db, Setting::to_option),
            n_subchannels: self.n_subchannels.unwrap_or(base.n_subchannels),
        }
    }

    pub fn complete(p: &ChannelParams) -> Self {
        Self {
            alpha: Some(p.alpha),
            d0_m: Some(p.d0_m),
            fading: Some(p.fading),
            noise_psd_dbm_hz: Some(Setting::from_option(p.noise_psd_dbm_hz)),
            bandwidth_hz: Some(p.bandwidth_hz),
            tx_power_dbm: Some(p.tx_power_dbm),
            theta0_db: Some(Setting::from_option(p.theta0_db)),
            n_subchannels: Some(p.n_subchannels),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Montecarlo,
    Semianalytic,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Montecarlo => "montecarlo",
            EngineKind::Semianalytic => "semianalytic",
        }
    }
}

/// Rate engine. `n_trials`, `lambda_ue` and `slack` only apply to Monte
/// Carlo; its seed is the config's `master_seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    pub kind: EngineKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_ue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
}

impl EngineSection {
    fn semianalytic() -> Self {
        Self {
            kind: EngineKind::Semianalytic,
            n_trials: None,
            lambda_ue: None,
            slack: None,
        }
    }

    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.kind == EngineKind::Semianalytic {
            for (name, set) in [
                ("n_trials", self.n_trials.is_some()),
                ("lambda_ue", self.lambda_ue.is_some()),
                ("slack", self.slack.is_some()),
            ] {
                if set {
                    v.push(format!("engine.{name} only applies to the montecarlo engine"));
                }
            }
        }
        v
    }

    fn fill(&mut self) {
        if self.kind == EngineKind::Montecarlo {
            let d = McEngine::default();
            self.n_trials.get_or_insert(d.n_trials);
            self.lambda_ue.get_or_insert(d.lambda_ue);
            self.slack.get_or_insert(d.slack);
        }
    }

    pub fn engine(&self, master_seed: u64) -> Engine {
        match self.kind {
            EngineKind::Semianalytic => Engine::Semianalytic,
            EngineKind::Montecarlo => {
                let d = McEngine::default();
                Engine::Montecarlo(McEngine {
                    lambda_ue: self.lambda_ue.unwrap_or(d.lambda_ue),
                    n_trials: self.n_trials.unwrap_or(d.n_trials),
                    master_seed,
                    slack: self.slack.unwrap_or(d.slack),
                })
            }
        }
    }
}

/// One experiment. Every optional field not read by the chosen experiment is
/// rejected, as is any unknown key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<EngineSection>,

    /// ANs per km².
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_an: Option<f64>,
    /// UEs per km².
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_ue: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activity: Option<ActivityModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_db_grid: Option<Vec<f64>>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_bracket: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_lambda_an: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_lambda_ue: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub densification_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_grid: Option<Vec<f64>>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_ues: Option<usize>,
    /// Side of the square deployment area is `sqrt(area_km2)` km.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_km2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_rb: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_realizations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policies: Option<Vec<PolicyId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_rates: Option<Vec<f64>>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

pub const DEFAULT_THETA_DB_GRID: [f64; 5] = [-10.0, -6.0, 0.0, 6.0, 10.0];
pub const DEFAULT_R0_GRID: [f64; 13] = [0.01, 0.02, 0.03, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0, 5.0, 6.0, 8.0];
pub const DEFAULT_X_GRID: [f64; 10] = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];
pub const DEFAULT_TAU_GRID: [f64; 9] = [0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
pub const DEFAULT_TARGET_RATES: [f64; 3] = [0.1, 0.5, 1.0];
pub const DEFAULT_DENSIFICATION_FACTOR: f64 = 100.0;
pub const DEFAULT_N_RB: usize = 4;

fn positive(v: &mut Vec<String>, name: &str, x: f64) {
    if !(x > 0.0) || !x.is_finite() {
        v.push(format!("{name} must be positive (got {x})"));
    }
}

fn grid(v: &mut Vec<String>, name: &str, xs: &[f64], positive_only: bool, ascending: bool) {
    if xs.is_empty() {
        v.push(format!("{name} must not be empty"));
    }
    if xs.iter().any(|x| !x.is_finite() || (positive_only && !(*x > 0.0))) {
        let what = if positive_only { "positive" } else { "finite" };
        v.push(format!("{name} entries must be {what}"));
    }
    if ascending && xs.windows(2).any(|w| !(w[0] < w[1])) {
        v.push(format!("{name} must be strictly ascending"));
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    /// Reads and parses a config file. I/O failures surface as
    /// [`Error::Io`], syntax and schema problems as [`Error::Config`].
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)?;
        Ok((Self::from_toml(&text)?, text))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn set_fields(&self) -> Vec<&'static str> {
        let mut set = Vec::new();
        let mut mark = |name: &'static str, present: bool| {
            if present {
                set.push(name);
            }
        };
        mark("engine", self.engine.is_some());
        mark("lambda_an", self.lambda_an.is_some());
        mark("lambda_ue", self.lambda_ue.is_some());
        mark("activity", self.activity.is_some());
        mark("n_trials", self.n_trials.is_some());
        mark("theta_db_grid", self.theta_db_grid.is_some());
        mark("r0_grid", self.r0_grid.is_some());
        mark("tau_bracket", self.tau_bracket.is_some());
        mark("tolerance", self.tolerance.is_some());
        mark("base_lambda_an", self.base_lambda_an.is_some());
        mark("base_lambda_ue", self.base_lambda_ue.is_some());
        mark("densification_factor", self.densification_factor.is_some());
        mark("x_grid", self.x_grid.is_some());
        mark("tau_grid", self.tau_grid.is_some());
        mark("n_ues", self.n_ues.is_some());
        mark("area_km2", self.area_km2.is_some());
        mark("n_rb", self.n_rb.is_some());
        mark("n_realizations", self.n_realizations.is_some());
        mark("policies", self.policies.is_some());
        mark("target_rates", self.target_rates.is_some());
        set
    }

    /// Channel before the `channel` overrides: thermal noise and no service
    /// threshold for the coordination experiments, the interference-limited
    /// typical-UE model otherwise.
    pub fn base_channel(&self) -> ChannelParams {
        if self.experiment.is_coordination() {
            ChannelParams::finite_area()
        } else {
            ChannelParams::default()
        }
    }

    pub fn channel_params(&self) -> ChannelParams {
        self.channel.apply(self.base_channel())
    }

    /// Copy with every default the experiment relies on written out.
    /// Running the result is equivalent to running `self`.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.channel = ChannelSection::complete(&self.channel_params());
        match c.experiment {
            ExperimentKind::Coverage => {
                c.lambda_an.get_or_insert(100.0);
                c.lambda_ue.get_or_insert(100.0);
                c.activity.get_or_insert(ActivityModel::Full);
                c.theta_db_grid.get_or_insert_with(|| DEFAULT_THETA_DB_GRID.to_vec());
                c.n_trials.get_or_insert(100_000);
            }
            ExperimentKind::RateCdf => {
                c.lambda_an.get_or_insert(50.0);
                c.lambda_ue.get_or_insert(1000.0);
                c.activity.get_or_insert(ActivityModel::LoadDriven);
                c.engine.get_or_insert(EngineSection {
                    kind: EngineKind::Montecarlo,
                    n_trials: None,
                    lambda_ue: None,
                    slack: None,
                });
                // Monte Carlo here simulates the configured densities directly.
                if c.engine.is_some_and(|e| e.kind == EngineKind::Montecarlo) {
                    c.n_trials.get_or_insert(20_000);
                }
            }
            ExperimentKind::MinTau => {
                c.r0_grid.get_or_insert_with(|| DEFAULT_R0_GRID.to_vec());
                c.engine.get_or_insert_with(EngineSection::semianalytic).fill();
                // Monte Carlo windows grow with tau, so its default bracket is narrower.
                let montecarlo = c.engine.is_some_and(|e| e.kind == EngineKind::Montecarlo);
                c.tau_bracket.get_or_insert(if montecarlo { [1e-2, 1e2] } else { [1e-3, 1e4] });
                c.tolerance.get_or_insert(0.01);
            }
            ExperimentKind::Tradeoff => {
                c.base_lambda_an.get_or_insert(5.0);
                c.base_lambda_ue.get_or_insert(100.0);
                c.densification_factor.get_or_insert(DEFAULT_DENSIFICATION_FACTOR);
                c.x_grid.get_or_insert_with(|| DEFAULT_X_GRID.to_vec());
                c.engine.get_or_insert_with(EngineSection::semianalytic).fill();
            }
            ExperimentKind::CoordEval | ExperimentKind::CoordSavings => {
                c.tau_grid.get_or_insert_with(|| DEFAULT_TAU_GRID.to_vec());
                c.n_ues.get_or_insert(50);
                c.area_km2.get_or_insert(1.0);
                c.n_rb.get_or_insert(DEFAULT_N_RB);
                c.n_realizations.get_or_insert(100);
                c.policies.get_or_insert_with(|| PolicyId::ALL.to_vec());
                if c.experiment == ExperimentKind::CoordSavings {
                    c.target_rates.get_or_insert_with(|| DEFAULT_TARGET_RATES.to_vec());
                }
            }
        }
        c
    }

    /// Schema and cross-field problems, without running anything expensive.
    pub fn violations(&self) -> Vec<String> {
        let allowed = self.experiment.fields();
        let mut v: Vec<String> = self
            .set_fields()
            .into_iter()
            .filter(|f| !allowed.contains(f))
            .map(|f| format!("`{f}` is not used by the {} experiment", self.experiment))
            .collect();
        if let Some(e) = &self.engine {
            v.extend(e.violations());
            if self.experiment == ExperimentKind::RateCdf && (e.n_trials.is_some() || e.lambda_ue.is_some()) {
                v.push("rate-cdf simulates its own densities: set `n_trials` at top level, not in [engine]".into());
            }
        }
        if !v.is_empty() {
            return v;
        }
        let c = self.resolved();
        let params = c.channel_params();
        v.extend(params.violations());
        let engine_kind = c.engine.map(|e| e.kind);
        if let Some(e) = &c.engine {
            if let Some(n) = e.n_trials {
                if n == 0 {
                    v.push("engine.n_trials must be at least 1".into());
                }
            }
            if let Some(l) = e.lambda_ue {
                positive(&mut v, "engine.lambda_ue", l);
            }
            if let Some(s) = e.slack {
                if !(s >= 0.0) || !s.is_finite() {
                    v.push(format!("engine.slack must be non-negative (got {s})"));
                }
            }
        }
        match c.experiment {
            ExperimentKind::Coverage | ExperimentKind::RateCdf => {
                positive(&mut v, "lambda_an", c.lambda_an.unwrap());
                let lue = c.lambda_ue.unwrap();
                if !(lue >= 0.0) || !lue.is_finite() {
                    v.push(format!("lambda_ue must be non-negative (got {lue})"));
                }
                if let Some(n) = c.n_trials {
                    if n == 0 {
                        v.push("n_trials must be at least 1".into());
                    }
                }
                if c.experiment == ExperimentKind::Coverage {
                    grid(&mut v, "theta_db_grid", c.theta_db_grid.as_deref().unwrap(), false, false);
                    if params.noise_psd_dbm_hz.is_some() {
                        v.push("coverage needs interference-limited operation: set channel.noise_psd_dbm_hz = \"off\"".into());
                    }
                }
                if engine_kind == Some(EngineKind::Semianalytic) {
                    if c.activity != Some(ActivityModel::LoadDriven) {
                        v.push("the semianalytic engine models load-driven activity only".into());
                    }
                    if c.n_trials.is_some() {
                        v.push("`n_trials` only applies to the montecarlo engine".into());
                    }
                    if !(lue > 0.0) {
                        v.push("the semianalytic engine needs lambda_ue > 0".into());
                    }
                }
            }
            ExperimentKind::MinTau => {
                grid(&mut v, "r0_grid", c.r0_grid.as_deref().unwrap(), true, false);
                let [lo, hi] = c.tau_bracket.unwrap();
                if !(lo > 0.0 && lo < hi) || !hi.is_finite() {
                    v.push(format!("tau_bracket must satisfy 0 < lo < hi (got [{lo}, {hi}])"));
                }
                positive(&mut v, "tolerance", c.tolerance.unwrap());
            }
            ExperimentKind::Tradeoff => {
                positive(&mut v, "base_lambda_an", c.base_lambda_an.unwrap());
                positive(&mut v, "base_lambda_ue", c.base_lambda_ue.unwrap());
                positive(&mut v, "densification_factor", c.densification_factor.unwrap());
                grid(&mut v, "x_grid", c.x_grid.as_deref().unwrap(), true, true);
            }
            ExperimentKind::CoordEval | ExperimentKind::CoordSavings => {
                let tau_grid = c.tau_grid.as_deref().unwrap();
                grid(&mut v, "tau_grid", tau_grid, true, true);
                positive(&mut v, "area_km2", c.area_km2.unwrap());
                let n_ues = c.n_ues.unwrap();
                if n_ues == 0 {
                    v.push("n_ues must be at least 1".into());
                }
                if c.n_rb == Some(0) {
                    v.push("n_rb must be at least 1".into());
                }
                if c.n_realizations == Some(0) {
                    v.push("n_realizations must be at least 1".into());
                }
                if params.noise_psd_dbm_hz.is_none() {
                    v.push("coordination experiments need thermal noise (channel.noise_psd_dbm_hz)".into());
                }
                for &t in tau_grid {
                    if (t * n_ues as f64).round() < 1.0 {
                        v.push(format!("tau = {t} leaves no AN for {n_ues} UEs"));
                    }
                }
                let policies = c.policies.as_deref().unwrap();
                if policies.is_empty() {
                    v.push("policies must not be empty".into());
                }
                if policies.iter().enumerate().any(|(i, p)| policies[..i].contains(p)) {
                    v.push("policies must not repeat".into());
                }
                if c.experiment == ExperimentKind::CoordSavings {
                    grid(&mut v, "target_rates", c.target_rates.as_deref().unwrap(), true, false);
                    if !policies.contains(&PolicyId::Baseline) {
                        v.push("coord-savings needs the baseline policy".into());
                    }
                    if policies.len() < 2 {
                        v.push("coord-savings needs at least one coordinated policy".into());
                    }
                }
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(text).unwrap()
    }

    #[test]
    fn missing_seed_names_the_field() {
        let e = ExperimentConfig::from_toml("experiment = \"coverage\"\n").unwrap_err();
        assert!(e.to_string().contains("master_seed"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::from_toml("experiment = \"coverage\"\nmaster_seed = 1\nlamda_an = 5\n").unwrap_err();
        assert!(e.to_string().contains("lamda_an"), "{e}");
        let e = ExperimentConfig::from_toml("experiment = \"coverage\"\nmaster_seed = 1\n[channel]\nalfa = 4\n")
            .unwrap_err();
        assert!(e.to_string().contains("alfa"), "{e}");
    }

    #[test]
    fn fields_of_other_experiments_are_rejected() {
        let c = parse("experiment = \"coverage\"\nmaster_seed = 1\nx_grid = [1.0]\n");
        let v = c.violations();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("x_grid"));
    }

    #[test]
    fn alpha_two_is_a_violation() {
        let c = parse("experiment = \"min-tau\"\nmaster_seed = 1\n[channel]\nalpha = 2.0\n");
        assert!(c.violations().iter().any(|m| m.contains("path-loss exponent must exceed 2")));
    }

    #[test]
    fn noise_can_be_switched_off() {
        let c = parse("experiment = \"coord-eval\"\nmaster_seed = 1\n[channel]\nnoise_psd_dbm_hz = \"off\"\n");
        assert_eq!(c.channel_params().noise_psd_dbm_hz, None);
        assert!(c.violations().iter().any(|m| m.contains("thermal noise")));
        let c = parse("experiment = \"coord-eval\"\nmaster_seed = 1\n");
        assert_eq!(c.channel_params().noise_psd_dbm_hz, Some(-174.0));
        assert!(c.violations().is_empty());
    }

    #[test]
    fn resolved_config_round_trips() {
        for kind in ExperimentKind::ALL {
            let c = parse(&format!("experiment = \"{kind}\"\nmaster_seed = 7\n"));
            assert!(c.violations().is_empty(), "{kind}: {:?}", c.violations());
            let r = c.resolved();
            assert!(r.violations().is_empty(), "{kind}: {:?}", r.violations());
            let back = ExperimentConfig::from_toml(&r.to_toml()).unwrap();
            assert_eq!(back, r);
            assert_eq!(back.resolved(), r);
            assert_eq!(r.channel_params(), c.channel_params());
        }
    }

    #[test]
    fn unknown_experiment_lists_all_names() {
        let msg = ExperimentKind::parse("foo").unwrap_err().to_string();
        for k in ExperimentKind::ALL {
            assert!(msg.contains(k.name()), "{msg}");
        }
    }

    #[test]
    fn engine_fields_follow_the_kind() {
        let c = parse("experiment = \"tradeoff\"\nmaster_seed = 1\n[engine]\nkind = \"semianalytic\"\nn_trials = 5\n");
        assert!(c.violations().iter().any(|m| m.contains("engine.n_trials")));
        let c = parse("experiment = \"tradeoff\"\nmaster_seed = 3\n[engine]\nkind = \"montecarlo\"\nn_trials = 5\n");
        assert!(c.violations().is_empty());
        match c.resolved().engine.unwrap().engine(c.master_seed) {
            Engine::Montecarlo(mc) => {
                assert_eq!(mc.n_trials, 5);
                assert_eq!(mc.master_seed, 3);
            }
            other => panic!("{other:?}"),
        }
    }
}
