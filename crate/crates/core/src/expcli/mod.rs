//! Config-driven experiment runner behind the `udnlab` binary.
//!
//! A run writes `result.json`, `config.toml` (the resolved config) and one
//! CSV per table into `output_dir/<experiment>/<unix-time>-<seed>/`. CSVs
//! depend only on the config, never on the worker count or the clock.

mod cli;
mod config;
mod describe;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::json;

pub use cli::{cli_main, Cli, Command};
pub use config::{
    ChannelSection, EngineKind, EngineSection, ExperimentConfig, ExperimentKind, Off, Setting, DEFAULT_DENSIFICATION_FACTOR,
    DEFAULT_N_RB, DEFAULT_R0_GRID, DEFAULT_TARGET_RATES, DEFAULT_TAU_GRID, DEFAULT_THETA_DB_GRID, DEFAULT_X_GRID,
};
pub use describe::describe;

use crate::analytic::{coverage_probability, median_rate_semianalytic, rate_cdf_semianalytic};
use crate::channel::db_to_linear;
use crate::coordination::{densification_savings, guaranteed_rate_curves, write_curves_csv, write_savings_csv, CurveSpec};
use crate::error::{Error, Result};
use crate::montecarlo::{coverage_curve, simulate_typical_rate, ActivityModel, SimSpec};
use crate::planner::{
    area_capacity, log_linear_fit, min_tau_curve, ratio_variation, tradeoff_curve, write_min_tau_csv, Engine, PlannerQuery,
};
use crate::pointprocess::{Point, Window};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub engine: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub name: String,
    pub file: String,
    pub columns: Vec<String>,
    pub rows: usize,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub artifact_version: String,
    pub experiment: ExperimentKind,
    pub master_seed: u64,
    /// The resolved config; running it again reproduces every CSV.
    pub config: ExperimentConfig,
    /// The config file exactly as read, when the run came from a file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_source: Option<String>,
    pub tables: Vec<TableRecord>,
    pub summary: serde_json::Value,
    pub diagnostics: Vec<String>,
    pub started_unix_s: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub record: ResultRecord,
}

struct Table {
    record: TableRecord,
    csv: Vec<u8>,
}

impl Table {
    fn new(name: &str, provenance: Provenance, csv: Vec<u8>) -> Self {
        let text = String::from_utf8_lossy(&csv);
        let mut lines = text.lines();
        let columns = lines.next().unwrap_or("").split(',').map(str::to_string).collect();
        let rows = lines.count();
        Table {
            record: TableRecord {
                name: name.to_string(),
                file: format!("{name}.csv"),
                columns,
                rows,
                provenance,
            },
            csv,
        }
    }
}

struct Output {
    tables: Vec<Table>,
    summary: serde_json::Value,
    diagnostics: Vec<String>,
}

fn engine_provenance(engine: &Engine) -> Provenance {
    match engine {
        Engine::Semianalytic => Provenance {
            engine: "semianalytic".into(),
            trials: None,
            realizations: None,
        },
        Engine::Montecarlo(mc) => Provenance {
            engine: "montecarlo".into(),
            trials: Some(mc.n_trials),
            realizations: None,
        },
    }
}

fn csv<F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>>(f: F) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Runs a resolved, validated config. Pure apart from the worker pool.
fn execute(c: &ExperimentConfig) -> Result<Output> {
    let params = c.channel_params();
    let seed = c.master_seed;
    let mut diagnostics = Vec::new();
    match c.experiment {
        ExperimentKind::Coverage => {
            let activity = c.activity.unwrap();
            let spec = SimSpec::new(c.lambda_an.unwrap(), c.lambda_ue.unwrap(), params, c.n_trials.unwrap(), seed)
                .with_activity(activity);
            let thetas = c.theta_db_grid.as_deref().unwrap();
            let cov = coverage_curve(&spec, thetas)?;
            let data = csv(|w| {
                use std::io::Write;
                writeln!(w, "theta_db,prob,stderr")?;
                for p in &cov {
                    writeln!(w, "{},{},{}", p.theta_db, p.prob, p.stderr)?;
                }
                Ok(())
            })?;
            let mut summary = json!({ "tau": spec.tau() });
            if activity == ActivityModel::Full {
                let analytic: Vec<f64> = thetas
                    .iter()
                    .map(|&t| coverage_probability(db_to_linear(t), params.alpha, 1.0))
                    .collect::<Result<_>>()?;
                summary["analytic_full_activity"] = json!(analytic);
            }
            let prov = Provenance {
                engine: "montecarlo".into(),
                trials: Some(spec.n_trials),
                realizations: None,
            };
            Ok(Output {
                tables: vec![Table::new("coverage", prov, data)],
                summary,
                diagnostics,
            })
        }
        ExperimentKind::RateCdf => {
            let (lambda_an, lambda_ue) = (c.lambda_an.unwrap(), c.lambda_ue.unwrap());
            let (cdf, prov) = match c.engine.unwrap().kind {
                EngineKind::Montecarlo => {
                    let n = c.n_trials.unwrap();
                    let spec = SimSpec::new(lambda_an, lambda_ue, params, n, seed).with_activity(c.activity.unwrap());
                    let prov = Provenance {
                        engine: "montecarlo".into(),
                        trials: Some(n),
                        realizations: None,
                    };
                    (simulate_typical_rate(&spec)?, prov)
                }
                EngineKind::Semianalytic => (
                    rate_cdf_semianalytic(lambda_an / lambda_ue, &params)?,
                    engine_provenance(&Engine::Semianalytic),
                ),
            };
            let summary = json!({
                "tau": lambda_an / lambda_ue,
                "median_rate": cdf.median()?,
                "outage_mass": cdf.outage_mass(),
            });
            Ok(Output {
                tables: vec![Table::new("rate_cdf", prov, csv(|w| cdf.write_csv(w))?)],
                summary,
                diagnostics,
            })
        }
        ExperimentKind::MinTau => {
            let engine = c.engine.unwrap().engine(seed);
            let [lo, hi] = c.tau_bracket.unwrap();
            let query = PlannerQuery {
                tau_bracket: (lo, hi),
                tolerance: c.tolerance.unwrap(),
                ..PlannerQuery::new(1.0, engine, params)
            };
            let rows = min_tau_curve(&query, c.r0_grid.as_deref().unwrap())?;
            let mut summary = json!({
                "evaluations": rows.iter().map(|(_, m)| m.evaluations).sum::<usize>(),
                "median_rate_at_tau_min": rows.iter().map(|(_, m)| m.median_rate).collect::<Vec<_>>(),
            });
            let pick = |keep: &dyn Fn(f64) -> bool| -> (Vec<f64>, Vec<f64>) {
                rows.iter().filter(|(r, _)| keep(*r)).map(|(r, m)| (*r, m.tau)).unzip()
            };
            let (r_small, t_small) = pick(&|r| r <= 0.05);
            if r_small.len() >= 2 {
                summary["small_rate_ratio_variation"] = json!(ratio_variation(&r_small, &t_small)?);
            }
            let (r_large, t_large) = pick(&|r| r >= 4.0);
            if r_large.len() >= 2 {
                let fit = log_linear_fit(&r_large, &t_large)?;
                summary["large_rate_log_fit"] = json!({ "slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared });
            }
            Ok(Output {
                tables: vec![Table::new(
                    "min_tau",
                    engine_provenance(&engine),
                    csv(|w| write_min_tau_csv(&rows, w))?,
                )],
                summary,
                diagnostics,
            })
        }
        ExperimentKind::Tradeoff => {
            let engine = c.engine.unwrap().engine(seed);
            let curve = tradeoff_curve(
                (c.base_lambda_an.unwrap(), c.base_lambda_ue.unwrap()),
                c.densification_factor.unwrap(),
                c.x_grid.as_deref().unwrap(),
                &engine,
                &params,
            )?;
            let cap = area_capacity(&curve);
            if !curve.is_nonincreasing() {
                diagnostics.push("rate ratio is not nonincreasing in x".into());
            }
            let summary = json!({
                "base_rate": curve.base_rate,
                "strictly_decreasing": curve.is_strictly_decreasing(),
                "area_capacity_argmax_x": cap.argmax_x,
                "area_capacity_max": cap.max_capacity,
            });
            Ok(Output {
                tables: vec![Table::new(
                    "tradeoff",
                    engine_provenance(&engine),
                    csv(|w| curve.write_csv(w))?,
                )],
                summary,
                diagnostics,
            })
        }
        ExperimentKind::CoordEval | ExperimentKind::CoordSavings => {
            let side_m = 1000.0 * c.area_km2.unwrap().sqrt();
            let spec = CurveSpec {
                tau_grid: c.tau_grid.clone().unwrap(),
                n_ues: c.n_ues.unwrap(),
                window: Window::square(Point::ORIGIN, side_m)?,
                params,
                n_rb: c.n_rb.unwrap(),
                n_realizations: c.n_realizations.unwrap(),
                master_seed: seed,
            };
            let curves = guaranteed_rate_curves(&spec, c.policies.as_deref().unwrap())?;
            let prov = Provenance {
                engine: "finite-area".into(),
                trials: None,
                realizations: Some(spec.n_realizations),
            };
            let mut tables = vec![Table::new("coord", prov.clone(), csv(|w| write_curves_csv(&curves, w))?)];
            let mut summary = json!({
                "n_ans": spec.tau_grid.iter().map(|&t| spec.n_ans(t)).collect::<Vec<_>>(),
            });
            if c.experiment == ExperimentKind::CoordSavings {
                let rows = densification_savings(c.target_rates.as_deref().unwrap(), &curves)?;
                for r in &rows {
                    if !(r.savings_pct > 0.0) {
                        diagnostics.push(format!(
                            "{} saves nothing at {} bps/Hz ({:.2}%)",
                            r.policy, r.target_rate, r.savings_pct
                        ));
                    }
                }
                summary["tau_required"] = json!(rows
                    .iter()
                    .map(|r| json!({ "target_rate": r.target_rate, "policy": r.policy, "tau": r.tau_required, "tau_baseline": r.tau_baseline }))
                    .collect::<Vec<_>>());
                tables.push(Table::new("savings", prov, csv(|w| write_savings_csv(&rows, w))?));
            }
            Ok(Output {
                tables,
                summary,
                diagnostics,
            })
        }
    }
}

/// Config with the command-line overrides applied.
pub fn apply_options(mut config: ExperimentConfig, opts: &RunOptions) -> ExperimentConfig {
    if let Some(s) = opts.seed {
        config.master_seed = s;
    }
    if let Some(d) = &opts.output_dir {
        config.output_dir = d.clone();
    }
    config
}

fn run_dir(config: &ExperimentConfig, started: u64) -> Result<PathBuf> {
    let parent = config.output_dir.join(config.experiment.name());
    std::fs::create_dir_all(&parent)?;
    let stem = format!("{started}-{}", config.master_seed);
    for k in 1.. {
        let name = if k == 1 { stem.clone() } else { format!("{stem}-{k}") };
        let dir = parent.join(name);
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!()
}

/// Validates, executes and persists one experiment.
pub fn run_config(config: ExperimentConfig, source: Option<String>, opts: &RunOptions) -> Result<RunOutcome> {
    let config = apply_options(config, opts);
    config.validate()?;
    let config = config.resolved();
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let output = match opts.workers {
        None => execute(&config)?,
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::SimulationFailure(format!("worker pool: {e}")))?;
            pool.install(|| execute(&config))?
        }
    };
    let wall_time_s = clock.elapsed().as_secs_f64();

    let dir = run_dir(&config, started)?;
    for t in &output.tables {
        std::fs::write(dir.join(&t.record.file), &t.csv)?;
    }
    std::fs::write(dir.join("config.toml"), config.to_toml())?;
    let record = ResultRecord {
        artifact_version: ARTIFACT_VERSION.to_string(),
        experiment: config.experiment,
        master_seed: config.master_seed,
        config,
        config_source: source,
        tables: output.tables.into_iter().map(|t| t.record).collect(),
        summary: output.summary,
        diagnostics: output.diagnostics,
        started_unix_s: started,
        wall_time_s,
    };
    let json = serde_json::to_string_pretty(&record).map_err(|e| Error::SimulationFailure(e.to_string()))?;
    std::fs::write(dir.join("result.json"), json)?;
    Ok(RunOutcome { dir, record })
}

pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let (config, text) = ExperimentConfig::load(config_path)?;
    run_config(config, Some(text), opts)
}

/// Outcome of `validate`: `Ok` with the list of violations (empty when the
/// config is fine), `Err` only when the file cannot be read.
pub fn validate(config_path: &Path) -> std::result::Result<Vec<String>, std::io::Error> {
    let text = std::fs::read_to_string(config_path)?;
    let config = match ExperimentConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => return Ok(vec![e.to_string()]),
    };
    let mut v = config.violations();
    if v.is_empty() {
        v.extend(cross_checks(&config.resolved()));
    }
    Ok(v)
}

/// Checks that need a cheap evaluation: with the semianalytic engine the
/// `min-tau` bracket must straddle every target.
fn cross_checks(c: &ExperimentConfig) -> Vec<String> {
    let mut v = Vec::new();
    if c.experiment == ExperimentKind::MinTau && c.engine.map(|e| e.kind) == Some(EngineKind::Semianalytic) {
        let params = c.channel_params();
        let [lo, hi] = c.tau_bracket.unwrap();
        match (median_rate_semianalytic(lo, &params), median_rate_semianalytic(hi, &params)) {
            (Ok(r_lo), Ok(r_hi)) => {
                for &r0 in c.r0_grid.as_deref().unwrap() {
                    if !(r_lo <= r0 && r0 <= r_hi) {
                        v.push(format!(
                            "tau_bracket [{lo}, {hi}] does not straddle r0 = {r0} (median rates {r_lo} .. {r_hi})"
                        ));
                    }
                }
            }
            (Err(e), _) | (_, Err(e)) => v.push(format!("tau_bracket endpoints: {e}")),
        }
    }
    v
}
