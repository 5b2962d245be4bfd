use super::config::{
    ExperimentKind, DEFAULT_DENSIFICATION_FACTOR, DEFAULT_N_RB, DEFAULT_R0_GRID, DEFAULT_TARGET_RATES, DEFAULT_TAU_GRID,
    DEFAULT_THETA_DB_GRID, DEFAULT_X_GRID,
};
use crate::error::Result;

fn list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}

const COMMON: &str = "\
required:
  experiment      experiment name
  master_seed     u64; the only source of randomness
optional:
  output_dir      default \"results\"; --output overrides
  [channel]       alpha, d0_m, fading (\"rayleigh\" | \"none\"), noise_psd_dbm_hz (number | \"off\"),
                  bandwidth_hz, tx_power_dbm, theta0_db (number | \"off\"), n_subchannels
";

const TYPICAL_CHANNEL: &str = "\
  channel defaults: alpha 4, d0_m 1, rayleigh, noise off, 10 MHz, 30 dBm, theta0_db -6, n_subchannels 10
";

const FINITE_CHANNEL: &str = "\
  channel defaults: alpha 4, d0_m 1, rayleigh, noise -174 dBm/Hz over 10 MHz, 30 dBm cap per link, theta0_db off
";

const ENGINE: &str = "\
  [engine]        kind = \"semianalytic\" (default) | \"montecarlo\"
                  montecarlo only: n_trials 10000, lambda_ue 100, slack 0.03
";

/// Schema, defaults and outputs of one experiment.
pub fn describe(name: &str) -> Result<String> {
    let kind = ExperimentKind::parse(name)?;
    let body = match kind {
        ExperimentKind::Coverage => format!(
            "coverage: typical-UE coverage probability P(SIR >= theta) by Monte Carlo.\n\
             Output coverage.csv (theta_db, prob, stderr); result.json adds the closed form under full activity.\n\
             {COMMON}  lambda_an       ANs per km^2, default 100\n\
             \x20 lambda_ue       UEs per km^2, default 100\n\
             \x20 activity        \"full\" (default) | \"load_driven\"\n\
             \x20 theta_db_grid   default {}\n\
             \x20 n_trials        default 100000\n\
             {TYPICAL_CHANNEL}\
             \x20 noise must stay off.\n",
            list(&DEFAULT_THETA_DB_GRID)
        ),
        ExperimentKind::RateCdf => format!(
            "rate-cdf: typical-UE rate distribution at densities (lambda_an, lambda_ue).\n\
             Output rate_cdf.csv (rate_bps_hz, cdf).\n\
             {COMMON}  lambda_an       default 50\n\
             \x20 lambda_ue       default 1000\n\
             \x20 activity        \"load_driven\" (default) | \"full\"\n\
             \x20 [engine]        kind = \"montecarlo\" (default) | \"semianalytic\"\n\
             \x20 n_trials        montecarlo only, default 20000\n\
             {TYPICAL_CHANNEL}"
        ),
        ExperimentKind::MinTau => format!(
            "min-tau: minimum densification ratio tau = lambda_AN / lambda_UE giving the typical UE a target\n\
             median rate r0, for every r0 on a grid.\n\
             Output min_tau.csv (r0, tau_min); result.json adds the small-r0 ratio variation and the\n\
             large-r0 log-linear fit.\n\
             {COMMON}  r0_grid         bps/Hz, default {}\n\
             \x20 tau_bracket     default [0.001, 10000] (semianalytic), [0.01, 100] (montecarlo)\n\
             \x20 tolerance       relative, on the median rate, default 0.01\n\
             {ENGINE}{TYPICAL_CHANNEL}",
            list(&DEFAULT_R0_GRID)
        ),
        ExperimentKind::Tradeoff => format!(
            "tradeoff: densification vs exploitation. AN density grows by densification_factor, UE density\n\
             by x; reports the median-rate ratio y = r0'/r0 and the area capacity lambda_AN' * r0'.\n\
             Output tradeoff.csv (x, rate_ratio, area_capacity).\n\
             {COMMON}  base_lambda_an  default 5\n\
             \x20 base_lambda_ue  default 100\n\
             \x20 densification_factor  default {DEFAULT_DENSIFICATION_FACTOR}\n\
             \x20 x_grid          strictly ascending, default {}\n\
             {ENGINE}{TYPICAL_CHANNEL}",
            list(&DEFAULT_X_GRID)
        ),
        ExperimentKind::CoordEval => format!(
            "coord-eval: mean minimum UE rate of a finite-area network vs tau for the uncoordinated baseline,\n\
             Policy I (interference-aware RB allocation) and Policy II (Policy I plus max-min power control).\n\
             Output coord.csv (tau, policy, mean_min_rate, stderr).\n\
             {}{FINITE_CHANNEL}",
            coord_fields()
        ),
        ExperimentKind::CoordSavings => format!(
            "coord-savings: savings in densification ratio 100 * (1 - tau_policy(g) / tau_baseline(g)) at\n\
             guaranteed-rate targets g.\n\
             Output coord.csv (tau, policy, mean_min_rate, stderr) and savings.csv (target_rate, policy, savings_pct).\n\
             {}\x20 target_rates    bps/Hz, default {}\n\
             {FINITE_CHANNEL}",
            coord_fields(),
            list(&DEFAULT_TARGET_RATES)
        ),
    };
    Ok(body)
}

fn coord_fields() -> String {
    format!(
        "{COMMON}  tau_grid        strictly ascending, default {}\n\
         \x20 n_ues           default 50; each grid point places round(tau * n_ues) ANs\n\
         \x20 area_km2        square area, default 1\n\
         \x20 n_rb            resource blocks, default {DEFAULT_N_RB}\n\
         \x20 n_realizations  default 100\n\
         \x20 policies        default [\"baseline\", \"policy1\", \"policy2\"]\n",
        list(&DEFAULT_TAU_GRID)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tradeoff_mentions_factor_default() {
        assert!(describe("tradeoff").unwrap().contains("densification_factor  default 100"));
    }

    #[test]
    fn savings_mentions_targets() {
        assert!(describe("coord-savings").unwrap().contains("[0.1, 0.5, 1]"));
    }

    #[test]
    fn unknown_name_lists_experiments() {
        let e = describe("foo").unwrap_err().to_string();
        assert!(e.contains("coverage, rate-cdf, min-tau, tradeoff, coord-eval, coord-savings"), "{e}");
    }

    #[test]
    fn every_field_is_described() {
        for k in ExperimentKind::ALL {
            let text = describe(k.name()).unwrap();
            for f in k.fields() {
                assert!(text.contains(f), "{k}: {f}");
            }
        }
    }
}
