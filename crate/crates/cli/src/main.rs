//! `vlab` — command-line laboratory for Gaussian Volterra processes.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 usage or configuration
//! error. Outputs are deterministic for a fixed seed and configuration.

mod commands;
mod config;

use config::{ConfigError, ConfigResult, RawConfig, RunConfig};

const USAGE: &str = "\
vlab — numerical laboratory for Gaussian Volterra processes

USAGE: vlab <command> [--config FILE] [--key value ...]

COMMANDS:
  simulate        draw Brownian/Volterra path bundles, write CSV + manifest
  covariance      tabulate covariance: quadrature vs closed form vs Monte Carlo
  integrate       coupled-level Stratonovich integral estimate (JSON)
  ito-check       chain-rule residual check (refuses hurst < 1/2)
  girsanov-check  pathwise Girsanov shift identity on random integrand pairs
  holder          Hölder-exponent regression on exact-sampler paths
  selftest        deterministic identity battery; --quick skips Monte Carlo

CONFIGURATION:
  A plain-text config file holds `key = value` lines (# comments allowed);
  command-line flags `--key value` override file values. The environment
  variable VLAB_SEED supplies the default seed when none is given. Keys:

";

const FOOTER: &str = "\
Defaults: family stationary-fbm, hurst 0.7, n 256, horizon 1, seed 0,
paths 4, mc-paths 2000, workers 1, out ., f square, g id, grid-points 8,
quad-panels 2048, lags 1,2,4,8,16, format per-path.

EXIT CODES: 0 success · 1 failed verification · 2 usage/config error
";

fn parse_args(args: &[String]) -> ConfigResult<(String, RunConfig)> {
    if args.is_empty() {
        return Err(ConfigError("missing command; try `vlab --help`".into()));
    }
    let command = args[0].clone();
    let mut raw = RawConfig::default();
    let mut flags: Vec<(String, String)> = Vec::new();
    let mut i = 1;
    while i < args.len() {
        let arg = &args[i];
        let Some(key) = arg.strip_prefix("--") else {
            return Err(ConfigError(format!(
                "unexpected positional argument `{arg}`"
            )));
        };
        if key == "quick" && (i + 1 >= args.len() || args[i + 1].starts_with("--")) {
            flags.push(("quick".into(), "true".into()));
            i += 1;
            continue;
        }
        let Some(value) = args.get(i + 1) else {
            return Err(ConfigError(format!("flag --{key} needs a value")));
        };
        flags.push((key.to_string(), value.clone()));
        i += 2;
    }
    // Config file first, then flag overrides.
    if let Some((_, path)) = flags.iter().find(|(k, _)| k == "config") {
        raw = RawConfig::load_file(std::path::Path::new(path))?;
    }
    for (key, value) in &flags {
        if key == "config" {
            continue;
        }
        raw.set(key, value.clone())?;
    }
    Ok((command, RunConfig::from_raw(&raw)?))
}

fn dispatch(command: &str, cfg: &RunConfig) -> ConfigResult<i32> {
    match command {
        "simulate" => commands::simulate(cfg),
        "covariance" => commands::covariance(cfg),
        "integrate" => commands::integrate(cfg),
        "ito-check" => commands::ito_check(cfg),
        "girsanov-check" => commands::girsanov_check(cfg),
        "holder" => commands::holder(cfg),
        "selftest" => commands::selftest(cfg),
        other => Err(ConfigError(format!(
            "unknown command `{other}`; try `vlab --help`"
        ))),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--help" || a == "-h") || args.is_empty() {
        print!("{USAGE}");
        print!("{}", config::describe_keys());
        print!("\n{FOOTER}");
        std::process::exit(if args.is_empty() { 2 } else { 0 });
    }
    let code = match parse_args(&args) {
        Err(e) => {
            eprintln!("vlab: {e}");
            2
        }
        Ok((command, cfg)) => match dispatch(&command, &cfg) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("vlab: {e}");
                2
            }
        },
    };
    std::process::exit(code);
}
