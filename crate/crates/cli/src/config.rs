//! Run configuration: plain-text `key = value` files overridden by
//! command-line flags, with the `VLAB_SEED` environment variable as the
//! default-seed fallback.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use volterra_core::grid::{SampledFunction, UniformGrid};
use volterra_core::kernels::KernelModel;

/// A usage/config problem; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub type ConfigResult<T> = Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> ConfigResult<T> {
    Err(ConfigError(msg.into()))
}

/// Every key the configuration understands, with its parsed-type label.
const KNOWN_KEYS: &[(&str, &str)] = &[
    ("family", "string: stationary-fbm | levy-fbm | multifractional"),
    ("hurst", "float in (0,1)"),
    ("hurst-csv", "path to a t,H CSV (multifractional)"),
    ("alpha", "float (multifractional regularity)"),
    ("n", "positive integer"),
    ("horizon", "positive float"),
    ("seed", "unsigned integer"),
    ("paths", "unsigned integer"),
    ("mc-paths", "unsigned integer"),
    ("workers", "positive integer"),
    ("out", "output directory"),
    ("levels", "comma-separated dyadic level list"),
    ("f", "square | cube | cos"),
    ("g", "one | linear | id | square | cos"),
    ("upto", "float, integration endpoint T"),
    ("grid-points", "positive integer"),
    ("quad-panels", "positive integer"),
    ("lags", "comma-separated positive integers"),
    ("format", "per-path | long"),
    ("quick", "boolean"),
];

/// Raw key/value store after file + flag merging, plus provenance for
/// error messages.
#[derive(Debug, Default, Clone)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn load_file(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        let mut unknown = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!(
                    "{}:{}: expected `key = value`, got `{line}`",
                    path.display(),
                    lineno + 1
                ));
            };
            let key = normalize_key(key.trim());
            if !KNOWN_KEYS.iter().any(|(k, _)| *k == key) {
                unknown.push(key);
                continue;
            }
            values.insert(key, value.trim().to_string());
        }
        if !unknown.is_empty() {
            return err(format!(
                "unknown config keys: {}",
                unknown.join(", ")
            ));
        }
        Ok(Self { values })
    }

    pub fn set(&mut self, key: &str, value: String) -> ConfigResult<()> {
        let key = normalize_key(key);
        if !KNOWN_KEYS.iter().any(|(k, _)| *k == key) {
            return err(format!("unknown option `{key}`"));
        }
        self.values.insert(key, value);
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, what: &str) -> ConfigResult<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                ConfigError(format!("key `{key}`: expected {what}, got `{raw}`"))
            }),
        }
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('_', "-")
}

/// Fully resolved configuration for one command invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub family: String,
    pub hurst: f64,
    pub hurst_csv: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub n: usize,
    pub horizon: f64,
    pub seed: u64,
    pub paths: u64,
    pub mc_paths: u64,
    pub workers: usize,
    pub out: PathBuf,
    pub levels: Option<Vec<usize>>,
    pub test_function: String,
    pub integrand: String,
    pub upto: Option<f64>,
    pub grid_points: usize,
    pub quad_panels: usize,
    pub lags: Vec<usize>,
    pub format: String,
    pub quick: bool,
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> ConfigResult<Self> {
        let seed = match raw.parse::<u64>("seed", "unsigned integer")? {
            Some(s) => s,
            None => match std::env::var("VLAB_SEED") {
                Ok(v) => v
                    .parse::<u64>()
                    .map_err(|_| ConfigError(format!("VLAB_SEED: expected unsigned integer, got `{v}`")))?,
                Err(_) => 0,
            },
        };
        let cfg = Self {
            family: raw.get("family").unwrap_or("stationary-fbm").to_string(),
            hurst: raw.parse("hurst", "float")?.unwrap_or(0.7),
            hurst_csv: raw.get("hurst-csv").map(PathBuf::from),
            alpha: raw.parse("alpha", "float")?,
            n: raw.parse("n", "positive integer")?.unwrap_or(256),
            horizon: raw.parse("horizon", "positive float")?.unwrap_or(1.0),
            seed,
            paths: raw.parse("paths", "unsigned integer")?.unwrap_or(4),
            mc_paths: raw.parse("mc-paths", "unsigned integer")?.unwrap_or(2000),
            workers: raw.parse("workers", "positive integer")?.unwrap_or(1),
            out: PathBuf::from(raw.get("out").unwrap_or(".")),
            levels: match raw.get("levels") {
                None => None,
                Some(s) => Some(parse_list::<usize>(s, "levels")?),
            },
            test_function: raw.get("f").unwrap_or("square").to_string(),
            integrand: raw.get("g").unwrap_or("id").to_string(),
            upto: raw.parse("upto", "float")?,
            grid_points: raw.parse("grid-points", "positive integer")?.unwrap_or(8),
            quad_panels: raw.parse("quad-panels", "positive integer")?.unwrap_or(2048),
            lags: match raw.get("lags") {
                None => vec![1, 2, 4, 8, 16],
                Some(s) => parse_list::<usize>(s, "lags")?,
            },
            format: raw.get("format").unwrap_or("per-path").to_string(),
            quick: match raw.get("quick") {
                None => false,
                Some(s) => s
                    .parse::<bool>()
                    .map_err(|_| ConfigError(format!("key `quick`: expected boolean, got `{s}`")))?,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> ConfigResult<()> {
        match self.family.as_str() {
            "stationary-fbm" | "levy-fbm" | "multifractional" => {}
            other => {
                return err(format!(
                    "family must be stationary-fbm, levy-fbm or multifractional, got `{other}`"
                ))
            }
        }
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return err(format!(
                "hurst must lie in the open interval (0,1), got {}",
                self.hurst
            ));
        }
        if self.n < 2 {
            return err(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.horizon > 0.0) {
            return err(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.workers == 0 {
            return err("workers must be at least 1");
        }
        if let Some(levels) = &self.levels {
            if levels.len() < 3 || levels.windows(2).any(|w| w[1] != 2 * w[0]) {
                return err(format!(
                    "levels must be at least 3 dyadically doubling entries, got {levels:?}"
                ));
            }
            if !self.n.is_power_of_two() {
                return err(format!(
                    "n must be a power of two when dyadic levels are requested, got {}",
                    self.n
                ));
            }
        }
        if let Some(p) = &self.hurst_csv {
            if !p.exists() {
                return err(format!("hurst-csv file {} does not exist", p.display()));
            }
        }
        match self.format.as_str() {
            "per-path" | "long" => {}
            other => return err(format!("format must be per-path or long, got `{other}`")),
        }
        Ok(())
    }

    /// Build the kernel model this configuration describes.
    pub fn model(&self) -> ConfigResult<KernelModel> {
        let lift = |e: volterra_core::VolterraError| ConfigError(e.to_string());
        match self.family.as_str() {
            "stationary-fbm" => KernelModel::stationary(self.hurst).map_err(lift),
            "levy-fbm" => KernelModel::levy(self.hurst).map_err(lift),
            "multifractional" => {
                let path = self.hurst_csv.as_ref().ok_or_else(|| {
                    ConfigError("multifractional requires hurst-csv = <file>".into())
                })?;
                let hfn = load_hurst_csv(path)?;
                let alpha = self.alpha.ok_or_else(|| {
                    ConfigError("multifractional requires alpha = <value>".into())
                })?;
                KernelModel::multifractional(hfn, alpha).map_err(lift)
            }
            _ => unreachable!("validated"),
        }
    }

    /// Effective configuration as sorted key → value strings, recorded in
    /// every manifest so outputs are self-describing.
    pub fn describe(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("family".into(), self.family.clone());
        m.insert("hurst".into(), format!("{}", self.hurst));
        if let Some(p) = &self.hurst_csv {
            m.insert("hurst-csv".into(), p.display().to_string());
        }
        if let Some(a) = self.alpha {
            m.insert("alpha".into(), format!("{a}"));
        }
        m.insert("n".into(), self.n.to_string());
        m.insert("horizon".into(), format!("{}", self.horizon));
        m.insert("seed".into(), self.seed.to_string());
        m.insert("paths".into(), self.paths.to_string());
        m.insert("mc-paths".into(), self.mc_paths.to_string());
        m.insert("workers".into(), self.workers.to_string());
        m.insert("out".into(), self.out.display().to_string());
        if let Some(levels) = &self.levels {
            let mut s = String::new();
            for (i, l) in levels.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{l}");
            }
            m.insert("levels".into(), s);
        }
        m.insert("f".into(), self.test_function.clone());
        m.insert("g".into(), self.integrand.clone());
        if let Some(t) = self.upto {
            m.insert("upto".into(), format!("{t}"));
        }
        m.insert("grid-points".into(), self.grid_points.to_string());
        m.insert("quad-panels".into(), self.quad_panels.to_string());
        m.insert(
            "lags".into(),
            self.lags
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        m.insert("format".into(), self.format.clone());
        m.insert("quick".into(), self.quick.to_string());
        m
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, key: &str) -> ConfigResult<Vec<T>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| ConfigError(format!("key `{key}`: bad list entry `{p}`")))
        })
        .collect()
}

/// Read a (t, H(t)) CSV into a sampled Hurst function on a uniform grid.
fn load_hurst_csv(path: &Path) -> ConfigResult<SampledFunction> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut ts = Vec::new();
    let mut hs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('t') {
            continue;
        }
        let mut cols = line.split(',');
        let (Some(t), Some(h)) = (cols.next(), cols.next()) else {
            return err(format!("{}: expected `t,H` rows", path.display()));
        };
        let t: f64 = t
            .trim()
            .parse()
            .map_err(|_| ConfigError(format!("{}: bad t `{t}`", path.display())))?;
        let h: f64 = h
            .trim()
            .parse()
            .map_err(|_| ConfigError(format!("{}: bad H `{h}`", path.display())))?;
        ts.push(t);
        hs.push(h);
    }
    if ts.len() < 3 || ts[0] != 0.0 {
        return err(format!(
            "{}: need at least 3 rows starting at t = 0",
            path.display()
        ));
    }
    let horizon = *ts.last().unwrap();
    let n = ts.len() - 1;
    let grid = UniformGrid::new(n, horizon)
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    for (i, &t) in ts.iter().enumerate() {
        if (t - grid.node(i)).abs() > 1e-9 * horizon {
            return err(format!(
                "{}: rows must be uniformly spaced (row {i} has t = {t})",
                path.display()
            ));
        }
    }
    SampledFunction::new(grid, hs).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

/// Print the known keys for `--help`.
pub fn describe_keys() -> String {
    let mut s = String::new();
    for (k, v) in KNOWN_KEYS {
        let _ = writeln!(s, "  {k:<12} {v}");
    }
    s
}
