//! Resolved run configurations and the flat `key = value` config-file layer.
//!
//! Precedence: command-line flags override config-file values, which override
//! the environment default for the master seed (`REQCSIM_SEED`), which
//! overrides built-in defaults. Unknown file keys are rejected by name.
//! `render()` emits a config file that parses back to the identical
//! configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use reqsim::experiments::CpsVariant;

/// Errors attributable to the invocation itself (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub type UsageResult<T> = Result<T, UsageError>;

/// Parsed `key = value` file contents.
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn empty() -> Self {
        Self {
            values: BTreeMap::new(),
        }
    }

    /// Parse the flat format: one `key = value` per line, `#` comments,
    /// blank lines ignored.
    pub fn parse(text: &str) -> UsageResult<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(UsageError(format!(
                    "config line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(UsageError(format!("config line {}: empty key", lineno + 1)));
            }
            if values.insert(key.clone(), value).is_some() {
                return Err(UsageError(format!("config key `{key}` given twice")));
            }
        }
        Ok(Self { values })
    }

    /// Reject any key outside the allowed set, naming the offender.
    pub fn check_keys(&self, allowed: &[&str]) -> UsageResult<()> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(UsageError(format!("unknown config key `{key}`")));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn parse_value<T: std::str::FromStr>(&self, key: &str) -> UsageResult<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| UsageError(format!("config key `{key}`: malformed value `{raw}`"))),
        }
    }
}

/// Pick the first present source: flag, then file, then default.
pub fn resolve<T>(flag: Option<T>, file: UsageResult<Option<T>>, default: T) -> UsageResult<T> {
    Ok(flag.or(file?).unwrap_or(default))
}

pub fn seed_from_env() -> Option<u64> {
    std::env::var("REQCSIM_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
}

/// Fully resolved fidelity-sweep run.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub variant: CpsVariant,
    pub coupling: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_step: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_step: f64,
    pub output: String,
}

impl SweepConfig {
    pub const FILE_KEYS: &'static [&'static str] = &[
        "variant",
        "coupling",
        "g",
        "delta_min",
        "delta_max",
        "delta_step",
        "omega_min",
        "omega_max",
        "omega_step",
        "output",
    ];

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "variant = {}", self.variant);
        let _ = writeln!(s, "coupling = {}", self.coupling);
        let _ = writeln!(s, "delta_min = {}", self.delta_min);
        let _ = writeln!(s, "delta_max = {}", self.delta_max);
        let _ = writeln!(s, "delta_step = {}", self.delta_step);
        let _ = writeln!(s, "omega_min = {}", self.omega_min);
        let _ = writeln!(s, "omega_max = {}", self.omega_max);
        let _ = writeln!(s, "omega_step = {}", self.omega_step);
        let _ = writeln!(s, "output = {}", self.output);
        s
    }
}

/// Fully resolved cat-parity run.
#[derive(Clone, Debug, PartialEq)]
pub struct CatParityConfig {
    pub n: usize,
    pub phis: Vec<f64>,
    pub delta_width: f64,
    pub omega_width: f64,
    pub g_min: f64,
    pub g_max: f64,
    pub instances: usize,
    pub seed: u64,
    pub output: String,
}

impl CatParityConfig {
    pub const FILE_KEYS: &'static [&'static str] = &[
        "n",
        "phis",
        "delta_width",
        "omega_width",
        "g_min",
        "g_max",
        "instances",
        "seed",
        "output",
    ];

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n = {}", self.n);
        let phis: Vec<String> = self.phis.iter().map(|p| format!("{p}")).collect();
        let _ = writeln!(s, "phis = {}", phis.join(","));
        let _ = writeln!(s, "delta_width = {}", self.delta_width);
        let _ = writeln!(s, "omega_width = {}", self.omega_width);
        let _ = writeln!(s, "g_min = {}", self.g_min);
        let _ = writeln!(s, "g_max = {}", self.g_max);
        let _ = writeln!(s, "instances = {}", self.instances);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "output = {}", self.output);
        s
    }
}

/// Fully resolved yield run.
#[derive(Clone, Debug, PartialEq)]
pub struct YieldConfig {
    pub ion_count: usize,
    pub box_side: f64,
    pub dipole_constant: f64,
    pub channel_probability: f64,
    pub threshold: f64,
    pub angular_factor: bool,
    pub n_values: Vec<usize>,
    pub n_seeds: usize,
    pub seed: u64,
    pub output: String,
}

impl YieldConfig {
    pub const FILE_KEYS: &'static [&'static str] = &[
        "ion_count",
        "box_side",
        "dipole_constant",
        "channel_probability",
        "threshold",
        "angular_factor",
        "n_values",
        "n_seeds",
        "seed",
        "output",
    ];

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ion_count = {}", self.ion_count);
        let _ = writeln!(s, "box_side = {}", self.box_side);
        let _ = writeln!(s, "dipole_constant = {}", self.dipole_constant);
        let _ = writeln!(s, "channel_probability = {}", self.channel_probability);
        let _ = writeln!(s, "threshold = {}", self.threshold);
        let _ = writeln!(s, "angular_factor = {}", self.angular_factor);
        let n_values: Vec<String> = self.n_values.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "n_values = {}", n_values.join(","));
        let _ = writeln!(s, "n_seeds = {}", self.n_seeds);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "output = {}", self.output);
        s
    }
}

/// `start:stop:step` range or explicit comma list of values.
pub fn parse_f64_list(key: &str, raw: &str) -> UsageResult<Vec<f64>> {
    let raw = raw.trim();
    if raw.contains(':') {
        let parts: Vec<&str> = raw.split(':').collect();
        if parts.len() != 3 {
            return Err(UsageError(format!(
                "{key}: expected start:stop:step, got `{raw}`"
            )));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| UsageError(format!("{key}: malformed number `{p}`")))
            })
            .collect::<UsageResult<_>>()?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !step.is_finite() || step <= 0.0 || stop < start {
            return Err(UsageError(format!(
                "{key}: need stop >= start and step > 0 in `{raw}`"
            )));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=count).map(|k| start + k as f64 * step).collect())
    } else {
        raw.split(',')
            .map(|p| {
                let v: f64 = p
                    .trim()
                    .parse()
                    .map_err(|_| UsageError(format!("{key}: malformed number `{p}`")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(UsageError(format!("{key}: non-finite value `{p}`")))
                }
            })
            .collect()
    }
}

pub fn parse_usize_list(key: &str, raw: &str) -> UsageResult<Vec<usize>> {
    raw.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| UsageError(format!("{key}: malformed number `{p}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let f = ConfigFile::parse("a = 1\n# comment\n b = two # trailing\n\n").unwrap();
        assert_eq!(f.get("a"), Some("1"));
        assert_eq!(f.get("b"), Some("two"));
        assert!(ConfigFile::parse("oops").is_err());
        assert!(ConfigFile::parse("a = 1\na = 2").is_err());
    }

    #[test]
    fn unknown_keys_are_named() {
        let f = ConfigFile::parse("bogus = 1").unwrap();
        let err = f.check_keys(&["real"]).unwrap_err();
        assert!(err.0.contains("bogus"));
    }

    #[test]
    fn range_syntax() {
        let v = parse_f64_list("phis", "0:1.0:0.25").unwrap();
        assert_eq!(v.len(), 5);
        assert!((v[4] - 1.0).abs() < 1e-12);
        let v = parse_f64_list("phis", "0.1, 0.2").unwrap();
        assert_eq!(v, vec![0.1, 0.2]);
        assert!(parse_f64_list("phis", "0:1").is_err());
        assert!(parse_f64_list("phis", "a,b").is_err());
    }

    #[test]
    fn render_round_trip() {
        let cfg = SweepConfig {
            variant: CpsVariant::SymmetrizedBb1,
            coupling: 100.0,
            delta_min: -0.05,
            delta_max: 0.05,
            delta_step: 0.0025,
            omega_min: 0.85,
            omega_max: 1.15,
            omega_step: 0.005,
            output: "out.csv".into(),
        };
        let text = cfg.render();
        let file = ConfigFile::parse(&text).unwrap();
        file.check_keys(SweepConfig::FILE_KEYS).unwrap();
        assert_eq!(file.get("coupling"), Some("100"));
        assert_eq!(file.parse_value::<f64>("delta_step").unwrap(), Some(0.0025));
    }
}
