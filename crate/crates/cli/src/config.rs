//! Flat `key=value` run configuration.
//!
//! Precedence, lowest first: built-in defaults, the `--config` file, then
//! command-line flags. A run manifest is itself a valid configuration file,
//! so `--config <out>/manifest.txt` repeats a run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use htsbayes::model::{MuPrior, PriorConfig};
use htsbayes::preprocess::{EdgeMode, PreprocessConfig};
use htsbayes::sampler::{AlphaUpdate, DofUpdate, InitStrategy, SamplerConfig};
use htsbayes::simgen::{Method, Preset, Scenario};
use thiserror::Error;

/// Version stamped into every manifest. Bump when any emitted file changes
/// layout.
pub const FORMAT_VERSION: u32 = 1;

/// A problem with the command line or configuration, reported with exit
/// status 2.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Every recognised key with its default. An empty default means unset.
pub const KEYS: &[(&str, &str)] = &[
    // paths
    ("input", ""),
    ("screen", ""),
    ("summary", ""),
    ("truth", ""),
    ("scores", ""),
    ("prior_b", ""),
    ("out", ""),
    // randomness
    ("seed", "1"),
    // prior
    ("prior", "simulation"),
    ("phi1", ""),
    ("phi2", ""),
    ("phi3", ""),
    ("phi4", ""),
    ("phi5", ""),
    ("phi6", ""),
    ("phi7", ""),
    ("phi8", ""),
    ("mu_prior", ""),
    ("dof_lo", "1"),
    ("dof_hi", "100"),
    // sampler
    ("iterations", "40000"),
    ("burn_in", "20000"),
    ("thinning", "1"),
    ("chains", "1"),
    ("proposal_scale_x", "0.25"),
    ("proposal_scale_y", "0.25"),
    ("adapt", "true"),
    ("alpha_update", "joint"),
    ("dof_update", "categorical"),
    ("init", "moments"),
    ("parallel_units", "false"),
    ("trace_units", ""),
    ("snapshot_every", "10"),
    // preprocessing
    ("control_outlier_threshold", "0.5"),
    ("unit_outlier_fraction", "0.02"),
    ("anchor_fraction", "0.5"),
    ("adjust_edges", "true"),
    ("edge_mode", "experiment"),
    ("plate_rows", ""),
    ("plate_cols", ""),
    // simulation
    ("scenario", "s1"),
    ("units", ""),
    ("active", ""),
    ("replicates", ""),
    ("methods", "t,gaussian,zscore"),
    // reporting
    ("fix_rate", ""),
    ("fix_size", ""),
    ("kappa", ""),
    ("table_sizes", "50,100,200"),
    ("table_rates", "0.01,0.05,0.1"),
    ("thresholds", "auto"),
    ("threshold_null_prob", "0.7468"),
    ("threshold_beta_lo", "-0.806"),
    ("threshold_beta_hi", "0.392"),
    ("score_kind", "probability"),
];

/// Manifest-only keys, accepted and ignored when a manifest is read back.
fn is_manifest_key(key: &str) -> bool {
    key == "command" || key.starts_with("count.") || key.starts_with("file.")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            values: KEYS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl RunConfig {
    /// Defaults overlaid with the contents of a configuration file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)
            .with_context(|| format!("in config {}", path.display()))?;
        Ok(cfg)
    }

    /// Apply `key=value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("line {}: expected key=value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k == "format_version" {
                if v != FORMAT_VERSION.to_string() {
                    return Err(usage(format!(
                        "line {}: format_version {v} is not supported (expected {FORMAT_VERSION})",
                        n + 1
                    )));
                }
                continue;
            }
            if is_manifest_key(k) {
                continue;
            }
            self.set(k, v)
                .map_err(|e| usage(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(usage(format!("unknown configuration key {key:?}"))),
        }
    }

    /// Parse `key=value` and apply it.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| usage(format!("expected key=value, got {pair:?}")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("unregistered key {key}"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        self.opt(key)?
            .ok_or_else(|| usage(format!("{key} must be set")))
    }

    /// `None` when the key is empty.
    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        let raw = self.raw(key);
        if raw.is_empty() {
            return Ok(None);
        }
        raw.parse()
            .map(Some)
            .map_err(|_| usage(format!("{key}: cannot parse {raw:?}")))
    }

    /// Comma-separated list; empty gives an empty list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        let raw = self.raw(key);
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| usage(format!("{key}: cannot parse {s:?}")))
            })
            .collect()
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(usage(format!(
                "{key}: expected true or false, got {other:?}"
            ))),
        }
    }

    /// A required input file that must already exist.
    pub fn input_path(&self, key: &str) -> Result<PathBuf> {
        let p = PathBuf::from(self.raw(key));
        if p.as_os_str().is_empty() {
            return Err(usage(format!("{key} must be set")));
        }
        if !p.is_file() {
            return Err(usage(format!("{key}: no such file {}", p.display())));
        }
        Ok(p)
    }

    pub fn out_dir(&self) -> Result<PathBuf> {
        let p = PathBuf::from(self.raw("out"));
        if p.as_os_str().is_empty() {
            return Err(usage("out must be set"));
        }
        Ok(p)
    }

    pub fn seed(&self) -> Result<u64> {
        self.get("seed")
    }

    pub fn prior(&self) -> Result<PriorConfig> {
        let base = match self.raw("prior") {
            "simulation" => PriorConfig::simulation_default(),
            "screen" => PriorConfig::screen_default(),
            other => {
                return Err(usage(format!(
                    "prior: expected simulation or screen, got {other:?}"
                )))
            }
        };
        let mut phi = base.phi();
        for (k, slot) in phi.iter_mut().enumerate() {
            if let Some(v) = self.opt(&format!("phi{}", k + 1))? {
                *slot = v;
            }
        }
        let mu = match self.raw("mu_prior") {
            "" => base.mu,
            spec => parse_mu_prior(spec)?,
        };
        let mut prior = PriorConfig::from_phi(phi, mu).map_err(|e| usage(e.to_string()))?;
        prior.dof.lo = self.get("dof_lo")?;
        prior.dof.hi = self.get("dof_hi")?;
        prior.validate().map_err(|e| usage(e.to_string()))?;
        Ok(prior)
    }

    pub fn sampler(&self) -> Result<SamplerConfig> {
        let cfg = SamplerConfig {
            total_iterations: self.get("iterations")?,
            burn_in: self.get("burn_in")?,
            thinning: self.get("thinning")?,
            chain_count: self.get("chains")?,
            seed: self.seed()?,
            proposal_scale_x: self.get("proposal_scale_x")?,
            proposal_scale_y: self.get("proposal_scale_y")?,
            adapt_proposals: self.flag("adapt")?,
            alpha_update: match self.raw("alpha_update") {
                "joint" => AlphaUpdate::Joint,
                "scalar" => AlphaUpdate::Scalar,
                other => return Err(usage(format!("alpha_update: unknown {other:?}"))),
            },
            dof_update: match self.raw("dof_update") {
                "categorical" => DofUpdate::Categorical,
                "fixed" => DofUpdate::Fixed,
                other => return Err(usage(format!("dof_update: unknown {other:?}"))),
            },
            init: match self.raw("init") {
                "moments" => InitStrategy::Moments,
                "overdispersed" => InitStrategy::Overdispersed,
                other => return Err(usage(format!("init: unknown {other:?}"))),
            },
            fixed: Default::default(),
            parallel_units: self.flag("parallel_units")?,
            trace_units: self.list("trace_units")?,
            snapshot_every: match self.get::<usize>("snapshot_every")? {
                0 => None,
                k => Some(k),
            },
        };
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        Ok(cfg)
    }

    pub fn preprocess(&self) -> Result<PreprocessConfig> {
        Ok(PreprocessConfig {
            control_outlier_threshold: self.get("control_outlier_threshold")?,
            unit_outlier_fraction: self.get("unit_outlier_fraction")?,
            anchor_fraction: self.get("anchor_fraction")?,
            adjust_edges: self.flag("adjust_edges")?,
            edge_mode: match self.raw("edge_mode") {
                "experiment" => EdgeMode::Experiment,
                "plate" => EdgeMode::PerPlate,
                other => return Err(usage(format!("edge_mode: unknown {other:?}"))),
            },
        })
    }

    /// Plate geometry when both dimensions are given.
    pub fn geometry(&self) -> Result<Option<(usize, usize)>> {
        match (self.opt("plate_rows")?, self.opt("plate_cols")?) {
            (Some(r), Some(c)) => Ok(Some((r, c))),
            (None, None) => Ok(None),
            _ => Err(usage("plate_rows and plate_cols must be set together")),
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let preset = Preset::parse(self.raw("scenario")).ok_or_else(|| {
            usage(format!(
                "scenario: expected s1, s2 or s3, got {:?}",
                self.raw("scenario")
            ))
        })?;
        let mut s = Scenario::preset(preset).with_seed(self.seed()?);
        if let Some(u) = self.opt("units")? {
            s.units = u;
        }
        if let Some(a) = self.opt("active")? {
            s.active = a;
        }
        if let Some(j) = self.opt("replicates")? {
            s.replicates = j;
        }
        s.validate().map_err(|e| usage(e.to_string()))?;
        Ok(s)
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        let raw: Vec<String> = self.list("methods")?;
        if raw.is_empty() {
            return Err(usage("methods must name at least one method"));
        }
        raw.iter()
            .map(|m| Method::parse(m).ok_or_else(|| usage(format!("methods: unknown {m:?}"))))
            .collect()
    }

    /// Every key in sorted order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

/// `uniform:LO:HI` or `scaled_beta:SHAPE1:SHAPE2:LO:HI`.
pub fn parse_mu_prior(spec: &str) -> Result<MuPrior> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| usage(format!("mu_prior: cannot parse {s:?}")))
    };
    match parts.as_slice() {
        ["uniform", lo, hi] => Ok(MuPrior::Uniform {
            lo: num(lo)?,
            hi: num(hi)?,
        }),
        ["scaled_beta", s1, s2, lo, hi] => Ok(MuPrior::ScaledBeta {
            shape1: num(s1)?,
            shape2: num(s2)?,
            lo: num(lo)?,
            hi: num(hi)?,
        }),
        _ => Err(usage(format!(
            "mu_prior: expected uniform:LO:HI or scaled_beta:S1:S2:LO:HI, got {spec:?}"
        ))),
    }
}

/// Record of one run: the resolved configuration, per-stage counts and the
/// files written.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub command: String,
    pub config: RunConfig,
    pub counts: Vec<(String, String)>,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            command: command.to_string(),
            config: config.clone(),
            counts: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn count(&mut self, key: &str, value: impl ToString) {
        self.counts.push((key.to_string(), value.to_string()));
    }

    pub fn file(&mut self, name: &str) {
        self.files.push(name.to_string());
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "format_version={FORMAT_VERSION}");
        let _ = writeln!(s, "command={}", self.command);
        s.push_str(&self.config.to_text());
        for (k, v) in &self.counts {
            let _ = writeln!(s, "count.{k}={v}");
        }
        for (k, f) in self.files.iter().enumerate() {
            let _ = writeln!(s, "file.{k}={f}");
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.txt");
        std::fs::write(&path, self.to_text()).with_context(|| format!("writing {}", path.display()))
    }
}
