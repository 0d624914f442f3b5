//! Experiment configuration files.
//!
//! A config is a plain-text file of `key = value` lines grouped under `[section]`
//! headers. `#` starts a comment. Unknown sections and keys are rejected, as are
//! repeated keys. Relative paths are resolved against the config file's directory.
//!
//! ```text
//! [data]
//! prices = spx.csv
//! contracts = spx_options.csv
//!
//! [instrument]
//! kind = option
//! train_rows = 720
//!
//! [model]
//! model = gan-mc
//! window_len = 128
//!
//! [run]
//! seed = 7
//! output = report.csv
//! ```

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::baselines::Regime;
use crate::error::{Error, Result};
use crate::gan::{CollapseThresholds, GanConfig};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstrumentKind {
    Option,
    EquityFutures,
    Commodity,
}

impl fmt::Display for InstrumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstrumentKind::Option => "option",
            InstrumentKind::EquityFutures => "equity-futures",
            InstrumentKind::Commodity => "commodity",
        })
    }
}

impl FromStr for InstrumentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "option" => Ok(InstrumentKind::Option),
            "equity-futures" => Ok(InstrumentKind::EquityFutures),
            "commodity" => Ok(InstrumentKind::Commodity),
            _ => Err(Error::InvalidConfig(format!(
                "unknown instrument kind `{s}` (expected option, equity-futures or commodity)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    GanMc,
    Mc,
    Bs,
    Lr,
    LrItm,
    LrOtm,
}

impl ModelKind {
    pub fn regime(self) -> Option<Regime> {
        match self {
            ModelKind::Lr => Some(Regime::All),
            ModelKind::LrItm => Some(Regime::InTheMoney),
            ModelKind::LrOtm => Some(Regime::OutOfTheMoney),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::GanMc => "gan-mc",
            ModelKind::Mc => "mc",
            ModelKind::Bs => "bs",
            ModelKind::Lr => "lr",
            ModelKind::LrItm => "lr-itm",
            ModelKind::LrOtm => "lr-otm",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gan-mc" => Ok(ModelKind::GanMc),
            "mc" => Ok(ModelKind::Mc),
            "bs" => Ok(ModelKind::Bs),
            "lr" => Ok(ModelKind::Lr),
            "lr-itm" => Ok(ModelKind::LrItm),
            "lr-otm" => Ok(ModelKind::LrOtm),
            _ => Err(Error::InvalidConfig(format!(
                "unknown model `{s}` (expected gan-mc, mc, bs, lr, lr-itm or lr-otm)"
            ))),
        }
    }
}

/// Drift used by the GBM Monte Carlo baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McDrift {
    /// `ln(X/s)/τ` for options, the historical estimate otherwise.
    Strike,
    RiskNeutral,
    Historical,
}

impl fmt::Display for McDrift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            McDrift::Strike => "strike",
            McDrift::RiskNeutral => "risk-neutral",
            McDrift::Historical => "historical",
        })
    }
}

impl FromStr for McDrift {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strike" => Ok(McDrift::Strike),
            "risk-neutral" => Ok(McDrift::RiskNeutral),
            "historical" => Ok(McDrift::Historical),
            _ => Err(Error::InvalidConfig(format!(
                "unknown mc_drift `{s}` (expected strike, risk-neutral or historical)"
            ))),
        }
    }
}

/// GAN hyperparameters as written in a config.
#[derive(Debug, Clone, PartialEq)]
pub struct GanSettings {
    pub noise_dim: usize,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub epochs: usize,
    /// Epochs of the collapse probe run during the stride search.
    pub probe_epochs: usize,
    pub batch_size: usize,
    pub lr_generator: f64,
    pub lr_discriminator: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub loss_floor: f64,
    pub min_sample_std: f64,
    pub collapse_epochs: usize,
    pub real_label: f64,
}

impl Default for GanSettings {
    fn default() -> Self {
        let g = GanConfig::<f64>::new(1);
        Self {
            noise_dim: g.noise_dim,
            generator_hidden: g.generator_hidden,
            discriminator_hidden: g.discriminator_hidden,
            epochs: g.epochs,
            probe_epochs: g.epochs,
            batch_size: g.batch_size,
            lr_generator: g.lr_generator,
            lr_discriminator: g.lr_discriminator,
            beta1: g.beta1,
            beta2: g.beta2,
            adam_eps: g.adam_eps,
            loss_floor: g.collapse.loss_floor,
            min_sample_std: g.collapse.min_sample_std,
            collapse_epochs: g.collapse.patience,
            real_label: g.real_label,
        }
    }
}

impl GanSettings {
    pub fn to_gan_config<S: Scalar>(&self, window_len: usize, epochs: usize, seed: u64) -> GanConfig<S> {
        GanConfig {
            noise_dim: self.noise_dim,
            window_len,
            generator_hidden: self.generator_hidden.clone(),
            discriminator_hidden: self.discriminator_hidden.clone(),
            epochs,
            batch_size: self.batch_size,
            lr_generator: S::lit(self.lr_generator),
            lr_discriminator: S::lit(self.lr_discriminator),
            beta1: S::lit(self.beta1),
            beta2: S::lit(self.beta2),
            adam_eps: S::lit(self.adam_eps),
            seed,
            scale: None,
            collapse: CollapseThresholds {
                loss_floor: S::lit(self.loss_floor),
                min_sample_std: S::lit(self.min_sample_std),
                patience: self.collapse_epochs,
            },
            real_label: S::lit(self.real_label),
            probe_size: GanConfig::<S>::new(window_len).probe_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub prices: PathBuf,
    pub dividends: Option<PathBuf>,
    pub quotes: Option<PathBuf>,
    pub contracts: Option<PathBuf>,

    pub kind: InstrumentKind,
    pub symbol: String,
    /// Leading contract rows used to fit regressions; the rest are priced.
    pub train_rows: usize,

    pub model: ModelKind,
    pub window_len: usize,
    pub min_train_windows: usize,
    pub n_samples: usize,
    pub carry_window: usize,
    pub alpha: f64,
    pub rate: f64,
    pub dt: f64,
    /// Fixed volatility for the `bs` and `mc` baselines; estimated from history when unset.
    pub volatility: Option<f64>,
    pub mc_drift: McDrift,

    pub gan: GanSettings,

    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            prices: PathBuf::new(),
            dividends: None,
            quotes: None,
            contracts: None,
            kind: InstrumentKind::Option,
            symbol: String::new(),
            train_rows: 0,
            model: ModelKind::GanMc,
            window_len: 128,
            min_train_windows: 290,
            n_samples: 5120,
            carry_window: 50,
            alpha: 0.8,
            rate: 0.0,
            dt: 1.0 / 252.0,
            volatility: None,
            mc_drift: McDrift::Strike,
            gan: GanSettings::default(),
            seed: 0,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    /// Parses config text; paths are kept as written.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section = String::new();
        let mut seen = std::collections::HashSet::new();
        let mut has_prices = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| Error::Config { line: line_no, message };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("malformed section header `{line}`")))?
                    .trim();
                if !matches!(name, "data" | "instrument" | "model" | "gan" | "run") {
                    return Err(err(format!("unknown section `[{name}]`")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            if section.is_empty() {
                return Err(err(format!("key `{key}` outside of a section")));
            }
            if !seen.insert(format!("{section}.{key}")) {
                return Err(err(format!("duplicate key `{key}` in [{section}]")));
            }
            if value.is_empty() {
                return Err(err(format!("missing value for `{key}`")));
            }
            let g = &mut cfg.gan;
            let r: std::result::Result<(), String> = match (section.as_str(), key) {
                ("data", "prices") => {
                    has_prices = true;
                    cfg.prices = PathBuf::from(value);
                    Ok(())
                }
                ("data", "dividends") => set(&mut cfg.dividends, Some(PathBuf::from(value))),
                ("data", "quotes") => set(&mut cfg.quotes, Some(PathBuf::from(value))),
                ("data", "contracts") => set(&mut cfg.contracts, Some(PathBuf::from(value))),
                ("instrument", "kind") => parse_into(&mut cfg.kind, value),
                ("instrument", "symbol") => set(&mut cfg.symbol, value.to_string()),
                ("instrument", "train_rows") => parse_into(&mut cfg.train_rows, value),
                ("model", "model") => parse_into(&mut cfg.model, value),
                ("model", "window_len") => parse_into(&mut cfg.window_len, value),
                ("model", "min_train_windows") => parse_into(&mut cfg.min_train_windows, value),
                ("model", "n_samples") => parse_into(&mut cfg.n_samples, value),
                ("model", "carry_window") => parse_into(&mut cfg.carry_window, value),
                ("model", "alpha") => parse_into(&mut cfg.alpha, value),
                ("model", "rate") => parse_into(&mut cfg.rate, value),
                ("model", "dt") => parse_dt(&mut cfg.dt, value),
                ("model", "volatility") => value
                    .parse::<f64>()
                    .map(|v| cfg.volatility = Some(v))
                    .map_err(|e| format!("invalid value `{value}`: {e}")),
                ("model", "mc_drift") => parse_into(&mut cfg.mc_drift, value),
                ("gan", "noise_dim") => parse_into(&mut g.noise_dim, value),
                ("gan", "generator_hidden") => parse_list(&mut g.generator_hidden, value),
                ("gan", "discriminator_hidden") => parse_list(&mut g.discriminator_hidden, value),
                ("gan", "epochs") => parse_into(&mut g.epochs, value),
                ("gan", "probe_epochs") => parse_into(&mut g.probe_epochs, value),
                ("gan", "batch_size") => parse_into(&mut g.batch_size, value),
                ("gan", "lr_generator") => parse_into(&mut g.lr_generator, value),
                ("gan", "lr_discriminator") => parse_into(&mut g.lr_discriminator, value),
                ("gan", "beta1") => parse_into(&mut g.beta1, value),
                ("gan", "beta2") => parse_into(&mut g.beta2, value),
                ("gan", "adam_eps") => parse_into(&mut g.adam_eps, value),
                ("gan", "loss_floor") => parse_into(&mut g.loss_floor, value),
                ("gan", "min_sample_std") => parse_into(&mut g.min_sample_std, value),
                ("gan", "collapse_epochs") => parse_into(&mut g.collapse_epochs, value),
                ("gan", "real_label") => parse_into(&mut g.real_label, value),
                ("run", "seed") => parse_into(&mut cfg.seed, value),
                ("run", "output") => set(&mut cfg.output, Some(PathBuf::from(value))),
                _ => Err(format!("unknown key `{key}` in [{section}]")),
            };
            r.map_err(|m| err(format!("{key}: {m}")))?;
        }
        if !has_prices {
            return Err(Error::Config {
                line: 0,
                message: "missing required key `prices` in [data]".into(),
            });
        }
        if cfg.symbol.is_empty() {
            cfg.symbol = cfg
                .prices
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "UNDERLYING".into());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        if self.window_len < 1 {
            return bad("window_len must be at least 1".into());
        }
        if self.n_samples < 1 {
            return bad("n_samples must be at least 1".into());
        }
        if self.min_train_windows < 1 {
            return bad("min_train_windows must be at least 1".into());
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !self.rate.is_finite() {
            return bad(format!("rate must be finite, got {}", self.rate));
        }
        if let Some(v) = self.volatility {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("volatility must be positive, got {v}"));
            }
        }
        if self.gan.probe_epochs == 0 {
            return bad("probe_epochs must be positive".into());
        }
        self.gan.to_gan_config::<f64>(self.window_len, self.gan.epochs, 0).validate()
    }

    /// Makes relative data and output paths relative to `dir`.
    pub fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        fix(&mut self.prices);
        for p in [&mut self.dividends, &mut self.quotes, &mut self.contracts, &mut self.output]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    /// Config text that parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let path = |p: &Path| p.display().to_string();
        let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "[data]");
        let _ = writeln!(s, "prices = {}", path(&self.prices));
        for (k, v) in [("dividends", &self.dividends), ("quotes", &self.quotes), ("contracts", &self.contracts)] {
            if let Some(p) = v {
                let _ = writeln!(s, "{k} = {}", path(p));
            }
        }
        let _ = writeln!(s, "\n[instrument]");
        let _ = writeln!(s, "kind = {}", self.kind);
        let _ = writeln!(s, "symbol = {}", self.symbol);
        let _ = writeln!(s, "train_rows = {}", self.train_rows);
        let _ = writeln!(s, "\n[model]");
        let _ = writeln!(s, "model = {}", self.model);
        let _ = writeln!(s, "window_len = {}", self.window_len);
        let _ = writeln!(s, "min_train_windows = {}", self.min_train_windows);
        let _ = writeln!(s, "n_samples = {}", self.n_samples);
        let _ = writeln!(s, "carry_window = {}", self.carry_window);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "rate = {}", self.rate);
        let _ = writeln!(s, "dt = {}", self.dt);
        if let Some(v) = self.volatility {
            let _ = writeln!(s, "volatility = {v}");
        }
        let _ = writeln!(s, "mc_drift = {}", self.mc_drift);
        let g = &self.gan;
        let _ = writeln!(s, "\n[gan]");
        let _ = writeln!(s, "noise_dim = {}", g.noise_dim);
        let _ = writeln!(s, "generator_hidden = {}", list(&g.generator_hidden));
        let _ = writeln!(s, "discriminator_hidden = {}", list(&g.discriminator_hidden));
        let _ = writeln!(s, "epochs = {}", g.epochs);
        let _ = writeln!(s, "probe_epochs = {}", g.probe_epochs);
        let _ = writeln!(s, "batch_size = {}", g.batch_size);
        let _ = writeln!(s, "lr_generator = {}", g.lr_generator);
        let _ = writeln!(s, "lr_discriminator = {}", g.lr_discriminator);
        let _ = writeln!(s, "beta1 = {}", g.beta1);
        let _ = writeln!(s, "beta2 = {}", g.beta2);
        let _ = writeln!(s, "adam_eps = {}", g.adam_eps);
        let _ = writeln!(s, "loss_floor = {}", g.loss_floor);
        let _ = writeln!(s, "min_sample_std = {}", g.min_sample_std);
        let _ = writeln!(s, "collapse_epochs = {}", g.collapse_epochs);
        let _ = writeln!(s, "real_label = {}", g.real_label);
        let _ = writeln!(s, "\n[run]");
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some(p) = &self.output {
            let _ = writeln!(s, "output = {}", path(p));
        }
        s
    }
}

fn set<T>(slot: &mut T, value: T) -> std::result::Result<(), String> {
    *slot = value;
    Ok(())
}

fn parse_into<T>(slot: &mut T, value: &str) -> std::result::Result<(), String>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    *slot = value.parse().map_err(|e| format!("invalid value `{value}`: {e}"))?;
    Ok(())
}

/// Accepts a decimal or a fraction such as `1/252`.
fn parse_dt(slot: &mut f64, value: &str) -> std::result::Result<(), String> {
    let invalid = || format!("invalid value `{value}`");
    *slot = match value.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| invalid())?;
            let b: f64 = b.trim().parse().map_err(|_| invalid())?;
            a / b
        }
        None => value.parse().map_err(|_| invalid())?,
    };
    Ok(())
}

fn parse_list(slot: &mut Vec<usize>, value: &str) -> std::result::Result<(), String> {
    *slot = value
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("invalid list `{value}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    Ok(())
}
