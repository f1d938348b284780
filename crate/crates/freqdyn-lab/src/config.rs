//! Experiment configuration: per-scenario defaults, a `key = value` file format
//! and command-line overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use freqdyn::shift_analysis::DEFAULT_SEED;

use crate::{LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Scenario {
    Quantities,
    ConstructVerify,
    NoCommon,
    DensityGap,
    CtypeDemo,
    DensitiesReport,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Quantities,
        Scenario::ConstructVerify,
        Scenario::NoCommon,
        Scenario::DensityGap,
        Scenario::CtypeDemo,
        Scenario::DensitiesReport,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Quantities => "quantities",
            Scenario::ConstructVerify => "construct_verify",
            Scenario::NoCommon => "no_common",
            Scenario::DensityGap => "density_gap",
            Scenario::CtypeDemo => "ctype_demo",
            Scenario::DensitiesReport => "densities_report",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s.trim())
            .ok_or_else(|| LabError::Config(format!("unknown scenario `{s}`")))
    }
}

/// The sequence `p_k` of the density-gap demo.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PkKind {
    PowersOfTwo,
    Factorials,
}

impl FromStr for PkKind {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        match s.trim() {
            "pow2" => Ok(PkKind::PowersOfTwo),
            "factorial" => Ok(PkKind::Factorials),
            other => Err(LabError::Config(format!(
                "unknown pk kind `{other}` (expected pow2 or factorial)"
            ))),
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub weight: String,
    pub lambda_set: Vec<f64>,
    /// Marks `Λ` as unbounded for the common-vector verdict.
    pub unbounded: bool,
    pub alpha: String,
    pub horizon: u64,
    pub window: (u64, u64),
    pub output_dir: PathBuf,
    pub seed: u64,
    pub p: f64,
    pub norm_t: f64,
    pub pk: PkKind,
    pub levels: u32,
    /// Optional C-type parameter file for `ctype_demo`.
    pub ctype_params: Option<PathBuf>,
}

/// Optional settings from a config file or the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub weight: Option<String>,
    pub lambda_set: Option<Vec<f64>>,
    pub unbounded: Option<bool>,
    pub alpha: Option<String>,
    pub horizon: Option<u64>,
    pub window: Option<(u64, u64)>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub p: Option<f64>,
    pub norm_t: Option<f64>,
    pub pk: Option<PkKind>,
    pub levels: Option<u32>,
    pub ctype_params: Option<PathBuf>,
}

fn bad(key: &str, value: &str) -> LabError {
    LabError::Config(format!("bad value `{value}` for `{key}`"))
}

fn num<T: FromStr>(key: &str, value: &str) -> LabResult<T> {
    value.trim().parse::<T>().map_err(|_| bad(key, value))
}

/// Integers, optionally written as `1e6`.
pub fn parse_count(value: &str) -> Option<u64> {
    let v = value.trim().replace('_', "");
    if let Ok(n) = v.parse::<u64>() {
        return Some(n);
    }
    let f = v.parse::<f64>().ok()?;
    (f >= 0.0 && f.fract() == 0.0 && f < 1.8e19).then_some(f as u64)
}

pub fn parse_list(value: &str) -> Option<Vec<f64>> {
    value
        .split(',')
        .map(|s| s.trim().parse::<f64>().ok())
        .collect()
}

pub fn parse_window(value: &str) -> Option<(u64, u64)> {
    let (a, b) = value.split_once(',')?;
    Some((parse_count(a)?, parse_count(b)?))
}

impl Overrides {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn from_kv_str(text: &str) -> LabResult<Self> {
        let mut o = Overrides::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                LabError::Config(format!("line {}: expected `key = value`", no + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "scenario" => o.scenario = Some(value.parse()?),
                "weight" => o.weight = Some(value.to_string()),
                "lambdas" | "lambda_set" => {
                    o.lambda_set = Some(parse_list(value).ok_or_else(|| bad(key, value))?)
                }
                "unbounded" => o.unbounded = Some(num(key, value)?),
                "alpha" => o.alpha = Some(value.to_string()),
                "horizon" => o.horizon = Some(parse_count(value).ok_or_else(|| bad(key, value))?),
                "window" => o.window = Some(parse_window(value).ok_or_else(|| bad(key, value))?),
                "out" | "output_dir" => o.output_dir = Some(PathBuf::from(value)),
                "seed" => o.seed = Some(num(key, value)?),
                "p" => o.p = Some(num(key, value)?),
                "norm_t" => o.norm_t = Some(num(key, value)?),
                "pk" => o.pk = Some(value.parse()?),
                "levels" => o.levels = Some(num(key, value)?),
                "ctype_params" => o.ctype_params = Some(PathBuf::from(value)),
                other => {
                    return Err(LabError::Config(format!(
                        "line {}: unknown key `{other}`",
                        no + 1
                    )))
                }
            }
        }
        Ok(o)
    }

    /// Fields set in `top` win over fields set in `self`.
    pub fn merged(self, top: Overrides) -> Overrides {
        Overrides {
            scenario: top.scenario.or(self.scenario),
            weight: top.weight.or(self.weight),
            lambda_set: top.lambda_set.or(self.lambda_set),
            unbounded: top.unbounded.or(self.unbounded),
            alpha: top.alpha.or(self.alpha),
            horizon: top.horizon.or(self.horizon),
            window: top.window.or(self.window),
            output_dir: top.output_dir.or(self.output_dir),
            seed: top.seed.or(self.seed),
            p: top.p.or(self.p),
            norm_t: top.norm_t.or(self.norm_t),
            pk: top.pk.or(self.pk),
            levels: top.levels.or(self.levels),
            ctype_params: top.ctype_params.or(self.ctype_params),
        }
    }
}

impl ExperimentConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        let base = ExperimentConfig {
            scenario,
            weight: "const:1".into(),
            lambda_set: vec![2.0, 4.0],
            unbounded: false,
            alpha: "logL:1".into(),
            horizon: 100_000,
            window: (0, 100_000),
            output_dir: PathBuf::from("out"),
            seed: DEFAULT_SEED,
            p: 2.0,
            norm_t: 2.0,
            pk: PkKind::PowersOfTwo,
            levels: 5,
            ctype_params: None,
        };
        match scenario {
            Scenario::Quantities => {
                let h = 7 << 36;
                ExperimentConfig {
                    weight: "fourblock:1,2,3,4".into(),
                    horizon: h,
                    window: (1, h),
                    ..base
                }
            }
            Scenario::ConstructVerify => base,
            Scenario::NoCommon => ExperimentConfig {
                weight: "rational2".into(),
                lambda_set: vec![1.0, 1.7],
                horizon: 2000,
                window: (0, 2000),
                ..base
            },
            Scenario::DensityGap => ExperimentConfig {
                lambda_set: vec![1.0, 2.0],
                horizon: 1_000_000,
                window: (1000, 1_000_000),
                ..base
            },
            Scenario::CtypeDemo => ExperimentConfig {
                horizon: 1000,
                window: (0, 1000),
                ..base
            },
            Scenario::DensitiesReport => ExperimentConfig {
                horizon: 1_000_000,
                window: (1000, 1_000_000),
                ..base
            },
        }
    }

    /// Scenario defaults overridden by `o`. A horizon given without a window
    /// moves the window end along with it.
    pub fn resolve(o: Overrides) -> LabResult<Self> {
        let scenario = o
            .scenario
            .ok_or_else(|| LabError::Config("no scenario given".into()))?;
        let d = Self::defaults(scenario);
        let horizon = o.horizon.unwrap_or(d.horizon);
        let window = o.window.unwrap_or(if o.horizon.is_some() {
            (d.window.0.min(horizon), horizon)
        } else {
            d.window
        });
        let cfg = ExperimentConfig {
            scenario,
            weight: o.weight.unwrap_or(d.weight),
            lambda_set: o.lambda_set.unwrap_or(d.lambda_set),
            unbounded: o.unbounded.unwrap_or(d.unbounded),
            alpha: o.alpha.unwrap_or(d.alpha),
            horizon,
            window,
            output_dir: o.output_dir.unwrap_or(d.output_dir),
            seed: o.seed.unwrap_or(d.seed),
            p: o.p.unwrap_or(d.p),
            norm_t: o.norm_t.unwrap_or(d.norm_t),
            pk: o.pk.unwrap_or(d.pk),
            levels: o.levels.unwrap_or(d.levels),
            ctype_params: o.ctype_params.or(d.ctype_params),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> LabResult<()> {
        let (n0, h) = self.window;
        if n0 > h {
            return Err(LabError::Config(format!(
                "window start {n0} exceeds window end {h}"
            )));
        }
        if h > self.horizon {
            return Err(LabError::Config(format!(
                "window end {h} exceeds horizon {}",
                self.horizon
            )));
        }
        if self.lambda_set.is_empty() {
            return Err(LabError::Config("lambda set is empty".into()));
        }
        if !(self.p >= 1.0) {
            return Err(LabError::Config(format!(
                "p must be at least 1, got {}",
                self.p
            )));
        }
        Ok(())
    }
}
