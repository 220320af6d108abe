//! Run configuration: defaults, TOML file, flag overrides and validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use parabola_core::cover::RepeatedMode;
use parabola_core::scale::{DimFnSpec, PsiSpec};
use parabola_core::Rational;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Enumerate,
    Delta,
    Lemma1,
    Cover,
    Tailsum,
    Series,
    Dimension,
    Pointwise,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Enumerate => "enumerate",
            Command::Delta => "delta",
            Command::Lemma1 => "lemma1",
            Command::Cover => "cover",
            Command::Tailsum => "tailsum",
            Command::Series => "series",
            Command::Dimension => "dimension",
            Command::Pointwise => "pointwise",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Specs are written in their compact text form (`pow:3`, `powlog:4;2;1/2`).
mod spec_text {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<T: std::fmt::Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T: Deserialize<'de>, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        T::deserialize(d)
    }
}

fn default_psi() -> PsiSpec {
    PsiSpec::power(Rational::from(3)).expect("valid")
}

fn default_g() -> DimFnSpec {
    DimFnSpec::power(Rational::new(3, 5)).expect("valid")
}

/// Every field has a default; a config file may set any subset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(with = "spec_text")]
    pub psi: PsiSpec,
    #[serde(with = "spec_text")]
    pub g: DimFnSpec,
    pub n_min: u32,
    pub n_max: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a2: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a1: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a0: Option<i64>,
    /// Run over every `(a2, a1)` of the block instead of one pair.
    pub all_pairs: bool,
    /// Write one row per triple in `enumerate`.
    pub list: bool,
    /// Explicit threshold for `delta`; otherwise `ψ(2^n_min)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<Rational>,
    pub out: PathBuf,
    /// Absolute precision `2^-bits` for decimal renderings of exact endpoints.
    pub precision_bits: u32,
    pub threads: usize,
    pub cap_level: u32,
    pub exhaustive_max_level: u32,
    pub sample_budget: u64,
    pub repeated_mode: RepeatedMode,
    pub q_max: u64,
    pub condensation_base: u32,
    pub condensation_levels: u32,
    pub tau: Rational,
    pub stripes: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Rational>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            psi: default_psi(),
            g: default_g(),
            n_min: 2,
            n_max: 4,
            a2: None,
            a1: None,
            a0: None,
            all_pairs: false,
            list: false,
            t: None,
            out: PathBuf::from("out"),
            precision_bits: 64,
            threads: 1,
            cap_level: parabola_core::poly::DEFAULT_LEVEL_CAP,
            exhaustive_max_level: 6,
            sample_budget: 1 << 24,
            repeated_mode: RepeatedMode::Grid,
            q_max: 1_000_000,
            condensation_base: 2,
            condensation_levels: 12,
            tau: Rational::from(4),
            stripes: 16,
            x: None,
        }
    }
}

/// Values given on the command line; `None` keeps the file or default value.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// Approximating function, e.g. `pow:3` or `powlog:3;2;0`.
    #[arg(long)]
    pub psi: Option<String>,
    /// Dimension function, e.g. `pow:3/5` or `powlog:3/5;-1`.
    #[arg(long)]
    pub g: Option<String>,
    /// Single level; sets both `--nmin` and `--nmax`.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub nmin: Option<u32>,
    #[arg(long)]
    pub nmax: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub a2: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a1: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a0: Option<i64>,
    #[arg(long)]
    pub all_pairs: bool,
    #[arg(long)]
    pub list: bool,
    /// Threshold as `num/den`.
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub exhaustive_max_level: Option<u32>,
    #[arg(long)]
    pub sample_budget: Option<u64>,
    /// `grid` or `realized`.
    #[arg(long)]
    pub repeated_mode: Option<String>,
    #[arg(long)]
    pub qmax: Option<u64>,
    #[arg(long)]
    pub condensation_base: Option<u32>,
    #[arg(long)]
    pub condensation_levels: Option<u32>,
    #[arg(long)]
    pub tau: Option<String>,
    #[arg(long)]
    pub stripes: Option<u32>,
    #[arg(long)]
    pub x: Option<String>,
}

/// Flags shared by all subcommands.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct GlobalFlags {
    /// TOML file with any subset of the run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub precision_bits: Option<u32>,
    #[arg(long, global = true)]
    pub cap_level: Option<u32>,
}

fn field<T: FromStr>(name: &str, raw: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    raw.parse().map_err(|e: T::Err| CliError::Config(format!("field `{name}`: {e}")))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides, g: &GlobalFlags) -> Result<(), CliError> {
        if let Some(s) = &o.psi {
            self.psi = field("psi", s)?;
        }
        if let Some(s) = &o.g {
            self.g = field("g", s)?;
        }
        if let Some(n) = o.n {
            self.n_min = n;
            self.n_max = n;
        }
        if let Some(n) = o.nmin {
            self.n_min = n;
        }
        if let Some(n) = o.nmax {
            self.n_max = n;
        }
        self.a2 = o.a2.or(self.a2);
        self.a1 = o.a1.or(self.a1);
        self.a0 = o.a0.or(self.a0);
        self.all_pairs |= o.all_pairs;
        self.list |= o.list;
        if let Some(s) = &o.t {
            self.t = Some(field("t", s)?);
        }
        if let Some(v) = o.exhaustive_max_level {
            self.exhaustive_max_level = v;
        }
        if let Some(v) = o.sample_budget {
            self.sample_budget = v;
        }
        if let Some(s) = &o.repeated_mode {
            self.repeated_mode = match s.as_str() {
                "grid" => RepeatedMode::Grid,
                "realized" => RepeatedMode::Realized,
                _ => return Err(CliError::Config(format!("field `repeated_mode`: expected grid or realized, got {s:?}"))),
            };
        }
        if let Some(v) = o.qmax {
            self.q_max = v;
        }
        if let Some(v) = o.condensation_base {
            self.condensation_base = v;
        }
        if let Some(v) = o.condensation_levels {
            self.condensation_levels = v;
        }
        if let Some(s) = &o.tau {
            self.tau = field("tau", s)?;
        }
        if let Some(v) = o.stripes {
            self.stripes = v;
        }
        if let Some(s) = &o.x {
            self.x = Some(field("x", s)?);
        }
        if let Some(p) = &g.out {
            self.out = p.clone();
        }
        if let Some(v) = g.threads {
            self.threads = v;
        }
        if let Some(v) = g.precision_bits {
            self.precision_bits = v;
        }
        if let Some(v) = g.cap_level {
            self.cap_level = v;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |name: &str, msg: String| Err(CliError::Config(format!("field `{name}`: {msg}")));
        if self.n_min > self.n_max {
            return bad("n_min", format!("{} exceeds n_max = {}", self.n_min, self.n_max));
        }
        if self.threads == 0 || self.threads > 1024 {
            return bad("threads", format!("must lie in [1, 1024], got {}", self.threads));
        }
        if !(8..=4096).contains(&self.precision_bits) {
            return bad("precision_bits", format!("must lie in [8, 4096], got {}", self.precision_bits));
        }
        if self.cap_level > 20 {
            return bad("cap_level", format!("at most 20 is supported, got {}", self.cap_level));
        }
        if self.sample_budget == 0 {
            return bad("sample_budget", "must be positive".into());
        }
        if self.q_max < 2 {
            return bad("q_max", format!("must be at least 2, got {}", self.q_max));
        }
        if self.condensation_base < 2 {
            return bad("condensation_base", format!("must be at least 2, got {}", self.condensation_base));
        }
        if self.stripes == 0 || !self.stripes.is_power_of_two() {
            return bad("stripes", format!("must be a power of two, got {}", self.stripes));
        }
        if let Some(t) = &self.t {
            if !t.is_positive() {
                return bad("t", format!("must be positive, got {t}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = RunConfig::default();
        let text = c.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml(), text);
    }

    #[test]
    fn full_round_trip() {
        let c = RunConfig {
            command: Some(Command::Cover),
            psi: "powlog:3;2,1/2;-1/3".parse().unwrap(),
            g: "powlog:3/5;-1".parse().unwrap(),
            a2: Some(5),
            a1: Some(-3),
            t: Some(Rational::new(1, 64)),
            x: Some(Rational::new(2, 7)),
            repeated_mode: RepeatedMode::Realized,
            ..RunConfig::default()
        };
        let text = c.to_toml();
        assert!(text.contains("psi = \"powlog:3;2,1/2;-1/3\""), "{text}");
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml(), text);
    }

    #[test]
    fn errors_name_field_and_line() {
        let err = RunConfig::from_toml("n_min = 3\npsi = \"pow:-1\"\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("psi") && msg.contains("line 2"), "{msg}");
        let err = RunConfig::from_toml("n_mni = 3\n").unwrap_err().to_string();
        assert!(err.contains("n_mni"), "{err}");
        let mut c = RunConfig::default();
        let o = Overrides { psi: Some("pow:-1".into()), ..Overrides::default() };
        let msg = c.apply(&o, &GlobalFlags::default()).unwrap_err().to_string();
        assert!(msg.contains("`psi`"), "{msg}");
    }

    #[test]
    fn flags_override_file() {
        let mut c = RunConfig::from_toml("n_min = 1\nn_max = 9\nthreads = 2\n").unwrap();
        let o = Overrides { n: Some(4), ..Overrides::default() };
        let g = GlobalFlags { threads: Some(3), ..GlobalFlags::default() };
        c.apply(&o, &g).unwrap();
        assert_eq!((c.n_min, c.n_max, c.threads), (4, 4, 3));
        c.n_min = 5;
        assert!(c.validate().unwrap_err().to_string().contains("n_min"));
    }
}
