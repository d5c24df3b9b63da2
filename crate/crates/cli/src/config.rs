//! Experiment configuration: one INI section per experiment.
//!
//! ```text
//! [scan]
//! d = 2
//! q = 3, 5, 7, 11, 13
//! pairs = 2 4, 2 3, 2 2
//! seed = 0
//! ```
//!
//! Lists are comma separated. A field with an explicit modulus is written
//! `q:c0 c1 ... cn` with coefficients low to high, e.g. `9:1 0 1`. A pair
//! (p, r) is two exponents separated by a space, e.g. `2 5/2` or `1 inf`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use ini::Ini;
use parlab::field::DEFAULT_GRID_CAP;
use parlab::{Exponent, FieldContext};
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Verify,
    Scan,
    Witness,
    Energy,
    Report,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Verify => "verify",
            Experiment::Scan => "scan",
            Experiment::Witness => "witness",
            Experiment::Energy => "energy",
            Experiment::Report => "report",
        }
    }

    /// The format used when none is configured.
    pub fn default_format(&self) -> OutputFormat {
        match self {
            Experiment::Scan => OutputFormat::Csv,
            Experiment::Report => OutputFormat::Markdown,
            _ => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "markdown" => Ok(OutputFormat::Markdown),
            _ => Err(CliError::Usage(format!("unknown format {s:?}"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Markdown => "markdown",
        })
    }
}

/// Test hooks that corrupt one input on purpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Rotates the phase of the Gauss sum.
    GaussSum,
}

impl FromStr for Fault {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "gauss_sum" => Ok(Fault::GaussSum),
            _ => Err(CliError::Usage(format!("unknown fault_injection {s:?}"))),
        }
    }
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fault::GaussSum => "gauss_sum",
        })
    }
}

/// A field order with an optional explicit modulus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(into = "String")]
pub struct FieldSpec {
    pub q: u32,
    pub modulus: Option<Vec<u32>>,
}

impl FieldSpec {
    pub fn order(q: u32) -> Self {
        FieldSpec { q, modulus: None }
    }

    pub fn build(&self, grid_cap: usize) -> CliResult<FieldContext> {
        let ctx = match &self.modulus {
            None => FieldContext::new(self.q)?,
            Some(m) => {
                let p = prime_factor(self.q);
                let ctx = FieldContext::with_modulus(p, m.clone())?;
                if ctx.q() != self.q {
                    return Err(CliError::Usage(format!("modulus {m:?} does not define a field of order {}", self.q)));
                }
                ctx
            }
        };
        Ok(ctx.with_grid_cap(grid_cap))
    }
}

fn prime_factor(q: u32) -> u32 {
    (2..=q).find(|k| q.is_multiple_of(*k)).unwrap_or(q)
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)?;
        if let Some(m) = &self.modulus {
            let coeffs: Vec<String> = m.iter().map(u32::to_string).collect();
            write!(f, ":{}", coeffs.join(" "))?;
        }
        Ok(())
    }
}

impl From<FieldSpec> for String {
    fn from(f: FieldSpec) -> String {
        f.to_string()
    }
}

impl FromStr for FieldSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let bad = || CliError::Usage(format!("bad field {s:?}"));
        let (q, modulus) = match s.split_once(':') {
            None => (s, None),
            Some((q, m)) => {
                let coeffs =
                    m.split_whitespace().map(|c| c.parse().map_err(|_| bad())).collect::<CliResult<Vec<u32>>>()?;
                (q, Some(coeffs))
            }
        };
        Ok(FieldSpec { q: q.trim().parse().map_err(|_| bad())?, modulus })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub d: Vec<usize>,
    pub q: Vec<FieldSpec>,
    /// (p, r) pairs for scan and witness.
    pub pairs: Vec<(Exponent, Exponent)>,
    /// Subset sizes for energy.
    pub sizes: Vec<usize>,
    pub seed: u64,
    /// Random functions per cell for the transform and extension suites.
    pub samples: usize,
    /// Random functions per cell for the regular-function suites.
    pub machinery_samples: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    /// Random draws per energy search.
    pub trials: usize,
    pub grid_cap: usize,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub fault_injection: Option<Fault>,
}

impl ExperimentConfig {
    /// The desk-scale defaults of each experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let qs = |v: &[u32]| v.iter().map(|&q| FieldSpec::order(q)).collect();
        let pair = |p: Exponent, r: Exponent| (p, r);
        let two = Exponent::int(2);
        let (d, q, pairs, sizes) = match experiment {
            Experiment::Verify => (vec![2, 3, 4], qs(&[3, 5, 7]), vec![], vec![]),
            Experiment::Scan => (
                vec![2],
                qs(&[3, 5, 7, 11, 13]),
                vec![pair(two, Exponent::int(4)), pair(two, Exponent::int(3)), pair(two, two)],
                vec![],
            ),
            Experiment::Witness => (
                vec![5],
                qs(&[3, 7, 11]),
                vec![pair(two, Exponent::ratio(5, 2).expect("5/2 >= 1")), pair(two, Exponent::int(4))],
                vec![],
            ),
            Experiment::Energy => (vec![4], qs(&[3, 5]), vec![], vec![3, 9, 27]),
            Experiment::Report => ((2..=8).collect(), vec![], vec![], vec![]),
        };
        ExperimentConfig {
            experiment,
            d,
            q,
            pairs,
            sizes,
            seed: 0,
            samples: 200,
            machinery_samples: 100,
            restarts: 4,
            max_iter: 200,
            tol: 1e-10,
            trials: 20,
            grid_cap: DEFAULT_GRID_CAP,
            out: None,
            format: None,
            fault_injection: None,
        }
    }

    /// Reads the experiment's section from INI text; missing keys keep their
    /// defaults and a missing section means all defaults.
    pub fn parse(text: &str, experiment: Experiment) -> CliResult<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        let mut cfg = Self::defaults(experiment);
        let Some(section) = ini.section(Some(experiment.name())) else {
            return Ok(cfg);
        };
        for (key, value) in section.iter() {
            let value = value.trim();
            match key {
                "d" => cfg.d = parse_list(value)?,
                "q" => cfg.q = parse_list(value)?,
                "pairs" => cfg.pairs = list_items(value).map(parse_pair).collect::<CliResult<_>>()?,
                "sizes" => cfg.sizes = parse_list(value)?,
                "seed" => cfg.seed = parse_value(key, value)?,
                "samples" => cfg.samples = parse_value(key, value)?,
                "machinery_samples" => cfg.machinery_samples = parse_value(key, value)?,
                "restarts" => cfg.restarts = parse_value(key, value)?,
                "max_iter" => cfg.max_iter = parse_value(key, value)?,
                "tol" => cfg.tol = parse_value(key, value)?,
                "trials" => cfg.trials = parse_value(key, value)?,
                "grid_cap" => cfg.grid_cap = parse_value(key, value)?,
                "out" => cfg.out = Some(PathBuf::from(value)),
                "format" => cfg.format = Some(value.parse()?),
                "fault_injection" => cfg.fault_injection = Some(value.parse()?),
                _ => return Err(CliError::Usage(format!("unknown key {key:?} in [{}]", experiment.name()))),
            }
        }
        Ok(cfg)
    }

    /// Writes every key so that `parse(emit())` gives the config back.
    pub fn emit(&self) -> String {
        let join = |items: Vec<String>| items.join(", ");
        let mut ini = Ini::new();
        let mut s = ini.with_section(Some(self.experiment.name()));
        s.set("d", join(self.d.iter().map(usize::to_string).collect()))
            .set("q", join(self.q.iter().map(FieldSpec::to_string).collect()))
            .set("pairs", join(self.pairs.iter().map(|(p, r)| format!("{p} {r}")).collect()))
            .set("sizes", join(self.sizes.iter().map(usize::to_string).collect()))
            .set("seed", self.seed.to_string())
            .set("samples", self.samples.to_string())
            .set("machinery_samples", self.machinery_samples.to_string())
            .set("restarts", self.restarts.to_string())
            .set("max_iter", self.max_iter.to_string())
            .set("tol", self.tol.to_string())
            .set("trials", self.trials.to_string())
            .set("grid_cap", self.grid_cap.to_string());
        if let Some(out) = &self.out {
            s.set("out", out.display().to_string());
        }
        if let Some(format) = self.format {
            s.set("format", format.to_string());
        }
        if let Some(fault) = self.fault_injection {
            s.set("fault_injection", fault.to_string());
        }
        let mut buf = Vec::new();
        ini.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ini output is UTF-8")
    }

    /// The configured fields, built with the grid cap and any fault applied.
    pub fn fields(&self) -> CliResult<Vec<Arc<FieldContext>>> {
        self.q.iter().map(|spec| Ok(Arc::new(spec.build(self.grid_cap)?))).collect()
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or(self.experiment.default_format())
    }
}

fn list_items(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_list<T: FromStr>(value: &str) -> CliResult<Vec<T>> {
    list_items(value).map(|item| item.parse().map_err(|_| CliError::Usage(format!("bad list item {item:?}")))).collect()
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value.parse().map_err(|_| CliError::Usage(format!("bad value {value:?} for {key}")))
}

fn parse_pair(item: &str) -> CliResult<(Exponent, Exponent)> {
    let parts: Vec<&str> = item.split_whitespace().collect();
    let [p, r] = parts[..] else {
        return Err(CliError::Usage(format!("a pair is written \"p r\", got {item:?}")));
    };
    let parse = |s: &str| s.parse::<Exponent>().map_err(|e| CliError::Usage(format!("bad exponent {s:?}: {e}")));
    Ok((parse(p)?, parse(r)?))
}
