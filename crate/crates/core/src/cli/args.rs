use std::fmt;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

use crate::config::LabeledConfig;

/// `q` given as a decimal or as an exact fraction `p/r`.
#[derive(Clone, Debug, PartialEq)]
pub struct QArg {
    pub value: f64,
    pub fraction: Option<(i64, i64)>,
}

impl FromStr for QArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (value, fraction) = match s.split_once('/') {
            Some((p, r)) => {
                let p: i64 = p.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
                let r: i64 = r.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
                if r == 0 {
                    return Err(format!("zero denominator in {s:?}"));
                }
                (p as f64 / r as f64, Some((p, r)))
            }
            None => (s.parse::<f64>().map_err(|_| format!("bad number {s:?}"))?, None),
        };
        if !(value > 0.0 && value < 1.0) {
            return Err(format!("q must lie in (0,1), got {s}"));
        }
        Ok(QArg { value, fraction })
    }
}

impl fmt::Display for QArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.fraction {
            Some((p, r)) => write!(f, "{p}/{r}"),
            None => write!(f, "{}", self.value),
        }
    }
}

impl Serialize for QArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Comma-separated integers.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct IntList(pub Vec<i64>);

impl FromStr for IntList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<i64>().map_err(|_| format!("bad integer {p:?} in {s:?}")))
            .collect::<Result<Vec<_>, _>>()
            .map(IntList)
    }
}

impl IntList {
    pub fn config(&self) -> LabeledConfig {
        LabeledConfig::new(self.0.clone())
    }
}

/// Comma-separated reals.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number {p:?} in {s:?}")))
            .collect::<Result<Vec<_>, _>>()
            .map(FloatList)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Contour,
    Mc,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "qtazrp", version, about = "Solvers for the multi-species q-TAZRP")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format (tables default to csv, everything else to json).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct McArgs {
    /// Monte Carlo replicas.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Master seed of the replica streams.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ContourArgs {
    /// Trapezoid nodes per circle (default: chosen from the contour geometry).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// `auto`, a JSON contour specification, or a path to one.
    #[arg(long, default_value = "auto")]
    pub contour: String,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// One trajectory of the labeled process.
    Simulate {
        #[arg(long, allow_hyphen_values = true)]
        x: IntList,
        #[arg(long)]
        q: QArg,
        /// Continuous time horizon.
        #[arg(long, conflicts_with = "steps", required_unless_present = "steps")]
        t: Option<f64>,
        /// Number of embedded-chain jumps instead of a time horizon.
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Replica stream of the seed.
        #[arg(long, default_value_t = 0)]
        replica: u64,
    },
    /// `P_x(X(t) <= y)`.
    Cdf {
        #[arg(long, allow_hyphen_values = true)]
        x: IntList,
        #[arg(long, allow_hyphen_values = true)]
        y: IntList,
        #[arg(long)]
        q: QArg,
        #[arg(long)]
        t: f64,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        contour: ContourArgs,
    },
    /// Probability that the embedded chain from x visits y.
    Hitprob {
        #[arg(long, allow_hyphen_values = true)]
        x: IntList,
        #[arg(long, allow_hyphen_values = true)]
        y: IntList,
        #[arg(long)]
        q: Option<QArg>,
        /// Report the exact rational function of q.
        #[arg(long)]
        symbolic: bool,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Joint q-moment of the step initial condition.
    Qmoment {
        /// Particles of each species.
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        /// Thresholds M_1 >= M_2 >= ...
        #[arg(long = "M", allow_hyphen_values = true)]
        m: IntList,
        #[arg(long)]
        q: QArg,
        #[arg(long)]
        t: f64,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        contour: ContourArgs,
    },
    /// Compare the dual finite-system probability with the contour q-moment.
    Duality {
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        #[arg(long = "M", allow_hyphen_values = true)]
        m: IntList,
        #[arg(long)]
        q: QArg,
        #[arg(long)]
        t: f64,
        #[command(flatten)]
        contour: ContourArgs,
    },
    /// Randomized contour-integral identity suite.
    ContourCheck {
        #[arg(long, default_value = "0.6")]
        q: QArg,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Number of randomized parameter sets.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        /// First seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare two start/target pairs.
    ShiftVerify {
        #[arg(long, allow_hyphen_values = true)]
        x: IntList,
        #[arg(long, allow_hyphen_values = true)]
        y: IntList,
        #[arg(long, allow_hyphen_values = true)]
        x2: IntList,
        #[arg(long, allow_hyphen_values = true)]
        y2: IntList,
        #[arg(long, default_value = "0.3,0.6")]
        qs: FloatList,
        #[arg(long, default_value = "0.5,2")]
        ts: FloatList,
        /// Also compare the exact hitting probabilities.
        #[arg(long)]
        symbolic: bool,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Diffusive-scaling limit of the joint q-moment.
    Asymptotic {
        #[arg(long, allow_hyphen_values = true)]
        sigma: FloatList,
        #[arg(long)]
        q: QArg,
        /// Values of L for the finite-L comparison.
        #[arg(long = "finite-L")]
        finite_l: Option<FloatList>,
    },
    /// Monte Carlo estimate of the reference CDF table.
    Table {
        #[arg(long, default_value = "0.6")]
        q: QArg,
        #[arg(long, default_value_t = 2.0)]
        t: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}
