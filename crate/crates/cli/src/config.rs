use std::f64::consts::TAU;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use qem::bounds::QeOrder;
use qem::fixtures::FixtureSpec;

use crate::error::CliError;

/// Verification runs for four-dimensional quasi-Einstein metrics.
///
/// Every option may also be given in a TOML file passed with --config:
/// global keys (out, tol, nodes, seed) at the top level and command keys
/// under a table named after the command, e.g. `[bounds]`. Options on the
/// command line override the file.
///
/// Exit codes: 0 pass, 1 usage error, 2 validation or hypothesis failure,
/// 3 numerical failure. QEM_THREADS caps the worker thread count.
#[derive(Debug, Parser)]
#[command(name = "qem", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct Global {
    /// Write the JSON report to this file; the summary then goes to stdout.
    /// Without it the report goes to stdout and the summary to stderr.
    #[arg(long, global = true, value_name = "PATH")]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Tolerance for pass/fail verdicts [default: 1e-6 for verify, 1e-2 for
    /// topology, 1e-7 for ode; unused by bounds]
    #[arg(long, global = true, value_name = "FLOAT")]
    pub tol: Option<f64>,
    /// Gauss-Legendre nodes per axis for curvature integrals [default: fixture-specific]
    #[arg(long, global = true, value_name = "INT")]
    pub nodes: Option<usize>,
    /// Seed for random sample points [default: 0]
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,
    /// TOML file with default values for any option
    #[arg(long, global = true, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form oscillation, diameter, volume and Yamabe estimates
    Bounds(BoundsArgs),
    /// Pointwise residuals of the quasi-Einstein identities on a fixture
    Verify(VerifyArgs),
    /// Euler characteristic, signature and integral checks on a fixture
    Topology(TopologyArgs),
    /// Comparison ODE along a Ricci profile
    Ode(OdeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bounds(_) => "bounds",
            Command::Verify(_) => "verify",
            Command::Topology(_) => "topology",
            Command::Ode(_) => "ode",
        }
    }
}

/// The order `m`, read as a number or `inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Order(pub QeOrder);

impl FromStr for Order {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QeOrder::parse(s).map(Order).map_err(|e| e.to_string())
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Order(QeOrder::Finite(v))),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            QeOrder::Finite(m) => s.serialize_f64(m),
            QeOrder::Soliton => s.serialize_str("inf"),
        }
    }
}

macro_rules! merge_fields {
    ($a:expr, $b:expr; $($f:ident),* $(,)?) => {
        Self { $($f: $a.$f.or($b.$f)),* }
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsArgs {
    /// Order m (> 1), or `inf` for the gradient-soliton limit
    #[arg(long, value_name = "M|inf")]
    pub m: Option<Order>,
    /// Quasi-Einstein constant lambda
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Lower Ricci bound c
    #[arg(long)]
    pub c: Option<f64>,
    /// Upper Ricci bound C
    #[arg(long = "C", value_name = "C")]
    #[serde(rename = "C")]
    pub big_c: Option<f64>,
    /// Oscillation of the potential [default: 0]
    #[arg(long)]
    pub fosc: Option<f64>,
    /// Diameter; enables the mixed estimate and the threshold verdict
    #[arg(long)]
    pub diameter: Option<f64>,
    /// Volume [default: 1]
    #[arg(long)]
    pub vol: Option<f64>,
    /// Integral of |W|^2 [default: 0]
    #[arg(long)]
    pub w2: Option<f64>,
}

impl BoundsArgs {
    pub fn merge(self, file: Self) -> Self {
        merge_fields!(self, file; m, lambda, c, big_c, fosc, diameter, vol, w2)
    }
}

/// Fixture selection shared by `verify` and `topology`.
macro_rules! fixture_args {
    ($(#[$meta:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            /// sphere4, torus4, s2xs2, cp2-fubini-study, perturbed-sphere4 or imported-profile
            #[arg(long)]
            pub fixture: Option<String>,
            /// Sphere radius [default: 1]
            #[arg(long)]
            pub r: Option<f64>,
            /// Torus side length [default: 2 pi]
            #[arg(long)]
            pub side: Option<f64>,
            /// First factor radius of s2xs2 [default: 1]
            #[arg(long)]
            pub r1: Option<f64>,
            /// Second factor radius of s2xs2 [default: 1]
            #[arg(long)]
            pub r2: Option<f64>,
            /// Perturbation size of perturbed-sphere4 [default: 0.01]
            #[arg(long)]
            pub eps: Option<f64>,
            /// Profile CSV for imported-profile
            #[arg(long, value_name = "PATH")]
            pub profile: Option<PathBuf>,
            /// Override the order m of the attached structure [default: fixture's]
            #[arg(long, value_name = "M|inf")]
            pub m: Option<Order>,
            /// Override lambda of the attached structure [default: fixture's]
            #[arg(long)]
            pub lambda: Option<f64>,
            /// Write a per-point CSV dump here
            #[arg(long, value_name = "PATH")]
            pub csv: Option<PathBuf>,
            $($(#[$fm])* pub $field: $ty,)*
        }

        impl $name {
            pub fn merge(self, file: Self) -> Self {
                merge_fields!(self, file; fixture, r, side, r1, r2, eps, profile, m, lambda, csv $(, $field)*)
            }

            pub fn spec(&self) -> Result<FixtureSpec, CliError> {
                fixture_spec(
                    self.fixture.as_deref(),
                    [self.r, self.side, self.r1, self.r2, self.eps],
                    self.profile.as_deref(),
                )
            }
        }
    };
}

fixture_args!(VerifyArgs {
    /// Number of random sample points [default: 100]
    #[arg(long)]
    points: Option<usize>,
});

fixture_args!(TopologyArgs {});

fn fixture_spec(kind: Option<&str>, p: [Option<f64>; 5], profile: Option<&Path>) -> Result<FixtureSpec, CliError> {
    let [r, side, r1, r2, eps] = p;
    let kind = kind.ok_or_else(|| CliError::missing("--fixture"))?;
    Ok(match kind {
        "sphere4" => FixtureSpec::Sphere4 { r: r.unwrap_or(1.0) },
        "torus4" => FixtureSpec::Torus4 {
            side: side.unwrap_or(TAU),
        },
        "s2xs2" => FixtureSpec::S2xS2 {
            r1: r1.unwrap_or(1.0),
            r2: r2.unwrap_or(1.0),
        },
        "cp2-fubini-study" => FixtureSpec::Cp2FubiniStudy,
        "perturbed-sphere4" => FixtureSpec::PerturbedSphere4 {
            eps: eps.unwrap_or(0.01),
        },
        "imported-profile" => FixtureSpec::ImportedProfile {
            path: profile
                .ok_or_else(|| CliError::Usage("imported-profile needs --profile PATH".into()))?
                .to_path_buf(),
        },
        other => {
            return Err(CliError::Usage(format!(
                "unknown fixture `{other}`; expected one of {}",
                FixtureSpec::KINDS.join(", ")
            )))
        }
    })
}

#[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OdeArgs {
    /// Profile CSV with header `s,ric` or `s,ric,f`; replaces the synthetic profile
    #[arg(long, value_name = "PATH")]
    pub profile: Option<PathBuf>,
    /// Synthetic profile shape: constant, linear or oscillating [default: constant]
    #[arg(long)]
    pub shape: Option<String>,
    /// Ricci value at s = 0 (the mean for oscillating) [default: lambda]
    #[arg(long)]
    pub ric: Option<f64>,
    /// Ricci value at s = L for linear [default: --ric]
    #[arg(long)]
    pub ric_end: Option<f64>,
    /// Amplitude for oscillating [default: 0]
    #[arg(long)]
    pub amp: Option<f64>,
    /// Periods over the length for oscillating [default: 1]
    #[arg(long)]
    pub periods: Option<f64>,
    /// Length L of the synthetic profile [default: 1]
    #[arg(long)]
    pub length: Option<f64>,
    /// Sample intervals of the synthetic profile [default: 200]
    #[arg(long)]
    pub intervals: Option<usize>,
    /// Order m (> 0); `inf` is rejected since the ODE needs finite m
    #[arg(long, value_name = "M|inf")]
    pub m: Option<Order>,
    /// Quasi-Einstein constant lambda
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Lower Ricci bound c [default: profile minimum]
    #[arg(long)]
    pub c: Option<f64>,
    /// Upper Ricci bound C [default: profile maximum]
    #[arg(long = "C", value_name = "C")]
    #[serde(rename = "C")]
    pub big_c: Option<f64>,
    /// Write the solution and envelopes as CSV here
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

impl OdeArgs {
    pub fn merge(self, file: Self) -> Self {
        merge_fields!(self, file; profile, shape, ric, ric_end, amp, periods, length, intervals, m, lambda, c, big_c, csv)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    out: Option<PathBuf>,
    tol: Option<f64>,
    nodes: Option<usize>,
    seed: Option<u64>,
    #[serde(default)]
    bounds: BoundsArgs,
    #[serde(default)]
    verify: VerifyArgs,
    #[serde(default)]
    topology: TopologyArgs,
    #[serde(default)]
    ode: OdeArgs,
}

/// Fold the `--config` file (if any) under the command-line values.
pub fn resolve(cli: Cli) -> Result<(Global, Command), CliError> {
    let Cli { global, command } = cli;
    let Some(path) = &global.config else {
        return Ok((global, command));
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let file: ConfigFile =
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    let global = Global {
        out: global.out.or(file.out),
        tol: global.tol.or(file.tol),
        nodes: global.nodes.or(file.nodes),
        seed: global.seed.or(file.seed),
        config: global.config,
    };
    let command = match command {
        Command::Bounds(a) => Command::Bounds(a.merge(file.bounds)),
        Command::Verify(a) => Command::Verify(a.merge(file.verify)),
        Command::Topology(a) => Command::Topology(a.merge(file.topology)),
        Command::Ode(a) => Command::Ode(a.merge(file.ode)),
    };
    Ok((global, command))
}
