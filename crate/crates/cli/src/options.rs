//! Command-line options. Every subcommand's options can also come from a
//! TOML file whose tables mirror the subcommand names and whose keys mirror
//! the long flag names; flags win over the file.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::de::{self, Deserializer};
use serde::Deserialize;
use vemstab::vem::parse_number;
use vemstab::{DiffusionTensor, Error, P0Choice, Scheme, TauPolicy};

#[derive(Debug, Parser)]
#[command(
    name = "vemstab",
    version,
    about = "Quadrilateral VEM and isoparametric FEM stabilization experiments"
)]
pub struct Cli {
    /// TOML file with defaults for the subcommand options.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Run everything on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose one quad element into A + tau B and report tau per policy.
    Element(ElementOpts),
    /// Tabulate closed-form against quadrature hourglass energies.
    Tau(TauOpts),
    /// Oscillating boundary data on the unit square for a range of tau.
    Hourglass(HourglassOpts),
    /// Manufactured-solution comparison of isoparametric FEM and VEM.
    Mms(MmsOpts),
    /// Dump the gradient projector of one polygon.
    Project(ProjectOpts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Element(_) => "element",
            Command::Tau(_) => "tau",
            Command::Hourglass(_) => "hourglass",
            Command::Mms(_) => "mms",
            Command::Project(_) => "project",
        }
    }
}

/// Both the flag parser and the config reader produce these values.
macro_rules! text_or_number {
    ($ty:ty, $expecting:literal) => {
        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                struct V;
                impl<'de> de::Visitor<'de> for V {
                    type Value = $ty;
                    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                        f.write_str($expecting)
                    }
                    fn visit_str<E: de::Error>(self, s: &str) -> Result<$ty, E> {
                        s.parse().map_err(E::custom)
                    }
                    fn visit_f64<E: de::Error>(self, v: f64) -> Result<$ty, E> {
                        self.visit_str(&v.to_string())
                    }
                    fn visit_i64<E: de::Error>(self, v: i64) -> Result<$ty, E> {
                        self.visit_str(&v.to_string())
                    }
                    fn visit_u64<E: de::Error>(self, v: u64) -> Result<$ty, E> {
                        self.visit_str(&v.to_string())
                    }
                }
                d.deserialize_any(V)
            }
        }
    };
}

/// A number, possibly written as a fraction such as `2/3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Number(pub f64);

impl FromStr for Number {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_number(s)
            .map(Number)
            .ok_or_else(|| format!("`{s}` is not a number"))
    }
}
text_or_number!(Number, "a number or a fraction string");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyArg(pub TauPolicy);

impl FromStr for PolicyArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(PolicyArg).map_err(|e: Error| e.to_string())
    }
}
text_or_number!(PolicyArg, "a tau policy");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeArg(pub Scheme);

impl FromStr for SchemeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(SchemeArg).map_err(|e: Error| e.to_string())
    }
}
text_or_number!(SchemeArg, "a scheme such as `isofem` or `vem:trace`");

/// `k11,k12,k22`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaArg(pub DiffusionTensor);

impl FromStr for KappaArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| parse_number(p).ok_or_else(|| format!("bad tensor entry `{p}`")))
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [k11, k12, k22] => DiffusionTensor::new(k11, k12, k22)
                .map(KappaArg)
                .map_err(|e| e.to_string()),
            [k] => DiffusionTensor::isotropic(k)
                .map(KappaArg)
                .map_err(|e| e.to_string()),
            _ => Err(format!("expected `k11,k12,k22` or a scalar, got `{s}`")),
        }
    }
}
text_or_number!(KappaArg, "`k11,k12,k22` or a scalar");

/// `x,y;x,y;...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertices(pub Vec<[f64; 2]>);

impl FromStr for Vertices {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let pts = s
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                let xy: Vec<&str> = p.split(',').collect();
                match xy[..] {
                    [x, y] => Ok([
                        parse_number(x).ok_or_else(|| format!("bad coordinate `{x}`"))?,
                        parse_number(y).ok_or_else(|| format!("bad coordinate `{y}`"))?,
                    ]),
                    _ => Err(format!("expected `x,y`, got `{p}`")),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Vertices(pts))
    }
}
text_or_number!(Vertices, "vertices as `x,y;x,y;...`");

/// Output formats, `csv` and/or `vtk`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Vtk,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "vtk" => Ok(Format::Vtk),
            _ => Err(format!("unknown output format `{s}` (expected csv or vtk)")),
        }
    }
}
text_or_number!(Format, "`csv` or `vtk`");

/// Report style for the element and project commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Text,
    Json,
}

impl FromStr for Style {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "text" => Ok(Style::Text),
            "json" => Ok(Style::Json),
            _ => Err(format!("unknown style `{s}` (expected text or json)")),
        }
    }
}
text_or_number!(Style, "`text` or `json`");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct P0Arg(pub P0Choice);

impl FromStr for P0Arg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "vertex" | "vertex_mean" => Ok(P0Arg(P0Choice::VertexMean)),
            "boundary" | "boundary_mean" => Ok(P0Arg(P0Choice::BoundaryMean)),
            _ => Err(format!(
                "unknown P0 choice `{s}` (expected vertex or boundary)"
            )),
        }
    }
}
text_or_number!(P0Arg, "`vertex` or `boundary`");

/// Fills every `None` field of `self` from `file`.
pub trait Merge {
    fn merge(self, file: Self) -> Self;
}

macro_rules! mergeable {
    ($ty:ident { $($field:ident),* $(,)? }) => {
        impl Merge for $ty {
            fn merge(self, file: Self) -> Self {
                $ty { $($field: self.$field.or(file.$field)),* }
            }
        }
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ElementOpts {
    /// Quad vertices, `x,y;x,y;x,y;x,y`.
    #[arg(long, allow_hyphen_values = true)]
    pub vertices: Option<Vertices>,
    /// File with vertices: a JSON array of `[x, y]` or one `x y` per line.
    #[arg(long, conflicts_with = "vertices")]
    pub vertices_file: Option<PathBuf>,
    /// Diffusion tensor `k11,k12,k22` [default: 1,0,1].
    #[arg(long)]
    pub kappa: Option<KappaArg>,
    /// Tau policies [default: trace,fem,rect,para].
    #[arg(long, value_delimiter = ',')]
    pub tau: Option<Vec<PolicyArg>>,
    /// `text` or `json` [default: text].
    #[arg(long)]
    pub style: Option<Style>,
}
mergeable!(ElementOpts {
    vertices,
    vertices_file,
    kappa,
    tau,
    style
});

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TauOpts {
    /// Rectangle `a x b`, e.g. `2x0.5`; repeatable.
    #[arg(long)]
    pub rect: Option<Vec<String>>,
    /// Parallelogram `a,b,theta_degrees`; repeatable.
    #[arg(long)]
    pub para: Option<Vec<String>>,
    /// Diffusion tensor `k11,k12,k22`; repeatable.
    #[arg(long)]
    pub kappa: Option<Vec<KappaArg>>,
    /// Write the table to this CSV file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
mergeable!(TauOpts {
    rect,
    para,
    kappa,
    out
});

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct HourglassOpts {
    /// Cells per side, even [default: 20,40,80].
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Constant tau values [default: 0.01,0.1,1,10,100,2/3].
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<Number>>,
    /// Boundary amplitude [default: 0.25].
    #[arg(long)]
    pub amplitude: Option<Number>,
    /// Interior margin of the metric [default: 0.25].
    #[arg(long)]
    pub margin: Option<Number>,
    /// Cells per side of the reference solution, 0 to skip [default: 160].
    #[arg(long)]
    pub reference_size: Option<usize>,
    /// Skip the isoparametric comparison runs.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub no_fem: Option<bool>,
    /// Solver relative tolerance [default: 1e-10].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory for the CSV table and VTK fields.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output formats written to `--out` [default: csv,vtk].
    #[arg(long, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
}
mergeable!(HourglassOpts {
    sizes,
    taus,
    amplitude,
    margin,
    reference_size,
    no_fem,
    tol,
    out,
    format
});

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct MmsOpts {
    /// Cells per side [default: 10,20,40,80].
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Vertex perturbation as a fraction of the local mesh size [default: 0].
    #[arg(long)]
    pub perturb: Option<Number>,
    /// Perturbation seed [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Schemes, e.g. `isofem,vem:trace,vem:fem` [default: isofem,vem:trace].
    #[arg(long, value_delimiter = ',')]
    pub schemes: Option<Vec<SchemeArg>>,
    /// Solver relative tolerance [default: 1e-10].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory for the CSV table and VTK fields.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output formats written to `--out` [default: csv,vtk].
    #[arg(long, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
}
mergeable!(MmsOpts {
    sizes,
    perturb,
    seed,
    schemes,
    tol,
    out,
    format
});

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ProjectOpts {
    /// Polygon vertices, `x,y;x,y;...`, counter-clockwise.
    #[arg(long, allow_hyphen_values = true)]
    pub vertices: Option<Vertices>,
    /// File with vertices: a JSON array of `[x, y]` or one `x y` per line.
    #[arg(long, conflicts_with = "vertices")]
    pub vertices_file: Option<PathBuf>,
    /// `vertex` or `boundary` [default: vertex].
    #[arg(long)]
    pub p0: Option<P0Arg>,
    /// `text` or `json` [default: text].
    #[arg(long)]
    pub style: Option<Style>,
}
mergeable!(ProjectOpts {
    vertices,
    vertices_file,
    p0,
    style
});

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub element: ElementOpts,
    #[serde(default)]
    pub tau: TauOpts,
    #[serde(default)]
    pub hourglass: HourglassOpts,
    #[serde(default)]
    pub mms: MmsOpts,
    #[serde(default)]
    pub project: ProjectOpts,
}
