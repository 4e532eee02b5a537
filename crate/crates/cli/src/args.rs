use crate::Failure;
use clap::{Args, Parser, Subcommand, ValueEnum};
use symquant_core::linalg::Tolerance;

/// Symplectic normal forms of quadratic Hamiltonians and quantization of
/// lumped-element circuits.
#[derive(Debug, Parser)]
#[command(name = "symquant", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Relative singular-value cutoff for rank decisions.
    #[arg(
        long,
        global = true,
        env = "WILLIAMSON_TOL_RANK",
        default_value_t = 1e-10
    )]
    pub tol_rank: f64,

    /// Scale of the bounds used when verifying normal-form identities.
    #[arg(
        long,
        global = true,
        env = "WILLIAMSON_TOL_VERIFY",
        default_value_t = 1e-9
    )]
    pub tol_verify: f64,

    /// Relative width for grouping degenerate frequencies.
    #[arg(
        long,
        global = true,
        env = "WILLIAMSON_TOL_DEGENERACY",
        default_value_t = 1e-8
    )]
    pub tol_degeneracy: f64,

    #[arg(long, global = true, env = "WILLIAMSON_FORMAT", value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Complete the nondynamical block to canonical pairs.
    #[arg(long, global = true, env = "WILLIAMSON_SYMPLECTIC_W")]
    pub symplectic_w: bool,
}

impl Cli {
    pub fn tolerance(&self) -> Result<Tolerance, Failure> {
        Tolerance::new(self.tol_rank, self.tol_verify, self.tol_degeneracy)
            .map_err(|e| Failure::domain("invalid-tolerance", e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    TwoTier,
    Blackbox,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    LandauZ,
    LandauXy,
    Lcc,
    Blackbox,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Williamson normal form: S, H_D, frequencies, sector counts, residuals.
    Diag(SourceArgs),
    /// Degree-of-freedom classification only.
    Dof(SourceArgs),
    /// Quantized model of a circuit.
    Quantize(QuantizeArgs),
    /// Linear and quadratic constants of motion.
    Invariants(SourceArgs),
    /// Check the normal-form identities and report residuals.
    Verify(SourceArgs),
    /// Print the Hamiltonian of a built-in example.
    Model(ModelArgs),
}

/// Parameters of the built-in examples.
#[derive(Debug, Clone, Args)]
pub struct ModelParams {
    /// Particle mass.
    #[arg(long, default_value_t = 1.0, env = "WILLIAMSON_M")]
    pub m: f64,
    /// Spring constant.
    #[arg(long, default_value_t = 1.0, env = "WILLIAMSON_K")]
    pub k: f64,
    /// Magnetic field.
    #[arg(long, default_value_t = 1.0, env = "WILLIAMSON_B")]
    pub b: f64,
    /// In-plane coupling parameter; sets m = b = 1 and k = chi^2.
    #[arg(long, env = "WILLIAMSON_CHI")]
    pub chi: Option<f64>,
    #[arg(long, default_value_t = 1.0, env = "WILLIAMSON_C1")]
    pub c1: f64,
    #[arg(long, default_value_t = 1.0, env = "WILLIAMSON_C2")]
    pub c2: f64,
    /// Inductance of the series LC-C example.
    #[arg(long, default_value_t = 1.0, env = "WILLIAMSON_L")]
    pub l: f64,
    /// Gyrator rate R/L.
    #[arg(long, default_value_t = 1.0, env = "WILLIAMSON_OMEGA")]
    pub omega: f64,
    /// Coupling-capacitor frequency.
    #[arg(long, default_value_t = 1.0, env = "WILLIAMSON_OMEGA_C")]
    pub omega_c: f64,
    /// Junction-capacitor frequency.
    #[arg(long, default_value_t = 1.0, env = "WILLIAMSON_OMEGA_J")]
    pub omega_j: f64,
    /// Turns ratios n11,n12,n21,n22.
    #[arg(long, value_delimiter = ',', num_args = 4, default_values_t = [1.0, 1.0, 0.0, 1.0])]
    pub turns: Vec<f64>,
    /// L/L_J used to linearize the junctions.
    #[arg(long, env = "WILLIAMSON_LJ_RATIO")]
    pub lj_ratio: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Matrix (.json, .csv) or netlist (.cq) file; `-` reads stdin.
    #[arg(required_unless_present = "model", conflicts_with = "model")]
    pub input: Option<String>,
    /// Use a built-in example instead of a file.
    #[arg(long, value_enum)]
    pub model: Option<Preset>,
    #[command(flatten)]
    pub params: ModelParams,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    #[command(flatten)]
    pub source: Source,
}

#[derive(Debug, Args)]
pub struct QuantizeArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_enum, env = "WILLIAMSON_MODE", default_value_t = Mode::TwoTier)]
    pub mode: Mode,
    /// Allow linearizing junctions on superconducting islands.
    #[arg(long, env = "WILLIAMSON_TRANSMON_OVERRIDE")]
    pub transmon_override: bool,
    /// Largest accepted frequency difference between the two routes.
    #[arg(long, default_value_t = 1e-6)]
    pub max_delta: f64,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long = "model", value_enum, env = "WILLIAMSON_MODEL")]
    pub preset: Preset,
    #[command(flatten)]
    pub params: ModelParams,
}
