use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "diracep",
    version,
    about = "Band structures and degeneracy classification of non-Hermitian matrix models",
    args_override_self = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Eigenvalue clustering tolerance (default 1e-8 * max(1, spectral radius)).
    #[arg(long, global = true)]
    pub tol_degeneracy: Option<f64>,
    /// Relative singular-value cut for numerical rank.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_rank: f64,
    /// Worker threads (default: all cores); results do not depend on it.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// key=value file of long option names; command-line flags take precedence.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Also write a gnuplot script next to a CSV output.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub gnuplot_stub: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Band energies over a one- or two-parameter grid.
    #[command(args_override_self = true)]
    Bands(BandsArgs),
    /// Classify the degeneracy at a parameter point.
    #[command(args_override_self = true)]
    Classify(ClassifyArgs),
    /// Fit the dispersion cone along rays out of a degeneracy.
    #[command(args_override_self = true)]
    Cone(ConeArgs),
    /// Compare the spectra of two families over a grid.
    #[command(args_override_self = true)]
    Isospectral(IsospectralArgs),
    /// Integer versus half-integer perturbation series along a direction.
    #[command(args_override_self = true)]
    Puiseux(PuiseuxArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ModelId {
    #[value(name = "h3")]
    #[serde(rename = "h3")]
    H3,
    #[value(name = "haprime")]
    #[serde(rename = "haprime")]
    HaPrime,
    #[value(name = "hbprime")]
    #[serde(rename = "hbprime")]
    HbPrime,
    #[value(name = "haddprime")]
    #[serde(rename = "haddprime")]
    HaDoublePrime,
    #[value(name = "imagcone")]
    #[serde(rename = "imagcone")]
    ImagCone,
    #[value(name = "bloch")]
    #[serde(rename = "bloch")]
    Bloch,
    #[value(name = "stack_a")]
    #[serde(rename = "stack_a")]
    StackA,
    #[value(name = "stack_b")]
    #[serde(rename = "stack_b")]
    StackB,
    #[value(name = "twoband_first")]
    #[serde(rename = "twoband_first")]
    TwoBandFirst,
    #[value(name = "twoband_second")]
    #[serde(rename = "twoband_second")]
    TwoBandSecond,
    #[value(name = "twoband_hermitian")]
    #[serde(rename = "twoband_hermitian")]
    TwoBandHermitian,
}

/// Model parameters that are not swept.
#[derive(Debug, Args, Serialize)]
pub struct ModelParamsArgs {
    #[arg(long, default_value_t = 1.0)]
    pub v0: f64,
    /// Plane-wave cutoff M of the crystal model (matrix size 2M + 1).
    #[arg(long, default_value_t = 8)]
    pub trunc: usize,
    /// Energy shifts of the block stacks.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 3.0])]
    pub shifts: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelId,
    #[command(flatten)]
    pub params: ModelParamsArgs,
}

/// Inclusive `min:max:count` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl FromStr for RangeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, count] = parts.as_slice() else {
            return Err(format!("expected min:max:count, got {s:?}"));
        };
        let min: f64 = min.trim().parse().map_err(|e| format!("bad min: {e}"))?;
        let max: f64 = max.trim().parse().map_err(|e| format!("bad max: {e}"))?;
        let count: usize = count.trim().parse().map_err(|e| format!("bad count: {e}"))?;
        if count < 2 {
            return Err("a swept axis needs count >= 2".into());
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(format!("need finite min < max, got {min}:{max}"));
        }
        Ok(Self { min, max, count })
    }
}

/// Values for the model's two axes; each axis is fixed or swept.
#[derive(Debug, Args, Serialize)]
pub struct AxisArgs {
    /// Non-Hermiticity tau, fixed.
    #[arg(long, conflicts_with = "tau_range")]
    pub tau: Option<f64>,
    /// Swept as MIN:MAX:COUNT, endpoints included.
    #[arg(long)]
    pub tau_range: Option<RangeSpec>,
    /// Bloch momentum k, fixed.
    #[arg(long, conflicts_with = "k_range", allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Swept as MIN:MAX:COUNT, endpoints included.
    #[arg(long, allow_hyphen_values = true)]
    pub k_range: Option<RangeSpec>,
    /// Coupling g of the imaginary-cone model, fixed.
    #[arg(long, conflicts_with = "g_range", allow_hyphen_values = true)]
    pub g: Option<f64>,
    /// Swept as MIN:MAX:COUNT, endpoints included.
    #[arg(long, allow_hyphen_values = true)]
    pub g_range: Option<RangeSpec>,
    /// First axis of the two-band models.
    #[arg(long, conflicts_with = "delta_range", allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Swept as MIN:MAX:COUNT, endpoints included.
    #[arg(long, allow_hyphen_values = true)]
    pub delta_range: Option<RangeSpec>,
    /// Second axis of the two-band models.
    #[arg(long, conflicts_with = "delta3_range", allow_hyphen_values = true)]
    pub delta3: Option<f64>,
    /// Swept as MIN:MAX:COUNT, endpoints included.
    #[arg(long, allow_hyphen_values = true)]
    pub delta3_range: Option<RangeSpec>,
}

/// Which degenerate cluster to analyse: `lowest`, `index=N` or
/// `nearest=RE` / `nearest=RE:IM`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum BandPairArg {
    Lowest,
    Index(usize),
    Nearest(f64, f64),
}

impl FromStr for BandPairArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "lowest" {
            return Ok(Self::Lowest);
        }
        if let Some(i) = s.strip_prefix("index=") {
            return i.parse().map(Self::Index).map_err(|e| format!("bad index: {e}"));
        }
        if let Some(w) = s.strip_prefix("nearest=") {
            let (re, im) = w.split_once(':').unwrap_or((w, "0"));
            let re: f64 = re.parse().map_err(|e| format!("bad energy: {e}"))?;
            let im: f64 = im.parse().map_err(|e| format!("bad energy: {e}"))?;
            return Ok(Self::Nearest(re, im));
        }
        Err(format!("expected lowest, index=N or nearest=RE[:IM], got {s:?}"))
    }
}

/// Direction `a,b` in the parameter plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction(pub [f64; 2]);

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("expected a,b, got {s:?}"))?;
        let a: f64 = a.trim().parse().map_err(|e| format!("bad component: {e}"))?;
        let b: f64 = b.trim().parse().map_err(|e| format!("bad component: {e}"))?;
        if !(a.is_finite() && b.is_finite()) || (a == 0.0 && b == 0.0) {
            return Err("direction must be finite and nonzero".into());
        }
        Ok(Self([a, b]))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PointArgs {
    /// Parameter point as `name=value,name=value` using the model's axis names.
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    #[arg(long, default_value = "lowest")]
    pub band_pair: BandPairArg,
}

#[derive(Debug, Args, Serialize)]
pub struct RadiiArgs {
    #[arg(long, default_value_t = 1e-4)]
    pub rmin: f64,
    #[arg(long, default_value_t = 0.02)]
    pub rmax: f64,
    #[arg(long, default_value_t = 8)]
    pub radii_count: usize,
    /// Number of equally spaced rays.
    #[arg(long, default_value_t = 8)]
    pub rays: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct BandsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub axes: AxisArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub radii: RadiiArgs,
    #[arg(long, default_value_t = 0.02)]
    pub probe_radius: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ConeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub radii: RadiiArgs,
    /// Explicit ray `a,b`; repeatable, replaces the equally spaced rays.
    #[arg(long, allow_hyphen_values = true)]
    pub direction: Vec<Direction>,
    /// Write the cone cross-sections with two tilted planes to this CSV.
    #[arg(long)]
    #[serde(skip)]
    pub sections: Option<PathBuf>,
    /// Plane tilt s in `w = w0 - s (p1 - p1_0) +/- d`.
    #[arg(long, default_value_t = std::f64::consts::SQRT_2 - 1.0)]
    pub plane_slope: f64,
    /// Plane offset d.
    #[arg(long, default_value_t = 0.025)]
    pub plane_offset: f64,
    #[arg(long, default_value_t = 180)]
    pub section_angles: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct IsospectralArgs {
    #[arg(long, value_enum)]
    pub model_a: ModelId,
    #[arg(long, value_enum)]
    pub model_b: ModelId,
    #[command(flatten)]
    pub params: ModelParamsArgs,
    #[command(flatten)]
    pub axes: AxisArgs,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct PuiseuxArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub direction: Direction,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn range_parsing() {
        let r: RangeSpec = "-0.5:0.5:201".parse().unwrap();
        assert_eq!((r.min, r.max, r.count), (-0.5, 0.5, 201));
        assert!("0:1".parse::<RangeSpec>().is_err());
        assert!("1:0:5".parse::<RangeSpec>().is_err());
        assert!("0:1:1".parse::<RangeSpec>().is_err());
    }

    #[test]
    fn band_pair_parsing() {
        assert_eq!("lowest".parse::<BandPairArg>().unwrap(), BandPairArg::Lowest);
        assert_eq!("index=3".parse::<BandPairArg>().unwrap(), BandPairArg::Index(3));
        assert_eq!("nearest=1.5".parse::<BandPairArg>().unwrap(), BandPairArg::Nearest(1.5, 0.0));
        assert_eq!(
            "nearest=1:-2".parse::<BandPairArg>().unwrap(),
            BandPairArg::Nearest(1.0, -2.0)
        );
        assert!("highest".parse::<BandPairArg>().is_err());
    }

    #[test]
    fn later_flags_win() {
        let cli = Cli::try_parse_from([
            "diracep", "bands", "--model", "h3", "--v0", "2", "--k-range", "-1:1:3", "--v0", "3",
        ])
        .unwrap();
        let Command::Bands(b) = cli.command else { panic!() };
        assert_eq!(b.model.params.v0, 3.0);
    }
}
