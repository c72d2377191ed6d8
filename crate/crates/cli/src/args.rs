use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use robcov::ScaleEstimator;

#[derive(Debug, Parser)]
#[command(name = "robcov", version, about = "Robust covariance, Youden ellipses, Mahalanobis screening and PCA for inter-laboratory data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Covariance and correlation matrices from one estimator.
    Cov(CovArgs),
    /// Youden plot with data ellipses for two columns.
    Youden(YoudenArgs),
    /// Mahalanobis distance screening with chi-squared cutoffs.
    Mhd(MhdArgs),
    /// Principal components and a PC1-PC2 biplot.
    Pca(PcaArgs),
    /// Median imputation of missing cells.
    Impute(ImputeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorKind {
    Classical,
    #[value(name = "rank_spearman", alias = "spearman")]
    RankSpearman,
    #[value(name = "rank_kendall", alias = "kendall")]
    RankKendall,
    Gk,
    Rgk,
    Ogk,
    Mcd,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Classical => "classical",
            EstimatorKind::RankSpearman => "rank_spearman",
            EstimatorKind::RankKendall => "rank_kendall",
            EstimatorKind::Gk => "gk",
            EstimatorKind::Rgk => "rgk",
            EstimatorKind::Ogk => "ogk",
            EstimatorKind::Mcd => "mcd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV file: header row, row id in the first column.
    pub input: Option<PathBuf>,
    /// Use an embedded table instead of a file (potassium, eight_elements).
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub fixture: Option<String>,
    /// Token marking a missing cell.
    #[arg(long, default_value = "NA")]
    pub na: String,
    /// Columns to use, by header name.
    #[arg(long, value_delimiter = ',')]
    pub cols: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "csv,json,svg")]
    pub format: Vec<Format>,
}

impl OutputArgs {
    pub fn wants(&self, f: Format) -> bool {
        self.format.contains(&f)
    }
}

#[derive(Debug, Clone, Args)]
pub struct EstimatorArgs {
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorKind>,
    /// Robust scale: made, qn, tau or sd. Defaults to tau for ogk and made otherwise.
    #[arg(long, value_parser = parse_scale)]
    pub scale: Option<ScaleEstimator>,
    /// MCD subset fraction in [0.5, 1].
    #[arg(long, default_value_t = 0.5)]
    pub h_fraction: f64,
    /// MCD random-start seed.
    #[arg(long, env = "ROBCOV_SEED", default_value_t = 0)]
    pub seed: u64,
    /// MCD random starts when the subsets are too many to enumerate.
    #[arg(long, default_value_t = 500)]
    pub n_starts: usize,
    /// Skip the MCD reweighting step.
    #[arg(long)]
    pub mcd_raw: bool,
    /// Apply the OGK reweighting step.
    #[arg(long)]
    pub ogk_reweight: bool,
}

#[derive(Debug, Args)]
pub struct CovArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub est: EstimatorArgs,
}

#[derive(Debug, Args)]
pub struct YoudenArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub est: EstimatorArgs,
    /// Ellipse coverage levels.
    #[arg(long, value_delimiter = ',', default_values_t = [0.95, 0.99], value_parser = parse_probability)]
    pub coverage: Vec<f64>,
    /// Angles per ellipse arc.
    #[arg(long, default_value_t = robcov::ellipse::DEFAULT_POINTS)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct MhdArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub est: EstimatorArgs,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub est: EstimatorArgs,
    /// Work on the covariance matrix instead of its correlation form.
    #[arg(long)]
    pub covariance: bool,
    /// Label this many rows with the largest PC1-PC2 score norms.
    #[arg(long, default_value_t = 5)]
    pub label_top: usize,
}

#[derive(Debug, Args)]
pub struct ImputeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_scale(s: &str) -> Result<ScaleEstimator, String> {
    s.parse::<ScaleEstimator>().map_err(|e| e.to_string())
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("coverage {v} outside (0, 1)"))
    }
}
