use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "robstat", version, about = "Robust statistical analyses of CSV data")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Directory receiving report.json and all artifacts.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Also render SVG figures of the plot data.
    #[arg(long, global = true)]
    pub svg: bool,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for the estimators (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Token read as a missing value; repeatable. Defaults to "", NA and NaN.
    #[arg(long = "na-marker", global = true)]
    pub na_markers: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Drop unusable columns and rows.
    Clean(CleanArgs),
    /// Robust Box-Cox / Yeo-Johnson transformation of columns.
    Transform(TransformArgs),
    /// Robust per-column centering and scaling.
    Scale(ScaleArgs),
    /// Robust location and scatter with a distance-distance plot.
    Cov(CovArgs),
    /// Robust linear regression with an outlier map.
    Reg(RegArgs),
    /// Robust principal components with a score/orthogonal distance map.
    Pca(PcaArgs),
    /// DetectDeviatingCells with a cellmap.
    Ddc(DdcArgs),
    /// Cellwise MCD with diagnostic plot data.
    Cellmcd(CellmcdArgs),
    /// Skewness-adjusted boxplots.
    Boxplot(BoxplotArgs),
    /// List or export the bundled datasets.
    Datasets(DatasetsArgs),
    /// Render an SVG from a plot-data CSV and its JSON sidecar.
    Render(RenderArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Clean(_) => "clean",
            Command::Transform(_) => "transform",
            Command::Scale(_) => "scale",
            Command::Cov(_) => "cov",
            Command::Reg(_) => "reg",
            Command::Pca(_) => "pca",
            Command::Ddc(_) => "ddc",
            Command::Cellmcd(_) => "cellmcd",
            Command::Boxplot(_) => "boxplot",
            Command::Datasets(_) => "datasets",
            Command::Render(_) => "render",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CleanArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub frac_na_row: f64,
    #[arg(long, default_value_t = 0.5)]
    pub frac_na_col: f64,
    #[arg(long, default_value_t = 3)]
    pub min_unique: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformMethod {
    Auto,
    Boxcox,
    Yeojohnson,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TransformArgs {
    pub input: PathBuf,
    /// Columns to transform.
    #[arg(long = "column", alias = "columns", required = true, value_delimiter = ',')]
    pub columns: Vec<String>,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: TransformMethod,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleMethod {
    Umcd,
    Onestepm,
    Qn,
    Tau,
    Mad,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScaleArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "umcd")]
    pub method: ScaleMethod,
    /// Subset fraction of the univariate MCD.
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    #[arg(long)]
    pub no_center: bool,
    #[arg(long)]
    pub no_scale: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CovChoice {
    Fastmcd,
    Detmcd,
    Ogk,
    Wrapping,
    Kendall,
    Classical,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CovArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "fastmcd")]
    pub method: CovChoice,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Numeric columns to use (default: all).
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    #[arg(long)]
    pub no_reweighting: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegChoice {
    Lts,
    S,
    Mm,
    Ols,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RegArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub response: String,
    #[arg(long, value_enum, default_value = "mm")]
    pub method: RegChoice,
    /// Predictor columns (default: every other numeric column).
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    /// Subset fraction for LTS.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Normal efficiency of the MM step.
    #[arg(long, default_value_t = 0.95)]
    pub efficiency: f64,
    #[arg(long)]
    pub no_intercept: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PcaChoice {
    Robpca,
    Spherical,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PcaArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "robpca")]
    pub method: PcaChoice,
    /// Fixed number of components; overrides --explained.
    #[arg(long)]
    pub components: Option<usize>,
    #[arg(long, default_value_t = 0.8)]
    pub explained: f64,
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DdcArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.99)]
    pub cutoff_prob: f64,
    #[arg(long, default_value_t = 0.5)]
    pub corr_lim: f64,
    #[arg(long, default_value_t = 10)]
    pub max_predictors: usize,
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    /// Row ids shown in the cellmap (default: all).
    #[arg(long, value_delimiter = ',')]
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PlotChoice {
    Indexplot,
    ResidualsVsVariable,
    ResidualsVsPredictions,
    VariableVsPredictions,
    Bivariate,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CellmcdArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.99)]
    pub cutoff_prob: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    /// Diagnostic plot to export; needs --variable.
    #[arg(long, value_enum)]
    pub plot: Option<PlotChoice>,
    #[arg(long)]
    pub variable: Option<String>,
    #[arg(long)]
    pub second_variable: Option<String>,
    #[arg(long, default_value_t = 0.99)]
    pub annotation_quantile: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoxplotArgs {
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DatasetsArgs {
    /// Dataset to export as CSV.
    #[arg(long)]
    pub load: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PlotKind {
    Ddplot,
    OutlierMap,
    PcaMap,
    Cellmap,
    Boxplot,
    Cellmcd,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RenderArgs {
    /// Plot-data CSV; the sidecar is the same path with a .json extension.
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub kind: PlotKind,
}
