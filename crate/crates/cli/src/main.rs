//! `rainvar`: annual precipitation extremes, empirical variograms, linear
//! fits, and coherence classification from the command line.

mod commands;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rainvar_core::coherence::CoherenceError;
use rainvar_core::extremes::ExtremesError;
use rainvar_core::ingest::IngestError;
use rainvar_core::modelfit::ModelFitError;
use rainvar_core::simulate::SimulateError;
use rainvar_core::variogram::VariogramError;

#[derive(Parser)]
#[command(
    name = "rainvar",
    version,
    about = "Geostatistics of annual precipitation extremes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Inclusive year range, parsed from `A..B` or a single `A`.
#[derive(Debug, Clone, Copy)]
pub struct YearRange {
    pub first: i32,
    pub last: i32,
}

impl YearRange {
    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.first..=self.last
    }
}

fn parse_year_range(s: &str) -> Result<YearRange, String> {
    let (first, last) = match s.split_once("..") {
        Some((a, b)) => (a, b),
        None => (s, s),
    };
    let first: i32 = first
        .trim()
        .parse()
        .map_err(|_| format!("bad year `{first}`"))?;
    let last: i32 = last
        .trim()
        .parse()
        .map_err(|_| format!("bad year `{last}`"))?;
    if last < first {
        return Err(format!("empty year range {first}..{last}"));
    }
    Ok(YearRange { first, last })
}

/// Rectangle spec `x_min,x_max,y_min,y_max`.
fn parse_domain(s: &str) -> Result<rainvar_core::simulate::Domain, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err("domain must be x_min,x_max,y_min,y_max".into());
    }
    let mut vals = [0.0f64; 4];
    for (slot, part) in vals.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| format!("bad coordinate `{part}`"))?;
    }
    Ok(rainvar_core::simulate::Domain {
        x_min: vals[0],
        x_max: vals[1],
        y_min: vals[2],
        y_max: vals[3],
    })
}

/// Binning options shared by several subcommands.
#[derive(Args, Debug, Clone, Copy)]
pub struct BinOpts {
    /// Lag bin width in degrees
    #[arg(long, default_value_t = 0.25)]
    pub bin_width: f64,
    /// Largest lag considered, in degrees
    #[arg(long, default_value_t = 5.0)]
    pub max_lag: f64,
}

/// Classification rule options shared by `classify` and `analyze`.
#[derive(Args, Debug, Clone)]
pub struct RuleOpts {
    /// Spatial coherence threshold on MaxI percentages
    #[arg(long, default_value_t = 47.0)]
    pub t_spatial: f64,
    /// Temporal coherence threshold on DiaM percentages
    #[arg(long, default_value_t = 44.0)]
    pub t_temporal: f64,
    /// Windows that must clear the threshold
    #[arg(long, default_value_t = 2)]
    pub min_windows: usize,
    /// Window lengths (days) consulted by the rule
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3, 4, 5])]
    pub windows: Vec<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Check input files and report per-file errors and warnings
    Validate {
        /// Station catalog CSV (code,name,lat,lon,network)
        #[arg(long)]
        stations: PathBuf,
        /// Daily series CSV (station_code,date,precip_mm)
        #[arg(long)]
        daily: PathBuf,
        /// ENSO phase CSV (year,phase)
        #[arg(long)]
        enso: Option<PathBuf>,
    },
    /// Extract annual k-day maxima for all stations passing completeness
    Maxima {
        #[arg(long)]
        stations: PathBuf,
        #[arg(long)]
        daily: PathBuf,
        /// Years to process, `A..B` inclusive or a single year
        #[arg(long, value_parser = parse_year_range)]
        years: YearRange,
        /// Minimum fraction of days a station must report in a year
        #[arg(long, default_value_t = 1.0)]
        completeness: f64,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate an empirical semivariogram from an x,y,z sample CSV
    Variogram {
        /// Sample CSV (x,y,z)
        #[arg(long)]
        samples: PathBuf,
        #[command(flatten)]
        bins: BinOpts,
        /// Measure distances along great circles in km (x=lon, y=lat)
        #[arg(long)]
        great_circle: bool,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the linear variogram model to a binned variogram CSV
    Fit {
        /// Variogram CSV (bin_index,N,h,V)
        #[arg(long)]
        variogram: PathBuf,
        #[command(flatten)]
        bins: BinOpts,
        /// Weight bins by pair count (default)
        #[arg(long, conflicts_with = "unweighted")]
        weighted: bool,
        /// Give every bin equal weight
        #[arg(long)]
        unweighted: bool,
        /// Year tag for the output row
        #[arg(long, default_value_t = 0)]
        year: i32,
        /// Variable tag for the output row (MaxI or DiaM)
        #[arg(long, default_value = "MaxI")]
        variable: String,
        /// Window length tag for the output row
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify years from a percentages CSV and cross-tabulate with ENSO
    Classify {
        /// Percentages CSV (year,n_obs,maxi_01..diam_05)
        #[arg(long)]
        percentages: PathBuf,
        /// ENSO phase CSV (year,phase)
        #[arg(long)]
        enso: PathBuf,
        #[command(flatten)]
        rule: RuleOpts,
        /// Output directory for classes.csv, crosstab.csv, summary.csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline and write a report bundle
    Analyze {
        #[arg(long)]
        stations: PathBuf,
        #[arg(long)]
        daily: PathBuf,
        #[arg(long)]
        enso: PathBuf,
        /// Years to process, `A..B` inclusive or a single year
        #[arg(long, value_parser = parse_year_range)]
        years: YearRange,
        #[command(flatten)]
        bins: BinOpts,
        /// Weight bins by pair count (default)
        #[arg(long, conflicts_with = "unweighted")]
        weighted: bool,
        /// Give every bin equal weight
        #[arg(long)]
        unweighted: bool,
        /// Minimum fraction of days a station must report in a year
        #[arg(long, default_value_t = 1.0)]
        completeness: f64,
        #[command(flatten)]
        rule: RuleOpts,
        /// Output directory for the report bundle
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a variogram and its fitted line as an SVG chart
    Plot {
        /// Variogram CSV (bin_index,N,h,V)
        #[arg(long)]
        variogram: PathBuf,
        /// Fits CSV; the first row supplies the line
        #[arg(long)]
        fits: PathBuf,
        #[command(flatten)]
        bins: BinOpts,
        /// Output SVG path
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a seeded Gaussian field with a linear variogram
    Simulate {
        /// Number of points to scatter
        #[arg(long, default_value_t = 400)]
        n_points: usize,
        /// Variogram slope b*
        #[arg(long, default_value_t = 100.0)]
        slope: f64,
        /// Nugget c0* (variance of the white-noise component)
        #[arg(long, default_value_t = 0.0)]
        nugget: f64,
        /// RNG seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampling rectangle x_min,x_max,y_min,y_max
        #[arg(long, value_parser = parse_domain, default_value = "0,5,0,5")]
        domain: rainvar_core::simulate::Domain,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Maps an error chain to the documented exit codes: 1 for input problems,
/// 2 for numerical or degenerate conditions.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<ModelFitError>() {
            return match e {
                ModelFitError::FewBins(_) | ModelFitError::DegenerateDesign => 2,
                ModelFitError::Malformed { .. } => 1,
            };
        }
        if let Some(e) = cause.downcast_ref::<VariogramError>() {
            return match e {
                VariogramError::NoPairsInRange | VariogramError::FewPoints(_) => 2,
                _ => 1,
            };
        }
        if let Some(e) = cause.downcast_ref::<CoherenceError>() {
            return match e {
                CoherenceError::FewRows(_) => 2,
                _ => 1,
            };
        }
        if let Some(e) = cause.downcast_ref::<SimulateError>() {
            return match e {
                SimulateError::NotPositiveDefinite => 2,
                _ => 1,
            };
        }
        if cause.downcast_ref::<IngestError>().is_some()
            || cause.downcast_ref::<ExtremesError>().is_some()
        {
            return 1;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate {
            stations,
            daily,
            enso,
        } => commands::validate(&stations, &daily, enso.as_deref()),
        Command::Maxima {
            stations,
            daily,
            years,
            completeness,
            out,
        } => commands::maxima(&stations, &daily, years, completeness, out.as_deref()),
        Command::Variogram {
            samples,
            bins,
            great_circle,
            out,
        } => commands::variogram(&samples, bins, great_circle, out.as_deref()),
        Command::Fit {
            variogram,
            bins,
            unweighted,
            year,
            variable,
            k,
            out,
            ..
        } => commands::fit(
            &variogram,
            bins,
            !unweighted,
            year,
            &variable,
            k,
            out.as_deref(),
        ),
        Command::Classify {
            percentages,
            enso,
            rule,
            out,
        } => commands::classify(&percentages, &enso, &rule, &out),
        Command::Analyze {
            stations,
            daily,
            enso,
            years,
            bins,
            unweighted,
            completeness,
            rule,
            out,
            ..
        } => commands::analyze(&commands::AnalyzeConfig {
            stations,
            daily,
            enso,
            years,
            bins,
            weighted: !unweighted,
            completeness,
            rule,
            out,
        }),
        Command::Plot {
            variogram,
            fits,
            bins,
            out,
        } => commands::plot(&variogram, &fits, bins, &out),
        Command::Simulate {
            n_points,
            slope,
            nugget,
            seed,
            domain,
            out,
        } => commands::simulate(n_points, slope, nugget, seed, domain, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
