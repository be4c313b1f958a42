//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use rainvar_core::coherence::{
    attach_phases, classes_to_csv, classify_year, crosstab_enso, crosstab_to_csv,
    parse_year_percentages, percentages_to_csv, summarize_percentages, summary_to_csv,
    CoherenceRule, YearPercentages,
};
use rainvar_core::extremes::{extremes_matrix, maxima_to_csv, AnnualExtreme, Variable};
use rainvar_core::ingest::{
    bounding_box_warnings, filter_complete, parse_daily_series, parse_enso_table,
    parse_station_catalog, BoundingBox, EnsoTable,
};
use rainvar_core::modelfit::{fit_linear, fits_from_csv, fits_to_csv, FitRecord};
use rainvar_core::simulate::{simulate_linear_field, Domain, FieldSpec};
use rainvar_core::variogram::{
    bins_from_csv, empirical_semivariogram_in, samples_from_csv, samples_to_csv, variogram_to_csv,
    EmpiricalVariogram, Metric, SamplePoint, SampleSet,
};

use crate::manifest::{self, ConfigEcho, Manifest};
use crate::svg;
use crate::{BinOpts, RuleOpts, YearRange};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn file_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "samples".into())
}

fn check_completeness(f: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&f) {
        bail!("completeness must lie in [0, 1], got {f}");
    }
    Ok(())
}

fn build_rule(opts: &RuleOpts) -> Result<CoherenceRule> {
    Ok(CoherenceRule::new(
        opts.t_spatial,
        opts.t_temporal,
        opts.min_windows,
        opts.windows.clone(),
    )?)
}

pub fn validate(stations: &Path, daily: &Path, enso: Option<&Path>) -> Result<()> {
    let mut errors = 0usize;
    let mut warnings = 0usize;

    match parse_station_catalog(&read(stations)?) {
        Ok(list) => {
            println!("stations: {} stations", list.len());
            for w in bounding_box_warnings(&list, &BoundingBox::default()) {
                println!("stations: warning: {w}");
                warnings += 1;
            }
        }
        Err(e) => {
            println!("stations: error: {e}");
            errors += 1;
        }
    }

    match parse_daily_series(&read(daily)?) {
        Ok(list) if list.is_empty() => {
            println!("daily: error: no series");
            errors += 1;
        }
        Ok(list) => {
            let days: usize = list.iter().map(|s| s.values.len()).sum();
            let missing: usize = list
                .iter()
                .map(|s| s.values.iter().filter(|v| v.is_none()).count())
                .sum();
            println!(
                "daily: {} series, {days} days, {missing} missing",
                list.len()
            );
        }
        Err(e) => {
            println!("daily: error: {e}");
            errors += 1;
        }
    }

    if let Some(enso) = enso {
        match parse_enso_table(&read(enso)?) {
            Ok(table) => println!("enso: {} years", table.len()),
            Err(e) => {
                println!("enso: error: {e}");
                errors += 1;
            }
        }
    }

    if errors > 0 {
        bail!("validation failed with {errors} error(s)");
    }
    println!("ok ({warnings} warning(s))");
    Ok(())
}

pub fn maxima(
    stations: &Path,
    daily: &Path,
    years: YearRange,
    completeness: f64,
    out: Option<&Path>,
) -> Result<()> {
    check_completeness(completeness)?;
    let catalog = parse_station_catalog(&read(stations)?)?;
    let series = parse_daily_series(&read(daily)?)?;
    if series.is_empty() {
        bail!("no series in {}", daily.display());
    }
    let mut records = Vec::new();
    for year in years.years() {
        let sample = filter_complete(&series, &catalog, year, completeness)?;
        records.extend(extremes_matrix(&sample, &series)?);
    }
    emit(out, &maxima_to_csv(&records))
}

pub fn variogram(
    samples: &Path,
    bins: BinOpts,
    great_circle: bool,
    out: Option<&Path>,
) -> Result<()> {
    let set = samples_from_csv(&read(samples)?, &file_label(samples))?;
    let metric = if great_circle {
        Metric::GreatCircleKm
    } else {
        Metric::DegreePlane
    };
    let v = empirical_semivariogram_in(&set, bins.bin_width, bins.max_lag, metric)?;
    emit(out, &variogram_to_csv(&v))
}

pub fn fit(
    variogram: &Path,
    bins: BinOpts,
    weighted: bool,
    year: i32,
    variable: &str,
    k: u32,
    out: Option<&Path>,
) -> Result<()> {
    let variable = Variable::parse(variable)
        .ok_or_else(|| anyhow!("unknown variable `{variable}` (expected MaxI or DiaM)"))?;
    let lag_bins = bins_from_csv(&read(variogram)?)?;
    let v = EmpiricalVariogram {
        bin_width: bins.bin_width,
        max_lag: bins.max_lag,
        label: file_label(variogram),
        bins: lag_bins,
    };
    let fitted = fit_linear(&v, weighted)?;
    if let Some(w) = &fitted.warning {
        eprintln!("warning: {w}");
    }
    let record = FitRecord {
        year,
        variable,
        k,
        fit: fitted,
    };
    emit(out, &fits_to_csv(&[record]))
}

fn classification_bundle(
    rows: &[YearPercentages],
    enso: &EnsoTable,
    rule: &CoherenceRule,
) -> Result<(String, String, String)> {
    let mut classified: Vec<_> = rows.iter().map(|r| classify_year(r, rule)).collect();
    attach_phases(&mut classified, enso)?;
    let ct = crosstab_enso(&classified, enso)?;
    let summary = summarize_percentages(rows)?;
    Ok((
        classes_to_csv(&classified),
        crosstab_to_csv(&ct),
        summary_to_csv(&summary),
    ))
}

pub fn classify(percentages: &Path, enso: &Path, rule: &RuleOpts, out: &Path) -> Result<()> {
    let mut rows = parse_year_percentages(&read(percentages)?)?;
    rows.sort_by_key(|r| r.year);
    let enso = parse_enso_table(&read(enso)?)?;
    let rule = build_rule(rule)?;
    let (classes, crosstab, summary) = classification_bundle(&rows, &enso, &rule)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_file(&out.join("classes.csv"), &classes)?;
    write_file(&out.join("crosstab.csv"), &crosstab)?;
    write_file(&out.join("summary.csv"), &summary)?;
    println!(
        "wrote classes.csv, crosstab.csv, summary.csv to {}",
        out.display()
    );
    Ok(())
}

pub struct AnalyzeConfig {
    pub stations: PathBuf,
    pub daily: PathBuf,
    pub enso: PathBuf,
    pub years: YearRange,
    pub bins: BinOpts,
    pub weighted: bool,
    pub completeness: f64,
    pub rule: RuleOpts,
    pub out: PathBuf,
}

struct Cell {
    year: i32,
    variable: Variable,
    k: u32,
    set: SampleSet,
}

pub fn analyze(cfg: &AnalyzeConfig) -> Result<()> {
    check_completeness(cfg.completeness)?;
    let rule = build_rule(&cfg.rule)?;
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let marker = cfg.out.join("INCOMPLETE");
    write_file(
        &marker,
        "analysis aborted or still running; outputs may be partial\n",
    )?;

    let stations_text = read(&cfg.stations)?;
    let daily_text = read(&cfg.daily)?;
    let enso_text = read(&cfg.enso)?;
    let catalog = parse_station_catalog(&stations_text)?;
    let series = parse_daily_series(&daily_text)?;
    if series.is_empty() {
        bail!("no series in {}", cfg.daily.display());
    }
    let enso = parse_enso_table(&enso_text)?;

    let mut skipped_years = Vec::new();
    let mut samples = Vec::new();
    for year in cfg.years.years() {
        let sample = filter_complete(&series, &catalog, year, cfg.completeness)?;
        if sample.entries.len() < 2 {
            skipped_years.push(year);
        } else {
            samples.push(sample);
        }
    }
    if samples.is_empty() {
        bail!(
            "no year in {}..{} has at least 2 complete stations",
            cfg.years.first,
            cfg.years.last
        );
    }

    let mut maxima_rows: Vec<AnnualExtreme> = Vec::new();
    let mut cells: Vec<Cell> = Vec::new();
    let mut year_sizes: Vec<(i32, u32)> = Vec::new();
    for sample in &samples {
        let records = extremes_matrix(sample, &series)?;
        for variable in Variable::ALL {
            for k in 1..=5u32 {
                let points: Vec<SamplePoint> = sample
                    .entries
                    .iter()
                    .enumerate()
                    .map(|(i, e)| {
                        let rec = &records[i * 5 + (k as usize - 1)];
                        debug_assert_eq!(rec.station_code, e.station_code);
                        SamplePoint {
                            x: e.lon,
                            y: e.lat,
                            z: variable.value(rec),
                        }
                    })
                    .collect();
                cells.push(Cell {
                    year: sample.year,
                    variable,
                    k,
                    set: SampleSet {
                        label: format!("{} {}_{:02}", sample.year, variable.as_str(), k),
                        points,
                    },
                });
            }
        }
        year_sizes.push((sample.year, sample.entries.len() as u32));
        maxima_rows.extend(records);
    }

    let results: Vec<Result<(String, FitRecord)>> = cells
        .par_iter()
        .map(|cell| {
            let context = || format!("{} {}_{:02}", cell.year, cell.variable.as_str(), cell.k);
            let v = empirical_semivariogram_in(
                &cell.set,
                cfg.bins.bin_width,
                cfg.bins.max_lag,
                Metric::DegreePlane,
            )
            .with_context(context)?;
            let fitted = fit_linear(&v, cfg.weighted).with_context(context)?;
            let record = FitRecord {
                year: cell.year,
                variable: cell.variable,
                k: cell.k,
                fit: fitted,
            };
            Ok((variogram_to_csv(&v), record))
        })
        .collect();
    let mut cell_outputs = Vec::with_capacity(results.len());
    for r in results {
        cell_outputs.push(r?);
    }

    let mut outputs: Vec<String> = Vec::new();
    for (cell, (csv, _)) in cells.iter().zip(&cell_outputs) {
        let name = format!(
            "variogram_{}_{}_{:02}.csv",
            cell.year,
            cell.variable.as_str(),
            cell.k
        );
        write_file(&cfg.out.join(&name), csv)?;
        outputs.push(name);
    }

    let fit_records: Vec<FitRecord> = cell_outputs.iter().map(|(_, r)| r.clone()).collect();
    write_file(&cfg.out.join("fits.csv"), &fits_to_csv(&fit_records))?;
    outputs.push("fits.csv".into());

    let mut pct_rows: Vec<YearPercentages> = Vec::new();
    for ((year, n_obs), chunk) in year_sizes.iter().zip(fit_records.chunks(10)) {
        let mut maxi_pct = [0.0; 5];
        let mut diam_pct = [0.0; 5];
        for rec in chunk {
            let slot = (rec.k - 1) as usize;
            match rec.variable {
                Variable::MaxI => maxi_pct[slot] = rec.fit.pct_explained,
                Variable::DiaM => diam_pct[slot] = rec.fit.pct_explained,
            }
        }
        pct_rows.push(YearPercentages {
            year: *year,
            n_obs: *n_obs,
            maxi_pct,
            diam_pct,
        });
    }
    write_file(
        &cfg.out.join("percentages.csv"),
        &percentages_to_csv(&pct_rows),
    )?;
    outputs.push("percentages.csv".into());

    let (classes, crosstab, summary) = classification_bundle(&pct_rows, &enso, &rule)?;
    write_file(&cfg.out.join("classes.csv"), &classes)?;
    write_file(&cfg.out.join("crosstab.csv"), &crosstab)?;
    write_file(&cfg.out.join("summary.csv"), &summary)?;
    outputs.extend([
        "classes.csv".into(),
        "crosstab.csv".into(),
        "summary.csv".into(),
    ]);

    write_file(&cfg.out.join("maxima.csv"), &maxima_to_csv(&maxima_rows))?;
    outputs.push("maxima.csv".into());

    outputs.sort();
    let manifest = Manifest {
        tool: "rainvar",
        version: env!("CARGO_PKG_VERSION"),
        command: "analyze",
        config: ConfigEcho {
            years: format!("{}..{}", cfg.years.first, cfg.years.last),
            bin_width: cfg.bins.bin_width,
            max_lag: cfg.bins.max_lag,
            weighted: cfg.weighted,
            completeness: cfg.completeness,
            t_spatial: rule.t_spatial,
            t_temporal: rule.t_temporal,
            min_windows: rule.min_windows,
            windows: rule.window_set.clone(),
            out: cfg.out.display().to_string(),
        },
        inputs: vec![
            manifest::digest("stations", &cfg.stations, &stations_text),
            manifest::digest("daily", &cfg.daily, &daily_text),
            manifest::digest("enso", &cfg.enso, &enso_text),
        ],
        years_analyzed: year_sizes.iter().map(|(y, _)| *y).collect(),
        skipped_years,
        outputs,
        conventions: manifest::Conventions::current(),
    };
    manifest::write(&cfg.out.join("manifest.json"), &manifest)?;

    fs::remove_file(&marker).with_context(|| format!("removing {}", marker.display()))?;
    println!(
        "wrote report bundle to {} ({} years, {} fit rows)",
        cfg.out.display(),
        year_sizes.len(),
        fit_records.len()
    );
    Ok(())
}

pub fn plot(variogram: &Path, fits: &Path, bins: BinOpts, out: &Path) -> Result<()> {
    let lag_bins = bins_from_csv(&read(variogram)?)?;
    if lag_bins.is_empty() {
        bail!("empty variogram: {}", variogram.display());
    }
    let v = EmpiricalVariogram {
        bin_width: bins.bin_width,
        max_lag: bins.max_lag,
        label: file_label(variogram),
        bins: lag_bins,
    };
    let records = fits_from_csv(&read(fits)?)?;
    let record = records
        .first()
        .ok_or_else(|| anyhow!("no fit rows in {}", fits.display()))?;
    write_file(out, &svg::render(&v, record))
}

pub fn simulate(
    n_points: usize,
    slope: f64,
    nugget: f64,
    seed: u64,
    domain: Domain,
    out: Option<&Path>,
) -> Result<()> {
    let spec = FieldSpec {
        n_points,
        domain,
        slope,
        nugget,
        seed,
    };
    let set = simulate_linear_field(&spec)?;
    emit(out, &samples_to_csv(&set))
}
