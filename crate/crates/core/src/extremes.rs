//! Annual k-day maximum precipitation events and their day of occurrence.

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use thiserror::Error;

use crate::ingest::{days_in_year, DailySeries, StationYearSample};

#[derive(Debug, Error)]
pub enum ExtremesError {
    #[error("window length {0} outside 1..=5")]
    BadWindow(u32),
    #[error("station {station}: year {year} outside the series span")]
    YearOutsideSpan { station: u32, year: i32 },
    #[error("no daily series for station {0}")]
    MissingSeries(u32),
}

/// Maximum k-day accumulated precipitation for one station-year, with the
/// start day of the earliest window attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnualExtreme {
    pub station_code: u32,
    pub year: i32,
    pub window_days: u32,
    pub max_accum: f64,
    pub day_of_year: u32,
    /// Days of the year with no present observation; each contributes 0 mm
    /// to any window covering it.
    pub gap_days: u32,
}

/// The two per-event variables: the accumulated depth and the day it fell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    MaxI,
    DiaM,
}

impl Variable {
    pub const ALL: [Variable; 2] = [Variable::MaxI, Variable::DiaM];

    pub fn as_str(self) -> &'static str {
        match self {
            Variable::MaxI => "MaxI",
            Variable::DiaM => "DiaM",
        }
    }

    pub fn parse(token: &str) -> Option<Variable> {
        match token {
            "MaxI" => Some(Variable::MaxI),
            "DiaM" => Some(Variable::DiaM),
            _ => None,
        }
    }

    /// The value this variable reads off an extreme record.
    pub fn value(self, record: &AnnualExtreme) -> f64 {
        match self {
            Variable::MaxI => record.max_accum,
            Variable::DiaM => f64::from(record.day_of_year),
        }
    }
}

/// Finds the maximum k-day accumulation among the windows lying fully
/// inside the calendar year. Missing days count as 0 mm; ties go to the
/// earliest start day.
pub fn annual_window_extreme(
    series: &DailySeries,
    year: i32,
    k: u32,
) -> Result<AnnualExtreme, ExtremesError> {
    if !(1..=5).contains(&k) {
        return Err(ExtremesError::BadWindow(k));
    }
    let total_days = days_in_year(year);
    let jan1 = NaiveDate::from_ymd_opt(year, 1, 1).expect("January 1 exists for any year");
    let dec31 = jan1 + Days::new(u64::from(total_days) - 1);
    if series.end() < jan1 || series.start > dec31 {
        return Err(ExtremesError::YearOutsideSpan {
            station: series.station_code,
            year,
        });
    }
    let mut gap_days = 0u32;
    let mut values = Vec::with_capacity(total_days as usize);
    for d in 0..total_days {
        match series.value_on(jan1 + Days::new(u64::from(d))) {
            Some(v) => values.push(v),
            None => {
                gap_days += 1;
                values.push(0.0);
            }
        }
    }
    let k_len = k as usize;
    let mut best = f64::NEG_INFINITY;
    let mut best_start = 0usize;
    for start in 0..=(values.len() - k_len) {
        let mut sum = 0.0;
        for v in &values[start..start + k_len] {
            sum += v;
        }
        if sum > best {
            best = sum;
            best_start = start;
        }
    }
    Ok(AnnualExtreme {
        station_code: series.station_code,
        year,
        window_days: k,
        max_accum: best,
        day_of_year: best_start as u32 + 1,
        gap_days,
    })
}

/// Computes all five window extremes for every sampled station. Output is
/// ordered by (station_code, k).
pub fn extremes_matrix(
    sample: &StationYearSample,
    series: &[DailySeries],
) -> Result<Vec<AnnualExtreme>, ExtremesError> {
    let by_code: BTreeMap<u32, &DailySeries> = series.iter().map(|s| (s.station_code, s)).collect();
    let mut entries: Vec<_> = sample.entries.iter().collect();
    entries.sort_by_key(|e| e.station_code);
    let mut out = Vec::with_capacity(entries.len() * 5);
    for entry in entries {
        let s = by_code
            .get(&entry.station_code)
            .ok_or(ExtremesError::MissingSeries(entry.station_code))?;
        for k in 1..=5 {
            out.push(annual_window_extreme(s, sample.year, k)?);
        }
    }
    Ok(out)
}

/// Renders extreme records as `maxima.csv` content
/// (`station_code,year,k,max_mm,day_of_year`).
pub fn maxima_to_csv(records: &[AnnualExtreme]) -> String {
    let mut out = String::from("station_code,year,k,max_mm,day_of_year\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.station_code, r.year, r.window_days, r.max_accum, r.day_of_year
        ));
    }
    out
}
