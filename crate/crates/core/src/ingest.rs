//! Parsing and validation of station catalogs, daily precipitation series,
//! and ENSO phase tables, plus the per-year completeness filter.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Days, NaiveDate};
use thiserror::Error;

use crate::csvutil;

/// Errors raised while parsing or filtering input tables.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("duplicate station code {0}")]
    DuplicateStation(u32),
    #[error("station {code}: latitude {lat} or longitude {lon} outside the valid range")]
    CoordinateRange { code: u32, lat: f64, lon: f64 },
    #[error("station {station} has two rows for {date}")]
    DuplicateDay { station: u32, date: NaiveDate },
    #[error("line {line}: negative precipitation {value}")]
    NegativePrecipitation { line: usize, value: f64 },
    #[error("duplicate year {0} in ENSO table")]
    DuplicateYear(i32),
    #[error("line {line}: unknown ENSO phase `{token}`")]
    UnknownPhase { line: usize, token: String },
    #[error("no catalog entry for station {0}")]
    UnknownStation(u32),
}

/// A georeferenced rain gauge. Latitude and longitude are decimal degrees,
/// negative south and west.
#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub code: u32,
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    pub network: String,
}

/// Regional plausibility box for station coordinates. Stations outside it
/// still parse; they are only reported as warnings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl Default for BoundingBox {
    fn default() -> Self {
        BoundingBox {
            lat_min: -34.5,
            lat_max: -26.5,
            lon_min: -58.5,
            lon_max: -49.0,
        }
    }
}

impl BoundingBox {
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.lat_min..=self.lat_max).contains(&lat) && (self.lon_min..=self.lon_max).contains(&lon)
    }
}

/// Lists one warning for every station falling outside the box.
pub fn bounding_box_warnings(stations: &[Station], bbox: &BoundingBox) -> Vec<String> {
    stations
        .iter()
        .filter(|s| !bbox.contains(s.lat, s.lon))
        .map(|s| {
            format!(
                "station {} ({}) at lat {}, lon {} lies outside the regional box",
                s.code, s.name, s.lat, s.lon
            )
        })
        .collect()
}

/// Parses `stations.csv` content (`code,name,lat,lon,network`).
pub fn parse_station_catalog(text: &str) -> Result<Vec<Station>, IngestError> {
    csvutil::expect_header(text, "code,name,lat,lon,network")
        .map_err(|msg| IngestError::Malformed { line: 1, msg })?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (line, raw) in csvutil::data_lines(text) {
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 5 {
            return Err(IngestError::Malformed {
                line,
                msg: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let code = parse_code(fields[0], line)?;
        let lat = parse_number(fields[2], line, "latitude")?;
        let lon = parse_number(fields[3], line, "longitude")?;
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(IngestError::CoordinateRange { code, lat, lon });
        }
        if !seen.insert(code) {
            return Err(IngestError::DuplicateStation(code));
        }
        out.push(Station {
            code,
            name: fields[1].to_string(),
            lat,
            lon,
            network: fields[4].to_string(),
        });
    }
    Ok(out)
}

/// Writes a catalog back to CSV. Coordinates print with two decimals, the
/// convention of the bundled catalog.
pub fn serialize_station_catalog(stations: &[Station]) -> String {
    let mut out = String::from("code,name,lat,lon,network\n");
    for s in stations {
        out.push_str(&format!(
            "{},{},{:.2},{:.2},{}\n",
            s.code, s.name, s.lat, s.lon, s.network
        ));
    }
    out
}

/// One station's daily precipitation in mm, one slot per calendar day
/// starting at `start`. `None` marks a missing observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    pub station_code: u32,
    pub start: NaiveDate,
    pub values: Vec<Option<f64>>,
}

impl DailySeries {
    /// Last calendar day covered by the series.
    pub fn end(&self) -> NaiveDate {
        self.start + Days::new(self.values.len() as u64 - 1)
    }

    /// The value recorded on `date`, or `None` when the date lies outside
    /// the span or the observation is missing.
    pub fn value_on(&self, date: NaiveDate) -> Option<f64> {
        if date < self.start {
            return None;
        }
        let offset = (date - self.start).num_days() as usize;
        self.values.get(offset).copied().flatten()
    }
}

/// Parses `daily.csv` content (`station_code,date,precip_mm`). Rows are
/// grouped per station and gaps between observed dates become missing
/// markers. An empty precipitation field is a missing observation.
pub fn parse_daily_series(text: &str) -> Result<Vec<DailySeries>, IngestError> {
    csvutil::expect_header(text, "station_code,date,precip_mm")
        .map_err(|msg| IngestError::Malformed { line: 1, msg })?;
    let mut per_station: BTreeMap<u32, BTreeMap<NaiveDate, Option<f64>>> = BTreeMap::new();
    for (line, raw) in csvutil::data_lines(text) {
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 3 {
            return Err(IngestError::Malformed {
                line,
                msg: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let code = parse_code(fields[0], line)?;
        let date = NaiveDate::parse_from_str(fields[1].trim(), "%Y-%m-%d").map_err(|_| {
            IngestError::Malformed {
                line,
                msg: format!("bad date `{}`", fields[1]),
            }
        })?;
        let precip = fields[2].trim();
        let value = if precip.is_empty() {
            None
        } else {
            let v = parse_number(precip, line, "precipitation")?;
            if v < 0.0 {
                return Err(IngestError::NegativePrecipitation { line, value: v });
            }
            Some(v)
        };
        let days = per_station.entry(code).or_default();
        if days.insert(date, value).is_some() {
            return Err(IngestError::DuplicateDay {
                station: code,
                date,
            });
        }
    }
    let mut out = Vec::new();
    for (code, days) in per_station {
        let (&start, _) = days.first_key_value().expect("group is non-empty");
        let (&last, _) = days.last_key_value().expect("group is non-empty");
        let len = (last - start).num_days() as usize + 1;
        let mut values = vec![None; len];
        for (date, value) in days {
            values[(date - start).num_days() as usize] = value;
        }
        out.push(DailySeries {
            station_code: code,
            start,
            values,
        });
    }
    Ok(out)
}

/// ENSO phase label for a year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EnsoPhase {
    ElNino,
    LaNina,
    NoSign,
}

impl EnsoPhase {
    pub const ALL: [EnsoPhase; 3] = [EnsoPhase::ElNino, EnsoPhase::LaNina, EnsoPhase::NoSign];

    /// Token used in CSV files.
    pub fn as_str(self) -> &'static str {
        match self {
            EnsoPhase::ElNino => "el_nino",
            EnsoPhase::LaNina => "la_nina",
            EnsoPhase::NoSign => "no_sign",
        }
    }

    pub fn parse(token: &str) -> Option<EnsoPhase> {
        match token {
            "el_nino" => Some(EnsoPhase::ElNino),
            "la_nina" => Some(EnsoPhase::LaNina),
            "no_sign" => Some(EnsoPhase::NoSign),
            _ => None,
        }
    }
}

/// Year-to-phase mapping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnsoTable {
    phases: BTreeMap<i32, EnsoPhase>,
}

impl EnsoTable {
    pub fn phase(&self, year: i32) -> Option<EnsoPhase> {
        self.phases.get(&year).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, EnsoPhase)> + '_ {
        self.phases.iter().map(|(&y, &p)| (y, p))
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// Parses `enso.csv` content (`year,phase`).
pub fn parse_enso_table(text: &str) -> Result<EnsoTable, IngestError> {
    csvutil::expect_header(text, "year,phase")
        .map_err(|msg| IngestError::Malformed { line: 1, msg })?;
    let mut table = EnsoTable::default();
    for (line, raw) in csvutil::data_lines(text) {
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 2 {
            return Err(IngestError::Malformed {
                line,
                msg: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let year = fields[0]
            .trim()
            .parse::<i32>()
            .map_err(|_| IngestError::Malformed {
                line,
                msg: format!("bad year `{}`", fields[0]),
            })?;
        let token = fields[1].trim();
        let phase = EnsoPhase::parse(token).ok_or_else(|| IngestError::UnknownPhase {
            line,
            token: token.to_string(),
        })?;
        if table.phases.insert(year, phase).is_some() {
            return Err(IngestError::DuplicateYear(year));
        }
    }
    Ok(table)
}

/// One admitted station with its per-year observation counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleEntry {
    pub station_code: u32,
    pub lat: f64,
    pub lon: f64,
    pub present_days: u32,
    pub total_days: u32,
}

/// Stations admitted for one year by the completeness filter, sorted by
/// station code.
#[derive(Debug, Clone, PartialEq)]
pub struct StationYearSample {
    pub year: i32,
    pub entries: Vec<SampleEntry>,
}

/// Number of calendar days in `year`.
pub fn days_in_year(year: i32) -> u32 {
    if NaiveDate::from_ymd_opt(year, 2, 29).is_some() {
        366
    } else {
        365
    }
}

/// Keeps, for `year`, the stations whose fraction of present days reaches
/// `min_fraction`. Stations with zero observations in the year are always
/// dropped. Coordinates come from the catalog; a series whose station is
/// not cataloged is an error.
pub fn filter_complete(
    series: &[DailySeries],
    catalog: &[Station],
    year: i32,
    min_fraction: f64,
) -> Result<StationYearSample, IngestError> {
    let coords: BTreeMap<u32, (f64, f64)> =
        catalog.iter().map(|s| (s.code, (s.lat, s.lon))).collect();
    let total_days = days_in_year(year);
    let jan1 = NaiveDate::from_ymd_opt(year, 1, 1).expect("January 1 exists for any year");
    let mut entries = Vec::new();
    for s in series {
        let &(lat, lon) = coords
            .get(&s.station_code)
            .ok_or(IngestError::UnknownStation(s.station_code))?;
        let mut present = 0u32;
        for d in 0..total_days {
            if s.value_on(jan1 + Days::new(u64::from(d))).is_some() {
                present += 1;
            }
        }
        if present > 0 && f64::from(present) / f64::from(total_days) >= min_fraction {
            entries.push(SampleEntry {
                station_code: s.station_code,
                lat,
                lon,
                present_days: present,
                total_days,
            });
        }
    }
    entries.sort_by_key(|e| e.station_code);
    Ok(StationYearSample { year, entries })
}

fn parse_code(field: &str, line: usize) -> Result<u32, IngestError> {
    field
        .trim()
        .parse::<u32>()
        .map_err(|_| IngestError::Malformed {
            line,
            msg: format!("bad station code `{field}`"),
        })
}

fn parse_number(field: &str, line: usize, what: &str) -> Result<f64, IngestError> {
    let v = field
        .trim()
        .parse::<f64>()
        .map_err(|_| IngestError::Malformed {
            line,
            msg: format!("bad {what} `{field}`"),
        })?;
    if !v.is_finite() {
        return Err(IngestError::Malformed {
            line,
            msg: format!("non-finite {what} `{field}`"),
        });
    }
    Ok(v)
}
