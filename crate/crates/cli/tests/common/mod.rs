//! Shared helpers for the CLI integration tests.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Paths to the bundled reference fixtures inside the core crate.
pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_rainvar")
}

/// Writes a deterministic synthetic input set (stations.csv, daily.csv,
/// enso.csv) into `dir`: complete daily series for every station over the
/// year span, station coordinates scattered over a ~3x3 degree box.
pub fn write_synthetic_inputs(
    dir: &Path,
    n_stations: usize,
    first_year: i32,
    last_year: i32,
    seed: u64,
) -> (PathBuf, PathBuf, PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut stations = String::from("code,name,lat,lon,network\n");
    let mut coords = Vec::new();
    for i in 0..n_stations {
        let lat = rng.gen_range(-32.0..-29.0);
        let lon = rng.gen_range(-53.0..-50.0);
        coords.push((100 + i as u32, lat, lon));
        stations.push_str(&format!(
            "{},Site {i},{lat:.2},{lon:.2},SYN\n",
            100 + i as u32
        ));
    }

    let mut daily = String::from("station_code,date,precip_mm\n");
    for (code, _, _) in &coords {
        let mut date = NaiveDate::from_ymd_opt(first_year, 1, 1).unwrap();
        let end = NaiveDate::from_ymd_opt(last_year, 12, 31).unwrap();
        while date <= end {
            let value = rng.gen_range(0.0..40.0);
            daily.push_str(&format!("{code},{date},{value:.1}\n"));
            date = date.succ_opt().unwrap();
        }
    }

    let mut enso = String::from("year,phase\n");
    for (i, year) in (first_year..=last_year).enumerate() {
        let phase = ["el_nino", "la_nina", "no_sign"][i % 3];
        enso.push_str(&format!("{year},{phase}\n"));
    }

    let stations_path = dir.join("stations.csv");
    let daily_path = dir.join("daily.csv");
    let enso_path = dir.join("enso.csv");
    fs::write(&stations_path, stations).unwrap();
    fs::write(&daily_path, daily).unwrap();
    fs::write(&enso_path, enso).unwrap();
    (stations_path, daily_path, enso_path)
}
