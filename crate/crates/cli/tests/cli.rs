//! End-to-end tests driving the compiled binary.

mod common;

use std::fs;
use std::process::{Command, Output};

fn run(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    let mut cmd = Command::new(common::bin());
    for a in args {
        cmd.arg(a.as_ref());
    }
    cmd.output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_accepts_the_bundled_fixtures_with_one_warning() {
    let tmp = tempfile::tempdir().unwrap();
    let daily = tmp.path().join("daily.csv");
    fs::write(
        &daily,
        "station_code,date,precip_mm\n2951027,1998-01-01,4.5\n2951027,1998-01-02,0\n",
    )
    .unwrap();
    let out = run(&[
        &"validate",
        &"--stations",
        &common::fixture("stations.csv"),
        &"--daily",
        &daily,
        &"--enso",
        &common::fixture("enso.csv"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("52 stations"), "{text}");
    assert!(text.contains("warning"), "{text}");
    assert!(text.contains("2951027"), "{text}");
    assert!(text.contains("30 years"), "{text}");
}

#[test]
fn validate_rejects_an_empty_daily_file() {
    let tmp = tempfile::tempdir().unwrap();
    let daily = tmp.path().join("daily.csv");
    fs::write(&daily, "station_code,date,precip_mm\n").unwrap();
    let out = run(&[
        &"validate",
        &"--stations",
        &common::fixture("stations.csv"),
        &"--daily",
        &daily,
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("no series"), "{}", stdout(&out));
}

#[test]
fn validate_rejects_negative_precipitation() {
    let tmp = tempfile::tempdir().unwrap();
    let daily = tmp.path().join("daily.csv");
    fs::write(
        &daily,
        "station_code,date,precip_mm\n2951027,1998-01-01,-4\n",
    )
    .unwrap();
    let out = run(&[
        &"validate",
        &"--stations",
        &common::fixture("stations.csv"),
        &"--daily",
        &daily,
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("negative"), "{}", stdout(&out));
}

#[test]
fn validate_reports_missing_files_as_input_errors() {
    let out = run(&[
        &"validate",
        &"--stations",
        &"/nonexistent/stations.csv",
        &"--daily",
        &"/nonexistent/daily.csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_variogram_fit_plot_chain_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let samples = tmp.path().join("samples.csv");
    let vgm = tmp.path().join("variogram.csv");
    let fits = tmp.path().join("fits.csv");
    let svg = tmp.path().join("chart.svg");

    let out = run(&[
        &"simulate",
        &"--n-points",
        &"60",
        &"--slope",
        &"80",
        &"--nugget",
        &"5",
        &"--seed",
        &"11",
        &"--out",
        &samples,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let out = run(&[&"variogram", &"--samples", &samples, &"--out", &vgm]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let out = run(&[&"fit", &"--variogram", &vgm, &"--out", &fits]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let out = run(&[
        &"plot",
        &"--variogram",
        &vgm,
        &"--fits",
        &fits,
        &"--out",
        &svg,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let doc = fs::read_to_string(&svg).unwrap();
    assert!(doc.starts_with("<svg"));
    let fit_text = fs::read_to_string(&fits).unwrap();
    assert!(fit_text.lines().count() == 2, "{fit_text}");
}

#[test]
fn fit_on_two_bins_exits_with_the_degenerate_code() {
    let tmp = tempfile::tempdir().unwrap();
    let vgm = tmp.path().join("two.csv");
    fs::write(&vgm, "bin_index,N,h,V\n0,5,0.1,10\n1,8,0.3,20\n").unwrap();
    let out = run(&[&"fit", &"--variogram", &vgm]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn variogram_with_no_pairs_in_range_exits_with_the_degenerate_code() {
    let tmp = tempfile::tempdir().unwrap();
    let samples = tmp.path().join("far.csv");
    fs::write(&samples, "x,y,z\n0,0,1\n100,100,2\n200,0,3\n").unwrap();
    let out = run(&[&"variogram", &"--samples", &samples]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("no pairs"), "{}", stderr(&out));
}

#[test]
fn variogram_supports_great_circle_distances() {
    let tmp = tempfile::tempdir().unwrap();
    let samples = tmp.path().join("near.csv");
    fs::write(&samples, "x,y,z\n0,0,1\n0.05,0,2\n0,0.05,3\n").unwrap();
    let out = run(&[
        &"variogram",
        &"--samples",
        &samples,
        &"--great-circle",
        &"--bin-width",
        &"2",
        &"--max-lag",
        &"20",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).lines().count() > 1, "{}", stdout(&out));
}

#[test]
fn plot_draws_one_marker_per_reference_bin() {
    let tmp = tempfile::tempdir().unwrap();
    let fits = tmp.path().join("fits.csv");
    let svg = tmp.path().join("chart.svg");
    let out = run(&[
        &"fit",
        &"--variogram",
        &common::fixture("reference_variogram.csv"),
        &"--out",
        &fits,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = run(&[
        &"plot",
        &"--variogram",
        &common::fixture("reference_variogram.csv"),
        &"--fits",
        &fits,
        &"--out",
        &svg,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = fs::read_to_string(&svg).unwrap();
    assert_eq!(doc.matches("<circle").count(), 20);
}

#[test]
fn maxima_extracts_known_window_sums() {
    let tmp = tempfile::tempdir().unwrap();
    let stations = tmp.path().join("stations.csv");
    let daily = tmp.path().join("daily.csv");
    fs::write(
        &stations,
        "code,name,lat,lon,network\n100,Solo,-30.00,-51.00,SYN\n",
    )
    .unwrap();
    fs::write(
        &daily,
        "station_code,date,precip_mm\n\
         100,1998-01-01,5.0\n\
         100,1998-01-02,10.0\n\
         100,1998-01-03,0.5\n",
    )
    .unwrap();
    let out = run(&[
        &"maxima",
        &"--stations",
        &stations,
        &"--daily",
        &daily,
        &"--years",
        &"1998",
        &"--completeness",
        &"0",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "station_code,year,k,max_mm,day_of_year\n\
         100,1998,1,10,2\n\
         100,1998,2,15,1\n\
         100,1998,3,15.5,1\n\
         100,1998,4,15.5,1\n\
         100,1998,5,15.5,1\n"
    );
}

#[test]
fn classify_replays_the_bundled_reference_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("cls");
    let out = run(&[
        &"classify",
        &"--percentages",
        &common::fixture("reference_percentages.csv"),
        &"--enso",
        &common::fixture("enso.csv"),
        &"--out",
        &out_dir,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let classes = fs::read_to_string(out_dir.join("classes.csv")).unwrap();
    let reference = fs::read_to_string(common::fixture("reference_classes.csv")).unwrap();
    let mut got: Vec<(i32, u8)> = Vec::new();
    for line in classes.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        got.push((f[0].parse().unwrap(), f[3].parse().unwrap()));
    }
    let mut want: Vec<(i32, u8)> = Vec::new();
    for line in reference.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        want.push((f[0].parse().unwrap(), f[2].parse().unwrap()));
    }
    assert_eq!(got, want);

    let crosstab = fs::read_to_string(out_dir.join("crosstab.csv")).unwrap();
    assert!(crosstab.contains("el_nino,5,0,5,1,11"), "{crosstab}");
    assert!(crosstab.contains("la_nina,4,3,4,2,13"), "{crosstab}");
    assert!(crosstab.contains("no_sign,4,0,1,1,6"), "{crosstab}");
    assert!(crosstab.contains("total,13,3,10,4,30"), "{crosstab}");
}

#[test]
fn analyze_writes_the_full_bundle_for_two_years() {
    let tmp = tempfile::tempdir().unwrap();
    let (stations, daily, enso) = common::write_synthetic_inputs(tmp.path(), 10, 1998, 1999, 77);
    let bundle = tmp.path().join("bundle");
    let out = run(&[
        &"analyze",
        &"--stations",
        &stations,
        &"--daily",
        &daily,
        &"--enso",
        &enso,
        &"--years",
        &"1998..1999",
        &"--out",
        &bundle,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let fits = fs::read_to_string(bundle.join("fits.csv")).unwrap();
    assert_eq!(fits.lines().count(), 21, "{fits}");
    for name in [
        "maxima.csv",
        "percentages.csv",
        "classes.csv",
        "crosstab.csv",
        "summary.csv",
        "manifest.json",
        "variogram_1998_MaxI_01.csv",
        "variogram_1999_DiaM_05.csv",
    ] {
        assert!(bundle.join(name).exists(), "missing {name}");
    }
    assert!(!bundle.join("INCOMPLETE").exists());

    let manifest = fs::read_to_string(bundle.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"sha256\""), "{manifest}");
    assert!(manifest.contains("\"years\": \"1998..1999\""), "{manifest}");
}

#[test]
fn analyze_abort_leaves_the_partial_output_marker() {
    let tmp = tempfile::tempdir().unwrap();
    let (stations, daily, _) = common::write_synthetic_inputs(tmp.path(), 6, 1998, 1999, 55);
    let enso = tmp.path().join("enso_short.csv");
    fs::write(&enso, "year,phase\n1998,el_nino\n").unwrap();
    let bundle = tmp.path().join("bundle");
    let out = run(&[
        &"analyze",
        &"--stations",
        &stations,
        &"--daily",
        &daily,
        &"--enso",
        &enso,
        &"--years",
        &"1998..1999",
        &"--out",
        &bundle,
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("1999"), "{}", stderr(&out));
    assert!(bundle.join("INCOMPLETE").exists());
}

#[test]
fn fit_honours_the_unweighted_flag() {
    let out_w = run(&[
        &"fit",
        &"--variogram",
        &common::fixture("reference_variogram.csv"),
    ]);
    let out_u = run(&[
        &"fit",
        &"--variogram",
        &common::fixture("reference_variogram.csv"),
        &"--unweighted",
    ]);
    assert_eq!(out_w.status.code(), Some(0));
    assert_eq!(out_u.status.code(), Some(0));
    let w = stdout(&out_w);
    let u = stdout(&out_u);
    assert!(w.lines().nth(1).unwrap().ends_with(",true"), "{w}");
    assert!(u.lines().nth(1).unwrap().ends_with(",false"), "{u}");
    assert_ne!(w.lines().nth(1), u.lines().nth(1));
}
