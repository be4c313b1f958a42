//! Coherence categories per year and the ENSO cross-tabulation.
//!
//! A year is spatially coherent when enough of its MaxI fit percentages
//! clear a threshold, and temporally coherent likewise for DiaM. The four
//! categories combine the two flags: 1 neither, 2 temporal only, 3 spatial
//! only, 4 both.

use thiserror::Error;

use crate::csvutil::{self, format_sig10};
use crate::ingest::{EnsoPhase, EnsoTable};

#[derive(Debug, Error)]
pub enum CoherenceError {
    #[error("invalid rule: {0}")]
    BadRule(String),
    #[error("need at least 2 rows to summarize, got {0}")]
    FewRows(usize),
    #[error("year {0} missing from the ENSO table")]
    MissingYear(i32),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

/// Per-year percent-variance-explained for each variable and window length.
#[derive(Debug, Clone, PartialEq)]
pub struct YearPercentages {
    pub year: i32,
    pub n_obs: u32,
    pub maxi_pct: [f64; 5],
    pub diam_pct: [f64; 5],
}

/// Thresholds deciding spatial and temporal coherence.
///
/// The default thresholds (spatial 47, temporal 44, at least 2 of the 5
/// windows) were calibrated by grid search against the bundled reference
/// classification and reproduce it exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceRule {
    pub t_spatial: f64,
    pub t_temporal: f64,
    pub min_windows: usize,
    pub window_set: Vec<u32>,
}

impl Default for CoherenceRule {
    fn default() -> Self {
        CoherenceRule {
            t_spatial: 47.0,
            t_temporal: 44.0,
            min_windows: 2,
            window_set: vec![1, 2, 3, 4, 5],
        }
    }
}

impl CoherenceRule {
    /// Builds a validated rule: the window set must be a non-empty subset
    /// of 1..=5 and min_windows must fit inside it.
    pub fn new(
        t_spatial: f64,
        t_temporal: f64,
        min_windows: usize,
        window_set: Vec<u32>,
    ) -> Result<CoherenceRule, CoherenceError> {
        let mut set = window_set;
        set.sort_unstable();
        set.dedup();
        if set.is_empty() || set.iter().any(|&k| !(1..=5).contains(&k)) {
            return Err(CoherenceError::BadRule(
                "window set must be a non-empty subset of 1..=5".into(),
            ));
        }
        if min_windows == 0 || min_windows > set.len() {
            return Err(CoherenceError::BadRule(format!(
                "min_windows {min_windows} outside 1..={}",
                set.len()
            )));
        }
        if !t_spatial.is_finite() || !t_temporal.is_finite() {
            return Err(CoherenceError::BadRule("thresholds must be finite".into()));
        }
        Ok(CoherenceRule {
            t_spatial,
            t_temporal,
            min_windows,
            window_set: set,
        })
    }
}

/// Four-way coherence label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Category {
    Neither = 1,
    TemporalOnly = 2,
    SpatialOnly = 3,
    Both = 4,
}

impl Category {
    pub fn from_flags(spatial: bool, temporal: bool) -> Category {
        match (spatial, temporal) {
            (false, false) => Category::Neither,
            (false, true) => Category::TemporalOnly,
            (true, false) => Category::SpatialOnly,
            (true, true) => Category::Both,
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<Category> {
        match v {
            1 => Some(Category::Neither),
            2 => Some(Category::TemporalOnly),
            3 => Some(Category::SpatialOnly),
            4 => Some(Category::Both),
            _ => None,
        }
    }
}

/// One classified year.
#[derive(Debug, Clone, PartialEq)]
pub struct YearCoherence {
    pub year: i32,
    pub spatial: bool,
    pub temporal: bool,
    pub category: Category,
    pub phase: Option<EnsoPhase>,
}

/// Applies the rule to one year of percentages; the ENSO phase stays unset.
pub fn classify_year(p: &YearPercentages, rule: &CoherenceRule) -> YearCoherence {
    let hits = |pcts: &[f64; 5], threshold: f64| {
        rule.window_set
            .iter()
            .filter(|&&k| pcts[(k - 1) as usize] >= threshold)
            .count()
    };
    let spatial = hits(&p.maxi_pct, rule.t_spatial) >= rule.min_windows;
    let temporal = hits(&p.diam_pct, rule.t_temporal) >= rule.min_windows;
    YearCoherence {
        year: p.year,
        spatial,
        temporal,
        category: Category::from_flags(spatial, temporal),
        phase: None,
    }
}

/// Fills each record's ENSO phase from the table.
pub fn attach_phases(
    classified: &mut [YearCoherence],
    enso: &EnsoTable,
) -> Result<(), CoherenceError> {
    for c in classified.iter_mut() {
        c.phase = Some(
            enso.phase(c.year)
                .ok_or(CoherenceError::MissingYear(c.year))?,
        );
    }
    Ok(())
}

/// Counts of categories per ENSO phase, with ElNino, LaNina, NoSign row
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossTab {
    counts: [[usize; 4]; 3],
}

impl CrossTab {
    pub fn count(&self, phase: EnsoPhase, category: Category) -> usize {
        self.counts[phase_row(phase)][category as usize - 1]
    }

    pub fn phase_total(&self, phase: EnsoPhase) -> usize {
        self.counts[phase_row(phase)].iter().sum()
    }

    pub fn category_total(&self, category: Category) -> usize {
        self.counts
            .iter()
            .map(|row| row[category as usize - 1])
            .sum()
    }

    pub fn grand_total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }
}

fn phase_row(phase: EnsoPhase) -> usize {
    match phase {
        EnsoPhase::ElNino => 0,
        EnsoPhase::LaNina => 1,
        EnsoPhase::NoSign => 2,
    }
}

/// Cross-tabulates classified years against their ENSO phase. Years without
/// an attached phase are looked up in the table.
pub fn crosstab_enso(
    classified: &[YearCoherence],
    enso: &EnsoTable,
) -> Result<CrossTab, CoherenceError> {
    let mut counts = [[0usize; 4]; 3];
    for c in classified {
        let phase = match c.phase {
            Some(p) => p,
            None => enso
                .phase(c.year)
                .ok_or(CoherenceError::MissingYear(c.year))?,
        };
        counts[phase_row(phase)][c.category as usize - 1] += 1;
    }
    Ok(CrossTab { counts })
}

/// Mean and sample standard deviation of one summarized column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnSummary {
    pub mean: f64,
    pub sd: f64,
}

/// Column-wise summary over years: the observation counts and all ten
/// percentage columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentageSummary {
    pub n_obs: ColumnSummary,
    pub maxi: [ColumnSummary; 5],
    pub diam: [ColumnSummary; 5],
}

/// Arithmetic mean and sample (n-1) standard deviation per column. Values
/// stay full precision; rounding is a display concern.
pub fn summarize_percentages(
    rows: &[YearPercentages],
) -> Result<PercentageSummary, CoherenceError> {
    if rows.len() < 2 {
        return Err(CoherenceError::FewRows(rows.len()));
    }
    let column = |values: Vec<f64>| {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        ColumnSummary {
            mean,
            sd: var.sqrt(),
        }
    };
    let n_obs = column(rows.iter().map(|r| f64::from(r.n_obs)).collect());
    let mut maxi = [ColumnSummary { mean: 0.0, sd: 0.0 }; 5];
    let mut diam = [ColumnSummary { mean: 0.0, sd: 0.0 }; 5];
    for i in 0..5 {
        maxi[i] = column(rows.iter().map(|r| r.maxi_pct[i]).collect());
        diam[i] = column(rows.iter().map(|r| r.diam_pct[i]).collect());
    }
    Ok(PercentageSummary { n_obs, maxi, diam })
}

/// Rounds the way the summary tables print: nearest integer, halves away
/// from zero.
pub fn display_round(x: f64) -> i64 {
    x.round() as i64
}

const PERCENTAGES_HEADER: &str =
    "year,n_obs,maxi_01,maxi_02,maxi_03,maxi_04,maxi_05,diam_01,diam_02,diam_03,diam_04,diam_05";

/// Parses a percentages table (`year,n_obs,maxi_01..maxi_05,diam_01..diam_05`).
pub fn parse_year_percentages(text: &str) -> Result<Vec<YearPercentages>, CoherenceError> {
    csvutil::expect_header(text, PERCENTAGES_HEADER)
        .map_err(|msg| CoherenceError::Malformed { line: 1, msg })?;
    let mut out = Vec::new();
    for (line, raw) in csvutil::data_lines(text) {
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 12 {
            return Err(CoherenceError::Malformed {
                line,
                msg: format!("expected 12 fields, found {}", fields.len()),
            });
        }
        let bad = |what: &str, field: &str| CoherenceError::Malformed {
            line,
            msg: format!("bad {what} `{field}`"),
        };
        let year = fields[0]
            .trim()
            .parse::<i32>()
            .map_err(|_| bad("year", fields[0]))?;
        let n_obs = fields[1]
            .trim()
            .parse::<u32>()
            .map_err(|_| bad("observation count", fields[1]))?;
        let mut pct = [0.0f64; 10];
        for (i, slot) in pct.iter_mut().enumerate() {
            let field = fields[2 + i];
            let v = field
                .trim()
                .parse::<f64>()
                .map_err(|_| bad("percentage", field))?;
            if !(0.0..=100.0).contains(&v) {
                return Err(bad("percentage outside [0, 100]", field));
            }
            *slot = v;
        }
        out.push(YearPercentages {
            year,
            n_obs,
            maxi_pct: pct[..5].try_into().expect("five maxi columns"),
            diam_pct: pct[5..].try_into().expect("five diam columns"),
        });
    }
    Ok(out)
}

/// Renders a percentages table.
pub fn percentages_to_csv(rows: &[YearPercentages]) -> String {
    let mut out = String::from(PERCENTAGES_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{}", r.year, r.n_obs));
        for v in r.maxi_pct.iter().chain(r.diam_pct.iter()) {
            out.push(',');
            out.push_str(&format_sig10(*v));
        }
        out.push('\n');
    }
    out
}

/// Renders classified years as `classes.csv`
/// (`year,spatial,temporal,category,phase`).
pub fn classes_to_csv(classified: &[YearCoherence]) -> String {
    let mut out = String::from("year,spatial,temporal,category,phase\n");
    for c in classified {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            c.year,
            c.spatial,
            c.temporal,
            c.category.as_u8(),
            c.phase.map(EnsoPhase::as_str).unwrap_or("")
        ));
    }
    out
}

/// Renders a cross-tab as `crosstab.csv`
/// (`phase,cat1,cat2,cat3,cat4,total`), with a closing totals row.
pub fn crosstab_to_csv(ct: &CrossTab) -> String {
    let mut out = String::from("phase,cat1,cat2,cat3,cat4,total\n");
    for phase in EnsoPhase::ALL {
        out.push_str(phase.as_str());
        for cat in 1..=4u8 {
            out.push_str(&format!(
                ",{}",
                ct.count(phase, Category::from_u8(cat).expect("category in 1..=4"))
            ));
        }
        out.push_str(&format!(",{}\n", ct.phase_total(phase)));
    }
    out.push_str("total");
    for cat in 1..=4u8 {
        out.push_str(&format!(
            ",{}",
            ct.category_total(Category::from_u8(cat).expect("category in 1..=4"))
        ));
    }
    out.push_str(&format!(",{}\n", ct.grand_total()));
    out
}

/// Renders a summary as `summary.csv`: one `average` row and one `sd` row
/// over the eleven columns.
pub fn summary_to_csv(s: &PercentageSummary) -> String {
    let mut out = String::from("stat,n_obs");
    for k in 1..=5 {
        out.push_str(&format!(",maxi_0{k}"));
    }
    for k in 1..=5 {
        out.push_str(&format!(",diam_0{k}"));
    }
    out.push('\n');
    for (name, pick) in [
        (
            "average",
            &(|c: ColumnSummary| c.mean) as &dyn Fn(ColumnSummary) -> f64,
        ),
        ("sd", &|c: ColumnSummary| c.sd),
    ] {
        out.push_str(name);
        out.push_str(&format!(",{}", format_sig10(pick(s.n_obs))));
        for c in s.maxi.iter().chain(s.diam.iter()) {
            out.push_str(&format!(",{}", format_sig10(pick(*c))));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn percentages(year: i32, maxi: [f64; 5], diam: [f64; 5]) -> YearPercentages {
        YearPercentages {
            year,
            n_obs: 50,
            maxi_pct: maxi,
            diam_pct: diam,
        }
    }

    #[test]
    fn spatial_only_year_is_category_three() {
        let p = percentages(
            1979,
            [78.0, 84.0, 80.0, 87.0, 87.0],
            [15.0, 0.0, 13.0, 33.0, 7.0],
        );
        let c = classify_year(&p, &CoherenceRule::default());
        assert!(c.spatial);
        assert!(!c.temporal);
        assert_eq!(c.category, Category::SpatialOnly);
    }

    #[test]
    fn all_zero_percentages_are_category_one() {
        let p = percentages(1990, [0.0; 5], [0.0; 5]);
        let c = classify_year(&p, &CoherenceRule::default());
        assert_eq!(c.category, Category::Neither);
    }

    #[test]
    fn unreachable_thresholds_give_category_one() {
        let rule = CoherenceRule::new(101.0, 101.0, 1, vec![1, 2, 3, 4, 5]).unwrap();
        let p = percentages(2000, [100.0; 5], [100.0; 5]);
        assert_eq!(classify_year(&p, &rule).category, Category::Neither);
    }

    #[test]
    fn zero_thresholds_with_one_window_give_category_four() {
        let rule = CoherenceRule::new(0.0, 0.0, 1, vec![1, 2, 3, 4, 5]).unwrap();
        let p = percentages(2000, [1.0, 0.0, 0.0, 0.0, 0.0], [0.0, 2.0, 0.0, 0.0, 0.0]);
        assert_eq!(classify_year(&p, &rule).category, Category::Both);
    }

    #[test]
    fn rule_bounds_are_validated() {
        assert!(CoherenceRule::new(47.0, 44.0, 0, vec![1, 2]).is_err());
        assert!(CoherenceRule::new(47.0, 44.0, 3, vec![1, 2]).is_err());
        assert!(CoherenceRule::new(47.0, 44.0, 1, vec![]).is_err());
        assert!(CoherenceRule::new(47.0, 44.0, 1, vec![6]).is_err());
        assert!(CoherenceRule::new(47.0, 44.0, 2, vec![2, 3, 4]).is_ok());
    }

    #[test]
    fn raising_percentages_never_loses_coherence() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let mut maxi = [0.0; 5];
            let mut diam = [0.0; 5];
            for v in maxi.iter_mut().chain(diam.iter_mut()) {
                *v = rng.gen_range(0.0..100.0);
            }
            let p = percentages(1980, maxi, diam);
            let windows: Vec<u32> = (1..=5).filter(|_| rng.gen_bool(0.6)).collect();
            let windows = if windows.is_empty() { vec![1] } else { windows };
            let min_windows = rng.gen_range(1..=windows.len());
            let rule = CoherenceRule::new(
                rng.gen_range(0.0..100.0),
                rng.gen_range(0.0..100.0),
                min_windows,
                windows,
            )
            .unwrap();
            let before = classify_year(&p, &rule);
            let mut raised = p.clone();
            let slot = rng.gen_range(0..10);
            let bump = rng.gen_range(0.0..40.0);
            if slot < 5 {
                raised.maxi_pct[slot] = (raised.maxi_pct[slot] + bump).min(100.0);
            } else {
                raised.diam_pct[slot - 5] = (raised.diam_pct[slot - 5] + bump).min(100.0);
            }
            let after = classify_year(&raised, &rule);
            assert!(!before.spatial || after.spatial);
            assert!(!before.temporal || after.temporal);
        }
    }

    #[test]
    fn category_partition_is_total() {
        for (s, t) in [(false, false), (false, true), (true, false), (true, true)] {
            let c = Category::from_flags(s, t);
            assert_eq!(c == Category::Both, s && t);
            assert_eq!(c == Category::SpatialOnly, s && !t);
            assert_eq!(c == Category::TemporalOnly, !s && t);
            assert_eq!(c == Category::Neither, !s && !t);
        }
    }

    fn enso_table(pairs: &[(i32, &str)]) -> EnsoTable {
        let mut text = String::from("year,phase\n");
        for (y, p) in pairs {
            text.push_str(&format!("{y},{p}\n"));
        }
        crate::ingest::parse_enso_table(&text).unwrap()
    }

    #[test]
    fn crosstab_counts_and_totals() {
        let enso = enso_table(&[(1971, "la_nina"), (1972, "el_nino"), (1973, "no_sign")]);
        let classified = vec![
            YearCoherence {
                year: 1971,
                spatial: false,
                temporal: true,
                category: Category::TemporalOnly,
                phase: Some(EnsoPhase::LaNina),
            },
            YearCoherence {
                year: 1972,
                spatial: true,
                temporal: false,
                category: Category::SpatialOnly,
                phase: None,
            },
            YearCoherence {
                year: 1973,
                spatial: true,
                temporal: true,
                category: Category::Both,
                phase: None,
            },
        ];
        let ct = crosstab_enso(&classified, &enso).unwrap();
        assert_eq!(ct.count(EnsoPhase::LaNina, Category::TemporalOnly), 1);
        assert_eq!(ct.count(EnsoPhase::ElNino, Category::SpatialOnly), 1);
        assert_eq!(ct.count(EnsoPhase::NoSign, Category::Both), 1);
        assert_eq!(ct.grand_total(), 3);
    }

    #[test]
    fn empty_crosstab_is_all_zero() {
        let enso = enso_table(&[]);
        let ct = crosstab_enso(&[], &enso).unwrap();
        assert_eq!(ct.grand_total(), 0);
        for phase in EnsoPhase::ALL {
            assert_eq!(ct.phase_total(phase), 0);
        }
    }

    #[test]
    fn crosstab_requires_known_years() {
        let enso = enso_table(&[]);
        let classified = vec![YearCoherence {
            year: 1999,
            spatial: false,
            temporal: false,
            category: Category::Neither,
            phase: None,
        }];
        assert!(matches!(
            crosstab_enso(&classified, &enso),
            Err(CoherenceError::MissingYear(1999))
        ));
    }

    #[test]
    fn identical_rows_have_zero_sd() {
        let row = percentages(1980, [10.0, 20.0, 30.0, 40.0, 50.0], [5.0; 5]);
        let mut other = row.clone();
        other.year = 1981;
        let s = summarize_percentages(&[row, other]).unwrap();
        assert_eq!(s.n_obs.sd, 0.0);
        for c in s.maxi.iter().chain(s.diam.iter()) {
            assert_eq!(c.sd, 0.0);
        }
        assert_eq!(s.maxi[2].mean, 30.0);
    }

    #[test]
    fn summary_requires_two_rows() {
        let row = percentages(1980, [0.0; 5], [0.0; 5]);
        assert!(matches!(
            summarize_percentages(&[row]),
            Err(CoherenceError::FewRows(1))
        ));
    }

    #[test]
    fn display_rounding_is_half_away_from_zero() {
        assert_eq!(display_round(25.5), 26);
        assert_eq!(display_round(-25.5), -26);
        assert_eq!(display_round(25.4999), 25);
    }

    #[test]
    fn percentages_csv_round_trips() {
        let rows = vec![
            percentages(
                1971,
                [0.0, 18.0, 33.0, 30.0, 24.0],
                [75.0, 71.0, 70.0, 59.0, 81.0],
            ),
            percentages(
                1972,
                [38.0, 59.0, 57.0, 57.0, 63.0],
                [0.0, 0.0, 0.0, 16.0, 0.0],
            ),
        ];
        let text = percentages_to_csv(&rows);
        let parsed = parse_year_percentages(&text).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].year, 1971);
        assert_eq!(parsed[1].maxi_pct[0], 38.0);
        assert_eq!(parsed[0].diam_pct[4], 81.0);
    }

    #[test]
    fn out_of_range_percentage_rejected() {
        let text = format!("{PERCENTAGES_HEADER}\n1971,50,0,18,33,30,24,75,71,70,59,101\n");
        assert!(parse_year_percentages(&text).is_err());
    }
}
