//! Human Mortality Database cohort files (1x1 deaths and exposures), cohort
//! selection, and a normalized long-format CSV.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gg_model::{AgeGrid, STANDARD_START_AGES};
use crate::posterior::{CohortDataset, Sex};

/// Oldest single-year age; the open interval above it is never modelled.
pub const MAX_SINGLE_AGE: u32 = 109;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HmdAge {
    Single(u32),
    /// Open interval such as `110+`.
    Open(u32),
}

impl std::fmt::Display for HmdAge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HmdAge::Single(a) => write!(f, "{a}"),
            HmdAge::Open(a) => write!(f, "{a}+"),
        }
    }
}

/// One data line; `None` marks a missing (".") value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmdRecord {
    pub year: i32,
    pub age: HmdAge,
    pub female: Option<f64>,
    pub male: Option<f64>,
    pub total: Option<f64>,
}

impl HmdRecord {
    pub fn value(&self, sex: Sex) -> Option<f64> {
        match sex {
            Sex::Female => self.female,
            Sex::Male => self.male,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HmdTable {
    /// Description lines preceding the column header, kept verbatim.
    pub preamble: Vec<String>,
    pub records: Vec<HmdRecord>,
    pub country: Option<String>,
    pub source: Option<PathBuf>,
}

fn parse_value(tok: &str, line: usize) -> Result<Option<f64>> {
    if tok == "." {
        return Ok(None);
    }
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Some)
        .ok_or_else(|| Error::Parse { line, message: format!("not a number: {tok:?}") })
}

fn parse_age(tok: &str, line: usize) -> Result<HmdAge> {
    let bad = || Error::Parse { line, message: format!("bad age label {tok:?}") };
    match tok.strip_suffix('+') {
        Some(open) => open.parse().map(HmdAge::Open).map_err(|_| bad()),
        None => tok.parse().map(HmdAge::Single).map_err(|_| bad()),
    }
}

fn is_column_header(line: &str) -> bool {
    let mut toks = line.split_whitespace();
    matches!((toks.next(), toks.next()), (Some("Year"), Some("Age")))
}

/// Parses an HMD cohort 1x1 file: description lines, a `Year Age Female Male
/// Total` header, then whitespace-delimited rows.
pub fn parse_hmd(content: &str) -> Result<HmdTable> {
    let mut lines = content.lines().enumerate();
    let mut preamble = Vec::new();
    loop {
        match lines.next() {
            Some((_, l)) if is_column_header(l) => break,
            Some((_, l)) => preamble.push(l.to_string()),
            None => {
                return Err(Error::Parse {
                    line: preamble.len(),
                    message: "missing 'Year Age Female Male Total' column header".into(),
                })
            }
        }
    }
    let country = preamble
        .iter()
        .find(|l| !l.trim().is_empty())
        .and_then(|l| l.split(',').next())
        .map(|c| c.trim().to_string())
        .filter(|c| !c.is_empty());

    let mut records = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(Error::Parse { line: n, message: format!("expected 5 columns, found {}", toks.len()) });
        }
        let year = toks[0]
            .parse()
            .map_err(|_| Error::Parse { line: n, message: format!("bad year {:?}", toks[0]) })?;
        records.push(HmdRecord {
            year,
            age: parse_age(toks[1], n)?,
            female: parse_value(toks[2], n)?,
            male: parse_value(toks[3], n)?,
            total: parse_value(toks[4], n)?,
        });
    }
    Ok(HmdTable { preamble, records, country, source: None })
}

pub fn read_hmd_file(path: impl AsRef<Path>) -> Result<HmdTable> {
    let path = path.as_ref();
    let mut table = parse_hmd(&std::fs::read_to_string(path)?)?;
    table.source = Some(path.to_path_buf());
    Ok(table)
}

impl HmdTable {
    /// Text in the HMD layout; parsing it again gives back the same records.
    pub fn to_hmd_string(&self) -> String {
        let mut out = String::new();
        for l in &self.preamble {
            out.push_str(l);
            out.push('\n');
        }
        out.push_str("  Year          Age             Female            Male           Total\n");
        let fmt = |v: Option<f64>| v.map_or_else(|| ".".to_string(), |v| format!("{v}"));
        for r in &self.records {
            let _ = writeln!(
                out,
                "  {:<13} {:<15} {:>14} {:>15} {:>15}",
                r.year,
                r.age.to_string(),
                fmt(r.female),
                fmt(r.male),
                fmt(r.total)
            );
        }
        out
    }
}

/// Cohorts need at least `min_age_groups` observed single ages from `start_age` up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRule {
    pub start_age: u32,
    pub min_age_groups: usize,
}

impl SelectionRule {
    /// The sanctioned pairs 50/50, 60/40, 70/30, 80/20.
    pub fn standard(start_age: u32) -> Result<Self> {
        if !STANDARD_START_AGES.contains(&start_age) {
            return Err(Error::Argument(format!(
                "start age {start_age} has no standard rule (use one of {STANDARD_START_AGES:?} or an override)"
            )));
        }
        Ok(Self { start_age, min_age_groups: (100 - start_age) as usize })
    }

    /// Any start age at or below 109 with a threshold of at least one age group.
    pub fn custom(start_age: u32, min_age_groups: usize) -> Result<Self> {
        if start_age > MAX_SINGLE_AGE || min_age_groups == 0 {
            return Err(Error::Argument(format!(
                "selection rule needs start_age <= {MAX_SINGLE_AGE} and min_age_groups >= 1, got {start_age}/{min_age_groups}"
            )));
        }
        Ok(Self { start_age, min_age_groups })
    }

    pub fn n_ages(&self) -> usize {
        (MAX_SINGLE_AGE - self.start_age + 1) as usize
    }
}

/// What happened to the raw values on the way into a dataset.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BuildReport {
    /// Sum of |rounded - raw| over observed death counts.
    pub rounding_delta: f64,
    pub rounded_cells: usize,
    /// Cells whose exposure was missing while deaths were present; deaths set to 0.
    pub forced_zero_cells: usize,
    /// Positive deaths against zero exposure; treated as unobserved.
    pub inconsistent_cells: usize,
    pub excluded_cohorts: Vec<i32>,
    /// Cohort years missing between the first and last retained cohort.
    pub gaps: Vec<i32>,
}

#[derive(Debug, Clone)]
pub struct HmdBuild {
    pub dataset: CohortDataset,
    pub report: BuildReport,
}

type Cells = BTreeMap<(i32, u32), Option<f64>>;

fn single_age_cells(t: &HmdTable, sex: Sex, start_age: u32) -> Cells {
    t.records
        .iter()
        .filter_map(|r| match r.age {
            HmdAge::Single(a) if (start_age..=MAX_SINGLE_AGE).contains(&a) => Some(((r.year, a), r.value(sex))),
            _ => None,
        })
        .collect()
}

/// Cohort-by-age dataset from paired deaths and exposures tables for one sex.
///
/// A cell is observed when both values are present; observed deaths are
/// rounded to integers. Cohorts with fewer than `rule.min_age_groups`
/// observed ages are dropped; the open age group is always excluded.
pub fn build_dataset(deaths: &HmdTable, exposures: &HmdTable, sex: Sex, rule: SelectionRule) -> Result<HmdBuild> {
    if let (Some(a), Some(b)) = (&deaths.country, &exposures.country) {
        if a != b {
            return Err(Error::Argument(format!("deaths are for {a:?} but exposures for {b:?}")));
        }
    }
    let d_cells = single_age_cells(deaths, sex, rule.start_age);
    let e_cells = single_age_cells(exposures, sex, rule.start_age);
    let years: BTreeSet<i32> = d_cells.keys().chain(e_cells.keys()).map(|k| k.0).collect();
    let n_ages = rule.n_ages();
    let mut report = BuildReport::default();

    struct Row {
        year: i32,
        deaths: Vec<u64>,
        exposures: Vec<f64>,
        observed: Vec<bool>,
    }
    let mut kept: Vec<Row> = Vec::new();
    for &year in &years {
        let mut row = Row { year, deaths: vec![0; n_ages], exposures: vec![0.0; n_ages], observed: vec![false; n_ages] };
        let mut rounded_delta = 0.0;
        let (mut rounded, mut forced, mut inconsistent) = (0, 0, 0);
        for x in 0..n_ages {
            let age = rule.start_age + x as u32;
            let d = d_cells.get(&(year, age)).copied().flatten();
            let e = e_cells.get(&(year, age)).copied().flatten();
            match (d, e) {
                (Some(d), Some(e)) if d >= 0.0 && e >= 0.0 => {
                    let r = d.round();
                    if r > 0.0 && e == 0.0 {
                        inconsistent += 1;
                        continue;
                    }
                    if r != d {
                        rounded += 1;
                        rounded_delta += (r - d).abs();
                    }
                    row.deaths[x] = r as u64;
                    row.exposures[x] = e;
                    row.observed[x] = true;
                }
                (Some(d), None) if d > 0.0 => forced += 1,
                (Some(d), _) if d < 0.0 => {
                    return Err(Error::Argument(format!("negative deaths {d} for cohort {year} age {age}")))
                }
                (_, Some(e)) if e < 0.0 => {
                    return Err(Error::Argument(format!("negative exposure {e} for cohort {year} age {age}")))
                }
                _ => {}
            }
        }
        if row.observed.iter().filter(|o| **o).count() >= rule.min_age_groups {
            report.rounding_delta += rounded_delta;
            report.rounded_cells += rounded;
            report.forced_zero_cells += forced;
            report.inconsistent_cells += inconsistent;
            kept.push(row);
        } else {
            report.excluded_cohorts.push(year);
        }
    }
    if kept.is_empty() {
        return Err(Error::Selection(format!(
            "no cohort has {} observed age groups from age {}",
            rule.min_age_groups, rule.start_age
        )));
    }
    let (first, last) = (kept[0].year, kept[kept.len() - 1].year);
    report.gaps = (first..=last).filter(|y| !kept.iter().any(|r| r.year == *y)).collect();

    let grid = AgeGrid::new(rule.start_age, n_ages)?;
    let cohorts = kept.iter().map(|r| r.year).collect();
    let deaths_v = kept.iter().flat_map(|r| r.deaths.iter().copied()).collect();
    let exposures_v = kept.iter().flat_map(|r| r.exposures.iter().copied()).collect();
    let observed = kept.iter().flat_map(|r| r.observed.iter().copied()).collect();
    let country = deaths.country.clone().or_else(|| exposures.country.clone()).unwrap_or_default();
    let dataset = CohortDataset::new(grid, cohorts, deaths_v, exposures_v, observed)?.with_metadata(country, Some(sex));
    Ok(HmdBuild { dataset, report })
}

#[derive(Debug, Serialize, Deserialize)]
struct NormalizedRow {
    cohort: i32,
    age: u32,
    deaths: f64,
    exposure: f64,
    /// 1 marks an unobserved cell.
    mask: u8,
}

/// Long format: one row per cell with columns cohort, age, deaths, exposure, mask.
pub fn write_normalized_csv<W: Write>(data: &CohortDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (t, &cohort) in data.cohorts().iter().enumerate() {
        for (x, age) in data.grid().ages().enumerate() {
            let observed = data.is_observed(t, x);
            w.serialize(NormalizedRow {
                cohort,
                age,
                deaths: data.deaths(t, x) as f64,
                exposure: data.exposure(t, x),
                mask: u8::from(!observed),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads the long format back. Cells absent from the file are unobserved;
/// the grid spans the smallest to the largest age and cohort present.
pub fn read_normalized_csv<R: Read>(reader: R) -> Result<CohortDataset> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut cells: BTreeMap<(i32, u32), (u64, f64, bool)> = BTreeMap::new();
    for (i, row) in rdr.deserialize::<NormalizedRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        if row.mask > 1 {
            return Err(Error::Parse { line, message: format!("mask must be 0 or 1, got {}", row.mask) });
        }
        let observed = row.mask == 0;
        if observed && (!(row.deaths >= 0.0) || !(row.exposure >= 0.0) || !row.exposure.is_finite()) {
            return Err(Error::Parse { line, message: "observed cells need deaths >= 0 and finite exposure >= 0".into() });
        }
        let (d, e) = if observed { (row.deaths.round() as u64, row.exposure) } else { (0, 0.0) };
        if cells.insert((row.cohort, row.age), (d, e, observed)).is_some() {
            return Err(Error::Parse { line, message: format!("duplicate cell cohort {} age {}", row.cohort, row.age) });
        }
    }
    let (Some(first), Some(last)) = (cells.keys().map(|k| k.0).min(), cells.keys().map(|k| k.0).max()) else {
        return Err(Error::Argument("normalized CSV has no rows".into()));
    };
    let min_age = cells.keys().map(|k| k.1).min().unwrap_or(0);
    let max_age = cells.keys().map(|k| k.1).max().unwrap_or(0);
    let grid = AgeGrid::new(min_age, (max_age - min_age + 1) as usize)?;
    let cohorts: Vec<i32> = (first..=last).collect();
    let n = cohorts.len() * grid.n_ages;
    let (mut deaths, mut exposures, mut observed) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for &c in &cohorts {
        for age in min_age..=max_age {
            let (d, e, o) = cells.get(&(c, age)).copied().unwrap_or((0, 0.0, false));
            deaths.push(d);
            exposures.push(e);
            observed.push(o);
        }
    }
    CohortDataset::new(grid, cohorts, deaths, exposures, observed)
}
