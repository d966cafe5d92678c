//! Exam-record files, cohort slicing and the rescuable-case scan.
//!
//! The record file is comma separated with one header line:
//!
//! ```text
//! case_id,year,gender,region,g1,g2,g3,g4
//! 122915,2017,2,1,1,7,7,-1
//! ```
//!
//! Any grade outside 1..=9 is read as missing and written back as `-1`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Grade, Observation, StudentRecord, TargetIndex};

pub const HEADER: [&str; 8] = ["case_id", "year", "gender", "region", "g1", "g2", "g3", "g4"];

pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<StudentRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_records(file)
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<StudentRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);

    let mut records = Vec::new();
    let mut header_seen = false;
    for row in rdr.records() {
        let row = row.map_err(|e| Error::MalformedRow {
            row: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if !header_seen {
            header_seen = true;
            let found: Vec<&str> = row.iter().collect();
            if found != HEADER {
                return Err(Error::Header {
                    expected: HEADER.join(","),
                    found: found.join(","),
                });
            }
            continue;
        }
        if row.len() == 1 && row[0].is_empty() {
            continue;
        }
        records.push(parse_row(&row, line)?);
    }
    Ok(records)
}

fn parse_row(row: &csv::StringRecord, line: u64) -> Result<StudentRecord> {
    if row.len() != HEADER.len() {
        return Err(Error::MalformedRow {
            row: line,
            message: format!("expected {} fields, found {}", HEADER.len(), row.len()),
        });
    }
    let mut values = [0i64; 8];
    for (i, (field, name)) in row.iter().zip(HEADER).enumerate() {
        values[i] = field.parse().map_err(|_| Error::MalformedRow {
            row: line,
            message: format!("{name}: `{field}` is not an integer"),
        })?;
    }
    if values[0] <= 0 {
        return Err(Error::MalformedRow {
            row: line,
            message: format!("case_id: `{}` is not a positive integer", values[0]),
        });
    }
    let year = i32::try_from(values[1]).map_err(|_| Error::MalformedRow {
        row: line,
        message: format!("year: `{}` out of range", values[1]),
    })?;
    let grades = [
        Grade::from_raw(values[4]),
        Grade::from_raw(values[5]),
        Grade::from_raw(values[6]),
        Grade::from_raw(values[7]),
    ];
    StudentRecord::new(values[0] as u64, year, values[2], values[3], grades)
}

pub fn write_records<W: Write>(writer: W, records: &[StudentRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io_err = |e: csv::Error| Error::Io {
        path: "<output>".into(),
        source: std::io::Error::other(e),
    };
    wtr.write_record(HEADER).map_err(io_err)?;
    for r in records {
        let [g1, g2, g3, g4] = r.grades.map(|g| g.raw().to_string());
        wtr.write_record([
            r.case_id.to_string(),
            r.year.to_string(),
            r.gender.to_string(),
            r.region.to_string(),
            g1,
            g2,
            g3,
            g4,
        ])
        .map_err(io_err)?;
    }
    wtr.flush().map_err(|source| Error::Io {
        path: "<output>".into(),
        source,
    })
}

pub fn save_records(path: impl AsRef<Path>, records: &[StudentRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_records(std::io::BufWriter::new(file), records)
}

/// Year/region/gender slice. Unset fields match everything.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortFilter {
    pub year: Option<i32>,
    pub region: Option<u8>,
    pub gender: Option<u8>,
    pub complete_only: bool,
}

impl CohortFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn year_region(year: i32, region: u8) -> Self {
        CohortFilter {
            year: Some(year),
            region: Some(region),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.region {
            if !(1..=6).contains(&r) {
                return Err(Error::InvalidRegion(r as i64));
            }
        }
        if let Some(g) = self.gender {
            if !(1..=2).contains(&g) {
                return Err(Error::InvalidGender(g as i64));
            }
        }
        Ok(())
    }

    pub fn matches(&self, r: &StudentRecord) -> bool {
        self.year.is_none_or(|y| r.year == y)
            && self.region.is_none_or(|x| r.region == x)
            && self.gender.is_none_or(|g| r.gender == g)
            && (!self.complete_only || r.is_complete())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    pub records: Vec<StudentRecord>,
    pub filter: CohortFilter,
    pub target: TargetIndex,
}

impl Cohort {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records with all four grades observed, in original order.
    pub fn complete_view(&self) -> impl Iterator<Item = &StudentRecord> {
        self.records.iter().filter(|r| r.is_complete())
    }

    /// The complete view as training observations, target grade as label.
    pub fn observations(&self) -> Vec<Observation> {
        self.complete_view()
            .filter_map(|r| r.observation(self.target))
            .collect()
    }
}

pub fn build_cohort(records: &[StudentRecord], filter: CohortFilter, target: TargetIndex) -> Cohort {
    Cohort {
        records: records.iter().filter(|r| filter.matches(r)).cloned().collect(),
        filter,
        target,
    }
}

/// A record with exactly one missing core grade.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RescuableCase {
    pub case_id: u64,
    pub year: i32,
    pub region: u8,
    pub gender: u8,
    /// The three observed grades in subject order, target slot removed.
    pub observed: [u8; 3],
    pub missing_index: TargetIndex,
    /// All three observed grades are passing (below 9).
    pub valid: bool,
}

impl RescuableCase {
    pub fn from_record(r: &StudentRecord, target: TargetIndex) -> Option<Self> {
        if r.missing_count() != 1 || !r.grades[target.slot()].is_missing() {
            return None;
        }
        let mut observed = [0u8; 3];
        for (o, slot) in observed.iter_mut().zip(target.predictor_slots()) {
            *o = r.grades[slot].value()?;
        }
        Some(RescuableCase {
            case_id: r.case_id,
            year: r.year,
            region: r.region,
            gender: r.gender,
            observed,
            missing_index: target,
            valid: observed.iter().all(|&g| g < 9),
        })
    }
}

pub fn scan_rescuable(records: &[StudentRecord], target: TargetIndex) -> Vec<RescuableCase> {
    records
        .iter()
        .filter_map(|r| RescuableCase::from_record(r, target))
        .collect()
}
