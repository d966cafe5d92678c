//! Grades, grade bands and exam records.
//!
//! Core exam grades run from 1 (best) to 9 (fail). Grades 1 to 6 are a
//! credit, 7 and 8 a pass and 9 a fail. An absent grade is stored as the
//! sentinel `-1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest grade that still counts as a pass.
pub const PASS_CEILING: f64 = 8.0;

/// A single core-exam grade, observed (1..=9) or missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct Grade(i8);

impl Grade {
    pub const MISSING: Grade = Grade(-1);

    /// Strict constructor: accepts 1..=9 and the missing sentinel only.
    pub fn new(value: i64) -> Result<Self> {
        match value {
            1..=9 | -1 => Ok(Grade(value as i8)),
            other => Err(Error::InvalidGrade(other)),
        }
    }

    /// Lenient constructor used when reading raw files: every value outside
    /// 1..=9 becomes the missing sentinel.
    pub fn from_raw(value: i64) -> Self {
        if (1..=9).contains(&value) {
            Grade(value as i8)
        } else {
            Grade::MISSING
        }
    }

    pub fn observed(value: u8) -> Result<Self> {
        if (1..=9).contains(&value) {
            Ok(Grade(value as i8))
        } else {
            Err(Error::InvalidGrade(value as i64))
        }
    }

    pub fn is_missing(self) -> bool {
        self.0 < 0
    }

    pub fn value(self) -> Option<u8> {
        (!self.is_missing()).then_some(self.0 as u8)
    }

    pub fn raw(self) -> i64 {
        self.0 as i64
    }
}

impl TryFrom<i64> for Grade {
    type Error = Error;

    fn try_from(value: i64) -> Result<Self> {
        Grade::new(value)
    }
}

impl From<Grade> for i64 {
    fn from(g: Grade) -> i64 {
        g.raw()
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GradeBand {
    Credit = 1,
    Pass = 2,
    Fail = 3,
}

impl GradeBand {
    pub fn code(self) -> u8 {
        self as u8
    }
}

pub fn band_of(g: Grade) -> Result<GradeBand> {
    match g.value() {
        None => Err(Error::MissingGrade),
        Some(1..=6) => Ok(GradeBand::Credit),
        Some(7 | 8) => Ok(GradeBand::Pass),
        Some(_) => Ok(GradeBand::Fail),
    }
}

/// Pass test on a real-valued estimate. No rounding is applied: 8.0 passes,
/// anything above 8 fails.
pub fn is_passing(estimate: f64) -> Result<bool> {
    if !estimate.is_finite() {
        return Err(Error::NonFinite(estimate));
    }
    Ok(estimate <= PASS_CEILING)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PassFail {
    Pass,
    Fail,
}

impl PassFail {
    pub fn from_estimate(estimate: f64) -> Result<Self> {
        Ok(if is_passing(estimate)? {
            PassFail::Pass
        } else {
            PassFail::Fail
        })
    }
}

/// Position (1..=4) of the grade being imputed: 1 English, 2 Maths,
/// 3 Sciences, 4 Social and Environmental Studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct TargetIndex(u8);

impl TargetIndex {
    pub const SES: TargetIndex = TargetIndex(4);

    pub fn new(position: i64) -> Result<Self> {
        match position {
            1..=4 => Ok(TargetIndex(position as u8)),
            other => Err(Error::InvalidTarget(other)),
        }
    }

    pub fn position(self) -> u8 {
        self.0
    }

    /// Zero-based slot in a grade array.
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }

    /// Zero-based slots of the three predictor grades, in subject order.
    pub fn predictor_slots(self) -> [usize; 3] {
        let t = self.slot();
        let mut out = [0; 3];
        let mut j = 0;
        for s in 0..4 {
            if s != t {
                out[j] = s;
                j += 1;
            }
        }
        out
    }
}

impl Default for TargetIndex {
    fn default() -> Self {
        TargetIndex::SES
    }
}

impl TryFrom<i64> for TargetIndex {
    type Error = Error;

    fn try_from(value: i64) -> Result<Self> {
        TargetIndex::new(value)
    }
}

impl From<TargetIndex> for i64 {
    fn from(t: TargetIndex) -> i64 {
        t.0 as i64
    }
}

impl fmt::Display for TargetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudentRecord {
    pub case_id: u64,
    pub year: i32,
    /// 1 female, 2 male.
    pub gender: u8,
    /// 1..=6.
    pub region: u8,
    /// English, Maths, Sciences, SES.
    pub grades: [Grade; 4],
}

impl StudentRecord {
    pub fn new(case_id: u64, year: i32, gender: i64, region: i64, grades: [Grade; 4]) -> Result<Self> {
        if case_id == 0 {
            return Err(Error::InvalidCaseId(0));
        }
        if !(1..=2).contains(&gender) {
            return Err(Error::InvalidGender(gender));
        }
        if !(1..=6).contains(&region) {
            return Err(Error::InvalidRegion(region));
        }
        Ok(StudentRecord {
            case_id,
            year,
            gender: gender as u8,
            region: region as u8,
            grades,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.grades.iter().all(|g| !g.is_missing())
    }

    pub fn missing_count(&self) -> usize {
        self.grades.iter().filter(|g| g.is_missing()).count()
    }

    /// The record as a training observation, with the target grade moved to
    /// the label. `None` unless all four grades are observed.
    pub fn observation(&self, target: TargetIndex) -> Option<Observation> {
        let label = self.grades[target.slot()].value()?;
        let mut features = [0u8; 3];
        for (f, slot) in features.iter_mut().zip(target.predictor_slots()) {
            *f = self.grades[slot].value()?;
        }
        Some(Observation { features, target: label })
    }
}

/// Three observed predictor grades and the observed target grade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub features: [u8; 3],
    pub target: u8,
}

impl Observation {
    pub fn new(features: [u8; 3], target: u8) -> Self {
        Observation { features, target }
    }
}
