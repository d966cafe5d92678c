//! Synthetic exam populations.
//!
//! Each student gets a latent ability `a ~ N(ability_mean, ability_spread)`;
//! every core grade is `clamp(round(a + e), 1, 9)` with independent
//! `e ~ N(0, noise_spread)`. Rounding is half away from zero. With
//! probability `missing_rate` the target grade is replaced by the missing
//! sentinel.
//!
//! Record `i` draws from its own stream seeded by `(seed, i)`, so any range
//! of records can be produced independently and matches serial output.

use std::collections::HashSet;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Grade, StudentRecord, TargetIndex};
use crate::sampling::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n_records: usize,
    pub years: Vec<i32>,
    pub regions: Vec<u8>,
    /// Fraction of female students.
    pub gender_split: f64,
    pub ability_mean: f64,
    pub ability_spread: f64,
    pub noise_spread: f64,
    pub missing_rate: f64,
    pub target: TargetIndex,
    pub seed: u64,
    pub first_case_id: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_records: 1000,
            years: (2012..=2017).collect(),
            regions: (1..=6).collect(),
            gender_split: 0.5,
            ability_mean: 5.0,
            ability_spread: 2.0,
            noise_spread: 1.0,
            missing_rate: 0.0,
            target: TargetIndex::SES,
            seed: 0,
            first_case_id: 1,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_records == 0 {
            return bad("n_records must be at least 1".into());
        }
        if self.years.is_empty() || self.regions.is_empty() {
            return bad("years and regions must be nonempty".into());
        }
        if let Some(r) = self.regions.iter().find(|r| !(1..=6).contains(*r)) {
            return bad(format!("region {r} outside 1..=6"));
        }
        if !(0.0..=1.0).contains(&self.gender_split) {
            return bad(format!("gender_split {} outside [0, 1]", self.gender_split));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return bad(format!("missing_rate {} outside [0, 1)", self.missing_rate));
        }
        for (name, v) in [("ability_spread", self.ability_spread), ("noise_spread", self.noise_spread)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !self.ability_mean.is_finite() {
            return bad("ability_mean must be finite".into());
        }
        if self.first_case_id == 0 {
            return bad("first_case_id must be positive".into());
        }
        Ok(())
    }
}

fn to_grade(x: f64) -> Grade {
    // f64::round rounds half away from zero.
    let g = x.round().clamp(1.0, 9.0) as i64;
    Grade::from_raw(g)
}

fn one_record(config: &GenConfig, i: usize) -> StudentRecord {
    let mut rng = rng_from_seed(derive_seed(config.seed, i as u64));
    let year = config.years[rng.random_range(0..config.years.len())];
    let region = config.regions[rng.random_range(0..config.regions.len())];
    let gender = if rng.random::<f64>() < config.gender_split { 1 } else { 2 };
    let z: f64 = rng.sample(StandardNormal);
    let ability = config.ability_mean + config.ability_spread * z;
    let mut grades = [Grade::MISSING; 4];
    for g in grades.iter_mut() {
        let e: f64 = rng.sample(StandardNormal);
        *g = to_grade(ability + config.noise_spread * e);
    }
    if rng.random::<f64>() < config.missing_rate {
        grades[config.target.slot()] = Grade::MISSING;
    }
    StudentRecord {
        case_id: config.first_case_id + i as u64,
        year,
        gender,
        region,
        grades,
    }
}

pub fn generate(config: &GenConfig) -> Result<Vec<StudentRecord>> {
    generate_range(config, 0..config.n_records)
}

/// Records `range` of the population described by `config`.
pub fn generate_range(config: &GenConfig, range: std::ops::Range<usize>) -> Result<Vec<StudentRecord>> {
    config.validate()?;
    Ok(range.map(|i| one_record(config, i)).collect())
}

/// Append explicit records, refusing case ids already in use.
pub fn embed_cases(records: Vec<StudentRecord>, cases: &[StudentRecord]) -> Result<Vec<StudentRecord>> {
    let mut ids: HashSet<u64> = records.iter().map(|r| r.case_id).collect();
    for c in cases {
        if !ids.insert(c.case_id) {
            return Err(Error::IdCollision(c.case_id));
        }
    }
    let mut out = records;
    out.extend_from_slice(cases);
    Ok(out)
}
