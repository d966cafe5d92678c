//! Pass/fail rulings for individual students with one missing grade.
//!
//! The missing grade is estimated once per repetition, each time from a fresh
//! random training subset of the student's own year-and-region cohort. The
//! pass is granted when strictly more than half of the repetitions estimate a
//! passing grade.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybrid::{modal_grade, ClassMode, DecisionRule, HybridConfig, HybridImputer};
use crate::ingest::{build_cohort, scan_rescuable, Cohort, CohortFilter, RescuableCase};
use crate::model::{is_passing, Observation, StudentRecord, TargetIndex};
use crate::regression;
use crate::sampling::{derive_seed, split, SplitConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Engine {
    Regression,
    /// Most frequent grade for a similar class, average for a completed one.
    HybridRecommended,
    HybridAverage,
    HybridMostFrequent,
}

impl Engine {
    fn hybrid_rule(self, mode: ClassMode) -> DecisionRule {
        match self {
            Engine::HybridAverage => DecisionRule::Average,
            Engine::HybridMostFrequent => DecisionRule::MostFrequent,
            _ => DecisionRule::recommended(mode),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Regression => "regression",
            Engine::HybridRecommended => "hybrid",
            Engine::HybridAverage => "hybrid-avg",
            Engine::HybridMostFrequent => "hybrid-mode",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescueParams {
    pub reps: usize,
    pub seed: u64,
    pub split: SplitConfig,
    pub hybrid: HybridConfig,
    /// Restrict the cohort to the student's gender as well.
    pub same_gender: bool,
}

impl Default for RescueParams {
    fn default() -> Self {
        RescueParams {
            reps: 100,
            seed: 0,
            split: SplitConfig::default(),
            hybrid: HybridConfig::default(),
            same_gender: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    PassGranted,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::PassGranted => "pass-granted",
            Verdict::Fail => "fail",
        })
    }
}

/// Neighbor-class statistics across repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridSummary {
    /// Average over repetitions of the class mean grade.
    pub mean_grade: f64,
    /// Most frequent class modal grade across repetitions.
    pub modal_grade: u8,
    /// Repetitions that decided with a similar class.
    pub similar_reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescueDecision {
    pub case: RescuableCase,
    pub engine: Engine,
    pub reps: usize,
    pub pass_count: usize,
    /// Share of repetitions estimating a pass.
    pub grade4p: f64,
    pub per_rep_estimates: Vec<f64>,
    pub mean_estimate: f64,
    pub hybrid: Option<HybridSummary>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RescueOutcome {
    Decided(RescueDecision),
    Undecidable { case: RescuableCase, reason: String },
}

impl RescueOutcome {
    pub fn case(&self) -> &RescuableCase {
        match self {
            RescueOutcome::Decided(d) => &d.case,
            RescueOutcome::Undecidable { case, .. } => case,
        }
    }

    pub fn decision(&self) -> Option<&RescueDecision> {
        match self {
            RescueOutcome::Decided(d) => Some(d),
            RescueOutcome::Undecidable { .. } => None,
        }
    }
}

/// Majority rule: strictly more than half the repetitions must pass.
pub fn verdict_for(pass_count: usize, reps: usize) -> Verdict {
    if 2 * pass_count > reps {
        Verdict::PassGranted
    } else {
        Verdict::Fail
    }
}

struct RepEstimate {
    value: f64,
    mean: Option<f64>,
    modal: Option<u8>,
    mode: Option<ClassMode>,
}

fn estimate_once(obs: &[Observation], query: [u8; 3], engine: Engine, params: &RescueParams, rep: usize) -> Result<RepEstimate> {
    let s = split(obs.len(), params.split, derive_seed(params.seed, rep as u64))?;
    let train: Vec<Observation> = s.train.iter().map(|&i| obs[i]).collect();
    match engine {
        Engine::Regression => {
            let model = regression::fit(&train)?;
            Ok(RepEstimate {
                value: model.predict(query),
                mean: None,
                modal: None,
                mode: None,
            })
        }
        _ => {
            let est = HybridImputer::new(params.hybrid, &train)?.estimate(query)?;
            let rule = engine.hybrid_rule(est.class.mode);
            Ok(RepEstimate {
                value: est.value(rule),
                mean: Some(est.mean_grade),
                modal: Some(est.modal_grade),
                mode: Some(est.class.mode),
            })
        }
    }
}

pub fn predict_case(case: &RescuableCase, cohort: &Cohort, engine: Engine, params: &RescueParams) -> Result<RescueDecision> {
    if !case.valid {
        return Err(Error::Refused {
            case_id: case.case_id,
            reason: "not a valid rescue candidate".into(),
        });
    }
    if cohort.target != case.missing_index {
        return Err(Error::Refused {
            case_id: case.case_id,
            reason: format!(
                "grade {} is observed; the missing grade is {}",
                cohort.target, case.missing_index
            ),
        });
    }
    if params.reps == 0 {
        return Err(Error::InvalidConfig("reps must be at least 1".into()));
    }
    let obs = cohort.observations();
    if obs.len() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: obs.len(),
        });
    }

    let reps = (0..params.reps)
        .into_par_iter()
        .map(|b| estimate_once(&obs, case.observed, engine, params, b))
        .collect::<Result<Vec<_>>>()?;

    let mut pass_count = 0;
    for r in &reps {
        pass_count += usize::from(is_passing(r.value)?);
    }
    let n = reps.len();
    let per_rep_estimates: Vec<f64> = reps.iter().map(|r| r.value).collect();
    let mean_estimate = per_rep_estimates.iter().sum::<f64>() / n as f64;
    let hybrid = (engine != Engine::Regression).then(|| HybridSummary {
        mean_grade: reps.iter().filter_map(|r| r.mean).sum::<f64>() / n as f64,
        modal_grade: modal_grade(reps.iter().filter_map(|r| r.modal)).unwrap_or(0),
        similar_reps: reps.iter().filter(|r| r.mode == Some(ClassMode::Similar)).count(),
    });

    Ok(RescueDecision {
        case: case.clone(),
        engine,
        reps: n,
        pass_count,
        grade4p: pass_count as f64 / n as f64,
        per_rep_estimates,
        mean_estimate,
        hybrid,
        verdict: verdict_for(pass_count, n),
    })
}

/// The cohort a case is judged against: same year and region, complete
/// records only, optionally same gender.
pub fn cohort_for(records: &[StudentRecord], case: &RescuableCase, same_gender: bool) -> Cohort {
    let filter = CohortFilter {
        year: Some(case.year),
        region: Some(case.region),
        gender: same_gender.then_some(case.gender),
        complete_only: true,
    };
    build_cohort(records, filter, case.missing_index)
}

pub fn rescue_all(records: &[StudentRecord], target: TargetIndex, engine: Engine, params: &RescueParams) -> Vec<RescueOutcome> {
    let cases: Vec<RescuableCase> = scan_rescuable(records, target).into_iter().filter(|c| c.valid).collect();
    cases
        .into_par_iter()
        .map(|case| {
            let cohort = cohort_for(records, &case, params.same_gender);
            match predict_case(&case, &cohort, engine, params) {
                Ok(d) => RescueOutcome::Decided(d),
                Err(e) => RescueOutcome::Undecidable {
                    reason: e.to_string(),
                    case,
                },
            }
        })
        .collect()
}
