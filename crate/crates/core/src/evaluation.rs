//! Misclassification rates over repeated random train/test splits.
//!
//! Two error rates are tracked:
//!
//! * `mpf`: the case passed (actual grade below 9) but the estimate fails it;
//! * `mfp`: the case failed (actual grade 9) but the estimate passes it.
//!
//! Both are conditional rates, `mpf = #(pass called fail) / #pass`. A rate
//! whose denominator is zero is `None` rather than zero. Averages over
//! repetitions skip undefined rates and report how many were skipped.
//!
//! With `paper_normalization` the report also carries group-relative rates,
//! where both error counts are divided by the size of the scored group.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybrid::{ClassMode, DecisionRule, HybridConfig, HybridImputer, Neighborhood};
use crate::ingest::Cohort;
use crate::model::{is_passing, Observation};
use crate::regression;
use crate::sampling::{derive_seed, split, SplitConfig};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub n_pass: usize,
    pub n_fail: usize,
    /// Actual pass, predicted fail.
    pub pass_called_fail: usize,
    /// Actual fail, predicted pass.
    pub fail_called_pass: usize,
}

impl Confusion {
    pub fn record(&mut self, actual: u8, predicted_pass: bool) {
        if actual < 9 {
            self.n_pass += 1;
            self.pass_called_fail += usize::from(!predicted_pass);
        } else {
            self.n_fail += 1;
            self.fail_called_pass += usize::from(predicted_pass);
        }
    }

    pub fn total(&self) -> usize {
        self.n_pass + self.n_fail
    }

    pub fn mpf(&self) -> Option<f64> {
        ratio(self.pass_called_fail, self.n_pass)
    }

    pub fn mfp(&self) -> Option<f64> {
        ratio(self.fail_called_pass, self.n_fail)
    }

    /// Pass-called-fail count over the whole group.
    pub fn group_mpf(&self) -> Option<f64> {
        ratio(self.pass_called_fail, self.total())
    }

    pub fn group_mfp(&self) -> Option<f64> {
        ratio(self.fail_called_pass, self.total())
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn confusion(actual: &[u8], predicted: &[f64]) -> Result<Confusion> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut c = Confusion::default();
    for (&a, &p) in actual.iter().zip(predicted) {
        c.record(a, is_passing(p)?);
    }
    Ok(c)
}

/// Rates for one repetition of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepRates {
    pub confusion: Confusion,
    pub mpf: Option<f64>,
    pub mfp: Option<f64>,
    pub group_mpf: Option<f64>,
    pub group_mfp: Option<f64>,
    pub adjusted_r2: Option<f64>,
    pub degenerate: bool,
}

impl RepRates {
    pub fn from_confusion(confusion: Confusion) -> Self {
        RepRates {
            confusion,
            mpf: confusion.mpf(),
            mfp: confusion.mfp(),
            group_mpf: confusion.group_mpf(),
            group_mfp: confusion.group_mfp(),
            adjusted_r2: None,
            degenerate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub model: String,
    pub mpf: Option<f64>,
    pub mfp: Option<f64>,
    /// Pass and fail denominators summed over repetitions.
    pub n_pass: usize,
    pub n_fail: usize,
    pub reps: usize,
    /// Repetitions whose mpf (resp. mfp) was undefined and left out.
    pub mpf_exclusions: usize,
    pub mfp_exclusions: usize,
    pub mean_adjusted_r2: Option<f64>,
    pub per_rep_adjusted_r2: Vec<f64>,
    pub degenerate_reps: usize,
    pub group_relative_mpf: Option<f64>,
    pub group_relative_mfp: Option<f64>,
    pub per_rep: Vec<RepRates>,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> (Option<f64>, usize) {
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut skipped = 0usize;
    for v in values {
        match v {
            Some(x) => {
                sum += x;
                count += 1;
            }
            None => skipped += 1,
        }
    }
    ((count > 0).then(|| sum / count as f64), skipped)
}

impl ErrorReport {
    pub fn aggregate(model: impl Into<String>, per_rep: Vec<RepRates>, paper_normalization: bool) -> Self {
        let (mpf, mpf_exclusions) = mean_defined(per_rep.iter().map(|r| r.mpf));
        let (mfp, mfp_exclusions) = mean_defined(per_rep.iter().map(|r| r.mfp));
        let per_rep_adjusted_r2: Vec<f64> = per_rep.iter().filter_map(|r| r.adjusted_r2).collect();
        let mean_adjusted_r2 =
            (!per_rep_adjusted_r2.is_empty()).then(|| per_rep_adjusted_r2.iter().sum::<f64>() / per_rep_adjusted_r2.len() as f64);
        let (group_relative_mpf, group_relative_mfp) = if paper_normalization {
            (
                mean_defined(per_rep.iter().map(|r| r.group_mpf)).0,
                mean_defined(per_rep.iter().map(|r| r.group_mfp)).0,
            )
        } else {
            (None, None)
        };
        ErrorReport {
            model: model.into(),
            mpf,
            mfp,
            n_pass: per_rep.iter().map(|r| r.confusion.n_pass).sum(),
            n_fail: per_rep.iter().map(|r| r.confusion.n_fail).sum(),
            reps: per_rep.len(),
            mpf_exclusions,
            mfp_exclusions,
            mean_adjusted_r2,
            per_rep_adjusted_r2,
            degenerate_reps: per_rep.iter().filter(|r| r.degenerate).count(),
            group_relative_mpf,
            group_relative_mfp,
            per_rep,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub reps: usize,
    pub seed: u64,
    pub split: SplitConfig,
    pub paper_normalization: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            reps: 100,
            seed: 0,
            split: SplitConfig::default(),
            paper_normalization: false,
        }
    }
}

impl EvalConfig {
    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidConfig("reps must be at least 1".into()));
        }
        self.split.validate()
    }
}

fn pick(obs: &[Observation], idx: &[usize]) -> Vec<Observation> {
    idx.iter().map(|&i| obs[i]).collect()
}

fn wrap(rep: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::Repetition {
        rep,
        source: Box::new(e),
    }
}

pub fn regression_rep(obs: &[Observation], rep: usize, cfg: &EvalConfig) -> Result<RepRates> {
    let s = split(obs.len(), cfg.split, derive_seed(cfg.seed, rep as u64)).map_err(wrap(rep))?;
    let model = regression::fit(&pick(obs, &s.train)).map_err(wrap(rep))?;
    let test = pick(obs, &s.test);
    let actual: Vec<u8> = test.iter().map(|o| o.target).collect();
    let predicted: Vec<f64> = test.iter().map(|o| model.predict(o.features)).collect();
    let mut rates = RepRates::from_confusion(confusion(&actual, &predicted).map_err(wrap(rep))?);
    rates.adjusted_r2 = Some(model.adjusted_r_squared);
    rates.degenerate = model.degenerate;
    Ok(rates)
}

pub fn run_regression_eval(cohort: &Cohort, cfg: &EvalConfig) -> Result<ErrorReport> {
    cfg.validate()?;
    let obs = cohort.observations();
    let per_rep = (0..cfg.reps)
        .into_par_iter()
        .map(|b| regression_rep(&obs, b, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport::aggregate("regression", per_rep, cfg.paper_normalization))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridEvalReport {
    /// 1a, 1b, 2a, 2b in that order (or the two radius models).
    pub models: Vec<ErrorReport>,
    /// Test cases with an empty radius class, summed over repetitions.
    pub no_neighbor_cases: usize,
}

impl HybridEvalReport {
    pub fn model(&self, name: &str) -> Option<&ErrorReport> {
        self.models.iter().find(|m| m.model == name)
    }
}

/// Scored groups and their model names for each decision rule.
fn hybrid_groups(neighborhood: Neighborhood) -> Vec<(ClassMode, [&'static str; 2])> {
    match neighborhood {
        Neighborhood::Hybrid { .. } => vec![
            (ClassMode::Similar, ["1a", "1b"]),
            (ClassMode::Completed, ["2a", "2b"]),
        ],
        Neighborhood::EpsilonBall { .. } => vec![(ClassMode::EpsilonBall, ["eps-avg", "eps-mode"])],
    }
}

const RULES: [DecisionRule; 2] = [DecisionRule::Average, DecisionRule::MostFrequent];

/// One repetition: per group, per rule confusion, plus the no-neighbor count.
pub fn hybrid_rep(
    obs: &[Observation],
    rep: usize,
    cfg: &EvalConfig,
    hybrid: &HybridConfig,
) -> Result<(Vec<[Confusion; 2]>, usize)> {
    let s = split(obs.len(), cfg.split, derive_seed(cfg.seed, rep as u64)).map_err(wrap(rep))?;
    let imputer = HybridImputer::new(*hybrid, &pick(obs, &s.train)).map_err(wrap(rep))?;
    let groups = hybrid_groups(hybrid.neighborhood);
    let mut tallies = vec![[Confusion::default(); 2]; groups.len()];
    let mut no_neighbors = 0;
    for &i in &s.test {
        let case = obs[i];
        let est = match imputer.estimate(case.features) {
            Ok(e) => e,
            Err(Error::NoNeighbors) => {
                no_neighbors += 1;
                continue;
            }
            Err(e) => return Err(wrap(rep)(e)),
        };
        let g = groups
            .iter()
            .position(|(mode, _)| *mode == est.class.mode)
            .expect("class mode belongs to the configured neighborhood");
        for (tally, rule) in tallies[g].iter_mut().zip(RULES) {
            tally.record(case.target, is_passing(est.value(rule)).map_err(wrap(rep))?);
        }
    }
    Ok((tallies, no_neighbors))
}

pub fn run_hybrid_eval(cohort: &Cohort, cfg: &EvalConfig, hybrid: &HybridConfig) -> Result<HybridEvalReport> {
    cfg.validate()?;
    let obs = cohort.observations();
    let reps = (0..cfg.reps)
        .into_par_iter()
        .map(|b| hybrid_rep(&obs, b, cfg, hybrid))
        .collect::<Result<Vec<_>>>()?;

    let groups = hybrid_groups(hybrid.neighborhood);
    let mut models = Vec::new();
    for (g, (_, names)) in groups.iter().enumerate() {
        for (r, name) in names.iter().enumerate() {
            let per_rep = reps
                .iter()
                .map(|(tallies, _)| RepRates::from_confusion(tallies[g][r]))
                .collect();
            models.push(ErrorReport::aggregate(*name, per_rep, cfg.paper_normalization));
        }
    }
    Ok(HybridEvalReport {
        models,
        no_neighbor_cases: reps.iter().map(|(_, n)| n).sum(),
    })
}
