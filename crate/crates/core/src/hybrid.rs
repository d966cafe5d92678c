//! Similar-case / nearest-neighbor imputation.
//!
//! For a query triple of observed grades, the training cases at distance zero
//! are its *similar* cases. When there are more than `k` of them the whole
//! similar class decides. Otherwise the class is completed to `k` members by
//! taking the first `k` training cases in ascending distance order (similar
//! cases come first, ties keep training order). The missing grade is then
//! estimated by the class average or by its most frequent grade.
//!
//! An optional radius mode uses every training case within `epsilon` instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{band_of, Grade, Observation, PassFail};

pub const DEFAULT_K: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DistanceKind {
    /// Sum of squared differences, no square root.
    #[default]
    Euclid2,
    /// Largest absolute difference.
    Chebyshev,
}

pub fn distance(kind: DistanceKind, p: [u8; 3], c: [u8; 3]) -> u32 {
    let diffs = p.iter().zip(&c).map(|(&a, &b)| (a as i32 - b as i32).unsigned_abs());
    match kind {
        DistanceKind::Euclid2 => diffs.map(|d| d * d).sum(),
        DistanceKind::Chebyshev => diffs.max().unwrap_or(0),
    }
}

/// Mean of the first `size` values.
pub fn lower_partial_mean(values: &[f64], size: usize) -> Result<f64> {
    if size == 0 || size > values.len() {
        return Err(Error::SizeOutOfRange(format!(
            "size {size} not in 1..={}",
            values.len()
        )));
    }
    Ok(values[..size].iter().sum::<f64>() / size as f64)
}

/// Mean of the last `subsize` values among the first `totsize`.
pub fn upper_partial_mean(values: &[f64], subsize: usize, totsize: usize) -> Result<f64> {
    if subsize == 0 || subsize > totsize || totsize > values.len() {
        return Err(Error::SizeOutOfRange(format!(
            "need 1 <= subsize ({subsize}) <= totsize ({totsize}) <= {}",
            values.len()
        )));
    }
    Ok(values[totsize - subsize..totsize].iter().sum::<f64>() / subsize as f64)
}

/// How predictor grades are presented to the distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FeatureEncoding {
    #[default]
    Raw,
    /// Credit/Pass/Fail codes 1, 2, 3.
    Bands,
}

impl FeatureEncoding {
    pub fn encode(self, features: [u8; 3]) -> [u8; 3] {
        match self {
            FeatureEncoding::Raw => features,
            FeatureEncoding::Bands => features.map(|g| {
                Grade::observed(g)
                    .and_then(band_of)
                    .map(|b| b.code())
                    .unwrap_or(g)
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Neighborhood {
    Hybrid { k: usize },
    EpsilonBall { epsilon: f64 },
}

impl Default for Neighborhood {
    fn default() -> Self {
        Neighborhood::Hybrid { k: DEFAULT_K }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassMode {
    /// More than `k` similar cases; all of them form the class.
    Similar,
    /// Similar cases completed with nearest neighbors up to `k`.
    Completed,
    EpsilonBall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborClass {
    pub mode: ClassMode,
    /// Indices into the training set.
    pub members: Vec<usize>,
    pub k_sim: usize,
    pub k: usize,
    pub epsilon: Option<f64>,
}

pub fn build_class(
    query: [u8; 3],
    train: &[Observation],
    neighborhood: Neighborhood,
    kind: DistanceKind,
) -> Result<NeighborClass> {
    if train.is_empty() {
        return Err(Error::EmptyTraining);
    }
    let dists: Vec<u32> = train.iter().map(|o| distance(kind, query, o.features)).collect();
    let k_sim = dists.iter().filter(|&&d| d == 0).count();

    match neighborhood {
        Neighborhood::Hybrid { k } => {
            if k == 0 {
                return Err(Error::InvalidConfig("k must be at least 1".into()));
            }
            if k_sim > k {
                let members = (0..train.len()).filter(|&i| dists[i] == 0).collect();
                return Ok(NeighborClass {
                    mode: ClassMode::Similar,
                    members,
                    k_sim,
                    k,
                    epsilon: None,
                });
            }
            let take = k.min(train.len());
            let mut ranked: Vec<(u32, usize)> = dists.iter().copied().zip(0..).collect();
            if take < ranked.len() {
                ranked.select_nth_unstable(take - 1);
                ranked.truncate(take);
            }
            ranked.sort_unstable();
            Ok(NeighborClass {
                mode: ClassMode::Completed,
                members: ranked.into_iter().map(|(_, i)| i).collect(),
                k_sim,
                k,
                epsilon: None,
            })
        }
        Neighborhood::EpsilonBall { epsilon } => {
            if epsilon.is_nan() || epsilon < 0.0 {
                return Err(Error::InvalidConfig(format!("epsilon {epsilon} must be >= 0")));
            }
            let members = (0..train.len()).filter(|&i| dists[i] as f64 <= epsilon).collect();
            Ok(NeighborClass {
                mode: ClassMode::EpsilonBall,
                members,
                k_sim,
                k: 0,
                epsilon: Some(epsilon),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridEstimate {
    pub mean_grade: f64,
    pub modal_grade: u8,
    pub class: NeighborClass,
}

impl HybridEstimate {
    pub fn value(&self, rule: DecisionRule) -> f64 {
        match rule {
            DecisionRule::Average => self.mean_grade,
            DecisionRule::MostFrequent => self.modal_grade as f64,
        }
    }
}

/// Most frequent grade, ties going to the larger grade.
pub fn modal_grade(targets: impl IntoIterator<Item = u8>) -> Option<u8> {
    let mut freq = [0usize; 9];
    let mut any = false;
    for t in targets {
        freq[(t as usize).clamp(1, 9) - 1] += 1;
        any = true;
    }
    if !any {
        return None;
    }
    let best = *freq.iter().max().unwrap();
    (0..9).rev().find(|&i| freq[i] == best).map(|i| i as u8 + 1)
}

pub fn estimate(class: NeighborClass, train_targets: &[u8]) -> Result<HybridEstimate> {
    if class.members.is_empty() {
        return Err(Error::NoNeighbors);
    }
    let sum: u64 = class.members.iter().map(|&i| train_targets[i] as u64).sum();
    let mean_grade = sum as f64 / class.members.len() as f64;
    let modal = modal_grade(class.members.iter().map(|&i| train_targets[i])).ok_or(Error::NoNeighbors)?;
    Ok(HybridEstimate {
        mean_grade,
        modal_grade: modal,
        class,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecisionRule {
    Average,
    MostFrequent,
}

impl DecisionRule {
    /// Most frequent grade for a similar class, average otherwise.
    pub fn recommended(mode: ClassMode) -> Self {
        match mode {
            ClassMode::Similar => DecisionRule::MostFrequent,
            ClassMode::Completed | ClassMode::EpsilonBall => DecisionRule::Average,
        }
    }
}

pub fn decide(est: &HybridEstimate, rule: DecisionRule) -> PassFail {
    if est.value(rule) <= crate::model::PASS_CEILING {
        PassFail::Pass
    } else {
        PassFail::Fail
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HybridConfig {
    pub neighborhood: Neighborhood,
    pub distance: DistanceKind,
    pub encoding: FeatureEncoding,
}

/// A training set prepared for repeated queries.
#[derive(Debug, Clone)]
pub struct HybridImputer {
    config: HybridConfig,
    train: Vec<Observation>,
    targets: Vec<u8>,
}

impl HybridImputer {
    pub fn new(config: HybridConfig, train: &[Observation]) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyTraining);
        }
        let train: Vec<Observation> = train
            .iter()
            .map(|o| Observation::new(config.encoding.encode(o.features), o.target))
            .collect();
        let targets = train.iter().map(|o| o.target).collect();
        Ok(HybridImputer { config, train, targets })
    }

    pub fn config(&self) -> &HybridConfig {
        &self.config
    }

    pub fn estimate(&self, query: [u8; 3]) -> Result<HybridEstimate> {
        let q = self.config.encoding.encode(query);
        let class = build_class(q, &self.train, self.config.neighborhood, self.config.distance)?;
        estimate(class, &self.targets)
    }
}
