//! Independent reference implementations used by the integration tests.
//! They deliberately avoid the library's own solver and class builder.

#![allow(dead_code)]

use catchup::hybrid::ClassMode;
use catchup::{Grade, Observation, StudentRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The four rescuable students from the reference scan, with gender set to 1.
pub fn reference_cases() -> Vec<StudentRecord> {
    [
        (77594, 2015, 2, [8, 8, 8, -1]),
        (77833, 2015, 3, [8, 8, 8, -1]),
        (80183, 2015, 1, [4, 6, 7, -1]),
        (122915, 2017, 1, [1, 7, 7, -1]),
    ]
    .into_iter()
    .map(|(id, year, region, g)| StudentRecord::new(id, year, 1, region, g.map(Grade::from_raw)).unwrap())
    .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_observations(rng: &mut impl Rng, n: usize) -> Vec<Observation> {
    (0..n)
        .map(|_| {
            let f = [rng.random_range(1..=9), rng.random_range(1..=9), rng.random_range(1..=9)];
            Observation::new(f, rng.random_range(1..=9))
        })
        .collect()
}

/// Least squares by forming X'X and X'y in floating point and running
/// Gauss-Jordan elimination with partial pivoting on the augmented system.
#[allow(clippy::needless_range_loop)]
pub fn normal_equation_oracle(rows: &[Observation]) -> [f64; 4] {
    let mut m = [[0.0f64; 5]; 4];
    for o in rows {
        let x = [1.0, o.features[0] as f64, o.features[1] as f64, o.features[2] as f64];
        let y = o.target as f64;
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] += x[i] * x[j];
            }
            m[i][4] += x[i] * y;
        }
    }
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        let p = m[col][col];
        assert!(p.abs() > 1e-9, "oracle hit a singular system");
        for j in 0..5 {
            m[col][j] /= p;
        }
        for i in 0..4 {
            if i != col {
                let f = m[i][col];
                for j in 0..5 {
                    m[i][j] -= f * m[col][j];
                }
            }
        }
    }
    [m[0][4], m[1][4], m[2][4], m[3][4]]
}

pub fn oracle_predict(beta: &[f64; 4], f: [u8; 3]) -> f64 {
    beta[0] + beta[1] * f[0] as f64 + beta[2] * f[1] as f64 + beta[3] * f[2] as f64
}

/// Squared Euclidean distance written out longhand.
pub fn sq_dist(a: [u8; 3], b: [u8; 3]) -> u32 {
    let mut d = 0u32;
    for j in 0..3 {
        let diff = a[j] as i32 - b[j] as i32;
        d += (diff * diff) as u32;
    }
    d
}

/// Full stable sort of the training set by distance, then the branch rule.
pub fn brute_force_class(query: [u8; 3], train: &[Observation], k: usize) -> (ClassMode, Vec<usize>) {
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.sort_by_key(|&i| sq_dist(query, train[i].features));
    let similar: Vec<usize> = (0..train.len()).filter(|&i| train[i].features == query).collect();
    if similar.len() > k {
        (ClassMode::Similar, similar)
    } else {
        order.truncate(k);
        (ClassMode::Completed, order)
    }
}

pub fn brute_mean(targets: &[u8]) -> f64 {
    targets.iter().map(|&t| t as f64).sum::<f64>() / targets.len() as f64
}

/// Count every grade, then scan from 9 down so ties favor the larger grade.
pub fn brute_mode(targets: &[u8]) -> u8 {
    let mut best = 0u8;
    let mut best_count = 0usize;
    for g in (1..=9u8).rev() {
        let c = targets.iter().filter(|&&t| t == g).count();
        if c > best_count {
            best = g;
            best_count = c;
        }
    }
    best
}

/// Population with T4 = T1 exactly, plus varied T2 and T3.
pub fn exactly_learnable(n: usize, seed: u64) -> Vec<StudentRecord> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let t1: i64 = r.random_range(1..=9);
            let g = [t1, r.random_range(1..=9), r.random_range(1..=9), t1];
            StudentRecord::new(i as u64 + 1, 2015, 1, 1, g.map(Grade::from_raw)).unwrap()
        })
        .collect()
}
