mod common;

use catchup::hybrid::{
    build_class, decide, estimate, ClassMode, DecisionRule, DistanceKind, Neighborhood, NeighborClass,
};
use catchup::{Observation, PassFail};
use common::{brute_force_class, brute_mean, brute_mode, rng};
use proptest::prelude::*;
use rand::Rng;

/// Training sets drawn from a small pool of profiles so exact matches are
/// common; `dup_heavy` pushes most queries into the similar branch.
fn clustered(r: &mut impl Rng, n: usize, dup_heavy: bool) -> Vec<Observation> {
    let pool: Vec<[u8; 3]> = (0..if dup_heavy { 3 } else { 40 })
        .map(|_| [r.random_range(1..=9), r.random_range(1..=9), r.random_range(1..=9)])
        .collect();
    (0..n)
        .map(|_| Observation::new(pool[r.random_range(0..pool.len())], r.random_range(1..=9)))
        .collect()
}

#[test]
fn class_builder_matches_full_sort_oracle() {
    let mut similar = 0;
    let mut completed = 0;
    for seed in 0..100u64 {
        let mut r = rng(seed);
        let n = r.random_range(20..=200);
        let train = clustered(&mut r, n, seed % 2 == 0);
        let k = r.random_range(1..=30);
        let targets: Vec<u8> = train.iter().map(|o| o.target).collect();
        for q in 0..10 {
            let query = if q % 2 == 0 {
                train[r.random_range(0..n)].features
            } else {
                [r.random_range(1..=9), r.random_range(1..=9), r.random_range(1..=9)]
            };
            let class = build_class(query, &train, Neighborhood::Hybrid { k }, DistanceKind::Euclid2).unwrap();
            let (mode, members) = brute_force_class(query, &train, k);
            assert_eq!(class.mode, mode, "seed {seed}");
            assert_eq!(class.members, members, "seed {seed}");

            let member_targets: Vec<u8> = members.iter().map(|&i| targets[i]).collect();
            let est = estimate(class, &targets).unwrap();
            assert_eq!(est.mean_grade, brute_mean(&member_targets));
            assert_eq!(est.modal_grade, brute_mode(&member_targets));
            match mode {
                ClassMode::Similar => similar += 1,
                _ => completed += 1,
            }
        }
    }
    assert!(similar >= 30 && completed >= 30, "similar {similar}, completed {completed}");
}

#[test]
fn completion_fixture_keeps_matches_then_nearest() {
    // Three matches for (3,3,3); then distance-1 cases at indices 1 and 5
    // and a distance-1 case at 7 that loses the tie.
    let rows = [
        ([3, 3, 3], 4),
        ([3, 3, 4], 5),
        ([9, 9, 9], 9),
        ([3, 3, 3], 4),
        ([5, 3, 3], 6),
        ([2, 3, 3], 3),
        ([3, 3, 3], 5),
        ([3, 4, 3], 2),
    ];
    let train: Vec<Observation> = rows.iter().map(|&(f, t)| Observation::new(f, t)).collect();
    let class = build_class([3, 3, 3], &train, Neighborhood::Hybrid { k: 5 }, DistanceKind::Euclid2).unwrap();
    assert_eq!(class.mode, ClassMode::Completed);
    assert_eq!(class.members, vec![0, 3, 6, 1, 5]);
    let est = estimate(class, &train.iter().map(|o| o.target).collect::<Vec<_>>()).unwrap();
    assert_eq!(est.mean_grade, (4 + 4 + 5 + 5 + 3) as f64 / 5.0);
    assert_eq!(est.modal_grade, 5);
    assert_eq!(decide(&est, DecisionRule::Average), PassFail::Pass);
}

fn arb_train() -> impl Strategy<Value = Vec<Observation>> {
    prop::collection::vec(
        (prop::array::uniform3(1u8..=4), 1u8..=9).prop_map(|(f, t)| Observation::new(f, t)),
        1..120,
    )
}

proptest! {
    #[test]
    fn similar_members_are_exactly_the_zero_distance_set(train in arb_train(), q in prop::array::uniform3(1u8..=4), k in 1usize..10) {
        let class = build_class(q, &train, Neighborhood::Hybrid { k }, DistanceKind::Euclid2).unwrap();
        let zero: Vec<usize> = (0..train.len()).filter(|&i| train[i].features == q).collect();
        prop_assert_eq!(class.k_sim, zero.len());
        if class.mode == ClassMode::Similar {
            prop_assert_eq!(&class.members, &zero);
        } else {
            prop_assert_eq!(class.members.len(), k.min(train.len()));
            prop_assert_eq!(&class.members[..zero.len()], &zero[..]);
        }
    }

    #[test]
    fn branch_does_not_depend_on_distance_kind(train in arb_train(), q in prop::array::uniform3(1u8..=4), k in 1usize..10) {
        let e = build_class(q, &train, Neighborhood::Hybrid { k }, DistanceKind::Euclid2).unwrap();
        let c = build_class(q, &train, Neighborhood::Hybrid { k }, DistanceKind::Chebyshev).unwrap();
        prop_assert_eq!(e.k_sim, c.k_sim);
        prop_assert_eq!(e.mode, c.mode);
        if e.mode == ClassMode::Similar {
            prop_assert_eq!(e.members, c.members);
        }
    }

    #[test]
    fn radius_members_lie_within_radius(train in arb_train(), q in prop::array::uniform3(1u8..=4), eps in 0.0f64..12.0) {
        let class = build_class(q, &train, Neighborhood::EpsilonBall { epsilon: eps }, DistanceKind::Euclid2).unwrap();
        for &i in &class.members {
            prop_assert!(common::sq_dist(q, train[i].features) as f64 <= eps);
        }
        let outside = (0..train.len()).filter(|i| !class.members.contains(i));
        for i in outside {
            prop_assert!(common::sq_dist(q, train[i].features) as f64 > eps);
        }
    }

    #[test]
    fn estimates_stay_on_the_grade_scale(targets in prop::collection::vec(1u8..=9, 1..60)) {
        let class = NeighborClass {
            mode: ClassMode::Completed,
            members: (0..targets.len()).collect(),
            k_sim: 0,
            k: targets.len(),
            epsilon: None,
        };
        let est = estimate(class, &targets).unwrap();
        prop_assert!((1.0..=9.0).contains(&est.mean_grade));
        prop_assert!((1..=9).contains(&est.modal_grade));
        prop_assert_eq!(est.modal_grade, brute_mode(&targets));
    }

    #[test]
    fn adding_a_failing_member_never_lowers_the_mean(targets in prop::collection::vec(1u8..=9, 1..60)) {
        let class = |n: usize| NeighborClass {
            mode: ClassMode::Completed,
            members: (0..n).collect(),
            k_sim: 0,
            k: n,
            epsilon: None,
        };
        let before = estimate(class(targets.len()), &targets).unwrap().mean_grade;
        let mut more = targets.clone();
        more.push(9);
        let after = estimate(class(more.len()), &more).unwrap().mean_grade;
        prop_assert!(after >= before);
    }
}
