mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tetris_count::boxes::{contains, resolve, tetris_resolvable, BoxRep, Trit};
use tetris_count::clustertrie::{BoxDatabase, GatherMode};
use tetris_count::oracle::{brute_count, linear_containing, linear_containing_shallowest, linear_store};
use tetris_count::solver::{run, OrderingChoice, SolverConfig};

fn trit() -> impl Strategy<Value = Trit> {
    prop_oneof![Just(Trit::Lambda), Just(Trit::False), Just(Trit::True)]
}

fn box_of(n: usize) -> impl Strategy<Value = BoxRep> {
    prop::collection::vec(trit(), n).prop_map(BoxRep::new)
}

fn point_of(n: usize) -> impl Strategy<Value = BoxRep> {
    prop::collection::vec(any::<bool>(), n).prop_map(|v| BoxRep::from_bools(&v))
}

/// Width, a list of boxes, and a query box, all over the same width.
fn database_case() -> impl Strategy<Value = (usize, Vec<BoxRep>, BoxRep)> {
    (1usize..=13).prop_flat_map(|n| (Just(n), prop::collection::vec(box_of(n), 0..24), box_of(n)))
}

fn points_inside(b: &BoxRep) -> Vec<BoxRep> {
    let free: Vec<usize> = (1..=b.len()).filter(|&i| b.get(i).is_lambda()).collect();
    (0u32..1 << free.len())
        .map(|mask| {
            let mut p = b.clone();
            for (bit, &i) in free.iter().enumerate() {
                p.set(i, Trit::from_bool(mask >> bit & 1 == 1));
            }
            p
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Every point of a resolvent lies in one of its parents.
    #[test]
    fn resolvent_covers_only_the_union((a, b) in (1usize..=8).prop_flat_map(|n| (box_of(n), box_of(n)))) {
        let Ok(r) = resolve(&a, &b) else {
            prop_assert!(!tetris_resolvable(&a, &b));
            return Ok(());
        };
        for p in points_inside(&r) {
            prop_assert!(contains(&a, &p).unwrap() || contains(&b, &p).unwrap());
        }
    }

    #[test]
    fn containment_is_a_partial_order((a, b, c) in (1usize..=8).prop_flat_map(|n| (box_of(n), box_of(n), box_of(n)))) {
        prop_assert!(contains(&a, &a).unwrap());
        if contains(&a, &b).unwrap() && contains(&b, &a).unwrap() {
            prop_assert_eq!(&a, &b);
        }
        if contains(&a, &b).unwrap() && contains(&b, &c).unwrap() {
            prop_assert!(contains(&a, &c).unwrap());
        }
    }

    #[test]
    fn trie_matches_linear_oracle((n, boxes, q) in database_case()) {
        let mut db = BoxDatabase::new(n);
        for b in &boxes {
            db.insert(b).unwrap();
        }
        db.check_invariants().unwrap();
        let stored = linear_store(&boxes);
        prop_assert_eq!(common::sorted(db.stored_boxes()), common::sorted(stored.clone()));

        let expected = linear_containing(&stored, &q);
        let all = db.get_all_containing_boxes_with(&q, GatherMode::Exhaustive).unwrap();
        prop_assert_eq!(common::sorted(all), common::sorted(expected.clone()));

        let stop = db.get_all_containing_boxes_with(&q, GatherMode::StopAtHit).unwrap();
        prop_assert_eq!(common::sorted(stop), common::sorted(linear_containing_shallowest(&stored, &q, 4)));

        let greedy = db.contains_query(&q).unwrap();
        prop_assert_eq!(greedy.is_some(), !expected.is_empty());
        if let Some(g) = greedy {
            prop_assert!(expected.contains(&g));
        }
        let shortest = db.contains_shortest(&q).unwrap();
        let best = expected.iter().map(|b| b.index()).min();
        prop_assert_eq!(shortest.map(|b| b.index()), best);
    }

    #[test]
    fn insert_is_idempotent((n, boxes, _q) in database_case()) {
        let mut db = BoxDatabase::new(n);
        for b in &boxes {
            db.insert(b).unwrap();
        }
        let before = common::sorted(db.stored_boxes());
        let clusters = db.cluster_count();
        for b in &boxes {
            prop_assert!(!db.insert(b).unwrap());
        }
        prop_assert_eq!(common::sorted(db.stored_boxes()), before);
        prop_assert_eq!(db.cluster_count(), clusters);
        db.check_invariants().unwrap();
    }

    /// Skipping all-λ clusters changes the work done, not the answers.
    #[test]
    fn lambda_skip_preserves_answers((n, boxes, q) in database_case()) {
        let mut on = BoxDatabase::with_lambda_skip(n, true);
        let mut off = BoxDatabase::with_lambda_skip(n, false);
        for b in &boxes {
            on.insert(b).unwrap();
            off.insert(b).unwrap();
        }
        on.reset_intersection_count();
        off.reset_intersection_count();
        let a = on.get_all_containing_boxes_with(&q, GatherMode::Exhaustive).unwrap();
        let b = off.get_all_containing_boxes_with(&q, GatherMode::Exhaustive).unwrap();
        prop_assert_eq!(common::sorted(a), common::sorted(b));
        prop_assert!(on.intersection_count() <= off.intersection_count());
        prop_assert_eq!(on.contains_query(&q).unwrap().is_some(), off.contains_query(&q).unwrap().is_some());
    }

    #[test]
    fn point_queries_agree_with_membership((n, boxes, _q) in database_case(), seed in any::<u64>()) {
        let mut db = BoxDatabase::new(n);
        for b in &boxes {
            db.insert(b).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..8 {
            let p = common::random_point(&mut rng, n);
            let inside = boxes.iter().any(|b| contains(b, &p).unwrap());
            prop_assert_eq!(db.contains_query(&p).unwrap().is_some(), inside);
        }
    }

    /// Audited runs fail on any cache box that is not implied by the input,
    /// so a clean audited run doubles as a soundness check.
    #[test]
    fn audited_solver_is_exact(seed in any::<u64>(), n in 1usize..=12, m in 0usize..=30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cnf = common::random_cnf(&mut rng, n, m, 4);
        let config = SolverConfig { audit: true, ordering: OrderingChoice::Identity, ..SolverConfig::default() };
        let out = run(&cnf, &config).unwrap();
        prop_assert_eq!(out.model_count, brute_count(&cnf).unwrap());
    }

    #[test]
    fn point_box_contains_only_itself(p in point_of(6), q in point_of(6)) {
        prop_assert_eq!(contains(&p, &q).unwrap(), p == q);
    }
}
