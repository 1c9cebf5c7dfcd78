mod common;

use bayesrank_core::io::{parse_encounters, read_records, write_records, EncounterRecord};
use bayesrank_core::model::{lineup_draws, Lineup};
use bayesrank_core::{
    compute_statement, cost, count_pairwise, global_probability, global_set, local_sets, reward,
    Action, PosteriorDraws, RewardConfig,
};
use common::*;
use proptest::prelude::*;

/// Draw matrices with `L` in 1..=6 and `M` in 1..=40; integer values create ties.
fn rows_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=6).prop_flat_map(|l| {
        prop_oneof![
            prop::collection::vec(
                prop::collection::vec((0i32..5).prop_map(f64::from), l),
                1..40
            ),
            prop::collection::vec(prop::collection::vec(-10.0f64..10.0, l), 1..40),
        ]
    })
}

fn action_strategy() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (0..ALPHA_STEPS, 0..T_STEPS, 0..GAMMA_STEPS, 0..Q_STEPS)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn smaller_global_error_means_smaller_probability(rows in rows_strategy(), (a, b, c, _) in action_strategy()) {
        let d = draws_of(&rows);
        let counts = count_pairwise(&d);
        let skeleton = global_set(&d, &counts, alpha(a), t_of(b), gamma_of(c)).unwrap();
        let mut last = 0;
        for q in 0..=Q_DEN {
            let hold = global_probability(&skeleton, q_of(q)).unwrap().hold_count;
            prop_assert!(hold >= last);
            last = hold;
        }
    }

    #[test]
    fn union_bounds_and_containment(rows in rows_strategy(), (a, b, c, _) in action_strategy()) {
        let d = draws_of(&rows);
        let m = d.num_draws();
        let counts = count_pairwise(&d);
        let skeleton = global_set(&d, &counts, alpha(a), t_of(b), gamma_of(c)).unwrap();
        let st = global_probability(&skeleton, 0.0).unwrap();
        let g = st.members.len();
        // prob >= 1 - gamma |G|
        prop_assert!(GAMMA_DEN * (m - st.hold_count) <= c * g * m);
        for local in &st.locals {
            prop_assert!(local.hold_count >= st.hold_count);
        }
        let zero = global_set(&d, &counts, alpha(a), 0.0, 1.0).unwrap();
        for local in &zero.locals {
            // local prob at t = 0 >= 1 - alpha |below u above|
            prop_assert!(ALPHA_DEN * (m - local.hold_count) <= a * local.sets.len() * m);
        }
    }

    #[test]
    fn sets_shrink_with_alpha_and_gamma(rows in rows_strategy(), (a, b, c, _) in action_strategy()) {
        let d = draws_of(&rows);
        let counts = count_pairwise(&d);
        for l in 0..d.num_entities() {
            let small = local_sets(&counts, l, alpha(a)).unwrap();
            let large = local_sets(&counts, l, alpha((a + 3).min(ALPHA_STEPS - 1))).unwrap();
            prop_assert!(small.below.iter().all(|x| large.below.contains(x)));
            prop_assert!(small.above.iter().all(|x| large.above.contains(x)));
            prop_assert!(small.below.iter().all(|x| !small.above.contains(x)));
            prop_assert!(!small.below.contains(&l) && !small.above.contains(&l));
        }
        let narrow = global_set(&d, &counts, alpha(a), t_of(b), gamma_of(c)).unwrap();
        let wide = global_set(&d, &counts, alpha(a), t_of(b), gamma_of((c + 2).min(GAMMA_STEPS - 1))).unwrap();
        prop_assert!(narrow.members.iter().all(|x| wide.members.contains(x)));
    }

    #[test]
    fn relabeling_permutes_statements(rows in rows_strategy(), (a, b, c, q) in action_strategy(), seed in any::<u64>()) {
        let l = rows[0].len();
        let mut perm: Vec<usize> = (0..l).collect();
        let mut r = rng(seed);
        for i in (1..l).rev() {
            perm.swap(i, rand::Rng::random_range(&mut r, 0..=i));
        }
        // entity e of the original becomes perm[e]
        let permuted: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| {
                let mut out = vec![0.0; l];
                for (e, &v) in row.iter().enumerate() {
                    out[perm[e]] = v;
                }
                out
            })
            .collect();
        let config = RewardConfig::default();
        let action = Action::new(alpha(a), t_of(b), gamma_of(c), q_of(q));
        let d1 = draws_of(&rows);
        let d2 = draws_of(&permuted);
        let s1 = compute_statement(&d1, &count_pairwise(&d1), &action, &config).unwrap();
        let s2 = compute_statement(&d2, &count_pairwise(&d2), &action, &config).unwrap();
        prop_assert_eq!(s1.hold_count, s2.hold_count);
        prop_assert_eq!(s1.cost, s2.cost);
        let mut mapped: Vec<usize> = s1.members.iter().map(|&e| perm[e]).collect();
        mapped.sort_unstable();
        prop_assert_eq!(&mapped, &s2.members);
        for local in &s1.locals {
            let other = s2.local(perm[local.sets.entity]).unwrap();
            let mut below: Vec<usize> = local.sets.below.iter().map(|&e| perm[e]).collect();
            below.sort_unstable();
            prop_assert_eq!(&below, &other.sets.below);
            prop_assert_eq!(local.hold_count, other.hold_count);
        }
    }

    #[test]
    fn increasing_maps_change_nothing(rows in rows_strategy(), (a, b, c, q) in action_strategy()) {
        let d = draws_of(&rows);
        let mapped = d.map_values(|x| (x / 3.0).exp() * 2.0 - 7.0).unwrap();
        let config = RewardConfig::default();
        let action = Action::new(alpha(a), t_of(b), gamma_of(c), q_of(q));
        let s1 = compute_statement(&d, &count_pairwise(&d), &action, &config).unwrap();
        let s2 = compute_statement(&mapped, &count_pairwise(&mapped), &action, &config).unwrap();
        prop_assert_eq!(s1.members, s2.members);
        prop_assert_eq!(s1.holds, s2.holds);
        prop_assert_eq!(s1.reward, s2.reward);
    }

    #[test]
    fn reward_respects_error_and_probability_order(rows in rows_strategy(), (a, b, c, q) in action_strategy()) {
        let d = draws_of(&rows);
        let counts = count_pairwise(&d);
        let config = RewardConfig::default();
        let st = compute_statement(&d, &counts, &Action::new(alpha(a), t_of(b), gamma_of(c), q_of(q)), &config).unwrap();
        // same statement, larger stated errors
        let mut looser = st.clone();
        looser.action.t = t_of((b + 4).min(T_DEN));
        looser.action.q = q_of((q + 4).min(Q_DEN));
        prop_assert!(cost(&looser, config.h) <= cost(&st, config.h));
        // same statement, higher probability
        let mut surer = st.clone();
        surer.hold_count = st.num_draws;
        prop_assert!(reward(&surer, &config) >= reward(&st, &config));
    }

    #[test]
    fn lineup_draws_are_linear(values in prop::collection::vec(-5.0f64..5.0, 7 * 6), c in -3.0f64..3.0) {
        let rows: Vec<Vec<f64>> = values.chunks(7).map(|r| r.to_vec()).collect();
        let d = PosteriorDraws::from_rows_unlabeled(&rows).unwrap();
        let scaled = d.map_values(|x| c * x).unwrap();
        let lineups = [Lineup::new(&[0, 1, 2, 3, 4]).unwrap(), Lineup::new(&[2, 3, 4, 5, 6]).unwrap()];
        let base = lineup_draws(&d, &lineups).unwrap();
        let out = lineup_draws(&scaled, &lineups).unwrap();
        for j in 0..2 {
            for (x, y) in base.column(j).iter().zip(out.column(j)) {
                prop_assert!((c * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }
    }

    #[test]
    fn encounter_files_round_trip(seed in any::<u64>(), n in 1usize..30) {
        let league = bayesrank_core::sim::generate_league(&bayesrank_core::sim::LeagueConfig {
            encounters: n,
            seed,
            ..Default::default()
        }).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &league.records).unwrap();
        let back: Vec<EncounterRecord> = read_records(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &league.records);
        let (table, registry) = parse_encounters(buf.as_slice()).unwrap();
        let total: usize = registry.players.iter().map(|p| p.appearances).sum();
        prop_assert_eq!(total, 10 * table.len());
    }
}
