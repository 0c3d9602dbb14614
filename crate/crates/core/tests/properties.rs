//! Invariants of the combination rules over random frames.

use negfuse_core::combiner::TIE_EPSILON;
use negfuse_core::{
    combine, combine_negation, combine_product, ClassId, EnsembleFrame, Method, TiePolicy,
};
use proptest::prelude::*;

const COMBINERS: [Method; 3] = [Method::Negation, Method::Product, Method::Average];

#[derive(Debug, Clone)]
struct RawFrame {
    accuracies: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl RawFrame {
    fn frame(&self) -> EnsembleFrame {
        EnsembleFrame::from_raw("s", &self.accuracies, &self.rows).unwrap()
    }
}

fn confidence(min: f64) -> impl Strategy<Value = f64> {
    // Mix in exact endpoints and repeated values so ties actually occur.
    prop_oneof![
        8 => min..=1.0f64,
        1 => Just(1.0),
        1 => Just(if min > 0.0 { min } else { 0.0 }),
        1 => Just(0.5),
    ]
}

fn raw_frame(max_k: usize, min_conf: f64) -> impl Strategy<Value = RawFrame> {
    (1usize..=6, 2usize..=max_k).prop_flat_map(move |(n, k)| {
        let accuracies = prop::collection::vec(prop_oneof![9 => 1e-3..=1.0f64, 1 => Just(1.0)], n);
        let rows = prop::collection::vec(prop::collection::vec(confidence(min_conf), k), n);
        (accuracies, rows).prop_map(|(accuracies, rows)| RawFrame { accuracies, rows })
    })
}

/// argmax_C min_n (A_n * p_n(C)) by direct enumeration, with the default tie
/// policy spelled out independently.
fn brute_force_negation(raw: &RawFrame, tie: TiePolicy) -> usize {
    let k = raw.rows[0].len();
    let n = raw.rows.len();
    let mut support = vec![0.0; k];
    for (c, slot) in support.iter_mut().enumerate() {
        let mut lowest = f64::INFINITY;
        for m in 0..n {
            let v = raw.accuracies[m] * raw.rows[m][c];
            if v < lowest {
                lowest = v;
            }
        }
        *slot = lowest;
    }
    let mut best = f64::NEG_INFINITY;
    for &s in &support {
        if s > best {
            best = s;
        }
    }
    let tied: Vec<usize> = (0..k).filter(|&c| (support[c] - best).abs() <= TIE_EPSILON).collect();
    if tied.len() == 1 || tie == TiePolicy::LowestIndex {
        return tied[0];
    }
    let mean = |c: usize| raw.rows.iter().map(|r| r[c]).sum::<f64>() / n as f64;
    let top = tied.iter().map(|&c| mean(c)).fold(f64::NEG_INFINITY, f64::max);
    *tied.iter().find(|&&c| (mean(c) - top).abs() <= TIE_EPSILON).unwrap()
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn negation_matches_brute_force(raw in raw_frame(257, 0.0), lowest in any::<bool>()) {
        let tie = if lowest { TiePolicy::LowestIndex } else { TiePolicy::MeanConf };
        let d = combine_negation(&raw.frame(), tie);
        prop_assert_eq!(d.predicted.index(), brute_force_negation(&raw, tie));
    }

    #[test]
    fn product_prediction_ignores_accuracies(raw in raw_frame(64, 1e-3)) {
        let weighted = combine_product(&raw.frame(), TiePolicy::default());
        let unit = RawFrame { accuracies: vec![1.0; raw.accuracies.len()], rows: raw.rows.clone() };
        let unweighted = combine_product(&unit.frame(), TiePolicy::default());
        prop_assert_eq!(weighted.predicted, unweighted.predicted);
    }

    #[test]
    fn model_order_does_not_matter(
        (raw, order) in raw_frame(32, 0.0).prop_flat_map(|raw| {
            let order: Vec<usize> = (0..raw.rows.len()).collect();
            (Just(raw), Just(order).prop_shuffle())
        })
    ) {
        let permuted = RawFrame {
            accuracies: order.iter().map(|&i| raw.accuracies[i]).collect(),
            rows: order.iter().map(|&i| raw.rows[i].clone()).collect(),
        };
        for method in COMBINERS {
            let a = combine(&raw.frame(), method, TiePolicy::default());
            let b = combine(&permuted.frame(), method, TiePolicy::default());
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn class_relabeling_permutes_scores(
        (raw, sigma) in raw_frame(32, 0.0).prop_flat_map(|raw| {
            let sigma: Vec<usize> = (0..raw.rows[0].len()).collect();
            (Just(raw), Just(sigma).prop_shuffle())
        })
    ) {
        // new class sigma[c] carries old class c
        let relabeled = RawFrame {
            accuracies: raw.accuracies.clone(),
            rows: raw
                .rows
                .iter()
                .map(|row| {
                    let mut out = vec![0.0; row.len()];
                    for (c, &v) in row.iter().enumerate() {
                        out[sigma[c]] = v;
                    }
                    out
                })
                .collect(),
        };
        for method in COMBINERS {
            let a = combine(&raw.frame(), method, TiePolicy::default());
            let b = combine(&relabeled.frame(), method, TiePolicy::default());
            for (c, &s) in a.scores.iter().enumerate() {
                prop_assert_eq!(s.to_bits(), b.scores[sigma[c]].to_bits());
            }
            if !a.tie_broken {
                prop_assert_eq!(b.predicted, ClassId(sigma[a.predicted.index()]));
            }
        }
    }

    #[test]
    fn raising_winner_confidence_keeps_winner(
        raw in raw_frame(32, 0.0),
        model in any::<prop::sample::Index>(),
        bump in 0.0..=1.0f64,
        lowest in any::<bool>(),
    ) {
        let tie = if lowest { TiePolicy::LowestIndex } else { TiePolicy::MeanConf };
        let before = combine_negation(&raw.frame(), tie);
        let winner = before.predicted.index();
        let m = model.index(raw.rows.len());
        let mut raised = raw.clone();
        let old = raised.rows[m][winner];
        raised.rows[m][winner] = old + (1.0 - old) * bump;
        let after = combine_negation(&raised.frame(), tie);
        prop_assert!(after.scores[winner] <= before.scores[winner]);
        for c in (0..before.scores.len()).filter(|&c| c != winner) {
            prop_assert_eq!(after.scores[c].to_bits(), before.scores[c].to_bits());
        }
        prop_assert_eq!(after.predicted, before.predicted);
    }

    #[test]
    fn single_perfect_model_reduces_to_argmax(row in prop::collection::vec(0.0..=1.0f64, 2..=257)) {
        let raw = RawFrame { accuracies: vec![1.0], rows: vec![row.clone()] };
        let expected = argmax(&row);
        for method in Method::ALL {
            let d = combine(&raw.frame(), method, TiePolicy::default());
            prop_assert_eq!(d.predicted.index(), expected, "{}", method);
        }
    }

    #[test]
    fn scores_stay_in_unit_interval(raw in raw_frame(257, 0.0)) {
        for method in Method::ALL {
            let d = combine(&raw.frame(), method, TiePolicy::default());
            prop_assert!(d.scores.iter().all(|s| (0.0..=1.0).contains(s)), "{} {:?}", method, d.scores);
        }
    }

    #[test]
    fn decisions_are_deterministic(raw in raw_frame(64, 0.0)) {
        for method in Method::ALL {
            let a = combine(&raw.frame(), method, TiePolicy::default());
            let b = combine(&raw.frame(), method, TiePolicy::default());
            prop_assert_eq!(
                a.scores.iter().map(|s| s.to_bits()).collect::<Vec<_>>(),
                b.scores.iter().map(|s| s.to_bits()).collect::<Vec<_>>()
            );
            prop_assert_eq!(a, b);
        }
    }
}
