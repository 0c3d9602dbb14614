//! Decision rules that turn an [`EnsembleFrame`] into a [`Decision`].
//!
//! Three scoring rules are provided alongside a top-model baseline:
//!
//! - **negation**: `score(C) = max_n (1 - A_n * p_n(C))`, the largest
//!   probability, over models, that the sample is *not* class `C`. The class
//!   with the smallest score wins.
//! - **product**: `score(C) = 1 - prod_n (A_n * p_n(C))`, smallest score wins.
//! - **average**: `score(C) = mean_n p_n(C)`, largest score wins. Accuracies
//!   are ignored.
//! - **top**: the single model with the highest validation accuracy decides.
//!
//! Scores are only meaningful for ranking classes against each other; they
//! are not calibrated probabilities.
//!
//! Per-class reductions over models are evaluated on the values sorted in
//! ascending order, so the result is bit-identical under any permutation of
//! the model order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{check_accuracy, ClassId, EnsembleFrame, ModelRecord};

/// Scores closer than this are treated as tied.
pub const TIE_EPSILON: f64 = 1e-12;

/// Combination method. Declaration order is the fixed report row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[serde(rename = "top")]
    TopModel,
    Average,
    Product,
    Negation,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::TopModel, Method::Average, Method::Product, Method::Negation];

    pub fn name(self) -> &'static str {
        match self {
            Method::TopModel => "top",
            Method::Average => "average",
            Method::Product => "product",
            Method::Negation => "negation",
        }
    }

    pub fn orientation(self) -> Orientation {
        match self {
            Method::Negation | Method::Product => Orientation::Minimize,
            Method::Average | Method::TopModel => Orientation::Maximize,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top" | "top-model" => Ok(Method::TopModel),
            "average" => Ok(Method::Average),
            "product" => Ok(Method::Product),
            "negation" => Ok(Method::Negation),
            other => Err(Error::validation("method", format!("unknown method `{other}`"))),
        }
    }
}

/// Which end of the score range is best.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Minimize,
    Maximize,
}

impl Orientation {
    /// Orders `a` before `b` when `a` is the better score.
    fn better(self, a: f64, b: f64) -> Ordering {
        match self {
            Orientation::Minimize => a.total_cmp(&b),
            Orientation::Maximize => b.total_cmp(&a),
        }
    }
}

/// How equal extremal scores are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// Prefer the tied class with the higher mean raw confidence across
    /// models, then the lowest class index.
    #[default]
    MeanConf,
    LowestIndex,
}

impl TiePolicy {
    pub fn name(self) -> &'static str {
        match self {
            TiePolicy::MeanConf => "mean-conf",
            TiePolicy::LowestIndex => "lowest-index",
        }
    }
}

impl fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean-conf" => Ok(TiePolicy::MeanConf),
            "lowest-index" => Ok(TiePolicy::LowestIndex),
            other => Err(Error::validation("tie policy", format!("unknown tie policy `{other}`"))),
        }
    }
}

/// Per-class ensemble scores and the class they select.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub method: Method,
    pub scores: Vec<f64>,
    pub predicted: ClassId,
    pub tie_broken: bool,
}

/// `confidence * accuracy`: the probability that the model both is correct
/// and assigns the class.
pub fn weighted_confidence(confidence: f64, accuracy: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&confidence) {
        return Err(Error::validation("confidence", format!("{confidence} is outside [0, 1]")));
    }
    check_accuracy("accuracy", accuracy)?;
    Ok(confidence * accuracy)
}

pub fn combine(frame: &EnsembleFrame, method: Method, tie_policy: TiePolicy) -> Decision {
    match method {
        Method::Negation => combine_negation(frame, tie_policy),
        Method::Product => combine_product(frame, tie_policy),
        Method::Average => combine_average(frame, tie_policy),
        Method::TopModel => combine_top_model(frame, tie_policy),
    }
}

pub fn combine_negation(frame: &EnsembleFrame, tie_policy: TiePolicy) -> Decision {
    let scores = per_class(frame, |terms| {
        terms.iter().map(|&(a, p)| 1.0 - a * p).fold(0.0, f64::max)
    });
    decide(frame, Method::Negation, scores, tie_policy)
}

pub fn combine_product(frame: &EnsembleFrame, tie_policy: TiePolicy) -> Decision {
    let scores = per_class(frame, |terms| {
        let mut weighted: Vec<f64> = terms.iter().map(|&(a, p)| a * p).collect();
        weighted.sort_by(f64::total_cmp);
        1.0 - weighted.into_iter().product::<f64>()
    });
    decide(frame, Method::Product, scores, tie_policy)
}

pub fn combine_average(frame: &EnsembleFrame, tie_policy: TiePolicy) -> Decision {
    let n = frame.model_count() as f64;
    let scores = per_class(frame, |terms| {
        let mut raw: Vec<f64> = terms.iter().map(|&(_, p)| p).collect();
        sorted_sum(&mut raw) / n
    });
    decide(frame, Method::Average, scores, tie_policy)
}

/// The most accurate model's vector, decided by its own argmax.
pub fn combine_top_model(frame: &EnsembleFrame, tie_policy: TiePolicy) -> Decision {
    let top = top_model_index(frame.records()).expect("frames hold at least one model");
    let scores = frame.predictions()[top].as_slice().to_vec();
    decide(frame, Method::TopModel, scores, tie_policy)
}

/// Id of the record with the highest validation accuracy; earliest wins ties.
pub fn top_model_select(records: &[ModelRecord]) -> Result<&str> {
    top_model_index(records)
        .map(|i| records[i].model_id.as_str())
        .ok_or_else(|| Error::validation("records", "no models to select from"))
}

fn top_model_index(records: &[ModelRecord]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in records.iter().enumerate() {
        match best {
            Some(b) if records[b].validation_accuracy() >= r.validation_accuracy() => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Classes ordered best to worst under the method's orientation. Equal scores
/// keep index order, and the predicted class always comes first.
pub fn rank_classes(decision: &Decision) -> Vec<ClassId> {
    let orientation = decision.method.orientation();
    let mut order: Vec<usize> = (0..decision.scores.len()).collect();
    order.sort_by(|&a, &b| orientation.better(decision.scores[a], decision.scores[b]).then(a.cmp(&b)));
    if let Some(pos) = order.iter().position(|&c| c == decision.predicted.0) {
        let winner = order.remove(pos);
        order.insert(0, winner);
    }
    order.into_iter().map(ClassId).collect()
}

/// Picks the extremal class of `scores`, resolving near-equal scores with the
/// tie policy. Returns the class and whether a tie had to be broken.
pub fn select_class(
    scores: &[f64],
    orientation: Orientation,
    mean_confidences: &[f64],
    tie_policy: TiePolicy,
) -> (ClassId, bool) {
    let best = scores
        .iter()
        .copied()
        .min_by(|a, b| orientation.better(*a, *b))
        .expect("at least one class");
    let tied: Vec<usize> = (0..scores.len())
        .filter(|&c| (scores[c] - best).abs() <= TIE_EPSILON)
        .collect();
    if tied.len() == 1 {
        return (ClassId(tied[0]), false);
    }
    let winner = match tie_policy {
        TiePolicy::LowestIndex => tied[0],
        TiePolicy::MeanConf => {
            let top = tied
                .iter()
                .map(|&c| mean_confidences[c])
                .fold(f64::NEG_INFINITY, f64::max);
            *tied
                .iter()
                .find(|&&c| (mean_confidences[c] - top).abs() <= TIE_EPSILON)
                .expect("maximum is attained")
        }
    };
    (ClassId(winner), true)
}

/// Mean raw confidence per class, summed in sorted order.
pub fn mean_confidences(frame: &EnsembleFrame) -> Vec<f64> {
    let n = frame.model_count() as f64;
    per_class(frame, |terms| {
        let mut raw: Vec<f64> = terms.iter().map(|&(_, p)| p).collect();
        sorted_sum(&mut raw) / n
    })
}

fn decide(frame: &EnsembleFrame, method: Method, scores: Vec<f64>, tie_policy: TiePolicy) -> Decision {
    let means = match tie_policy {
        TiePolicy::MeanConf => mean_confidences(frame),
        TiePolicy::LowestIndex => Vec::new(),
    };
    let (predicted, tie_broken) = select_class(&scores, method.orientation(), &means, tie_policy);
    Decision {
        method,
        scores,
        predicted,
        tie_broken,
    }
}

/// Applies `reduce` to the `(accuracy, confidence)` pairs of every class.
fn per_class(frame: &EnsembleFrame, mut reduce: impl FnMut(&[(f64, f64)]) -> f64) -> Vec<f64> {
    let mut terms = Vec::with_capacity(frame.model_count());
    (0..frame.class_count())
        .map(|c| {
            terms.clear();
            terms.extend(frame.members().map(|(a, p)| (a, p[c])));
            terms.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
            reduce(&terms)
        })
        .collect()
}

fn sorted_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}
