//! Tallying combiner decisions against labeled samples.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::combiner::{combine, Method, TiePolicy};
use crate::error::{Error, Result};
use crate::types::{ClassId, EnsembleFrame};

/// Ground-truth class per sample id.
pub type Labels = BTreeMap<String, ClassId>;

/// Matches over total for one method. The ratio is kept exact; use
/// [`AccuracyReport::accuracy`] or [`AccuracyReport::percent`] to render it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AccuracyReport {
    pub method: Method,
    pub matches: usize,
    pub total: usize,
}

impl AccuracyReport {
    pub fn accuracy(&self) -> f64 {
        self.matches as f64 / self.total as f64
    }

    /// Accuracy in percent with two decimals, e.g. `73.56`.
    pub fn percent(&self) -> String {
        format!("{:.2}", 100.0 * self.matches as f64 / self.total as f64)
    }
}

/// One report per method, rows in the fixed [`Method`] order, all over the
/// same samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<AccuracyReport>,
}

impl ComparisonTable {
    pub fn get(&self, method: Method) -> Option<&AccuracyReport> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// Checks that frames and labels cover exactly the same samples and that
/// every label is a valid class for its frame.
pub fn check_coverage(frames: &[EnsembleFrame], labels: &Labels) -> Result<()> {
    if frames.is_empty() {
        return Err(Error::validation("frames", "no samples to evaluate"));
    }
    for frame in frames {
        let truth = labels
            .get(frame.sample_id())
            .ok_or_else(|| Error::MissingLabel(frame.sample_id().to_owned()))?;
        if truth.index() >= frame.class_count() {
            return Err(Error::validation(
                format!("label for `{}`", frame.sample_id()),
                format!("class {truth} is outside 0..{}", frame.class_count()),
            ));
        }
    }
    if labels.len() != frames.len() {
        let seen: BTreeSet<&str> = frames.iter().map(|f| f.sample_id()).collect();
        let unmatched: Vec<String> = labels
            .keys()
            .filter(|id| !seen.contains(id.as_str()))
            .cloned()
            .collect();
        if unmatched.is_empty() {
            return Err(Error::validation("frames", "duplicate sample ids"));
        }
        return Err(Error::Coverage {
            context: "labels without predictions".into(),
            sample_ids: unmatched,
        });
    }
    Ok(())
}

pub fn evaluate_method(
    frames: &[EnsembleFrame],
    labels: &Labels,
    method: Method,
    tie_policy: TiePolicy,
) -> Result<AccuracyReport> {
    check_coverage(frames, labels)?;
    Ok(tally(frames, labels, method, tie_policy))
}

/// Evaluates every requested method over the same samples. Duplicate methods
/// collapse; rows come out as top, average, product, negation.
pub fn compare_methods(
    frames: &[EnsembleFrame],
    labels: &Labels,
    methods: &[Method],
    tie_policy: TiePolicy,
) -> Result<ComparisonTable> {
    let methods: BTreeSet<Method> = methods.iter().copied().collect();
    if methods.is_empty() {
        return Err(Error::validation("methods", "no methods requested"));
    }
    check_coverage(frames, labels)?;
    let rows = methods
        .into_iter()
        .map(|m| tally(frames, labels, m, tie_policy))
        .collect();
    Ok(ComparisonTable { rows })
}

fn tally(frames: &[EnsembleFrame], labels: &Labels, method: Method, tie_policy: TiePolicy) -> AccuracyReport {
    let matches = frames
        .par_iter()
        .filter(|f| combine(f, method, tie_policy).predicted == labels[f.sample_id()])
        .count();
    AccuracyReport {
        method,
        matches,
        total: frames.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Four frames built from the combiner examples; negation is right on three.
    fn fixture() -> (Vec<EnsembleFrame>, Labels) {
        let frames = vec![
            EnsembleFrame::from_raw("a", &[1.0, 1.0], &[vec![0.9, 0.1], vec![0.8, 0.2]]).unwrap(),
            EnsembleFrame::from_raw("b", &[0.9, 0.6], &[vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap(),
            EnsembleFrame::from_raw("c", &[1.0, 1.0], &[vec![0.2, 0.5, 0.3], vec![0.2, 0.5, 0.3]]).unwrap(),
            EnsembleFrame::from_raw("d", &[0.5, 1.0], &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
        ];
        let labels = [("a", 0), ("b", 1), ("c", 1), ("d", 1)]
            .into_iter()
            .map(|(s, c)| (s.to_owned(), ClassId(c)))
            .collect();
        (frames, labels)
    }

    #[test]
    fn tallies_matches() {
        let (frames, labels) = fixture();
        let r = evaluate_method(&frames, &labels, Method::Negation, TiePolicy::default()).unwrap();
        assert_eq!((r.matches, r.total), (3, 4));
        assert_eq!(r.accuracy(), 0.75);
        assert_eq!(r.percent(), "75.00");
    }

    #[test]
    fn perfect_and_adversarial_cases() {
        let (frames, _) = fixture();
        let truth: Labels = frames
            .iter()
            .map(|f| (f.sample_id().to_owned(), crate::combiner::combine_average(f, TiePolicy::default()).predicted))
            .collect();
        let r = evaluate_method(&frames, &truth, Method::Average, TiePolicy::default()).unwrap();
        assert_eq!(r.accuracy(), 1.0);

        // The most accurate model (index 0) always puts its mass on the wrong class.
        let frames: Vec<EnsembleFrame> = (0..5)
            .map(|i| EnsembleFrame::from_raw(format!("s{i}"), &[0.95, 0.5], &[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap())
            .collect();
        let labels: Labels = (0..5).map(|i| (format!("s{i}"), ClassId(1))).collect();
        let r = evaluate_method(&frames, &labels, Method::TopModel, TiePolicy::default()).unwrap();
        assert_eq!(r.accuracy(), 0.0);
    }

    #[test]
    fn coverage_errors() {
        let (frames, mut labels) = fixture();
        labels.remove("c");
        let err = evaluate_method(&frames, &labels, Method::Average, TiePolicy::default()).unwrap_err();
        assert!(matches!(err, Error::MissingLabel(ref id) if id == "c"));

        let (frames, mut labels) = fixture();
        labels.insert("zz".into(), ClassId(0));
        let err = evaluate_method(&frames, &labels, Method::Average, TiePolicy::default()).unwrap_err();
        assert!(err.to_string().contains("zz"), "{err}");

        let (frames, mut labels) = fixture();
        labels.insert("a".into(), ClassId(7));
        assert!(evaluate_method(&frames, &labels, Method::Average, TiePolicy::default()).is_err());

        assert!(evaluate_method(&[], &Labels::new(), Method::Average, TiePolicy::default()).is_err());
    }

    #[test]
    fn comparison_rows_are_ordered() {
        let (frames, labels) = fixture();
        let table = compare_methods(
            &frames,
            &labels,
            &[Method::Negation, Method::TopModel, Method::Average, Method::Negation],
            TiePolicy::default(),
        )
        .unwrap();
        let order: Vec<Method> = table.rows.iter().map(|r| r.method).collect();
        assert_eq!(order, vec![Method::TopModel, Method::Average, Method::Negation]);
        assert!(table.rows.iter().all(|r| r.total == 4));

        let single = compare_methods(&frames, &labels, &[Method::Average], TiePolicy::default()).unwrap();
        assert_eq!(single.rows.len(), 1);
    }

    #[test]
    fn accuracy_ignores_frame_order() {
        let (mut frames, labels) = fixture();
        let before = compare_methods(&frames, &labels, &Method::ALL, TiePolicy::default()).unwrap();
        frames.reverse();
        let after = compare_methods(&frames, &labels, &Method::ALL, TiePolicy::default()).unwrap();
        assert_eq!(before, after);
    }
}
