//! Top-N ranking metrics over a single package's ranked file list.

use std::collections::BTreeSet;

use super::EvalError;

fn hits_in_top<S: AsRef<str>>(ranked: &[S], truth: &BTreeSet<String>, n: usize) -> usize {
    ranked
        .iter()
        .take(n)
        .filter(|p| truth.contains(p.as_ref()))
        .count()
}

/// Fraction of the top `n` slots holding a problematic file. The denominator
/// stays `n` even when fewer than `n` files were ranked.
pub fn precision_at<S: AsRef<str>>(ranked: &[S], truth: &BTreeSet<String>, n: usize) -> f64 {
    debug_assert!(n >= 1);
    hits_in_top(ranked, truth, n) as f64 / n as f64
}

/// Fraction of all problematic files found within the top `n`.
pub fn recall_at<S: AsRef<str>>(
    ranked: &[S],
    truth: &BTreeSet<String>,
    n: usize,
) -> Result<f64, EvalError> {
    if truth.is_empty() {
        return Err(EvalError::EmptyTruth);
    }
    Ok(hits_in_top(ranked, truth, n) as f64 / truth.len() as f64)
}

/// 1 iff at least one problematic file appears in the top `n`.
pub fn accuracy_at<S: AsRef<str>>(ranked: &[S], truth: &BTreeSet<String>, n: usize) -> u8 {
    debug_assert!(n >= 1);
    u8::from(hits_in_top(ranked, truth, n) > 0)
}

/// Average precision over the full ranking: the precision at each rank that
/// holds a problematic file, summed and divided by the number of problematic
/// files. Truth files absent from the ranking contribute nothing.
pub fn average_precision<S: AsRef<str>>(
    ranked: &[S],
    truth: &BTreeSet<String>,
) -> Result<f64, EvalError> {
    if truth.is_empty() {
        return Err(EvalError::EmptyTruth);
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, path) in ranked.iter().enumerate() {
        if truth.contains(path.as_ref()) {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    Ok(sum / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth(paths: &[&str]) -> BTreeSet<String> {
        paths.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn precision_examples() {
        let t = truth(&["a"]);
        assert_eq!(precision_at(&["a", "b"], &t, 1), 1.0);

        let t = truth(&["c", "f"]);
        let ranked = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"];
        assert_eq!(precision_at(&ranked, &t, 10), 0.2);

        // Short list: denominator stays n.
        assert_eq!(precision_at(&["c"], &t, 10), 0.1);
    }

    #[test]
    fn recall_examples() {
        let t = truth(&["a", "b"]);
        assert_eq!(recall_at(&["a"], &t, 1).unwrap(), 0.5);
        assert_eq!(recall_at(&["a", "b", "c"], &t, 3).unwrap(), 1.0);
        assert_eq!(recall_at(&["a", "b"], &t, 10).unwrap(), 1.0);
        assert!(recall_at(&["a"], &BTreeSet::new(), 1).is_err());
    }

    #[test]
    fn accuracy_examples() {
        let t = truth(&["c"]);
        assert_eq!(accuracy_at(&["a", "b", "c"], &t, 3), 1);
        assert_eq!(accuracy_at(&["a", "b", "c"], &t, 2), 0);
    }

    #[test]
    fn average_precision_examples() {
        let t = truth(&["a"]);
        assert_eq!(average_precision(&["a", "b", "c"], &t).unwrap(), 1.0);

        // Hits at ranks 1 and 3 with two truth files: (1/1 + 2/3) / 2.
        let t = truth(&["a", "c"]);
        let ap = average_precision(&["a", "b", "c"], &t).unwrap();
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);

        // A truth file missing from the ranking contributes zero.
        let t = truth(&["a", "zzz"]);
        let ap = average_precision(&["a", "b", "c"], &t).unwrap();
        assert!((ap - 0.5).abs() < 1e-12);

        // All truth at the top gives exactly 1.
        let t = truth(&["a", "b"]);
        assert_eq!(average_precision(&["a", "b", "c"], &t).unwrap(), 1.0);
    }

    #[test]
    fn a1_equals_p1() {
        let t = truth(&["x"]);
        for ranked in [vec!["x", "y"], vec!["y", "x"], vec!["y", "z"]] {
            assert_eq!(
                f64::from(accuracy_at(&ranked, &t, 1)),
                precision_at(&ranked, &t, 1)
            );
        }
    }
}
