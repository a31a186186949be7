//! TF-IDF weighting and cosine-similarity ranking over sparse term vectors.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VsmError {
    #[error("term statistics must be positive (n_t={n_t}, n_docs={n_docs})")]
    InvalidStats { n_t: u32, n_docs: u32 },
}

/// How a term's weight is derived from its frequency statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightScheme {
    /// `tf * N / n_t`: the inverse document frequency enters as a raw ratio.
    #[default]
    LinearIdf,
    /// `tf * ln(N / n_t)`: the conventional logarithmic variant.
    LogIdf,
}

impl FromStr for WeightScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" | "linear" => Ok(Self::LinearIdf),
            "log-idf" | "log" => Ok(Self::LogIdf),
            other => Err(format!(
                "unknown weighting scheme {other:?} (expected `paper` or `log-idf`)"
            )),
        }
    }
}

/// Weight of a term occurring `tf` times in a document, given that `n_t` of
/// the `n_docs` documents contain it.
pub fn tfidf_weight(tf: u32, n_t: u32, n_docs: u32, scheme: WeightScheme) -> Result<f64, VsmError> {
    if n_t == 0 || n_docs == 0 {
        return Err(VsmError::InvalidStats { n_t, n_docs });
    }
    let ratio = f64::from(n_docs) / f64::from(n_t);
    Ok(match scheme {
        WeightScheme::LinearIdf => f64::from(tf) * ratio,
        WeightScheme::LogIdf => f64::from(tf) * ratio.ln(),
    })
}

/// A sparse non-negative term vector with its precomputed Euclidean norm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedVector {
    weights: BTreeMap<String, f64>,
    norm: f64,
}

impl WeightedVector {
    pub fn from_weights(weights: BTreeMap<String, f64>) -> Self {
        let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
        Self { weights, norm }
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Inner product; both key sets are sorted, so this is a merge join.
    pub fn dot(&self, other: &WeightedVector) -> f64 {
        let mut sum = 0.0;
        let mut a = self.weights.iter();
        let mut b = other.weights.iter();
        let (mut x, mut y) = (a.next(), b.next());
        while let (Some((ka, va)), Some((kb, vb))) = (x, y) {
            match ka.cmp(kb) {
                Ordering::Equal => {
                    sum += va * vb;
                    x = a.next();
                    y = b.next();
                }
                Ordering::Less => x = a.next(),
                Ordering::Greater => y = b.next(),
            }
        }
        sum
    }
}

/// Weight a document's term frequencies against corpus statistics.
///
/// Terms absent from `df` (query terms outside the corpus vocabulary) are
/// omitted, which is equivalent to weight zero.
pub fn vectorize(
    term_freqs: &BTreeMap<String, u32>,
    df: &HashMap<String, u32>,
    n_docs: u32,
    scheme: WeightScheme,
) -> Result<WeightedVector, VsmError> {
    let mut weights = BTreeMap::new();
    for (term, &tf) in term_freqs {
        if let Some(&n_t) = df.get(term) {
            weights.insert(term.clone(), tfidf_weight(tf, n_t, n_docs, scheme)?);
        }
    }
    Ok(WeightedVector::from_weights(weights))
}

/// Cosine similarity in `[0, 1]`; zero when either vector has zero norm.
pub fn cosine(l: &WeightedVector, s: &WeightedVector) -> f64 {
    if l.norm == 0.0 || s.norm == 0.0 {
        return 0.0;
    }
    // Clamp guards against floating-point drift just above 1.
    (l.dot(s) / (l.norm * s.norm)).clamp(0.0, 1.0)
}

/// Score every document against the query, descending; ties broken by
/// ascending document index.
pub fn rank_by_similarity(query: &WeightedVector, docs: &[WeightedVector]) -> Vec<(usize, f64)> {
    let mut scored: Vec<(usize, f64)> = docs
        .par_iter()
        .enumerate()
        .map(|(doc_id, doc)| (doc_id, cosine(query, doc)))
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    scored
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn arb_vector() -> impl Strategy<Value = WeightedVector> {
        proptest::collection::btree_map("[a-e]", 0.0f64..10.0, 0..6)
            .prop_map(WeightedVector::from_weights)
    }

    proptest! {
        #[test]
        fn cosine_is_symmetric(l in arb_vector(), s in arb_vector()) {
            prop_assert!((cosine(&l, &s) - cosine(&s, &l)).abs() < 1e-12);
        }

        #[test]
        fn cosine_is_bounded(l in arb_vector(), s in arb_vector()) {
            let c = cosine(&l, &s);
            prop_assert!((0.0..=1.0).contains(&c));
        }

        #[test]
        fn cosine_is_scale_invariant(l in arb_vector(), s in arb_vector(), c in 0.001f64..1000.0) {
            let scaled = WeightedVector::from_weights(
                l.weights().iter().map(|(k, v)| (k.clone(), v * c)).collect(),
            );
            prop_assert!((cosine(&scaled, &s) - cosine(&l, &s)).abs() < 1e-9);
        }

        #[test]
        fn norm_matches_weights(v in arb_vector()) {
            let expect = v.weights().values().map(|w| w * w).sum::<f64>().sqrt();
            let rel = if expect == 0.0 { v.norm() } else { (v.norm() - expect).abs() / expect };
            prop_assert!(rel < 1e-9);
        }
    }
}
