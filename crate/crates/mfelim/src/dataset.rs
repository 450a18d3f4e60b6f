//! LIBSVM-format datasets and seeded trial/fold splitting.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Dense two-class dataset. Labels are exactly `+1.0` or `-1.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_samples: usize,
    n_features: usize,
    labels: Vec<f64>,
    /// Row-major `n_samples x n_features`.
    values: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from dense row-major values, validating all invariants.
    pub fn from_dense(labels: Vec<f64>, values: Vec<f64>, n_features: usize) -> Result<Self> {
        let n_samples = labels.len();
        if n_samples < 2 {
            return Err(Error::InvalidInput(
                "dataset needs at least two samples".into(),
            ));
        }
        if n_features == 0 {
            return Err(Error::InvalidInput(
                "dataset needs at least one feature".into(),
            ));
        }
        if values.len() != n_samples * n_features {
            return Err(Error::InvalidInput(format!(
                "expected {} values, got {}",
                n_samples * n_features,
                values.len()
            )));
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidInput("labels must be +1 or -1".into()));
        }
        if !labels.iter().any(|&y| y > 0.0) || !labels.iter().any(|&y| y < 0.0) {
            return Err(Error::InvalidInput("only one class present".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
        Ok(Self {
            n_samples,
            n_features,
            labels,
            values,
        })
    }

    /// Convenience constructor from per-sample rows.
    pub fn from_rows(labels: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_features) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        let values = rows.iter().flatten().copied().collect();
        Self::from_dense(labels, values, n_features)
    }

    /// Unvalidated constructor for internal synthetic fixtures.
    #[cfg(test)]
    pub(crate) fn new_unchecked(labels: Vec<f64>, values: Vec<f64>, n_features: usize) -> Self {
        let n_samples = labels.len();
        Self {
            n_samples,
            n_features,
            labels,
            values,
        }
    }

    /// Parses LIBSVM sparse text: `<label> <index>:<value> ...`, one sample per
    /// line, 1-based strictly increasing indices. Unspecified entries are 0.
    /// The feature count is the largest index seen or `n_features_hint`,
    /// whichever is larger. Any positive label maps to +1, the rest to -1.
    pub fn parse_libsvm(text: &str, n_features_hint: Option<usize>) -> Result<Self> {
        let mut labels = Vec::new();
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut max_index = 0usize;

        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            let label_tok = tokens.next().expect("nonempty line has a token");
            let label: f64 = label_tok.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad label `{label_tok}`"),
            })?;
            if !label.is_finite() {
                return Err(Error::Parse {
                    line,
                    msg: "non-finite label".into(),
                });
            }
            labels.push(if label > 0.0 { 1.0 } else { -1.0 });

            let mut feats = Vec::new();
            let mut prev = 0usize;
            for tok in tokens {
                let (idx_str, val_str) = tok.split_once(':').ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("expected index:value, got `{tok}`"),
                })?;
                let idx: usize = idx_str.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("bad feature index `{idx_str}`"),
                })?;
                if idx == 0 {
                    return Err(Error::Parse {
                        line,
                        msg: "feature indices are 1-based".into(),
                    });
                }
                if idx == prev {
                    return Err(Error::Parse {
                        line,
                        msg: format!("duplicate feature index {idx}"),
                    });
                }
                if idx < prev {
                    return Err(Error::Parse {
                        line,
                        msg: format!("feature indices must be strictly increasing at {idx}"),
                    });
                }
                let val: f64 = val_str.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("bad feature value `{val_str}`"),
                })?;
                if !val.is_finite() {
                    return Err(Error::Parse {
                        line,
                        msg: "non-finite feature value".into(),
                    });
                }
                prev = idx;
                max_index = max_index.max(idx);
                feats.push((idx, val));
            }
            rows.push(feats);
        }

        if rows.is_empty() {
            return Err(Error::InvalidInput("empty dataset".into()));
        }
        let n_features = max_index.max(n_features_hint.unwrap_or(0));
        if n_features == 0 {
            return Err(Error::InvalidInput("dataset has no features".into()));
        }
        let mut values = vec![0.0; rows.len() * n_features];
        for (n, feats) in rows.iter().enumerate() {
            for &(idx, val) in feats {
                values[n * n_features + (idx - 1)] = val;
            }
        }
        Self::from_dense(labels, values, n_features)
    }

    /// Reads a LIBSVM file from disk.
    pub fn load_libsvm(path: &Path, n_features_hint: Option<usize>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_libsvm(&text, n_features_hint)
    }

    /// Serializes back to LIBSVM text, omitting zero entries.
    pub fn to_libsvm_string(&self) -> String {
        let mut out = String::new();
        for n in 0..self.n_samples {
            let _ = write!(out, "{}", if self.labels[n] > 0.0 { "+1" } else { "-1" });
            for m in 0..self.n_features {
                let v = self.value(n, m);
                if v != 0.0 {
                    let _ = write!(out, " {}:{}", m + 1, v);
                }
            }
            out.push('\n');
        }
        out
    }

    #[inline]
    pub fn value(&self, n: usize, m: usize) -> f64 {
        self.values[n * self.n_features + m]
    }

    #[inline]
    pub fn label(&self, n: usize) -> f64 {
        self.labels[n]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// (positives, negatives) among `subset`.
    pub fn class_counts(&self, subset: &[usize]) -> (usize, usize) {
        let pos = subset.iter().filter(|&&n| self.labels[n] > 0.0).count();
        (pos, subset.len() - pos)
    }

    /// Per-feature min-max scaling to [0, 1], fit on `fit_on` samples only and
    /// applied to every sample. Constant features map to 0.
    pub fn min_max_scaled(&self, fit_on: &[usize]) -> Dataset {
        let mut lo = vec![f64::INFINITY; self.n_features];
        let mut hi = vec![f64::NEG_INFINITY; self.n_features];
        for &n in fit_on {
            for m in 0..self.n_features {
                let v = self.value(n, m);
                lo[m] = lo[m].min(v);
                hi[m] = hi[m].max(v);
            }
        }
        let mut values = vec![0.0; self.values.len()];
        for n in 0..self.n_samples {
            for m in 0..self.n_features {
                let range = hi[m] - lo[m];
                values[n * self.n_features + m] = if range > 0.0 {
                    (self.value(n, m) - lo[m]) / range
                } else {
                    0.0
                };
            }
        }
        Dataset {
            n_samples: self.n_samples,
            n_features: self.n_features,
            labels: self.labels.clone(),
            values,
        }
    }
}

/// One 50-50 split of the samples. Odd counts put the extra sample in train.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSplit {
    pub trial_id: usize,
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits samples 50-50 by a seeded uniform permutation. Stratification is
/// deliberately not applied; callers discard splits missing a class in train.
pub fn make_trial(ds: &Dataset, trial_id: usize, seed: u64) -> Result<TrialSplit> {
    let n = ds.n_samples();
    if n < 4 {
        return Err(Error::InvalidInput(format!(
            "need at least 4 samples to split, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_train = n.div_ceil(2);
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(TrialSplit {
        trial_id,
        seed,
        train,
        test,
    })
}

/// Partitions `indices` into `k` seeded folds whose sizes differ by at most 1.
pub fn make_folds(indices: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    if k > indices.len() {
        return Err(Error::InvalidInput(format!(
            "cannot make {k} folds from {} indices",
            indices.len()
        )));
    }
    let mut order = indices.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let base = order.len() / k;
    let extra = order.len() % k;
    let mut folds = Vec::with_capacity(k);
    let mut at = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let mut fold = order[at..at + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        at += len;
    }
    Ok(folds)
}
