//! Exact solvers for one-dimensional reductions of the SVM problem.
//!
//! [`solve_1d`] minimizes `1/2 w^2 + C sum_n max(0, 1 - y_n (w z_n + b))`
//! over scalar `(w, b)` exactly, in O(N log N):
//!
//! * For each orientation (positive class to the right, or mirrored), both
//!   classes are sorted and candidate margin-setter pairs are enumerated by
//!   matched rank, so that a pair always leaves equally many violators on
//!   each side. Each pair pins `w = 2 / gap` and `b`, and its slack total
//!   comes from running prefix sums rather than a rescan.
//! * The optimum can also sit strictly between sample kinks (small C pushes
//!   every point inside the slab). Those stationary points are recovered in
//!   the same sorted order: for each balanced violator count `v`, the
//!   stationarity value `w = C (P_v - Q_v)` is kept when a threshold pair
//!   realizing exactly `v` violators per class exists.
//! * Finally the slab-free solution `w = 0` is evaluated at the only two
//!   intercepts that matter, `b = -1` and `b = +1` (the hinge in `b` is
//!   piecewise linear with knots there).
//!
//! The best of all candidates is the global optimum. [`solve_1d_oracle`]
//! solves the same problem through the generic SMO dual solver and exists to
//! cross-check [`solve_1d`]; it must stay on that independent path.

use crate::svm::{smo_solve, SmoSettings};
use crate::{Error, Result};

/// Scalar projections of the training samples plus the weight norm that was
/// divided out when forming them.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedData {
    pub z: Vec<f64>,
    /// Labels in {+1, -1}, aligned with `z`.
    pub labels: Vec<f64>,
    /// The `||w||` divisor applied when the projections were formed.
    pub norm_used: f64,
}

impl ProjectedData {
    pub fn new(z: Vec<f64>, labels: Vec<f64>, norm_used: f64) -> Result<Self> {
        if z.len() != labels.len() {
            return Err(Error::InvalidInput(
                "projection/label length mismatch".into(),
            ));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite projection".into()));
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidInput("labels must be +1 or -1".into()));
        }
        if norm_used.is_nan() || norm_used <= 0.0 {
            return Err(Error::InvalidInput("norm_used must be positive".into()));
        }
        Ok(Self {
            z,
            labels,
            norm_used,
        })
    }
}

/// Exact optimum of the 1-d soft-margin problem.
#[derive(Debug, Clone, PartialEq)]
pub struct OneDSolution {
    pub w: f64,
    pub b: f64,
    /// Tight slacks `max(0, 1 - y_n (w z_n + b))`.
    pub xi: Vec<f64>,
    pub objective: f64,
    /// Margin-setter sample indices `(positive class, negative class)`;
    /// absent when the optimum has no sample at unit margin.
    pub margin_setters: Option<(usize, usize)>,
}

struct Candidate {
    w: f64,
    b: f64,
    objective: f64,
    setters: Option<(usize, usize)>,
}

/// Solves `min 1/2 w^2 + C sum xi` s.t. `y_n (w z_n + b) >= 1 - xi_n`,
/// `xi_n >= 0`, exactly.
pub fn solve_1d(pd: &ProjectedData, c: f64) -> Result<OneDSolution> {
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::InvalidInput(format!("C must be positive, got {c}")));
    }
    let mut pos: Vec<(f64, usize)> = Vec::new();
    let mut neg: Vec<(f64, usize)> = Vec::new();
    for (n, (&z, &y)) in pd.z.iter().zip(&pd.labels).enumerate() {
        if y > 0.0 {
            pos.push((z, n));
        } else {
            neg.push((z, n));
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::InvalidInput("both classes must be present".into()));
    }

    let mut best = threshold_free_candidate(&pd.z, &pd.labels, c);
    scan_orientation(&pos, &neg, c, 1.0, &mut best);
    scan_orientation(&pos, &neg, c, -1.0, &mut best);

    let xi: Vec<f64> =
        pd.z.iter()
            .zip(&pd.labels)
            .map(|(&z, &y)| (1.0 - y * (best.w * z + best.b)).max(0.0))
            .collect();
    let objective = 0.5 * best.w * best.w + c * xi.iter().sum::<f64>();
    Ok(OneDSolution {
        w: best.w,
        b: best.b,
        xi,
        objective,
        margin_setters: best.setters,
    })
}

/// `w = 0` fallback: the objective is `C` times a piecewise-linear function
/// of `b` whose only knots are `b = +1` and `b = -1`.
fn threshold_free_candidate(z: &[f64], labels: &[f64], c: f64) -> Candidate {
    let mut best: Option<Candidate> = None;
    for b in [-1.0, 1.0] {
        let slack: f64 = z
            .iter()
            .zip(labels)
            .map(|(_, &y)| (1.0 - y * b).max(0.0))
            .sum();
        let objective = c * slack;
        if best.as_ref().is_none_or(|cand| objective < cand.objective) {
            best = Some(Candidate {
                w: 0.0,
                b,
                objective,
                setters: None,
            });
        }
    }
    best.expect("two fallback intercepts were evaluated")
}

/// Enumerates both candidate families for one orientation. `sign = 1.0`
/// places the positive class to the right of the boundary (`w > 0`);
/// `sign = -1.0` runs the mirrored scenario and maps `w` back.
fn scan_orientation(
    pos: &[(f64, usize)],
    neg: &[(f64, usize)],
    c: f64,
    sign: f64,
    best: &mut Candidate,
) {
    // Sort each class starting at the boundary side and moving outward:
    // ascending mirrored coordinates for the positive class, descending for
    // the negative class. Matched ranks then hold equally many earlier
    // (violating) samples in both classes.
    let mut p: Vec<(f64, usize)> = pos.iter().map(|&(z, n)| (sign * z, n)).collect();
    let mut q: Vec<(f64, usize)> = neg.iter().map(|&(z, n)| (sign * z, n)).collect();
    p.sort_by(|a, b| a.partial_cmp(b).expect("finite projections"));
    q.sort_by(|a, b| b.partial_cmp(a).expect("finite projections"));

    // Prefix sums over the sorted coordinates (recursive slack totals).
    let psum: Vec<f64> = std::iter::once(0.0)
        .chain(p.iter().scan(0.0, |acc, &(z, _)| {
            *acc += z;
            Some(*acc)
        }))
        .collect();
    let qsum: Vec<f64> = std::iter::once(0.0)
        .chain(q.iter().scan(0.0, |acc, &(z, _)| {
            *acc += z;
            Some(*acc)
        }))
        .collect();

    let ranks = p.len().min(q.len());

    // Matched-rank margin-setter pairs. Rank j leaves the j-1 inner samples
    // of each class past the margin, so the violator counts already balance.
    for j in 1..=ranks {
        let (zp, np) = p[j - 1];
        let (zq, nq) = q[j - 1];
        let gap = zp - zq;
        if gap <= 0.0 {
            // Not a valid setter pair in this orientation (or zero gap).
            continue;
        }
        let w = 2.0 / gap;
        let b = 1.0 - w * zp;
        let v = (j - 1) as f64;
        let slack = w * (v * zp - psum[j - 1] + qsum[j - 1] - v * zq);
        let objective = 0.5 * w * w + c * slack;
        if objective < best.objective {
            *best = Candidate {
                w: sign * w,
                b,
                objective,
                setters: Some((np, nq)),
            };
        }
    }

    // Stationary candidates with v strict violators per class and no sample
    // at unit margin: w = C (P_v - Q_v), valid when some threshold pair
    // (u, u - 2/w) separates rank v from rank v+1 in both classes.
    for v in 1..=ranks {
        let w = c * (psum[v] - qsum[v]);
        if w <= 0.0 {
            continue;
        }
        let gap_needed = 2.0 / w;
        let gap_lo = p[v - 1].0 - q[v - 1].0;
        let gap_hi = if v < p.len() { p[v].0 } else { f64::INFINITY }
            - if v < q.len() {
                q[v].0
            } else {
                f64::NEG_INFINITY
            };
        if gap_needed < gap_lo || gap_needed > gap_hi {
            continue;
        }
        let objective = 2.0 * c * v as f64 - 0.5 * w * w;
        if objective < best.objective {
            // Any admissible threshold gives the same objective; center it.
            let u_lo = p[v - 1].0.max(if v < q.len() {
                q[v].0 + gap_needed
            } else {
                f64::NEG_INFINITY
            });
            let u_hi =
                (if v < p.len() { p[v].0 } else { f64::INFINITY }).min(q[v - 1].0 + gap_needed);
            let u = 0.5 * (u_lo + u_hi);
            let b = 1.0 - w * u;
            *best = Candidate {
                w: sign * w,
                b,
                objective,
                setters: None,
            };
        }
    }
}

/// Same contract as [`solve_1d`], computed by the generic SMO dual solver on
/// the 1-d linear kernel. Reference implementation for differential testing.
pub fn solve_1d_oracle(pd: &ProjectedData, c: f64) -> Result<OneDSolution> {
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::InvalidInput(format!("C must be positive, got {c}")));
    }
    let n = pd.z.len();
    if !pd.labels.iter().any(|&y| y > 0.0) || !pd.labels.iter().any(|&y| y < 0.0) {
        return Err(Error::InvalidInput("both classes must be present".into()));
    }
    let mut kmat = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            kmat[i * n + j] = pd.z[i] * pd.z[j];
        }
    }
    let settings = SmoSettings {
        kkt_tol: 1e-9 * (1.0 + c),
        max_iter: 50_000_000,
    };
    let out = smo_solve(&kmat, &pd.labels, c, &settings)?;
    let w: f64 = (0..n).map(|i| out.alpha[i] * pd.labels[i] * pd.z[i]).sum();
    let b = out.intercept;
    let xi: Vec<f64> =
        pd.z.iter()
            .zip(&pd.labels)
            .map(|(&z, &y)| (1.0 - y * (w * z + b)).max(0.0))
            .collect();
    let objective = 0.5 * w * w + c * xi.iter().sum::<f64>();
    Ok(OneDSolution {
        w,
        b,
        xi,
        objective,
        margin_setters: None,
    })
}

/// Hard-margin rescale of a fixed direction: optimal `(A, w0)` for
/// `min A^2` s.t. `y_n (A z'_n + w0) >= 1` over unnormalized projections.
#[derive(Debug, Clone, PartialEq)]
pub struct LoSolution {
    pub a_scale: f64,
    pub intercept: f64,
    /// Post-rescale geometric margin `1 / (|A| ||w||)`.
    pub post_margin: f64,
}

/// Outcome of the two-parameter rescale: infeasible when the classes overlap
/// along the projection axis.
#[derive(Debug, Clone, PartialEq)]
pub enum LoOutcome {
    Feasible(LoSolution),
    Infeasible,
}

impl LoOutcome {
    pub fn feasible(&self) -> Option<&LoSolution> {
        match self {
            LoOutcome::Feasible(sol) => Some(sol),
            LoOutcome::Infeasible => None,
        }
    }
}

/// Closed-form solution of the two-parameter hard-margin problem. `w_norm`
/// is the norm of the fixed direction, used only for the reported margin.
pub fn solve_lo(z_prime: &[f64], labels: &[f64], w_norm: f64) -> LoOutcome {
    let mut pos_min = f64::INFINITY;
    let mut pos_max = f64::NEG_INFINITY;
    let mut neg_min = f64::INFINITY;
    let mut neg_max = f64::NEG_INFINITY;
    for (&z, &y) in z_prime.iter().zip(labels) {
        if y > 0.0 {
            pos_min = pos_min.min(z);
            pos_max = pos_max.max(z);
        } else {
            neg_min = neg_min.min(z);
            neg_max = neg_max.max(z);
        }
    }
    if !pos_min.is_finite() || !neg_min.is_finite() {
        return LoOutcome::Infeasible;
    }
    let (a, anchor) = if pos_min > neg_max {
        (2.0 / (pos_min - neg_max), pos_min)
    } else if pos_max < neg_min {
        (2.0 / (pos_max - neg_min), pos_max)
    } else {
        return LoOutcome::Infeasible;
    };
    let intercept = 1.0 - a * anchor;
    LoOutcome::Feasible(LoSolution {
        a_scale: a,
        intercept,
        post_margin: 1.0 / (a.abs() * w_norm),
    })
}
