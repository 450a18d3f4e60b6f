//! Per-step elimination criteria and the backward-elimination loop.
//!
//! Every criterion scores each retained feature as a candidate for removal
//! through a transient [`PairStats`] overlay, commits the winner, and
//! (optionally, `-frsub`) retrains the SVM from scratch on the reduced
//! feature set. Methods that do not retrain keep the initial multipliers
//! fixed for the whole run; the QP and LO families instead install a scalar
//! rescale `(a, b)` of the boundary each step, which propagates into the
//! separability flag, the recorded objective, and all test-error
//! measurements.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dataset::{Dataset, TrialSplit};
use crate::kernel::{radius_sq, PairQuery, PairStats};
use crate::oned::{solve_1d, solve_lo, OneDSolution, ProjectedData};
use crate::svm::{self, kernel_sum, weight_norm_sq, SmoSettings, SvmModel};
use crate::{Error, Result, RISK_BOUND_ETA, SEPARABILITY_TOL};

/// Elimination criterion evaluated at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CriterionKind {
    BasicMfe,
    MfeSlack,
    MfeHybrid,
    MfeLoEmb,
    MfeQpEmb,
    BmfeQpEmb,
    BmeQpEmb,
    BmfeSlack,
    Rfe,
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 9] = [
        CriterionKind::BasicMfe,
        CriterionKind::MfeSlack,
        CriterionKind::MfeHybrid,
        CriterionKind::MfeLoEmb,
        CriterionKind::MfeQpEmb,
        CriterionKind::BmfeQpEmb,
        CriterionKind::BmeQpEmb,
        CriterionKind::BmfeSlack,
        CriterionKind::Rfe,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CriterionKind::BasicMfe => "basic-mfe",
            CriterionKind::MfeSlack => "mfe-slack",
            CriterionKind::MfeHybrid => "mfe-hybrid",
            CriterionKind::MfeLoEmb => "mfe-lo-emb",
            CriterionKind::MfeQpEmb => "mfe-qp-emb",
            CriterionKind::BmfeQpEmb => "bmfe-qp-emb",
            CriterionKind::BmeQpEmb => "bme-qp-emb",
            CriterionKind::BmfeSlack => "bmfe-slack",
            CriterionKind::Rfe => "rfe",
        }
    }
}

/// A criterion plus the choice of full retraining after each removal.
/// `rfe` always retrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Method {
    pub criterion: CriterionKind,
    pub frsub: bool,
}

impl Method {
    pub fn new(criterion: CriterionKind, frsub: bool) -> Self {
        let frsub = frsub || criterion == CriterionKind::Rfe;
        Self { criterion, frsub }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let (base, frsub) = match s.strip_suffix("-frsub") {
            Some(base) => (base, true),
            None => (s, false),
        };
        let criterion = CriterionKind::ALL
            .into_iter()
            .find(|k| k.name() == base)
            .ok_or_else(|| Error::InvalidInput(format!("unknown method `{s}`")))?;
        Ok(Self::new(criterion, frsub))
    }

    pub fn name(&self) -> String {
        if self.frsub {
            format!("{}-frsub", self.criterion.name())
        } else {
            self.criterion.name().to_string()
        }
    }
}

/// The decision boundary carried across elimination steps: a base model plus
/// an optional scalar rescale `(a, b)` overriding it as `a * ksum + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryState {
    pub model: SvmModel,
    pub rescale: Option<(f64, f64)>,
}

impl BoundaryState {
    pub fn new(model: SvmModel) -> Self {
        Self {
            model,
            rescale: None,
        }
    }

    /// Effective `(a, b)` of the boundary.
    pub fn scale(&self) -> (f64, f64) {
        self.rescale.unwrap_or((1.0, self.model.intercept))
    }

    /// Boundary value `a * ksum + b` at sample `n`.
    pub fn decision_value(&self, pq: &impl PairQuery, n: usize) -> f64 {
        let (a, b) = self.scale();
        a * kernel_sum(&self.model, pq, n) + b
    }
}

/// Outcome of one elimination step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDecision {
    pub eliminated: usize,
    pub criterion_value: f64,
    /// Winning anchor sample for the slack-scan family.
    pub anchor: Option<usize>,
    /// Boundary rescale installed by the winner (QP and LO families).
    pub rescale: Option<(f64, f64)>,
    /// Per-candidate criterion values, kept only in diagnostics mode.
    pub per_candidate: Option<BTreeMap<usize, f64>>,
}

/// Risk-bound pieces for one candidate, with `r^2 ||w||^2` substituted for
/// the capacity term of the expected-risk bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerms {
    pub r_sq: f64,
    pub w_norm_sq_eff: f64,
    pub r_emp: f64,
    pub eta: f64,
    pub vcc: f64,
    pub bound_value: f64,
}

/// Evaluates the expected-risk bound at `h = r_sq * w_norm_sq_eff`. The
/// capacity term `h (ln(2N/h) + 1)` is clamped below at zero, keeping the
/// confidence term real on both ends of the substitution's validity.
pub fn risk_bound_terms(
    r_sq: f64,
    w_norm_sq_eff: f64,
    r_emp: f64,
    n: usize,
    eta: f64,
) -> BoundTerms {
    let nf = n as f64;
    let h = r_sq * w_norm_sq_eff;
    let capacity = if h > 0.0 {
        (h * ((2.0 * nf / h).ln() + 1.0)).max(0.0)
    } else {
        0.0
    };
    let vcc = ((capacity - (eta / 4.0).ln()) / nf).sqrt();
    BoundTerms {
        r_sq,
        w_norm_sq_eff,
        r_emp,
        eta,
        vcc,
        bound_value: r_emp + vcc,
    }
}

/// Everything a step criterion needs to score candidates.
pub struct StepContext<'a> {
    pub ds: &'a Dataset,
    pub train: &'a [usize],
    pub boundary: &'a BoundaryState,
    pub ps: &'a PairStats,
    pub diagnostics: bool,
}

impl<'a> StepContext<'a> {
    pub fn new(
        ds: &'a Dataset,
        train: &'a [usize],
        boundary: &'a BoundaryState,
        ps: &'a PairStats,
    ) -> Self {
        Self {
            ds,
            train,
            boundary,
            ps,
            diagnostics: false,
        }
    }

    fn c(&self) -> f64 {
        self.boundary.model.c_param
    }
}

/// Kernel sums and squared norm of the fixed-multiplier boundary under one
/// candidate removal.
struct CandidateEval {
    ksum: Vec<f64>,
    w_norm_sq: f64,
}

fn eval_candidate(model: &SvmModel, pq: &impl PairQuery, train: &[usize]) -> CandidateEval {
    let ksum = train.iter().map(|&n| kernel_sum(model, pq, n)).collect();
    CandidateEval {
        ksum,
        w_norm_sq: weight_norm_sq(model, pq),
    }
}

/// Functional margins `y_n (a ksum_n + b)` for a candidate evaluation.
fn reduced_margins(ctx: &StepContext, eval: &CandidateEval) -> Vec<f64> {
    let (a, b) = ctx.boundary.scale();
    ctx.train
        .iter()
        .zip(&eval.ksum)
        .map(|(&n, &ks)| ctx.ds.label(n) * (a * ks + b))
        .collect()
}

/// Scores every retained feature in parallel, dropping inadmissible ones.
/// The result stays in ascending feature order so that the sequential
/// reductions below resolve ties to the smallest feature index.
fn score_candidates<S: Send>(
    ctx: &StepContext,
    score: impl Fn(usize) -> Result<Option<S>> + Sync,
) -> Result<Vec<(usize, S)>> {
    let retained = ctx.ps.retained_features();
    if retained.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 retained features, have {}",
            retained.len()
        )));
    }
    let scored: Vec<(usize, Option<S>)> = retained
        .par_iter()
        .map(|&m| Ok((m, score(m)?)))
        .collect::<Result<_>>()?;
    Ok(scored
        .into_iter()
        .filter_map(|(m, s)| s.map(|s| (m, s)))
        .collect())
}

type MinScore = (f64, Option<usize>, Option<(f64, f64)>);

fn decide_min(
    scored: Vec<(usize, MinScore)>,
    diagnostics: bool,
    empty: Error,
) -> Result<StepDecision> {
    let per_candidate = diagnostics.then(|| {
        scored
            .iter()
            .map(|&(m, (v, _, _))| (m, v))
            .collect::<BTreeMap<_, _>>()
    });
    let mut best: Option<(usize, MinScore)> = None;
    for (m, s) in scored {
        if best.as_ref().is_none_or(|(_, b)| s.0 < b.0) {
            best = Some((m, s));
        }
    }
    let (m, (value, anchor, rescale)) = best.ok_or(empty)?;
    Ok(StepDecision {
        eliminated: m,
        criterion_value: value,
        anchor,
        rescale,
        per_candidate,
    })
}

/// Removes the feature whose removal keeps the training data separable with
/// the largest margin. Errors with [`Error::SeparabilityExhausted`] when no
/// candidate stays separable.
pub fn step_basic_mfe(ctx: &StepContext) -> Result<StepDecision> {
    let (a, _) = ctx.boundary.scale();
    let scored = score_candidates(ctx, |m| {
        let view = ctx.ps.candidate(m)?;
        let eval = eval_candidate(&ctx.boundary.model, &view, ctx.train);
        let g = reduced_margins(ctx, &eval);
        let min_g = g.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_g <= SEPARABILITY_TOL {
            return Ok(None);
        }
        Ok(Some(min_g / (a.abs() * eval.w_norm_sq.sqrt())))
    })?;
    let per_candidate = ctx
        .diagnostics
        .then(|| scored.iter().copied().collect::<BTreeMap<_, _>>());
    let mut best: Option<(usize, f64)> = None;
    for (m, margin) in scored {
        if best.is_none_or(|(_, b)| margin > b) {
            best = Some((m, margin));
        }
    }
    let (m, value) = best.ok_or(Error::SeparabilityExhausted)?;
    Ok(StepDecision {
        eliminated: m,
        criterion_value: value,
        anchor: None,
        rescale: None,
        per_candidate,
    })
}

/// Best anchored objective for one candidate: every positive-margin sample
/// is tried as the margin setter, the boundary is rescaled to put it at unit
/// margin, and the soft-margin objective is measured there.
fn best_anchor_objective(
    ctx: &StepContext,
    eval: &CandidateEval,
    g: &[f64],
) -> Option<(f64, usize)> {
    let (a, _) = ctx.boundary.scale();
    let w_eff_sq = a * a * eval.w_norm_sq;
    let c = ctx.c();
    let mut best: Option<(f64, usize)> = None;
    for (i, &ga) in g.iter().enumerate() {
        if ga <= SEPARABILITY_TOL {
            continue;
        }
        let rho = 1.0 / ga;
        let slack: f64 = g.iter().map(|&gn| (1.0 - rho * gn).max(0.0)).sum();
        let objective = 0.5 * w_eff_sq * rho * rho + c * slack;
        if best.is_none_or(|(b, _)| objective < b) {
            best = Some((objective, ctx.train[i]));
        }
    }
    best
}

/// Joint scan over (candidate, anchor) minimizing the anchored soft-margin
/// objective. Candidates with no positive-margin sample are skipped.
pub fn step_mfe_slack(ctx: &StepContext) -> Result<StepDecision> {
    let scored = score_candidates(ctx, |m| {
        let view = ctx.ps.candidate(m)?;
        let eval = eval_candidate(&ctx.boundary.model, &view, ctx.train);
        let g = reduced_margins(ctx, &eval);
        Ok(best_anchor_objective(ctx, &eval, &g).map(|(obj, anchor)| (obj, Some(anchor), None)))
    })?;
    decide_min(scored, ctx.diagnostics, Error::NoAdmissibleCandidate)
}

/// Anchored scan with the squared candidate radius as a multiplicative factor.
pub fn step_bmfe_slack(ctx: &StepContext) -> Result<StepDecision> {
    let cfg = ctx.boundary.model.kernel;
    let scored = score_candidates(ctx, |m| {
        let view = ctx.ps.candidate(m)?;
        let eval = eval_candidate(&ctx.boundary.model, &view, ctx.train);
        let g = reduced_margins(ctx, &eval);
        Ok(best_anchor_objective(ctx, &eval, &g).map(|(obj, anchor)| {
            let r_sq = radius_sq(&cfg, &view, ctx.train);
            (r_sq * obj, Some(anchor), None)
        }))
    })?;
    decide_min(scored, ctx.diagnostics, Error::NoAdmissibleCandidate)
}

/// Margin-preserving scan while the data stays separable, anchored scan once
/// it does not.
pub fn step_mfe_hybrid(ctx: &StepContext) -> Result<StepDecision> {
    match step_basic_mfe(ctx) {
        Err(Error::SeparabilityExhausted) => step_mfe_slack(ctx),
        other => other,
    }
}

/// Removes the feature with the largest post-rescale hard margin, installing
/// the winning `(A, w0)`. Errors with [`Error::LoInapplicable`] when no
/// candidate's projections separate.
pub fn step_mfe_lo_emb(ctx: &StepContext) -> Result<StepDecision> {
    let labels: Vec<f64> = ctx.train.iter().map(|&n| ctx.ds.label(n)).collect();
    let scored = score_candidates(ctx, |m| {
        let view = ctx.ps.candidate(m)?;
        let eval = eval_candidate(&ctx.boundary.model, &view, ctx.train);
        let norm = eval.w_norm_sq.sqrt();
        if norm <= 0.0 {
            return Ok(None);
        }
        Ok(solve_lo(&eval.ksum, &labels, norm)
            .feasible()
            .map(|sol| (sol.post_margin, sol.a_scale, sol.intercept)))
    })?;
    let per_candidate = ctx.diagnostics.then(|| {
        scored
            .iter()
            .map(|&(m, s)| (m, s.0))
            .collect::<BTreeMap<_, _>>()
    });
    let mut best: Option<(usize, (f64, f64, f64))> = None;
    for (m, s) in scored {
        if best.as_ref().is_none_or(|(_, b)| s.0 > b.0) {
            best = Some((m, s));
        }
    }
    let (m, (margin, a, w0)) = best.ok_or(Error::LoInapplicable)?;
    Ok(StepDecision {
        eliminated: m,
        criterion_value: margin,
        anchor: None,
        rescale: Some((a, w0)),
        per_candidate,
    })
}

/// Shared scorer for the QP family: projects the training data onto the
/// fixed direction in the reduced space and retrains the scalar boundary.
fn qp_scores(
    ctx: &StepContext,
    value: impl Fn(&OneDSolution, &CandidateEval, usize) -> f64 + Sync,
) -> Result<Vec<(usize, MinScore)>> {
    let labels: Vec<f64> = ctx.train.iter().map(|&n| ctx.ds.label(n)).collect();
    let c = ctx.c();
    score_candidates(ctx, |m| {
        let view = ctx.ps.candidate(m)?;
        let eval = eval_candidate(&ctx.boundary.model, &view, ctx.train);
        if eval.w_norm_sq < 1e-24 {
            // Projection direction vanished; the candidate is unusable.
            return Ok(None);
        }
        let norm = eval.w_norm_sq.sqrt();
        let z: Vec<f64> = eval.ksum.iter().map(|ks| ks / norm).collect();
        let pd = ProjectedData::new(z, labels.clone(), norm)?;
        let sol = solve_1d(&pd, c)?;
        let rescale = (sol.w / norm, sol.b);
        Ok(Some((value(&sol, &eval, m), None, Some(rescale))))
    })
}

/// Removes the feature whose 1-d retraining reaches the smallest soft-margin
/// objective, installing the winner's rescale.
pub fn step_mfe_qp_emb(ctx: &StepContext) -> Result<StepDecision> {
    let scored = qp_scores(ctx, |sol, _, _| sol.objective)?;
    decide_min(scored, ctx.diagnostics, Error::NoAdmissibleCandidate)
}

/// QP objective weighted by the squared candidate radius.
pub fn step_bmfe_qp_emb(ctx: &StepContext) -> Result<StepDecision> {
    let cfg = ctx.boundary.model.kernel;
    let ps = ctx.ps;
    let train = ctx.train;
    let scored = qp_scores(ctx, |sol, _, m| {
        let view = ps
            .candidate(m)
            .expect("candidate came from the retained set");
        radius_sq(&cfg, &view, train) * sol.objective
    })?;
    decide_min(scored, ctx.diagnostics, Error::NoAdmissibleCandidate)
}

/// Direct expected-risk-bound minimization with QP-supplied ingredients: the
/// empirical error and squared norm come from the 1-d retrained boundary,
/// the radius from the candidate view.
pub fn step_bme_qp_emb(ctx: &StepContext) -> Result<StepDecision> {
    let cfg = ctx.boundary.model.kernel;
    let ps = ctx.ps;
    let train = ctx.train;
    let labels: Vec<f64> = train.iter().map(|&n| ctx.ds.label(n)).collect();
    let scored = qp_scores(ctx, |sol, eval, m| {
        let view = ps
            .candidate(m)
            .expect("candidate came from the retained set");
        let r_sq = radius_sq(&cfg, &view, train);
        let norm = eval.w_norm_sq.sqrt();
        let errors = eval
            .ksum
            .iter()
            .zip(&labels)
            .filter(|&(&ks, &y)| y * (sol.w * (ks / norm) + sol.b) <= 0.0)
            .count();
        let r_emp = errors as f64 / train.len() as f64;
        risk_bound_terms(r_sq, sol.w * sol.w, r_emp, train.len(), RISK_BOUND_ETA).bound_value
    })?;
    decide_min(scored, ctx.diagnostics, Error::NoAdmissibleCandidate)
}

/// Smallest fixed-multiplier change of the kernel-form squared norm.
pub fn step_rfe(ctx: &StepContext) -> Result<StepDecision> {
    let base = weight_norm_sq(&ctx.boundary.model, ctx.ps);
    let scored = score_candidates(ctx, |m| {
        let view = ctx.ps.candidate(m)?;
        let reduced = weight_norm_sq(&ctx.boundary.model, &view);
        Ok(Some((0.5 * (base - reduced).abs(), None, None)))
    })?;
    decide_min(scored, ctx.diagnostics, Error::NoAdmissibleCandidate)
}

/// Dispatches one step of `kind`.
pub fn step_decision(kind: CriterionKind, ctx: &StepContext) -> Result<StepDecision> {
    match kind {
        CriterionKind::BasicMfe => step_basic_mfe(ctx),
        CriterionKind::MfeSlack => step_mfe_slack(ctx),
        CriterionKind::MfeHybrid => step_mfe_hybrid(ctx),
        CriterionKind::MfeLoEmb => step_mfe_lo_emb(ctx),
        CriterionKind::MfeQpEmb => step_mfe_qp_emb(ctx),
        CriterionKind::BmfeQpEmb => step_bmfe_qp_emb(ctx),
        CriterionKind::BmeQpEmb => step_bme_qp_emb(ctx),
        CriterionKind::BmfeSlack => step_bmfe_slack(ctx),
        CriterionKind::Rfe => step_rfe(ctx),
    }
}

/// Commits `decision` and retrains the SVM from scratch on the reduced
/// training data, clearing any rescale. Hyperparameters are reused from the
/// pre-elimination selection.
pub fn apply_frsub(
    ds: &Dataset,
    train_idx: &[usize],
    state: &BoundaryState,
    decision: &StepDecision,
    ps: &mut PairStats,
    settings: &SmoSettings,
) -> Result<BoundaryState> {
    ps.remove(decision.eliminated)?;
    let model = svm::train(
        ds,
        train_idx,
        &state.model.kernel,
        ps,
        state.model.c_param,
        settings,
    )?;
    Ok(BoundaryState::new(model))
}

/// Lightweight boundary snapshot recorded at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySnapshot {
    pub rescale: Option<(f64, f64)>,
    /// Effective squared norm `a^2 ||w||^2` on the reduced feature set.
    pub w_norm_sq: f64,
    /// Effective intercept.
    pub intercept: f64,
    pub sv_count: usize,
}

/// One elimination step as recorded in a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub eliminated: usize,
    pub retained_count: usize,
    pub separable: bool,
    pub train_objective: f64,
    pub criterion_value: f64,
    pub test_error: f64,
    pub anchor: Option<usize>,
    pub boundary: BoundarySnapshot,
}

/// Ordered record of one method's elimination run on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationTrace {
    pub trial_id: usize,
    pub method: Method,
    pub steps: Vec<StepRecord>,
    /// Reason the run stopped before `stop_at`, if it did.
    pub termination: Option<String>,
}

impl EliminationTrace {
    /// CSV serialization, one row per step. The feature column is 1-based to
    /// match the LIBSVM input convention.
    pub fn to_csv_string(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from(
            "trial_id,method,step,eliminated_feature,retained_count,separable,train_objective,criterion_value,test_error\n",
        );
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.trial_id,
                self.method.name(),
                s.step,
                s.eliminated + 1,
                s.retained_count,
                s.separable,
                s.train_objective,
                s.criterion_value,
                s.test_error
            );
        }
        if let Some(reason) = &self.termination {
            let _ = writeln!(out, "# terminated early: {reason}");
        }
        out
    }
}

/// Runs backward elimination from the full retained set down to `stop_at`
/// features, measuring test error each step on the propagated boundary.
/// Criterion-specific inapplicability ends the trace early with a recorded
/// reason instead of failing.
#[allow(clippy::too_many_arguments)]
pub fn run_elimination(
    ds: &Dataset,
    trial: &TrialSplit,
    method: Method,
    initial: SvmModel,
    mut ps: PairStats,
    stop_at: usize,
    diagnostics: bool,
    settings: &SmoSettings,
) -> Result<EliminationTrace> {
    let stop_at = stop_at.max(1);
    let mut state = BoundaryState::new(initial);
    let mut steps = Vec::new();
    let mut termination = None;
    let mut step = 0usize;

    while ps.n_retained() > stop_at {
        step += 1;
        let decision = {
            let ctx = StepContext {
                ds,
                train: &trial.train,
                boundary: &state,
                ps: &ps,
                diagnostics,
            };
            match step_decision(method.criterion, &ctx) {
                Ok(d) => d,
                Err(e) if e.halts_trace() => {
                    termination = Some(format!("{e} (retained {})", ps.n_retained()));
                    break;
                }
                Err(e) => {
                    return Err(Error::StepFailed {
                        step,
                        retained: ps.n_retained(),
                        source: Box::new(e),
                    })
                }
            }
        };

        if method.frsub {
            state = apply_frsub(ds, &trial.train, &state, &decision, &mut ps, settings).map_err(
                |e| Error::StepFailed {
                    step,
                    retained: ps.n_retained(),
                    source: Box::new(e),
                },
            )?;
        } else {
            ps.remove(decision.eliminated)?;
            state.rescale = decision.rescale;
        }

        let (a, b) = state.scale();
        let w_norm_sq = weight_norm_sq(&state.model, &ps);
        let mut min_g = f64::INFINITY;
        let mut slack = 0.0;
        for &n in &trial.train {
            let g = ds.label(n) * (a * kernel_sum(&state.model, &ps, n) + b);
            min_g = min_g.min(g);
            slack += (1.0 - g).max(0.0);
        }
        let test_error = svm::test_error(&state.model, state.rescale, ds, &ps, &trial.test)
            .map_err(|e| Error::StepFailed {
                step,
                retained: ps.n_retained(),
                source: Box::new(e),
            })?;

        steps.push(StepRecord {
            step,
            eliminated: decision.eliminated,
            retained_count: ps.n_retained(),
            separable: min_g > SEPARABILITY_TOL,
            train_objective: 0.5 * a * a * w_norm_sq + state.model.c_param * slack,
            criterion_value: decision.criterion_value,
            test_error,
            anchor: decision.anchor,
            boundary: BoundarySnapshot {
                rescale: state.rescale,
                w_norm_sq: a * a * w_norm_sq,
                intercept: b,
                sv_count: state.model.sv_indices.len(),
            },
        });
    }

    Ok(EliminationTrace {
        trial_id: trial.trial_id,
        method,
        steps,
        termination,
    })
}
