//! Trial orchestration: seeded splits, hyperparameter selection, elimination
//! runs, and aggregated test-error curves with CSV/SVG output.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;

use crate::dataset::{make_trial, Dataset, TrialSplit};
use crate::elim::{run_elimination, EliminationTrace, Method};
use crate::kernel::{KernelConfig, KernelKind, PairStats};
use crate::svm::{cv_select, margins, to_snapshot_string, train, SmoSettings, SvmModel};
use crate::{Error, Result};

/// Resolved configuration of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data_path: PathBuf,
    /// Lower bound on the feature count for sparse files with all-zero
    /// trailing features.
    pub n_features_hint: Option<usize>,
    pub kernel: KernelKind,
    pub methods: Vec<Method>,
    pub n_trials: usize,
    pub base_seed: u64,
    pub stop_at: usize,
    /// Discard trials whose initial model does not separate its training half.
    pub keep_only_separable: bool,
    /// Min-max scale features to [0,1], fit on each trial's training half.
    pub scale: bool,
    pub diagnostics: bool,
    pub out_dir: PathBuf,
    /// Soft-margin C grid searched by cross-validation.
    pub c_grid: Vec<f64>,
    /// Gaussian gamma grid, expressed as multiples of 1/M.
    pub gamma_factors: Vec<f64>,
    pub smo: SmoSettings,
}

impl ExperimentConfig {
    pub fn new(
        data_path: PathBuf,
        kernel: KernelKind,
        methods: Vec<Method>,
        out_dir: PathBuf,
    ) -> Self {
        Self {
            data_path,
            n_features_hint: None,
            kernel,
            methods,
            n_trials: 1,
            base_seed: 0,
            stop_at: 1,
            keep_only_separable: true,
            scale: false,
            diagnostics: false,
            out_dir,
            c_grid: Self::default_c_grid(),
            gamma_factors: Self::default_gamma_factors(),
            smo: SmoSettings::default(),
        }
    }

    /// `C in {2^-5, 2^-3, ..., 2^15}`.
    pub fn default_c_grid() -> Vec<f64> {
        (-5..=15).step_by(2).map(|e| 2f64.powi(e)).collect()
    }

    /// Gamma multiples of 1/M: `{2^-15, 2^-11, 2^-7, 2^-3, 2^1}`.
    pub fn default_gamma_factors() -> Vec<f64> {
        vec![
            2f64.powi(-15),
            2f64.powi(-11),
            2f64.powi(-7),
            2f64.powi(-3),
            2.0,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidInput(
                "no elimination methods selected".into(),
            ));
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return Err(Error::InvalidInput("duplicate elimination method".into()));
        }
        if self.n_trials == 0 {
            return Err(Error::InvalidInput("need at least one trial".into()));
        }
        if self.stop_at == 0 {
            return Err(Error::InvalidInput("stop_at must be at least 1".into()));
        }
        if self.c_grid.is_empty() {
            return Err(Error::InvalidInput("empty C grid".into()));
        }
        if self.kernel == KernelKind::Gaussian && self.gamma_factors.is_empty() {
            return Err(Error::InvalidInput("empty gamma grid".into()));
        }
        Ok(())
    }

    /// Cross-validation grid for a dataset with `n_features` features.
    pub fn grid_for(&self, n_features: usize) -> Vec<(KernelConfig, f64)> {
        let m = n_features.max(1) as f64;
        let mut grid = Vec::new();
        match self.kernel {
            KernelKind::Linear => {
                for &c in &self.c_grid {
                    grid.push((KernelConfig::linear(), c));
                }
            }
            KernelKind::Polynomial => {
                let cfg = KernelConfig::polynomial(1.0 / m, 1.0, 3);
                for &c in &self.c_grid {
                    grid.push((cfg, c));
                }
            }
            KernelKind::Gaussian => {
                for &f in &self.gamma_factors {
                    let cfg = KernelConfig::gaussian(f / m);
                    for &c in &self.c_grid {
                        grid.push((cfg, c));
                    }
                }
            }
        }
        grid
    }
}

/// One kept trial: its split, selected hyperparameters, and initial model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub trial_id: usize,
    pub seed: u64,
    pub kernel: KernelConfig,
    pub c: f64,
    pub separable: bool,
    pub n_train: usize,
    pub n_test: usize,
    /// Snapshot of the shared initial model all methods start from.
    pub initial_model: String,
}

/// Mean test error per (method, retained feature count).
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub method: String,
    pub retained: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
}

impl CurveTable {
    /// Aggregates traces into per-(method, retained) means. Rows are grouped
    /// by method name and sorted by strictly decreasing retained count.
    pub fn from_traces(traces: &[EliminationTrace]) -> Self {
        let mut acc: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
        for trace in traces {
            let by_retained = acc.entry(trace.method.name()).or_default();
            for step in &trace.steps {
                by_retained
                    .entry(step.retained_count)
                    .or_default()
                    .push(step.test_error);
            }
        }
        let mut rows = Vec::new();
        for (method, by_retained) in acc {
            for (&retained, errors) in by_retained.iter().rev() {
                let n = errors.len() as f64;
                let mean = errors.iter().sum::<f64>() / n;
                let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
                rows.push(CurveRow {
                    method: method.clone(),
                    retained,
                    mean_error: mean,
                    std_error: var.sqrt(),
                    trials: errors.len(),
                });
            }
        }
        Self { rows }
    }

    pub fn to_csv_string(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("method,retained,mean_test_error,std_test_error,trials\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.method, r.retained, r.mean_error, r.std_error, r.trials
            );
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "expected 5 fields".into(),
                });
            }
            let bad = |msg: &str| Error::Parse {
                line: i + 1,
                msg: msg.into(),
            };
            rows.push(CurveRow {
                method: fields[0].to_string(),
                retained: fields[1].parse().map_err(|_| bad("bad retained count"))?,
                mean_error: fields[2].parse().map_err(|_| bad("bad mean"))?,
                std_error: fields[3].parse().map_err(|_| bad("bad std"))?,
                trials: fields[4].parse().map_err(|_| bad("bad trial count"))?,
            });
        }
        Ok(Self { rows })
    }

    /// Mean test error of `method` at exactly `retained` features.
    pub fn mean_at(&self, method: &str, retained: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.retained == retained)
            .map(|r| r.mean_error)
    }
}

/// Full result of an experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub curves: CurveTable,
    pub traces: Vec<EliminationTrace>,
    pub trials: Vec<TrialSummary>,
    pub n_samples: usize,
    pub n_features: usize,
    pub attempts: usize,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Loads the dataset and runs the experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let ds = Arc::new(Dataset::load_libsvm(&cfg.data_path, cfg.n_features_hint)?);
    run_experiment_on(cfg, ds)
}

/// Runs the experiment on an already-loaded dataset.
///
/// Per trial: split 50-50, 5-fold cross-validate the grid on the training
/// half, train the initial model on the full training half, and (by default)
/// keep only trials whose initial model separates it. Seeds advance until
/// `n_trials` trials are kept or `10 * n_trials` attempts are spent. Every
/// method then runs from the same initial model, and test errors aggregate
/// into one curve per method.
pub fn run_experiment_on(cfg: &ExperimentConfig, ds: Arc<Dataset>) -> Result<ExperimentOutput> {
    cfg.validate()?;

    struct TrialRun {
        split: TrialSplit,
        ds: Arc<Dataset>,
        ps: PairStats,
        initial: SvmModel,
        summary: TrialSummary,
    }

    let mut kept: Vec<TrialRun> = Vec::new();
    let cap = 10 * cfg.n_trials;
    let mut attempts = 0usize;
    while kept.len() < cfg.n_trials && attempts < cap {
        let seed = cfg.base_seed.wrapping_add(attempts as u64);
        attempts += 1;
        let split = make_trial(&ds, kept.len(), seed)?;
        let (pos, neg) = ds.class_counts(&split.train);
        if pos == 0 || neg == 0 {
            continue;
        }
        let trial_ds = if cfg.scale {
            Arc::new(ds.min_max_scaled(&split.train))
        } else {
            ds.clone()
        };
        let ps = PairStats::new(trial_ds.clone());
        let grid = cfg.grid_for(trial_ds.n_features());
        let (kcfg, c) = cv_select(
            &trial_ds,
            &ps,
            &split.train,
            &grid,
            5,
            splitmix64(seed),
            &cfg.smo,
        )?;
        let initial = train(&trial_ds, &split.train, &kcfg, &ps, c, &cfg.smo)?;
        let mv = margins(&initial, &trial_ds, &ps, &split.train);
        if cfg.keep_only_separable && !mv.separable {
            continue;
        }
        let summary = TrialSummary {
            trial_id: split.trial_id,
            seed,
            kernel: kcfg,
            c,
            separable: mv.separable,
            n_train: split.train.len(),
            n_test: split.test.len(),
            initial_model: to_snapshot_string(&initial),
        };
        kept.push(TrialRun {
            split,
            ds: trial_ds,
            ps,
            initial,
            summary,
        });
    }
    if kept.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no usable trial after {attempts} attempts (separability filter: {})",
            cfg.keep_only_separable
        )));
    }

    let jobs: Vec<(usize, Method)> = kept
        .iter()
        .enumerate()
        .flat_map(|(t, _)| cfg.methods.iter().map(move |&m| (t, m)))
        .collect();
    let traces: Vec<EliminationTrace> = jobs
        .par_iter()
        .map(|&(t, method)| {
            let run = &kept[t];
            run_elimination(
                &run.ds,
                &run.split,
                method,
                run.initial.clone(),
                run.ps.clone(),
                cfg.stop_at,
                cfg.diagnostics,
                &cfg.smo,
            )
        })
        .collect::<Result<_>>()?;

    Ok(ExperimentOutput {
        curves: CurveTable::from_traces(&traces),
        trials: kept.into_iter().map(|t| t.summary).collect(),
        traces,
        n_samples: ds.n_samples(),
        n_features: ds.n_features(),
        attempts,
    })
}

/// Resolved-config text embedded in every output directory.
pub fn config_text(cfg: &ExperimentConfig, out: &ExperimentOutput) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = writeln!(s, "mfelim={}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "data={}", cfg.data_path.display());
    let _ = writeln!(s, "kernel={}", cfg.kernel.name());
    let method_names: Vec<String> = cfg.methods.iter().map(Method::name).collect();
    let _ = writeln!(s, "methods={}", method_names.join(","));
    let _ = writeln!(s, "trials={}", cfg.n_trials);
    let _ = writeln!(s, "seed={}", cfg.base_seed);
    let _ = writeln!(s, "stop_at={}", cfg.stop_at);
    let _ = writeln!(s, "keep_only_separable={}", cfg.keep_only_separable);
    let _ = writeln!(s, "scale={}", cfg.scale);
    let _ = writeln!(s, "diagnostics={}", cfg.diagnostics);
    let grid: Vec<String> = cfg.c_grid.iter().map(f64::to_string).collect();
    let _ = writeln!(s, "c_grid={}", grid.join(","));
    let grid: Vec<String> = cfg.gamma_factors.iter().map(f64::to_string).collect();
    let _ = writeln!(s, "gamma_factors={}", grid.join(","));
    let _ = writeln!(s, "kkt_tol={}", cfg.smo.kkt_tol);
    let _ = writeln!(s, "dataset_samples={}", out.n_samples);
    let _ = writeln!(s, "dataset_features={}", out.n_features);
    let _ = writeln!(s, "attempted_splits={}", out.attempts);
    for t in &out.trials {
        let _ = writeln!(
            s,
            "trial={} seed={} c={} gamma={} separable={} train={} test={}",
            t.trial_id, t.seed, t.c, t.kernel.gamma, t.separable, t.n_train, t.n_test
        );
    }
    s
}

const SVG_PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Static plot of the curve table: one polyline per method, mean test error
/// against the number of retained features (shrinking from right to left).
pub fn curves_svg(table: &CurveTable) -> String {
    use std::fmt::Write as _;
    let (w, h) = (840.0, 520.0);
    let (l, r, t, b) = (70.0, 20.0, 20.0, 50.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);

    if table.rows.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="14">no data</text>"#,
            w / 2.0 - 30.0,
            h / 2.0
        );
        let _ = writeln!(s, "</svg>");
        return s;
    }

    let x_min = table.rows.iter().map(|r| r.retained).min().unwrap() as f64;
    let x_max = table.rows.iter().map(|r| r.retained).max().unwrap() as f64;
    let y_max = table
        .rows
        .iter()
        .map(|r| r.mean_error)
        .fold(0.05f64, f64::max)
        * 1.08;
    let x_span = (x_max - x_min).max(1.0);
    let px = |retained: f64| l + (retained - x_min) / x_span * (w - l - r);
    let py = |err: f64| h - b - err / y_max * (h - t - b);

    // Axes and ticks.
    let _ = writeln!(
        s,
        r#"<line x1="{l}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        h - b,
        w - r,
        h - b
    );
    let _ = writeln!(
        s,
        r#"<line x1="{l}" y1="{t}" x2="{l}" y2="{}" stroke="black"/>"#,
        h - b
    );
    for i in 0..=5 {
        let frac = i as f64 / 5.0;
        let xv = x_min + frac * x_span;
        let yv = frac * y_max;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{:.0}</text>"#,
            px(xv),
            h - b + 16.0,
            xv
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{}" x2="{:.1}" y2="{}" stroke="#ddd"/>"##,
            px(xv),
            t,
            px(xv),
            h - b
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{:.3}</text>"#,
            l - 6.0,
            py(yv) + 4.0,
            yv
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">retained features</text>"#,
        (l + w - r) / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" font-size="12" transform="rotate(-90 16 {:.1})" text-anchor="middle">mean test error</text>"#,
        (t + h - b) / 2.0,
        (t + h - b) / 2.0
    );

    // One polyline per method, legend stacked top-right.
    let methods: Vec<&str> = {
        let mut seen = Vec::new();
        for row in &table.rows {
            if !seen.contains(&row.method.as_str()) {
                seen.push(row.method.as_str());
            }
        }
        seen
    };
    for (mi, method) in methods.iter().enumerate() {
        let color = SVG_PALETTE[mi % SVG_PALETTE.len()];
        let mut pts: Vec<(usize, f64)> = table
            .rows
            .iter()
            .filter(|row| row.method == *method)
            .map(|row| (row.retained, row.mean_error))
            .collect();
        pts.sort_by_key(|&(ret, _)| ret);
        let path: Vec<String> = pts
            .iter()
            .map(|&(ret, e)| format!("{:.2},{:.2}", px(ret as f64), py(e)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
            path.join(" ")
        );
        let ly = t + 16.0 + 16.0 * mi as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            w - r - 170.0,
            w - r - 140.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11">{method}</text>"#,
            w - r - 134.0,
            ly + 4.0
        );
    }
    let _ = writeln!(s, "</svg>");
    s
}

/// Writes `curves.csv`, one `trace_<trial>_<method>.csv` per trace,
/// `config.txt`, and `curves.svg` into the configured output directory.
pub fn emit_outputs(out: &ExperimentOutput, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut written = Vec::new();
    let mut write = |name: String, content: String| -> Result<()> {
        let path = cfg.out_dir.join(name);
        std::fs::write(&path, content)?;
        written.push(path);
        Ok(())
    };
    write("curves.csv".into(), out.curves.to_csv_string())?;
    for trace in &out.traces {
        write(
            format!("trace_{}_{}.csv", trace.trial_id, trace.method.name()),
            trace.to_csv_string(),
        )?;
    }
    write("config.txt".into(), config_text(cfg, out))?;
    write("curves.svg".into(), curves_svg(&out.curves))?;
    if cfg.diagnostics {
        for t in &out.trials {
            write(format!("model_{}.txt", t.trial_id), t.initial_model.clone())?;
        }
    }
    Ok(written)
}

/// Parses a flat `key=value` config file into pairs, skipping blank lines and
/// `#` comments.
pub fn parse_config_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: "expected key=value".into(),
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}
