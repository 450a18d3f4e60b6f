//! Kernels over the retained feature subset.
//!
//! `PairStats` keeps the pairwise inner products and squared distances of all
//! samples over the currently retained features. Removing a feature updates
//! both matrices incrementally instead of rescanning the data, and candidate
//! removals are served as zero-copy overlay views that subtract one feature's
//! contribution on read.

use std::sync::Arc;

use crate::dataset::Dataset;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Linear,
    Polynomial,
    Gaussian,
}

impl KernelKind {
    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Linear => "linear",
            KernelKind::Polynomial => "poly",
            KernelKind::Gaussian => "rbf",
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(KernelKind::Linear),
            "poly" | "polynomial" => Ok(KernelKind::Polynomial),
            "rbf" | "gaussian" => Ok(KernelKind::Gaussian),
            other => Err(Error::InvalidInput(format!("unknown kernel `{other}`"))),
        }
    }
}

/// Kernel family plus parameters. `gamma` is the RBF width or polynomial
/// scale, `coef0` and `degree` apply to the polynomial kernel only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub gamma: f64,
    pub coef0: f64,
    pub degree: u32,
}

impl KernelConfig {
    pub fn linear() -> Self {
        Self {
            kind: KernelKind::Linear,
            gamma: 1.0,
            coef0: 0.0,
            degree: 1,
        }
    }

    pub fn gaussian(gamma: f64) -> Self {
        Self {
            kind: KernelKind::Gaussian,
            gamma,
            coef0: 0.0,
            degree: 1,
        }
    }

    pub fn polynomial(gamma: f64, coef0: f64, degree: u32) -> Self {
        Self {
            kind: KernelKind::Polynomial,
            gamma,
            coef0,
            degree,
        }
    }

    /// Default parameters for a dataset with `n_features` initial features:
    /// gamma = 1/M, and degree-3 polynomial with coef0 = 1.
    pub fn default_for(kind: KernelKind, n_features: usize) -> Self {
        let gamma = 1.0 / n_features.max(1) as f64;
        match kind {
            KernelKind::Linear => Self::linear(),
            KernelKind::Polynomial => Self::polynomial(gamma, 1.0, 3),
            KernelKind::Gaussian => Self::gaussian(gamma),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma <= 0.0 || !self.gamma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.kind == KernelKind::Polynomial && self.degree < 1 {
            return Err(Error::InvalidInput(
                "polynomial degree must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Kernel value from a pair's inner product and squared distance.
    #[inline]
    pub fn eval_parts(&self, ip: f64, sqdist: f64) -> f64 {
        match self.kind {
            KernelKind::Linear => ip,
            KernelKind::Polynomial => (self.gamma * ip + self.coef0).powi(self.degree as i32),
            KernelKind::Gaussian => (-self.gamma * sqdist.max(0.0)).exp(),
        }
    }
}

/// Read access to pairwise statistics over the retained feature set.
pub trait PairQuery: Sync {
    fn n_samples(&self) -> usize;
    /// Inner product of samples `i` and `j` over retained features.
    fn ip(&self, i: usize, j: usize) -> f64;
    /// Squared Euclidean distance of samples `i` and `j` over retained features.
    fn sqdist(&self, i: usize, j: usize) -> f64;

    #[inline]
    fn kernel(&self, cfg: &KernelConfig, i: usize, j: usize) -> f64 {
        cfg.eval_parts(self.ip(i, j), self.sqdist(i, j))
    }
}

/// Pairwise inner products and squared distances over the retained features,
/// updated in place as features are committed for removal.
#[derive(Debug, Clone)]
pub struct PairStats {
    data: Arc<Dataset>,
    n: usize,
    ip: Vec<f64>,
    sqdist: Vec<f64>,
    retained: Vec<bool>,
    n_retained: usize,
}

impl PartialEq for PairStats {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.ip == other.ip
            && self.sqdist == other.sqdist
            && self.retained == other.retained
            && self.n_retained == other.n_retained
    }
}

impl PairStats {
    /// Computes both matrices over the full feature set.
    pub fn new(data: Arc<Dataset>) -> Self {
        let n = data.n_samples();
        let m = data.n_features();
        let mut ip = vec![0.0; n * n];
        let mut sqdist = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut dot = 0.0;
                let mut dist = 0.0;
                for f in 0..m {
                    let a = data.value(i, f);
                    let b = data.value(j, f);
                    dot += a * b;
                    let d = a - b;
                    dist += d * d;
                }
                ip[i * n + j] = dot;
                ip[j * n + i] = dot;
                if i != j {
                    sqdist[i * n + j] = dist;
                    sqdist[j * n + i] = dist;
                }
            }
        }
        Self {
            data,
            n,
            ip,
            sqdist,
            retained: vec![true; m],
            n_retained: m,
        }
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn n_retained(&self) -> usize {
        self.n_retained
    }

    pub fn is_retained(&self, m: usize) -> bool {
        self.retained.get(m).copied().unwrap_or(false)
    }

    /// Retained feature indices in ascending order.
    pub fn retained_features(&self) -> Vec<usize> {
        (0..self.retained.len())
            .filter(|&m| self.retained[m])
            .collect()
    }

    /// Transient overlay view of this state with feature `m` removed.
    pub fn candidate(&self, m: usize) -> Result<FeatureDrop<'_>> {
        if !self.is_retained(m) {
            return Err(Error::InvalidInput(format!("feature {m} is not retained")));
        }
        Ok(FeatureDrop { base: self, m })
    }

    /// Commits the removal of feature `m`, updating both matrices in place.
    pub fn remove(&mut self, m: usize) -> Result<()> {
        if !self.is_retained(m) {
            return Err(Error::InvalidInput(format!("feature {m} is not retained")));
        }
        let n = self.n;
        for i in 0..n {
            let xi = self.data.value(i, m);
            for j in i..n {
                let xj = self.data.value(j, m);
                let dip = xi * xj;
                self.ip[i * n + j] -= dip;
                if i != j {
                    self.ip[j * n + i] -= dip;
                    let d = xi - xj;
                    self.sqdist[i * n + j] -= d * d;
                    self.sqdist[j * n + i] -= d * d;
                }
            }
        }
        self.retained[m] = false;
        self.n_retained -= 1;
        Ok(())
    }

    /// Cross-checks the redundant storage: symmetry, zero diagonal, and
    /// `sqdist == ip_ii + ip_jj - 2 ip_ij` within tolerance.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.sqdist[i * n + i] != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "nonzero diagonal sqdist at {i}"
                )));
            }
            for j in i + 1..n {
                let sq = self.sqdist[i * n + j];
                if sq != self.sqdist[j * n + i] || self.ip[i * n + j] != self.ip[j * n + i] {
                    return Err(Error::InvalidInput(format!("asymmetry at ({i},{j})")));
                }
                let from_ip = self.ip[i * n + i] + self.ip[j * n + j] - 2.0 * self.ip[i * n + j];
                if (sq - from_ip).abs() > 1e-9 * (1.0 + sq.abs().max(from_ip.abs())) {
                    return Err(Error::InvalidInput(format!(
                        "sqdist/ip mismatch at ({i},{j}): {sq} vs {from_ip}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl PairQuery for PairStats {
    #[inline]
    fn n_samples(&self) -> usize {
        self.n
    }

    #[inline]
    fn ip(&self, i: usize, j: usize) -> f64 {
        self.ip[i * self.n + j]
    }

    #[inline]
    fn sqdist(&self, i: usize, j: usize) -> f64 {
        self.sqdist[i * self.n + j]
    }
}

/// Candidate view: `base` with feature `m` subtracted on read.
pub struct FeatureDrop<'a> {
    base: &'a PairStats,
    m: usize,
}

impl FeatureDrop<'_> {
    pub fn dropped_feature(&self) -> usize {
        self.m
    }
}

impl PairQuery for FeatureDrop<'_> {
    #[inline]
    fn n_samples(&self) -> usize {
        self.base.n
    }

    #[inline]
    fn ip(&self, i: usize, j: usize) -> f64 {
        self.base.ip(i, j) - self.base.data.value(i, self.m) * self.base.data.value(j, self.m)
    }

    #[inline]
    fn sqdist(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let d = self.base.data.value(i, self.m) - self.base.data.value(j, self.m);
        self.base.sqdist(i, j) - d * d
    }
}

/// Squared data radius over `indices` in the kernel-induced feature space:
/// the maximum of `K(i,i) - 2K(i,j) + K(j,j)` over sample pairs. For the
/// linear and Gaussian kernels this is monotone in the input-space squared
/// distance, so only the largest `sqdist` entry needs a kernel evaluation.
pub fn radius_sq(cfg: &KernelConfig, pq: &impl PairQuery, indices: &[usize]) -> f64 {
    if indices.len() < 2 {
        return 0.0;
    }
    let r = match cfg.kind {
        KernelKind::Linear | KernelKind::Gaussian => {
            let mut max_sq: f64 = 0.0;
            for (a, &i) in indices.iter().enumerate() {
                for &j in &indices[a + 1..] {
                    max_sq = max_sq.max(pq.sqdist(i, j));
                }
            }
            match cfg.kind {
                KernelKind::Linear => max_sq,
                _ => 2.0 - 2.0 * (-cfg.gamma * max_sq).exp(),
            }
        }
        KernelKind::Polynomial => {
            let mut max_d: f64 = 0.0;
            for (a, &i) in indices.iter().enumerate() {
                let kii = pq.kernel(cfg, i, i);
                for &j in &indices[a + 1..] {
                    let d = kii - 2.0 * pq.kernel(cfg, i, j) + pq.kernel(cfg, j, j);
                    max_d = max_d.max(d);
                }
            }
            max_d
        }
    };
    r.max(0.0)
}
