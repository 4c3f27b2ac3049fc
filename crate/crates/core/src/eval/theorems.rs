//! Monte-Carlo validation of the sketching guarantees.
//!
//! Each validator takes a `distort` hook applied to every sampled estimate
//! as `distort(truth, estimate)`; [`faithful`] passes estimates through and
//! [`inflate`] scales their deviation from the truth, which must make the
//! validators fail.

use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp};
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::hash::keyed_hash;
use crate::sketch::{ws_inner, BoundSketch, JlTransform, QueryBoundSketch, WeakSinnamonTransform};
use crate::vector::{sparse_dot_unchecked, SparseVector};

pub const MEAN_Z_LIMIT: f64 = 4.0;
pub const VAR_REL_LIMIT: f64 = 0.10;
pub const CDF_GAP_LIMIT: f64 = 0.03;
pub const BOUND_TOLERANCE: f64 = 1e-9;

pub type Distort = dyn Fn(f64, f64) -> f64 + Sync;
pub type WsEstimator = dyn Fn(&QueryBoundSketch, &BoundSketch) -> f64 + Sync;

pub fn faithful(_truth: f64, estimate: f64) -> f64 {
    estimate
}

/// Multiplies the deviation of each estimate by `factor`.
pub fn inflate(factor: f64) -> impl Fn(f64, f64) -> f64 + Sync {
    move |truth, estimate| truth + factor * (estimate - truth)
}

pub fn ws_estimate(q: &QueryBoundSketch, d: &BoundSketch) -> f64 {
    ws_inner(q, d).expect("query and document sketches share a transform")
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(keyed_hash(seed, trial, 0x7472_6961_6c))
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentCheck {
    pub label: String,
    pub trials: usize,
    pub empirical_mean: f64,
    pub theoretical_mean: f64,
    /// Standardized deviation of the empirical mean.
    pub mean_z: f64,
    pub empirical_var: f64,
    pub theoretical_var: f64,
    pub var_rel_error: f64,
    pub passed: bool,
}

impl MomentCheck {
    fn new(label: &str, estimates: &[f64], deviations: &[f64], mean: f64, var: f64) -> Self {
        let (emp_mean, emp_total_var) = mean_var(estimates);
        let (_, emp_var) = mean_var(deviations);
        let se = (emp_total_var / estimates.len() as f64).sqrt();
        let mean_z = if se > 0.0 {
            (emp_mean - mean) / se
        } else if (emp_mean - mean).abs() <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        let var_rel_error = if var > 0.0 {
            (emp_var - var).abs() / var
        } else if emp_var <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        Self {
            label: label.to_string(),
            trials: estimates.len(),
            empirical_mean: emp_mean,
            theoretical_mean: mean,
            mean_z,
            empirical_var: emp_var,
            theoretical_var: var,
            var_rel_error,
            passed: mean_z.abs() <= MEAN_Z_LIMIT && var_rel_error <= VAR_REL_LIMIT,
        }
    }
}

impl fmt::Display for MomentCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<28} mean {:+.5} (theory {:+.5}, z {:+.2})  var {:.6} (theory {:.6}, rel err {:.3})  {}",
            self.label,
            self.empirical_mean,
            self.theoretical_mean,
            self.mean_z,
            self.empirical_var,
            self.theoretical_var,
            self.var_rel_error,
            verdict(self.passed)
        )
    }
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Variance of the JL inner-product estimate for fixed `u`, `v`.
pub fn jl_pair_variance(u: &SparseVector, v: &SparseVector, n: u32) -> f64 {
    let uv = sparse_dot_unchecked(u, v);
    let cross: f64 = u
        .iter()
        .map(|(i, a)| {
            let b = f64::from(v.get(i));
            f64::from(a) * f64::from(a) * b * b
        })
        .sum();
    (u.squared_norm() * v.squared_norm() + uv * uv - 2.0 * cross) / f64::from(n)
}

fn check_trials(trials: usize, min: usize) -> Result<()> {
    if trials < min {
        return Err(Error::invalid(format!("at least {min} trials are required, got {trials}")));
    }
    Ok(())
}

fn jl_estimate(u: &SparseVector, v: &SparseVector, n: u32, seed: u64) -> Result<f64> {
    let t = JlTransform::new(u.dim(), n, seed)?;
    let (a, b) = (t.sketch_f64(u)?, t.sketch_f64(v)?);
    Ok(a.iter().zip(&b).map(|(x, y)| x * y).sum())
}

/// JL estimates of `⟨u, v⟩` over `trials` independent projections.
pub fn mc_validate_jl_pair(
    label: &str,
    u: &SparseVector,
    v: &SparseVector,
    n: u32,
    trials: usize,
    seed: u64,
    distort: &Distort,
) -> Result<MomentCheck> {
    check_trials(trials, 1000)?;
    check_dim(u.dim() as usize, v.dim() as usize)?;
    let truth = sparse_dot_unchecked(u, v);
    let estimates = (0..trials as u64)
        .into_par_iter()
        .map(|t| Ok(distort(truth, jl_estimate(u, v, n, keyed_hash(seed, t, 1))?)))
        .collect::<Result<Vec<f64>>>()?;
    let deviations: Vec<f64> = estimates.iter().map(|z| z - truth).collect();
    Ok(MomentCheck::new(label, &estimates, &deviations, truth, jl_pair_variance(u, v, n)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueDist {
    Exponential { scale: f64 },
    Uniform01,
}

impl ValueDist {
    pub fn mean(self) -> f64 {
        match self {
            ValueDist::Exponential { scale } => scale,
            ValueDist::Uniform01 => 0.5,
        }
    }

    pub fn variance(self) -> f64 {
        match self {
            ValueDist::Exponential { scale } => scale * scale,
            ValueDist::Uniform01 => 1.0 / 12.0,
        }
    }

    pub fn cdf(self, x: f64) -> f64 {
        match self {
            ValueDist::Exponential { scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - (-x / scale).exp()
                }
            }
            ValueDist::Uniform01 => x.clamp(0.0, 1.0),
        }
    }

    pub fn pdf(self, x: f64) -> f64 {
        match self {
            ValueDist::Exponential { scale } => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x / scale).exp() / scale
                }
            }
            ValueDist::Uniform01 => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Interval holding all but a negligible part of the mass.
    fn support(self) -> (f64, f64) {
        match self {
            ValueDist::Exponential { scale } => (0.0, 50.0 * scale),
            ValueDist::Uniform01 => (0.0, 1.0),
        }
    }

    fn sample(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            ValueDist::Exponential { scale } => Exp::new(1.0 / scale).expect("positive scale").sample(rng),
            ValueDist::Uniform01 => rng.random::<f64>(),
        }
    }
}

/// Random documents whose coordinates are independently nonzero with
/// probability `psi / dim`, with values drawn from `values`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocModel {
    pub dim: u32,
    pub psi: f64,
    pub values: ValueDist,
}

impl Default for DocModel {
    fn default() -> Self {
        Self { dim: 1000, psi: 16.0, values: ValueDist::Exponential { scale: 0.5 } }
    }
}

impl DocModel {
    pub fn p(&self) -> f64 {
        self.psi / f64::from(self.dim)
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 || !(self.psi > 0.0 && self.psi <= f64::from(self.dim)) {
            return Err(Error::invalid(format!("need 0 < psi <= dim, got psi {} dim {}", self.psi, self.dim)));
        }
        if let ValueDist::Exponential { scale } = self.values {
            if !(scale > 0.0) {
                return Err(Error::invalid("exponential scale must be positive"));
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> SparseVector {
        let nnz = Binomial::new(u64::from(self.dim), self.p()).expect("valid probability").sample(rng) as usize;
        let entries: Vec<(u32, f32)> = sample(rng, self.dim as usize, nnz)
            .into_iter()
            .map(|i| (i as u32, self.values.sample(rng) as f32))
            .collect();
        SparseVector::from_unsorted(self.dim, entries).expect("coordinates are distinct and in range")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JlModelCheck {
    /// Mean of the estimate against `μ Σ p_i q_i`; variance of the sketching
    /// error against the closed form averaged over documents.
    pub moments: MomentCheck,
    pub total_var_empirical: f64,
    /// Closed form plus the variance of `⟨q, X⟩` itself.
    pub total_var_predicted: f64,
}

impl fmt::Display for JlModelCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\n{:<28} total var {:.6} (predicted {:.6})",
            self.moments, "", self.total_var_empirical, self.total_var_predicted
        )
    }
}

/// Mean and variance predicted for the JL estimate of `⟨q, X⟩`, `X ~ model`.
pub fn jl_model_moments(q: &SparseVector, model: &DocModel, n: u32) -> (f64, f64, f64) {
    let p = model.p();
    let mu = model.values.mean();
    let m2 = mu * mu + model.values.variance();
    let sum_qp: f64 = q.values().iter().map(|&x| f64::from(x) * p).sum();
    let sum_qp_sq: f64 = q.values().iter().map(|&x| (f64::from(x) * p).powi(2)).sum();
    let sum_p = p * f64::from(model.dim);
    let sum_pq2: f64 = q.values().iter().map(|&x| p * f64::from(x).powi(2)).sum();
    let sketch_var = (m2 * (q.squared_norm() * sum_p - sum_pq2) + mu * mu * (sum_qp * sum_qp - sum_qp_sq)) / f64::from(n);
    let dot_var: f64 = q.values().iter().map(|&x| f64::from(x).powi(2) * (p * m2 - p * p * mu * mu)).sum();
    (mu * sum_qp, sketch_var, dot_var)
}

pub fn mc_validate_jl_model(
    q: &SparseVector,
    model: &DocModel,
    n: u32,
    trials: usize,
    seed: u64,
    distort: &Distort,
) -> Result<JlModelCheck> {
    check_trials(trials, 1000)?;
    model.validate()?;
    check_dim(model.dim as usize, q.dim() as usize)?;
    let samples = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let x = model.sample(&mut rng);
            let truth = sparse_dot_unchecked(q, &x);
            let z = distort(truth, jl_estimate(q, &x, n, keyed_hash(seed, t, 2))?);
            Ok((z, z - truth))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (estimates, deviations): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
    let (mean, sketch_var, dot_var) = jl_model_moments(q, model, n);
    let moments = MomentCheck::new("jl-random-document", &estimates, &deviations, mean, sketch_var);
    let (_, total) = mean_var(&estimates);
    Ok(JlModelCheck { moments, total_var_empirical: total, total_var_predicted: sketch_var + dot_var })
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Approximate `P[X̄_π(i) − X_i ≤ δ]` for the upper-bound sketch with `m`
/// cells.
pub fn ws_error_cdf(model: &DocModel, m: u32, delta: f64) -> f64 {
    let p = model.p();
    let rest = p * (f64::from(model.dim) - 1.0) / f64::from(m);
    let dist = model.values;
    let absent = (1.0 - p) * (-(1.0 - dist.cdf(delta)) * rest).exp();
    let (lo, hi) = dist.support();
    let integrand = |a: f64| (-(1.0 - dist.cdf(a + delta)) * rest).exp() * dist.pdf(a);
    // Splitting at the support edge shifted by delta keeps the integrand smooth per piece.
    let kink = (hi - delta).clamp(lo, hi);
    let present = integrate(&integrand, lo, kink, 1e-6) + integrate(&integrand, kink, hi, 1e-6);
    absent + p * present
}

pub fn delta_grid(points: usize, max: f64) -> Vec<f64> {
    if points <= 1 {
        return vec![0.0; points];
    }
    (0..points).map(|j| max * j as f64 / (points - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdfRow {
    pub delta: f64,
    pub empirical: f64,
    pub theoretical: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdfCheck {
    pub trials: usize,
    pub rows: Vec<CdfRow>,
    pub max_gap: f64,
    pub passed: bool,
}

impl fmt::Display for CdfCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<28} max CDF gap {:.4} over {} grid points  {}", "ws-error-cdf", self.max_gap, self.rows.len(), verdict(self.passed))?;
        for r in &self.rows {
            writeln!(f, "    delta {:.4}  empirical {:.4}  approx {:.4}", r.delta, r.empirical, r.theoretical)?;
        }
        Ok(())
    }
}

/// Empirical CDF of the upper-bound sketching error `X̄_π(i) − X_i` pooled
/// over all coordinates `i`, with a fresh document and a fresh uniformly
/// random mapping `π` per trial, against [`ws_error_cdf`].
pub fn mc_validate_ws_error(
    model: &DocModel,
    m: u32,
    trials: usize,
    grid: &[f64],
    seed: u64,
    distort: &Distort,
) -> Result<CdfCheck> {
    check_trials(trials, 10_000)?;
    model.validate()?;
    if m == 0 {
        return Err(Error::invalid("m must be positive"));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("delta grid must be ascending"));
    }
    let dim = model.dim;
    let counts = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let x = model.sample(&mut rng);
            let pi: Vec<u32> = (0..dim).map(|_| rng.random_range(0..m)).collect();
            let ws = WeakSinnamonTransform::with_mapping(dim, m, pi.clone(), false)?;
            let sketch = ws.sketch_doc(&x)?;
            let mut counts = vec![0u64; grid.len()];
            for i in 0..dim {
                let xi = f64::from(x.get(i));
                let est = distort(xi, f64::from(sketch.upper_bound(pi[i as usize] as usize)));
                let first = grid.partition_point(|&d| d < est - xi);
                if first < grid.len() {
                    counts[first] += 1;
                }
            }
            Ok::<_, Error>(counts)
        })
        .try_reduce(
            || vec![0u64; grid.len()],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    let total = trials as f64 * f64::from(dim);
    let mut cumulative = 0u64;
    let mut rows = Vec::with_capacity(grid.len());
    let mut max_gap: f64 = 0.0;
    for (j, &delta) in grid.iter().enumerate() {
        cumulative += counts[j];
        let empirical = cumulative as f64 / total;
        let theoretical = ws_error_cdf(model, m, delta);
        max_gap = max_gap.max((empirical - theoretical).abs());
        rows.push(CdfRow { delta, empirical, theoretical });
    }
    Ok(CdfCheck { trials, rows, max_gap, passed: max_gap <= CDF_GAP_LIMIT })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub pairs: usize,
    pub violations: usize,
    /// Largest `exact − estimate` seen.
    pub max_violation: f64,
    pub passed: bool,
}

impl fmt::Display for BoundCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<28} {} violations in {} mixed-sign pairs (worst shortfall {:.3e})  {}",
            "ws-upper-bound",
            self.violations,
            self.pairs,
            self.max_violation.max(0.0),
            verdict(self.passed)
        )
    }
}

fn random_mixed(rng: &mut ChaCha8Rng, dim: u32) -> SparseVector {
    let nnz = rng.random_range(0..=dim) as usize;
    let entries: Vec<(u32, f32)> = sample(rng, dim as usize, nnz)
        .into_iter()
        .map(|i| {
            let v = if rng.random_bool(0.2) {
                rng.random_range(-3i32..=3) as f32
            } else {
                rng.random_range(-1.0f32..1.0)
            };
            (i as u32, v)
        })
        .collect();
    SparseVector::from_unsorted(dim, entries).expect("coordinates are distinct and in range")
}

/// Checks `estimate(φ_q(q), φ_d(u)) ≥ ⟨q, u⟩` on random mixed-sign pairs
/// with random dimensions, sketch sizes and mappings.
pub fn check_ws_upper_bound(pairs: usize, seed: u64, estimator: &WsEstimator) -> Result<BoundCheck> {
    let shortfalls = (0..pairs as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let dim = rng.random_range(1..=64u32);
            let m = rng.random_range(1..=16u32);
            let ws = WeakSinnamonTransform::new(dim, m, rng.random(), false)?;
            let (q, u) = (random_mixed(&mut rng, dim), random_mixed(&mut rng, dim));
            let exact = sparse_dot_unchecked(&q, &u);
            Ok(exact - estimator(&ws.sketch_query(&q)?, &ws.sketch_doc(&u)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    let violations = shortfalls.iter().filter(|&&s| s > BOUND_TOLERANCE).count();
    let max_violation = shortfalls.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundCheck { pairs, violations, max_violation, passed: violations == 0 })
}

/// Inner product of Weak Sinnamon sketches taken from the raw per-cell
/// extremes, without accounting for coordinates absent from the document.
pub fn ws_estimate_raw(q: &QueryBoundSketch, d: &BoundSketch) -> f64 {
    let up: f64 = q.upper.iter().map(|&(k, v)| v * f64::from(d.upper[k as usize])).sum();
    let low: f64 = q.lower.iter().map(|&(k, v)| v * f64::from(d.lower.get(k as usize).copied().unwrap_or(0.0))).sum();
    up + low
}

/// Fixed pairs for the JL check.
pub fn standard_pairs() -> Vec<(&'static str, SparseVector, SparseVector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dense = |rng: &mut ChaCha8Rng, dim: u32| -> SparseVector {
        let v: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        SparseVector::from_dense(&v).l2_normalize().expect("nonzero")
    };
    let sparse = |rng: &mut ChaCha8Rng, dim: u32, idx: &[u32]| -> SparseVector {
        let e: Vec<(u32, f32)> = idx.iter().map(|&i| (i, rng.random_range(0.1f32..1.0))).collect();
        SparseVector::from_unsorted(dim, e).expect("valid").l2_normalize().expect("nonzero")
    };
    let h = std::f32::consts::FRAC_1_SQRT_2;
    let disjoint_u = SparseVector::new(32, [(0, h), (1, h)]).expect("valid");
    let disjoint_v = SparseVector::new(32, [(2, h), (3, h)]).expect("valid");
    let same = dense(&mut rng, 32);
    let (a, b) = (dense(&mut rng, 32), dense(&mut rng, 32));
    let idx_u: Vec<u32> = (0..16).map(|i| i * 7).collect();
    let idx_v: Vec<u32> = (0..16).map(|i| i * 5).collect();
    let (su, sv) = (sparse(&mut rng, 1000, &idx_u), sparse(&mut rng, 1000, &idx_v));
    let base = dense(&mut rng, 32);
    let noise = dense(&mut rng, 32);
    let near: Vec<f32> = (0..32).map(|i| base.get(i) + 0.1 * noise.get(i)).collect();
    let anti: Vec<f32> = (0..32).map(|i| -base.get(i) + 0.3 * noise.get(i)).collect();
    vec![
        ("jl-pair-disjoint", disjoint_u, disjoint_v),
        ("jl-pair-identical", same.clone(), same),
        ("jl-pair-random-dense", a, b),
        ("jl-pair-sparse-overlap", su, sv),
        ("jl-pair-near-parallel", base.clone(), SparseVector::from_dense(&near)),
        ("jl-pair-anti-correlated", base, SparseVector::from_dense(&anti)),
    ]
}

/// A unit-norm non-negative query with `nnz` equal entries.
pub fn standard_query(dim: u32, nnz: u32) -> SparseVector {
    let v = 1.0 / (nnz as f32).sqrt();
    let step = (dim / nnz.max(1)).max(1);
    SparseVector::new(dim, (0..nnz.min(dim)).map(|i| (i * step, v))).expect("valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub jl_pairs: Vec<MomentCheck>,
    pub jl_model: JlModelCheck,
    pub ws_bound: BoundCheck,
    pub ws_error: CdfCheck,
}

impl TheoremReport {
    pub fn jl_passed(&self) -> bool {
        self.jl_pairs.iter().all(|c| c.passed) && self.jl_model.moments.passed
    }

    pub fn passed(&self) -> bool {
        self.jl_passed() && self.ws_bound.passed && self.ws_error.passed
    }
}

impl fmt::Display for TheoremReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.jl_pairs {
            writeln!(f, "{c}")?;
        }
        writeln!(f, "{}", self.jl_model)?;
        writeln!(f, "{}", self.ws_bound)?;
        write!(f, "{}", self.ws_error)?;
        writeln!(f, "overall: {}", verdict(self.passed()))
    }
}

pub const JL_PAIR_WIDTH: u32 = 128;
pub const JL_MODEL_WIDTH: u32 = 256;
pub const WS_ERROR_CELLS: u32 = 64;

/// Runs every validator with `trials` samples each.
pub fn validate_all(trials: usize, seed: u64, distort: &Distort) -> Result<TheoremReport> {
    let jl_pairs = standard_pairs()
        .iter()
        .map(|(label, u, v)| mc_validate_jl_pair(label, u, v, JL_PAIR_WIDTH, trials, seed, distort))
        .collect::<Result<Vec<_>>>()?;
    let model = DocModel::default();
    let jl_model = mc_validate_jl_model(&standard_query(model.dim, 32), &model, JL_MODEL_WIDTH, trials, seed, distort)?;
    let ws_bound = check_ws_upper_bound(trials, seed, &ws_estimate)?;
    let ws_error = mc_validate_ws_error(&model, WS_ERROR_CELLS, trials, &delta_grid(50, 3.0), seed, distort)?;
    Ok(TheoremReport { jl_pairs, jl_model, ws_bound, ws_error })
}
