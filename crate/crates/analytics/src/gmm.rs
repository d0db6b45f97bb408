//! Variational Bayesian Gaussian mixture with a Dirichlet prior over the
//! mixture weights and a Gauss-Wishart prior over component parameters.
//!
//! Surplus components are driven towards zero weight by the low weight
//! concentration, so the number of clusters is inferred from the data. The
//! fit is restarted from k-means partitions with 1..=K_max clusters and the
//! run with the highest evidence lower bound is kept.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::AnalyticsError;

/// Regularizes leave-one-out covariances of exactly collinear members.
const JITTER_FLOOR: f64 = 1e-9;
const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams {
    pub k_max: usize,
    /// Dirichlet concentration per component; `None` means `1 / k_max`.
    pub weight_concentration: Option<f64>,
    pub mean_precision: f64,
    /// Wishart degrees of freedom; `None` means the data dimension.
    pub degrees_of_freedom: Option<f64>,
    /// The Wishart scale matrix inverse is this times the data covariance.
    pub covariance_prior_scale: f64,
    /// Components with expected weight below this are dropped; `None` means
    /// `1 / (10 * k_max)`, raised to `1.5 / n` so that a component must carry
    /// more than a single point.
    pub prune_floor: Option<f64>,
    /// Added to covariance diagonals.
    pub jitter: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for MixtureParams {
    fn default() -> Self {
        MixtureParams {
            k_max: 8,
            weight_concentration: None,
            mean_precision: 1.0,
            degrees_of_freedom: None,
            covariance_prior_scale: 1.0,
            prune_floor: None,
            jitter: 1e-6,
            max_iter: 300,
            tol: 1e-7,
        }
    }
}

impl MixtureParams {
    pub fn with_k_max(k_max: usize) -> Self {
        MixtureParams {
            k_max,
            ..Self::default()
        }
    }

    fn floor(&self, n: usize) -> f64 {
        self.prune_floor
            .unwrap_or_else(|| (1.0 / (10.0 * self.k_max as f64)).max(1.5 / n as f64))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    precision: DMatrix<f64>,
    log_norm: f64,
}

impl Component {
    fn new(weight: f64, mean: DVector<f64>, covariance: DMatrix<f64>) -> Self {
        let d = mean.len() as f64;
        let chol = covariance
            .clone()
            .cholesky()
            .expect("covariance is jitter-regularized");
        let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        Component {
            weight,
            precision: chol.inverse(),
            mean,
            covariance,
            log_norm: -0.5 * (d * LN_2PI + log_det),
        }
    }

    pub fn log_density(&self, x: &DVector<f64>) -> f64 {
        let diff = x - &self.mean;
        self.log_norm - 0.5 * (diff.transpose() * &self.precision * &diff)[(0, 0)]
    }

    /// Gaussian probability density at `x`.
    pub fn density(&self, x: &DVector<f64>) -> f64 {
        self.log_density(x).exp()
    }

    /// Density relative to the component's peak, `exp(-mahalanobis² / 2)`.
    /// Unlike [`density`](Self::density) it does not depend on data units.
    pub fn relative_density(&self, x: &DVector<f64>) -> f64 {
        (self.log_density(x) - self.log_norm).exp()
    }

    fn density_as(&self, x: &DVector<f64>, scale: DensityScale) -> f64 {
        match scale {
            DensityScale::Absolute => self.density(x),
            DensityScale::Relative => self.relative_density(x),
        }
    }
}

/// How the outlier threshold is compared against component densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DensityScale {
    /// Plain probability density.
    #[default]
    Absolute,
    /// Density divided by the component's peak density.
    Relative,
}

/// Student-t predictive of a new point given `n` samples with sums `s1`
/// and `s2` (non-informative prior).
struct Predictive {
    mean: DVector<f64>,
    precision: DMatrix<f64>,
    nu: f64,
    log_norm: f64,
}

impl Predictive {
    fn new(n: f64, s1: &DVector<f64>, s2: &DMatrix<f64>) -> Option<Self> {
        let d = s1.len() as f64;
        let nu = n - d;
        if nu <= 0.0 {
            return None;
        }
        let mean = s1 / n;
        let scatter = s2 - &mean * s1.transpose();
        let shape = scatter * ((n + 1.0) / (n * nu)) + DMatrix::identity(s1.len(), s1.len()) * JITTER_FLOOR;
        let chol = shape.cholesky()?;
        let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let log_norm = ln_gamma((nu + d) / 2.0) - ln_gamma(nu / 2.0) - d / 2.0 * (nu * std::f64::consts::PI).ln() - 0.5 * log_det;
        Some(Predictive {
            mean,
            precision: chol.inverse(),
            nu,
            log_norm,
        })
    }

    fn density_as(&self, x: &DVector<f64>, scale: DensityScale) -> f64 {
        let diff = x - &self.mean;
        let q = (diff.transpose() * &self.precision * &diff)[(0, 0)];
        let d = self.mean.len() as f64;
        let log_rel = -(self.nu + d) / 2.0 * (q / self.nu).ln_1p();
        match scale {
            DensityScale::Absolute => (self.log_norm + log_rel).exp(),
            DensityScale::Relative => log_rel.exp(),
        }
    }
}

/// Where a point falls in a fitted mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assignment {
    Cluster(usize),
    Outlier,
}

impl Assignment {
    /// Label as written to an output sensor; outliers are `-1`.
    pub fn label(self) -> i64 {
        match self {
            Assignment::Cluster(k) => k as i64,
            Assignment::Outlier => OUTLIER_LABEL,
        }
    }
}

pub const OUTLIER_LABEL: i64 = -1;

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    components: Vec<Component>,
    dim: usize,
    lower_bound: f64,
    iterations: usize,
}

/// Posterior parameters for all K components.
struct Posterior {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    nu: Vec<f64>,
    m: Vec<DVector<f64>>,
    w: Vec<DMatrix<f64>>,
    ln_det_w: Vec<f64>,
}

struct Prior {
    alpha0: f64,
    beta0: f64,
    nu0: f64,
    m0: DVector<f64>,
    w0_inv: DMatrix<f64>,
    ln_det_w0: f64,
}

/// Sufficient statistics of a responsibility matrix.
struct Stats {
    nk: Vec<f64>,
    xbar: Vec<DVector<f64>>,
    s: Vec<DMatrix<f64>>,
}

fn stats(x: &[DVector<f64>], r: &[Vec<f64>], k: usize, m0: &DVector<f64>) -> Stats {
    let d = m0.len();
    let mut nk = vec![0.0; k];
    let mut xbar = vec![DVector::zeros(d); k];
    for (xn, rn) in x.iter().zip(r) {
        for j in 0..k {
            nk[j] += rn[j];
            xbar[j] += xn * rn[j];
        }
    }
    let mut s = vec![DMatrix::zeros(d, d); k];
    for j in 0..k {
        if nk[j] > 1e-10 {
            xbar[j] /= nk[j];
        } else {
            xbar[j] = m0.clone();
        }
    }
    for (xn, rn) in x.iter().zip(r) {
        for j in 0..k {
            if rn[j] > 0.0 {
                let diff = xn - &xbar[j];
                s[j] += &diff * diff.transpose() * rn[j];
            }
        }
    }
    for j in 0..k {
        if nk[j] > 1e-10 {
            s[j] /= nk[j];
        }
    }
    Stats { nk, xbar, s }
}

fn ln_det_spd(m: &DMatrix<f64>) -> f64 {
    let chol = m.clone().cholesky().expect("matrix is positive definite");
    2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

fn ln_b(ln_det_w: f64, nu: f64, d: usize) -> f64 {
    let df = d as f64;
    let mut s = nu * df / 2.0 * 2f64.ln() + df * (df - 1.0) / 4.0 * std::f64::consts::PI.ln();
    for i in 1..=d {
        s += ln_gamma((nu + 1.0 - i as f64) / 2.0);
    }
    -nu / 2.0 * ln_det_w - s
}

fn ln_lambda_tilde(ln_det_w: f64, nu: f64, d: usize) -> f64 {
    (1..=d).map(|i| digamma((nu + 1.0 - i as f64) / 2.0)).sum::<f64>() + d as f64 * 2f64.ln() + ln_det_w
}

impl MixtureModel {
    pub fn fit(points: &[Vec<f64>], params: &MixtureParams, seed: u64) -> Result<Self, AnalyticsError> {
        let k = params.k_max.max(1);
        if points.len() < k {
            return Err(AnalyticsError::TooFewSamples {
                needed: k,
                found: points.len(),
            });
        }
        let d = points[0].len();
        if d == 0 {
            return Err(AnalyticsError::DimensionMismatch { expected: 1, found: 0 });
        }
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(AnalyticsError::DimensionMismatch {
                expected: d,
                found: p.len(),
            });
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(AnalyticsError::NonFinite);
        }
        let x: Vec<DVector<f64>> = points.iter().map(|p| DVector::from_column_slice(p)).collect();
        let n = x.len() as f64;
        let m0 = x.iter().fold(DVector::zeros(d), |acc, v| acc + v) / n;
        let mut w0_inv = x.iter().fold(DMatrix::zeros(d, d), |acc, v| {
            let diff = v - &m0;
            acc + &diff * diff.transpose()
        }) * (params.covariance_prior_scale / n);
        w0_inv += DMatrix::identity(d, d) * params.jitter;
        let prior = Prior {
            alpha0: params.weight_concentration.unwrap_or(1.0 / k as f64),
            beta0: params.mean_precision,
            nu0: params.degrees_of_freedom.unwrap_or(d as f64).max(d as f64 - 1.0 + 1e-6),
            ln_det_w0: -ln_det_spd(&w0_inv),
            m0,
            w0_inv,
        };

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: Option<(f64, Posterior, usize)> = None;
        for k_init in 1..=k {
            let labels = kmeans(&x, k_init, &mut rng);
            let mut r: Vec<Vec<f64>> = labels
                .iter()
                .map(|&l| {
                    let mut row = vec![0.0; k];
                    row[l] = 1.0;
                    row
                })
                .collect();
            let (bound, post, iters) = run_vb(&x, &mut r, k, &prior, params);
            if best.as_ref().is_none_or(|(b, _, _)| bound > *b + 1e-9) {
                best = Some((bound, post, iters));
            }
        }
        let (lower_bound, post, iterations) = best.expect("at least one restart");

        let alpha_sum: f64 = post.alpha.iter().sum();
        let weights: Vec<f64> = post.alpha.iter().map(|a| a / alpha_sum).collect();
        let top = (0..k).max_by(|&a, &b| weights[a].total_cmp(&weights[b])).expect("k >= 1");
        let keep: Vec<usize> = (0..k).filter(|&j| j == top || weights[j] >= params.floor(x.len())).collect();
        let kept_sum: f64 = keep.iter().map(|&j| weights[j]).sum();
        let components = keep
            .into_iter()
            .map(|j| {
                let w_inv = post.w[j].clone().try_inverse().expect("scale matrix is invertible");
                let cov = w_inv / post.nu[j] + DMatrix::identity(d, d) * params.jitter;
                Component::new(weights[j] / kept_sum, post.m[j].clone(), (&cov + cov.transpose()) / 2.0)
            })
            .collect();
        Ok(MixtureModel {
            components,
            dim: d,
            lower_bound,
            iterations,
        })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn effective_components(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evidence lower bound of the selected run.
    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Component responsibilities for `x` (weights times densities,
    /// normalized).
    pub fn responsibilities(&self, x: &[f64]) -> Result<Vec<f64>, AnalyticsError> {
        let v = self.vector(x)?;
        let logs: Vec<f64> = self
            .components
            .iter()
            .map(|c| c.weight.ln() + c.log_density(&v))
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        Ok(exps.into_iter().map(|e| e / sum).collect())
    }

    /// Most responsible component, or an outlier when the density of every
    /// component at `x` is below `threshold`.
    pub fn assign(&self, x: &[f64], threshold: f64) -> Result<Assignment, AnalyticsError> {
        self.assign_scaled(x, threshold, DensityScale::Absolute)
    }

    pub fn assign_scaled(&self, x: &[f64], threshold: f64, scale: DensityScale) -> Result<Assignment, AnalyticsError> {
        let v = self.vector(x)?;
        if self.components.iter().all(|c| c.density_as(&v, scale) < threshold) {
            return Ok(Assignment::Outlier);
        }
        let resp = self.responsibilities(x)?;
        let best = (0..resp.len())
            .max_by(|&a, &b| resp[a].total_cmp(&resp[b]))
            .ok_or(AnalyticsError::NotFitted)?;
        Ok(Assignment::Cluster(best))
    }

    /// Labels the points the model was fitted on. Each point is judged by
    /// the posterior predictive (multivariate Student-t) of its component
    /// re-estimated from the other hard-assigned members, so a distant point
    /// cannot widen the component that tests it. Components with at most
    /// `dim` other members keep their fitted Gaussian.
    pub fn label_points(
        &self,
        points: &[Vec<f64>],
        threshold: f64,
        scale: DensityScale,
    ) -> Result<Vec<Assignment>, AnalyticsError> {
        let d = self.dim;
        let xs = points.iter().map(|p| self.vector(p)).collect::<Result<Vec<_>, _>>()?;
        let mut best = Vec::with_capacity(xs.len());
        for p in points {
            let r = self.responsibilities(p)?;
            best.push((0..r.len()).max_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap_or(0));
        }
        let k = self.components.len();
        let mut count = vec![0.0; k];
        let mut s1 = vec![DVector::zeros(d); k];
        let mut s2 = vec![DMatrix::zeros(d, d); k];
        for (x, &j) in xs.iter().zip(&best) {
            count[j] += 1.0;
            s1[j] += x;
            s2[j] += x * x.transpose();
        }
        let full: Vec<Option<Predictive>> = (0..k).map(|j| Predictive::new(count[j], &s1[j], &s2[j])).collect();
        let mut out = Vec::with_capacity(xs.len());
        for (x, &own) in xs.iter().zip(&best) {
            let loo = Predictive::new(count[own] - 1.0, &(&s1[own] - x), &(&s2[own] - x * x.transpose()));
            let inlier = (0..k).any(|j| {
                let p = if j == own { loo.as_ref() } else { full[j].as_ref() };
                let density = match p {
                    Some(p) => p.density_as(x, scale),
                    None => self.components[j].density_as(x, scale),
                };
                density >= threshold
            });
            out.push(if inlier { Assignment::Cluster(own) } else { Assignment::Outlier });
        }
        Ok(out)
    }

    fn vector(&self, x: &[f64]) -> Result<DVector<f64>, AnalyticsError> {
        if self.components.is_empty() {
            return Err(AnalyticsError::NotFitted);
        }
        if x.len() != self.dim {
            return Err(AnalyticsError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(DVector::from_column_slice(x))
    }
}

fn m_step(st: &Stats, prior: &Prior, k: usize) -> Posterior {
    let mut post = Posterior {
        alpha: Vec::with_capacity(k),
        beta: Vec::with_capacity(k),
        nu: Vec::with_capacity(k),
        m: Vec::with_capacity(k),
        w: Vec::with_capacity(k),
        ln_det_w: Vec::with_capacity(k),
    };
    for j in 0..k {
        let nk = st.nk[j];
        let beta = prior.beta0 + nk;
        let m = (&prior.m0 * prior.beta0 + &st.xbar[j] * nk) / beta;
        let diff = &st.xbar[j] - &prior.m0;
        let mut w_inv = &prior.w0_inv + &st.s[j] * nk + &diff * diff.transpose() * (prior.beta0 * nk / beta);
        w_inv = (&w_inv + w_inv.transpose()) / 2.0;
        let chol = w_inv.clone().cholesky().expect("scale matrix is positive definite");
        let ln_det_w_inv = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        post.alpha.push(prior.alpha0 + nk);
        post.beta.push(beta);
        post.nu.push(prior.nu0 + nk);
        post.m.push(m);
        post.w.push(chol.inverse());
        post.ln_det_w.push(-ln_det_w_inv);
    }
    post
}

fn e_step(x: &[DVector<f64>], post: &Posterior, k: usize, r: &mut [Vec<f64>]) {
    let d = x[0].len();
    let alpha_sum: f64 = post.alpha.iter().sum();
    let ln_pi: Vec<f64> = post.alpha.iter().map(|a| digamma(*a) - digamma(alpha_sum)).collect();
    let ln_lam: Vec<f64> = (0..k).map(|j| ln_lambda_tilde(post.ln_det_w[j], post.nu[j], d)).collect();
    for (xn, rn) in x.iter().zip(r.iter_mut()) {
        let mut max = f64::NEG_INFINITY;
        for j in 0..k {
            let diff = xn - &post.m[j];
            let maha = (diff.transpose() * &post.w[j] * &diff)[(0, 0)];
            let quad = d as f64 / post.beta[j] + post.nu[j] * maha;
            rn[j] = ln_pi[j] + 0.5 * ln_lam[j] - 0.5 * d as f64 * LN_2PI - 0.5 * quad;
            max = max.max(rn[j]);
        }
        let mut sum = 0.0;
        for v in rn.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in rn.iter_mut() {
            *v /= sum;
        }
    }
}

#[allow(clippy::needless_range_loop)]
fn lower_bound(r: &[Vec<f64>], st: &Stats, post: &Posterior, prior: &Prior, k: usize) -> f64 {
    let d = prior.m0.len();
    let df = d as f64;
    let alpha_sum: f64 = post.alpha.iter().sum();
    let ln_pi: Vec<f64> = post.alpha.iter().map(|a| digamma(*a) - digamma(alpha_sum)).collect();
    let ln_lam: Vec<f64> = (0..k).map(|j| ln_lambda_tilde(post.ln_det_w[j], post.nu[j], d)).collect();

    let mut e_lik = 0.0;
    let mut e_prior_ml = 0.0;
    let mut e_q_ml = 0.0;
    for j in 0..k {
        let w = &post.w[j];
        let dx = &st.xbar[j] - &post.m[j];
        let dm = &post.m[j] - &prior.m0;
        let tr_sw = (&st.s[j] * w).trace();
        let q_x = (dx.transpose() * w * &dx)[(0, 0)];
        let q_m = (dm.transpose() * w * &dm)[(0, 0)];
        e_lik += 0.5
            * st.nk[j]
            * (ln_lam[j] - df / post.beta[j] - post.nu[j] * tr_sw - post.nu[j] * q_x - df * LN_2PI);
        e_prior_ml += 0.5
            * (df * (prior.beta0 / (2.0 * std::f64::consts::PI)).ln() + ln_lam[j]
                - df * prior.beta0 / post.beta[j]
                - prior.beta0 * post.nu[j] * q_m)
            + (prior.nu0 - df - 1.0) / 2.0 * ln_lam[j]
            - 0.5 * post.nu[j] * (&prior.w0_inv * w).trace();
        let entropy = -ln_b(post.ln_det_w[j], post.nu[j], d) - (post.nu[j] - df - 1.0) / 2.0 * ln_lam[j]
            + post.nu[j] * df / 2.0;
        e_q_ml += 0.5 * ln_lam[j] + df / 2.0 * (post.beta[j] / (2.0 * std::f64::consts::PI)).ln()
            - df / 2.0
            - entropy;
    }
    e_prior_ml += k as f64 * ln_b(prior.ln_det_w0, prior.nu0, d);

    let mut e_z = 0.0;
    let mut e_qz = 0.0;
    for rn in r {
        for j in 0..k {
            e_z += rn[j] * ln_pi[j];
            if rn[j] > 1e-300 {
                e_qz += rn[j] * rn[j].ln();
            }
        }
    }
    let ln_c = |alphas: &[f64]| {
        ln_gamma(alphas.iter().sum::<f64>()) - alphas.iter().map(|a| ln_gamma(*a)).sum::<f64>()
    };
    let e_pi = ln_c(&vec![prior.alpha0; k]) + (prior.alpha0 - 1.0) * ln_pi.iter().sum::<f64>();
    let e_qpi = (0..k).map(|j| (post.alpha[j] - 1.0) * ln_pi[j]).sum::<f64>() + ln_c(&post.alpha);

    e_lik + e_z + e_pi + e_prior_ml - e_qz - e_qpi - e_q_ml
}

fn run_vb(
    x: &[DVector<f64>],
    r: &mut [Vec<f64>],
    k: usize,
    prior: &Prior,
    params: &MixtureParams,
) -> (f64, Posterior, usize) {
    let mut prev = f64::NEG_INFINITY;
    let mut iter = 0;
    loop {
        let st = stats(x, r, k, &prior.m0);
        let post = m_step(&st, prior, k);
        let bound = lower_bound(r, &st, &post, prior, k);
        iter += 1;
        let converged = (bound - prev).abs() <= params.tol * bound.abs().max(1.0);
        if converged || iter >= params.max_iter {
            return (bound, post, iter);
        }
        prev = bound;
        e_step(x, &post, k, r);
    }
}

/// k-means++ seeding followed by Lloyd iterations. Ties go to the lowest
/// cluster index.
fn kmeans(x: &[DVector<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut centers: Vec<DVector<f64>> = vec![x[rng.random_range(0..x.len())].clone()];
    while centers.len() < k {
        let d2: Vec<f64> = x
            .iter()
            .map(|p| {
                centers
                    .iter()
                    .map(|c| (p - c).norm_squared())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        let pick = if total <= 0.0 {
            rng.random_range(0..x.len())
        } else {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = x.len() - 1;
            for (i, w) in d2.iter().enumerate() {
                if target < *w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        };
        centers.push(x[pick].clone());
    }

    let mut labels = vec![0; x.len()];
    for _ in 0..100 {
        let mut changed = false;
        for (i, p) in x.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, c) in centers.iter().enumerate() {
                let dist = (p - c).norm_squared();
                if dist < best_d {
                    best_d = dist;
                    best = j;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        for (j, c) in centers.iter_mut().enumerate() {
            let members: Vec<&DVector<f64>> = x.iter().zip(&labels).filter(|(_, &l)| l == j).map(|(p, _)| p).collect();
            if !members.is_empty() {
                *c = members.iter().fold(DVector::zeros(c.len()), |acc, p| acc + *p) / members.len() as f64;
            }
        }
        if !changed {
            break;
        }
    }
    labels
}
