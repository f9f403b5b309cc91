//! Proposal adaptation used during warm-up. Every adapter is frozen at the end
//! of warm-up and counts any update it receives afterwards.

use nalgebra::{SMatrix, SVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Robbins-Monro step size `(n + 1)^-0.6`.
fn rm_step(n: u64) -> f64 {
    ((n + 1) as f64).powf(-0.6)
}

const MAX_LOG_SCALE: f64 = 10.0;
const MIN_LOG_SCALE: f64 = -30.0;

/// Random-walk scale tuned toward a target acceptance rate.
#[derive(Debug, Clone)]
pub struct ScaleAdapter {
    log_scale: f64,
    target: f64,
    n: u64,
    frozen: bool,
    late_updates: u64,
}

impl ScaleAdapter {
    pub fn new(initial_scale: f64, target: f64) -> Self {
        Self {
            log_scale: initial_scale.ln(),
            target,
            n: 0,
            frozen: false,
            late_updates: 0,
        }
    }

    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    pub fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        z * self.scale()
    }

    pub fn adapt(&mut self, accepted: bool) {
        if self.frozen {
            self.late_updates += 1;
            return;
        }
        let a = if accepted { 1.0 } else { 0.0 };
        self.log_scale = (self.log_scale + rm_step(self.n) * (a - self.target)).clamp(MIN_LOG_SCALE, MAX_LOG_SCALE);
        self.n += 1;
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    /// Adaptation calls received after freezing; they leave the proposal untouched.
    pub fn late_updates(&self) -> u64 {
        self.late_updates
    }
}

/// Gaussian random-walk proposal whose shape follows the running covariance
/// of the chain and whose overall size is tuned toward a target acceptance.
#[derive(Debug, Clone)]
pub struct CovarianceAdapter<const D: usize> {
    chol: SMatrix<f64, D, D>,
    log_scale: f64,
    target: f64,
    n_adapt: u64,
    mean: SVector<f64, D>,
    m2: SMatrix<f64, D, D>,
    n_seen: u64,
    empirical: bool,
    frozen: bool,
    late_updates: u64,
}

/// Warm-up schedule for covariance learning, as fractions of warm-up.
#[derive(Debug, Clone, Copy)]
pub struct CovarianceSchedule {
    pub collect_from: usize,
    pub restart_at: usize,
    pub update_every: usize,
    pub min_samples: u64,
}

impl CovarianceSchedule {
    pub fn for_warmup(n_warmup: usize) -> Self {
        Self {
            collect_from: n_warmup / 10,
            restart_at: n_warmup / 2,
            update_every: 50,
            min_samples: 100,
        }
    }
}

impl<const D: usize> CovarianceAdapter<D> {
    pub fn new(initial_scales: [f64; D], target: f64) -> Self {
        Self {
            chol: SMatrix::from_diagonal(&SVector::from(initial_scales)),
            log_scale: 0.0,
            target,
            n_adapt: 0,
            mean: SVector::zeros(),
            m2: SMatrix::zeros(),
            n_seen: 0,
            empirical: false,
            frozen: false,
            late_updates: 0,
        }
    }

    pub fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> SVector<f64, D> {
        let z = SVector::<f64, D>::from_fn(|_, _| rng.sample(StandardNormal));
        (self.chol * z) * self.log_scale.exp()
    }

    /// Record one Metropolis outcome and the chain position after it.
    pub fn adapt(&mut self, accepted: bool, state: &SVector<f64, D>, iter: usize, schedule: &CovarianceSchedule) {
        if self.frozen {
            self.late_updates += 1;
            return;
        }
        let a = if accepted { 1.0 } else { 0.0 };
        self.log_scale =
            (self.log_scale + rm_step(self.n_adapt) * (a - self.target)).clamp(MIN_LOG_SCALE, MAX_LOG_SCALE);
        self.n_adapt += 1;

        if iter == schedule.restart_at {
            self.mean = SVector::zeros();
            self.m2 = SMatrix::zeros();
            self.n_seen = 0;
        }
        if iter >= schedule.collect_from {
            self.n_seen += 1;
            let delta = state - self.mean;
            self.mean += delta / self.n_seen as f64;
            let delta2 = state - self.mean;
            self.m2 += delta * delta2.transpose();
        }
        if iter.is_multiple_of(schedule.update_every) && self.n_seen >= schedule.min_samples {
            self.refresh_shape();
        }
    }

    fn refresh_shape(&mut self) {
        let mut cov = self.m2 / (self.n_seen - 1) as f64;
        let jitter = 1e-10 * (cov.trace() / D as f64).max(1e-300);
        for i in 0..D {
            cov[(i, i)] += jitter;
        }
        if let Some(chol) = cov.cholesky() {
            self.chol = chol.l();
            if !self.empirical {
                self.empirical = true;
                self.log_scale = (2.38 / (D as f64).sqrt()).ln();
            }
        }
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn late_updates(&self) -> u64 {
        self.late_updates
    }

    /// Proposal shape `L L^T` (unscaled).
    pub fn shape(&self) -> SMatrix<f64, D, D> {
        self.chol * self.chol.transpose()
    }

    pub fn uses_empirical_shape(&self) -> bool {
        self.empirical
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn scale_moves_toward_target() {
        let mut s = ScaleAdapter::new(1.0, 0.44);
        for _ in 0..200 {
            s.adapt(false);
        }
        assert!(s.scale() < 0.1);
        let before = s.scale();
        s.freeze();
        s.adapt(true);
        assert_eq!(s.scale(), before);
        assert_eq!(s.late_updates(), 1);
    }

    #[test]
    fn covariance_adapter_learns_shape() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut c = CovarianceAdapter::<2>::new([1.0, 1.0], 0.3);
        let schedule = CovarianceSchedule { collect_from: 0, restart_at: usize::MAX, update_every: 10, min_samples: 50 };
        for i in 0..2000 {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let s = SVector::<f64, 2>::new(3.0 * z1, 3.0 * z1 + 0.1 * z2);
            c.adapt(i % 3 == 0, &s, i, &schedule);
        }
        assert!(c.uses_empirical_shape());
        let l = c.chol;
        let cov = l * l.transpose();
        assert!((cov[(0, 0)] / 9.0 - 1.0).abs() < 0.15);
        assert!((cov[(0, 1)] / cov[(0, 0)] - 1.0).abs() < 0.05);
    }
}
