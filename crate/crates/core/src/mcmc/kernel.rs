//! Metropolis-within-Gibbs kernel for the cohort model.
//!
//! Free coordinates are `ln a_t`, `ln gamma_t`, the innovations `w_t`, `log_b`,
//! `beta` and `ln sigma_rw`; the target is the posterior of the constrained
//! parameters plus the log-Jacobian of every log transform. One iteration runs
//!
//! * sweeps of 3-d block updates per cohort of `(ln a_t, gamma_t, b_t)`, where
//!   moving `b_t` means `w_t += d, w_{t+1} -= d` with `d` the change in
//!   `ln b_t` (no other slope changes), plus log-scale sweeps that move
//!   `(ln a_t, ln gamma_t)` and `ln b_t` separately;
//! * a 2-d block update of `(log_b, beta)` with every `b_t` held fixed by
//!   compensating the innovations, which touches only prior terms;
//! * a scalar update of `ln sigma_rw`;
//! * a 2-d block update of `(log_b, beta)` with the innovations fixed, which
//!   shifts the level and trend of every slope at once.
//!
//! All moves are symmetric random walks in their own coordinates; the linear
//! cohort block carries the Jacobian back to the log scale.

use nalgebra::SVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::adapt::{CovarianceAdapter, CovarianceSchedule, ScaleAdapter};
use super::draws::{push_row, ChainAcceptance, PosteriorDraws};
use super::SamplerConfig;
use crate::error::{Error, Result};
use crate::latent::LatentWalk;
use crate::posterior::{cohort_cells_loglik, CohortDataset, ModelParameters, PriorConfig};

const LN_2: f64 = std::f64::consts::LN_2;

struct ChainState<'a> {
    data: &'a CohortDataset,
    priors: &'a PriorConfig,
    ln_a: Vec<f64>,
    ln_gamma: Vec<f64>,
    w: Vec<f64>,
    ln_slope: Vec<f64>,
    log_b: f64,
    beta: f64,
    ln_sigma: f64,
    ll: Vec<f64>,
    ll_new: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> ChainState<'a> {
    fn from_parameters(data: &'a CohortDataset, priors: &'a PriorConfig, p: &ModelParameters) -> Self {
        let mut s = Self {
            data,
            priors,
            ln_a: p.a.iter().map(|v| v.ln()).collect(),
            ln_gamma: p.gamma.iter().map(|v| v.ln()).collect(),
            w: p.walk.w.clone(),
            ln_slope: p.walk.log_slopes(),
            log_b: p.walk.log_b,
            beta: p.walk.beta,
            ln_sigma: p.walk.sigma_rw.ln(),
            ll: vec![0.0; p.a.len()],
            ll_new: vec![0.0; p.a.len()],
            scratch: vec![0.0; 2 * data.n_ages()],
        };
        for t in 0..s.ll.len() {
            s.ll[t] = s.cohort_ll(t, s.ln_a[t], s.ln_gamma[t], s.ln_slope[t]);
        }
        s
    }

    fn cohort_ll(&mut self, t: usize, ln_a: f64, ln_gamma: f64, ln_slope: f64) -> f64 {
        let b = ln_slope.exp();
        if !b.is_finite() || b <= 0.0 {
            return f64::NEG_INFINITY;
        }
        cohort_cells_loglik(self.data.cohort_cells(t), ln_a.exp(), b, ln_gamma.exp(), &mut self.scratch)
    }

    fn ln_prior_a(&self, ln_a: f64) -> f64 {
        self.priors.ln_a(ln_a.exp()) + ln_a
    }

    fn ln_prior_gamma(&self, ln_g: f64) -> f64 {
        self.priors.ln_gamma_t(ln_g.exp()) + ln_g
    }

    fn ln_prior_sigma(&self, ln_s: f64) -> f64 {
        self.priors.ln_sigma_rw(ln_s.exp()) + ln_s
    }

    fn abs_innovations(&self) -> f64 {
        self.w.iter().map(|w| w.abs()).sum()
    }

    fn log_target(&self) -> f64 {
        let sigma = self.ln_sigma.exp();
        let n = self.w.len() as f64;
        let walk = -n * (LN_2 + self.ln_sigma) - self.abs_innovations() / sigma;
        let cohorts: f64 = (0..self.w.len())
            .map(|t| self.ll[t] + self.ln_prior_a(self.ln_a[t]) + self.ln_prior_gamma(self.ln_gamma[t]))
            .sum();
        cohorts
            + walk
            + self.priors.ln_log_b(self.log_b)
            + self.priors.ln_beta(self.beta)
            + self.ln_prior_sigma(self.ln_sigma)
    }

    /// Block coordinates `(ln a_t, gamma_t, b_t)`. Frailty and slope enter on
    /// the natural scale because the data pin down roughly `b_t - a_t gamma_t`
    /// (the hazard's log-slope at the first age), a ridge that is straight in
    /// these coordinates and curved in logs.
    fn cohort_block(&self, t: usize) -> SVector<f64, 3> {
        SVector::<f64, 3>::new(self.ln_a[t], self.ln_gamma[t].exp(), self.ln_slope[t].exp())
    }

    fn cohort_move<R: Rng>(&mut self, t: usize, step: &SVector<f64, 3>, rng: &mut R) -> bool {
        let (gamma, b) = (self.ln_gamma[t].exp() + step[1], self.ln_slope[t].exp() + step[2]);
        if !(gamma > 0.0 && b > 0.0) {
            return false;
        }
        let (ln_g, ln_s) = (gamma.ln(), b.ln());
        // the target in block coordinates lacks the ln gamma and ln b Jacobians
        let jacobian = -(ln_g - self.ln_gamma[t]) - (ln_s - self.ln_slope[t]);
        self.cohort_update(t, self.ln_a[t] + step[0], ln_g, ln_s, jacobian, rng)
    }

    /// `(ln a_t, ln gamma_t)` with the slope fixed.
    fn frailty_move_log<R: Rng>(&mut self, t: usize, step: &SVector<f64, 2>, rng: &mut R) -> bool {
        self.cohort_update(t, self.ln_a[t] + step[0], self.ln_gamma[t] + step[1], self.ln_slope[t], 0.0, rng)
    }

    /// `ln b_t` alone, through `w_t += d, w_{t+1} -= d`.
    fn slope_move_log<R: Rng>(&mut self, t: usize, d: f64, rng: &mut R) -> bool {
        self.cohort_update(t, self.ln_a[t], self.ln_gamma[t], self.ln_slope[t] + d, 0.0, rng)
    }

    /// Metropolis step to a new `(ln a_t, ln gamma_t, ln b_t)`; `ln b_t` moves
    /// through `w_t += d, w_{t+1} -= d`. `extra` is added to the log ratio.
    fn cohort_update<R: Rng>(&mut self, t: usize, ln_a: f64, ln_g: f64, ln_s: f64, extra: f64, rng: &mut R) -> bool {
        let d_ln_s = ln_s - self.ln_slope[t];
        let sigma = self.ln_sigma.exp();
        let mut delta = extra + self.ln_prior_a(ln_a) - self.ln_prior_a(self.ln_a[t]) + self.ln_prior_gamma(ln_g)
            - self.ln_prior_gamma(self.ln_gamma[t]);
        let w_t = self.w[t] + d_ln_s;
        delta += (self.w[t].abs() - w_t.abs()) / sigma;
        let w_next = self.w.get(t + 1).map(|w| w - d_ln_s);
        if let Some(wn) = w_next {
            delta += (self.w[t + 1].abs() - wn.abs()) / sigma;
        }
        if !delta.is_finite() {
            return false;
        }
        let ll = self.cohort_ll(t, ln_a, ln_g, ln_s);
        delta += ll - self.ll[t];
        let accept = delta.is_finite() && rng.random::<f64>().ln() < delta;
        if accept {
            self.ln_a[t] = ln_a;
            self.ln_gamma[t] = ln_g;
            self.ln_slope[t] = ln_s;
            self.w[t] = w_t;
            if let Some(wn) = w_next {
                self.w[t + 1] = wn;
            }
            self.ll[t] = ll;
        }
        accept
    }

    /// `log_b += d0, beta += d1` with the innovations adjusted so that every `b_t` stays put.
    fn walk_move<R: Rng>(&mut self, step: &SVector<f64, 2>, rng: &mut R) -> bool {
        let (d_log_b, d_beta) = (step[0], step[1]);
        let sigma = self.ln_sigma.exp();
        let log_b = self.log_b + d_log_b;
        let beta = self.beta + d_beta;
        let mut delta = self.priors.ln_log_b(log_b) - self.priors.ln_log_b(self.log_b) + self.priors.ln_beta(beta)
            - self.priors.ln_beta(self.beta);
        let shifted = |t: usize, w: f64| if t == 0 { w - d_log_b - d_beta } else { w - d_beta };
        let abs_change: f64 = self.w.iter().enumerate().map(|(t, &w)| w.abs() - shifted(t, w).abs()).sum();
        delta += abs_change / sigma;
        let accept = delta.is_finite() && rng.random::<f64>().ln() < delta;
        if accept {
            self.log_b = log_b;
            self.beta = beta;
            for (t, w) in self.w.iter_mut().enumerate() {
                *w = shifted(t, *w);
            }
        }
        accept
    }

    /// `log_b += d0, beta += d1` with the innovations fixed, so every slope
    /// moves: `ln b_t += d0 + (t + 1) d1`. Costs a likelihood pass over all
    /// cohorts; it is what lets the level and trend wander when the data are
    /// weak and the innovations tightly scaled.
    fn trend_move<R: Rng>(&mut self, step: &SVector<f64, 2>, rng: &mut R) -> bool {
        let (log_b, beta) = (self.log_b + step[0], self.beta + step[1]);
        let mut delta = self.priors.ln_log_b(log_b) - self.priors.ln_log_b(self.log_b) + self.priors.ln_beta(beta)
            - self.priors.ln_beta(self.beta);
        if !delta.is_finite() {
            return false;
        }
        let mut ll_new = std::mem::take(&mut self.ll_new);
        for (t, slot) in ll_new.iter_mut().enumerate() {
            let ln_s = self.ln_slope[t] + step[0] + (t + 1) as f64 * step[1];
            *slot = self.cohort_ll(t, self.ln_a[t], self.ln_gamma[t], ln_s);
            delta += *slot - self.ll[t];
        }
        let accept = delta.is_finite() && rng.random::<f64>().ln() < delta;
        if accept {
            self.log_b = log_b;
            self.beta = beta;
            for (t, v) in self.ln_slope.iter_mut().enumerate() {
                *v += step[0] + (t + 1) as f64 * step[1];
            }
            std::mem::swap(&mut self.ll, &mut ll_new);
        }
        self.ll_new = ll_new;
        accept
    }

    fn sigma_move<R: Rng>(&mut self, step: f64, rng: &mut R) -> bool {
        let ln_s = self.ln_sigma + step;
        let n = self.w.len() as f64;
        let abs = self.abs_innovations();
        let walk = |ln_s: f64| -n * (LN_2 + ln_s) - abs / ln_s.exp();
        let delta = walk(ln_s) - walk(self.ln_sigma) + self.ln_prior_sigma(ln_s) - self.ln_prior_sigma(self.ln_sigma);
        let accept = delta.is_finite() && rng.random::<f64>().ln() < delta;
        if accept {
            self.ln_sigma = ln_s;
        }
        accept
    }

    fn parameters(&self) -> ModelParameters {
        ModelParameters {
            a: self.ln_a.iter().map(|v| v.exp()).collect(),
            gamma: self.ln_gamma.iter().map(|v| v.exp()).collect(),
            walk: LatentWalk {
                log_b: self.log_b,
                beta: self.beta,
                sigma_rw: self.ln_sigma.exp(),
                w: self.w.clone(),
            },
        }
    }
}

/// Starting point in `(a_t, gamma_t, ln b_t)` coordinates, before jitter.
struct Start {
    a: Vec<f64>,
    gamma: Vec<f64>,
    ln_slope: Vec<f64>,
}

/// Weighted least squares of `ln(D/E)` on the age midpoint with weights `D`,
/// i.e. a frailty-free Gompertz fit of one cohort. `None` when fewer than
/// three ages have deaths or the fit is implausible.
fn gompertz_fit(data: &CohortDataset, t: usize) -> Option<(f64, f64)> {
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0, 0);
    for c in data.cohort_cells(t) {
        if c.deaths <= 0.0 || !c.ln_exposure.is_finite() {
            continue;
        }
        let (x, y, w) = (c.age as f64 + 0.5, c.deaths.ln() - c.ln_exposure, c.deaths);
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
        n += 1;
    }
    if n < 3 {
        return None;
    }
    let den = sw * sxx - sx * sx;
    if !(den > 0.0) {
        return None;
    }
    let b = (sw * sxy - sx * sy) / den;
    let ln_a = (sy - b * sx) / sw;
    (b > 0.0 && b < 1.0 && ln_a.is_finite()).then(|| (ln_a.exp().clamp(1e-6, 1.0), b))
}

/// Nelder-Mead maximisation of `f` from `x0` with initial edge `step`.
fn nelder_mead<const D: usize>(mut f: impl FnMut(&[f64; D]) -> f64, x0: [f64; D], step: f64, max_evals: usize) -> [f64; D] {
    let mut pts: Vec<([f64; D], f64)> = Vec::with_capacity(D + 1);
    pts.push((x0, f(&x0)));
    for i in 0..D {
        let mut x = x0;
        x[i] += step;
        pts.push((x, f(&x)));
    }
    let mut evals = D + 1;
    let value = |v: f64| if v.is_nan() { f64::NEG_INFINITY } else { v };
    while evals < max_evals {
        pts.sort_by(|p, q| value(q.1).total_cmp(&value(p.1)));
        let mut centroid = [0.0; D];
        for (x, _) in &pts[..D] {
            for i in 0..D {
                centroid[i] += x[i] / D as f64;
            }
        }
        let along = |c: f64| -> [f64; D] {
            let mut x = [0.0; D];
            for i in 0..D {
                x[i] = centroid[i] + c * (pts[D].0[i] - centroid[i]);
            }
            x
        };
        let r = along(-1.0);
        let fr = value(f(&r));
        evals += 1;
        if fr > value(pts[0].1) {
            let e = along(-2.0);
            let fe = value(f(&e));
            evals += 1;
            pts[D] = if fe > fr { (e, fe) } else { (r, fr) };
        } else if fr > value(pts[D - 1].1) {
            pts[D] = (r, fr);
        } else {
            let c = along(0.5);
            let fc = value(f(&c));
            evals += 1;
            if fc > value(pts[D].1) {
                pts[D] = (c, fc);
            } else {
                let best = pts[0].0;
                for p in pts.iter_mut().skip(1) {
                    for (x, b) in p.0.iter_mut().zip(best) {
                        *x = b + 0.5 * (*x - b);
                    }
                    p.1 = f(&p.0);
                }
                evals += D;
            }
        }
    }
    pts.sort_by(|p, q| value(q.1).total_cmp(&value(p.1)));
    pts[0].0
}

/// Per-cohort gamma-Gompertz fits: cohort likelihood plus the `a_t` and
/// `gamma_t` priors, maximised from a Gompertz fit where the data allow one.
/// Cohorts without data borrow the median slope and start from the crude rate.
fn base_start(data: &CohortDataset, priors: &PriorConfig) -> Start {
    let n = data.n_cohorts();
    let fits: Vec<Option<(f64, f64)>> = (0..n).map(|t| gompertz_fit(data, t)).collect();
    let mut slopes: Vec<f64> = fits.iter().flatten().map(|f| f.1).collect();
    slopes.sort_by(f64::total_cmp);
    let pooled = if slopes.is_empty() { 0.1 } else { slopes[slopes.len() / 2] };
    let mut start = Start { a: Vec::with_capacity(n), gamma: Vec::with_capacity(n), ln_slope: Vec::with_capacity(n) };
    let mut scratch = vec![0.0; 2 * data.n_ages()];
    for (t, fit) in fits.iter().enumerate() {
        let (a, b) = fit.unwrap_or_else(|| {
            let a = match data.crude_rate_first_age(t) {
                Some(r) if r > 0.0 && r.is_finite() => r.clamp(1e-5, 1.0),
                _ => 0.05,
            };
            (a, pooled)
        });
        let (mut a, mut g, mut b) = (a, 0.05_f64, b.clamp(0.01, 0.5));
        if fit.is_some() {
            let cells = data.cohort_cells(t);
            let best = nelder_mead(
                |x: &[f64; 3]| {
                    let (ea, eg, eb) = (x[0].exp(), x[1].exp(), x[2].exp());
                    if !(eb > 1e-3 && eb < 2.0 && eg > 1e-4 && eg < 10.0) {
                        return f64::NEG_INFINITY;
                    }
                    let ll = cohort_cells_loglik(cells, ea, eb, eg, &mut scratch);
                    ll + priors.ln_a(ea) + x[0] + priors.ln_gamma_t(eg) + x[1]
                },
                [a.ln(), g.ln(), b.ln()],
                0.2,
                600,
            );
            (a, g, b) = (best[0].exp(), best[1].exp(), best[2].exp());
        }
        start.a.push(a);
        start.gamma.push(g);
        start.ln_slope.push(b.clamp(0.01, 0.5).ln());
    }
    start
}

fn jitter<R: Rng>(s: &Start, rng: &mut R) -> ModelParameters {
    let mut n = |sd: f64| -> f64 { sd * rng.sample::<f64, _>(StandardNormal) };
    let ln_slope: Vec<f64> = s.ln_slope.iter().map(|v| v + n(0.005)).collect();
    let beta = n(0.005);
    let mut w: Vec<f64> = ln_slope.windows(2).map(|p| p[1] - p[0] - beta).collect();
    w.insert(0, 0.0);
    let spread = w.iter().skip(1).map(|v| v.abs()).sum::<f64>() / (w.len().max(2) - 1) as f64;
    ModelParameters {
        a: s.a.iter().map(|a| a * n(0.02).exp()).collect(),
        gamma: s.gamma.iter().map(|g| g * n(0.1).exp()).collect(),
        walk: LatentWalk {
            log_b: ln_slope[0],
            beta,
            sigma_rw: spread.clamp(0.005, 1.0) * n(0.2).exp(),
            w,
        },
    }
}

struct ChainOutput {
    rows: Vec<f64>,
    acceptance: ChainAcceptance,
    late_adaptations: u64,
}

fn run_chain(data: &CohortDataset, priors: &PriorConfig, cfg: &SamplerConfig, chain: usize) -> Result<ChainOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chain as u64);
    let base = base_start(data, priors);

    let mut state = None;
    for _ in 0..=cfg.init_retries {
        let s = ChainState::from_parameters(data, priors, &jitter(&base, &mut rng));
        if s.log_target().is_finite() {
            state = Some(s);
            break;
        }
    }
    let mut state = state.ok_or_else(|| {
        Error::Initialization(format!(
            "chain {chain}: log-posterior was -inf at all {} jittered starts",
            cfg.init_retries + 1
        ))
    })?;

    let t_len = data.n_cohorts();
    let schedule = CovarianceSchedule::for_warmup(cfg.n_warmup);
    let mut cohort_adapters: Vec<CovarianceAdapter<3>> =
        (0..t_len).map(|_| CovarianceAdapter::new([0.02, 0.02, 0.001], cfg.block_target_accept)).collect();
    // log-scale sweeps split the block: once the data are weak, the marginal
    // spread of ln b_t (which the covariance adapter would learn) is far wider
    // than its spread given the neighbouring slopes
    let mut frailty_adapters: Vec<CovarianceAdapter<2>> =
        (0..t_len).map(|_| CovarianceAdapter::new([0.02, 0.1], cfg.block_target_accept)).collect();
    let mut slope_adapters: Vec<ScaleAdapter> = (0..t_len).map(|_| ScaleAdapter::new(0.01, cfg.target_accept)).collect();
    let mut walk_adapter = CovarianceAdapter::<2>::new([0.02, 0.005], cfg.block_target_accept);
    let mut sigma_adapter = ScaleAdapter::new(0.1, cfg.target_accept);
    let mut trend_adapter = CovarianceAdapter::<2>::new([0.005, 0.0005], cfg.block_target_accept);

    let retained = cfg.retained_per_chain();
    let mut rows = Vec::with_capacity(retained * (3 * t_len + 3));
    let mut cohort_acc = vec![0u64; t_len];
    let (mut walk_acc, mut sigma_acc, mut trend_acc) = (0u64, 0u64, 0u64);

    for iter in 0..cfg.n_iter {
        let warmup = iter < cfg.n_warmup;
        for _ in 0..cfg.log_cohort_sweeps_per_iter {
            for t in 0..t_len {
                let step = frailty_adapters[t].propose(&mut rng);
                let accepted = state.frailty_move_log(t, &step, &mut rng);
                if warmup {
                    let x = SVector::<f64, 2>::new(state.ln_a[t], state.ln_gamma[t]);
                    frailty_adapters[t].adapt(accepted, &x, iter, &schedule);
                }
                let d = slope_adapters[t].propose(&mut rng);
                let accepted = state.slope_move_log(t, d, &mut rng);
                if warmup {
                    slope_adapters[t].adapt(accepted);
                }
            }
        }
        for _ in 0..cfg.cohort_sweeps_per_iter {
            for (t, adapter) in cohort_adapters.iter_mut().enumerate() {
                let step = adapter.propose(&mut rng);
                let accepted = state.cohort_move(t, &step, &mut rng);
                if warmup {
                    adapter.adapt(accepted, &state.cohort_block(t), iter, &schedule);
                } else if accepted {
                    cohort_acc[t] += 1;
                }
            }
        }
        for _ in 0..cfg.walk_moves_per_iter {
            let step = walk_adapter.propose(&mut rng);
            let accepted = state.walk_move(&step, &mut rng);
            if warmup {
                walk_adapter.adapt(accepted, &SVector::<f64, 2>::new(state.log_b, state.beta), iter, &schedule);
            } else if accepted {
                walk_acc += 1;
            }

            let step = sigma_adapter.propose(&mut rng);
            let accepted = state.sigma_move(step, &mut rng);
            if warmup {
                sigma_adapter.adapt(accepted);
            } else if accepted {
                sigma_acc += 1;
            }
        }
        for _ in 0..cfg.trend_moves_per_iter {
            let step = trend_adapter.propose(&mut rng);
            let accepted = state.trend_move(&step, &mut rng);
            if warmup {
                trend_adapter.adapt(accepted, &SVector::<f64, 2>::new(state.log_b, state.beta), iter, &schedule);
            } else if accepted {
                trend_acc += 1;
            }
        }
        if iter + 1 == cfg.n_warmup {
            cohort_adapters.iter_mut().for_each(CovarianceAdapter::freeze);
            frailty_adapters.iter_mut().for_each(CovarianceAdapter::freeze);
            slope_adapters.iter_mut().for_each(ScaleAdapter::freeze);
            walk_adapter.freeze();
            sigma_adapter.freeze();
            trend_adapter.freeze();
        }
        if !warmup {
            push_row(&mut rows, &state.parameters());
        }
    }

    let late = cohort_adapters.iter().map(CovarianceAdapter::late_updates).sum::<u64>()
        + frailty_adapters.iter().map(CovarianceAdapter::late_updates).sum::<u64>()
        + slope_adapters.iter().map(ScaleAdapter::late_updates).sum::<u64>()
        + walk_adapter.late_updates()
        + sigma_adapter.late_updates()
        + trend_adapter.late_updates();
    let n = retained as f64;
    let moves = (retained * cfg.walk_moves_per_iter) as f64;
    Ok(ChainOutput {
        rows,
        acceptance: ChainAcceptance {
            cohort_blocks: cohort_acc.iter().map(|&c| c as f64 / (n * cfg.cohort_sweeps_per_iter as f64)).collect(),
            walk_block: walk_acc as f64 / moves,
            sigma_rw: sigma_acc as f64 / moves,
            trend: (cfg.trend_moves_per_iter > 0)
                .then(|| trend_acc as f64 / (n * cfg.trend_moves_per_iter as f64)),
        },
        late_adaptations: late,
    })
}

/// Run `cfg.n_chains` independent chains; chain `k` uses stream `k` of a
/// ChaCha generator seeded with `cfg.seed`, so results do not depend on
/// thread scheduling.
pub fn run_chains(data: &CohortDataset, cfg: &SamplerConfig, priors: &PriorConfig) -> Result<PosteriorDraws> {
    cfg.validate().map_err(Error::Argument)?;
    priors.validate().map_err(Error::Argument)?;

    #[cfg(feature = "parallel")]
    let outputs: Vec<Result<ChainOutput>> = {
        use rayon::prelude::*;
        (0..cfg.n_chains).into_par_iter().map(|c| run_chain(data, priors, cfg, c)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outputs: Vec<Result<ChainOutput>> = (0..cfg.n_chains).map(|c| run_chain(data, priors, cfg, c)).collect();

    let mut rows = Vec::with_capacity(cfg.n_chains);
    let mut acceptance = Vec::with_capacity(cfg.n_chains);
    let mut late = 0;
    for out in outputs {
        let out = out?;
        rows.push(out.rows);
        acceptance.push(out.acceptance);
        late += out.late_adaptations;
    }
    let seeds = (0..cfg.n_chains as u64).map(|c| cfg.seed ^ (c << 56)).collect();
    Ok(PosteriorDraws::new(data.cohorts().to_vec(), rows, acceptance, seeds, late))
}
