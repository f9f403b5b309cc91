#![allow(dead_code)]

use aging_rate::effective_sample_size;

pub type Cdf<'a> = Box<dyn Fn(f64) -> f64 + 'a>;

/// Two-sided one-sample Kolmogorov-Smirnov statistic and asymptotic p-value
/// (Stephens' small-sample correction).
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p = (1..=100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum::<f64>();
    (d, p.clamp(0.0, 1.0))
}

/// Every chain thinned so the pooled sample has roughly ESS members, capped
/// at `cap`: the ESS estimate misses slow components in the tails, and a KS
/// test on thousands of mildly dependent draws is stricter than its nominal level.
pub fn thin_to_ess(chains: &[Vec<f64>], cap: usize) -> Vec<f64> {
    let ess = effective_sample_size(chains).unwrap().value.min(cap as f64);
    let total: usize = chains.iter().map(Vec::len).sum();
    let step = ((total as f64 / ess).ceil() as usize).max(1);
    chains.iter().flat_map(|c| c.iter().step_by(step).copied()).collect()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn sd(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}
