//! Convergence diagnostics on per-chain scalar series.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// A diagnostic value; `degenerate` marks zero-variance input, where `value` is NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub value: f64,
    pub degenerate: bool,
}

impl Diagnostic {
    fn degenerate() -> Self {
        Self { value: f64::NAN, degenerate: true }
    }

    fn ok(value: f64) -> Self {
        Self { value, degenerate: false }
    }
}

fn is_constant(chains: &[Vec<f64>]) -> bool {
    let mut it = chains.iter().flatten();
    match it.next() {
        Some(first) => it.all(|v| v == first),
        None => true,
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// Classic potential scale reduction on equal-length chains.
fn classic_rhat(chains: &[Vec<f64>]) -> f64 {
    let n = chains[0].len() as f64;
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let within = mean(&chains.iter().map(|c| sample_variance(c)).collect::<Vec<_>>());
    let between = n * sample_variance(&means);
    let var_plus = (n - 1.0) / n * within + between / n;
    (var_plus / within).sqrt()
}

/// Average ranks (1-based) of the pooled values, ties sharing their mean rank.
fn pooled_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            ranks[order[k]] = r;
        }
        i = j + 1;
    }
    ranks
}

fn split_halves(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    let half = n / 2;
    chains
        .iter()
        .flat_map(|c| {
            let c = &c[..n];
            // the middle draw of an odd-length chain is dropped
            [c[..half].to_vec(), c[n - half..].to_vec()]
        })
        .collect()
}

/// Rank-normalised split R-hat.
///
/// Chains are trimmed to the shortest, split in halves, pooled and ranked;
/// ranks become normal scores `Phi^-1((r - 3/8) / (S + 1/4))` and the classic
/// R-hat is computed on the transformed halves.
pub fn split_rhat(chains: &[Vec<f64>]) -> Result<Diagnostic> {
    if chains.len() < 2 {
        return Err(Error::Diagnostic(format!("R-hat needs >= 2 chains, got {}", chains.len())));
    }
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    if n < 4 {
        return Err(Error::Diagnostic(format!("R-hat needs >= 4 draws per chain, got {n}")));
    }
    if is_constant(chains) {
        return Ok(Diagnostic::degenerate());
    }
    let halves = split_halves(chains);
    let len = halves[0].len();
    let pooled: Vec<f64> = halves.iter().flatten().copied().collect();
    let ranks = pooled_ranks(&pooled);
    let s = pooled.len() as f64;
    let std_normal = Normal::standard();
    let z: Vec<f64> = ranks.iter().map(|r| std_normal.inverse_cdf((r - 0.375) / (s + 0.25))).collect();
    let transformed: Vec<Vec<f64>> = z.chunks(len).map(<[f64]>::to_vec).collect();
    let r = classic_rhat(&transformed);
    if r.is_finite() {
        Ok(Diagnostic::ok(r))
    } else {
        Ok(Diagnostic::degenerate())
    }
}

/// Multi-chain effective sample size with Geyer's initial positive sequence,
/// capped at the total number of draws.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> Result<Diagnostic> {
    if chains.is_empty() {
        return Err(Error::Diagnostic("ESS needs at least one chain".into()));
    }
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    if n < 4 {
        return Err(Error::Diagnostic(format!("ESS needs >= 4 draws per chain, got {n}")));
    }
    if is_constant(chains) {
        return Ok(Diagnostic::degenerate());
    }
    let m = chains.len();
    let chains: Vec<&[f64]> = chains.iter().map(|c| &c[..n]).collect();
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let centred: Vec<Vec<f64>> = chains
        .iter()
        .zip(&means)
        .map(|(c, mu)| c.iter().map(|v| v - mu).collect())
        .collect();
    let nf = n as f64;
    let autocov = |lag: usize| -> f64 {
        centred
            .iter()
            .map(|c| c[..n - lag].iter().zip(&c[lag..]).map(|(a, b)| a * b).sum::<f64>() / nf)
            .sum::<f64>()
            / m as f64
    };
    let acov0 = autocov(0);
    let within = acov0 * nf / (nf - 1.0);
    let mut var_plus = within * (nf - 1.0) / nf;
    if m > 1 {
        var_plus += sample_variance(&means);
    }
    if !(var_plus > 0.0) {
        return Ok(Diagnostic::degenerate());
    }
    let rho = |lag: usize| 1.0 - (within - autocov(lag)) / var_plus;

    let mut tau = 0.0;
    let mut prev_pair = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n {
        let r0 = if k == 0 { 1.0 } else { rho(2 * k) };
        let pair = r0 + rho(2 * k + 1);
        if pair < 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        tau += pair;
        prev_pair = pair;
        k += 1;
    }
    let tau = (2.0 * tau - 1.0).max(1.0 / (m as f64 * nf).log10().max(1.0));
    let ess = (m as f64 * nf / tau).min(m as f64 * nf);
    Ok(Diagnostic::ok(ess))
}
