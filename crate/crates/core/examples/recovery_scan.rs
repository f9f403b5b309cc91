//! Repeated desk-scale fits: convergence, HPD coverage and drift detection.

use aging_rate::summary::{hpd_interval, p_direction};
use aging_rate::{generate_dataset, run_chains, split_rhat, PriorConfig, SamplerConfig, TruthScenario};

fn main() {
    let beta: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let reps: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(100);
    let (mut conv, mut cov_b, mut cov_beta, mut all, mut pd95) = (0, 0, 0, 0, 0);
    let seeds: Vec<u64> = match std::env::var("SEEDS") {
        Ok(list) => list.split(',').map(|s| s.parse().unwrap()).collect(),
        Err(_) => (0..reps).collect(),
    };
    let reps = seeds.len();
    for seed in seeds {
        let sc = TruthScenario { seed: 1000 + seed, beta, ..TruthScenario::default() };
        let sim = generate_dataset(&sc).unwrap();
        let env = |k: &str, d: usize| std::env::var(k).ok().and_then(|v| v.parse().ok()).unwrap_or(d);
        let base = SamplerConfig::default();
        let cfg = SamplerConfig {
            seed: 7 + seed,
            cohort_sweeps_per_iter: env("SWEEPS", base.cohort_sweeps_per_iter),
            log_cohort_sweeps_per_iter: env("LOG_SWEEPS", base.log_cohort_sweeps_per_iter),
            ..base
        };
        let d = run_chains(&sim.dataset, &cfg, &PriorConfig::default()).unwrap();
        let mut worst = 0.0f64;
        for j in 0..d.width() {
            worst = worst.max(split_rhat(&d.column(j)).unwrap().value);
        }
        let b: Vec<f64> = d.column(d.log_b_index()).concat().into_iter().map(f64::exp).collect();
        let be = d.column(d.beta_index()).concat();
        let (bl, bh) = hpd_interval(&b, 0.95).unwrap();
        let (el, eh) = hpd_interval(&be, 0.95).unwrap();
        let pd = p_direction(&be).unwrap();
        let c = worst < 1.02;
        let cb = bl <= 0.105 && 0.105 <= bh;
        let ce = el <= beta && beta <= eh;
        conv += c as u32;
        cov_b += cb as u32;
        cov_beta += ce as u32;
        all += (c && cb && (beta != 0.0 || ce)) as u32;
        pd95 += (pd > 0.95 && be.iter().sum::<f64>() > 0.0) as u32;
        println!("seed {seed}: acc {:.3} rhat {worst:.4} b [{bl:.4},{bh:.4}] beta [{el:.4},{eh:.4}] pd {pd:.3}", d.acceptance()[0].walk_block);
    }
    println!("converged {conv} cover_b {cov_b} cover_beta {cov_beta} joint {all} pd95 {pd95} of {reps}");
}
