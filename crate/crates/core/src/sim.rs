//! Monte Carlo play of a fixed strategy pair.
//!
//! Run `r` of a simulation with seed `s` draws from `ChaCha8Rng` seeded with
//! `seed_from_u64(s)` on stream `r`, so every run is reproducible on its own
//! and runs can be evaluated in any order. Each draw is one `f64` in
//! `[0, 1)` mapped to an index by inverse CDF over the canonical order:
//! first `k_1`, then per stage `a_t`, `b_t`, and `k_{t+1}` (the last stage
//! draws no successor).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{history_count, GameSpec, InformedStrategy, UninformedStrategy};

/// Inverse-CDF draw: the first index whose cumulative mass exceeds `u`.
/// Zero-probability entries are never returned.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageRecord {
    pub state: usize,
    pub p1_action: usize,
    pub p2_action: usize,
    pub payoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayTranscript {
    pub seed: u64,
    pub run: u64,
    pub stages: Vec<StageRecord>,
    /// Sum of the stage payoffs in stage order.
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub runs: u64,
    pub mean: f64,
    pub std_error: f64,
    /// Exact expected total payoff of the strategy pair; equals the game
    /// value when both strategies are security strategies.
    pub game_value: f64,
    pub seed: u64,
}

/// The generator for run `run` of a simulation seeded with `seed`.
pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

fn check_pair(spec: &GameSpec, sigma: &InformedStrategy, tau: &UninformedStrategy) -> Result<()> {
    if sigma.horizon() < spec.horizon()
        || sigma.num_states() != spec.num_states()
        || sigma.num_actions() != spec.num_actions_p1()
        || tau.horizon() < spec.horizon()
        || tau.num_actions_p1() != spec.num_actions_p1()
        || tau.num_actions_p2() != spec.num_actions_p2()
    {
        return Err(Error::Strategy("strategy dimensions do not match the game".into()));
    }
    Ok(())
}

/// Plays one run with the given generator.
pub fn play_once<R: Rng + ?Sized>(
    spec: &GameSpec,
    sigma: &InformedStrategy,
    tau: &UninformedStrategy,
    rng: &mut R,
) -> Result<Vec<StageRecord>> {
    let (na, n) = (spec.num_actions_p1(), spec.horizon());
    let mut stages = Vec::with_capacity(n);
    let mut k = sample_index(spec.initial().probs(), rng.gen());
    let mut h = 0;
    for t in 1..=n {
        let x = sigma.get(t, h, k);
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::Strategy(format!(
                "sigma is the zero vector at reached stage {t}, history {h}, state {k}"
            )));
        }
        let a = sample_index(x, rng.gen());
        let b = sample_index(tau.get(t, h), rng.gen());
        stages.push(StageRecord {
            state: k,
            p1_action: a,
            p2_action: b,
            payoff: spec.payoff(k, a, b),
        });
        if t < n {
            k = sample_index(&spec.transition_matrix(a)[k], rng.gen());
            h = h * na + a;
        }
    }
    Ok(stages)
}

/// Transcript of run `run` under `seed`.
pub fn transcript(
    spec: &GameSpec,
    sigma: &InformedStrategy,
    tau: &UninformedStrategy,
    seed: u64,
    run: u64,
) -> Result<PlayTranscript> {
    check_pair(spec, sigma, tau)?;
    let stages = play_once(spec, sigma, tau, &mut run_rng(seed, run))?;
    let total = stages.iter().map(|s| s.payoff).sum();
    Ok(PlayTranscript {
        seed,
        run,
        stages,
        total,
    })
}

/// Exact expectation of the total payoff under `(sigma, tau)`.
pub fn expected_payoff(spec: &GameSpec, sigma: &InformedStrategy, tau: &UninformedStrategy) -> Result<f64> {
    check_pair(spec, sigma, tau)?;
    let (nk, na, nb, n) = (spec.num_states(), spec.num_actions_p1(), spec.num_actions_p2(), spec.horizon());
    let mut weights = spec.initial().probs().to_vec();
    let mut total = 0.0;
    for t in 1..=n {
        let count = history_count(na, t);
        let mut next = vec![0.0; if t < n { count * na * nk } else { 0 }];
        for h in 0..count {
            let y = tau.get(t, h);
            for k in 0..nk {
                let w = weights[h * nk + k];
                if w == 0.0 {
                    continue;
                }
                let x = sigma.get(t, h, k);
                for a in 0..na {
                    let wa = w * x[a];
                    if wa == 0.0 {
                        continue;
                    }
                    total += wa * (0..nb).map(|b| y[b] * spec.payoff(k, a, b)).sum::<f64>();
                    if t < n {
                        for kn in 0..nk {
                            next[(h * na + a) * nk + kn] += wa * spec.transition(a, k, kn);
                        }
                    }
                }
            }
        }
        weights = next;
    }
    Ok(total)
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Runs `runs` independent plays and reports the empirical mean payoff.
pub fn simulate(
    spec: &GameSpec,
    sigma: &InformedStrategy,
    tau: &UninformedStrategy,
    runs: u64,
    seed: u64,
) -> Result<SimulationReport> {
    if runs == 0 {
        return Err(Error::Validation("runs must be at least 1".into()));
    }
    check_pair(spec, sigma, tau)?;
    let totals = (0..runs)
        .into_par_iter()
        .map(|r| {
            let stages = play_once(spec, sigma, tau, &mut run_rng(seed, r))?;
            Ok(stages.iter().map(|s| s.payoff).sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = runs as f64;
    let mean = pairwise_sum(&totals) / n;
    let std_error = if runs > 1 {
        let dev: Vec<f64> = totals.iter().map(|x| (x - mean) * (x - mean)).collect();
        (pairwise_sum(&dev) / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    Ok(SimulationReport {
        runs,
        mean,
        std_error,
        game_value: expected_payoff(spec, sigma, tau)?,
        seed,
    })
}
