//! Independent oracles: best responses by dynamic programming, brute-force
//! one- and two-stage values, and a suite runner that cross-checks the LP
//! solvers against them.
//!
//! Nothing in here builds the informed or uninformed LPs; the only LP used
//! is the generic matrix-game solver.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{history_count, ipow, Belief, GameSpec, InformedStrategy, UninformedStrategy};
use crate::informed::{self, belief_based_strategy};
use crate::lp::matrix_game_value;
use crate::uninformed::{self, regret_trace};

/// Reach weights above this at a node whose strategy is the zero vector are
/// an error. Sits above the extraction threshold with margin.
pub const REACHABLE_TOL: f64 = 1e-8;
/// Largest `|A|^|K|` accepted by the one-stage oracle.
pub const MAX_PROFILES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    Informed(InformedStrategy),
    Uninformed(UninformedStrategy),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseReport {
    /// Best payoff the opponent can reach against the fixed strategy.
    pub guaranteed_value: f64,
    /// Pure best response, ties broken toward the lowest action index.
    pub response: Response,
}

fn check_uninformed_shape(spec: &GameSpec, tau: &UninformedStrategy) -> Result<()> {
    if tau.horizon() < spec.horizon()
        || tau.num_actions_p1() != spec.num_actions_p1()
        || tau.num_actions_p2() != spec.num_actions_p2()
    {
        return Err(Error::Strategy(format!(
            "uninformed strategy covers {} stages over {}x{} actions, game needs {} stages over {}x{}",
            tau.horizon(),
            tau.num_actions_p1(),
            tau.num_actions_p2(),
            spec.horizon(),
            spec.num_actions_p1(),
            spec.num_actions_p2()
        )));
    }
    Ok(())
}

fn check_informed_shape(spec: &GameSpec, sigma: &InformedStrategy) -> Result<()> {
    if sigma.horizon() < spec.horizon()
        || sigma.num_states() != spec.num_states()
        || sigma.num_actions() != spec.num_actions_p1()
    {
        return Err(Error::Strategy(format!(
            "informed strategy covers {} stages over {} states and {} actions, game needs {}, {}, {}",
            sigma.horizon(),
            sigma.num_states(),
            sigma.num_actions(),
            spec.horizon(),
            spec.num_states(),
            spec.num_actions_p1()
        )));
    }
    Ok(())
}

/// Informed best response to a fixed `tau` by backward induction over
/// `(k, I_t)`.
pub fn best_response_informed(spec: &GameSpec, tau: &UninformedStrategy) -> Result<BestResponseReport> {
    check_uninformed_shape(spec, tau)?;
    let (nk, na, nb, n) = (spec.num_states(), spec.num_actions_p1(), spec.num_actions_p2(), spec.horizon());
    for t in 1..=n {
        for h in 0..history_count(na, t) {
            let y = tau.get(t, h);
            let sum: f64 = y.iter().sum();
            if y.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > 1e-7 {
                return Err(Error::Strategy(format!("tau at stage {t}, history {h} is not a distribution")));
            }
        }
    }
    let mut response = InformedStrategy::zeros(nk, na, n);
    // next[h * |K| + k] holds V_{t+1}(k, h)
    let mut next: Vec<f64> = Vec::new();
    for t in (1..=n).rev() {
        let count = history_count(na, t);
        let mut cur = vec![0.0; count * nk];
        for h in 0..count {
            let y = tau.get(t, h);
            for k in 0..nk {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for a in 0..na {
                    let mut v: f64 = (0..nb).map(|b| spec.payoff(k, a, b) * y[b]).sum();
                    if t < n {
                        let child = h * na + a;
                        v += (0..nk).map(|kn| spec.transition(a, k, kn) * next[child * nk + kn]).sum::<f64>();
                    }
                    if v > best {
                        best = v;
                        arg = a;
                    }
                }
                cur[h * nk + k] = best;
                let mut pure = vec![0.0; na];
                pure[arg] = 1.0;
                response.set(t, h, k, pure);
            }
        }
        next = cur;
    }
    let guaranteed_value = spec.initial().probs().iter().zip(&next).map(|(p, v)| p * v).sum();
    Ok(BestResponseReport {
        guaranteed_value,
        response: Response::Informed(response),
    })
}

/// Uninformed best response to a fixed `sigma`. Player 2's actions do not
/// move the state, so the reach weights `w_t(k, I_t)` depend on `sigma`
/// alone and the best response minimizes each `(t, I_t)` separately.
pub fn best_response_uninformed(spec: &GameSpec, sigma: &InformedStrategy) -> Result<BestResponseReport> {
    check_informed_shape(spec, sigma)?;
    let (nk, na, nb, n) = (spec.num_states(), spec.num_actions_p1(), spec.num_actions_p2(), spec.horizon());
    let mut response = UninformedStrategy::zeros(na, nb, n);
    let mut weights = spec.initial().probs().to_vec();
    let mut total = 0.0;
    for t in 1..=n {
        let count = history_count(na, t);
        let mut next = vec![0.0; if t < n { count * na * nk } else { 0 }];
        for h in 0..count {
            let mut cost = vec![0.0; nb];
            for k in 0..nk {
                let w = weights[h * nk + k];
                if w == 0.0 {
                    continue;
                }
                let x = sigma.get(t, h, k);
                if x.iter().all(|&v| v == 0.0) {
                    if w > REACHABLE_TOL {
                        return Err(Error::Strategy(format!(
                            "sigma is the zero vector at reachable stage {t}, history {h}, state {k} (weight {w:e})"
                        )));
                    }
                    continue;
                }
                for a in 0..na {
                    let wa = w * x[a];
                    if wa == 0.0 {
                        continue;
                    }
                    for (b, c) in cost.iter_mut().enumerate() {
                        *c += wa * spec.payoff(k, a, b);
                    }
                    if t < n {
                        let child = h * na + a;
                        for kn in 0..nk {
                            next[child * nk + kn] += wa * spec.transition(a, k, kn);
                        }
                    }
                }
            }
            let (arg, best) = cost
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |(ia, va), (i, &v)| if v < va { (i, v) } else { (ia, va) });
            total += best;
            let mut pure = vec![0.0; nb];
            pure[arg] = 1.0;
            response.set(t, h, pure);
        }
        weights = next;
    }
    Ok(BestResponseReport {
        guaranteed_value: total,
        response: Response::Uninformed(response),
    })
}

/// One-stage value at belief `p`, as a matrix game whose rows are the
/// state-contingent pure profiles `(a_k)_k` and whose entries are
/// `sum_k p(k) M_k(a_k, b)`.
pub fn brute_value_one_stage(spec: &GameSpec, p: &Belief) -> Result<f64> {
    let (nk, na, nb) = (spec.num_states(), spec.num_actions_p1(), spec.num_actions_p2());
    if p.len() != nk {
        return Err(Error::Validation(format!("belief has {} entries, game has {nk} states", p.len())));
    }
    // states with zero mass do not affect the value; drop them from the profile
    let support: Vec<usize> = (0..nk).filter(|&k| p.probs()[k] > 0.0).collect();
    let rows = na
        .checked_pow(support.len() as u32)
        .filter(|&r| r <= MAX_PROFILES)
        .ok_or_else(|| Error::Validation(format!("{na}^{} profiles exceed the oracle limit", support.len())))?;
    let mut matrix = vec![vec![0.0; nb]; rows];
    for (r, row) in matrix.iter_mut().enumerate() {
        let mut code = r;
        for &k in support.iter().rev() {
            let a = code % na;
            code /= na;
            for (b, slot) in row.iter_mut().enumerate() {
                *slot += p.probs()[k] * spec.payoff(k, a, b);
            }
        }
    }
    Ok(matrix_game_value(&matrix)?.value)
}

/// Value of the game with state-independent averaged payoff
/// `sum_k p(k) M_k`, where the informed player ignores its information.
pub fn non_revealing_value(spec: &GameSpec, p: &Belief) -> Result<f64> {
    let (na, nb) = (spec.num_actions_p1(), spec.num_actions_p2());
    let mut avg = vec![vec![0.0; nb]; na];
    for (k, &pk) in p.probs().iter().enumerate() {
        for a in 0..na {
            for b in 0..nb {
                avg[a][b] += pk * spec.payoff(k, a, b);
            }
        }
    }
    Ok(matrix_game_value(&avg)?.value)
}

/// Two-stage value bracket from a grid over `X in Delta(A)^|K|`.
///
/// For each grid point the inner minimum over `y` is taken over pure `b`
/// and the continuation `sum_a xbar_a v_1(phi_a^T Q_a)` uses
/// [`brute_value_one_stage`]. `lower` is the grid maximum, `upper` adds
/// `max|M| * 2 / g`.
pub fn brute_value_two_stage(spec: &GameSpec, p: &Belief, grid: usize) -> Result<(f64, f64)> {
    let (nk, na, nb) = (spec.num_states(), spec.num_actions_p1(), spec.num_actions_p2());
    if na != 2 || nb != 2 || nk > 3 {
        return Err(Error::Validation(format!(
            "two-stage oracle needs |A| = |B| = 2 and |K| <= 3, got {na}, {nb}, {nk}"
        )));
    }
    if grid < 16 {
        return Err(Error::Validation(format!("grid resolution {grid} below 16")));
    }
    if p.len() != nk {
        return Err(Error::Validation(format!("belief has {} entries, game has {nk} states", p.len())));
    }
    let points = ipow(grid + 1, nk);
    let values = (0..points)
        .into_par_iter()
        .map(|code| {
            // x[k] = probability of action 0 in state k
            let mut c = code;
            let x: Vec<f64> = (0..nk)
                .map(|_| {
                    let i = c % (grid + 1);
                    c /= grid + 1;
                    i as f64 / grid as f64
                })
                .collect();
            two_stage_objective(spec, p, &x)
        })
        .collect::<Result<Vec<f64>>>()?;
    let lower = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = spec.max_abs_payoff() * 2.0 / grid as f64;
    Ok((lower, lower + pad))
}

fn two_stage_objective(spec: &GameSpec, p: &Belief, x: &[f64]) -> Result<f64> {
    let (nk, nb) = (spec.num_states(), spec.num_actions_p2());
    let probs = p.probs();
    let mix = |k: usize, a: usize| if a == 0 { x[k] } else { 1.0 - x[k] };
    let stage = (0..nb)
        .map(|b| {
            (0..nk)
                .map(|k| probs[k] * (mix(k, 0) * spec.payoff(k, 0, b) + mix(k, 1) * spec.payoff(k, 1, b)))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    let mut future = 0.0;
    for a in 0..2 {
        let x_bar: f64 = (0..nk).map(|k| probs[k] * mix(k, a)).sum();
        if x_bar <= 0.0 {
            continue;
        }
        let mut next = vec![0.0; nk];
        for k in 0..nk {
            let phi = probs[k] * mix(k, a) / x_bar;
            for (kn, slot) in next.iter_mut().enumerate() {
                *slot += phi * spec.transition(a, k, kn);
            }
        }
        let sum: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= sum);
        future += x_bar * brute_value_one_stage(spec, &Belief::new(next)?)?;
    }
    Ok(stage + future)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub gap: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
    pub detail: String,
}

impl CheckResult {
    fn gate(name: &'static str, gap: f64, tolerance: f64, detail: String) -> Self {
        let status = if gap <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail };
        CheckResult {
            name,
            gap,
            tolerance,
            status,
            detail,
        }
    }

    fn skipped(name: &'static str, detail: impl Into<String>) -> Self {
        CheckResult {
            name,
            gap: 0.0,
            tolerance: 0.0,
            status: CheckStatus::Skipped,
            detail: detail.into(),
        }
    }
}

/// Runs every oracle on `spec` and reports the observed gaps.
pub fn run_verify_suite(spec: &GameSpec) -> Result<Vec<CheckResult>> {
    let p0 = spec.initial();
    let inf = informed::solve_informed(spec)?;
    let unf = uninformed::solve_uninformed(spec)?;
    let v = inf.value;
    let mut out = Vec::new();

    out.push(CheckResult::gate(
        "informed LP = uninformed LP",
        (inf.value - unf.value).abs(),
        1e-6,
        format!("{:.6} vs {:.6}", inf.value, unf.value),
    ));
    out.push(CheckResult::gate(
        "realization constraints",
        inf.realization.max_violation(spec, &p0),
        1e-7,
        String::new(),
    ));
    let br = best_response_uninformed(spec, &inf.strategy)?.guaranteed_value;
    out.push(CheckResult::gate(
        "best response to sigma*",
        (br - v).abs(),
        1e-6,
        format!("{br:.6}"),
    ));
    let br = best_response_informed(spec, &unf.strategy)?.guaranteed_value;
    out.push(CheckResult::gate("best response to tau*", (br - v).abs(), 1e-6, format!("{br:.6}")));
    let dot = unf.initial_regret.dot(&p0);
    out.push(CheckResult::gate(
        "p0 . alpha_1 = -v",
        (dot + v).abs(),
        1e-6,
        format!("{dot:.6}"),
    ));
    let w = uninformed::dual_value(spec, spec.horizon(), &unf.initial_regret)?;
    out.push(CheckResult::gate("w_N(alpha_1) = 0", w.abs(), 1e-6, format!("{w:.3e}")));

    let one = spec.with_horizon(1)?;
    let lp1 = informed::solve_informed(&one)?.value;
    let lp1u = uninformed::solve_uninformed(&one)?.value;
    let brute1 = brute_value_one_stage(spec, &p0)?;
    out.push(CheckResult::gate(
        "one-stage brute = N=1 LPs",
        (brute1 - lp1).abs().max((brute1 - lp1u).abs()),
        1e-7,
        format!("{brute1:.6}"),
    ));
    let nr = non_revealing_value(spec, &p0)?;
    out.push(CheckResult::gate(
        "non-revealing value <= v_1",
        (nr - brute1).max(0.0),
        1e-9,
        format!("{nr:.6}"),
    ));

    if spec.num_actions_p1() == 2 && spec.num_actions_p2() == 2 && spec.num_states() <= 3 {
        let two = spec.with_horizon(2)?;
        let lp2 = informed::solve_informed(&two)?.value;
        let grid = if spec.num_states() <= 2 { 64 } else { 16 };
        let (lo, hi) = brute_value_two_stage(spec, &p0, grid)?;
        let gap = (lo - lp2).max(lp2 - hi).max(0.0);
        out.push(CheckResult::gate(
            "two-stage grid bracket",
            gap,
            1e-9,
            format!("[{lo:.6}, {hi:.6}] ∋ {lp2:.6} at g={grid}"),
        ));
    } else {
        out.push(CheckResult::skipped("two-stage grid bracket", "needs |A| = |B| = 2, |K| <= 3"));
    }

    let belief = belief_based_strategy(spec)?;
    let br = best_response_uninformed(spec, &belief.strategy)?.guaranteed_value;
    out.push(CheckResult::gate(
        "belief-based security level",
        (br - v).abs(),
        1e-6,
        format!("{br:.6}"),
    ));
    let trace = regret_trace(spec, Some(&unf.initial_regret))?;
    let br = best_response_informed(spec, &trace.strategy)?.guaranteed_value;
    out.push(CheckResult::gate(
        "regret-based security level",
        (br - v).abs(),
        1e-6,
        format!("{br:.6}"),
    ));
    Ok(out)
}
