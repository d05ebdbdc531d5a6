//! Uninformed player (player 2): the history-based primal LP, initial regret
//! extraction, the dual-game LP and the per-stage regret update.
//!
//! All three LPs share one constraint block over `y_{I_t}` (stage mixes,
//! simplex constrained) and free levels `ell_{F_t}` indexed by full
//! histories `F_t = (S_t, I_t)`:
//!
//! ```text
//! sum_{k_t} ell_{(F_{t-1}, k_t, a_{t-1})} <= ell_{F_{t-1}}                 t = 2..n
//! prod_{t<n} Q_{a_t}(k_t, k_{t+1}) sum_t M_{k_t}(a_t, :) y_{I_t} <= ell_{F_n}  every F_n, a_n
//! ```
//!
//! The primal minimizes `sum_k p(k) ell_{(k)}`; the dual game minimizes a
//! scalar `ell_hat` with `alpha(k) + ell_{(k)} <= ell_hat`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{history_count, ipow, Belief, FullHistoryIndex, GameSpec, Regret, UninformedStrategy};
use crate::lp::{self, Bound, LinearProgram, Relation, Sense, VarId};

/// Variables of one uninformed constraint block.
#[derive(Debug, Clone)]
pub struct UninformedLpVars {
    num_actions_p2: usize,
    /// `y[t-1][h * |B| + b]`
    y: Vec<Vec<VarId>>,
    /// `ell[t-1][F_t ordinal]`
    ell: Vec<Vec<VarId>>,
}

impl UninformedLpVars {
    pub fn horizon(&self) -> usize {
        self.y.len()
    }

    pub fn y_var(&self, stage: usize, history: usize, action: usize) -> VarId {
        self.y[stage - 1][history * self.num_actions_p2 + action]
    }

    pub fn ell_var(&self, stage: usize, full_history: usize) -> VarId {
        self.ell[stage - 1][full_history]
    }

    /// `ell_{(k)}` for the first stage.
    pub fn root_level(&self, state: usize) -> VarId {
        self.ell[0][state]
    }
}

/// Adds the `horizon`-stage block to `lp`. Variable names carry `prefix`.
fn add_block(lp: &mut LinearProgram, spec: &GameSpec, horizon: usize, prefix: &str) -> UninformedLpVars {
    let (nk, na, nb) = (spec.num_states(), spec.num_actions_p1(), spec.num_actions_p2());
    let mut y = Vec::with_capacity(horizon);
    let mut ell = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let mut yt = Vec::with_capacity(history_count(na, t) * nb);
        for h in 0..history_count(na, t) {
            for b in 0..nb {
                yt.push(lp.add_var(Bound::NonNegative, format!("{prefix}y_t{t}_h{h}_b{b}")));
            }
        }
        y.push(yt);
        let lt = (0..FullHistoryIndex::count(nk, na, t))
            .map(|f| lp.add_var(Bound::Free, format!("{prefix}l_t{t}_f{f}")))
            .collect();
        ell.push(lt);
    }
    let vars = UninformedLpVars {
        num_actions_p2: nb,
        y,
        ell,
    };

    for t in 1..=horizon {
        for h in 0..history_count(na, t) {
            let terms = (0..nb).map(|b| (vars.y_var(t, h, b), 1.0)).collect();
            lp.add_named_constraint(format!("{prefix}simplex_t{t}_h{h}"), terms, Relation::Eq, 1.0);
        }
    }

    // F_t = (S, I) has ordinal ord(S) |A|^{t-1} + ord(I); appending k and a
    // gives (ord(S) |K| + k) |A|^t + ord(I) |A| + a.
    for t in 2..=horizon {
        let width_prev = ipow(na, t - 2);
        let width = ipow(na, t - 1);
        for s in 0..ipow(nk, t - 1) {
            for i in 0..width_prev {
                let parent = s * width_prev + i;
                for a in 0..na {
                    let mut terms: Vec<(VarId, f64)> = (0..nk)
                        .map(|k| (vars.ell_var(t, (s * nk + k) * width + i * na + a), 1.0))
                        .collect();
                    terms.push((vars.ell_var(t - 1, parent), -1.0));
                    lp.add_named_constraint(
                        format!("{prefix}branch_t{t}_f{parent}_a{a}"),
                        terms,
                        Relation::Le,
                        0.0,
                    );
                }
            }
        }
    }

    let mut acts = vec![0usize; horizon];
    let mut coef = vec![0.0; (0..horizon).map(|t| history_count(na, t + 1) * nb).sum()];
    let offsets: Vec<usize> = (0..horizon)
        .scan(0, |acc, t| {
            let o = *acc;
            *acc += history_count(na, t + 1) * nb;
            Some(o)
        })
        .collect();
    for f in 0..FullHistoryIndex::count(nk, na, horizon) {
        let full = FullHistoryIndex::from_ordinal(horizon, f, nk, na);
        let states = full.states();
        acts[..horizon - 1].copy_from_slice(full.actions());
        let mut weight = 1.0;
        for t in 0..horizon - 1 {
            weight *= spec.transition(acts[t], states[t], states[t + 1]);
        }
        for a_last in 0..na {
            acts[horizon - 1] = a_last;
            coef.iter_mut().for_each(|c| *c = 0.0);
            let mut terms = Vec::new();
            if weight != 0.0 {
                let mut h = 0;
                for t in 0..horizon {
                    for b in 0..nb {
                        coef[offsets[t] + h * nb + b] += weight * spec.payoff(states[t], acts[t], b);
                    }
                    h = h * na + acts[t];
                }
                let mut h = 0;
                for t in 0..horizon {
                    for b in 0..nb {
                        let c = coef[offsets[t] + h * nb + b];
                        if c != 0.0 {
                            terms.push((vars.y_var(t + 1, h, b), c));
                        }
                    }
                    h = h * na + acts[t];
                }
            }
            terms.push((vars.ell_var(horizon, f), -1.0));
            lp.add_named_constraint(format!("{prefix}term_f{f}_a{a_last}"), terms, Relation::Le, 0.0);
        }
    }
    vars
}

/// Primal history-based LP of the uninformed player.
#[derive(Debug, Clone)]
pub struct UninformedLp {
    pub lp: LinearProgram,
    pub vars: UninformedLpVars,
}

/// Builds the primal LP of horizon `horizon` at belief `initial`.
pub fn build_uninformed_lp(spec: &GameSpec, horizon: usize, initial: &Belief) -> UninformedLp {
    let mut lp = LinearProgram::new(Sense::Minimize);
    let vars = add_block(&mut lp, spec, horizon, "");
    for (k, &p) in initial.probs().iter().enumerate() {
        lp.set_objective(vars.root_level(k), p);
    }
    UninformedLp { lp, vars }
}

fn extract_strategy(spec: &GameSpec, vars: &UninformedLpVars, sol: &lp::LpSolution) -> UninformedStrategy {
    let (na, nb) = (spec.num_actions_p1(), spec.num_actions_p2());
    let horizon = vars.horizon();
    let mut strategy = UninformedStrategy::zeros(na, nb, horizon);
    for t in 1..=horizon {
        for h in 0..history_count(na, t) {
            let raw: Vec<f64> = (0..nb).map(|b| sol.value(vars.y_var(t, h, b))).collect();
            strategy.set(t, h, crate::game::clean_distribution(&raw));
        }
    }
    strategy
}

#[derive(Debug, Clone)]
pub struct UninformedSolution {
    pub value: f64,
    pub strategy: UninformedStrategy,
    /// `alpha_1 = -ell*_{(k)}`
    pub initial_regret: Regret,
    pub iterations: usize,
}

/// Solves the primal LP for `horizon` stages from `initial`.
pub fn solve_uninformed_at(spec: &GameSpec, horizon: usize, initial: &Belief) -> Result<UninformedSolution> {
    let built = build_uninformed_lp(spec, horizon, initial);
    let sol = lp::solve(&built.lp)?.require_optimal()?;
    let strategy = extract_strategy(spec, &built.vars, &sol);
    let alpha = (0..spec.num_states())
        .map(|k| -sol.value(built.vars.root_level(k)))
        .collect();
    Ok(UninformedSolution {
        value: sol.objective_value,
        strategy,
        initial_regret: Regret::new(alpha)?,
        iterations: sol.iterations,
    })
}

/// Game value, a security strategy of the uninformed player and its
/// initial regret, for the game's own horizon and initial distribution.
pub fn solve_uninformed(spec: &GameSpec) -> Result<UninformedSolution> {
    solve_uninformed_at(spec, spec.horizon(), &spec.initial())
}

/// Dual-game LP with initial vector payoff `alpha`.
#[derive(Debug, Clone)]
pub struct DualLp {
    pub lp: LinearProgram,
    pub vars: UninformedLpVars,
    pub ell_hat: VarId,
}

pub fn build_dual_lp(spec: &GameSpec, horizon: usize, alpha: &Regret) -> DualLp {
    let mut lp = LinearProgram::new(Sense::Minimize);
    let vars = add_block(&mut lp, spec, horizon, "");
    let ell_hat = lp.add_var(Bound::Free, "l_hat");
    lp.set_objective(ell_hat, 1.0);
    for (k, &a) in alpha.values().iter().enumerate() {
        lp.add_named_constraint(
            format!("couple_k{k}"),
            vec![(vars.root_level(k), 1.0), (ell_hat, -1.0)],
            Relation::Le,
            -a,
        );
    }
    DualLp { lp, vars, ell_hat }
}

/// `w_n(alpha)`, the value of the dual game.
pub fn dual_value(spec: &GameSpec, horizon: usize, alpha: &Regret) -> Result<f64> {
    check_regret(spec, alpha)?;
    let built = build_dual_lp(spec, horizon, alpha);
    Ok(lp::solve(&built.lp)?.require_optimal()?.objective_value)
}

fn check_regret(spec: &GameSpec, alpha: &Regret) -> Result<()> {
    if alpha.len() != spec.num_states() {
        return Err(Error::Validation(format!(
            "regret has {} entries, game has {} states",
            alpha.len(),
            spec.num_states()
        )));
    }
    Ok(())
}

/// Flattened per-stage regret LP. For `remaining = 0` it is the one-stage
/// base case and `beta`, `ell_hat`, `blocks` are empty.
#[derive(Debug, Clone)]
pub struct RegretLp {
    pub lp: LinearProgram,
    pub remaining: usize,
    pub y_hat: Vec<VarId>,
    pub ell_tilde: VarId,
    /// `beta[a][k]`
    pub beta: Vec<Vec<VarId>>,
    pub ell_hat: Vec<VarId>,
    pub blocks: Vec<UninformedLpVars>,
}

/// Builds the regret LP for a stage with `remaining` stages after it.
///
/// ```text
/// min  ell~
/// s.t. M_k(a, :) y^ + alpha(k) - Q_a(k, :) beta_a + ell^_a <= ell~   every k, a
///      beta_a(k) + ell_{a,(k)} <= ell^_a                            every k, a
///      remaining-stage block per action a
/// ```
pub fn build_regret_lp(spec: &GameSpec, remaining: usize, alpha: &Regret) -> RegretLp {
    let (nk, na, nb) = (spec.num_states(), spec.num_actions_p1(), spec.num_actions_p2());
    let mut lp = LinearProgram::new(Sense::Minimize);
    let y_hat: Vec<VarId> = (0..nb).map(|b| lp.add_var(Bound::NonNegative, format!("yhat_b{b}"))).collect();
    let ell_tilde = lp.add_var(Bound::Free, "l_tilde");
    lp.set_objective(ell_tilde, 1.0);
    lp.add_named_constraint("simplex_yhat", y_hat.iter().map(|&v| (v, 1.0)).collect(), Relation::Eq, 1.0);

    let mut beta = Vec::new();
    let mut ell_hat = Vec::new();
    let mut blocks = Vec::new();
    if remaining > 0 {
        for a in 0..na {
            beta.push(
                (0..nk)
                    .map(|k| lp.add_var(Bound::Free, format!("beta_a{a}_k{k}")))
                    .collect::<Vec<_>>(),
            );
            ell_hat.push(lp.add_var(Bound::Free, format!("l_hat_a{a}")));
            blocks.push(add_block(&mut lp, spec, remaining, &format!("a{a}_")));
        }
    }

    for k in 0..nk {
        for a in 0..na {
            let mut terms: Vec<(VarId, f64)> = (0..nb)
                .filter(|&b| spec.payoff(k, a, b) != 0.0)
                .map(|b| (y_hat[b], spec.payoff(k, a, b)))
                .collect();
            if remaining > 0 {
                for kn in 0..nk {
                    let q = spec.transition(a, k, kn);
                    if q != 0.0 {
                        terms.push((beta[a][kn], -q));
                    }
                }
                terms.push((ell_hat[a], 1.0));
            }
            terms.push((ell_tilde, -1.0));
            lp.add_named_constraint(format!("couple_k{k}_a{a}"), terms, Relation::Le, -alpha.values()[k]);
        }
    }
    for a in 0..beta.len() {
        for k in 0..nk {
            lp.add_named_constraint(
                format!("regret_a{a}_k{k}"),
                vec![(beta[a][k], 1.0), (blocks[a].root_level(k), 1.0), (ell_hat[a], -1.0)],
                Relation::Le,
                0.0,
            );
        }
    }

    RegretLp {
        lp,
        remaining,
        y_hat,
        ell_tilde,
        beta,
        ell_hat,
        blocks,
    }
}

/// Outcome of one regret update.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretUpdateResult {
    /// `y^*`, the mix to play now.
    pub current_mix: Vec<f64>,
    /// `beta*_a` per informed action; empty at the last stage.
    pub next_regret: Vec<Regret>,
    /// `w_{remaining+1}(alpha)`
    pub dual_value: f64,
}

/// Stage LP of the regret-based strategy with `remaining` stages left after
/// the current one.
///
/// Each `beta*_a` is determined only up to adding a constant vector (the
/// LP is invariant under `beta_a + c 1`, `ell_hat_a + c`); the returned
/// representative is the simplex vertex reached under the fixed pivot rule.
pub fn regret_step(spec: &GameSpec, remaining: usize, alpha: &Regret) -> Result<RegretUpdateResult> {
    check_regret(spec, alpha)?;
    let built = build_regret_lp(spec, remaining, alpha);
    let sol = lp::solve(&built.lp)?.require_optimal()?;
    let raw: Vec<f64> = built.y_hat.iter().map(|&v| sol.value(v)).collect();
    let next_regret = built
        .beta
        .iter()
        .map(|ba| Regret::new(ba.iter().map(|&v| sol.value(v)).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(RegretUpdateResult {
        current_mix: crate::game::clean_distribution(&raw),
        next_regret,
        dual_value: sol.objective_value,
    })
}

/// One online run of the regret-based strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretPlay {
    /// `mixes[t-1]` is the stage-`t` mix.
    pub mixes: Vec<Vec<f64>>,
    /// `regrets[t-1]` is the regret held at stage `t`.
    pub regrets: Vec<Regret>,
    pub actions: Vec<usize>,
}

/// Online regret-based play. The stage-1 regret is `alpha` if given, else
/// the initial regret of the primal LP. `feed(t, mix)` returns the informed
/// action observed at stage `t` after `mix` has been committed.
pub fn regret_based_play<F>(spec: &GameSpec, alpha: Option<&Regret>, mut feed: F) -> Result<RegretPlay>
where
    F: FnMut(usize, &[f64]) -> usize,
{
    let n = spec.horizon();
    let mut regret = match alpha {
        Some(a) => a.clone(),
        None => solve_uninformed(spec)?.initial_regret,
    };
    let mut play = RegretPlay {
        mixes: Vec::with_capacity(n),
        regrets: Vec::with_capacity(n),
        actions: Vec::with_capacity(n),
    };
    for t in 1..=n {
        let step = regret_step(spec, n - t, &regret)?;
        let a = feed(t, &step.current_mix);
        if a >= spec.num_actions_p1() {
            return Err(Error::IndexOutOfRange(format!("informed action {a} at stage {t}")));
        }
        play.mixes.push(step.current_mix);
        play.regrets.push(regret);
        play.actions.push(a);
        regret = match step.next_regret.into_iter().nth(a) {
            Some(r) => r,
            None => break,
        };
    }
    Ok(play)
}

/// Regret-based strategy expanded over every informed history.
#[derive(Debug, Clone)]
pub struct RegretTrace {
    pub strategy: UninformedStrategy,
    /// `regrets[t-1][h]`
    pub regrets: Vec<Vec<Regret>>,
    /// `dual_values[t-1][h]`
    pub dual_values: Vec<Vec<f64>>,
}

/// Runs the regret update on all histories. Histories of one stage are
/// solved in parallel.
pub fn regret_trace(spec: &GameSpec, alpha: Option<&Regret>) -> Result<RegretTrace> {
    let (na, nb, n) = (spec.num_actions_p1(), spec.num_actions_p2(), spec.horizon());
    let first = match alpha {
        Some(a) => a.clone(),
        None => solve_uninformed(spec)?.initial_regret,
    };
    let mut strategy = UninformedStrategy::zeros(na, nb, n);
    let mut regrets = vec![vec![first]];
    let mut dual_values = Vec::with_capacity(n);
    for t in 1..=n {
        let steps = regrets[t - 1]
            .par_iter()
            .map(|r| regret_step(spec, n - t, r))
            .collect::<Result<Vec<_>>>()?;
        let mut next = Vec::with_capacity(if t < n { steps.len() * na } else { 0 });
        let mut values = Vec::with_capacity(steps.len());
        for (h, step) in steps.into_iter().enumerate() {
            strategy.set(t, h, step.current_mix);
            values.push(step.dual_value);
            next.extend(step.next_regret);
        }
        dual_values.push(values);
        if t < n {
            regrets.push(next);
        }
    }
    Ok(RegretTrace {
        strategy,
        regrets,
        dual_values,
    })
}
