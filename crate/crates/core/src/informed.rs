//! Informed player (player 1): the history-based realization LP, strategy
//! extraction, belief updates and the belief-based shrinking-horizon play.
//!
//! The LP carries, per history `I_t`, a joint realization matrix
//! `Z_{I_t}(a, k)` (probability of reaching `I_t` in state `k` and then
//! playing `a`) and a stage security level `ell_{I_t}`:
//!
//! ```text
//! max  sum_t sum_{I_t} ell_{I_t}
//! s.t. sum_k M_k^T Z_{I_t}(:, k) >= ell_{I_t} 1          every I_t
//!      1^T Z_{(I, a)}(:, k) = Z_I(a, :) Q_a(:, k)         every non-root history
//!      1^T Z_root(:, k) = p(k)
//!      Z >= 0
//! ```

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{histories, history_count, Belief, GameSpec, InformedStrategy};
use crate::lp::{self, Bound, LinearProgram, Relation, Sense, VarId};

/// Column sums at or below this mark a `(state, history)` pair unreachable.
pub const ZERO_COLUMN_TOL: f64 = 1e-9;
/// Action probabilities at or below this cannot be conditioned on.
pub const ZERO_ACTION_TOL: f64 = 1e-12;
/// Allowed drift of a propagated belief's sum before renormalization.
pub const BELIEF_DRIFT_TOL: f64 = 1e-7;

/// Variable handles of the informed LP.
#[derive(Debug, Clone)]
pub struct InformedLp {
    pub lp: LinearProgram,
    num_states: usize,
    num_actions: usize,
    /// `z[t-1][(h * |A| + a) * |K| + k]`
    z: Vec<Vec<VarId>>,
    /// `ell[t-1][h]`
    ell: Vec<Vec<VarId>>,
}

impl InformedLp {
    pub fn z_var(&self, stage: usize, history: usize, action: usize, state: usize) -> VarId {
        self.z[stage - 1][(history * self.num_actions + action) * self.num_states + state]
    }

    pub fn ell_var(&self, stage: usize, history: usize) -> VarId {
        self.ell[stage - 1][history]
    }

    pub fn horizon(&self) -> usize {
        self.ell.len()
    }
}

/// Builds the history-based LP of horizon `horizon` from belief `initial`.
pub fn build_informed_lp(spec: &GameSpec, horizon: usize, initial: &Belief) -> InformedLp {
    let (nk, na, nb) = (spec.num_states(), spec.num_actions_p1(), spec.num_actions_p2());
    let mut lp = LinearProgram::new(Sense::Maximize);
    let mut z = Vec::with_capacity(horizon);
    let mut ell = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let count = history_count(na, t);
        let mut zt = Vec::with_capacity(count * na * nk);
        let mut lt = Vec::with_capacity(count);
        for h in histories(na, t) {
            let tag = h.sequence().iter().map(|a| a.to_string()).collect::<String>();
            for a in 0..na {
                for k in 0..nk {
                    zt.push(lp.add_var(Bound::NonNegative, format!("z_t{t}_h{tag}_a{a}_k{k}")));
                }
            }
            let l = lp.add_var(Bound::Free, format!("ell_t{t}_h{tag}"));
            lp.set_objective(l, 1.0);
            lt.push(l);
        }
        z.push(zt);
        ell.push(lt);
    }
    let built = InformedLp {
        lp,
        num_states: nk,
        num_actions: na,
        z,
        ell,
    };
    let mut lp = built.lp.clone();

    for t in 1..=horizon {
        for h in histories(na, t) {
            let o = h.ordinal();
            for b in 0..nb {
                let mut terms = Vec::with_capacity(na * nk + 1);
                for k in 0..nk {
                    for a in 0..na {
                        let m = spec.payoff(k, a, b);
                        if m != 0.0 {
                            terms.push((built.z_var(t, o, a, k), m));
                        }
                    }
                }
                terms.push((built.ell_var(t, o), -1.0));
                lp.add_named_constraint(format!("pay_t{t}_h{o}_b{b}"), terms, Relation::Ge, 0.0);
            }
            match h.parent(na) {
                None => {
                    for k in 0..nk {
                        let terms = (0..na).map(|a| (built.z_var(t, o, a, k), 1.0)).collect();
                        lp.add_named_constraint(
                            format!("init_k{k}"),
                            terms,
                            Relation::Eq,
                            initial.probs()[k],
                        );
                    }
                }
                Some((parent, a_prev)) => {
                    for k in 0..nk {
                        let mut terms: Vec<(VarId, f64)> =
                            (0..na).map(|a| (built.z_var(t, o, a, k), 1.0)).collect();
                        for k0 in 0..nk {
                            let q = spec.transition(a_prev, k0, k);
                            if q != 0.0 {
                                terms.push((built.z_var(t - 1, parent.ordinal(), a_prev, k0), -q));
                            }
                        }
                        lp.add_named_constraint(format!("flow_t{t}_h{o}_k{k}"), terms, Relation::Eq, 0.0);
                    }
                }
            }
        }
    }
    InformedLp { lp, ..built }
}

/// Optimal realization weights `Z*` and stage levels `ell*`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationMatrixSet {
    num_states: usize,
    num_actions: usize,
    /// `z[t-1][h]` is row-major `|A| x |K|`.
    z: Vec<Vec<Vec<f64>>>,
    ell: Vec<Vec<f64>>,
}

impl RealizationMatrixSet {
    pub fn horizon(&self) -> usize {
        self.z.len()
    }

    /// `Z_{I_t}(a, k)`
    pub fn weight(&self, stage: usize, history: usize, action: usize, state: usize) -> f64 {
        self.z[stage - 1][history][action * self.num_states + state]
    }

    /// `1^T Z_{I_t}(:, k)`
    pub fn column_sum(&self, stage: usize, history: usize, state: usize) -> f64 {
        (0..self.num_actions)
            .map(|a| self.weight(stage, history, a, state))
            .sum()
    }

    pub fn level(&self, stage: usize, history: usize) -> f64 {
        self.ell[stage - 1][history]
    }

    /// Largest violation of nonnegativity, initial and flow conditions.
    pub fn max_violation(&self, spec: &GameSpec, initial: &Belief) -> f64 {
        let (nk, na) = (self.num_states, self.num_actions);
        let mut worst = 0.0_f64;
        for t in 1..=self.horizon() {
            for h in histories(na, t) {
                let o = h.ordinal();
                for a in 0..na {
                    for k in 0..nk {
                        worst = worst.max(-self.weight(t, o, a, k));
                    }
                }
                for k in 0..nk {
                    let target = match h.parent(na) {
                        None => initial.probs()[k],
                        Some((p, a_prev)) => (0..nk)
                            .map(|k0| self.weight(t - 1, p.ordinal(), a_prev, k0) * spec.transition(a_prev, k0, k))
                            .sum(),
                    };
                    worst = worst.max((self.column_sum(t, o, k) - target).abs());
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone)]
pub struct InformedSolution {
    pub value: f64,
    pub strategy: InformedStrategy,
    pub realization: RealizationMatrixSet,
    pub iterations: usize,
}

/// Solves the informed LP for `horizon` stages starting from `initial`.
pub fn solve_informed_at(spec: &GameSpec, horizon: usize, initial: &Belief) -> Result<InformedSolution> {
    let (nk, na) = (spec.num_states(), spec.num_actions_p1());
    let built = build_informed_lp(spec, horizon, initial);
    let sol = lp::solve(&built.lp)?.require_optimal()?;

    let mut strategy = InformedStrategy::zeros(nk, na, horizon);
    let mut z = Vec::with_capacity(horizon);
    let mut ell = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let count = history_count(na, t);
        let mut zt = Vec::with_capacity(count);
        let mut lt = Vec::with_capacity(count);
        for o in 0..count {
            let mut mat = vec![0.0; na * nk];
            for a in 0..na {
                for k in 0..nk {
                    mat[a * nk + k] = sol.value(built.z_var(t, o, a, k));
                }
            }
            for k in 0..nk {
                let col: Vec<f64> = (0..na).map(|a| mat[a * nk + k].max(0.0)).collect();
                let sum: f64 = col.iter().sum();
                if sum > ZERO_COLUMN_TOL {
                    strategy.set(t, o, k, col.iter().map(|x| x / sum).collect());
                }
            }
            zt.push(mat);
            lt.push(sol.value(built.ell_var(t, o)));
        }
        z.push(zt);
        ell.push(lt);
    }

    Ok(InformedSolution {
        value: sol.objective_value,
        strategy,
        realization: RealizationMatrixSet {
            num_states: nk,
            num_actions: na,
            z,
            ell,
        },
        iterations: sol.iterations,
    })
}

/// Game value and a security strategy of the informed player for the game's
/// own horizon and initial distribution.
pub fn solve_informed(spec: &GameSpec) -> Result<InformedSolution> {
    solve_informed_at(spec, spec.horizon(), &spec.initial())
}

/// Posterior-then-propagate belief update.
///
/// `strategy[k]` is the mix played in state `k` (the column `X(:, k)`),
/// `transition` is `Q_a` for the observed `action`.
pub fn belief_update(
    belief: &Belief,
    strategy: &[Vec<f64>],
    action: usize,
    transition: &[Vec<f64>],
) -> Result<Belief> {
    let p = belief.probs();
    let x_bar: f64 = p.iter().zip(strategy).map(|(pk, x)| pk * x[action]).sum();
    if x_bar <= ZERO_ACTION_TOL {
        return Err(Error::ZeroProbabilityAction { action });
    }
    let n = p.len();
    let mut next = vec![0.0; n];
    for k in 0..n {
        let phi = p[k] * strategy[k][action] / x_bar;
        if phi != 0.0 {
            for (kn, slot) in next.iter_mut().enumerate() {
                *slot += phi * transition[k][kn];
            }
        }
    }
    let sum: f64 = next.iter().sum();
    if (sum - 1.0).abs() > BELIEF_DRIFT_TOL {
        return Err(Error::Numerical(format!("propagated belief sums to {sum}")));
    }
    next.iter_mut().for_each(|x| *x /= sum);
    Ok(Belief::from_raw(next))
}

/// First-stage security strategy `sigma*_1(k, ∅)` of the `horizon`-stage game
/// started at `belief`, one mix per state.
pub fn first_stage_strategy(spec: &GameSpec, horizon: usize, belief: &Belief) -> Result<(f64, Vec<Vec<f64>>)> {
    let sol = solve_informed_at(spec, horizon, belief)?;
    let mixes = (0..spec.num_states())
        .map(|k| sol.strategy.get(1, 0, k).to_vec())
        .collect();
    Ok((sol.value, mixes))
}

/// Trajectory of one belief-based play.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefPlay {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    /// `beliefs[t-1]` is the belief held at stage `t`.
    pub beliefs: Vec<Belief>,
    /// `distributions[t-1][k]` is the stage-`t` mix for state `k`.
    pub distributions: Vec<Vec<Vec<f64>>>,
}

/// Belief-based play: at every stage a fresh LP with the remaining horizon is
/// solved at the current belief, only its first-stage strategy is used, and
/// the belief is then updated with the drawn action.
///
/// `state_feed(t, actions)` reports the true state at stage `t` given the
/// informed actions played so far.
pub fn belief_based_play<F, R>(spec: &GameSpec, mut state_feed: F, rng: &mut R) -> Result<BeliefPlay>
where
    F: FnMut(usize, &[usize]) -> usize,
    R: Rng + ?Sized,
{
    let n = spec.horizon();
    let mut belief = spec.initial();
    let mut play = BeliefPlay {
        states: Vec::with_capacity(n),
        actions: Vec::with_capacity(n),
        beliefs: Vec::with_capacity(n),
        distributions: Vec::with_capacity(n),
    };
    for t in 1..=n {
        let (_, mixes) = first_stage_strategy(spec, n + 1 - t, &belief)?;
        let k = state_feed(t, &play.actions);
        let mix = &mixes[k];
        if mix.iter().all(|&x| x == 0.0) {
            return Err(Error::Strategy(format!(
                "state {k} at stage {t} has zero probability under belief {:?}",
                belief.probs()
            )));
        }
        let a = crate::sim::sample_index(mix, rng.gen::<f64>());
        play.states.push(k);
        play.actions.push(a);
        play.beliefs.push(belief.clone());
        if t < n {
            belief = belief_update(&belief, &mixes, a, spec.transition_matrix(a))?;
        }
        play.distributions.push(mixes);
    }
    Ok(play)
}

/// The strategy Algorithm-style belief-based play induces on every history,
/// together with the belief at each reachable history (`None` if unreachable).
#[derive(Debug, Clone)]
pub struct BeliefStrategy {
    pub strategy: InformedStrategy,
    /// `beliefs[t-1][h]`
    pub beliefs: Vec<Vec<Option<Belief>>>,
}

/// Expands belief-based play over all informed histories.
pub fn belief_based_strategy(spec: &GameSpec) -> Result<BeliefStrategy> {
    let (nk, na, n) = (spec.num_states(), spec.num_actions_p1(), spec.horizon());
    let mut strategy = InformedStrategy::zeros(nk, na, n);
    let mut beliefs: Vec<Vec<Option<Belief>>> = Vec::with_capacity(n);
    beliefs.push(vec![Some(spec.initial())]);
    for t in 1..=n {
        let mut next = vec![None; if t < n { history_count(na, t + 1) } else { 0 }];
        for o in 0..history_count(na, t) {
            let Some(belief) = beliefs[t - 1][o].clone() else {
                continue;
            };
            let (_, mixes) = first_stage_strategy(spec, n + 1 - t, &belief)?;
            for (k, mix) in mixes.iter().enumerate() {
                strategy.set(t, o, k, mix.clone());
            }
            if t < n {
                for a in 0..na {
                    match belief_update(&belief, &mixes, a, spec.transition_matrix(a)) {
                        Ok(b) => next[o * na + a] = Some(b),
                        Err(Error::ZeroProbabilityAction { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        if t < n {
            beliefs.push(next);
        }
    }
    Ok(BeliefStrategy { strategy, beliefs })
}
