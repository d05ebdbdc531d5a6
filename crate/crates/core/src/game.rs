//! Game description: the six-tuple `(K, A, B, M, p0, Q)` plus a horizon,
//! history indexing for the informed player's action sequences, and the
//! strategy containers shared by the solvers.
//!
//! States and actions are zero-based indices everywhere in the library. Labels
//! only matter when reading or printing a game.

use std::fmt;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on probability sums at ingestion.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// A finite-horizon zero-sum stochastic game in which player 1 observes the
/// state and alone controls its transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    states: Vec<String>,
    actions_p1: Vec<String>,
    actions_p2: Vec<String>,
    /// `payoff[k][a][b]`
    payoff: Vec<Vec<Vec<f64>>>,
    /// `transition[a][k][k']`
    transition: Vec<Vec<Vec<f64>>>,
    initial: Vec<f64>,
    horizon: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    states: Vec<String>,
    actions_p1: Vec<String>,
    actions_p2: Vec<String>,
    payoff: IndexMap<String, Vec<Vec<f64>>>,
    transition: IndexMap<String, Vec<Vec<f64>>>,
    initial: Vec<f64>,
    horizon: usize,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{}", i + 1)).collect()
}

/// Checks a probability vector and renormalizes it exactly.
fn normalize_distribution(what: &str, row: &mut [f64]) -> Result<()> {
    if let Some(x) = row.iter().find(|x| !x.is_finite()) {
        return Err(invalid(format!("{what} has non-finite entry {x}")));
    }
    if let Some(x) = row.iter().find(|&&x| x < 0.0) {
        return Err(invalid(format!("{what} has negative entry {x}")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(invalid(format!("{what} sums to {sum}")));
    }
    row.iter_mut().for_each(|x| *x /= sum);
    Ok(())
}

fn check_unique(kind: &str, labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(invalid(format!("{kind} must not be empty")));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(invalid(format!("duplicate {kind} label {l:?}")));
        }
    }
    Ok(())
}

impl GameSpec {
    /// Builds a game with generated labels (`k1..`, `a1..`, `b1..`).
    pub fn new(
        payoff: Vec<Vec<Vec<f64>>>,
        transition: Vec<Vec<Vec<f64>>>,
        initial: Vec<f64>,
        horizon: usize,
    ) -> Result<Self> {
        let k = payoff.len();
        let a = payoff.first().map_or(0, |m| m.len());
        let b = payoff
            .first()
            .and_then(|m| m.first())
            .map_or(0, |r| r.len());
        Self::with_labels(
            default_labels("k", k),
            default_labels("a", a),
            default_labels("b", b),
            payoff,
            transition,
            initial,
            horizon,
        )
    }

    pub fn with_labels(
        states: Vec<String>,
        actions_p1: Vec<String>,
        actions_p2: Vec<String>,
        payoff: Vec<Vec<Vec<f64>>>,
        mut transition: Vec<Vec<Vec<f64>>>,
        mut initial: Vec<f64>,
        horizon: usize,
    ) -> Result<Self> {
        check_unique("states", &states)?;
        check_unique("actions_p1", &actions_p1)?;
        check_unique("actions_p2", &actions_p2)?;
        let (nk, na, nb) = (states.len(), actions_p1.len(), actions_p2.len());

        if payoff.len() != nk {
            return Err(invalid(format!(
                "expected {nk} payoff matrices, found {}",
                payoff.len()
            )));
        }
        for (k, m) in payoff.iter().enumerate() {
            let name = &states[k];
            if m.len() != na || m.iter().any(|r| r.len() != nb) {
                return Err(invalid(format!(
                    "payoff matrix M_{name} must be {na}x{nb}"
                )));
            }
            if m.iter().flatten().any(|x| !x.is_finite()) {
                return Err(invalid(format!("payoff matrix M_{name} has a non-finite entry")));
            }
        }

        if transition.len() != na {
            return Err(invalid(format!(
                "expected {na} transition matrices, found {}",
                transition.len()
            )));
        }
        for (a, q) in transition.iter_mut().enumerate() {
            let name = &actions_p1[a];
            if q.len() != nk || q.iter().any(|r| r.len() != nk) {
                return Err(invalid(format!(
                    "transition matrix Q_{name} must be {nk}x{nk}"
                )));
            }
            for (k, row) in q.iter_mut().enumerate() {
                normalize_distribution(
                    &format!("transition row {k} ({}) of Q_{name}", states[k]),
                    row,
                )?;
            }
        }

        if initial.len() != nk {
            return Err(invalid(format!(
                "initial distribution has length {}, expected {nk}",
                initial.len()
            )));
        }
        normalize_distribution("initial distribution", &mut initial)?;

        if horizon == 0 {
            return Err(invalid("horizon must be at least 1"));
        }

        Ok(Self {
            states,
            actions_p1,
            actions_p2,
            payoff,
            transition,
            initial,
            horizon,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: GameFile = serde_json::from_str(text)?;
        let payoff = keyed_matrices("payoff", "state", &file.states, file.payoff)?;
        let transition =
            keyed_matrices("transition", "p1 action", &file.actions_p1, file.transition)?;
        Self::with_labels(
            file.states,
            file.actions_p1,
            file.actions_p2,
            payoff,
            transition,
            file.initial,
            file.horizon,
        )
    }

    pub fn to_json_string(&self) -> String {
        let file = GameFile {
            states: self.states.clone(),
            actions_p1: self.actions_p1.clone(),
            actions_p2: self.actions_p2.clone(),
            payoff: self
                .states
                .iter()
                .cloned()
                .zip(self.payoff.iter().cloned())
                .collect(),
            transition: self
                .actions_p1
                .iter()
                .cloned()
                .zip(self.transition.iter().cloned())
                .collect(),
            initial: self.initial.clone(),
            horizon: self.horizon,
        };
        serde_json::to_string_pretty(&file).expect("game file serialization cannot fail")
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions_p1(&self) -> usize {
        self.actions_p1.len()
    }

    pub fn num_actions_p2(&self) -> usize {
        self.actions_p2.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn initial(&self) -> Belief {
        Belief(self.initial.clone())
    }

    pub fn state_labels(&self) -> &[String] {
        &self.states
    }

    pub fn p1_labels(&self) -> &[String] {
        &self.actions_p1
    }

    pub fn p2_labels(&self) -> &[String] {
        &self.actions_p2
    }

    /// `M_k` as rows over player 1 actions.
    pub fn payoff_matrix(&self, k: usize) -> &[Vec<f64>] {
        &self.payoff[k]
    }

    /// `Q_a` as rows over current states.
    pub fn transition_matrix(&self, a: usize) -> &[Vec<f64>] {
        &self.transition[a]
    }

    /// `M_k(a, b)` without bounds checking beyond the slice indexing.
    #[inline]
    pub fn payoff(&self, k: usize, a: usize, b: usize) -> f64 {
        self.payoff[k][a][b]
    }

    /// `Q_a(k, k')`.
    #[inline]
    pub fn transition(&self, a: usize, k: usize, next: usize) -> f64 {
        self.transition[a][k][next]
    }

    /// Largest absolute stage payoff.
    pub fn max_abs_payoff(&self) -> f64 {
        self.payoff
            .iter()
            .flatten()
            .flatten()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Same matrices with a different horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(invalid("horizon must be at least 1"));
        }
        Ok(Self {
            horizon,
            ..self.clone()
        })
    }

    /// Same matrices with a different initial distribution.
    pub fn with_initial(&self, initial: &Belief) -> Result<Self> {
        let mut probs = initial.0.clone();
        if probs.len() != self.num_states() {
            return Err(invalid(format!(
                "initial distribution has length {}, expected {}",
                probs.len(),
                self.num_states()
            )));
        }
        normalize_distribution("initial distribution", &mut probs)?;
        Ok(Self {
            initial: probs,
            ..self.clone()
        })
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    pub fn p1_index(&self, label: &str) -> Option<usize> {
        self.actions_p1.iter().position(|s| s == label)
    }

    pub fn p2_index(&self, label: &str) -> Option<usize> {
        self.actions_p2.iter().position(|s| s == label)
    }
}

fn keyed_matrices(
    field: &str,
    kind: &str,
    labels: &[String],
    mut map: IndexMap<String, Vec<Vec<f64>>>,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let mut out = Vec::with_capacity(labels.len());
    for label in labels {
        match map.shift_remove(label) {
            Some(m) => out.push(m),
            None => {
                return Err(invalid(format!(
                    "{field} has no entry for {kind} {label:?}"
                )))
            }
        }
    }
    if let Some(extra) = map.keys().next() {
        return Err(invalid(format!("{field} has entry for unknown {kind} {extra:?}")));
    }
    Ok(out)
}

/// Reads and validates a game description file.
pub fn load_game(path: impl AsRef<Path>) -> Result<GameSpec> {
    let text = std::fs::read_to_string(path)?;
    GameSpec::from_json_str(&text)
}

/// `M_k(a, b)` with range checks.
pub fn stage_payoff(spec: &GameSpec, k: usize, a: usize, b: usize) -> Result<f64> {
    if k >= spec.num_states() || a >= spec.num_actions_p1() || b >= spec.num_actions_p2() {
        return Err(Error::IndexOutOfRange(format!(
            "payoff ({k}, {a}, {b}) outside {}x{}x{}",
            spec.num_states(),
            spec.num_actions_p1(),
            spec.num_actions_p2()
        )));
    }
    Ok(spec.payoff(k, a, b))
}

/// `base^exp` for small history counts.
pub(crate) fn ipow(base: usize, exp: usize) -> usize {
    base.checked_pow(exp as u32)
        .expect("history count overflows usize")
}

/// Number of informed-action histories `|A|^(t-1)` at stage `t`.
pub fn history_count(num_actions: usize, stage: usize) -> usize {
    ipow(num_actions, stage - 1)
}

/// An informed player's action history `I_t = (a_1, .., a_{t-1})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HistoryIndex {
    stage: usize,
    sequence: Vec<usize>,
    ordinal: usize,
}

impl HistoryIndex {
    pub fn root() -> Self {
        Self {
            stage: 1,
            sequence: Vec::new(),
            ordinal: 0,
        }
    }

    /// Decodes a lexicographic ordinal at stage `t`.
    pub fn from_ordinal(stage: usize, ordinal: usize, num_actions: usize) -> Self {
        assert!(stage >= 1);
        let len = stage - 1;
        let mut sequence = vec![0; len];
        let mut rest = ordinal;
        for slot in sequence.iter_mut().rev() {
            *slot = rest % num_actions;
            rest /= num_actions;
        }
        debug_assert_eq!(rest, 0, "ordinal out of range for stage");
        Self {
            stage,
            sequence,
            ordinal,
        }
    }

    pub fn from_sequence(sequence: Vec<usize>, num_actions: usize) -> Self {
        let ordinal = sequence.iter().fold(0, |acc, &a| acc * num_actions + a);
        Self {
            stage: sequence.len() + 1,
            sequence,
            ordinal,
        }
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn sequence(&self) -> &[usize] {
        &self.sequence
    }

    pub fn ordinal(&self) -> usize {
        self.ordinal
    }

    pub fn child(&self, action: usize, num_actions: usize) -> Self {
        let mut sequence = self.sequence.clone();
        sequence.push(action);
        Self {
            stage: self.stage + 1,
            sequence,
            ordinal: self.ordinal * num_actions + action,
        }
    }

    /// The parent history and the last action, or `None` at the root.
    pub fn parent(&self, num_actions: usize) -> Option<(Self, usize)> {
        let (&last, head) = self.sequence.split_last()?;
        Some((
            Self {
                stage: self.stage - 1,
                sequence: head.to_vec(),
                ordinal: self.ordinal / num_actions,
            },
            last,
        ))
    }

    /// One-based presentation label: `∅`, `1`, `1,2`, ...
    pub fn label(&self) -> String {
        if self.sequence.is_empty() {
            "∅".to_string()
        } else {
            self.sequence
                .iter()
                .map(|a| (a + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
    }
}

impl fmt::Display for HistoryIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// All histories at stage `t` in lexicographic order.
pub fn histories(num_actions: usize, stage: usize) -> Vec<HistoryIndex> {
    (0..history_count(num_actions, stage))
        .map(|o| HistoryIndex::from_ordinal(stage, o, num_actions))
        .collect()
}

pub fn enumerate_histories(spec: &GameSpec, stage: usize) -> Vec<HistoryIndex> {
    histories(spec.num_actions_p1(), stage)
}

/// The informed player's full information `F_t = (S_t, I_t)`.
///
/// Ordinal layout: the state tuple is the major key and the action tuple the
/// minor key, i.e. `ordinal = ord(S_t) * |A|^(t-1) + ord(I_t)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FullHistoryIndex {
    stage: usize,
    states: Vec<usize>,
    actions: Vec<usize>,
    ordinal: usize,
}

impl FullHistoryIndex {
    pub fn new(states: Vec<usize>, actions: Vec<usize>, num_states: usize, num_actions: usize) -> Self {
        assert_eq!(states.len(), actions.len() + 1);
        let s = states.iter().fold(0, |acc, &k| acc * num_states + k);
        let a = actions.iter().fold(0, |acc, &x| acc * num_actions + x);
        Self {
            stage: states.len(),
            ordinal: s * ipow(num_actions, actions.len()) + a,
            states,
            actions,
        }
    }

    pub fn from_ordinal(stage: usize, ordinal: usize, num_states: usize, num_actions: usize) -> Self {
        let per_states = ipow(num_actions, stage - 1);
        let mut s = ordinal / per_states;
        let mut a = ordinal % per_states;
        let mut states = vec![0; stage];
        for slot in states.iter_mut().rev() {
            *slot = s % num_states;
            s /= num_states;
        }
        let mut actions = vec![0; stage - 1];
        for slot in actions.iter_mut().rev() {
            *slot = a % num_actions;
            a /= num_actions;
        }
        Self {
            stage,
            states,
            actions,
            ordinal,
        }
    }

    pub fn count(num_states: usize, num_actions: usize, stage: usize) -> usize {
        ipow(num_states, stage) * ipow(num_actions, stage - 1)
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn ordinal(&self) -> usize {
        self.ordinal
    }

    pub fn action_history(&self, num_actions: usize) -> HistoryIndex {
        HistoryIndex::from_sequence(self.actions.clone(), num_actions)
    }
}

/// Probability vector over states; the informed player's sufficient statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief(Vec<f64>);

impl Belief {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let mut probs = probs;
        if probs.is_empty() {
            return Err(invalid("belief must not be empty"));
        }
        normalize_distribution("belief", &mut probs)?;
        Ok(Self(probs))
    }

    /// Wraps without renormalizing. Callers guarantee the invariants.
    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Self(probs)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn vertex(n: usize, k: usize) -> Self {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        Self(v)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Signed vector over states; the uninformed player's sufficient statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct Regret(Vec<f64>);

impl Regret {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(invalid("regret entries must be finite"));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `p^T alpha`
    pub fn dot(&self, p: &Belief) -> f64 {
        self.0.iter().zip(p.probs()).map(|(a, b)| a * b).sum()
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self(self.0.iter().map(|x| x + c).collect())
    }
}

/// Behavior strategy of the informed player, `sigma_t(k, I_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InformedStrategy {
    num_states: usize,
    num_actions: usize,
    /// `stages[t-1][ordinal * |K| + k]`
    stages: Vec<Vec<Vec<f64>>>,
}

impl InformedStrategy {
    /// All-zero table for the given sizes.
    pub fn zeros(num_states: usize, num_actions: usize, horizon: usize) -> Self {
        let stages = (1..=horizon)
            .map(|t| vec![vec![0.0; num_actions]; history_count(num_actions, t) * num_states])
            .collect();
        Self {
            num_states,
            num_actions,
            stages,
        }
    }

    pub fn horizon(&self) -> usize {
        self.stages.len()
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn get(&self, stage: usize, history: usize, state: usize) -> &[f64] {
        &self.stages[stage - 1][history * self.num_states + state]
    }

    pub fn set(&mut self, stage: usize, history: usize, state: usize, mix: Vec<f64>) {
        debug_assert_eq!(mix.len(), self.num_actions);
        self.stages[stage - 1][history * self.num_states + state] = mix;
    }

    /// Checks every entry is a distribution or exactly zero.
    pub fn validate(&self) -> Result<()> {
        for (t, table) in self.stages.iter().enumerate() {
            for (i, mix) in table.iter().enumerate() {
                if mix.iter().all(|&x| x == 0.0) {
                    continue;
                }
                let sum: f64 = mix.iter().sum();
                if mix.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > PROB_SUM_TOL {
                    return Err(Error::Strategy(format!(
                        "informed mix at stage {} history {} state {} is not a distribution",
                        t + 1,
                        i / self.num_states,
                        i % self.num_states
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Behavior strategy of the uninformed player, `tau_t(I_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UninformedStrategy {
    num_actions_p1: usize,
    num_actions_p2: usize,
    /// `stages[t-1][ordinal]`
    stages: Vec<Vec<Vec<f64>>>,
}

impl UninformedStrategy {
    pub fn zeros(num_actions_p1: usize, num_actions_p2: usize, horizon: usize) -> Self {
        let stages = (1..=horizon)
            .map(|t| vec![vec![0.0; num_actions_p2]; history_count(num_actions_p1, t)])
            .collect();
        Self {
            num_actions_p1,
            num_actions_p2,
            stages,
        }
    }

    /// Plays `mix` after every history.
    pub fn stationary(num_actions_p1: usize, mix: &[f64], horizon: usize) -> Self {
        let stages = (1..=horizon)
            .map(|t| vec![mix.to_vec(); history_count(num_actions_p1, t)])
            .collect();
        Self {
            num_actions_p1,
            num_actions_p2: mix.len(),
            stages,
        }
    }

    pub fn horizon(&self) -> usize {
        self.stages.len()
    }

    pub fn num_actions_p1(&self) -> usize {
        self.num_actions_p1
    }

    pub fn num_actions_p2(&self) -> usize {
        self.num_actions_p2
    }

    pub fn get(&self, stage: usize, history: usize) -> &[f64] {
        &self.stages[stage - 1][history]
    }

    pub fn set(&mut self, stage: usize, history: usize, mix: Vec<f64>) {
        debug_assert_eq!(mix.len(), self.num_actions_p2);
        self.stages[stage - 1][history] = mix;
    }

    pub fn validate(&self) -> Result<()> {
        for (t, table) in self.stages.iter().enumerate() {
            for (h, mix) in table.iter().enumerate() {
                let sum: f64 = mix.iter().sum();
                if mix.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > PROB_SUM_TOL {
                    return Err(Error::Strategy(format!(
                        "uninformed mix at stage {} history {h} is not a distribution",
                        t + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Clips LP round-off into an exact distribution.
pub(crate) fn clean_distribution(v: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = v.iter().map(|&x| if x > 0.0 { x } else { 0.0 }).collect();
    let sum: f64 = clipped.iter().sum();
    if sum > 0.0 {
        clipped.iter().map(|x| x / sum).collect()
    } else {
        clipped
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intrusion_json() -> &'static str {
        include_str!("../data/intrusion_tables.json")
    }

    #[test]
    fn loads_case_study() {
        let g = GameSpec::from_json_str(intrusion_json()).unwrap();
        assert_eq!((g.num_states(), g.num_actions_p1(), g.num_actions_p2()), (2, 2, 2));
        assert_eq!(g.transition_matrix(0), &[vec![0.9, 0.1], vec![0.1, 0.9]]);
        assert_eq!(g.transition_matrix(1), &[vec![0.8, 0.2], vec![0.2, 0.8]]);
        assert_eq!(g.payoff_matrix(0), &[vec![3.0, -10.0], vec![-1.0, 0.0]]);
        assert_eq!(g.payoff_matrix(1), &[vec![3.0, -11.0], vec![-2.0, 0.0]]);
        assert_eq!(g.horizon(), 3);
    }

    #[test]
    fn stage_payoff_lookups() {
        let g = GameSpec::from_json_str(intrusion_json()).unwrap();
        let nv = g.state_index("nv").unwrap();
        let v = g.state_index("v").unwrap();
        let hl = g.p1_index("hl").unwrap();
        let ll = g.p1_index("ll").unwrap();
        let a = g.p2_index("a").unwrap();
        let na = g.p2_index("na").unwrap();
        assert_eq!(stage_payoff(&g, nv, hl, na).unwrap(), -10.0);
        assert_eq!(stage_payoff(&g, v, ll, a).unwrap(), -2.0);
        assert!(matches!(
            stage_payoff(&g, 2, 0, 0),
            Err(Error::IndexOutOfRange(_))
        ));
        let zero = GameSpec::new(
            vec![vec![vec![0.0; 2]; 2]; 2],
            vec![vec![vec![0.5, 0.5]; 2]; 2],
            vec![0.5, 0.5],
            1,
        )
        .unwrap();
        assert_eq!(stage_payoff(&zero, 1, 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_initial() {
        let text = intrusion_json().replace("\"initial\": [0.5, 0.5]", "\"initial\": [0.6, 0.6]");
        let err = GameSpec::from_json_str(&text).unwrap_err();
        match err {
            Error::Validation(msg) => assert!(msg.contains("initial distribution"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_transition_row() {
        let text = intrusion_json().replace("[0.2, 0.8]", "[0.25, 0.8]");
        let err = GameSpec::from_json_str(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("transition row 1 (v) of Q_ll sums to 1.05"), "{msg}");
    }

    #[test]
    fn rejects_malformed_and_mismatched() {
        assert!(matches!(GameSpec::from_json_str("{"), Err(Error::Parse(_))));
        let text = intrusion_json().replace("\"nv\": [[3", "\"xx\": [[3");
        assert!(matches!(GameSpec::from_json_str(&text), Err(Error::Validation(_))));
        let text = intrusion_json().replace("[-1, 0]", "[-1, 0, 4]");
        assert!(matches!(GameSpec::from_json_str(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn renormalizes_within_tolerance() {
        let g = GameSpec::new(
            vec![vec![vec![1.0]]; 2],
            vec![vec![vec![0.5 + 4e-10, 0.5], vec![0.0, 1.0]]],
            vec![1.0 + 1e-10, 0.0],
            1,
        )
        .unwrap();
        let row = &g.transition_matrix(0)[0];
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(g.initial().probs(), &[1.0, 0.0]);
    }

    #[test]
    fn single_state_game_is_valid() {
        let g = GameSpec::new(
            vec![vec![vec![3.0, -10.0], vec![-1.0, 0.0]]],
            vec![vec![vec![1.0]], vec![vec![1.0]]],
            vec![1.0],
            2,
        )
        .unwrap();
        assert_eq!(g.num_states(), 1);
    }

    #[test]
    fn round_trip_serialization() {
        let g = GameSpec::from_json_str(intrusion_json()).unwrap();
        let again = GameSpec::from_json_str(&g.to_json_string()).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn enumerates_histories_lexicographically() {
        let seqs: Vec<Vec<usize>> = histories(2, 3).iter().map(|h| h.sequence().to_vec()).collect();
        assert_eq!(seqs, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let root = histories(2, 1);
        assert_eq!(root.len(), 1);
        assert!(root[0].sequence().is_empty());
        assert_eq!(histories(3, 2).len(), 3);
        for (i, h) in histories(3, 4).iter().enumerate() {
            assert_eq!(h.ordinal(), i);
        }
    }

    #[test]
    fn child_and_parent_ordinals() {
        for t in 1..4 {
            for h in histories(3, t) {
                for a in 0..3 {
                    let c = h.child(a, 3);
                    assert_eq!(c.ordinal(), h.ordinal() * 3 + a);
                    assert_eq!(c, HistoryIndex::from_ordinal(t + 1, c.ordinal(), 3));
                    assert_eq!(c.parent(3), Some((h.clone(), a)));
                }
            }
        }
        assert_eq!(HistoryIndex::root().parent(2), None);
        assert_eq!(HistoryIndex::from_sequence(vec![0, 1], 2).label(), "1,2");
    }

    #[test]
    fn full_history_bijection() {
        let (nk, na) = (2, 3);
        for t in 1..4 {
            let n = FullHistoryIndex::count(nk, na, t);
            assert_eq!(n, ipow(nk, t) * ipow(na, t - 1));
            for o in 0..n {
                let f = FullHistoryIndex::from_ordinal(t, o, nk, na);
                let g = FullHistoryIndex::new(f.states().to_vec(), f.actions().to_vec(), nk, na);
                assert_eq!(g.ordinal(), o);
            }
        }
    }
}
