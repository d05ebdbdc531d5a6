//! Linear programs with nonnegative and free variables, and a two-phase
//! primal simplex solver over a dense tableau.
//!
//! Every problem is converted to standard form: free variables are split into
//! a difference of two nonnegative columns, rows are sign-normalized so the
//! right-hand side is nonnegative, `<=` rows get a slack, `>=` rows a surplus
//! and an artificial, `=` rows an artificial. Phase one minimizes the sum of
//! the artificials; phase two optimizes the real objective with artificial
//! columns barred from entering.
//!
//! Pricing is Dantzig's rule (most negative reduced cost, lowest index on
//! ties) with a Harris two-pass ratio test. After `2 * (rows + cols)`
//! consecutive iterations without objective progress the solver switches to
//! Bland's rule until the objective moves again.

use std::fmt;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Smallest magnitude accepted as a pivot element.
pub const PIVOT_TOL: f64 = 1e-10;
/// Constraint satisfaction tolerance certified on every optimal solution.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Reduced costs above `-OPTIMALITY_TOL` count as nonnegative.
pub const OPTIMALITY_TOL: f64 = 1e-9;
/// Lower-bound slack accepted on nonnegative variables.
pub const BOUND_TOL: f64 = 1e-9;

const HARRIS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    NonNegative,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    sense: Sense,
    objective: Vec<f64>,
    bounds: Vec<Bound>,
    names: Vec<String>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            objective: Vec::new(),
            bounds: Vec::new(),
            names: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_var(&mut self, bound: Bound, name: impl Into<String>) -> VarId {
        self.objective.push(0.0);
        self.bounds.push(bound);
        self.names.push(name.into());
        VarId(self.bounds.len() - 1)
    }

    pub fn set_objective(&mut self, var: VarId, coef: f64) {
        self.objective[var.0] = coef;
    }

    /// Adds a row; repeated variables in `terms` are summed.
    pub fn add_constraint(&mut self, terms: Vec<(VarId, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            terms,
            relation,
            rhs,
            name: None,
        });
    }

    pub fn add_named_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) {
        self.constraints.push(Constraint {
            terms,
            relation,
            rhs,
            name: Some(name.into()),
        });
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bound(&self, var: VarId) -> Bound {
        self.bounds[var.0]
    }

    pub fn objective_coef(&self, var: VarId) -> f64 {
        self.objective[var.0]
    }

    pub fn var_name(&self, var: VarId) -> &str {
        &self.names[var.0]
    }

    pub fn count_relation(&self, relation: Relation) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.relation == relation)
            .count()
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or sign restriction at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|(v, a)| a * x[v.0]).sum();
            let viol = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if *b == Bound::NonNegative {
                worst = worst.max(-x[j]);
            }
        }
        worst
    }

    fn validate(&self) -> Result<()> {
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(Error::Numerical(format!("row {i} has non-finite rhs")));
            }
            for (v, a) in &c.terms {
                if v.0 >= self.num_vars() {
                    return Err(Error::Numerical(format!(
                        "row {i} references undeclared variable {}",
                        v.0
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::Numerical(format!("row {i} has non-finite coefficient")));
                }
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerical("non-finite objective coefficient".into()));
        }
        Ok(())
    }

    /// CPLEX-LP text rendering for cross-checks with external solvers.
    pub fn to_cplex_lp(&self) -> String {
        let names: Vec<String> = (0..self.num_vars()).map(|j| self.lp_name(j)).collect();
        let mut out = String::new();
        out.push_str(match self.sense {
            Sense::Maximize => "Maximize\n",
            Sense::Minimize => "Minimize\n",
        });
        let obj: Vec<(usize, f64)> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, c)| (j, *c))
            .collect();
        out.push_str(" obj:");
        if obj.is_empty() {
            if let Some(n) = names.first() {
                let _ = write!(out, " 0 {n}");
            }
        } else {
            write_terms(&mut out, obj.into_iter(), &names);
        }
        out.push_str("\nSubject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let label = c
                .name
                .as_deref()
                .map(sanitize)
                .unwrap_or_else(|| format!("c{i}"));
            let _ = write!(out, " {label}:");
            let mut terms: Vec<(usize, f64)> = Vec::new();
            for (v, a) in &c.terms {
                match terms.iter_mut().find(|(j, _)| *j == v.0) {
                    Some(t) => t.1 += a,
                    None => terms.push((v.0, *a)),
                }
            }
            if terms.iter().all(|(_, a)| *a == 0.0) {
                let _ = write!(out, " 0 {}", names[c.terms.first().map_or(0, |t| t.0 .0)]);
            } else {
                write_terms(&mut out, terms.into_iter().filter(|(_, a)| *a != 0.0), &names);
            }
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            let _ = writeln!(out, " {rel} {}", c.rhs);
        }
        out.push_str("Bounds\n");
        for (j, b) in self.bounds.iter().enumerate() {
            if *b == Bound::Free {
                let _ = writeln!(out, " {} free", names[j]);
            }
        }
        out.push_str("End\n");
        out
    }

    fn lp_name(&self, j: usize) -> String {
        let raw = &self.names[j];
        if raw.is_empty() {
            format!("x{j}")
        } else {
            sanitize(raw)
        }
    }
}

fn sanitize(raw: &str) -> String {
    let mut s: String = raw
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if s.chars().next().is_none_or(|c| c.is_ascii_digit()) {
        s.insert(0, 'v');
    }
    s
}

fn write_terms(out: &mut String, terms: impl Iterator<Item = (usize, f64)>, names: &[String]) {
    for (n, (j, a)) in terms.enumerate() {
        let sign = if a < 0.0 { "-" } else { "+" };
        if n == 0 && a >= 0.0 {
            let _ = write!(out, " {} {}", a, names[j]);
        } else {
            let _ = write!(out, " {sign} {} {}", a.abs(), names[j]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective_value: f64,
    pub primal: Vec<f64>,
    pub iterations: usize,
    pub feasibility_tol: f64,
}

impl LpSolution {
    pub fn value(&self, var: VarId) -> f64 {
        self.primal[var.0]
    }

    /// Fails unless the status is optimal.
    pub fn require_optimal(self) -> Result<Self> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            s => Err(Error::LpStatus(s)),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows + 1` rows of `cols + 1` entries; the last row is the objective,
    /// the last column the right-hand side.
    data: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    iterations: usize,
    scratch: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn width(&self) -> usize {
        self.cols + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width() + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn obj_row(&self) -> usize {
        self.rows
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.width();
        let piv = self.data[r * w + e];
        let inv = 1.0 / piv;
        self.scratch.clear();
        for j in 0..w {
            let v = &mut self.data[r * w + j];
            if *v != 0.0 {
                *v *= inv;
                if v.abs() < 1e-15 {
                    *v = 0.0;
                } else {
                    self.scratch.push(j);
                }
            }
        }
        self.data[r * w + e] = 1.0;
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let nz = &self.scratch;
        let update = |row: &mut [f64]| {
            let f = row[e];
            if f != 0.0 {
                for &j in nz {
                    row[j] -= f * prow[j];
                }
                row[e] = 0.0;
            }
        };
        before.chunks_exact_mut(w).for_each(update);
        after.chunks_exact_mut(w).for_each(update);
        self.basis[r] = e;
        self.iterations += 1;
    }

    /// Runs simplex iterations on the current objective row until optimal.
    /// Returns `false` when the problem is unbounded.
    fn optimize(&mut self, max_iterations: usize) -> Result<bool> {
        let stall_limit = 2 * (self.rows + self.cols);
        let mut stall = 0usize;
        let mut bland = false;
        let mut last_obj = -self.rhs(self.obj_row());
        let start = self.iterations;
        let w = self.width();
        loop {
            if self.iterations - start > max_iterations {
                return Err(Error::Numerical(format!(
                    "simplex did not converge within {max_iterations} iterations"
                )));
            }
            let obj = &self.data[self.obj_row() * w..self.obj_row() * w + self.cols];
            let mut entering = None;
            let mut best = -OPTIMALITY_TOL;
            for (j, &d) in obj.iter().enumerate() {
                if self.kinds[j] == ColKind::Artificial {
                    continue;
                }
                if bland {
                    if d < -OPTIMALITY_TOL {
                        entering = Some(j);
                        break;
                    }
                } else if d < best {
                    best = d;
                    entering = Some(j);
                }
            }
            let Some(e) = entering else {
                return Ok(true);
            };
            let Some(r) = self.ratio_test(e, bland) else {
                return Ok(false);
            };
            self.pivot(r, e);
            let obj_now = -self.rhs(self.obj_row());
            if obj_now < last_obj - 1e-12 * (1.0 + last_obj.abs()) {
                last_obj = obj_now;
                stall = 0;
                bland = false;
            } else {
                stall += 1;
                if stall >= stall_limit {
                    bland = true;
                }
            }
        }
    }

    fn ratio_test(&self, e: usize, bland: bool) -> Option<usize> {
        if bland {
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..self.rows {
                let a = self.at(i, e);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    let cand = (ratio, self.basis[i], i);
                    best = match best {
                        None => Some(cand),
                        Some(b) if ratio < b.0 - 1e-12 || (ratio <= b.0 + 1e-12 && cand.1 < b.1) => {
                            Some(cand)
                        }
                        keep => keep,
                    };
                }
            }
            return best.map(|b| b.2);
        }
        // Harris: bound the step with relaxed rows, then take the largest pivot.
        let mut theta = f64::INFINITY;
        for i in 0..self.rows {
            let a = self.at(i, e);
            if a > PIVOT_TOL {
                theta = theta.min((self.rhs(i).max(0.0) + HARRIS_TOL) / a);
            }
        }
        if !theta.is_finite() {
            return None;
        }
        let mut pick: Option<(f64, usize)> = None;
        for i in 0..self.rows {
            let a = self.at(i, e);
            if a > PIVOT_TOL && self.rhs(i).max(0.0) / a <= theta {
                match pick {
                    Some((best, _)) if a <= best => {}
                    _ => pick = Some((a, i)),
                }
            }
        }
        pick.map(|p| p.1)
    }

    fn set_objective(&mut self, costs: &[f64]) {
        let w = self.width();
        let o = self.obj_row() * w;
        for j in 0..w {
            self.data[o + j] = if j < self.cols { costs[j] } else { 0.0 };
        }
        for i in 0..self.rows {
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    let v = self.data[i * w + j];
                    if v != 0.0 {
                        self.data[o + j] -= cb * v;
                    }
                }
            }
        }
        for i in 0..self.rows {
            self.data[o + self.basis[i]] = 0.0;
        }
    }
}

struct StandardForm {
    /// Column indices per original variable: `(plus, minus)`.
    columns: Vec<(usize, Option<usize>)>,
    /// Dense rows after sign normalization, structural and slack columns only.
    a: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    kinds: Vec<ColKind>,
    basis: Vec<usize>,
    costs: Vec<f64>,
}

fn standard_form(lp: &LinearProgram) -> StandardForm {
    let mut kinds = Vec::new();
    let mut columns = Vec::with_capacity(lp.num_vars());
    for b in &lp.bounds {
        let plus = kinds.len();
        kinds.push(ColKind::Structural);
        let minus = match b {
            Bound::NonNegative => None,
            Bound::Free => {
                kinds.push(ColKind::Structural);
                Some(kinds.len() - 1)
            }
        };
        columns.push((plus, minus));
    }

    let mut a: Vec<Vec<(usize, f64)>> = Vec::with_capacity(lp.num_constraints());
    let mut b = Vec::with_capacity(lp.num_constraints());
    let mut relations = Vec::with_capacity(lp.num_constraints());
    for c in &lp.constraints {
        let flip = c.rhs < 0.0;
        let s = if flip { -1.0 } else { 1.0 };
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(c.terms.len() * 2);
        let mut add = |col: usize, v: f64| match row.iter_mut().find(|(j, _)| *j == col) {
            Some(t) => t.1 += v,
            None => row.push((col, v)),
        };
        for (v, coef) in &c.terms {
            let (plus, minus) = columns[v.0];
            add(plus, s * coef);
            if let Some(m) = minus {
                add(m, -s * coef);
            }
        }
        row.retain(|(_, v)| *v != 0.0);
        a.push(row);
        b.push(s * c.rhs);
        relations.push(match (c.relation, flip) {
            (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
            (Relation::Ge, false) | (Relation::Le, true) => Relation::Ge,
            (Relation::Eq, _) => Relation::Eq,
        });
    }

    let mut basis = vec![usize::MAX; a.len()];
    for (i, rel) in relations.iter().enumerate() {
        match rel {
            Relation::Le => {
                kinds.push(ColKind::Slack);
                let col = kinds.len() - 1;
                a[i].push((col, 1.0));
                basis[i] = col;
            }
            Relation::Ge => {
                kinds.push(ColKind::Slack);
                let col = kinds.len() - 1;
                a[i].push((col, -1.0));
            }
            Relation::Eq => {}
        }
    }
    for (i, rel) in relations.iter().enumerate() {
        if *rel != Relation::Le {
            kinds.push(ColKind::Artificial);
            let col = kinds.len() - 1;
            a[i].push((col, 1.0));
            basis[i] = col;
        }
    }

    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut costs = vec![0.0; kinds.len()];
    for (j, &(plus, minus)) in columns.iter().enumerate() {
        costs[plus] = sign * lp.objective[j];
        if let Some(m) = minus {
            costs[m] = -sign * lp.objective[j];
        }
    }

    StandardForm {
        columns,
        a,
        b,
        kinds,
        basis,
        costs,
    }
}

/// Solves `lp` to optimality, or reports infeasibility or unboundedness.
///
/// Deterministic: identical input yields identical output. An optimal
/// solution is certified against the original rows at [`FEASIBILITY_TOL`];
/// if certification fails even after refactoring the final basis, a
/// numerical error is returned.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let sf = standard_form(lp);
    let rows = sf.a.len();
    let cols = sf.kinds.len();
    let w = cols + 1;
    let mut data = vec![0.0; (rows + 1) * w];
    for (i, row) in sf.a.iter().enumerate() {
        for &(j, v) in row {
            data[i * w + j] = v;
        }
        data[i * w + cols] = sf.b[i];
    }
    let mut tab = Tableau {
        rows,
        cols,
        data,
        basis: sf.basis.clone(),
        kinds: sf.kinds.clone(),
        iterations: 0,
        scratch: Vec::with_capacity(w),
    };
    let max_iterations = 1000 + 50 * (rows + cols);

    let has_artificials = sf.kinds.contains(&ColKind::Artificial);
    if has_artificials {
        let phase_one: Vec<f64> = sf
            .kinds
            .iter()
            .map(|k| if *k == ColKind::Artificial { 1.0 } else { 0.0 })
            .collect();
        tab.set_objective(&phase_one);
        // Artificial columns may not re-enter once they leave, but phase one
        // prices them like any other column.
        let saved = std::mem::take(&mut tab.kinds);
        tab.kinds = saved
            .iter()
            .map(|k| if *k == ColKind::Artificial { ColKind::Slack } else { *k })
            .collect();
        tab.optimize(max_iterations)?;
        tab.kinds = saved;
        let infeasibility = -tab.rhs(tab.obj_row());
        let scale = 1.0 + sf.b.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if infeasibility > FEASIBILITY_TOL * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective_value: f64::NAN,
                primal: vec![f64::NAN; lp.num_vars()],
                iterations: tab.iterations,
                feasibility_tol: FEASIBILITY_TOL,
            });
        }
        for i in 0..rows {
            if tab.kinds[tab.basis[i]] != ColKind::Artificial {
                continue;
            }
            let mut pick: Option<(f64, usize)> = None;
            for j in 0..cols {
                if tab.kinds[j] == ColKind::Artificial {
                    continue;
                }
                let a = tab.at(i, j).abs();
                if a > PIVOT_TOL && pick.is_none_or(|(best, _)| a > best) {
                    pick = Some((a, j));
                }
            }
            if let Some((_, j)) = pick {
                tab.pivot(i, j);
            }
        }
    }

    tab.set_objective(&sf.costs);
    if !tab.optimize(max_iterations)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            objective_value: match lp.sense {
                Sense::Maximize => f64::INFINITY,
                Sense::Minimize => f64::NEG_INFINITY,
            },
            primal: vec![f64::NAN; lp.num_vars()],
            iterations: tab.iterations,
            feasibility_tol: FEASIBILITY_TOL,
        });
    }

    let mut x_std = vec![0.0; cols];
    for i in 0..rows {
        x_std[tab.basis[i]] = tab.rhs(i);
    }
    let mut primal = recover(&sf, &x_std);
    if lp.max_violation(&primal) > 1e-9 {
        if let Some(refined) = refactor(&sf, &tab.basis) {
            let candidate = recover(&sf, &refined);
            if lp.max_violation(&candidate) < lp.max_violation(&primal) {
                primal = candidate;
            }
        }
    }
    let violation = lp.max_violation(&primal);
    if violation > FEASIBILITY_TOL {
        return Err(Error::Numerical(format!(
            "optimal basis violates constraints by {violation:e}"
        )));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: lp.objective_at(&primal),
        primal,
        iterations: tab.iterations,
        feasibility_tol: FEASIBILITY_TOL,
    })
}

fn recover(sf: &StandardForm, x_std: &[f64]) -> Vec<f64> {
    sf.columns
        .iter()
        .map(|&(plus, minus)| {
            let p = x_std[plus].max(0.0);
            match minus {
                Some(m) => p - x_std[m].max(0.0),
                None => p,
            }
        })
        .collect()
}

/// Re-solves `B x_B = b` from the original data for the final basis.
fn refactor(sf: &StandardForm, basis: &[usize]) -> Option<Vec<f64>> {
    let m = basis.len();
    let mut pos = vec![usize::MAX; sf.kinds.len()];
    for (i, &j) in basis.iter().enumerate() {
        pos[j] = i;
    }
    let mut bmat = DMatrix::<f64>::zeros(m, m);
    for (i, row) in sf.a.iter().enumerate() {
        for &(j, v) in row {
            if pos[j] != usize::MAX {
                bmat[(i, pos[j])] = v;
            }
        }
    }
    let rhs = DVector::from_column_slice(&sf.b);
    let xb = bmat.lu().solve(&rhs)?;
    let mut x = vec![0.0; sf.kinds.len()];
    for (i, &j) in basis.iter().enumerate() {
        x[j] = xb[i];
    }
    Some(x)
}

/// Optimal play of a one-shot zero-sum matrix game, row player maximizing.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameSolution {
    pub value: f64,
    pub row_mix: Vec<f64>,
    pub col_mix: Vec<f64>,
}

/// Value and optimal mixes of the matrix game `matrix` (rows maximize).
pub fn matrix_game_value(matrix: &[Vec<f64>]) -> Result<MatrixGameSolution> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 || matrix.iter().any(|r| r.len() != cols) {
        return Err(Error::Validation("matrix game must be a nonempty rectangle".into()));
    }

    let mut row_lp = LinearProgram::new(Sense::Maximize);
    let v = row_lp.add_var(Bound::Free, "v");
    row_lp.set_objective(v, 1.0);
    let x: Vec<VarId> = (0..rows)
        .map(|i| row_lp.add_var(Bound::NonNegative, format!("x{i}")))
        .collect();
    for b in 0..cols {
        let mut terms: Vec<(VarId, f64)> = x.iter().enumerate().map(|(i, &xi)| (xi, matrix[i][b])).collect();
        terms.push((v, -1.0));
        row_lp.add_constraint(terms, Relation::Ge, 0.0);
    }
    row_lp.add_constraint(x.iter().map(|&xi| (xi, 1.0)).collect(), Relation::Eq, 1.0);
    let row_sol = solve(&row_lp)?.require_optimal()?;

    let mut col_lp = LinearProgram::new(Sense::Minimize);
    let u = col_lp.add_var(Bound::Free, "u");
    col_lp.set_objective(u, 1.0);
    let y: Vec<VarId> = (0..cols)
        .map(|j| col_lp.add_var(Bound::NonNegative, format!("y{j}")))
        .collect();
    for row in matrix {
        let mut terms: Vec<(VarId, f64)> = y.iter().zip(row).map(|(&yj, &m)| (yj, m)).collect();
        terms.push((u, -1.0));
        col_lp.add_constraint(terms, Relation::Le, 0.0);
    }
    col_lp.add_constraint(y.iter().map(|&yj| (yj, 1.0)).collect(), Relation::Eq, 1.0);
    let col_sol = solve(&col_lp)?.require_optimal()?;

    Ok(MatrixGameSolution {
        value: row_sol.value(v),
        row_mix: crate::game::clean_distribution(&x.iter().map(|&xi| row_sol.value(xi)).collect::<Vec<_>>()),
        col_mix: crate::game::clean_distribution(&y.iter().map(|&yj| col_sol.value(yj)).collect::<Vec<_>>()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Closed-form value of a 2x2 game without a saddle point.
    fn two_by_two_value(m: [[f64; 2]; 2]) -> f64 {
        let [[a, b], [c, d]] = m;
        (a * d - b * c) / (a - b - c + d)
    }

    fn pure_saddle(m: &[Vec<f64>]) -> Option<f64> {
        let maxmin = m
            .iter()
            .map(|r| r.iter().cloned().fold(f64::INFINITY, f64::min))
            .fold(f64::NEG_INFINITY, f64::max);
        let minmax = (0..m[0].len())
            .map(|j| m.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max))
            .fold(f64::INFINITY, f64::min);
        ((maxmin - minmax).abs() < 1e-12).then_some(maxmin)
    }

    #[test]
    fn free_variable_bounded_by_rows() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let v = lp.add_var(Bound::Free, "v");
        lp.set_objective(v, 1.0);
        lp.add_constraint(vec![(v, 1.0)], Relation::Le, 3.0);
        lp.add_constraint(vec![(v, 1.0)], Relation::Le, 0.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective_value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var(Bound::NonNegative, "x");
        lp.add_constraint(vec![(x, 1.0)], Relation::Ge, 1.0);
        lp.add_constraint(vec![(x, 1.0)], Relation::Le, 0.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var(Bound::NonNegative, "x");
        let y = lp.add_var(Bound::Free, "y");
        lp.set_objective(x, 1.0);
        lp.add_constraint(vec![(x, 1.0), (y, -1.0)], Relation::Le, 2.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn rejects_undeclared_variable() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_var(Bound::NonNegative, "x");
        lp.add_constraint(vec![(VarId(5), 1.0)], Relation::Le, 1.0);
        assert!(matches!(solve(&lp), Err(Error::Numerical(_))));
    }

    #[test]
    fn averaged_intrusion_matrix_value() {
        let m = [[3.0, -10.5], [-1.5, 0.0]];
        let expected = two_by_two_value(m);
        assert_abs_diff_eq!(expected, -1.05, epsilon = 1e-12);
        let sol = matrix_game_value(&[m[0].to_vec(), m[1].to_vec()]).unwrap();
        assert_abs_diff_eq!(sol.value, expected, epsilon = 1e-9);
        // row mix (0.1, 0.9) equalizes both columns
        assert_abs_diff_eq!(sol.row_mix[0], 0.1, epsilon = 1e-9);
    }

    #[test]
    fn zero_matrix_game() {
        let sol = matrix_game_value(&vec![vec![0.0; 3]; 2]).unwrap();
        assert_abs_diff_eq!(sol.value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn saddle_point_game() {
        let m = vec![vec![3.0, 1.0], vec![0.0, -1.0]];
        assert_eq!(pure_saddle(&m), Some(1.0));
        let sol = matrix_game_value(&m).unwrap();
        assert_abs_diff_eq!(sol.value, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.row_mix[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.col_mix[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn game_without_saddle() {
        let m = vec![vec![3.0, -10.0], vec![-1.0, 0.0]];
        assert_eq!(pure_saddle(&m), None);
        let sol = matrix_game_value(&m).unwrap();
        assert_abs_diff_eq!(sol.value, -10.0 / 14.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.row_mix[0], 1.0 / 14.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.col_mix[0], 10.0 / 14.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_lp_terminates() {
        // Beale's cycling example under the textbook rule.
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x: Vec<VarId> = (0..4).map(|i| lp.add_var(Bound::NonNegative, format!("x{i}"))).collect();
        for (j, c) in [-0.75, 150.0, -0.02, 6.0].iter().enumerate() {
            lp.set_objective(x[j], *c);
        }
        lp.add_constraint(
            vec![(x[0], 0.25), (x[1], -60.0), (x[2], -0.04), (x[3], 9.0)],
            Relation::Le,
            0.0,
        );
        lp.add_constraint(
            vec![(x[0], 0.5), (x[1], -90.0), (x[2], -0.02), (x[3], 3.0)],
            Relation::Le,
            0.0,
        );
        lp.add_constraint(vec![(x[2], 1.0)], Relation::Le, 1.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective_value, -0.05, epsilon = 1e-9);
    }

    #[test]
    fn cplex_dump_lists_sections() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let v = lp.add_var(Bound::Free, "ell[0]");
        let x = lp.add_var(Bound::NonNegative, "3x");
        lp.set_objective(v, 1.0);
        lp.add_named_constraint("pay b0", vec![(x, 2.0), (v, -1.0)], Relation::Ge, 0.0);
        let text = lp.to_cplex_lp();
        assert!(text.starts_with("Maximize\n obj: 1 ell_0_\n"), "{text}");
        assert!(text.contains(" pay_b0: 2 v3x - 1 ell_0_ >= 0\n"), "{text}");
        assert!(text.contains("Bounds\n ell_0_ free\nEnd\n"), "{text}");
    }

    fn random_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            prop::collection::vec(prop::collection::vec(-10i32..=10, c), r)
                .prop_map(|m| m.into_iter().map(|row| row.into_iter().map(f64::from).collect()).collect())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matrix_game_mixes_attain_value(m in random_matrix()) {
            let sol = matrix_game_value(&m).unwrap();
            let cols = m[0].len();
            let row_guarantee = (0..cols)
                .map(|j| m.iter().zip(&sol.row_mix).map(|(r, x)| r[j] * x).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            let col_guarantee = m
                .iter()
                .map(|r| r.iter().zip(&sol.col_mix).map(|(a, y)| a * y).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((row_guarantee - sol.value).abs() < 1e-7);
            prop_assert!((col_guarantee - sol.value).abs() < 1e-7);
        }

        #[test]
        fn negated_transpose_flips_value(m in random_matrix()) {
            let t: Vec<Vec<f64>> = (0..m[0].len()).map(|j| m.iter().map(|r| -r[j]).collect()).collect();
            let a = matrix_game_value(&m).unwrap();
            let b = matrix_game_value(&t).unwrap();
            prop_assert!((a.value + b.value).abs() < 1e-7);
        }

        #[test]
        fn random_feasible_points_never_beat_optimum(
            m in random_matrix(),
            raw in prop::collection::vec(0.0f64..1.0, 4),
        ) {
            // x on the simplex is feasible for the row player's LP with v = min column payoff.
            let rows = m.len();
            let mut x: Vec<f64> = raw.iter().take(rows).cloned().collect();
            while x.len() < rows { x.push(0.5); }
            let s: f64 = x.iter().sum();
            if s > 0.0 { x.iter_mut().for_each(|v| *v /= s); } else { x = vec![1.0 / rows as f64; rows]; }
            let cand = (0..m[0].len())
                .map(|j| m.iter().zip(&x).map(|(r, xi)| r[j] * xi).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            let sol = matrix_game_value(&m).unwrap();
            prop_assert!(cand <= sol.value + 1e-7);
        }

        #[test]
        fn objective_scaling(m in random_matrix(), lambda in 0.1f64..10.0) {
            let mut lp = LinearProgram::new(Sense::Maximize);
            let v = lp.add_var(Bound::Free, "v");
            let x: Vec<VarId> = (0..m.len()).map(|i| lp.add_var(Bound::NonNegative, format!("x{i}"))).collect();
            for b in 0..m[0].len() {
                let mut terms: Vec<(VarId, f64)> = x.iter().enumerate().map(|(i, &xi)| (xi, m[i][b])).collect();
                terms.push((v, -1.0));
                lp.add_constraint(terms, Relation::Ge, 0.0);
            }
            lp.add_constraint(x.iter().map(|&xi| (xi, 1.0)).collect(), Relation::Eq, 1.0);
            lp.set_objective(v, 1.0);
            let base = solve(&lp).unwrap();
            lp.set_objective(v, lambda);
            let scaled = solve(&lp).unwrap();
            prop_assert!((scaled.objective_value - lambda * base.objective_value).abs() < 1e-7 * (1.0 + lambda));
            let support = |s: &LpSolution| x.iter().map(|&xi| s.value(xi) > 1e-9).collect::<Vec<_>>();
            prop_assert_eq!(support(&base), support(&scaled));
        }
    }
}
