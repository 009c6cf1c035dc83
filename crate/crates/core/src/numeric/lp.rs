//! Exact two-phase simplex over [`Rational`].
//!
//! Rows are stored sparsely; the objective rows are dense. Pivoting follows
//! Bland's rule (lowest-index entering column, lowest-index leaving basic
//! variable among ratio ties), which guarantees termination and makes the
//! returned vertex a deterministic function of the input.

use super::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    num_vars: usize,
    sense: Sense,
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
    nonneg: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value at `point`; zero unless `status` is `Optimal`.
    pub value: Rational,
    pub point: Vec<Rational>,
}

impl LinearProgram {
    /// A program over `num_vars` non-negative variables with a zero objective.
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        LinearProgram {
            num_vars,
            sense,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
            nonneg: vec![true; num_vars],
        }
    }

    pub fn maximize(objective: Vec<Rational>) -> Self {
        let mut lp = LinearProgram::new(objective.len(), Sense::Maximize);
        lp.objective = objective;
        lp
    }

    pub fn minimize(objective: Vec<Rational>) -> Self {
        let mut lp = LinearProgram::new(objective.len(), Sense::Minimize);
        lp.objective = objective;
        lp
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_nonneg(&self, var: usize) -> bool {
        self.nonneg[var]
    }

    pub fn set_objective_coeff(&mut self, var: usize, coeff: Rational) {
        self.objective[var] = coeff;
    }

    /// Lifts the non-negativity bound of `var`.
    pub fn set_free(&mut self, var: usize) {
        self.nonneg[var] = false;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(
            coeffs.len(),
            self.num_vars,
            "constraint row has {} coefficients, program has {} variables",
            coeffs.len(),
            self.num_vars
        );
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    /// Adds a row given as `(variable, coefficient)` pairs; repeated variables accumulate.
    pub fn add_sparse(&mut self, terms: &[(usize, Rational)], relation: Relation, rhs: Rational) {
        let mut coeffs = vec![Rational::zero(); self.num_vars];
        for (var, c) in terms {
            coeffs[*var] += c;
        }
        self.add_constraint(coeffs, relation, rhs);
    }

    pub fn evaluate(&self, point: &[Rational]) -> Rational {
        self.objective.iter().zip(point).map(|(c, x)| c * x).sum()
    }

    /// Exact feasibility check of `point` against every row and sign bound.
    pub fn is_feasible(&self, point: &[Rational]) -> bool {
        if point.len() != self.num_vars {
            return false;
        }
        if point.iter().zip(&self.nonneg).any(|(x, nn)| *nn && x.is_negative()) {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs: Rational = c.coeffs.iter().zip(point).map(|(a, x)| a * x).sum();
            match c.relation {
                Relation::Le => lhs <= c.rhs,
                Relation::Eq => lhs == c.rhs,
                Relation::Ge => lhs >= c.rhs,
            }
        })
    }

    pub fn solve(&self) -> LpSolution {
        Simplex::build(self).run(self)
    }
}

type SparseRow = Vec<(usize, Rational)>;

fn row_get(row: &SparseRow, col: usize) -> Option<&Rational> {
    row.binary_search_by_key(&col, |(c, _)| *c).ok().map(|i| &row[i].1)
}

/// `target -= factor * source`, both sorted by column.
fn row_axpy(target: &SparseRow, factor: &Rational, source: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(target.len() + source.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < source.len() {
        let ti = target.get(i).map(|e| e.0).unwrap_or(usize::MAX);
        let sj = source.get(j).map(|e| e.0).unwrap_or(usize::MAX);
        if ti < sj {
            out.push(target[i].clone());
            i += 1;
        } else if sj < ti {
            out.push((sj, -(factor * &source[j].1)));
            j += 1;
        } else {
            let v = &target[i].1 - factor * &source[j].1;
            if !v.is_zero() {
                out.push((ti, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

struct Simplex {
    rows: Vec<SparseRow>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    num_cols: usize,
    /// First artificial column; columns at or beyond it never re-enter.
    artificial_start: usize,
    /// Standard-form column(s) of each original variable: (positive part, negative part).
    var_cols: Vec<(usize, Option<usize>)>,
    /// Minimization costs over standard-form columns.
    cost: Vec<Rational>,
}

impl Simplex {
    fn build(lp: &LinearProgram) -> Simplex {
        let mut var_cols = Vec::with_capacity(lp.num_vars);
        let mut next = 0;
        for v in 0..lp.num_vars {
            if lp.nonneg[v] {
                var_cols.push((next, None));
                next += 1;
            } else {
                var_cols.push((next, Some(next + 1)));
                next += 2;
            }
        }
        let structural = next;
        let slack_count = lp.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
        let artificial_start = structural + slack_count;

        let mut rows = Vec::with_capacity(lp.constraints.len());
        let mut rhs = Vec::with_capacity(lp.constraints.len());
        let mut basis = Vec::with_capacity(lp.constraints.len());
        let mut slack = structural;
        let mut artificial = artificial_start;
        for c in &lp.constraints {
            let flip = c.rhs.is_negative();
            let relation = match (c.relation, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            let mut row: SparseRow = Vec::new();
            for (v, a) in c.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let a = if flip { -a } else { a.clone() };
                let (pos, neg) = var_cols[v];
                row.push((pos, a.clone()));
                if let Some(neg) = neg {
                    row.push((neg, -a));
                }
            }
            match relation {
                Relation::Le => {
                    row.push((slack, Rational::one()));
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row.push((slack, -Rational::one()));
                    row.push((artificial, Rational::one()));
                    basis.push(artificial);
                    slack += 1;
                    artificial += 1;
                }
                Relation::Eq => {
                    row.push((artificial, Rational::one()));
                    basis.push(artificial);
                    artificial += 1;
                }
            }
            row.sort_by_key(|e| e.0);
            rows.push(row);
            rhs.push(if flip { -&c.rhs } else { c.rhs.clone() });
        }
        let num_cols = artificial;

        let mut cost = vec![Rational::zero(); num_cols];
        for (v, c) in lp.objective.iter().enumerate() {
            let c = match lp.sense {
                Sense::Minimize => c.clone(),
                Sense::Maximize => -c,
            };
            let (pos, neg) = var_cols[v];
            if let Some(neg) = neg {
                cost[neg] = -&c;
            }
            cost[pos] = c;
        }

        Simplex {
            rows,
            rhs,
            basis,
            num_cols,
            artificial_start,
            var_cols,
            cost,
        }
    }

    fn reduced_costs(&self, cost: &[Rational]) -> (Vec<Rational>, Rational) {
        let mut d = cost.to_vec();
        let mut value = Rational::zero();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (col, a) in row {
                d[*col] -= cb * a;
            }
            value += cb * &self.rhs[i];
        }
        (d, value)
    }

    fn pivot(&mut self, row: usize, col: usize, objectives: &mut [&mut (Vec<Rational>, Rational)]) {
        let piv = row_get(&self.rows[row], col).expect("pivot on a zero entry").clone();
        let inv = piv.recip();
        let pivot_row: SparseRow = self.rows[row].iter().map(|(c, a)| (*c, a * &inv)).collect();
        let pivot_rhs = &self.rhs[row] * &inv;
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let factor = match row_get(&self.rows[i], col) {
                Some(f) => f.clone(),
                None => continue,
            };
            self.rows[i] = row_axpy(&self.rows[i], &factor, &pivot_row);
            let delta = &factor * &pivot_rhs;
            self.rhs[i] -= delta;
        }
        for obj in objectives.iter_mut() {
            let factor = obj.0[col].clone();
            if factor.is_zero() {
                continue;
            }
            for (c, a) in &pivot_row {
                obj.0[*c] -= &factor * a;
            }
            // value tracks c_B x_B, which grows by factor * pivot_rhs
            obj.1 += &factor * &pivot_rhs;
        }
        self.rows[row] = pivot_row;
        self.rhs[row] = pivot_rhs;
        self.basis[row] = col;
    }

    /// Runs Bland-rule iterations on `objective` (reduced costs, value).
    /// Returns false if the objective is unbounded below.
    fn iterate(
        &mut self,
        objective: &mut (Vec<Rational>, Rational),
        passenger: Option<&mut (Vec<Rational>, Rational)>,
        allow_artificial: bool,
    ) -> bool {
        let mut passenger = passenger;
        loop {
            let limit = if allow_artificial {
                self.num_cols
            } else {
                self.artificial_start
            };
            let entering = (0..limit).find(|&j| objective.0[j].is_negative());
            let Some(col) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let Some(a) = row_get(row, col) else { continue };
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((row, _)) = best else {
                return false;
            };
            match passenger.as_deref_mut() {
                Some(p) => self.pivot(row, col, &mut [objective, p]),
                None => self.pivot(row, col, &mut [objective]),
            }
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpSolution {
        let has_artificial = self.basis.iter().any(|&b| b >= self.artificial_start);
        if has_artificial {
            let mut phase1_cost = vec![Rational::zero(); self.num_cols];
            for c in phase1_cost.iter_mut().skip(self.artificial_start) {
                *c = Rational::one();
            }
            let mut phase1 = self.reduced_costs(&phase1_cost);
            let ok = self.iterate(&mut phase1, None, true);
            debug_assert!(ok, "phase one is bounded below by zero");
            if phase1.1.is_positive() {
                return LpSolution {
                    status: LpStatus::Infeasible,
                    value: Rational::zero(),
                    point: vec![Rational::zero(); lp.num_vars],
                };
            }
            self.drive_out_artificials();
        }

        let cost = self.cost.clone();
        let mut phase2 = self.reduced_costs(&cost);
        if !self.iterate(&mut phase2, None, false) {
            return LpSolution {
                status: LpStatus::Unbounded,
                value: Rational::zero(),
                point: vec![Rational::zero(); lp.num_vars],
            };
        }

        let mut std_point = vec![Rational::zero(); self.num_cols];
        for (i, &b) in self.basis.iter().enumerate() {
            std_point[b] = self.rhs[i].clone();
        }
        let point: Vec<Rational> = self
            .var_cols
            .iter()
            .map(|&(pos, neg)| match neg {
                Some(neg) => &std_point[pos] - &std_point[neg],
                None => std_point[pos].clone(),
            })
            .collect();
        let value = lp.evaluate(&point);
        LpSolution {
            status: LpStatus::Optimal,
            value,
            point,
        }
    }

    /// After a successful phase one, pivots zero-level artificials out of the
    /// basis or drops their rows when the row is redundant.
    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < self.artificial_start {
                i += 1;
                continue;
            }
            let replacement = self.rows[i]
                .iter()
                .find(|(c, a)| *c < self.artificial_start && !a.is_zero())
                .map(|(c, _)| *c);
            match replacement {
                Some(col) => {
                    self.pivot(i, col, &mut []);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.rhs.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    #[test]
    fn single_bound() {
        let mut lp = LinearProgram::maximize(vec![rat(1, 1)]);
        lp.add_constraint(vec![rat(1, 1)], Relation::Le, rat(3, 2));
        let sol = lp.solve();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.value, rat(3, 2));
        assert_eq!(sol.point, vec![rat(3, 2)]);
    }

    #[test]
    fn degenerate_objective_tie() {
        let mut lp = LinearProgram::maximize(vec![rat(1, 1), rat(1, 1)]);
        lp.add_constraint(vec![rat(1, 1), rat(1, 1)], Relation::Le, rat(1, 1));
        let sol = lp.solve();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.value, rat(1, 1));
        assert!(lp.is_feasible(&sol.point));
        // deterministic vertex
        assert_eq!(lp.solve(), sol);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::maximize(vec![rat(1, 1)]);
        lp.add_constraint(vec![rat(1, 1)], Relation::Ge, rat(2, 1));
        lp.add_constraint(vec![rat(1, 1)], Relation::Le, rat(1, 1));
        assert_eq!(lp.solve().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::maximize(vec![rat(1, 1), rat(-1, 1)]);
        lp.add_constraint(vec![rat(1, 1), rat(-1, 1)], Relation::Ge, rat(0, 1));
        assert_eq!(lp.solve().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_free_variables() {
        // minimize |shift| style: x free, x = -3/4, minimize x + 2y with y >= 0
        let mut lp = LinearProgram::minimize(vec![rat(1, 1), rat(2, 1)]);
        lp.set_free(0);
        lp.add_constraint(vec![rat(1, 1), rat(0, 1)], Relation::Eq, rat(-3, 4));
        let sol = lp.solve();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.point, vec![rat(-3, 4), rat(0, 1)]);
        assert_eq!(sol.value, rat(-3, 4));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::maximize(vec![rat(1, 1), rat(0, 1)]);
        lp.add_constraint(vec![rat(1, 1), rat(1, 1)], Relation::Eq, rat(1, 1));
        lp.add_constraint(vec![rat(2, 1), rat(2, 1)], Relation::Eq, rat(2, 1));
        let sol = lp.solve();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.value, rat(1, 1));
    }

    #[test]
    fn negative_rhs_rows_are_normalized() {
        // -x <= -1  <=>  x >= 1 ; minimize x
        let mut lp = LinearProgram::minimize(vec![rat(1, 1)]);
        lp.add_constraint(vec![rat(-1, 1)], Relation::Le, rat(-1, 1));
        let sol = lp.solve();
        assert_eq!(sol.value, rat(1, 1));
    }
}
