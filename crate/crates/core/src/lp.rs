//! Exact two-phase simplex over `BigRational`.
//!
//! The problems solved here are tiny (a handful of variables, at most a few
//! hundred constraints), so a dense tableau with Bland's rule is plenty and
//! keeps every answer exact.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub(crate) type Q = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub coeffs: Vec<Q>,
    pub relation: Relation,
    pub rhs: Q,
}

impl Constraint {
    pub fn new(coeffs: Vec<Q>, relation: Relation, rhs: Q) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }
}

/// Maximise `objective · x` subject to `constraints`; variables flagged in
/// `free` are unrestricted in sign, all others are non-negative.
#[derive(Debug, Clone)]
pub(crate) struct LinearProgram {
    pub objective: Vec<Q>,
    pub free: Vec<bool>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v = &*v / &p;
        }
        self.rhs[row] = &self.rhs[row] / &p;
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let f = self.rows[r][col].clone();
            for c in 0..self.rows[r].len() {
                if !self.rows[row][c].is_zero() {
                    let d = &f * &self.rows[row][c];
                    self.rows[r][c] -= d;
                }
            }
            let d = &f * &self.rhs[row];
            self.rhs[r] -= d;
        }
        self.basis[row] = col;
    }

    /// Bland-rule primal simplex maximising `cost · x` over columns allowed
    /// by `enterable`. Returns `false` when the objective is unbounded.
    fn run(&mut self, cost: &[Q], enterable: &[bool]) -> bool {
        let ncols = cost.len();
        loop {
            let mut entering = None;
            for j in 0..ncols {
                if !enterable[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = -cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.rows[i][j].is_zero() && !cost[b].is_zero() {
                        reduced += &cost[b] * &self.rows[i][j];
                    }
                }
                if reduced.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if a.is_positive() {
                    let ratio = &self.rhs[i] / a;
                    let better = match &leaving {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            match leaving {
                None => return false,
                Some((row, _)) => self.pivot(row, col),
            }
        }
    }

    fn objective(&self, cost: &[Q]) -> Q {
        self.basis
            .iter()
            .zip(&self.rhs)
            .fold(Q::zero(), |acc, (&b, r)| acc + &cost[b] * r)
    }
}

impl LinearProgram {
    pub fn solve(&self) -> LpOutcome {
        let nvars = self.objective.len();
        // Column layout: one or two columns per original variable, then one
        // slack per inequality, then one artificial per row.
        let mut var_cols: Vec<(usize, Option<usize>)> = Vec::with_capacity(nvars);
        let mut ncols = 0;
        for v in 0..nvars {
            if self.free[v] {
                var_cols.push((ncols, Some(ncols + 1)));
                ncols += 2;
            } else {
                var_cols.push((ncols, None));
                ncols += 1;
            }
        }
        let structural = ncols;
        let m = self.constraints.len();
        let slack_count = self
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let total = structural + slack_count + m;
        let art0 = structural + slack_count;

        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut next_slack = structural;
        for (i, c) in self.constraints.iter().enumerate() {
            let mut row = vec![Q::zero(); total];
            for (v, a) in c.coeffs.iter().enumerate() {
                let (p, n) = var_cols[v];
                row[p] = a.clone();
                if let Some(n) = n {
                    row[n] = -a.clone();
                }
            }
            match c.relation {
                Relation::Le => {
                    row[next_slack] = Q::one();
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -Q::one();
                    next_slack += 1;
                }
                Relation::Eq => {}
            }
            let mut b = c.rhs.clone();
            if b.is_negative() {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
                b = -b;
            }
            row[art0 + i] = Q::one();
            rows.push(row);
            rhs.push(b);
        }
        let mut tab = Tableau {
            rows,
            rhs,
            basis: (art0..art0 + m).collect(),
        };

        let mut phase1 = vec![Q::zero(); total];
        for c in phase1.iter_mut().skip(art0) {
            *c = -Q::one();
        }
        let all = vec![true; total];
        tab.run(&phase1, &all);
        if tab.objective(&phase1).is_negative() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art0 {
                match (0..art0).find(|&j| !tab.rows[i][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.rhs.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }

        let mut cost = vec![Q::zero(); total];
        for (v, c) in self.objective.iter().enumerate() {
            let (p, n) = var_cols[v];
            cost[p] = c.clone();
            if let Some(n) = n {
                cost[n] = -c.clone();
            }
        }
        let enterable: Vec<bool> = (0..total).map(|j| j < art0).collect();
        if !tab.run(&cost, &enterable) {
            return LpOutcome::Unbounded;
        }
        let mut col_val = vec![Q::zero(); total];
        for (i, &b) in tab.basis.iter().enumerate() {
            col_val[b] = tab.rhs[i].clone();
        }
        let x: Vec<Q> = var_cols
            .iter()
            .map(|&(p, n)| match n {
                Some(n) => &col_val[p] - &col_val[n],
                None => col_val[p].clone(),
            })
            .collect();
        let value = x
            .iter()
            .zip(&self.objective)
            .fold(Q::zero(), |acc, (a, b)| acc + a * b);
        LpOutcome::Optimal { x, value }
    }
}

/// Basis of the null space `{y : rows · y = 0}` by exact Gauss-Jordan.
pub(crate) fn null_space(rows: &[Vec<Q>], dim: usize) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..dim {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let lead = m[r][c].clone();
        for v in m[r].iter_mut() {
            *v = &*v / &lead;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in 0..dim {
                    let d = &f * &m[r][k];
                    m[i][k] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in (0..dim).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Q::zero(); dim];
        v[free] = Q::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn small_maximisation() {
        // max x + y, x + 2y <= 4, 3x + y <= 6, x, y >= 0  ->  (8/5, 6/5)
        let lp = LinearProgram {
            objective: vec![q(1, 1), q(1, 1)],
            free: vec![false, false],
            constraints: vec![
                Constraint::new(vec![q(1, 1), q(2, 1)], Relation::Le, q(4, 1)),
                Constraint::new(vec![q(3, 1), q(1, 1)], Relation::Le, q(6, 1)),
            ],
        };
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![q(8, 5), q(6, 5)]);
                assert_eq!(value, q(14, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let infeasible = LinearProgram {
            objective: vec![q(0, 1)],
            free: vec![true],
            constraints: vec![
                Constraint::new(vec![q(1, 1)], Relation::Ge, q(1, 1)),
                Constraint::new(vec![q(1, 1)], Relation::Le, q(-1, 1)),
            ],
        };
        assert_eq!(infeasible.solve(), LpOutcome::Infeasible);
        let unbounded = LinearProgram {
            objective: vec![q(1, 1)],
            free: vec![true],
            constraints: vec![Constraint::new(vec![q(1, 1)], Relation::Ge, q(0, 1))],
        };
        assert_eq!(unbounded.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn free_variables_and_equalities() {
        // max -|x| style: x free, x = -3/2
        let lp = LinearProgram {
            objective: vec![q(1, 1)],
            free: vec![true],
            constraints: vec![Constraint::new(vec![q(2, 1)], Relation::Eq, q(-3, 1))],
        };
        match lp.solve() {
            LpOutcome::Optimal { x, .. } => assert_eq!(x, vec![q(-3, 2)]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn null_space_of_rank_one_row() {
        let ns = null_space(&[vec![q(1, 1), q(-2, 1), q(0, 1)]], 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!((&v[0] - q(2, 1) * &v[1]).is_zero());
        }
    }
}
