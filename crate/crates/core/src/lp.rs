//! Dense two-phase simplex over exact rationals.
//!
//! Problems are small (a handful of rows, at most a few hundred columns), so a
//! dense tableau over `BigRational` is cheap and removes any question of
//! floating-point feasibility. Bland's rule is used for both the entering and
//! the leaving variable, which rules out cycling.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};

pub type Rational = BigRational;

/// Exact rational value of a finite `f64`.
pub fn exact(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(|| panic!("non-finite value {x} in exact arithmetic"))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Largest `f64` not exceeding `r`.
pub fn to_f64_down(r: &Rational) -> f64 {
    let f = r.to_f64().unwrap_or(f64::NAN);
    if f.is_finite() && exact(f) > *r {
        f.next_down()
    } else {
        f
    }
}

/// Smallest `f64` not below `r`.
pub fn to_f64_up(r: &Rational) -> f64 {
    let f = r.to_f64().unwrap_or(f64::NAN);
    if f.is_finite() && exact(f) < *r {
        f.next_up()
    } else {
        f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `minimize c·x subject to constraints, x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<Rational>,
    pub objective: Rational,
}

impl LinearProgram {
    pub fn minimize(objective: Vec<Rational>) -> Self {
        Self {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(
        &mut self,
        coeffs: Vec<Rational>,
        relation: Relation,
        rhs: Rational,
    ) -> Result<&mut Self> {
        if coeffs.len() != self.num_vars() {
            return Err(invalid(format!(
                "constraint has {} coefficients, program has {} variables",
                coeffs.len(),
                self.num_vars()
            )));
        }
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        Ok(self)
    }

    pub fn solve(&self) -> Result<LpSolution> {
        Tableau::build(self).solve(&self.objective)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    num_vars: usize,
    /// Columns at or beyond this index are artificial.
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let inequalities = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();

        // Flip rows so every right-hand side is nonnegative.
        let normalized: Vec<(Vec<Rational>, Relation, Rational)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let rel = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), rel, -&c.rhs)
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();
        let artificials = normalized
            .iter()
            .filter(|(_, rel, _)| *rel != Relation::Le)
            .count();

        let first_artificial = n + inequalities;
        let width = first_artificial + artificials + 1;
        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let (mut slack, mut art) = (n, first_artificial);
        for (coeffs, rel, rhs) in normalized {
            let mut row = vec![Rational::zero(); width];
            row[..n].clone_from_slice(&coeffs);
            row[width - 1] = rhs;
            match rel {
                Relation::Le => {
                    row[slack] = Rational::one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                    row[art] = Rational::one();
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = Rational::one();
                    basis.push(art);
                    art += 1;
                }
            }
            rows.push(row);
        }
        Self {
            rows,
            basis,
            num_vars: n,
            first_artificial,
        }
    }

    fn width(&self) -> usize {
        self.first_artificial_end() + 1
    }

    fn first_artificial_end(&self) -> usize {
        self.rows
            .first()
            .map_or(self.first_artificial, |r| r.len() - 1)
    }

    fn rhs(&self) -> usize {
        self.width() - 1
    }

    /// Reduced-cost row for `cost` (indexed by column) given the current basis;
    /// the last entry holds minus the objective value.
    fn objective_row(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut obj: Vec<Rational> = (0..self.width())
            .map(|j| cost.get(j).cloned().unwrap_or_else(Rational::zero))
            .collect();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = match cost.get(b) {
                Some(c) if !c.is_zero() => c,
                _ => continue,
            };
            for (o, a) in obj.iter_mut().zip(row) {
                if !a.is_zero() {
                    *o -= cb * a;
                }
            }
        }
        obj
    }

    fn pivot(&mut self, obj: &mut [Rational], r: usize, e: usize) {
        let p = self.rows[r][e].clone();
        for a in self.rows[r].iter_mut() {
            if !a.is_zero() {
                *a /= &p;
            }
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut [Rational]| {
            let f = row[e].clone();
            if f.is_zero() {
                return;
            }
            for (a, pr) in row.iter_mut().zip(&pivot_row) {
                if !pr.is_zero() {
                    *a -= &f * pr;
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(obj);
        self.basis[r] = e;
    }

    /// Runs simplex iterations with entering columns restricted to `< limit`.
    fn iterate(&mut self, obj: &mut [Rational], limit: usize) -> Result<()> {
        let rhs = self.rhs();
        loop {
            let Some(e) = (0..limit).find(|&j| obj[j].is_negative()) else {
                return Ok(());
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[e].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[e];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let (r, _) = leave.ok_or(Error::Unbounded)?;
            self.pivot(obj, r, e);
        }
    }

    fn solve(mut self, cost: &[Rational]) -> Result<LpSolution> {
        let art_end = self.first_artificial_end();
        if art_end > self.first_artificial {
            let mut phase1 = vec![Rational::zero(); art_end];
            for c in &mut phase1[self.first_artificial..] {
                *c = Rational::one();
            }
            let mut obj = self.objective_row(&phase1);
            self.iterate(&mut obj, art_end)?;
            let rhs = self.rhs();
            if !obj[rhs].is_zero() {
                return Err(Error::Infeasible);
            }
            // Drive zero-level artificials out of the basis, dropping rows
            // that turn out to be redundant.
            let mut r = 0;
            while r < self.rows.len() {
                if self.basis[r] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&j| !self.rows[r][j].is_zero()) {
                        Some(j) => self.pivot(&mut obj, r, j),
                        None => {
                            self.rows.remove(r);
                            self.basis.remove(r);
                            continue;
                        }
                    }
                }
                r += 1;
            }
            let keep = self.first_artificial;
            for row in &mut self.rows {
                let rhs_val = row[rhs].clone();
                row.truncate(keep);
                row.push(rhs_val);
            }
        }

        let mut obj = self.objective_row(cost);
        self.iterate(&mut obj, self.first_artificial)?;

        let rhs = self.rhs();
        let mut x = vec![Rational::zero(); self.num_vars];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.num_vars {
                x[b] = row[rhs].clone();
            }
        }
        let objective = x
            .iter()
            .zip(cost)
            .fold(Rational::zero(), |acc, (xi, ci)| acc + xi * ci);
        Ok(LpSolution { x, objective })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
        let mut lp = LinearProgram::minimize(vec![int(-3), int(-5)]);
        lp.constrain(vec![int(1), int(0)], Relation::Le, int(4)).unwrap();
        lp.constrain(vec![int(0), int(2)], Relation::Le, int(12)).unwrap();
        lp.constrain(vec![int(3), int(2)], Relation::Le, int(18)).unwrap();
        let sol = lp.solve().unwrap();
        assert_eq!(sol.objective, int(-36));
        assert_eq!(sol.x, vec![int(2), int(6)]);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y s.t. x + y = 1, x >= 1/3  ->  x = 1, y = 0
        let mut lp = LinearProgram::minimize(vec![int(1), int(2)]);
        lp.constrain(vec![int(1), int(1)], Relation::Eq, int(1)).unwrap();
        lp.constrain(vec![int(1), int(0)], Relation::Ge, r(1, 3)).unwrap();
        let sol = lp.solve().unwrap();
        assert_eq!(sol.objective, int(1));

        // min y s.t. x + y = 1, x <= 1/3  ->  y = 2/3
        let mut lp = LinearProgram::minimize(vec![int(0), int(1)]);
        lp.constrain(vec![int(1), int(1)], Relation::Eq, int(1)).unwrap();
        lp.constrain(vec![int(1), int(0)], Relation::Le, r(1, 3)).unwrap();
        assert_eq!(lp.solve().unwrap().objective, r(2, 3));
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // min x s.t. -x <= -2  ->  x = 2
        let mut lp = LinearProgram::minimize(vec![int(1)]);
        lp.constrain(vec![int(-1)], Relation::Le, int(-2)).unwrap();
        assert_eq!(lp.solve().unwrap().objective, int(2));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::minimize(vec![int(1)]);
        lp.constrain(vec![int(1)], Relation::Ge, int(2)).unwrap();
        lp.constrain(vec![int(1)], Relation::Le, int(1)).unwrap();
        assert_eq!(lp.solve(), Err(Error::Infeasible));

        let mut lp = LinearProgram::minimize(vec![int(-1), int(0)]);
        lp.constrain(vec![int(0), int(1)], Relation::Le, int(1)).unwrap();
        assert_eq!(lp.solve(), Err(Error::Unbounded));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::minimize(vec![int(1), int(1)]);
        lp.constrain(vec![int(1), int(1)], Relation::Eq, int(2)).unwrap();
        lp.constrain(vec![int(2), int(2)], Relation::Eq, int(4)).unwrap();
        lp.constrain(vec![int(1), int(0)], Relation::Ge, int(1)).unwrap();
        let sol = lp.solve().unwrap();
        assert_eq!(sol.objective, int(2));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example; cycles under the textbook largest-coefficient rule.
        let c = vec![r(-3, 4), int(20), r(-1, 2), int(6)];
        let mut lp = LinearProgram::minimize(c);
        lp.constrain(vec![r(1, 4), int(-8), int(-1), int(9)], Relation::Le, int(0))
            .unwrap();
        lp.constrain(vec![r(1, 2), int(-12), r(-1, 2), int(3)], Relation::Le, int(0))
            .unwrap();
        lp.constrain(vec![int(0), int(0), int(1), int(0)], Relation::Le, int(1))
            .unwrap();
        assert_eq!(lp.solve().unwrap().objective, r(-5, 4));
    }

    #[test]
    fn length_mismatch() {
        let mut lp = LinearProgram::minimize(vec![int(1)]);
        assert!(lp.constrain(vec![int(1), int(2)], Relation::Le, int(1)).is_err());
    }

    #[test]
    fn directed_rounding() {
        let third = r(1, 3);
        let lo = to_f64_down(&third);
        let hi = to_f64_up(&third);
        assert!(exact(lo) <= third && third <= exact(hi));
        assert!(lo < hi);
        assert_eq!(to_f64_down(&int(2)), 2.0);
        assert_eq!(to_f64_up(&int(2)), 2.0);
    }
}
