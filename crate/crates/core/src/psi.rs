//! Lower bounds on the min-max quantity
//!
//! `psi_h(F) = min over probability measures mu on [-pi/h, pi/h] of
//!             max over F in the family of ∫ F dmu`
//!
//! for families of even cosine polynomials with ℓ1 norm `1/cos(pi/h)`.
//! Splitting `[-pi/h, pi/h]` into `m` cells and replacing each `F` by its
//! certified minimum on each cell turns the problem into a finite min-max
//! over the simplex, solved exactly as a linear program.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::lp::{exact, int, to_f64_down, LinearProgram, Rational, Relation};
use crate::trigcert::{certified_min, partition, CosinePoly};

/// Allowed deviation of a member's ℓ1 norm from `1/cos(pi/h)`.
pub const NORM_TOL: f64 = 1e-12;

/// `1/cos(pi/h)`, the common ℓ1 norm of a family.
pub fn family_norm(h: u32) -> f64 {
    1.0 / (PI / h as f64).cos()
}

/// Cosine polynomials of degree at most `K`, each with ℓ1 norm `1/cos(pi/h)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionFamily {
    h: u32,
    k: usize,
    members: Vec<CosinePoly>,
}

impl FunctionFamily {
    pub fn new(h: u32, k: usize, members: Vec<CosinePoly>) -> Result<Self> {
        if h < 2 {
            return Err(invalid(format!("h must be >= 2, got {h}")));
        }
        if members.is_empty() {
            return Err(invalid("a function family needs at least one member"));
        }
        let norm = family_norm(h);
        for (i, f) in members.iter().enumerate() {
            if f.degree() > k {
                return Err(invalid(format!("member {} has degree {} > K = {k}", i + 1, f.degree())));
            }
            if (f.ell1_norm() - norm).abs() > NORM_TOL {
                return Err(invalid(format!(
                    "member {} has ℓ1 norm {} but 1/cos(pi/{h}) = {norm}",
                    i + 1,
                    f.ell1_norm()
                )));
            }
        }
        Ok(Self { h, k, members })
    }

    /// Rescales every member to the family norm before validating.
    pub fn normalized(h: u32, k: usize, members: Vec<CosinePoly>) -> Result<Self> {
        let norm = family_norm(h);
        let members = members
            .into_iter()
            .map(|f| {
                let l1 = f.ell1_norm();
                if l1 == 0.0 {
                    Err(invalid("cannot normalize the zero polynomial"))
                } else {
                    Ok(f.scaled(norm / l1))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(h, k, members)
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn members(&self) -> &[CosinePoly] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The family with member `idx` removed.
    pub fn without(&self, idx: usize) -> Result<Self> {
        if idx >= self.members.len() {
            return Err(invalid(format!("no member {idx}")));
        }
        let mut members = self.members.clone();
        members.remove(idx);
        Self::new(self.h, self.k, members)
    }

    pub fn with_member(&self, f: CosinePoly) -> Result<Self> {
        let mut members = self.members.clone();
        members.push(f);
        Self::new(self.h, self.k.max(f_degree(&members)), members)
    }
}

fn f_degree(members: &[CosinePoly]) -> usize {
    members.iter().map(CosinePoly::degree).max().unwrap_or(0)
}

/// File format: a header line `h=<int> K=<int>`, then one member per line as
/// comma-separated coefficients `c_1,...,c_K`. Blank lines and `#` comments
/// are ignored.
impl FromStr for FunctionFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |reason: String| Error::Parse {
            what: "function family",
            input: s.chars().take(80).collect(),
            reason,
        };
        let mut lines = s
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| parse_err("empty input".into()))?;
        let (mut h, mut k) = (None, None);
        for tok in header.split_whitespace() {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| parse_err(format!("bad header token {tok:?}")))?;
            let val = val.parse::<u64>().map_err(|e| parse_err(format!("{key}: {e}")))?;
            match key {
                "h" => h = Some(val as u32),
                "K" | "k" => k = Some(val as usize),
                _ => return Err(parse_err(format!("unknown header key {key:?}"))),
            }
        }
        let h = h.ok_or_else(|| parse_err("header lacks h=".into()))?;
        let k = k.ok_or_else(|| parse_err("header lacks K=".into()))?;
        let members = lines.map(str::parse::<CosinePoly>).collect::<Result<Vec<_>>>()?;
        Self::new(h, k, members)
    }
}

impl fmt::Display for FunctionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "h={} K={}", self.h, self.k)?;
        for m in &self.members {
            writeln!(f, "{m}")?;
        }
        Ok(())
    }
}

/// Five weights whose min-max exceeds the single-function value 1.2 for
/// `h = 3`.
pub fn theorem32_family() -> FunctionFamily {
    let members = [
        vec![1.7, 0.0, -0.3],
        vec![1.6, 0.0, -0.3, 0.0, 0.0, 0.1],
        vec![1.5, 0.0, -0.4, 0.0, 0.0, 0.1],
        vec![1.2, 0.0, -0.6, 0.0, 0.0, 0.2],
        vec![0.0, 0.0, -2.0],
    ]
    .into_iter()
    .map(|c| CosinePoly::new(c).expect("static coefficients"))
    .collect();
    FunctionFamily::new(3, 6, members).expect("static family is valid")
}

/// Certified lower bounds `v[i][j]` of member `i` on cell `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueMatrix {
    pub h: u32,
    pub m: usize,
    pub tol: f64,
    pub rows: Vec<Vec<f64>>,
}

impl ValueMatrix {
    pub fn new(h: u32, m: usize, tol: f64, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || m == 0 {
            return Err(invalid("value matrix must be nonempty"));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != m) {
            return Err(invalid(format!("row {r} has {} entries, expected {m}", rows[r].len())));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("value matrix entries must be finite"));
        }
        Ok(Self { h, m, tol, rows })
    }
}

fn certified_row(f: &CosinePoly, member: usize, h: u32, m: usize, tol: f64) -> Result<Vec<f64>> {
    partition(m, h)?
        .into_par_iter()
        .enumerate()
        .map(|(j, iv)| {
            certified_min(f, iv, tol).map(|c| c.lower).map_err(|e| Error::Cell {
                member,
                interval: j,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Certifies every (member, cell) pair in parallel.
pub fn value_matrix(family: &FunctionFamily, m: usize, tol: f64) -> Result<ValueMatrix> {
    let rows = family
        .members
        .par_iter()
        .enumerate()
        .map(|(i, f)| certified_row(f, i, family.h, m, tol))
        .collect::<Result<Vec<_>>>()?;
    ValueMatrix::new(family.h, m, tol, rows)
}

/// Solution of the finite min-max.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiEstimate {
    /// Exact optimum rounded down; a certified lower bound on psi when the
    /// matrix entries are certified lower bounds.
    pub value: f64,
    /// Optimal cell masses.
    pub alpha: Vec<f64>,
    /// Members attaining the maximum at `alpha` exactly.
    pub active_members: Vec<usize>,
    #[serde(skip)]
    pub exact_value: Rational,
    #[serde(skip)]
    pub exact_alpha: Vec<Rational>,
}

/// Linear constraint `lo <= Σ_{j in cells} alpha_j <= hi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassConstraint {
    /// 0-based cell indices.
    pub cells: Vec<usize>,
    pub lo: f64,
    pub hi: f64,
}

/// `min over alpha in the simplex of max_i Σ_j v[i][j] alpha_j`.
pub fn minmax_lower_bound(matrix: &ValueMatrix) -> Result<PsiEstimate> {
    minmax_lower_bound_restricted(matrix, &[])
}

/// As [`minmax_lower_bound`], with extra mass constraints on `alpha`.
/// Returns [`Error::Infeasible`] when the constraints exclude the simplex.
pub fn minmax_lower_bound_restricted(matrix: &ValueMatrix, extra: &[MassConstraint]) -> Result<PsiEstimate> {
    let m = matrix.m;
    let v: Vec<Vec<Rational>> = matrix
        .rows
        .iter()
        .map(|r| r.iter().map(|&x| exact(x)).collect())
        .collect();
    // t = s + shift with s >= 0, shift = smallest entry, keeps every variable
    // nonnegative.
    let shift = v.iter().flatten().min().cloned().unwrap_or_else(Rational::zero);

    let n = m + 1;
    let mut obj = vec![int(0); n];
    obj[m] = int(1);
    let mut lp = LinearProgram::minimize(obj);
    for row in &v {
        let mut c: Vec<Rational> = row.iter().map(|x| -x).collect();
        c.push(int(1));
        lp.constrain(c, Relation::Ge, -shift.clone())?;
    }
    let mut simplex = vec![int(1); m];
    simplex.push(int(0));
    lp.constrain(simplex, Relation::Eq, int(1))?;
    for mc in extra {
        if let Some(&bad) = mc.cells.iter().find(|&&j| j >= m) {
            return Err(invalid(format!("mass constraint cell {bad} out of range 0..{m}")));
        }
        let mut c = vec![int(0); n];
        for &j in &mc.cells {
            c[j] = int(1);
        }
        lp.constrain(c.clone(), Relation::Ge, exact(mc.lo))?;
        lp.constrain(c, Relation::Le, exact(mc.hi))?;
    }

    let sol = lp.solve()?;
    let alpha_exact: Vec<Rational> = sol.x[..m].to_vec();
    // Recompute the max directly so the value does not depend on slack
    // bookkeeping inside the solver.
    let sums: Vec<Rational> = v
        .iter()
        .map(|row| row.iter().zip(&alpha_exact).map(|(a, b)| a * b).sum())
        .collect();
    let t = sums.iter().max().cloned().expect("nonempty");
    debug_assert_eq!(t, &sol.objective + &shift);
    let active_members = sums
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == t)
        .map(|(i, _)| i)
        .collect();
    Ok(PsiEstimate {
        value: to_f64_down(&t),
        alpha: alpha_exact.iter().map(|a| num_traits::ToPrimitive::to_f64(a).unwrap_or(f64::NAN)).collect(),
        active_members,
        exact_value: t,
        exact_alpha: alpha_exact,
    })
}

/// Certified lower bound on `psi_h` of the family with `m` cells.
pub fn psi_lower_bound(family: &FunctionFamily, m: usize, tol: f64) -> Result<PsiEstimate> {
    minmax_lower_bound(&value_matrix(family, m, tol)?)
}

/// Result of [`family_search`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub family: FunctionFamily,
    pub estimate: PsiEstimate,
    pub seed_value: f64,
    /// Candidate members certified and scored.
    pub evaluations: usize,
    /// Candidates that improved the bound.
    pub accepted: usize,
}

/// Deterministic coordinate search over member coefficients.
///
/// Each candidate perturbs one coefficient of one member by one of `steps`,
/// is rescaled to the family norm, certified on `m` cells and kept when it
/// strictly raises the min-max value. Sweeps repeat until a full sweep
/// makes no progress or `budget` candidates have been evaluated, so the
/// result is never worse than the seed.
pub fn family_search(
    seed: &FunctionFamily,
    m: usize,
    steps: &[f64],
    budget: usize,
    tol: f64,
) -> Result<SearchOutcome> {
    let h = seed.h;
    let k = seed.k;
    let norm = family_norm(h);
    let mut members = seed.members.clone();
    let mut rows = value_matrix(seed, m, tol)?.rows;
    let mut best = minmax_lower_bound(&ValueMatrix::new(h, m, tol, rows.clone())?)?;
    let seed_value = best.value;
    let (mut evaluations, mut accepted) = (0, 0);

    'sweeps: loop {
        let mut improved = false;
        for i in 0..members.len() {
            for j in 0..k {
                for &step in steps {
                    if evaluations >= budget {
                        break 'sweeps;
                    }
                    let mut c = members[i].coeffs().to_vec();
                    c.resize(k, 0.0);
                    c[j] += step;
                    let l1: f64 = c.iter().map(|x| x.abs()).sum();
                    if l1 == 0.0 {
                        continue;
                    }
                    let cand = CosinePoly::new(c.iter().map(|x| x * norm / l1).collect())?;
                    if (cand.ell1_norm() - norm).abs() > NORM_TOL {
                        continue;
                    }
                    evaluations += 1;
                    let row = certified_row(&cand, i, h, m, tol)?;
                    let mut trial = rows.clone();
                    trial[i] = row;
                    let est = minmax_lower_bound(&ValueMatrix::new(h, m, tol, trial.clone())?)?;
                    if est.exact_value > best.exact_value {
                        members[i] = cand;
                        rows = trial;
                        best = est;
                        accepted += 1;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }

    Ok(SearchOutcome {
        family: FunctionFamily::new(h, k, members)?,
        estimate: best,
        seed_value,
        evaluations,
        accepted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn matrix(rows: Vec<Vec<f64>>) -> ValueMatrix {
        let m = rows[0].len();
        ValueMatrix::new(3, m, 1e-8, rows).unwrap()
    }

    /// Random point of the simplex via normalized exponentials.
    fn random_simplex(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
        let e: Vec<f64> = (0..m).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|x| x / s).collect()
    }

    fn max_row(rows: &[Vec<f64>], a: &[f64]) -> f64 {
        rows.iter()
            .map(|r| r.iter().zip(a).map(|(x, y)| x * y).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn family_norms_and_parsing() {
        let fam = theorem32_family();
        assert_eq!(fam.len(), 5);
        for f in fam.members() {
            assert!((f.ell1_norm() - 2.0).abs() < 1e-12);
        }
        let text = fam.to_string();
        let back: FunctionFamily = text.parse().unwrap();
        assert_eq!(back, fam);
        let bad = "h=3 K=3\n1,0,-0.5\n";
        assert!(bad.parse::<FunctionFamily>().is_err());
        assert!("h=3\n1.7,0,-0.3\n".parse::<FunctionFamily>().is_err());
        assert!("h=3 K=2\n1.7,0,-0.3\n".parse::<FunctionFamily>().is_err());
        let with_comments = "# five weights\nh=3 K=6\n\n1.7,0,-0.3  # first\n";
        assert_eq!(with_comments.parse::<FunctionFamily>().unwrap().len(), 1);
    }

    #[test]
    fn two_by_two_game() {
        let est = minmax_lower_bound(&matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]])).unwrap();
        assert_eq!(est.value, 0.5);
        assert_eq!(est.alpha, vec![0.5, 0.5]);
        assert_eq!(est.active_members, vec![0, 1]);
    }

    #[test]
    fn single_function_value() {
        let fam = FunctionFamily::new(3, 3, vec![CosinePoly::new(vec![1.7, 0.0, -0.3]).unwrap()]).unwrap();
        let est = psi_lower_bound(&fam, 12, 1e-9).unwrap();
        // F_1 is smallest at the interval edges, F_1(pi/3) = 1.15.
        assert!(est.value <= 1.15 && 1.15 - est.value < 1e-8);
    }

    #[test]
    fn g3_alone_gives_its_minimum() {
        let g = crate::bounds::build_g(3).unwrap();
        let fam = FunctionFamily::new(3, 3, vec![g]).unwrap();
        let est = psi_lower_bound(&fam, 12, 1e-9).unwrap();
        assert!((est.value - 1.2).abs() < 1e-8);
    }

    #[test]
    fn five_function_value() {
        let est = psi_lower_bound(&theorem32_family(), 12, 1e-9).unwrap();
        assert!(est.value >= 1.2228, "{}", est.value);
        assert!((est.value - 1.2255373).abs() < 1e-6, "{}", est.value);
        let s: f64 = est.alpha.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(est.alpha.iter().all(|&a| a >= 0.0));
    }

    #[test]
    fn value_is_max_at_argmin_and_beats_random_points() {
        let vm = value_matrix(&theorem32_family(), 12, 1e-8).unwrap();
        let est = minmax_lower_bound(&vm).unwrap();
        let at_opt = max_row(&vm.rows, &est.alpha);
        assert!((at_opt - est.value).abs() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100_000 {
            let a = random_simplex(&mut rng, vm.m);
            assert!(max_row(&vm.rows, &a) >= est.value - 1e-12);
        }
    }

    #[test]
    fn restricted_lp_reports_infeasible() {
        let vm = matrix(vec![vec![1.0, 2.0]]);
        let c = MassConstraint { cells: vec![0], lo: 1.5, hi: 2.0 };
        assert_eq!(minmax_lower_bound_restricted(&vm, &[c]), Err(Error::Infeasible));
        let c = MassConstraint { cells: vec![5], lo: 0.0, hi: 1.0 };
        assert!(minmax_lower_bound_restricted(&vm, &[c]).is_err());
    }

    #[test]
    fn restriction_never_lowers_the_value() {
        let vm = value_matrix(&theorem32_family(), 12, 1e-8).unwrap();
        let free = minmax_lower_bound(&vm).unwrap();
        let c = MassConstraint { cells: vec![0, 11], lo: 0.0, hi: 0.05 };
        let restricted = minmax_lower_bound_restricted(&vm, &[c]).unwrap();
        assert!(restricted.exact_value >= free.exact_value);
    }

    #[test]
    fn search_never_worse_than_seed() {
        let seed = FunctionFamily::new(
            3,
            6,
            vec![
                CosinePoly::new(vec![1.7, 0.0, -0.3]).unwrap(),
                CosinePoly::new(vec![0.0, 0.0, -2.0]).unwrap(),
            ],
        )
        .unwrap();
        let a = family_search(&seed, 12, &[0.05, -0.05], 40, 1e-8).unwrap();
        assert!(a.estimate.value >= a.seed_value);
        assert!(a.evaluations <= 40);
        let b = family_search(&seed, 12, &[0.05, -0.05], 40, 1e-8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cell_errors_are_tagged() {
        // Degree-60 member cannot be certified to 1e-30 within the budget.
        let mut c = vec![0.0; 60];
        c[0] = 1.0;
        c[59] = 1.0;
        let f = CosinePoly::new(c).unwrap();
        let fam = FunctionFamily::normalized(3, 60, vec![f]).unwrap();
        match value_matrix(&fam, 2, 1e-300) {
            Err(Error::Cell { member: 0, .. }) => {}
            other => panic!("expected a cell error, got {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn adding_a_member_never_lowers(rows in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 4), 1..4),
                                         extra in prop::collection::vec(-3.0f64..3.0, 4)) {
            let base = minmax_lower_bound(&matrix(rows.clone())).unwrap();
            let mut more = rows;
            more.push(extra);
            let bigger = minmax_lower_bound(&matrix(more)).unwrap();
            prop_assert!(bigger.exact_value >= base.exact_value);
        }

        #[test]
        fn alpha_is_a_distribution(rows in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 5), 1..5)) {
            let est = minmax_lower_bound(&matrix(rows.clone())).unwrap();
            let s: Rational = est.exact_alpha.iter().sum();
            prop_assert_eq!(s, int(1));
            prop_assert!(est.exact_alpha.iter().all(|a| *a >= int(0)));
            prop_assert!((max_row(&rows, &est.alpha) - est.value).abs() < 1e-10);
            prop_assert!(!est.active_members.is_empty());
        }

        #[test]
        fn refining_cells_never_lowers(split in 1usize..4) {
            let fam = theorem32_family();
            let coarse = psi_lower_bound(&fam, 6, 1e-8).unwrap();
            let fine = psi_lower_bound(&fam, 6 * (split + 1), 1e-8).unwrap();
            prop_assert!(fine.value >= coarse.value - 2e-8);
        }
    }
}
