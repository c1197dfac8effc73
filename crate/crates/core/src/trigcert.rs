//! Certified evaluation and minimization of cosine polynomials.
//!
//! A [`CosinePoly`] is a finite series `F(x) = Σ_{j=1..K} c_j cos(jx)`. Its
//! derivative is bounded everywhere by `Σ j|c_j|`, so the value at the midpoint
//! of a cell of radius `r` minus `r·Σ j|c_j|` is a rigorous lower bound on `F`
//! over that cell. [`certified_min`] bisects cells uniformly, discarding any
//! cell whose bound already exceeds the best sampled value, until the gap
//! between the sampled minimum and the smallest cell bound closes.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Default certification gap.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Number of bisection rounds [`certified_min`] may run before giving up.
pub const MAX_REFINEMENT_ROUNDS: u32 = 40;

/// Hard cap on live cells in one round; only reachable for pathologically
/// flat minima at tolerances near machine precision.
const MAX_LIVE_CELLS: usize = 1 << 22;

/// A cosine polynomial `Σ_{j=1..K} c_j cos(jx)` with `coeffs[j-1] = c_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CosinePoly {
    coeffs: Vec<f64>,
}

impl CosinePoly {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("cosine polynomial needs at least one coefficient"));
        }
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(invalid(format!("non-finite coefficient {c}")));
        }
        Ok(Self { coeffs })
    }

    /// Builds a polynomial from `(frequency, coefficient)` pairs; frequencies
    /// start at 1 and missing ones are zero.
    pub fn from_terms(terms: &[(usize, f64)]) -> Result<Self> {
        let k = terms.iter().map(|&(j, _)| j).max().unwrap_or(0);
        if terms.iter().any(|&(j, _)| j == 0) || k == 0 {
            return Err(invalid("frequencies must be >= 1"));
        }
        let mut coeffs = vec![0.0; k];
        for &(j, c) in terms {
            coeffs[j - 1] += c;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Number of stored frequencies `K`, trailing zeros included.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest frequency with a nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms().map(|(j, c)| c * (j as f64 * x).cos()).sum()
    }

    /// `Σ j·|c_j|`, a global bound on `|F'|`.
    pub fn derivative_sup(&self) -> f64 {
        self.terms().map(|(j, c)| j as f64 * c.abs()).sum()
    }

    pub fn ell1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, &c)| (i + 1, c))
    }

    /// Upper bound on the floating-point error of [`eval`](Self::eval) for
    /// `|x| <= max_abs_x`.
    fn eval_error_bound(&self, max_abs_x: f64) -> f64 {
        let k = self.len() as f64;
        4.0 * f64::EPSILON
            * (self.ell1_norm() * (k + 1.0) + self.derivative_sup() * max_abs_x)
    }
}

impl fmt::Display for CosinePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for CosinePoly {
    type Err = Error;

    /// Parses a comma-separated coefficient list `c1,c2,...,cK`.
    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |reason: String| Error::Parse {
            what: "cosine polynomial",
            input: s.to_string(),
            reason,
        };
        let coeffs = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(format!("{tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs).map_err(|e| parse_err(e.to_string()))
    }
}

/// A closed interval `[lo, hi]` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(invalid(format!("interval endpoints must be finite: [{lo}, {hi}]")));
        }
        if lo > hi {
            return Err(invalid(format!("interval is reversed: [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl FromStr for Interval {
    type Err = Error;

    /// Parses `lo,hi`, where each endpoint is a decimal or a multiple of pi
    /// such as `pi`, `-pi/3` or `2pi/3`.
    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |reason: String| Error::Parse {
            what: "interval",
            input: s.to_string(),
            reason,
        };
        let (lo, hi) = s
            .split_once(',')
            .ok_or_else(|| parse_err("expected \"lo,hi\"".into()))?;
        let lo = parse_angle(lo).map_err(|e| parse_err(e.to_string()))?;
        let hi = parse_angle(hi).map_err(|e| parse_err(e.to_string()))?;
        Interval::new(lo, hi).map_err(|e| parse_err(e.to_string()))
    }
}

/// Parses an angle: a plain decimal, or `[sign][k][*]pi[/d]`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let parse_err = |reason: &str| Error::Parse {
        what: "angle",
        input: s.to_string(),
        reason: reason.to_string(),
    };
    let t = s.trim().to_ascii_lowercase();
    let Some(pos) = t.find("pi") else {
        return t.parse::<f64>().map_err(|e| parse_err(&e.to_string()));
    };
    let (head, tail) = (t[..pos].trim(), t[pos + 2..].trim());
    let head = head.strip_suffix('*').unwrap_or(head).trim();
    let factor = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| parse_err("bad multiplier before pi"))?,
    };
    let divisor = match tail {
        "" => 1.0,
        t => t
            .strip_prefix('/')
            .and_then(|d| d.trim().parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(|| parse_err("expected /<nonzero divisor> after pi"))?,
    };
    Ok(factor * PI / divisor)
}

/// Result of a certified minimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifiedMin {
    /// Rigorous lower bound on the minimum over the interval.
    pub lower: f64,
    /// Smallest sampled value, `F(witness)`.
    pub upper: f64,
    pub witness: f64,
    pub tol: f64,
    /// Bisection rounds used.
    pub rounds: u32,
}

impl CertifiedMin {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Certified minimum of `poly` over `iv` with `upper - lower <= tol`.
pub fn certified_min(poly: &CosinePoly, iv: Interval, tol: f64) -> Result<CertifiedMin> {
    certified_min_with_budget(poly, iv, tol, MAX_REFINEMENT_ROUNDS)
}

pub fn certified_min_with_budget(
    poly: &CosinePoly,
    iv: Interval,
    tol: f64,
    max_rounds: u32,
) -> Result<CertifiedMin> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let lip = poly.derivative_sup();
    let slack = poly.eval_error_bound(iv.lo.abs().max(iv.hi.abs()));

    // The interval is closed, so both endpoints are candidate minimizers.
    let (mut upper, mut witness) = (poly.eval(iv.lo), iv.lo);
    let f_hi = poly.eval(iv.hi);
    if f_hi < upper {
        upper = f_hi;
        witness = iv.hi;
    }

    let mut cells = vec![(iv.lo, iv.hi)];
    let mut bounds = Vec::new();
    for round in 0..=max_rounds {
        bounds.clear();
        let mut lower = f64::INFINITY;
        for &(a, b) in &cells {
            let mid = a + 0.5 * (b - a);
            let radius = (mid - a).max(b - mid);
            let fm = poly.eval(mid);
            if fm < upper {
                upper = fm;
                witness = mid;
            }
            let lb = fm - lip * radius - slack;
            lower = lower.min(lb);
            bounds.push(lb);
        }
        let lower = lower.min(upper);
        let gap = upper - lower;
        if gap <= tol {
            return Ok(CertifiedMin {
                lower,
                upper,
                witness,
                tol,
                rounds: round,
            });
        }
        if round == max_rounds {
            return Err(Error::CertificationBudget {
                rounds: max_rounds,
                gap,
                tol,
            });
        }

        // Cells whose bound is above the incumbent cannot hold the minimum.
        let mut next = Vec::with_capacity(2 * cells.len());
        for (&(a, b), &lb) in cells.iter().zip(&bounds) {
            if lb <= upper {
                let mid = a + 0.5 * (b - a);
                if mid <= a || mid >= b {
                    // Floating-point resolution reached; keep the cell whole.
                    next.push((a, b));
                } else {
                    next.push((a, mid));
                    next.push((mid, b));
                }
            }
        }
        if next.len() > MAX_LIVE_CELLS {
            return Err(Error::CertificationBudget {
                rounds: round + 1,
                gap,
                tol,
            });
        }
        cells = next;
    }
    unreachable!("loop returns on its final round")
}

/// Uniform partition of `[-pi/h, pi/h]` into `m` closed intervals
/// `I_j = [-pi/h + 2pi(j-1)/(hm), -pi/h + 2pi j/(hm)]`.
///
/// Endpoints are computed as `pi(2j - m)/(hm)`, so neighbours share them
/// exactly and the partition is symmetric under `x -> -x` bit for bit.
pub fn partition(m: usize, h: u32) -> Result<Vec<Interval>> {
    if m == 0 {
        return Err(invalid("partition needs m >= 1"));
    }
    if h < 2 {
        return Err(invalid(format!("partition needs h >= 2, got {h}")));
    }
    let scale = PI / (h as f64 * m as f64);
    let edge = |j: usize| (2.0 * j as f64 - m as f64) * scale;
    (1..=m).map(|j| Interval::new(edge(j - 1), edge(j))).collect()
}
