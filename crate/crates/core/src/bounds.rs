//! Closed-form and certified upper bounds on the size of a `B_h[g]`-set in
//! `{1, ..., N}`.
//!
//! Every bound has the shape `|A| <= (C·g·N)^{1/h}`; the functions here
//! compute the leading constant `C`. Bounds derived from exponential-sum
//! arguments only hold up to a `1 + o_N(1)` factor and are flagged
//! `asymptotic` in their [`BoundReport`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::lp::{exact, int, to_f64_down, LinearProgram, Relation};
use crate::trigcert::{certified_min, partition, CosinePoly, Interval};

/// Sinc-root tolerance used when none is given.
pub const DEFAULT_SINC_TOL: f64 = 1e-12;

/// Largest `h` for which `h!` is computed exactly.
pub const MAX_FACTORIAL_H: u32 = 20;

/// Parameters `(h, g, N)` of a `B_h[g]`-set problem in `{1, ..., N}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BhgInstance {
    pub h: u32,
    pub g: u64,
    #[serde(rename = "N")]
    pub n: u64,
}

impl BhgInstance {
    pub fn new(h: u32, g: u64, n: u64) -> Result<Self> {
        if h < 2 {
            return Err(invalid(format!("h must be >= 2, got {h}")));
        }
        if g < 1 {
            return Err(invalid("g must be >= 1"));
        }
        if n < 1 {
            return Err(invalid("N must be >= 1"));
        }
        Ok(Self { h, g, n })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMethod {
    /// Counting bound `C(|A|+h-1, h) <= g·h·N`.
    Trivial,
    /// `h!·h / (1 + cos^h(pi/h))`.
    Crt,
    /// `sqrt(3h)·h!`.
    Cju,
    /// `x_h·h!·h/pi` from the two-frequency weight function.
    Thm11,
    /// Self-consistent `B_3[g]` constant from the mass-distribution refinement.
    B3Refined,
    /// Constant derived from a lower bound on the min-max quantity psi.
    Prop31,
}

impl BoundMethod {
    pub const ALL: [BoundMethod; 6] = [
        BoundMethod::Trivial,
        BoundMethod::Crt,
        BoundMethod::Cju,
        BoundMethod::Thm11,
        BoundMethod::B3Refined,
        BoundMethod::Prop31,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundMethod::Trivial => "trivial",
            BoundMethod::Crt => "crt",
            BoundMethod::Cju => "cju",
            BoundMethod::Thm11 => "thm11",
            BoundMethod::B3Refined => "b3refined",
            BoundMethod::Prop31 => "prop31",
        }
    }

    /// Whether the bound holds only up to a `1 + o_N(1)` factor.
    pub fn is_asymptotic(self) -> bool {
        !matches!(self, BoundMethod::Trivial)
    }
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundMethod::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse {
                what: "bound method",
                input: s.to_string(),
                reason: "expected one of trivial, crt, cju, thm11, b3refined, prop31".into(),
            })
    }
}

/// A cardinality bound `|A| <= (constant·g·N)^{1/h}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub method: BoundMethod,
    pub h: u32,
    pub g: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub constant: f64,
    pub cardinality_bound: f64,
    pub asymptotic: bool,
}

impl BoundReport {
    pub fn new(method: BoundMethod, inst: BhgInstance, constant: f64) -> Result<Self> {
        if !(constant > 0.0) || !constant.is_finite() {
            return Err(invalid(format!("{method} constant must be positive, got {constant}")));
        }
        let cardinality_bound = (constant * inst.g as f64 * inst.n as f64).powf(1.0 / inst.h as f64);
        Ok(Self {
            method,
            h: inst.h,
            g: inst.g,
            n: inst.n,
            constant,
            cardinality_bound,
            asymptotic: method.is_asymptotic(),
        })
    }
}

/// `h!` as an exact integer converted to `f64`; errors above `h = 20`.
pub fn factorial(h: u32) -> Result<f64> {
    if h > MAX_FACTORIAL_H {
        return Err(Error::TooLarge {
            what: "h for h!",
            value: h as u64,
            cap: MAX_FACTORIAL_H as u64,
        });
    }
    Ok((1..=h as u64).product::<u64>() as f64)
}

fn require_h(h: u32, min: u32) -> Result<()> {
    if h < min {
        Err(invalid(format!("h must be >= {min}, got {h}")))
    } else {
        Ok(())
    }
}

pub fn trivial_bound(inst: BhgInstance) -> Result<BoundReport> {
    let c = factorial(inst.h)? * inst.h as f64;
    BoundReport::new(BoundMethod::Trivial, inst, c)
}

pub fn crt_constant(h: u32) -> Result<f64> {
    require_h(h, 3)?;
    Ok(factorial(h)? * h as f64 / (1.0 + (PI / h as f64).cos().powi(h as i32)))
}

pub fn cju_constant(h: u32) -> Result<f64> {
    require_h(h, 2)?;
    Ok((3.0 * h as f64).sqrt() * factorial(h)?)
}

pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Root of `sin(x)/x = target` on `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SincRoot {
    pub target: f64,
    pub root: f64,
    pub tol: f64,
}

/// Solves `sin(x)/x = target` for `x` in `[0, pi]` by bisection.
///
/// `sin(x)/x` is strictly decreasing there, from 1 at `x = 0` to 0 at
/// `x = pi`, so each target in `[0, 1]` has exactly one root. `target = 1`
/// returns the limit root 0.
pub fn solve_sinc(target: f64, tol: f64) -> Result<SincRoot> {
    if !(0.0..=1.0).contains(&target) {
        return Err(invalid(format!("sinc target must lie in [0, 1], got {target}")));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let (mut lo, mut hi) = (0.0_f64, PI);
    if target == 0.0 {
        lo = PI;
    } else if target == 1.0 {
        hi = 0.0;
    }
    // sin(pi) is slightly positive in floating point; bisection keeps the
    // invariant sinc(lo) >= target > sinc(hi) away from the endpoints.
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if sinc(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SincRoot {
        target,
        root: 0.5 * (lo + hi),
        tol,
    })
}

/// `(4/(3 - cos(pi/h)) - 1)^h`, the sinc value defining `x_h`.
pub fn g_lhs(h: u32) -> Result<f64> {
    require_h(h, 3)?;
    Ok(g_ratio(h).powi(h as i32))
}

fn g_ratio(h: u32) -> f64 {
    4.0 / (3.0 - (PI / h as f64).cos()) - 1.0
}

/// Closed-form minimum of [`build_g`] over `[-pi/h, pi/h]`:
/// `(4/(3 - cos(pi/h)) - 1)/cos(pi/h)`.
pub fn g_min_closed_form(h: u32) -> Result<f64> {
    require_h(h, 3)?;
    Ok(g_ratio(h) / (PI / h as f64).cos())
}

/// The two-frequency weight
/// `G(x) = a/cos(pi/h)·cos x - (1 - a)/cos(pi/h)·cos(hx)` with
/// `a = 2/(3 - cos(pi/h))`; its ℓ1 norm is `1/cos(pi/h)`.
pub fn build_g(h: u32) -> Result<CosinePoly> {
    require_h(h, 3)?;
    let c = (PI / h as f64).cos();
    let a = 2.0 / (3.0 - c);
    CosinePoly::from_terms(&[(1, a / c), (h as usize, -(1.0 - a) / c)])
}

/// `x_h·h!·h/pi` with `sin(x_h)/x_h = g_lhs(h)`.
pub fn thm11_constant(h: u32, tol: f64) -> Result<f64> {
    let x = solve_sinc(g_lhs(h)?, tol)?.root;
    Ok(x * factorial(h)? * h as f64 / PI)
}

/// Both sides of `sinc(pi·sqrt(3/h)) < g_lhs(h)` and its consequence
/// `x_h < pi·sqrt(3/h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImprovementCheck {
    pub h: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub x_h: f64,
    pub cju_root: f64,
    pub root_below: bool,
}

pub fn check_improvement_inequality(h: u32) -> Result<ImprovementCheck> {
    let rhs = g_lhs(h)?;
    let cju_root = PI * (3.0 / h as f64).sqrt();
    let lhs = sinc(cju_root);
    let x_h = solve_sinc(rhs, DEFAULT_SINC_TOL)?.root;
    Ok(ImprovementCheck {
        h,
        lhs,
        rhs,
        holds: lhs < rhs,
        x_h,
        cju_root,
        root_below: x_h + DEFAULT_SINC_TOL < cju_root,
    })
}

/// Rounds up at the given decimal place, so a rounded bound stays valid.
pub fn round_up(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let scaled = x * scale;
    // Guard against representation noise pushing an exact value up a digit.
    let nearest = scaled.round();
    if (scaled - nearest).abs() <= 1e-9 * scaled.abs().max(1.0) {
        nearest / scale
    } else {
        scaled.ceil() / scale
    }
}

/// Converts a weighted-sum lower bound `w` (the guaranteed average weight
/// `Σ_a F(x_a)/|A|` for a weight in the family normalized to ℓ1 norm
/// `1/cos(pi/h)`) into a cardinality constant `y·h!·h/pi`, where
/// `sin(y)/y = (cos(pi/h)·w)^h`.
pub fn weighted_sum_constant(w: f64, h: u32, tol: f64) -> Result<(f64, SincRoot)> {
    require_h(h, 2)?;
    if !(w >= 0.0) {
        return Err(invalid(format!("weighted sum must be nonnegative, got {w}")));
    }
    let mut target = ((PI / h as f64).cos() * w).powi(h as i32);
    if (target - 1.0).abs() <= 1e-12 {
        return Err(Error::Degenerate(format!(
            "(cos(pi/{h})·{w})^{h} = 1 forces the sinc root to its limit 0"
        )));
    }
    if target > 1.0 {
        return Err(invalid(format!(
            "(cos(pi/{h})·{w})^{h} = {target} exceeds 1; weighted sum too large to be meaningful"
        )));
    }
    target = target.max(0.0);
    let root = solve_sinc(target, tol)?;
    Ok((root.root * factorial(h)? * h as f64 / PI, root))
}

/// Cardinality bound from a certified lower bound on psi.
pub fn prop31_bound(psi_value: f64, inst: BhgInstance, tol: f64) -> Result<BoundReport> {
    let (c, _) = weighted_sum_constant(psi_value, inst.h, tol)?;
    BoundReport::new(BoundMethod::Prop31, inst, c)
}

/// Settings for [`b3_refined_constant`].
#[derive(Debug, Clone, PartialEq)]
pub struct B3Params {
    /// Mass caps are imposed at `delta = j / delta_den`.
    pub delta_den: u32,
    /// Number of uniform cells of `[-pi/3, pi/3]` used for the weight minima.
    pub m: usize,
    /// Caps are imposed for `j = 1..=capped_prefixes`.
    pub capped_prefixes: u32,
    /// Certification tolerance for the weight minima.
    pub tol: f64,
    /// Width of the final bisection bracket on the constant.
    pub bisect_tol: f64,
    pub sinc_tol: f64,
    pub bracket: (f64, f64),
    pub weight: CosinePoly,
}

impl Default for B3Params {
    fn default() -> Self {
        Self {
            delta_den: 128,
            m: 128,
            capped_prefixes: 5,
            tol: crate::trigcert::DEFAULT_TOL,
            bisect_tol: 1e-9,
            sinc_tol: DEFAULT_SINC_TOL,
            bracket: (10.0, 16.0),
            weight: b3_weight(),
        }
    }
}

/// `1.6cos x - 0.3cos 3x + 0.1cos 6x`.
pub fn b3_weight() -> CosinePoly {
    CosinePoly::new(vec![1.6, 0.0, -0.3, 0.0, 0.0, 0.1]).expect("static coefficients")
}

/// Certified weight minima folded onto symmetric cell pairs: entry `i` is
/// the smaller lower bound of cells `i` and `m - 1 - i` (0-based from the
/// outer edge).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairValues {
    pub m: usize,
    pub values: Vec<f64>,
    pub tol: f64,
}

pub fn b3_pair_values(weight: &CosinePoly, m: usize, tol: f64) -> Result<PairValues> {
    let cells = partition(m, 3)?;
    let lows = cells
        .iter()
        .map(|&iv| certified_min(weight, iv, tol).map(|c| c.lower))
        .collect::<Result<Vec<f64>>>()?;
    let pairs = m.div_ceil(2);
    let values = (0..pairs).map(|i| lows[i].min(lows[m - 1 - i])).collect();
    Ok(PairValues { m, values, tol })
}

/// Cap `(72·delta/c)^{1/3}` on the mass of the outer `delta`-fraction: a
/// larger mass lets counting inside that class alone give
/// `|A| <= (c·g·N)^{1/3}`.
pub fn mass_cap(delta: f64, c: f64) -> f64 {
    (72.0 * delta / c).cbrt()
}

/// Caps `(number of outer cell pairs covered, cap)` for `j = 1..=capped_prefixes`.
fn caps_for(c: f64, params: &B3Params, m: usize) -> Result<Vec<(usize, f64)>> {
    if params.delta_den == 0 {
        return Err(invalid("delta_den must be positive"));
    }
    if 4 * params.capped_prefixes >= params.delta_den {
        return Err(invalid(format!(
            "capped deltas must stay below 1/4: {}/{} is too large",
            params.capped_prefixes, params.delta_den
        )));
    }
    Ok((1..=params.capped_prefixes)
        .map(|j| {
            let delta = j as f64 / params.delta_den as f64;
            // Cells lying entirely within the outer delta-fraction.
            let covered = (j as usize * m) / params.delta_den as usize;
            (covered, mass_cap(delta, c))
        })
        .filter(|&(covered, _)| covered > 0)
        .collect())
}

/// Minimum of `Σ p_i v_i` over pair masses `p` on the simplex subject to the
/// cumulative caps implied by the candidate constant `c` (`None` for no
/// caps). Solved exactly; the result is rounded down.
pub fn case2_weighted_sum(c: Option<f64>, pairs: &PairValues, params: &B3Params) -> Result<f64> {
    let n = pairs.values.len();
    let mut lp = LinearProgram::minimize(pairs.values.iter().map(|&v| exact(v)).collect());
    lp.constrain(vec![int(1); n], Relation::Eq, int(1))?;
    if let Some(c) = c {
        for (covered, cap) in caps_for(c, params, pairs.m)? {
            let row = (0..n).map(|i| int((i < covered) as i64)).collect();
            lp.constrain(row, Relation::Le, exact(cap))?;
        }
    }
    let sol = lp.solve().map_err(|e| match e {
        Error::Infeasible => invalid(format!("mass caps infeasible for c = {c:?}; bad bracket")),
        other => other,
    })?;
    Ok(to_f64_down(&sol.objective))
}

/// Outcome of the self-consistent `B_3[g]` refinement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct B3Refinement {
    /// Least `c` (to `bisect_tol`) with `case2_constant(c) <= c`.
    pub constant: f64,
    /// `constant` rounded up to one decimal.
    pub theorem_constant: f64,
    /// Case 1: some outer mass exceeds its cap, so counting gives `c`.
    pub case1_constant: f64,
    /// Case 2: all caps hold; the capped minimum weighted sum at `c`.
    pub case2_weighted_sum: f64,
    /// Constant implied by `case2_weighted_sum`.
    pub case2_constant: f64,
    pub caps: Vec<f64>,
    pub pair_values: PairValues,
    pub iterations: u32,
    pub transcript: Vec<String>,
}

/// Searches for the least constant `c` such that the refinement closes:
/// either some edge mass `alpha_k(delta)` exceeds `(72·delta/c)^{1/3}` and
/// counting gives `|A| <= (c·g·N)^{1/3}`, or every cap holds, the weight
/// `1.6cos x - 0.3cos 3x + 0.1cos 6x` averages at least `w(c)` over `A`,
/// and the sinc inversion of `w(c)` gives a constant `c'(c) <= c`.
pub fn b3_refined_constant(params: &B3Params) -> Result<B3Refinement> {
    let pairs = b3_pair_values(&params.weight, params.m, params.tol)?;
    let implied = |c: f64| -> Result<(f64, f64)> {
        let w = case2_weighted_sum(Some(c), &pairs, params)?;
        let (c2, _) = weighted_sum_constant(w, 3, params.sinc_tol)?;
        Ok((w, c2))
    };

    let (mut lo, mut hi) = params.bracket;
    if !(lo > 0.0 && lo < hi) {
        return Err(invalid(format!("bad bracket {:?}", params.bracket)));
    }
    let mut transcript = Vec::new();
    let mut widenings = 0;
    while implied(lo)?.1 <= lo {
        lo /= 2.0;
        widenings += 1;
        if widenings > 60 {
            return Err(invalid("could not bracket the refined constant from below"));
        }
    }
    while implied(hi)?.1 > hi {
        hi *= 2.0;
        widenings += 1;
        if widenings > 60 {
            return Err(invalid("could not bracket the refined constant from above"));
        }
    }
    transcript.push(format!("bracket [{lo}, {hi}] after {widenings} widenings"));

    let mut iterations = 0;
    while hi - lo > params.bisect_tol {
        let mid = 0.5 * (lo + hi);
        if implied(mid)?.1 <= mid {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    let c = hi;
    let (w, c2) = implied(c)?;
    let caps: Vec<f64> = caps_for(c, params, pairs.m)?.into_iter().map(|(_, cap)| cap).collect();

    for (j, cap) in caps.iter().enumerate() {
        transcript.push(format!(
            "cap j={}: alpha_1({}/{}) <= (72·{}/{}/{c:.6})^(1/3) = {cap:.6}",
            j + 1,
            j + 1,
            params.delta_den,
            j + 1,
            params.delta_den
        ));
    }
    transcript.push(format!(
        "case 1: some cap exceeded -> |A| <= ({c:.6} g N)^(1/3)"
    ));
    transcript.push(format!(
        "case 2: all caps hold -> weighted sum >= {w:.7} |A| -> |A| <= ({c2:.6} g N)^(1/3)"
    ));
    transcript.push(format!(
        "self-consistent constant {c:.6} after {iterations} bisection steps"
    ));

    Ok(B3Refinement {
        constant: c,
        theorem_constant: round_up(c.max(c2), 1),
        case1_constant: c,
        case2_weighted_sum: w,
        case2_constant: c2,
        caps,
        pair_values: pairs,
        iterations,
        transcript,
    })
}

/// Every bound applicable to `inst`: trivial and cju always, crt and thm11
/// for `h >= 3`, and the refined constant for `h = 3`.
pub fn all_bounds(inst: BhgInstance, sinc_tol: f64, b3: Option<&B3Refinement>) -> Result<Vec<BoundReport>> {
    let mut out = vec![trivial_bound(inst)?];
    if inst.h >= 3 {
        out.push(BoundReport::new(BoundMethod::Crt, inst, crt_constant(inst.h)?)?);
    }
    out.push(BoundReport::new(BoundMethod::Cju, inst, cju_constant(inst.h)?)?);
    if inst.h >= 3 {
        out.push(BoundReport::new(BoundMethod::Thm11, inst, thm11_constant(inst.h, sinc_tol)?)?);
    }
    if inst.h == 3 {
        if let Some(r) = b3 {
            out.push(BoundReport::new(BoundMethod::B3Refined, inst, r.constant)?);
        }
    }
    Ok(out)
}

/// One row of the old-versus-new comparison for a given `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub h: u32,
    pub old_method: BoundMethod,
    pub old_constant: f64,
    pub new_method: BoundMethod,
    pub new_constant: f64,
}

/// For each `h`, the better of the crt and cju constants against the thm11
/// constant (or the refined constant for `h = 3` when supplied).
pub fn comparison_rows(hs: &[u32], sinc_tol: f64, b3: Option<f64>) -> Result<Vec<ComparisonRow>> {
    hs.iter()
        .map(|&h| {
            let crt = crt_constant(h)?;
            let cju = cju_constant(h)?;
            let (old_method, old_constant) = if crt <= cju {
                (BoundMethod::Crt, crt)
            } else {
                (BoundMethod::Cju, cju)
            };
            let (new_method, new_constant) = match (h, b3) {
                (3, Some(c)) => (BoundMethod::B3Refined, c),
                _ => (BoundMethod::Thm11, thm11_constant(h, sinc_tol)?),
            };
            Ok(ComparisonRow {
                h,
                old_method,
                old_constant,
                new_method,
                new_constant,
            })
        })
        .collect()
}

/// Aligned text table; constants are rounded up at the second decimal.
pub fn format_comparison(rows: &[ComparisonRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>3} | {:<26} | {:<26}\n",
        "h", "previous upper bound", "new upper bound"
    ));
    out.push_str(&format!("{}\n", "-".repeat(61)));
    for r in rows {
        let old = format!("({} g N)^(1/{})", round_up(r.old_constant, 2), r.h);
        let new = format!("({} g N)^(1/{})", round_up(r.new_constant, 2), r.h);
        out.push_str(&format!(
            "{:>3} | {:<20} {:<5} | {:<20} {:<5}\n",
            r.h,
            old,
            r.old_method.name(),
            new,
            r.new_method.name()
        ));
    }
    out
}

/// Certified minimum of [`build_g`] over `[-pi/h, pi/h]`.
pub fn certified_g_min(h: u32, tol: f64) -> Result<crate::trigcert::CertifiedMin> {
    let half = PI / h as f64;
    certified_min(&build_g(h)?, Interval::new(-half, half)?, tol)
}
