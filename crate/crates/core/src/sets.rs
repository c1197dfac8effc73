//! Finite `B_h[g]`-sets: representation counts, exact and greedy search, and
//! numerical checks of the structural inequalities on concrete sets.
//!
//! `A` is `B_h[g]` when every integer is a sum of `h` elements of `A` (a
//! multiset, repetition allowed) in at most `g` ways.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bounds::{factorial, sinc};
use crate::error::{invalid, Error, Result};

/// Default cap on `h·N`, the length of the sum range.
pub const DEFAULT_SUM_RANGE_CAP: u64 = 10_000_000;

/// Default node budget for [`max_bhg_exact`].
pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000_000;

/// Largest `N` accepted by [`max_bhg_exact`] for a given `h`.
pub fn exhaustive_cap(h: u32) -> u64 {
    match h {
        2 => 80,
        3 => 50,
        _ => 30,
    }
}

/// Sorted distinct positive integers in `{1, ..., N}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct IntSet {
    elements: Vec<u64>,
    #[serde(rename = "N")]
    n: u64,
}

impl IntSet {
    pub fn new(mut elements: Vec<u64>, n: u64) -> Result<Self> {
        elements.sort_unstable();
        if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!("duplicate element {}", w[0])));
        }
        if elements.first() == Some(&0) {
            return Err(invalid("elements must be positive"));
        }
        if let Some(&max) = elements.last() {
            if max > n {
                return Err(invalid(format!("element {max} exceeds N = {n}")));
            }
        }
        Ok(Self { elements, n })
    }

    /// Set with `N` equal to its largest element.
    pub fn from_elements(elements: Vec<u64>) -> Result<Self> {
        let n = elements.iter().copied().max().unwrap_or(0);
        Self::new(elements, n)
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }
}

/// Set file format: an optional `N=<int>` line, then whitespace-separated
/// positive integers. `#` starts a comment. Without a header `N` is the
/// largest element.
impl FromStr for IntSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |reason: String| Error::Parse {
            what: "integer set",
            input: s.chars().take(80).collect(),
            reason,
        };
        let mut n = None;
        let mut elements = Vec::new();
        for line in s.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if let Some(v) = line.strip_prefix("N=").or_else(|| line.strip_prefix("N =")) {
                if n.is_some() {
                    return Err(parse_err("repeated N= header".into()));
                }
                n = Some(v.trim().parse::<u64>().map_err(|e| parse_err(format!("N: {e}")))?);
                continue;
            }
            for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
                elements.push(tok.parse::<u64>().map_err(|e| parse_err(format!("{tok:?}: {e}")))?);
            }
        }
        match n {
            Some(n) => Self::new(elements, n),
            None => Self::from_elements(elements),
        }
    }
}

impl fmt::Display for IntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "N={}", self.n)?;
        let body: Vec<String> = self.elements.iter().map(u64::to_string).collect();
        writeln!(f, "{}", body.join(" "))
    }
}

fn check_sum_range(h: u32, n: u64, cap: u64) -> Result<usize> {
    let range = (h as u64)
        .checked_mul(n)
        .ok_or_else(|| Error::Overflow(format!("h·N for h = {h}, N = {n}")))?;
    if range > cap {
        return Err(Error::TooLarge {
            what: "h·N",
            value: range,
            cap,
        });
    }
    Ok(range as usize + 1)
}

/// Representation counts of every sum of `h` elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepProfile {
    pub h: u32,
    /// `multiset[s]`: multisets of size `h` from `A` summing to `s`.
    pub multiset: Vec<u128>,
    /// `ordered[s]`: ordered `h`-tuples from `A` summing to `s`.
    pub ordered: Vec<u128>,
}

impl RepProfile {
    pub fn multiset_count(&self, s: u64) -> u128 {
        self.multiset.get(s as usize).copied().unwrap_or(0)
    }

    pub fn ordered_count(&self, s: u64) -> u128 {
        self.ordered.get(s as usize).copied().unwrap_or(0)
    }

    /// Largest multiset count and its smallest witness sum.
    pub fn max_multiset(&self) -> (u64, u128) {
        let mut best = (0, 0);
        for (s, &c) in self.multiset.iter().enumerate() {
            if c > best.1 {
                best = (s as u64, c);
            }
        }
        best
    }

    /// Distinct sums, i.e. `|hA|`.
    pub fn sumset_size(&self) -> usize {
        self.multiset.iter().filter(|&&c| c > 0).count()
    }
}

pub fn rep_profile(a: &IntSet, h: u32) -> Result<RepProfile> {
    rep_profile_with_cap(a, h, DEFAULT_SUM_RANGE_CAP)
}

/// Dynamic programming over the number of summands, with checked `u128`
/// arithmetic.
pub fn rep_profile_with_cap(a: &IntSet, h: u32, cap: u64) -> Result<RepProfile> {
    if h < 1 {
        return Err(invalid("h must be >= 1"));
    }
    if a.is_empty() {
        return Err(invalid("the set must be nonempty"));
    }
    let max = *a.elements.last().expect("nonempty");
    let width = check_sum_range(h, max, cap)?;
    let overflow = || Error::Overflow(format!("representation counts for h = {h}"));

    // Multisets: one element at a time, unbounded multiplicity.
    let mut ms = vec![vec![0u128; width]; h as usize + 1];
    ms[0][0] = 1;
    for &x in &a.elements {
        let x = x as usize;
        for k in 1..=h as usize {
            for s in x..width {
                let add = ms[k - 1][s - x];
                if add != 0 {
                    ms[k][s] = ms[k][s].checked_add(add).ok_or_else(overflow)?;
                }
            }
        }
    }

    // Ordered tuples: repeated convolution with the indicator of A.
    let mut ord = vec![0u128; width];
    ord[0] = 1;
    for _ in 0..h {
        let mut next = vec![0u128; width];
        for (s, &c) in ord.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &x in &a.elements {
                let t = s + x as usize;
                if t >= width {
                    break;
                }
                next[t] = next[t].checked_add(c).ok_or_else(overflow)?;
            }
        }
        ord = next;
    }

    Ok(RepProfile {
        h,
        multiset: ms.pop().expect("h >= 1"),
        ordered: ord,
    })
}

/// Outcome of a `B_h[g]` membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BhgVerdict {
    pub h: u32,
    pub g: u64,
    pub is_bhg: bool,
    pub max_count: u128,
    /// Smallest sum attaining `max_count`.
    pub max_sum: u64,
    /// `max_sum` when `max_count` exceeds `g`.
    pub witness: Option<u64>,
}

pub fn is_bhg(a: &IntSet, h: u32, g: u64) -> Result<BhgVerdict> {
    if g < 1 {
        return Err(invalid("g must be >= 1"));
    }
    let prof = rep_profile(a, h)?;
    let (s, max_count) = prof.max_multiset();
    let is = max_count <= g as u128;
    Ok(BhgVerdict {
        h,
        g,
        is_bhg: is,
        max_count,
        max_sum: s,
        witness: (!is).then_some(s),
    })
}

fn require_bhg(a: &IntSet, h: u32, g: u64) -> Result<()> {
    let v = is_bhg(a, h, g)?;
    match v.witness {
        None => Ok(()),
        Some(w) => Err(Error::NotBhg {
            h,
            g,
            witness: w,
            count: v.max_count.min(u64::MAX as u128) as u64,
        }),
    }
}

/// Incrementally maintained multiset counts `cnt[k][s]` for `k <= h`.
struct MultisetCounter {
    h: usize,
    g: u64,
    width: usize,
    cnt: Vec<u64>,
}

impl MultisetCounter {
    fn new(h: u32, g: u64, n: u64) -> Result<Self> {
        let width = check_sum_range(h, n, DEFAULT_SUM_RANGE_CAP)?;
        let h = h as usize;
        let mut cnt = vec![0; (h + 1) * width];
        cnt[0] = 1;
        Ok(Self { h, g, width, cnt })
    }

    /// Adds `x`; returns whether the set is still `B_h[g]`. The element stays
    /// in either way.
    fn add(&mut self, x: usize) -> bool {
        let w = self.width;
        for k in 1..=self.h {
            let (lower, upper) = self.cnt.split_at_mut(k * w);
            let prev = &lower[(k - 1) * w..];
            let cur = &mut upper[..w];
            for s in x..w {
                cur[s] += prev[s - x];
            }
        }
        let top = &self.cnt[self.h * w..];
        top[x..].iter().all(|&c| c <= self.g)
    }

    /// Undoes `add(x)`.
    fn remove(&mut self, x: usize) {
        let w = self.width;
        for k in (1..=self.h).rev() {
            let (lower, upper) = self.cnt.split_at_mut(k * w);
            let prev = &lower[(k - 1) * w..];
            let cur = &mut upper[..w];
            for s in x..w {
                cur[s] -= prev[s - x];
            }
        }
    }
}

/// Elements are accepted in increasing order whenever the set stays `B_h[g]`.
pub fn greedy_bhg(n: u64, h: u32, g: u64) -> Result<IntSet> {
    if h < 2 || g < 1 || n < 1 {
        return Err(invalid(format!("need h >= 2, g >= 1, N >= 1; got h = {h}, g = {g}, N = {n}")));
    }
    let mut counter = MultisetCounter::new(h, g, n)?;
    let mut out = Vec::new();
    for x in 1..=n {
        if counter.add(x as usize) {
            out.push(x);
        } else {
            counter.remove(x as usize);
        }
    }
    IntSet::new(out, n)
}

/// Result of [`max_bhg_exact`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactSearch {
    pub set: IntSet,
    /// False when the node budget ran out before optimality was proved.
    pub optimal: bool,
    pub nodes: u64,
    /// `best[len]`: largest `B_h[g]`-set in `{1, ..., len}`, for every
    /// `len` resolved before stopping.
    pub best_by_length: Vec<usize>,
}

fn binomial(n: u64, k: u64) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

struct Dfs<'a> {
    counter: MultisetCounter,
    best: &'a [usize],
    len: usize,
    target: usize,
    chosen: Vec<u64>,
    nodes: u64,
    budget: u64,
}

enum Found {
    Yes,
    No,
    OutOfBudget,
}

impl Dfs<'_> {
    /// `chosen` holds 1, len and the picks below `from`.
    fn run(&mut self, from: usize) -> Found {
        let c = self.chosen.len();
        if c == self.target {
            return Found::Yes;
        }
        for y in from..self.len {
            // Elements of the final set in [y, len] form a shifted set of
            // length len - y + 1.
            if c - 1 + self.best[self.len - y + 1] < self.target {
                break;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return Found::OutOfBudget;
            }
            if self.counter.add(y) {
                self.chosen.push(y as u64);
                match self.run(y + 1) {
                    Found::No => {}
                    done => return done,
                }
                self.chosen.pop();
            }
            self.counter.remove(y);
        }
        Found::No
    }
}

/// Largest `B_h[g]`-set in `{1, ..., N}` by exhaustive search.
///
/// Solves every prefix length in turn: a set of size `best[len-1] + 1` in
/// `{1, ..., len}` must contain both 1 and `len` (otherwise a shift fits a
/// shorter interval), and the suffix from any element `y` is itself a set of
/// length `len - y + 1`, which bounds each branch by the earlier answers.
pub fn max_bhg_exact(n: u64, h: u32, g: u64, budget: u64) -> Result<ExactSearch> {
    if h < 2 || g < 1 || n < 1 {
        return Err(invalid(format!("need h >= 2, g >= 1, N >= 1; got h = {h}, g = {g}, N = {n}")));
    }
    let cap = exhaustive_cap(h);
    if n > cap {
        return Err(Error::TooLarge {
            what: "N for exhaustive search",
            value: n,
            cap,
        });
    }
    let n = n as usize;
    let mut best = vec![0usize, 1];
    let mut witness = vec![1u64];
    let mut nodes = 0u64;

    for len in 2..=n {
        let target = best[len - 1] + 1;
        let hh = h as u64;
        // Counting bound: C(t + h - 1, h) multisets, sums in a range of
        // length h(len - 1) + 1.
        if binomial(target as u64 + hh - 1, hh) > (g as u128) * (hh as u128 * (len as u128 - 1) + 1) {
            best.push(best[len - 1]);
            continue;
        }
        let mut counter = MultisetCounter::new(h, g, len as u64)?;
        let ok1 = counter.add(1);
        let ok2 = counter.add(len);
        debug_assert!(ok1 && ok2);
        let mut dfs = Dfs {
            counter,
            best: &best,
            len,
            target,
            chosen: vec![1, len as u64],
            nodes,
            budget,
        };
        let found = dfs.run(2);
        nodes = dfs.nodes;
        match found {
            Found::Yes => {
                let mut set = std::mem::take(&mut dfs.chosen);
                set.sort_unstable();
                best.push(target);
                witness = set;
            }
            Found::No => best.push(best[len - 1]),
            Found::OutOfBudget => {
                return Ok(ExactSearch {
                    set: IntSet::new(witness, n as u64)?,
                    optimal: false,
                    nodes,
                    best_by_length: best,
                });
            }
        }
    }
    Ok(ExactSearch {
        set: IntSet::new(witness, n as u64)?,
        optimal: true,
        nodes,
        best_by_length: best,
    })
}

/// `x_a = (2a - N - 1)·pi/(h·N)`, mapping `{1, ..., N}` into
/// `(-pi/h, pi/h)` symmetrically.
pub fn project_to_torus(a: &IntSet, h: u32) -> Vec<f64> {
    let n = a.n as f64;
    a.elements
        .iter()
        .map(|&x| (2.0 * x as f64 - n - 1.0) * PI / (h as f64 * n))
        .collect()
}

/// Relative masses of `A` near the ends of `[1, N]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassProfile {
    pub delta: f64,
    /// Number of end classes, `floor(1/(2 delta))`.
    pub l: usize,
    /// `alpha[k-1] = |C_k|/|A|` for `k = 1..=l`.
    pub alpha: Vec<f64>,
    pub counts: Vec<usize>,
    pub middle_count: usize,
    pub middle_mass: f64,
}

/// Class of `a` in `{1, ..., N}`: `Some(k)` when `a` lies within `k·delta·N`
/// of an end (with `k` minimal, `k <= l`), `None` for the middle.
pub fn end_class(a: u64, n: u64, delta: f64, l: usize) -> Option<usize> {
    let dn = delta * n as f64;
    let left = (a as f64 / dn).ceil().max(1.0);
    let right = ((n - a) as f64 / dn).ceil().max(1.0);
    let k = left.min(right) as usize;
    (k <= l).then_some(k)
}

pub fn mass_profile(a: &IntSet, delta: f64) -> Result<MassProfile> {
    if !(delta > 0.0 && delta <= 0.25) {
        return Err(invalid(format!("delta must lie in (0, 1/4], got {delta}")));
    }
    if a.is_empty() {
        return Err(invalid("the set must be nonempty"));
    }
    let l = (1.0 / (2.0 * delta)).floor() as usize;
    let mut counts = vec![0usize; l];
    let mut middle = 0;
    for &x in &a.elements {
        match end_class(x, a.n, delta, l) {
            Some(k) => counts[k - 1] += 1,
            None => middle += 1,
        }
    }
    let total = a.len() as f64;
    Ok(MassProfile {
        delta,
        l,
        alpha: counts.iter().map(|&c| c as f64 / total).collect(),
        counts,
        middle_count: middle,
        middle_mass: middle as f64 / total,
    })
}

/// Numerical check of `|A| <= (72 delta g N)^{1/3} / alpha_k(delta)` for a
/// `B_3[g]`-set, with the sumset facts it rests on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassBoundReport {
    pub k: usize,
    pub delta: f64,
    pub size: usize,
    pub class_size: usize,
    pub alpha_k: f64,
    /// `None` when `alpha_k = 0` and the inequality is vacuous.
    pub rhs: Option<f64>,
    pub holds: bool,
    /// `|3C_k|`.
    pub sumset_size: usize,
    /// Whether `3C_k` lies in the four expected intervals of total length
    /// `12 delta N`.
    pub sumset_contained: bool,
    /// `C(|C_k| + 2, 3) <= g·|3C_k|`.
    pub counting_holds: bool,
}

pub fn lemma22_check(a: &IntSet, g: u64, delta: f64, k: usize) -> Result<ClassBoundReport> {
    if !(delta > 0.0 && delta < 0.25) {
        return Err(invalid(format!("delta must lie in (0, 1/4), got {delta}")));
    }
    require_bhg(a, 3, g)?;
    let n = a.n as f64;
    if n <= 2.0 / delta {
        return Err(invalid(format!("need N > 2/delta; N = {}, 2/delta = {}", a.n, 2.0 / delta)));
    }
    let prof = mass_profile(a, delta)?;
    if k < 1 || k > prof.l {
        return Err(invalid(format!("k must lie in 1..={}, got {k}", prof.l)));
    }

    let class: Vec<u64> = a
        .elements
        .iter()
        .copied()
        .filter(|&x| end_class(x, a.n, delta, prof.l) == Some(k))
        .collect();
    let alpha_k = prof.alpha[k - 1];
    let size = a.len();

    let (sumset_size, sumset_contained) = if class.is_empty() {
        (0, true)
    } else {
        let c = IntSet::new(class.clone(), a.n)?;
        let p = rep_profile(&c, 3)?;
        let (kf, d) = (k as f64, delta);
        let eps = 1e-9 * n;
        let bands = [
            (3.0 * (kf - 1.0) * d * n, 3.0 * kf * d * n),
            ((1.0 + (kf - 2.0) * d) * n, (1.0 + (kf + 1.0) * d) * n),
            ((2.0 - (kf + 1.0) * d) * n, (2.0 - (kf - 2.0) * d) * n),
            ((3.0 - 3.0 * kf * d) * n, (3.0 - 3.0 * (kf - 1.0) * d) * n),
        ];
        let sums: Vec<u64> = (0..p.multiset.len() as u64).filter(|&s| p.multiset_count(s) > 0).collect();
        let contained = sums
            .iter()
            .all(|&s| bands.iter().any(|&(lo, hi)| s as f64 >= lo - eps && s as f64 <= hi + eps));
        (sums.len(), contained)
    };
    let counting_holds = binomial(class.len() as u64 + 2, 3) <= g as u128 * sumset_size as u128;

    let rhs = (alpha_k > 0.0).then(|| (72.0 * delta * g as f64 * n).cbrt() / alpha_k);
    Ok(ClassBoundReport {
        k,
        delta,
        size,
        class_size: class.len(),
        alpha_k,
        rhs,
        holds: rhs.map_or(true, |r| size as f64 <= r),
        sumset_size,
        sumset_contained,
        counting_holds,
    })
}

/// The exponential sum `|Σ_a e(a j / (hN))|` against the finite and
/// limiting forms of its upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpSumReport {
    pub j: u64,
    pub value: f64,
    /// `Q = |A|^h / (h!·h·g·N)`.
    pub q: f64,
    /// `(h!·g·|sin(pi Q - pi/L)/sin(pi/L)|)^{1/h}` with `L = hN`.
    pub finite_bound: f64,
    /// `|A|·sinc(pi Q)^{1/h}`.
    pub clean_bound: f64,
    pub finite_margin: f64,
    pub clean_margin: f64,
}

struct ExpSumSetup {
    l: u64,
    q: f64,
    finite_bound: f64,
    clean_bound: f64,
}

fn expsum_setup(a: &IntSet, h: u32, g: u64) -> Result<ExpSumSetup> {
    require_bhg(a, h, g)?;
    let l = h as u64 * a.n;
    let size = a.len() as f64;
    let hf = factorial(h)?;
    let q = size.powi(h as i32) / (hf * h as f64 * g as f64 * a.n as f64);
    let lf = l as f64;
    let ratio = ((PI * q - PI / lf).sin() / (PI / lf).sin()).abs();
    let finite_bound = (hf * g as f64 * ratio).powf(1.0 / h as f64);
    let clean_bound = size * sinc(PI * q).max(0.0).powf(1.0 / h as f64);
    Ok(ExpSumSetup {
        l,
        q,
        finite_bound,
        clean_bound,
    })
}

fn expsum_value(a: &IntSet, l: u64, j: u64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for &x in &a.elements {
        // Reduce a·j mod L exactly before taking the angle.
        let r = ((x as u128 * j as u128) % l as u128) as f64;
        let t = 2.0 * PI * r / l as f64;
        re += t.cos();
        im += t.sin();
    }
    re.hypot(im)
}

fn expsum_report(s: &ExpSumSetup, value: f64, j: u64) -> ExpSumReport {
    ExpSumReport {
        j,
        value,
        q: s.q,
        finite_bound: s.finite_bound,
        clean_bound: s.clean_bound,
        finite_margin: s.finite_bound - value,
        clean_margin: s.clean_bound - value,
    }
}

pub fn expsum_check(a: &IntSet, h: u32, g: u64, j: u64) -> Result<ExpSumReport> {
    let setup = expsum_setup(a, h, g)?;
    if j < 1 || j >= setup.l {
        return Err(invalid(format!("j must lie in 1..{}, got {j}", setup.l)));
    }
    Ok(expsum_report(&setup, expsum_value(a, setup.l, j), j))
}

/// [`expsum_check`] at every `j` in `1..hN`, with the smallest margins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpSumSweep {
    pub reports: Vec<ExpSumReport>,
    pub min_finite_margin: f64,
    pub min_clean_margin: f64,
}

pub fn expsum_sweep(a: &IntSet, h: u32, g: u64) -> Result<ExpSumSweep> {
    let setup = expsum_setup(a, h, g)?;
    let reports: Vec<ExpSumReport> = (1..setup.l)
        .map(|j| expsum_report(&setup, expsum_value(a, setup.l, j), j))
        .collect();
    let min_finite_margin = reports.iter().map(|r| r.finite_margin).fold(f64::INFINITY, f64::min);
    let min_clean_margin = reports.iter().map(|r| r.clean_margin).fold(f64::INFINITY, f64::min);
    Ok(ExpSumSweep {
        reports,
        min_finite_margin,
        min_clean_margin,
    })
}

/// Constant `L_h` in the window inequality: `4/(pi+2)^2` for `h = 2`,
/// `cos^h(pi/h)` otherwise.
pub fn window_constant(h: u32) -> f64 {
    if h == 2 {
        4.0 / (PI + 2.0).powi(2)
    } else {
        (PI / h as f64).cos().powi(h as i32)
    }
}

/// `Σ_n |Σ_{n-H < m <= n} r_h(m) - mu|` against `L_h·H·|A|^h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowCheck {
    pub h: u32,
    pub window: u64,
    pub mu: f64,
    pub lhs: f64,
    pub l_h: f64,
    pub rhs_classic: f64,
    pub psi: f64,
    /// `psi^h·L_h·H·|A|^h`.
    pub rhs_psi: f64,
    /// `lhs / (H·|A|^h)`.
    pub ratio: f64,
    /// The `mu` minimizing `lhs` (a median of the window sums).
    pub best_mu: f64,
    pub best_lhs: f64,
}

pub fn window_check(a: &IntSet, h: u32, window: u64, mu: f64, psi: f64) -> Result<WindowCheck> {
    if window < 1 {
        return Err(invalid("window length must be >= 1"));
    }
    if !mu.is_finite() || !psi.is_finite() {
        return Err(invalid("mu and psi must be finite"));
    }
    let prof = rep_profile(a, h)?;
    let top = (h as u64 * a.n)
        .checked_add(window)
        .ok_or_else(|| Error::Overflow("h·N + H".into()))?;
    // Prefix sums of ordered counts; windows run over n = h ..= hN + H.
    let mut prefix = vec![0u128; top as usize + 1];
    for n in 1..=top as usize {
        prefix[n] = prefix[n - 1] + prof.ordered.get(n).copied().unwrap_or(0);
    }
    let sums: Vec<f64> = (h as u64..=top)
        .map(|n| {
            let lo = n.saturating_sub(window) as usize;
            (prefix[n as usize] - prefix[lo]) as f64
        })
        .collect();
    let lhs_at = |m: f64| sums.iter().map(|s| (s - m).abs()).sum::<f64>();

    let mut sorted = sums.clone();
    sorted.sort_by(f64::total_cmp);
    let best_mu = sorted[sorted.len() / 2];

    let scale = window as f64 * (a.len() as f64).powi(h as i32);
    let l_h = window_constant(h);
    let lhs = lhs_at(mu);
    Ok(WindowCheck {
        h,
        window,
        mu,
        lhs,
        l_h,
        rhs_classic: l_h * scale,
        psi,
        rhs_psi: psi.powi(h as i32) * l_h * scale,
        ratio: lhs / scale,
        best_mu,
        best_lhs: lhs_at(best_mu),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn set(v: &[u64]) -> IntSet {
        IntSet::from_elements(v.to_vec()).unwrap()
    }

    /// Multiset counts by explicit enumeration.
    fn oracle_counts(a: &[u64], h: usize) -> HashMap<u64, u128> {
        let mut m = HashMap::new();
        for c in a.iter().combinations_with_replacement(h) {
            *m.entry(c.into_iter().sum()).or_insert(0) += 1;
        }
        m
    }

    fn oracle_is_bhg(a: &[u64], h: usize, g: u64) -> bool {
        oracle_counts(a, h).values().all(|&c| c <= g as u128)
    }

    /// Largest B_h[g] subset of {1..n} by trying every subset.
    fn oracle_max(n: u64, h: usize, g: u64) -> usize {
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let k = mask.count_ones() as usize;
            if k <= best {
                continue;
            }
            let a: Vec<u64> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
            if oracle_is_bhg(&a, h, g) {
                best = k;
            }
        }
        best
    }

    #[test]
    fn set_parsing() {
        let a: IntSet = "N=11\n1 2 5 11\n".parse().unwrap();
        assert_eq!(a.elements(), &[1, 2, 5, 11]);
        assert_eq!(a.n(), 11);
        let b: IntSet = "# c\n3, 1 2\n".parse().unwrap();
        assert_eq!(b.elements(), &[1, 2, 3]);
        assert_eq!(b.n(), 3);
        assert!("N=3\n1 5\n".parse::<IntSet>().is_err());
        assert!("1 1\n".parse::<IntSet>().is_err());
        assert!("0 1\n".parse::<IntSet>().is_err());
        assert!("1 x\n".parse::<IntSet>().is_err());
        assert_eq!(a.to_string().parse::<IntSet>().unwrap(), a);
    }

    #[test]
    fn bhg_examples() {
        let v = is_bhg(&set(&[1, 2, 5, 11]), 2, 1).unwrap();
        assert!(v.is_bhg && v.max_count == 1 && v.witness.is_none());
        // 1 + 3 = 2 + 2 is the first collision.
        let v = is_bhg(&set(&[1, 2, 3, 4]), 2, 1).unwrap();
        assert!(!v.is_bhg);
        assert_eq!(v.max_count, 2);
        assert_eq!(v.witness, Some(4));
        assert!(is_bhg(&set(&[1, 2, 3, 4]), 2, 2).unwrap().is_bhg);
    }

    #[test]
    fn profile_matches_oracle() {
        let a = [1u64, 3, 4, 9, 10, 17];
        for h in 1..=4 {
            let p = rep_profile(&set(&a), h).unwrap();
            let o = oracle_counts(&a, h as usize);
            for (s, &c) in p.multiset.iter().enumerate() {
                assert_eq!(c, o.get(&(s as u64)).copied().unwrap_or(0), "h = {h}, s = {s}");
            }
            let total: u128 = p.ordered.iter().sum();
            assert_eq!(total, (a.len() as u128).pow(h));
        }
    }

    #[test]
    fn ordered_counts_match_tuples() {
        let a = [2u64, 3, 7];
        let p = rep_profile(&set(&a), 3).unwrap();
        let mut o: HashMap<u64, u128> = HashMap::new();
        for t in itertools::repeat_n(a.iter(), 3).multi_cartesian_product() {
            *o.entry(t.into_iter().sum()).or_insert(0) += 1;
        }
        for (s, &c) in p.ordered.iter().enumerate() {
            assert_eq!(c, o.get(&(s as u64)).copied().unwrap_or(0));
        }
    }

    #[test]
    fn sum_range_cap() {
        let a = IntSet::new(vec![1, 10_000_000], 10_000_000).unwrap();
        assert!(matches!(rep_profile(&a, 2), Err(Error::TooLarge { .. })));
        assert!(rep_profile_with_cap(&set(&[1, 5]), 2, 9).is_err());
        assert!(rep_profile_with_cap(&set(&[1, 5]), 2, 10).is_ok());
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(greedy_bhg(20, 2, 1).unwrap().elements(), &[1, 2, 4, 8, 13]);
        assert_eq!(greedy_bhg(60, 3, 1).unwrap().elements(), &[1, 2, 5, 14, 33]);
        assert_eq!(greedy_bhg(40, 3, 2).unwrap().elements(), &[1, 2, 3, 6, 12, 18]);
        for (n, h, g) in [(30, 2, 1), (30, 2, 2), (25, 3, 1), (25, 3, 3), (20, 4, 2)] {
            let a = greedy_bhg(n, h, g).unwrap();
            assert!(oracle_is_bhg(a.elements(), h as usize, g));
            // Maximal: no skipped element can be added.
            for x in 1..=n {
                if !a.contains(x) {
                    let mut b = a.elements().to_vec();
                    b.push(x);
                    assert!(!oracle_is_bhg(&b, h as usize, g), "{x} could join {a:?}");
                }
            }
        }
    }

    #[test]
    fn exact_matches_brute_force() {
        for (n, h, g) in [(14, 2, 1), (16, 2, 2), (14, 3, 1), (14, 3, 2), (12, 4, 1), (12, 4, 3)] {
            let r = max_bhg_exact(n, h, g, DEFAULT_NODE_BUDGET).unwrap();
            assert!(r.optimal);
            assert_eq!(r.set.len(), oracle_max(n, h as usize, g), "(N, h, g) = ({n}, {h}, {g})");
            assert!(oracle_is_bhg(r.set.elements(), h as usize, g));
        }
    }

    #[test]
    fn exact_known_values() {
        // Optimal Golomb rulers: 5 marks need length 11, 6 marks length 17.
        let r = max_bhg_exact(12, 2, 1, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.set.len(), 5);
        let r = max_bhg_exact(18, 2, 1, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.set.len(), 6);
        assert_eq!(&r.best_by_length[..19], &[0, 1, 2, 2, 3, 3, 3, 4, 4, 4, 4, 4, 5, 5, 5, 5, 5, 5, 6]);
        assert!(matches!(max_bhg_exact(81, 2, 1, 10), Err(Error::TooLarge { .. })));
        assert!(max_bhg_exact(50, 3, 1, 10).is_ok());
    }

    #[test]
    fn exact_budget_exhaustion() {
        let r = max_bhg_exact(40, 2, 1, 50).unwrap();
        assert!(!r.optimal);
        assert!(is_bhg(&r.set, 2, 1).unwrap().is_bhg);
    }

    #[test]
    fn torus_projection() {
        let x = project_to_torus(&IntSet::new(vec![1, 3, 5], 5).unwrap(), 2);
        assert!((x[0] + 0.4 * PI).abs() < 1e-15);
        assert!(x[1].abs() < 1e-15);
        assert!((x[2] - 0.4 * PI).abs() < 1e-15);
        let a = IntSet::new((1..=97).collect(), 97).unwrap();
        for &t in &project_to_torus(&a, 3) {
            assert!(t.abs() < PI / 3.0);
        }
    }

    #[test]
    fn mass_profile_example() {
        let a = IntSet::new((1..=100).collect(), 100).unwrap();
        let p = mass_profile(&a, 0.1).unwrap();
        assert_eq!(p.l, 5);
        // C_1 = [1, 10] and [90, 100]; 50 sits in both halves of C_5.
        assert_eq!(p.counts, vec![21, 20, 20, 20, 19]);
        assert_eq!(p.middle_count, 0);
        let total: f64 = p.alpha.iter().sum::<f64>() + p.middle_mass;
        assert!((total - 1.0).abs() < 1e-12);
        assert!(mass_profile(&a, 0.3).is_err());
        assert!(mass_profile(&a, 0.0).is_err());
    }

    #[test]
    fn class_bound_examples() {
        let a = greedy_bhg(200, 3, 1).unwrap();
        for k in 1..=5 {
            let r = lemma22_check(&a, 1, 0.1, k).unwrap();
            assert!(r.holds && r.sumset_contained && r.counting_holds, "{r:?}");
        }
        let not = IntSet::new(vec![1, 2, 3, 4], 100).unwrap();
        assert!(matches!(lemma22_check(&not, 1, 0.1, 1), Err(Error::NotBhg { .. })));
        assert!(lemma22_check(&a, 1, 0.25, 1).is_err());
        let small = greedy_bhg(15, 3, 1).unwrap();
        assert!(lemma22_check(&small, 1, 0.1, 1).is_err());
    }

    #[test]
    fn expsum_sidon_example() {
        let a = IntSet::new(vec![1, 2, 5, 11], 11).unwrap();
        let s = expsum_sweep(&a, 2, 1).unwrap();
        assert_eq!(s.reports.len(), 21);
        assert!(s.min_finite_margin >= -1e-9);
        assert!((s.min_finite_margin - 0.50).abs() < 0.01);
        assert!(expsum_check(&a, 2, 1, 22).is_err());
        assert!(expsum_check(&a, 2, 1, 0).is_err());
    }

    #[test]
    fn expsum_small_set_counterexample() {
        // A two-element set at tiny N sits outside the finite bound's range
        // of validity: the bound evaluates to 0 while the sum is sqrt(2).
        let a = IntSet::new(vec![1, 2], 2).unwrap();
        let r = expsum_check(&a, 2, 2, 1).unwrap();
        assert!(r.finite_bound < 1e-7);
        assert!((r.value - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn expsum_value_matches_complex_sum() {
        let a = greedy_bhg(30, 3, 2).unwrap();
        let l = 3 * 30;
        for j in [1u64, 7, 45, 89] {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for &x in a.elements() {
                let t = 2.0 * PI * (x * j) as f64 / l as f64;
                re += t.cos();
                im += t.sin();
            }
            let r = expsum_check(&a, 3, 2, j).unwrap();
            assert!((r.value - (re * re + im * im).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn window_examples() {
        let a = greedy_bhg(50, 2, 1).unwrap();
        let w = window_check(&a, 2, 10, 0.0, 1.0).unwrap();
        assert!((w.l_h - 4.0 / (PI + 2.0).powi(2)).abs() < 1e-15);
        assert_eq!(w.rhs_psi, w.rhs_classic);
        // With mu = 0 each ordered tuple is counted once per window.
        let total = (a.len() as f64).powi(2) * 10.0;
        assert!((w.lhs - total).abs() < 1e-9);
        assert!(w.best_lhs <= w.lhs);
        assert!(window_check(&a, 2, 0, 0.0, 1.0).is_err());
        assert!((window_constant(3) - 0.125).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn is_bhg_agrees_with_oracle(v in prop::collection::btree_set(1u64..40, 1..8), h in 2u32..4, g in 1u64..4) {
            let a: Vec<u64> = v.into_iter().collect();
            let got = is_bhg(&set(&a), h, g).unwrap().is_bhg;
            prop_assert_eq!(got, oracle_is_bhg(&a, h as usize, g));
        }

        #[test]
        fn bhg_is_monotone_in_g(v in prop::collection::btree_set(1u64..40, 1..8), h in 2u32..4, g in 1u64..4) {
            let a = set(&v.into_iter().collect::<Vec<_>>());
            if is_bhg(&a, h, g).unwrap().is_bhg {
                prop_assert!(is_bhg(&a, h, g + 1).unwrap().is_bhg);
            }
        }

        #[test]
        fn bhg_is_closed_under_subsets(v in prop::collection::btree_set(1u64..40, 2..8), drop in 0usize..8, h in 2u32..4, g in 1u64..3) {
            let all: Vec<u64> = v.into_iter().collect();
            if is_bhg(&set(&all), h, g).unwrap().is_bhg {
                let mut sub = all.clone();
                sub.remove(drop % sub.len());
                prop_assert!(is_bhg(&set(&sub), h, g).unwrap().is_bhg);
            }
        }

        #[test]
        fn bhg_is_translation_invariant(v in prop::collection::btree_set(1u64..40, 1..8), t in 0u64..50, h in 2u32..4, g in 1u64..3) {
            let a: Vec<u64> = v.into_iter().collect();
            let b: Vec<u64> = a.iter().map(|x| x + t).collect();
            prop_assert_eq!(is_bhg(&set(&a), h, g).unwrap().is_bhg, is_bhg(&set(&b), h, g).unwrap().is_bhg);
        }

        #[test]
        fn profile_totals(v in prop::collection::btree_set(1u64..60, 1..10), h in 1u32..5) {
            let a = set(&v.into_iter().collect::<Vec<_>>());
            let p = rep_profile(&a, h).unwrap();
            let k = a.len() as u64;
            prop_assert_eq!(p.ordered.iter().sum::<u128>(), (k as u128).pow(h));
            prop_assert_eq!(p.multiset.iter().sum::<u128>(), binomial(k + h as u64 - 1, h as u64));
        }

        #[test]
        fn exact_at_least_greedy(n in 2u64..22, h in 2u32..4, g in 1u64..3) {
            let greedy = greedy_bhg(n, h, g).unwrap();
            let exact = max_bhg_exact(n, h, g, DEFAULT_NODE_BUDGET).unwrap();
            prop_assert!(exact.set.len() >= greedy.len());
        }

        #[test]
        fn mass_profile_sums_to_one(n in 10u64..200, den in 4u32..20) {
            let a = greedy_bhg(n, 2, 1).unwrap();
            let p = mass_profile(&a, 1.0 / den as f64).unwrap();
            let total: usize = p.counts.iter().sum::<usize>() + p.middle_count;
            prop_assert_eq!(total, a.len());
        }

        #[test]
        fn median_mu_minimizes(v in prop::collection::btree_set(1u64..30, 1..7), w in 1u64..8, mu in 0.0f64..20.0) {
            let a = set(&v.into_iter().collect::<Vec<_>>());
            let c = window_check(&a, 2, w, mu, 1.0).unwrap();
            prop_assert!(c.best_lhs <= c.lhs + 1e-9);
        }
    }
}
