use std::fs;
use std::path::Path;

use bhg_core::bounds::{
    b3_refined_constant, cju_constant, crt_constant, prop31_bound, thm11_constant, trivial_bound, B3Params,
    DEFAULT_SINC_TOL,
};
use bhg_core::psi::{family_search, minmax_lower_bound, theorem32_family, value_matrix, FunctionFamily};
use bhg_core::sets::{
    expsum_sweep, greedy_bhg, is_bhg, lemma22_check, mass_profile, max_bhg_exact, rep_profile, window_check,
};
use bhg_core::trigcert::{certified_min_with_budget, CosinePoly, Interval};
use bhg_core::{BhgInstance, BoundMethod, BoundReport, Error, IntSet, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::output::{Cell, Report};
use crate::{BoundsArgs, CertifyArgs, PsiArgs, SearchArgs, Status, VerifyArgs, WindowArgs};

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn read_set(path: &Path) -> Result<IntSet> {
    read_file(path)?.parse()
}

pub fn bounds(a: BoundsArgs) -> Result<(Report, Status)> {
    let inst = BhgInstance::new(a.h, a.g, a.n)?;
    let only = match a.method.trim() {
        m if m.eq_ignore_ascii_case("all") => None,
        m => Some(m.parse::<BoundMethod>()?),
    };
    let wants = |m: BoundMethod| only.is_none_or(|o| o == m);
    // Methods that need h >= 3 are skipped under `all` and rejected when
    // asked for by name.
    let applicable = |m: BoundMethod, ok: bool| -> Result<bool> {
        match (wants(m), ok, only.is_some()) {
            (false, _, _) => Ok(false),
            (true, true, _) => Ok(true),
            (true, false, false) => Ok(false),
            (true, false, true) => Err(Error::InvalidInput(format!("{m} does not apply to h = {}", a.h))),
        }
    };

    let mut reports: Vec<BoundReport> = Vec::new();
    if wants(BoundMethod::Trivial) {
        reports.push(trivial_bound(inst)?);
    }
    if applicable(BoundMethod::Crt, a.h >= 3)? {
        reports.push(BoundReport::new(BoundMethod::Crt, inst, crt_constant(a.h)?)?);
    }
    if wants(BoundMethod::Cju) {
        reports.push(BoundReport::new(BoundMethod::Cju, inst, cju_constant(a.h)?)?);
    }
    if applicable(BoundMethod::Thm11, a.h >= 3)? {
        reports.push(BoundReport::new(BoundMethod::Thm11, inst, thm11_constant(a.h, DEFAULT_SINC_TOL)?)?);
    }
    if applicable(BoundMethod::B3Refined, a.h == 3)? {
        let params = B3Params {
            m: a.m,
            delta_den: a.delta_den,
            tol: a.tol,
            ..B3Params::default()
        };
        let r = b3_refined_constant(&params)?;
        reports.push(BoundReport::new(BoundMethod::B3Refined, inst, r.constant)?);
    }
    if applicable(BoundMethod::Prop31, a.psi.is_some())? {
        reports.push(prop31_bound(a.psi.expect("checked"), inst, DEFAULT_SINC_TOL)?);
    }

    let mut report = Report::new(
        json!({ "instance": inst, "bounds": reports }),
        vec!["method", "h", "g", "N", "constant", "cardinality_bound", "asymptotic"],
    );
    for r in &reports {
        report.row(vec![
            r.method.name().into(),
            r.h.into(),
            r.g.into(),
            r.n.into(),
            Cell::Num(r.constant),
            Cell::Upper(r.cardinality_bound),
            r.asymptotic.into(),
        ]);
    }
    if reports.iter().any(|r| r.asymptotic) {
        report.note("asymptotic bounds hold up to a factor 1 + o(1) as N grows");
    }
    Ok((report, Status::Ok))
}

fn random_set(rng: &mut ChaCha8Rng, max_size: usize, max_elem: u64) -> Result<IntSet> {
    let size = rng.gen_range(1..=max_size);
    let mut v: Vec<u64> = Vec::with_capacity(size);
    while v.len() < size {
        let x = rng.gen_range(1..=max_elem);
        if !v.contains(&x) {
            v.push(x);
        }
    }
    IntSet::from_elements(v)
}

fn verify_random(count: usize, h: u32, seed: u64) -> Result<(Report, Status)> {
    if h < 1 {
        return Err(Error::InvalidInput("h must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fact: u128 = (1..=h as u128).product();
    let mut failures = Vec::new();
    for i in 0..count {
        let a = random_set(&mut rng, 12, 60)?;
        let p = rep_profile(&a, h)?;
        let k = a.len() as u128;
        let multisets = (0..h as u128).fold(1u128, |acc, i| acc * (k + i) / (i + 1));
        let ok = p.ordered.iter().sum::<u128>() == k.pow(h)
            && p.multiset.iter().sum::<u128>() == multisets
            && p.ordered.iter().zip(&p.multiset).all(|(&o, &m)| o <= fact * m);
        if !ok {
            failures.push(json!({ "index": i, "set": a }));
        }
    }
    let mut report = Report::new(
        json!({ "h": h, "seed": seed, "sets": count, "failures": failures }),
        vec!["check", "value", "detail"],
    );
    report.row(vec![
        "counting_identities".into(),
        (count - failures.len()).into(),
        format!("of {count} random sets pass (seed {seed})").into(),
    ]);
    let status = if failures.is_empty() { Status::Ok } else { Status::Mismatch };
    Ok((report, status))
}

pub fn verify(a: VerifyArgs, seed: u64) -> Result<(Report, Status)> {
    if let Some(count) = a.random {
        return verify_random(count, a.h, seed);
    }
    let path = a
        .file
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("verify needs --file or --random".into()))?;
    let set = read_set(path)?;
    let v = is_bhg(&set, a.h, a.g)?;
    let mut report = Report::new(json!(null), vec!["check", "value", "detail"]);
    let mut out = json!({ "set": set, "verdict": v });

    report.row(vec!["size".into(), set.len().into(), format!("N = {}", set.n()).into()]);
    report.row(vec![
        "max_count".into(),
        v.max_count.into(),
        format!("smallest sum with that count: {}", v.max_sum).into(),
    ]);
    report.row(vec![
        format!("B_{}[{}]", a.h, a.g).into(),
        if v.is_bhg { "yes" } else { "no" }.into(),
        match v.witness {
            Some(w) => format!("{} representations of {w}", v.max_count).into(),
            None => "".into(),
        },
    ]);

    if a.expsum {
        if v.is_bhg {
            let s = expsum_sweep(&set, a.h, a.g)?;
            let worst = |f: fn(&bhg_core::sets::ExpSumReport) -> f64| {
                s.reports.iter().min_by(|x, y| f(x).total_cmp(&f(y))).map(|r| r.j).unwrap_or(0)
            };
            let (jf, jc) = (worst(|r| r.finite_margin), worst(|r| r.clean_margin));
            report.row(vec!["expsum_finite_margin".into(), Cell::Num(s.min_finite_margin), format!("min over j, at j = {jf}").into()]);
            report.row(vec!["expsum_clean_margin".into(), Cell::Num(s.min_clean_margin), format!("min over j, at j = {jc}").into()]);
            out["expsum"] = json!({
                "min_finite_margin": s.min_finite_margin,
                "min_clean_margin": s.min_clean_margin,
                "worst_finite_j": jf,
                "worst_clean_j": jc,
                "reports": s.reports,
            });
        } else {
            report.note("expsum skipped: the set is not B_h[g]");
        }
    }

    if let Some(delta) = a.delta {
        let prof = mass_profile(&set, delta)?;
        for (k, alpha) in prof.alpha.iter().enumerate() {
            report.row(vec![format!("alpha_{}", k + 1).into(), Cell::Num(*alpha), format!("{} elements", prof.counts[k]).into()]);
        }
        report.row(vec!["middle_mass".into(), Cell::Num(prof.middle_mass), format!("{} elements", prof.middle_count).into()]);
        out["mass_profile"] = json!(prof);
        if a.h == 3 && v.is_bhg {
            let checks = (1..=prof.l)
                .map(|k| lemma22_check(&set, a.g, delta, k))
                .collect::<Result<Vec<_>>>()?;
            for c in &checks {
                let rhs = c.rhs.map_or("vacuous".to_string(), |r| format!("|A| = {} vs {r:.6}", c.size));
                report.row(vec![
                    format!("class_bound_{}", c.k).into(),
                    (c.holds && c.sumset_contained && c.counting_holds).into(),
                    rhs.into(),
                ]);
            }
            out["class_bounds"] = json!(checks);
        }
    }

    report.json = out;
    Ok((report, Status::Ok))
}

pub fn search(a: SearchArgs) -> Result<(Report, Status)> {
    let inst = BhgInstance::new(a.h, a.g, a.n)?;
    let greedy = greedy_bhg(a.n, a.h, a.g)?;
    let mut report = Report::new(json!(null), vec!["method", "size", "optimal", "nodes", "set"]);
    let fmt_set = |s: &IntSet| s.elements().iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    let mut status = Status::Ok;
    if a.greedy {
        report.json = json!({ "instance": inst, "greedy": greedy });
    } else {
        let exact = max_bhg_exact(a.n, a.h, a.g, a.budget)?;
        report.row(vec![
            "exact".into(),
            exact.set.len().into(),
            exact.optimal.into(),
            exact.nodes.into(),
            fmt_set(&exact.set).into(),
        ]);
        if !exact.optimal {
            report.note("node budget exhausted: the exact set is the best found, not proven optimal");
            status = Status::Exhausted;
        }
        report.json = json!({ "instance": inst, "exact": exact, "greedy": greedy });
    }
    report.row(vec!["greedy".into(), greedy.len().into(), "".into(), "".into(), fmt_set(&greedy).into()]);
    Ok((report, status))
}

pub fn psi(a: PsiArgs) -> Result<(Report, Status)> {
    let family: FunctionFamily = match (&a.family, a.canonical) {
        (Some(p), _) => read_file(p)?.parse()?,
        (None, true) => theorem32_family(),
        (None, false) => return Err(Error::InvalidInput("psi needs --canonical or --family".into())),
    };
    let (family, est, search) = match a.budget {
        Some(budget) => {
            let out = family_search(&family, a.m, &a.steps, budget, a.tol)?;
            let search = json!({
                "seed_value": out.seed_value,
                "evaluations": out.evaluations,
                "accepted": out.accepted,
            });
            (out.family, out.estimate, Some(search))
        }
        None => {
            let vm = value_matrix(&family, a.m, a.tol)?;
            let est = minmax_lower_bound(&vm)?;
            (family, est, None)
        }
    };
    let mut out = json!({
        "h": family.h(),
        "m": a.m,
        "tol": a.tol,
        "value": est.value,
        "alpha": est.alpha,
        "active_members": est.active_members,
        "family": family.to_string().lines().skip(1).collect::<Vec<_>>(),
    });
    if let Some(s) = search {
        out["search"] = s;
    }
    if a.matrix {
        out["matrix"] = json!(value_matrix(&family, a.m, a.tol)?.rows);
    }

    let mut report = Report::new(out, vec!["quantity", "value"]);
    report.row(vec!["psi".into(), Cell::Lower(est.value)]);
    let active: Vec<String> = est.active_members.iter().map(|i| (i + 1).to_string()).collect();
    report.row(vec!["active_members".into(), active.join(" ").into()]);
    for (j, alpha) in est.alpha.iter().enumerate() {
        if *alpha != 0.0 {
            report.row(vec![format!("alpha_{}", j + 1).into(), Cell::Num(*alpha)]);
        }
    }
    Ok((report, Status::Ok))
}

pub fn certify(a: CertifyArgs) -> Result<(Report, Status)> {
    let poly: CosinePoly = a.poly.parse()?;
    let iv: Interval = a.interval.parse()?;
    let c = certified_min_with_budget(&poly, iv, a.tol, a.budget)?;
    let mut report = Report::new(
        json!({ "poly": poly.to_string(), "interval": [iv.lo(), iv.hi()], "result": c }),
        vec!["lower", "upper", "witness", "tol", "rounds"],
    );
    report.row(vec![
        Cell::Lower(c.lower),
        Cell::Upper(c.upper),
        Cell::Num(c.witness),
        Cell::Num(c.tol),
        c.rounds.into(),
    ]);
    report.note("the true minimum lies between lower and upper");
    Ok((report, Status::Ok))
}

pub fn window(a: WindowArgs) -> Result<(Report, Status)> {
    let set = read_set(&a.file)?;
    let w = window_check(&set, a.h, a.window, a.mu, a.psi)?;
    let mut report = Report::new(
        json!(w),
        vec!["h", "window", "mu", "lhs", "rhs_classic", "rhs_psi", "ratio", "best_mu", "best_lhs"],
    );
    report.row(vec![
        w.h.into(),
        w.window.into(),
        Cell::Num(w.mu),
        Cell::Num(w.lhs),
        Cell::Num(w.rhs_classic),
        Cell::Num(w.rhs_psi),
        Cell::Num(w.ratio),
        Cell::Num(w.best_mu),
        Cell::Num(w.best_lhs),
    ]);
    report.note("the inequality lhs >= rhs is asymptotic in N; finite-N values are reported, not asserted");
    Ok((report, Status::Ok))
}
