//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use holmstedt_cli::{run_scenario, Scenario, ScenarioOutcome};
use holmstedt_core::bracket::Bracket;
use holmstedt_core::conditions::{check_c2, check_c3, check_sv_sufficient, ConditionId};
use holmstedt_core::couples::k_oracle_bruteforce;
use holmstedt_core::engine::{lhs_outer_k, Strategy, Variant, VariantStatus};
use holmstedt_core::phi::Exponent;
use holmstedt_core::sv::{integral_b, integral_b_tilde, power_integral_lower, power_integral_upper};
use holmstedt_core::{Element, Grid, Phi, Quad, Rho, Seq, Sv};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BUDGET: f64 = 64.0;
const SV_UNIT_TOL: f64 = 1e-9;
const CLOSED_FORM_TOL: f64 = 1e-6;
const ORACLE_TOL: f64 = 1e-12;
const CONSTANT_TOL: f64 = 1e-4;
const ORDER_TOL: f64 = 1e-12;
const SINGLE_COORD_TOL: f64 = 1e-6;
const ENDPOINT_TOL: f64 = 1e-6;

struct Line {
    pass: bool,
    detail: String,
}

fn line(pass: bool, detail: impl Into<String>) -> Line {
    Line { pass, detail: detail.into() }
}

fn phi(theta: f64, q: f64, b: Sv) -> Phi {
    Phi::new(theta, Exponent::Finite(q), b).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn criterion_1() -> Line {
    let start = Instant::now();
    let quad = Quad::default();
    let grid = Grid::new(1e-6, 1e6, 8).unwrap();
    let (l12, l22, l31) = (Sv::broken_log(1.0, 2.0), Sv::broken_log(-2.0, -2.0), Sv::broken_log(3.0, -1.0));
    let e = Sv::exp_log_pow(0.5, 1).unwrap();
    let family = [
        l12.clone(),
        l22.clone(),
        l31.clone(),
        e.clone(),
        Sv::product(l12.clone(), l31.clone()),
        Sv::product(l22, e.clone()),
        Sv::power(l12, -1.5),
        Sv::power(e, 2.0),
    ];
    let mut worst = 1.0f64;
    let mut ok = true;
    for b in &family {
        for alpha in [0.25, 1.0, 2.0] {
            let mut lower = Bracket::empty();
            let mut upper = Bracket::empty();
            for t in grid.points() {
                let bt = b.eval(t).unwrap();
                match (power_integral_lower(b, alpha, t, &quad), power_integral_upper(b, alpha, t, &quad)) {
                    (Ok(lo), Ok(up)) => {
                        lower.include(lo / (t.powf(alpha) * bt));
                        upper.include(up / (t.powf(-alpha) * bt));
                    }
                    _ => ok = false,
                }
            }
            ok &= lower.is_bounded() && upper.is_bounded();
            worst = worst.max(lower.spread()).max(upper.spread());
        }
    }
    let one = Sv::one();
    let unit_err = grid
        .points()
        .into_iter()
        .map(|t| (power_integral_lower(&one, 1.0, t, &quad).unwrap() / t - 1.0).abs())
        .fold(0.0, f64::max);
    let took = start.elapsed();
    let pass = ok && unit_err <= SV_UNIT_TOL && took < Duration::from_secs(10);
    line(pass, format!("{} weights x 3 powers bounded, widest spread {worst:.3e}; b=1 ratio error {unit_err:.1e}; {}", family.len(), secs(took)))
}

fn criterion_2() -> Line {
    let start = Instant::now();
    let p = phi(0.5, 1.0, Sv::one());
    let n = p.norm_min_by_quadrature(1.0).unwrap();
    let (p0, p1) = (phi(0.25, 1.0, Sv::one()), phi(0.75, 1.0, Sv::one()));
    let rho_err = [1e-4, 1e-2, 0.5, 1.0, 3.0, 1e2, 1e4]
        .iter()
        .map(|&t| rel(p0.norm_min_by_quadrature(t).unwrap() / p1.norm_min_by_quadrature(t).unwrap(), t.sqrt()))
        .fold(0.0, f64::max);
    let took = start.elapsed();
    let pass = rel(n, 4.0) <= CLOSED_FORM_TOL && rho_err <= CLOSED_FORM_TOL && took < Duration::from_secs(1);
    line(pass, format!("norm {n:.12} (rel err {:.1e}); rho vs sqrt(t) rel err {rho_err:.1e}; {}", rel(n, 4.0), secs(took)))
}

fn criterion_3() -> Line {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let ts: Vec<f64> = (0..20).map(|k| 10f64.powf(-5.0 + 10.0 * k as f64 / 19.0)).collect();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..=6);
        let mut draw = |lo: f64, hi: f64| -> Vec<f64> { (0..n).map(|_| 10f64.powf(rng.gen_range(lo..hi))).collect() };
        let (c, w0, w1) = (draw(-2.0, 2.0), draw(-3.0, 3.0), draw(-3.0, 3.0));
        let e = Seq::new(c, w0, w1).unwrap();
        for &t in &ts {
            worst = worst.max(rel(k_oracle_bruteforce(&e, t, 5).unwrap(), e.k(t)));
        }
    }
    let took = start.elapsed();
    line(worst <= ORACLE_TOL && took < Duration::from_secs(30), format!("100 instances x 20 t, worst rel err {worst:.1e}; {}", secs(took)))
}

fn first_regime(s: &Scenario) -> bool {
    let (t0, t1) = (s.phi0.theta(), s.phi1.theta());
    0.0 < t0 && t0 < t1 && t1 < 1.0
}

fn criterion_4(runs: &[(PathBuf, ScenarioOutcome, Scenario)]) -> Line {
    let ids = [ConditionId::C1Lower, ConditionId::C1Upper, ConditionId::C2, ConditionId::C3, ConditionId::C4];
    let mut names = Vec::new();
    let mut ok = true;
    for (path, o, s) in runs {
        if !first_regime(s) || !is_suite(path) {
            continue;
        }
        names.push(o.name.clone());
        for id in ids {
            let c = o.equivalence.condition(id).unwrap();
            ok &= c.passed && c.sup_ratio.is_finite();
        }
    }
    let identical = runs.iter().find(|r| r.1.name == "identical-theta").unwrap();
    let c2_fails = !identical.1.equivalence.condition(ConditionId::C2).unwrap().passed;
    let classical = &runs.iter().find(|r| r.1.name == "classical-1").unwrap().1.equivalence;
    let dev = |id, target: f64| {
        classical.condition(id).unwrap().rows.iter().map(|r| (r.ratio - target).abs()).fold(0.0, f64::max)
    };
    let (d2, d4) = (dev(ConditionId::C2, 0.375), dev(ConditionId::C4, 1.5));
    let pass = ok && !names.is_empty() && c2_fails && d2 <= CONSTANT_TOL && d4 <= CONSTANT_TOL;
    line(
        pass,
        format!("C1-C4 pass on {}; identical parameters fail C2: {c2_fails}; C2-3/8 {d2:.1e}, C4-3/2 {d4:.1e}", names.join(", ")),
    )
}

fn criterion_5(runs: &[(PathBuf, ScenarioOutcome, Scenario)]) -> Line {
    let mut rows = 0;
    let mut bad = Vec::new();
    for (_, o, _) in runs {
        for r in &o.equivalence.rows {
            rows += 1;
            if !(r.rhs_lemma >= r.rhs_i * (1.0 - ORDER_TOL) && r.rhs_i >= r.rhs_ii * (1.0 - ORDER_TOL)) {
                bad.push(format!("{}@{}", o.name, r.t));
            }
        }
    }
    line(bad.is_empty(), format!("{rows} grid points over {} scenarios, violations: {:?}", runs.len(), bad))
}

fn criterion_6(runs: &[(PathBuf, ScenarioOutcome, Scenario)], took: Duration) -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["classical-1", "brokenlog-a", "brokenlog-b"] {
        let o = &runs.iter().find(|r| r.1.name == name).unwrap().1;
        let g = &o.equivalence.grid;
        let covers = g.t_min() <= 1e-4 && g.t_max() >= 1e4;
        let v = o.equivalence.variant(Variant::ThmIi).unwrap();
        let b = v.ratios.unwrap_or(Bracket::empty());
        ok &= covers && b.within(BUDGET);
        parts.push(format!("{name} [{:.3}, {:.3}]", b.inf, b.sup));
    }
    let (p0, p1) = (phi(0.25, 1.0, Sv::one()), phi(0.75, 1.0, Sv::one()));
    let e = Element::WeightedSeq(Seq::new(vec![1.0], vec![1.0], vec![1.0]).unwrap());
    let scales = Grid::new(1e-4, 1e4, 4).unwrap().points();
    let single = [1e-3, 0.1, 0.5, 1.0, 2.0, 10.0, 1e3]
        .iter()
        .map(|&s| {
            let v = lhs_outer_k(&p0, &p1, &e, s, &scales, Strategy::SplitGrid { steps: 1001 }).unwrap();
            rel(v, 16.0 / 3.0 * s.min(1.0))
        })
        .fold(0.0, f64::max);
    ok &= single <= SINGLE_COORD_TOL && took < Duration::from_secs(300);
    line(ok, format!("lhs/rhs_thm_ii {}; single-coordinate rel err {single:.1e}; {}", parts.join(", "), secs(took)))
}

fn criterion_7() -> Line {
    let quad = Quad::default();
    let b = Sv::broken_log(-2.0, -2.0);
    let bt = integral_b_tilde(&b, 1.0, &quad).unwrap();
    let bb = integral_b(&b, 1.0, &quad).unwrap();
    let p0 = phi(0.0, 1.0, b.clone());
    let p1 = phi(1.0, 1.0, b);
    let members = p0.membership_min1() && p1.membership_min1();
    let path = scenario_dir().join("endpoint-0-1.json");
    let s = Scenario::load(&path).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let o = run_scenario(&s, tmp.path()).unwrap();
    let g = &o.equivalence.grid;
    let covers = g.t_min() <= 1e-3 && g.t_max() >= 1e3;
    let c2 = o.equivalence.condition(ConditionId::C2).unwrap();
    let c3 = o.equivalence.condition(ConditionId::C3).unwrap();
    let v = o.equivalence.variant(Variant::ThmI).unwrap();
    let br = v.ratios.unwrap_or(Bracket::empty());
    let pass = members
        && c2.passed
        && c3.passed
        && covers
        && v.status == VariantStatus::Pass
        && br.within(BUDGET)
        && (bt - 1.0).abs() <= ENDPOINT_TOL
        && (bb - 1.0).abs() <= ENDPOINT_TOL;
    line(
        pass,
        format!(
            "memberships {members}; C2 {:.3} C3 {:.3}; lhs/rhs_thm_i [{:.3}, {:.3}]; B~(1)={bt:.9} B(1)={bb:.9}",
            c2.sup_ratio, c3.sup_ratio, br.inf, br.sup
        ),
    )
}

fn criterion_8() -> Line {
    let quad = Quad::default();
    let grid = Grid::new(1e-4, 1e4, 4).unwrap();
    let (b0, b1) = (Sv::broken_log(-4.0, -4.0), Sv::broken_log(-2.0, -2.0));
    let sv = check_sv_sufficient(&b0, 1.0, &b1, 1.0, 0.1, &grid, BUDGET, &quad).unwrap();
    let (p0, p1) = (phi(0.0, 1.0, b0), phi(0.0, 1.0, b1));
    let rho = Rho::canonical(&p0, &p1, &grid).unwrap();
    let c2 = check_c2(&p0, &p1, &rho, BUDGET).unwrap();
    let c3 = check_c3(&p0, &p1, &rho, BUDGET).unwrap();
    let pass = sv.passed && c2.passed && c3.passed;
    line(
        pass,
        format!(
            "SV_sufficient sup {:.3e} ({}); C2 sup {:.3e} ({}); C3 sup {:.3e} ({})",
            sv.sup_ratio,
            verdict(sv.passed),
            c2.sup_ratio,
            verdict(c2.passed),
            c3.sup_ratio,
            verdict(c3.passed)
        ),
    )
}

fn verdict(p: bool) -> &'static str {
    if p {
        "pass"
    } else {
        "fail"
    }
}

fn criterion_9(runs: &[(PathBuf, ScenarioOutcome, Scenario)]) -> Line {
    let tmp = tempfile::tempdir().unwrap();
    let mut files = 0;
    let mut differ = Vec::new();
    for (_, first, s) in runs {
        let again = run_scenario(s, tmp.path()).unwrap();
        for entry in fs::read_dir(&first.dir).unwrap() {
            let p = entry.unwrap().path();
            if p.extension().is_some_and(|x| x == "csv") {
                files += 1;
                let name = p.file_name().unwrap();
                if fs::read(&p).unwrap() != fs::read(again.dir.join(name)).unwrap() {
                    differ.push(format!("{}/{}", first.name, name.to_string_lossy()));
                }
            }
        }
    }
    line(differ.is_empty(), format!("{files} CSV files from {} scenarios re-run, differing: {differ:?}", runs.len()))
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn is_suite(path: &Path) -> bool {
    path.parent() == Some(scenario_dir().as_path())
}

fn bundled() -> Vec<PathBuf> {
    let root = scenario_dir();
    let mut out = Vec::new();
    for dir in [root.clone(), root.join("negative"), root.join("budget")] {
        out.extend(holmstedt_cli::runner::scenario_files(&dir).unwrap());
    }
    out
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    let mut equivalence_time = Duration::ZERO;
    for path in bundled() {
        let s = Scenario::load(&path).unwrap();
        let start = Instant::now();
        let o = run_scenario(&s, tmp.path()).unwrap();
        if ["classical-1", "brokenlog-a", "brokenlog-b"].contains(&s.name.as_str()) {
            equivalence_time += start.elapsed();
        }
        runs.push((path, o, s));
    }

    let results = [
        ("SV calculus brackets", criterion_1()),
        ("closed forms", criterion_2()),
        ("oracle equivalence", criterion_3()),
        ("condition suite", criterion_4(&runs)),
        ("rhs ordering", criterion_5(&runs)),
        ("Holmstedt equivalence", criterion_6(&runs, equivalence_time)),
        ("endpoint regime", criterion_7()),
        ("sufficient condition", criterion_8()),
        ("determinism", criterion_9(&runs)),
    ];
    let mut failed = 0;
    for (i, (name, l)) in results.iter().enumerate() {
        println!("criterion {} {:<22} {}  {}", i + 1, name, if l.pass { "PASS" } else { "FAIL" }, l.detail);
        failed += usize::from(!l.pass);
    }
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
