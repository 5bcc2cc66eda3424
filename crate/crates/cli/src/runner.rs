//! Runs scenarios and writes their reports.

use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use holmstedt_core::conditions::{
    check_c1, check_c2, check_c3, check_c4, check_sv_sufficient, grid_json, Check, ConditionReport,
};
use holmstedt_core::engine::{equivalence_report, VariantStatus};
use holmstedt_core::phi::Exponent;
use holmstedt_core::report::json_num;
use holmstedt_core::{EquivalenceConfig, EquivalenceReport, Rho};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    ConditionsUnmet,
    EquivalenceViolated,
    Invalid,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::EquivalenceViolated => 2,
            Verdict::ConditionsUnmet => 3,
            Verdict::Invalid => 4,
        }
    }

    fn severity(self) -> u8 {
        match self {
            Verdict::Pass => 0,
            Verdict::ConditionsUnmet => 1,
            Verdict::Invalid => 2,
            Verdict::EquivalenceViolated => 3,
        }
    }

    /// The more severe of the two.
    pub fn worst(self, other: Verdict) -> Verdict {
        if other.severity() > self.severity() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug)]
pub struct ScenarioOutcome {
    pub name: String,
    pub verdict: Verdict,
    pub equivalence: EquivalenceReport,
    /// Requested checks, in request order.
    pub checks: Vec<ConditionReport<f64>>,
    pub dir: PathBuf,
    pub summary: Value,
}

fn finite_q(q: Exponent<f64>, field: &str) -> anyhow::Result<f64> {
    q.finite().ok_or_else(|| anyhow!("{field}: SV_sufficient needs a finite q"))
}

/// Runs the requested checks against the canonical weight.
pub fn run_checks(s: &Scenario, only: &[Check]) -> anyhow::Result<Vec<ConditionReport<f64>>> {
    let (p0, p1) = (&s.phi0, &s.phi1);
    let needs_rho = only.iter().any(|c| *c != Check::SvSufficient);
    let rho = if needs_rho { Some(Rho::canonical(p0, p1, &s.grid)?) } else { None };
    let mut out = Vec::new();
    for &c in only {
        match (c, &rho) {
            (Check::C1, Some(rho)) => {
                let (lo, hi) = check_c1(p0, p1, rho, s.budget)?;
                out.push(lo);
                out.push(hi);
            }
            (Check::C2, Some(rho)) => out.push(check_c2(p0, p1, rho, s.budget)?),
            (Check::C3, Some(rho)) => out.push(check_c3(p0, p1, rho, s.budget)?),
            (Check::C4, Some(rho)) => out.push(check_c4(p0, p1, rho, s.budget)?),
            (Check::SvSufficient, _) => {
                let eps = s.sv_eps.ok_or_else(|| anyhow!("sv_eps: required when SV_sufficient is checked"))?;
                let q0 = finite_q(p0.q(), "phi0.q")?;
                let q1 = finite_q(p1.q(), "phi1.q")?;
                out.push(check_sv_sufficient(p0.b(), q0, p1.b(), q1, eps, &s.grid, s.budget, p0.quadrature())?);
            }
            (_, None) => unreachable!("weight is computed whenever a weighted check is requested"),
        }
    }
    Ok(out)
}

fn checks_json(checks: &[ConditionReport<f64>]) -> Value {
    Value::Object(checks.iter().map(|c| (c.id.name().to_string(), c.summary_json())).collect())
}

fn grade(rep: &EquivalenceReport, checks: &[ConditionReport<f64>]) -> Verdict {
    if rep.variants.iter().any(|v| v.status == VariantStatus::Fail) {
        Verdict::EquivalenceViolated
    } else if checks.iter().any(|c| !c.passed) || rep.variants.iter().any(|v| v.status == VariantStatus::ConditionsUnmet) {
        Verdict::ConditionsUnmet
    } else {
        Verdict::Pass
    }
}

/// Evaluates `s` and writes `<out>/<name>/` with `equivalence.csv`,
/// one CSV per requested condition report and `summary.json`.
pub fn run_scenario(s: &Scenario, out: &Path) -> anyhow::Result<ScenarioOutcome> {
    let cfg = EquivalenceConfig {
        grid: s.grid.clone(),
        budget: s.budget,
        variants: s.variants.clone(),
        strategy: s.strategy,
    };
    let equivalence = equivalence_report(&s.name, &s.phi0, &s.phi1, &s.profile(), &cfg)?;
    let mut checks = Vec::new();
    for &c in &s.checks {
        match c {
            Check::SvSufficient => checks.extend(run_checks(s, &[c])?),
            _ => {
                let ids = match c {
                    Check::C1 => vec!["C1_lower", "C1_upper"],
                    Check::C2 => vec!["C2"],
                    Check::C3 => vec!["C3"],
                    _ => vec!["C4"],
                };
                checks.extend(equivalence.conditions.iter().filter(|r| ids.contains(&r.id.name())).cloned());
            }
        }
    }
    let verdict = grade(&equivalence, &checks);
    let summary = json!({
        "scenario": s.name,
        "verdict": verdict,
        "exit_code": verdict.exit_code(),
        "equivalence": equivalence.summary_json(),
        "checks": checks_json(&checks),
    });

    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let mut buf = Vec::new();
    equivalence.write_csv(&mut buf)?;
    files.push(("equivalence.csv".into(), buf));
    for c in &checks {
        let mut buf = Vec::new();
        c.write_csv(&mut buf)?;
        files.push((format!("{}.csv", c.id.name()), buf));
    }
    files.push(("summary.json".into(), pretty(&summary)));
    let dir = out.join(&s.name);
    write_dir_atomically(&dir, &files)?;
    Ok(ScenarioOutcome { name: s.name.clone(), verdict, equivalence, checks, dir, summary })
}

/// Condition checks only; writes `<out>/<name>.conditions/`.
pub fn run_conditions(s: &Scenario, only: &[Check], out: &Path) -> anyhow::Result<(Verdict, Value)> {
    let checks = run_checks(s, only)?;
    let verdict = if checks.iter().all(|c| c.passed) { Verdict::Pass } else { Verdict::ConditionsUnmet };
    let summary = json!({
        "scenario": s.name,
        "verdict": verdict,
        "exit_code": verdict.exit_code(),
        "grid": grid_json(&s.grid),
        "budget": json_num(s.budget),
        "checks": checks_json(&checks),
    });
    let mut files = Vec::new();
    for c in &checks {
        let mut buf = Vec::new();
        c.write_csv(&mut buf)?;
        files.push((format!("{}.csv", c.id.name()), buf));
    }
    files.push(("summary.json".into(), pretty(&summary)));
    write_dir_atomically(&out.join(format!("{}.conditions", s.name)), &files)?;
    Ok((verdict, summary))
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("json values serialize");
    s.push(b'\n');
    s
}

fn unique_suffix() -> String {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    format!("{}-{}", std::process::id(), COUNTER.fetch_add(1, Ordering::Relaxed))
}

/// Fills a sibling staging directory, then swaps it into place.
fn write_dir_atomically(dir: &Path, files: &[(String, Vec<u8>)]) -> anyhow::Result<()> {
    let parent = dir.parent().context("output directory has no parent")?;
    fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    let base = dir.file_name().context("output directory has no name")?.to_string_lossy().into_owned();
    let staging = parent.join(format!(".{base}.tmp-{}", unique_suffix()));
    fs::create_dir(&staging).with_context(|| format!("creating {}", staging.display()))?;
    for (name, bytes) in files {
        let mut f = fs::File::create(staging.join(name))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    let old = parent.join(format!(".{base}.old-{}", unique_suffix()));
    let had_old = dir.exists();
    if had_old {
        fs::rename(dir, &old).with_context(|| format!("moving aside {}", dir.display()))?;
    }
    fs::rename(&staging, dir).with_context(|| format!("publishing {}", dir.display()))?;
    if had_old {
        fs::remove_dir_all(&old).ok();
    }
    Ok(())
}

fn write_file_atomically(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let parent = path.parent().context("output file has no parent")?;
    fs::create_dir_all(parent)?;
    let tmp = parent.join(format!(".{}.tmp-{}", path.file_name().unwrap_or_default().to_string_lossy(), unique_suffix()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteEntry {
    pub file: String,
    pub scenario: Option<String>,
    pub verdict: Verdict,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteSummary {
    pub dir: String,
    pub verdict: Verdict,
    pub exit_code: i32,
    pub scenarios: Vec<SuiteEntry>,
}

fn errored(file: String, scenario: Option<String>, error: String) -> SuiteEntry {
    SuiteEntry { file, scenario, verdict: Verdict::Invalid, exit_code: Verdict::Invalid.exit_code(), error: Some(error), summary: None }
}

fn panic_text(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panic".into())
}

/// Scenario files (`*.json`) directly inside `dir`, sorted by name.
pub fn scenario_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs every scenario in `dir`; one failing file never stops the others.
/// Writes `<out>/suite_summary.json`.
pub fn run_suite(dir: &Path, out: &Path) -> anyhow::Result<SuiteSummary> {
    let files = scenario_files(dir)?;
    let loaded: Vec<(String, Result<Scenario, String>)> = files
        .iter()
        .map(|f| {
            let label = f.file_name().unwrap_or_default().to_string_lossy().into_owned();
            (label, Scenario::load(f).map_err(|e| e.to_string()))
        })
        .collect();
    let mut names: Vec<&str> = Vec::new();
    let mut duplicate = vec![false; loaded.len()];
    for (i, (_, s)) in loaded.iter().enumerate() {
        if let Ok(s) = s {
            duplicate[i] = names.contains(&s.name.as_str());
            names.push(&s.name);
        }
    }
    let scenarios: Vec<SuiteEntry> = loaded
        .par_iter()
        .zip(duplicate.par_iter())
        .map(|((file, s), &dup)| match s {
            Err(e) => errored(file.clone(), None, e.clone()),
            Ok(s) if dup => errored(file.clone(), Some(s.name.clone()), format!("duplicate scenario name {:?}", s.name)),
            Ok(s) => match catch_unwind(AssertUnwindSafe(|| run_scenario(s, out))) {
                Ok(Ok(o)) => SuiteEntry {
                    file: file.clone(),
                    scenario: Some(o.name),
                    verdict: o.verdict,
                    exit_code: o.verdict.exit_code(),
                    error: None,
                    summary: Some(o.summary),
                },
                Ok(Err(e)) => errored(file.clone(), Some(s.name.clone()), format!("{e:#}")),
                Err(p) => errored(file.clone(), Some(s.name.clone()), format!("internal error: {}", panic_text(p))),
            },
        })
        .collect();
    let verdict = scenarios.iter().fold(Verdict::Pass, |v, e| v.worst(e.verdict));
    let summary = SuiteSummary { dir: dir.display().to_string(), verdict, exit_code: verdict.exit_code(), scenarios };
    let text = pretty(&serde_json::to_value(&summary)?);
    write_file_atomically(&out.join("suite_summary.json"), &text)?;
    Ok(summary)
}
