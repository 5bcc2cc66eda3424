//! Two-sided estimates for the K-functional of a pair of interpolation spaces.

mod rhs;
mod search;

pub use rhs::{classical_rhs, rhs_lemma, rhs_thm_i, rhs_thm_ii, RhsTerms, Variant};
pub use search::{lhs_outer_k, DecompositionSearch, Strategy};

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bracket::Bracket;
use crate::conditions::{check_c1, check_c2, check_c3, check_c4, grid_json, ConditionId, ConditionReport, RhoTable};
use crate::couples::{validate_kprofile, KProfile};
use crate::error::Result;
use crate::grid::LogGrid;
use crate::phi::PhiParam;
use crate::report::{fmt_num, json_num};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantStatus {
    Pass,
    Fail,
    /// A condition the variant relies on did not pass.
    ConditionsUnmet,
    /// Outside the variant's regime, or a right-hand side was infinite.
    NotApplicable,
    /// Synthetic profile: only right-hand sides are available.
    NoLhs,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariantSummary<T: Scalar> {
    pub variant: Variant,
    pub status: VariantStatus,
    /// `lhs_upper / rhs` over the grid.
    pub ratios: Option<Bracket<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceRow<T> {
    pub t: T,
    pub rho: T,
    pub lhs_upper: Option<T>,
    pub rhs_lemma: T,
    pub rhs_i: T,
    pub rhs_ii: T,
    pub rhs_classical: Option<T>,
}

impl<T: Scalar> EquivalenceRow<T> {
    pub fn rhs(&self, v: Variant) -> Option<T> {
        match v {
            Variant::Lemma => Some(self.rhs_lemma),
            Variant::ThmI => Some(self.rhs_i),
            Variant::ThmIi => Some(self.rhs_ii),
            Variant::Classical => self.rhs_classical,
        }
    }

    pub fn ratio(&self, v: Variant) -> Option<T> {
        Some(crate::scalar::ratio(self.lhs_upper?, self.rhs(v)?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport<T: Scalar> {
    pub scenario: String,
    pub grid: LogGrid<T>,
    pub budget: T,
    pub rows: Vec<EquivalenceRow<T>>,
    pub conditions: Vec<ConditionReport<T>>,
    pub variants: Vec<VariantSummary<T>>,
}

/// Settings of an equivalence run.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceConfig<T: Scalar> {
    pub grid: LogGrid<T>,
    pub budget: T,
    pub variants: Vec<Variant>,
    pub strategy: Strategy,
}

fn condition_passed<T: Scalar>(conds: &[ConditionReport<T>], id: ConditionId) -> bool {
    conds.iter().any(|c| c.id == id && c.passed)
}

fn required(v: Variant) -> &'static [ConditionId] {
    match v {
        Variant::Lemma => &[ConditionId::C1Lower, ConditionId::C1Upper, ConditionId::C2, ConditionId::C3],
        Variant::ThmI => &[ConditionId::C2, ConditionId::C3],
        Variant::ThmIi => &[ConditionId::C2, ConditionId::C3, ConditionId::C4],
        Variant::Classical => &[],
    }
}

fn classical_regime<T: Scalar>(p0: &PhiParam<T>, p1: &PhiParam<T>) -> bool {
    T::zero() < p0.theta()
        && p0.theta() < p1.theta()
        && p1.theta() < T::one()
        && p0.b().constant_value().is_some()
        && p1.b().constant_value().is_some()
}

/// Runs the condition checks, evaluates every right-hand side and the
/// decomposition upper bound on the grid, and grades each requested variant.
pub fn equivalence_report<T: Scalar>(
    scenario: &str,
    p0: &PhiParam<T>,
    p1: &PhiParam<T>,
    profile: &KProfile<T>,
    cfg: &EquivalenceConfig<T>,
) -> Result<EquivalenceReport<T>> {
    p0.require_membership()?;
    p1.require_membership()?;
    validate_kprofile(profile, &cfg.grid)?;
    let rho = RhoTable::canonical(p0, p1, &cfg.grid)?;
    let (c1_lower, c1_upper) = check_c1(p0, p1, &rho, cfg.budget)?;
    let conditions = vec![
        c1_lower,
        c1_upper,
        check_c2(p0, p1, &rho, cfg.budget)?,
        check_c3(p0, p1, &rho, cfg.budget)?,
        check_c4(p0, p1, &rho, cfg.budget)?,
    ];
    let ts = cfg.grid.points();
    let search = match profile.element() {
        Some(e) => Some(DecompositionSearch::new(p0, p1, e, &ts, cfg.strategy)?),
        None => None,
    };
    let with_classical = cfg.variants.contains(&Variant::Classical) && classical_regime(p0, p1);
    let rho_values = rho.values();
    let rows: Vec<EquivalenceRow<T>> = ts
        .par_iter()
        .zip(rho_values.par_iter())
        .map(|(&t, &r)| -> Result<EquivalenceRow<T>> {
            let terms = RhsTerms::compute(p0, p1, r, profile, t);
            let rhs_classical = if with_classical {
                Some(classical_rhs(p0.theta(), p0.q(), p1.theta(), p1.q(), profile, t)?)
            } else {
                None
            };
            Ok(EquivalenceRow {
                t,
                rho: r,
                lhs_upper: match &search {
                    Some(s) => Some(s.lhs(r)?),
                    None => None,
                },
                rhs_lemma: terms.lemma(),
                rhs_i: terms.thm_i(),
                rhs_ii: terms.thm_ii(),
                rhs_classical,
            })
        })
        .collect::<Result<_>>()?;

    let variants = cfg
        .variants
        .iter()
        .map(|&v| {
            let unmet = required(v).iter().any(|&id| !condition_passed(&conditions, id));
            let infinite = rows.iter().any(|r| r.rhs(v).is_none_or(|x| !x.is_finite()));
            let ratios: Option<Bracket<T>> =
                search.as_ref().map(|_| rows.iter().filter_map(|r| r.ratio(v)).collect());
            let status = if v == Variant::Classical && !with_classical {
                VariantStatus::NotApplicable
            } else if unmet {
                VariantStatus::ConditionsUnmet
            } else if infinite {
                VariantStatus::NotApplicable
            } else {
                match &ratios {
                    None => VariantStatus::NoLhs,
                    Some(b) if b.within(cfg.budget) => VariantStatus::Pass,
                    Some(_) => VariantStatus::Fail,
                }
            };
            VariantSummary { variant: v, status, ratios }
        })
        .collect();

    Ok(EquivalenceReport {
        scenario: scenario.to_string(),
        grid: cfg.grid.clone(),
        budget: cfg.budget,
        rows,
        conditions,
        variants,
    })
}

impl<T: Scalar> EquivalenceReport<T> {
    pub fn variant(&self, v: Variant) -> Option<&VariantSummary<T>> {
        self.variants.iter().find(|s| s.variant == v)
    }

    pub fn condition(&self, id: ConditionId) -> Option<&ConditionReport<T>> {
        self.conditions.iter().find(|c| c.id == id)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let classical = self.variant(Variant::Classical).is_some();
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["t", "rho", "lhs_upper", "rhs_lemma", "rhs_i", "rhs_ii", "r_lemma", "r_i", "r_ii"];
        if classical {
            header.extend(["rhs_classical", "r_classical"]);
        }
        out.write_record(&header)?;
        let opt = |v: Option<T>| v.map(fmt_num).unwrap_or_default();
        for r in &self.rows {
            let mut rec = vec![
                fmt_num(r.t),
                fmt_num(r.rho),
                opt(r.lhs_upper),
                fmt_num(r.rhs_lemma),
                fmt_num(r.rhs_i),
                fmt_num(r.rhs_ii),
                opt(r.ratio(Variant::Lemma)),
                opt(r.ratio(Variant::ThmI)),
                opt(r.ratio(Variant::ThmIi)),
            ];
            if classical {
                rec.push(opt(r.rhs_classical));
                rec.push(opt(r.ratio(Variant::Classical)));
            }
            out.write_record(&rec)?;
        }
        out.flush()
    }

    pub fn summary_json(&self) -> Value {
        let variants: Vec<Value> = self
            .variants
            .iter()
            .map(|s| {
                json!({
                    "variant": s.variant.name(),
                    "status": s.status,
                    "inf_ratio": s.ratios.map(|b| json_num(b.inf)).unwrap_or(Value::Null),
                    "sup_ratio": s.ratios.map(|b| json_num(b.sup)).unwrap_or(Value::Null),
                })
            })
            .collect();
        let conditions: serde_json::Map<String, Value> =
            self.conditions.iter().map(|c| (c.id.name().to_string(), c.summary_json())).collect();
        json!({
            "scenario": self.scenario,
            "grid": grid_json(&self.grid),
            "budget": json_num(self.budget),
            "variants": variants,
            "conditions": conditions,
        })
    }
}
