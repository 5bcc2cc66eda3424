//! Scenario files: two parameters, a couple element or sampled profile, and
//! what to check.

use std::fmt;
use std::path::{Path, PathBuf};

use holmstedt_core::conditions::{Check, DEFAULT_BUDGET};
use holmstedt_core::couples::KProfile;
use holmstedt_core::engine::{Strategy, Variant};
use holmstedt_core::{Element, Grid, Phi, Profile};
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub phi0: Phi,
    pub phi1: Phi,
    #[serde(default)]
    pub element: Option<Element>,
    #[serde(default)]
    pub profile: Option<Profile>,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default = "default_budget")]
    pub budget: f64,
    #[serde(default = "default_checks")]
    pub checks: Vec<Check>,
    #[serde(default = "default_variants")]
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub strategy: Strategy,
    /// Exponent gap for the SV_sufficient check.
    #[serde(default)]
    pub sv_eps: Option<f64>,
}

fn default_budget() -> f64 {
    DEFAULT_BUDGET
}

fn default_checks() -> Vec<Check> {
    vec![Check::C1, Check::C2, Check::C3, Check::C4]
}

fn default_variants() -> Vec<Variant> {
    vec![Variant::Lemma, Variant::ThmI, Variant::ThmIi]
}

#[derive(Debug)]
pub struct ScenarioError {
    pub file: Option<PathBuf>,
    /// Dotted field path, empty for syntax errors.
    pub path: String,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{}: ", file.display())?;
        }
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ScenarioError {}

impl ScenarioError {
    fn field(path: &str, message: impl Into<String>) -> Self {
        ScenarioError { file: None, path: path.into(), message: message.into() }
    }
}

/// Command-line replacements for scenario settings.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub ppd: Option<usize>,
    pub cmax: Option<f64>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| ScenarioError {
            file: None,
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(file: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(file).map_err(|e| ScenarioError {
            file: Some(file.to_path_buf()),
            path: String::new(),
            message: e.to_string(),
        })?;
        Self::from_json(&text).map_err(|mut e| {
            e.file = Some(file.to_path_buf());
            e
        })
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) || self.name.starts_with('.')
        {
            return Err(ScenarioError::field("name", "use letters, digits, '-', '_' or '.'; no leading '.'"));
        }
        if self.element.is_some() == self.profile.is_some() {
            return Err(ScenarioError::field("element", "give exactly one of element or profile"));
        }
        if !(self.budget.is_finite() && self.budget >= 1.0) {
            return Err(ScenarioError::field("budget", format!("must be finite and at least 1, got {}", self.budget)));
        }
        if self.variants.is_empty() {
            return Err(ScenarioError::field("variants", "at least one variant is required"));
        }
        if self.checks.contains(&Check::SvSufficient) {
            match self.sv_eps {
                Some(e) if e > 0.0 && e.is_finite() => {}
                Some(e) => return Err(ScenarioError::field("sv_eps", format!("must be positive, got {e}"))),
                None => return Err(ScenarioError::field("sv_eps", "required when SV_sufficient is checked")),
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), ScenarioError> {
        if o.grid_min.is_some() || o.grid_max.is_some() || o.ppd.is_some() {
            let lo = o.grid_min.unwrap_or(self.grid.t_min());
            let hi = o.grid_max.unwrap_or(self.grid.t_max());
            let ppd = o.ppd.unwrap_or(self.grid.points_per_decade());
            self.grid = Grid::new(lo, hi, ppd).map_err(|e| ScenarioError::field("grid", e.to_string()))?;
        }
        if let Some(c) = o.cmax {
            self.budget = c;
        }
        self.validate()
    }

    pub fn profile(&self) -> Profile {
        match (&self.element, &self.profile) {
            (Some(e), _) => KProfile::FromElement(e.clone()),
            (None, Some(p)) => p.clone(),
            (None, None) => unreachable!("validated scenarios carry a profile"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "m",
        "phi0": {"theta": 0.25, "q": 1, "b": {"kind": "Constant", "c": 1}},
        "phi1": {"theta": 0.75, "q": 1, "b": {"kind": "Constant", "c": 1}},
        "element": {"kind": "WeightedSeq", "coeffs": [1], "w0": [1], "w1": [1]}
    }"#;

    #[test]
    fn defaults() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.budget, 64.0);
        assert_eq!(s.grid, Grid::default());
        assert_eq!(s.variants.len(), 3);
        assert_eq!(s.checks.len(), 4);
        assert_eq!(s.strategy, Strategy::Combined { steps: 11 });
    }

    #[test]
    fn field_paths_in_errors() {
        let bad = MINIMAL.replace("\"theta\": 0.75", "\"theta\": \"x\"");
        let e = Scenario::from_json(&bad).unwrap_err();
        assert_eq!(e.path, "phi1.theta");
        let bad = MINIMAL.replace("\"w1\": [1]", "\"w1\": [-1]");
        let e = Scenario::from_json(&bad).unwrap_err();
        assert_eq!(e.path, "element");
        let e = Scenario::from_json("{\"name\": ").unwrap_err();
        assert!(e.message.contains("line 1"), "{}", e.message);
    }

    #[test]
    fn validation() {
        let both = MINIMAL.replace("\"element\"", "\"profile\": {\"kind\": \"WeightedSeq\", \"coeffs\": [1], \"w0\": [1], \"w1\": [1]}, \"element\"");
        assert_eq!(Scenario::from_json(&both).unwrap_err().path, "element");
        let none = MINIMAL.replace("\n    }", ", \"variants\": []\n    }");
        assert_eq!(Scenario::from_json(&none).unwrap_err().path, "variants");
        let sv = MINIMAL.replace("\n    }", ", \"checks\": [\"SV_sufficient\"]\n    }");
        assert_eq!(Scenario::from_json(&sv).unwrap_err().path, "sv_eps");
        let unknown = MINIMAL.replace("\"name\"", "\"nmae\": 1, \"name\"");
        assert!(Scenario::from_json(&unknown).unwrap_err().message.contains("nmae"));
    }

    #[test]
    fn overrides() {
        let mut s = Scenario::from_json(MINIMAL).unwrap();
        s.apply(&Overrides { grid_min: Some(1e-2), ppd: Some(3), cmax: Some(8.0), ..Default::default() }).unwrap();
        assert_eq!(s.grid, Grid::new(1e-2, 1e8, 3).unwrap());
        assert_eq!(s.budget, 8.0);
        assert!(s.apply(&Overrides { grid_max: Some(1e-3), ..Default::default() }).is_err());
    }
}
