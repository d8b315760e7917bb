use crate::error::{Error, Result};

use super::membership::{uniform_partition, MembershipFunction};

/// A fuzzy input or output variable: ordered labels, one membership function
/// per label, and the raw-unit value that maps to 1.0 on the normalized axis.
#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticVariable {
    name: String,
    labels: Vec<&'static str>,
    functions: Vec<MembershipFunction>,
    scale: f64,
}

impl LinguisticVariable {
    pub fn new(
        name: impl Into<String>,
        labels: Vec<&'static str>,
        functions: Vec<MembershipFunction>,
        scale: f64,
    ) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: &str| Error::InvalidVariable {
            name: name.clone(),
            reason: reason.to_string(),
        };
        if labels.len() != functions.len() {
            return Err(invalid("label and membership function counts differ"));
        }
        if labels.is_empty() {
            return Err(invalid("no labels"));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(invalid("scale must be finite and positive"));
        }
        Ok(LinguisticVariable {
            name,
            labels,
            functions,
            scale,
        })
    }

    /// Uniformly spaced layout with labels given in axis order (first label at 0).
    pub fn uniform(name: impl Into<String>, labels: Vec<&'static str>, scale: f64) -> Result<Self> {
        let functions = uniform_partition(labels.len());
        Self::new(name, labels, functions, scale)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[&'static str] {
        &self.labels
    }

    pub fn functions(&self) -> &[MembershipFunction] {
        &self.functions
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn function(&self, label: &str) -> Option<&MembershipFunction> {
        self.labels.iter().position(|l| *l == label).map(|i| &self.functions[i])
    }

    /// Map a raw value onto [0,1], clamping beyond the scale.
    pub fn normalize(&self, crisp: f64) -> f64 {
        (crisp / self.scale).clamp(0.0, 1.0)
    }

    pub fn fuzzify(&self, crisp: f64) -> Degrees {
        let x = self.normalize(crisp);
        Degrees {
            labels: self.labels.clone(),
            values: self.functions.iter().map(|mf| mf.eval(x)).collect(),
        }
    }
}

/// Per-label membership degrees produced by [`LinguisticVariable::fuzzify`].
#[derive(Debug, Clone, PartialEq)]
pub struct Degrees {
    labels: Vec<&'static str>,
    values: Vec<f64>,
}

impl Degrees {
    pub fn from_pairs(pairs: &[(&'static str, f64)]) -> Self {
        Degrees {
            labels: pairs.iter().map(|p| p.0).collect(),
            values: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// Degree of `label`, zero when the label is absent.
    pub fn get(&self, label: &str) -> f64 {
        self.labels
            .iter()
            .position(|l| *l == label)
            .map_or(0.0, |i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.labels.iter().copied().zip(self.values.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::Re;

    fn re_var() -> LinguisticVariable {
        LinguisticVariable::uniform("RE", Re::axis_labels(), 1.0).unwrap()
    }

    #[test]
    fn full_energy_is_very_large() {
        let d = re_var().fuzzify(1.0);
        assert_eq!(d.get("VL"), 1.0);
        for label in ["L", "M", "S", "VS"] {
            assert_eq!(d.get(label), 0.0);
        }
    }

    #[test]
    fn between_peaks_splits_evenly() {
        let d = re_var().fuzzify(0.875);
        assert_eq!(d.get("VL"), 0.5);
        assert_eq!(d.get("L"), 0.5);
        assert_eq!(d.get("M") + d.get("S") + d.get("VS"), 0.0);
    }

    #[test]
    fn beyond_scale_clamps() {
        assert_eq!(re_var().fuzzify(1.4), re_var().fuzzify(1.0));
        assert_eq!(re_var().fuzzify(-3.0).get("VS"), 1.0);
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(LinguisticVariable::uniform("HC", vec!["S", "L"], 0.0).is_err());
    }
}
