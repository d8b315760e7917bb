use serde::Serialize;

use crate::error::Result;

use super::inference::{defuzzify_centroid, infer, FuzzyOutputSet};
use super::labels::{Hc, Npp, Nmp, Re};
use super::membership::MfKind;
use super::rules::{RuleBase, RuleOrigin};
use super::variable::LinguisticVariable;

pub const DEFAULT_GRID_STEP: f64 = 0.001;

/// Maps (hop count, residual energy, path participation) to a path count in 1..=5.
#[derive(Debug, Clone)]
pub struct PathCountController {
    rules: RuleBase,
    hc: LinguisticVariable,
    re: LinguisticVariable,
    npp: LinguisticVariable,
    nmp: LinguisticVariable,
    grid_step: f64,
}

impl PathCountController {
    /// Standard layout. `max_hops` scales HC, `energy_scale_j` scales RE and
    /// `max_paths` scales NPP.
    pub fn new(max_hops: u32, energy_scale_j: f64, max_paths: u32) -> Result<Self> {
        Ok(PathCountController {
            rules: RuleBase::standard(),
            hc: LinguisticVariable::uniform("HC", Hc::axis_labels(), f64::from(max_hops.max(1)))?,
            re: LinguisticVariable::uniform("RE", Re::axis_labels(), energy_scale_j)?,
            npp: LinguisticVariable::uniform("NPP", Npp::axis_labels(), f64::from(max_paths.max(1)))?,
            nmp: LinguisticVariable::uniform("NMP", Nmp::axis_labels(), 1.0)?,
            grid_step: DEFAULT_GRID_STEP,
        })
    }

    pub fn rules(&self) -> &RuleBase {
        &self.rules
    }

    pub fn variables(&self) -> [&LinguisticVariable; 4] {
        [&self.hc, &self.re, &self.npp, &self.nmp]
    }

    pub fn aggregate(&self, hops: f64, residual_j: f64, participation: f64) -> FuzzyOutputSet {
        infer(
            &self.rules,
            &self.hc.fuzzify(hops),
            &self.re.fuzzify(residual_j),
            &self.npp.fuzzify(participation),
            &self.nmp,
            self.grid_step,
        )
    }

    /// Crisp controller output on [0,1].
    pub fn crisp(&self, hops: f64, residual_j: f64, participation: f64) -> Result<f64> {
        defuzzify_centroid(&self.aggregate(hops, residual_j, participation))
    }

    pub fn determine_path_count(&self, hops: u32, residual_j: f64, participation: u32) -> Result<u32> {
        let c = self.crisp(f64::from(hops), residual_j, f64::from(participation))?;
        Ok(crisp_to_count(c))
    }

    pub fn export(&self) -> ControllerExport {
        let variables = self
            .variables()
            .iter()
            .map(|v| VariableExport {
                name: v.name().to_string(),
                scale: v.scale(),
                labels: v
                    .labels()
                    .iter()
                    .zip(v.functions())
                    .map(|(label, mf)| LabelExport {
                        label: label.to_string(),
                        kind: mf.kind(),
                        breakpoints: mf.breakpoints(),
                    })
                    .collect(),
            })
            .collect();
        let rules = self
            .rules
            .rules()
            .map(|r| RuleExport {
                table_index: r.table_index(),
                hc: r.hc,
                re: r.re,
                npp: r.npp,
                nmp: r.nmp,
                origin: self.rules.origin(r.hc, r.re, r.npp),
            })
            .collect();
        ControllerExport {
            inference: "mamdani-min-max",
            defuzzifier: "centroid",
            grid_step: self.grid_step,
            count_mapping: "round_half_up(1 + 4 * crisp), clamped to [1, 5]",
            variables,
            rules,
        }
    }
}

/// `round(1 + 4c)` with halves rounded up, clamped to [1,5].
pub(crate) fn crisp_to_count(c: f64) -> u32 {
    ((1.0 + 4.0 * c + 0.5).floor()).clamp(1.0, 5.0) as u32
}

/// JSON-serializable description of the controller.
#[derive(Debug, Clone, Serialize)]
pub struct ControllerExport {
    pub inference: &'static str,
    pub defuzzifier: &'static str,
    pub grid_step: f64,
    pub count_mapping: &'static str,
    pub variables: Vec<VariableExport>,
    pub rules: Vec<RuleExport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariableExport {
    pub name: String,
    pub scale: f64,
    pub labels: Vec<LabelExport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelExport {
    pub label: String,
    pub kind: MfKind,
    pub breakpoints: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RuleExport {
    pub table_index: usize,
    pub hc: Hc,
    pub re: Re,
    pub npp: Npp,
    pub nmp: Nmp,
    pub origin: RuleOrigin,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn controller() -> PathCountController {
        // max_hops 6 puts the HC peaks at 0, 2, 4 and 6 hops.
        PathCountController::new(6, 1.0, 5).unwrap()
    }

    #[test]
    fn very_long_full_busy_route_gets_one_path() {
        let c = controller();
        // Centroid of the shouldered VS set on [0, 0.25] is 0.25/3.
        let crisp = c.crisp(6.0, 1.0, 5.0).unwrap();
        assert!((crisp - 0.25 / 3.0).abs() < 1e-3, "{crisp}");
        assert_eq!(c.determine_path_count(6, 1.0, 5).unwrap(), 1);
    }

    #[test]
    fn medium_route_drained_idle_gets_five_paths() {
        let c = controller();
        let crisp = c.crisp(2.0, 0.0, 0.0).unwrap();
        assert!((crisp - (1.0 - 0.25 / 3.0)).abs() < 1e-3, "{crisp}");
        assert_eq!(c.determine_path_count(2, 0.0, 0).unwrap(), 5);
    }

    #[test]
    fn participation_beyond_scale_clamps() {
        let c = controller();
        assert_eq!(
            c.determine_path_count(3, 0.4, 99).unwrap(),
            c.determine_path_count(3, 0.4, 5).unwrap()
        );
    }

    #[test]
    fn count_mapping_rounds_half_up() {
        assert_eq!(crisp_to_count(0.0), 1);
        assert_eq!(crisp_to_count(0.125), 2);
        assert_eq!(crisp_to_count(0.12), 1);
        assert_eq!(crisp_to_count(1.0), 5);
    }

    #[test]
    fn export_lists_all_rules() {
        let export = controller().export();
        assert_eq!(export.rules.len(), 60);
        assert_eq!(export.variables.len(), 4);
        let json = serde_json::to_value(&export).unwrap();
        assert_eq!(json["variables"][1]["labels"][4]["label"], "VL");
        assert_eq!(json["rules"].as_array().unwrap().iter().filter(|r| r["origin"] == "table").count(), 16);
    }

    proptest! {
        #[test]
        fn pure_and_bounded(hops in 1u32..40, energy in 0.0f64..2.0, npp in 0u32..20) {
            let c = controller();
            let a = c.determine_path_count(hops, energy, npp).unwrap();
            prop_assert!((1..=5).contains(&a));
            prop_assert_eq!(a, c.determine_path_count(hops, energy, npp).unwrap());
        }
    }
}
