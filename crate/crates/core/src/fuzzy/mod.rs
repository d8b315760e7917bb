//! Mamdani fuzzy controller that picks how many disjoint paths a flow uses.
//!
//! Inputs are hop count (HC), residual energy (RE) and the number of paths a
//! node already participates in (NPP); the output is the number of multiple
//! pathways (NMP). Rules fire at the minimum of their antecedent degrees,
//! consequents are clipped and max-aggregated, and the aggregate is reduced to
//! a crisp value by its centroid.

mod controller;
mod inference;
mod labels;
mod membership;
mod rules;
mod variable;

pub use controller::{ControllerExport, PathCountController, DEFAULT_GRID_STEP};
pub use inference::{defuzzify_centroid, infer, FuzzyOutputSet};
pub use labels::{Hc, Npp, Nmp, Re};
pub use membership::{MembershipFunction, MfKind};
pub use rules::{complete_rule_base, table_rules, FuzzyRule, RuleBase, RuleOrigin};
pub use variable::{Degrees, LinguisticVariable};
