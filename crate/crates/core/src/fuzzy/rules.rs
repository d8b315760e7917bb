use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::labels::{Hc, Npp, Nmp, Re};

const RULE_COUNT: usize = 4 * 5 * 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub hc: Hc,
    pub re: Re,
    pub npp: Npp,
    pub nmp: Nmp,
}

impl FuzzyRule {
    pub const fn new(hc: Hc, re: Re, npp: Npp, nmp: Nmp) -> Self {
        FuzzyRule { hc, re, npp, nmp }
    }

    /// Position when antecedents are enumerated in ascending ordinal order.
    pub fn ordinal_index(&self) -> usize {
        antecedent_index(self.hc, self.re, self.npp)
    }

    /// Position in the printed rule table, which lists HC from VL down to S,
    /// RE from VL to VS and NPP from H down to L.
    pub fn table_index(&self) -> usize {
        (3 - self.hc.ordinal()) * 15 + self.re.ordinal() * 3 + (2 - self.npp.ordinal())
    }

    /// True when monotonicity requires `self.nmp <= other.nmp`: `self` has at
    /// least as many hops, no more depletion and at least as much participation.
    fn bounded_by(&self, other: &FuzzyRule) -> bool {
        self.hc >= other.hc && self.re <= other.re && self.npp >= other.npp
    }
}

impl fmt::Display for FuzzyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}) -> {}", self.hc, self.re, self.npp, self.nmp)
    }
}

fn antecedent_index(hc: Hc, re: Re, npp: Npp) -> usize {
    hc.ordinal() * 15 + re.ordinal() * 3 + npp.ordinal()
}

/// The rules printed in the published rule table, keyed by label tuple.
pub fn table_rules() -> Vec<FuzzyRule> {
    use {Hc as H, Nmp as N, Npp as P, Re as R};
    vec![
        FuzzyRule::new(H::VL, R::VL, P::H, N::VS),
        FuzzyRule::new(H::VL, R::VL, P::M, N::VS),
        FuzzyRule::new(H::VL, R::VL, P::L, N::S),
        FuzzyRule::new(H::L, R::VL, P::H, N::VS),
        FuzzyRule::new(H::L, R::VL, P::M, N::VS),
        FuzzyRule::new(H::L, R::VL, P::L, N::S),
        FuzzyRule::new(H::L, R::L, P::H, N::VS),
        FuzzyRule::new(H::L, R::L, P::M, N::S),
        FuzzyRule::new(H::L, R::VS, P::L, N::L),
        FuzzyRule::new(H::M, R::VL, P::H, N::S),
        FuzzyRule::new(H::M, R::VL, P::M, N::S),
        FuzzyRule::new(H::M, R::VL, P::L, N::M),
        FuzzyRule::new(H::M, R::VS, P::M, N::L),
        FuzzyRule::new(H::M, R::VS, P::L, N::VL),
        FuzzyRule::new(H::S, R::VL, P::H, N::S),
        FuzzyRule::new(H::S, R::VL, P::M, N::M),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleOrigin {
    Table,
    Completed,
}

/// All 60 antecedent combinations with their consequents.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleBase {
    consequents: [Nmp; RULE_COUNT],
    origins: [RuleOrigin; RULE_COUNT],
}

impl RuleBase {
    /// The table rules completed to a full base.
    pub fn standard() -> Self {
        complete_rule_base(&table_rules()).expect("table rules are mutually consistent")
    }

    pub fn consequent(&self, hc: Hc, re: Re, npp: Npp) -> Nmp {
        self.consequents[antecedent_index(hc, re, npp)]
    }

    pub fn origin(&self, hc: Hc, re: Re, npp: Npp) -> RuleOrigin {
        self.origins[antecedent_index(hc, re, npp)]
    }

    pub fn len(&self) -> usize {
        RULE_COUNT
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Rules in ascending antecedent ordinal order.
    pub fn rules(&self) -> impl Iterator<Item = FuzzyRule> + '_ {
        all_antecedents().map(|(hc, re, npp)| FuzzyRule::new(hc, re, npp, self.consequent(hc, re, npp)))
    }

    /// Every ordered pair that breaks monotonicity.
    pub fn monotonicity_violations(&self) -> Vec<(FuzzyRule, FuzzyRule)> {
        let rules: Vec<_> = self.rules().collect();
        violations(&rules)
    }
}

fn all_antecedents() -> impl Iterator<Item = (Hc, Re, Npp)> {
    Hc::ALL.iter().flat_map(|&hc| {
        Re::ALL
            .iter()
            .flat_map(move |&re| Npp::ALL.iter().map(move |&npp| (hc, re, npp)))
    })
}

fn violations(rules: &[FuzzyRule]) -> Vec<(FuzzyRule, FuzzyRule)> {
    let mut out = Vec::new();
    for a in rules {
        for b in rules {
            if a.bounded_by(b) && a.nmp > b.nmp {
                out.push((*a, *b));
            }
        }
    }
    out
}

/// Extend a partial rule table to all 60 antecedents.
///
/// Antecedents are visited in ascending ordinal order. A missing consequent
/// takes the largest consequent among fixed rules it must dominate (the
/// floor), capped by the smallest consequent among fixed rules that must
/// dominate it (the ceiling). With no floor the result is `VS`.
pub fn complete_rule_base(given: &[FuzzyRule]) -> Result<RuleBase> {
    let mut fixed: Vec<Option<Nmp>> = vec![None; RULE_COUNT];
    let mut origins = [RuleOrigin::Completed; RULE_COUNT];
    for rule in given {
        let i = rule.ordinal_index();
        if fixed[i].is_some() {
            return Err(Error::DuplicateRule(rule.to_string()));
        }
        fixed[i] = Some(rule.nmp);
        origins[i] = RuleOrigin::Table;
    }
    if let Some((a, b)) = violations(given).into_iter().next() {
        return Err(Error::MonotonicityConflict {
            first: a.to_string(),
            second: b.to_string(),
        });
    }

    for (hc, re, npp) in all_antecedents() {
        let i = antecedent_index(hc, re, npp);
        if fixed[i].is_some() {
            continue;
        }
        let probe = FuzzyRule::new(hc, re, npp, Nmp::VS);
        let mut floor = Nmp::VS;
        let mut ceiling = Nmp::VL;
        for (h, r, p) in all_antecedents() {
            let Some(nmp) = fixed[antecedent_index(h, r, p)] else {
                continue;
            };
            let other = FuzzyRule::new(h, r, p, nmp);
            if other.bounded_by(&probe) {
                floor = floor.max(nmp);
            }
            if probe.bounded_by(&other) {
                ceiling = ceiling.min(nmp);
            }
        }
        fixed[i] = Some(floor.min(ceiling));
    }

    let mut consequents = [Nmp::VS; RULE_COUNT];
    for (slot, value) in consequents.iter_mut().zip(fixed) {
        *slot = value.expect("every antecedent assigned");
    }
    Ok(RuleBase { consequents, origins })
}
