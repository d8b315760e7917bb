use crate::error::{Error, Result};

use super::labels::{Hc, Npp, Nmp, Re};
use super::rules::RuleBase;
use super::variable::{Degrees, LinguisticVariable};

/// Aggregate output membership sampled on `0, step, 2*step, ..., 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyOutputSet {
    step: f64,
    samples: Vec<f64>,
}

impl FuzzyOutputSet {
    /// Sample `mu` over the unit grid. Values are clamped into [0,1].
    pub fn from_fn(step: f64, mu: impl Fn(f64) -> f64) -> Self {
        assert!(step > 0.0 && step <= 1.0, "grid step must lie in (0, 1]");
        let n = (1.0 / step).round() as usize;
        let samples = (0..=n).map(|i| mu(i as f64 * step).clamp(0.0, 1.0)).collect();
        FuzzyOutputSet { step, samples }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn is_empty(&self) -> bool {
        self.samples.iter().all(|&m| m == 0.0)
    }
}

/// Mamdani inference: min for AND, clip the consequent at the firing
/// strength, max over fired rules.
pub fn infer(
    rules: &RuleBase,
    hc: &Degrees,
    re: &Degrees,
    npp: &Degrees,
    output: &LinguisticVariable,
    step: f64,
) -> FuzzyOutputSet {
    // Rules sharing a consequent reduce to one clip at their max strength.
    let mut strength = [0.0f64; 5];
    for &h in Hc::ALL {
        let dh = hc.get(h.as_str());
        if dh == 0.0 {
            continue;
        }
        for &r in Re::ALL {
            let dr = re.get(r.as_str());
            if dr == 0.0 {
                continue;
            }
            for &p in Npp::ALL {
                let w = dh.min(dr).min(npp.get(p.as_str()));
                let out = rules.consequent(h, r, p).ordinal();
                strength[out] = strength[out].max(w);
            }
        }
    }
    let clipped: Vec<_> = Nmp::ALL
        .iter()
        .filter(|l| strength[l.ordinal()] > 0.0)
        .filter_map(|l| output.function(l.as_str()).map(|mf| (*mf, strength[l.ordinal()])))
        .collect();
    FuzzyOutputSet::from_fn(step, |x| {
        clipped.iter().map(|(mf, w)| mf.eval(x).min(*w)).fold(0.0, f64::max)
    })
}

/// Centroid of the sampled set.
pub fn defuzzify_centroid(set: &FuzzyOutputSet) -> Result<f64> {
    let (mut moment, mut mass) = (0.0, 0.0);
    for (i, &mu) in set.samples.iter().enumerate() {
        moment += i as f64 * set.step * mu;
        mass += mu;
    }
    if mass == 0.0 {
        return Err(Error::EmptyOutputSet);
    }
    Ok(moment / mass)
}
