use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MfKind {
    Triangular,
    Trapezoidal,
}

/// Piecewise-linear membership function on the normalized axis [0,1].
///
/// A triangle `(a, b, c)` is stored as the trapezoid `(a, b, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipFunction {
    kind: MfKind,
    points: [f64; 4],
}

impl MembershipFunction {
    pub fn triangle(a: f64, b: f64, c: f64) -> Result<Self> {
        check(&[a, b, c])?;
        Ok(MembershipFunction {
            kind: MfKind::Triangular,
            points: [a, b, b, c],
        })
    }

    pub fn trapezoid(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        check(&[a, b, c, d])?;
        Ok(MembershipFunction {
            kind: MfKind::Trapezoidal,
            points: [a, b, c, d],
        })
    }

    pub fn kind(&self) -> MfKind {
        self.kind
    }

    /// Breakpoints as given at construction (3 for triangles, 4 for trapezoids).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.kind {
            MfKind::Triangular => vec![self.points[0], self.points[1], self.points[3]],
            MfKind::Trapezoidal => self.points.to_vec(),
        }
    }

    /// Degree of membership of `x`; zero outside the support.
    pub fn eval(&self, x: f64) -> f64 {
        let [a, b, c, d] = self.points;
        if x < a || x > d || x.is_nan() {
            0.0
        } else if x >= b && x <= c {
            1.0
        } else if x < b {
            (x - a) / (b - a)
        } else {
            (d - x) / (d - c)
        }
    }
}

fn check(points: &[f64]) -> Result<()> {
    let in_range = points.iter().all(|p| p.is_finite() && (0.0..=1.0).contains(p));
    let ordered = points.windows(2).all(|w| w[0] <= w[1]);
    let degenerate = points.first() == points.last();
    if in_range && ordered && !degenerate {
        Ok(())
    } else {
        Err(Error::InvalidMembership(points.to_vec()))
    }
}

/// Uniform partition of [0,1] into `n` labels: triangles peaked at `i/(n-1)`
/// whose feet sit on the neighbouring peaks, with shouldered trapezoids at
/// both ends.
pub(crate) fn uniform_partition(n: usize) -> Vec<MembershipFunction> {
    assert!(n >= 2, "a partition needs at least two labels");
    let peak = |i: usize| i as f64 / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let result = if i == 0 {
                MembershipFunction::trapezoid(0.0, 0.0, 0.0, peak(1))
            } else if i == n - 1 {
                MembershipFunction::trapezoid(peak(n - 2), 1.0, 1.0, 1.0)
            } else {
                MembershipFunction::triangle(peak(i - 1), peak(i), peak(i + 1))
            };
            result.expect("uniform partition breakpoints are ordered")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn triangle_examples() {
        let mf = MembershipFunction::triangle(0.0, 0.5, 1.0).unwrap();
        assert_eq!(mf.eval(0.5), 1.0);
        assert_eq!(mf.eval(0.25), 0.5);
        assert_eq!(mf.eval(1.2), 0.0);
        assert_eq!(mf.eval(-0.1), 0.0);
    }

    #[test]
    fn trapezoid_plateau() {
        let mf = MembershipFunction::trapezoid(0.1, 0.2, 0.4, 0.8).unwrap();
        assert_eq!(mf.eval(0.3), 1.0);
        assert!((mf.eval(0.6) - 0.5).abs() < 1e-12);
        assert!((mf.eval(0.15) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn malformed_breakpoints_rejected() {
        assert!(MembershipFunction::triangle(0.5, 0.2, 1.0).is_err());
        assert!(MembershipFunction::triangle(0.0, 0.5, 1.5).is_err());
        assert!(MembershipFunction::trapezoid(0.3, 0.3, 0.3, 0.3).is_err());
        assert!(MembershipFunction::triangle(f64::NAN, 0.5, 1.0).is_err());
    }

    #[test]
    fn shoulders_saturate_at_domain_ends() {
        let parts = uniform_partition(5);
        assert_eq!(parts[0].eval(0.0), 1.0);
        assert_eq!(parts[4].eval(1.0), 1.0);
        assert_eq!(parts[2].breakpoints(), vec![0.25, 0.5, 0.75]);
    }

    proptest! {
        #[test]
        fn degrees_stay_in_unit_interval(n in 2usize..8, x in -0.5f64..1.5) {
            for mf in uniform_partition(n) {
                let d = mf.eval(x);
                prop_assert!((0.0..=1.0).contains(&d));
            }
        }

        #[test]
        fn partition_covers_domain(n in 2usize..8, x in 0.0f64..=1.0) {
            prop_assert!(uniform_partition(n).iter().any(|mf| mf.eval(x) > 0.0));
        }
    }
}
