//! Grid validators: the characterization of copula diagonals, convexity, and the
//! monotonicity of the Archimedean ratio Ψ.

use serde::Serialize;

use super::{ArchimedeanGenerator, DiagonalSection};
use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Scalar};

/// Default tolerance for the characterization checks.
pub const LEMMA1_TOLERANCE: f64 = 1e-9;
/// Default grid for both validators.
pub const DEFAULT_GRID: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma1Condition {
    /// Δ(1) = 1.
    UnitAtOne,
    /// Δ(t) ≤ t.
    BelowIdentity,
    /// Δ(t) ≤ Δ(t′) for t ≤ t′.
    Nondecreasing,
    /// Δ(t′) − Δ(t) ≤ d(t′ − t).
    Lipschitz,
}

/// A failed condition at grid point `t` (and `t_next` for the two-point conditions).
/// `slack` is negative and measures by how much the condition fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation<T> {
    pub condition: Lemma1Condition,
    pub t: T,
    pub t_next: Option<T>,
    pub slack: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report<T> {
    pub passed: bool,
    pub grid_size: usize,
    pub tolerance: T,
    /// Smallest slack over every condition and grid point.
    pub min_slack: T,
    pub first_violation: Option<Violation<T>>,
    pub worst_violation: Option<Violation<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport<T> {
    pub convex: bool,
    pub grid_size: usize,
    pub tolerance: T,
    pub min_second_difference: T,
    /// Grid point with the most negative second difference when the check fails.
    pub witness: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiReport<T> {
    pub non_increasing: bool,
    pub grid_size: usize,
    pub x_max: T,
    /// Largest observed rise Ψ(x′) − Ψ(x) between consecutive grid points.
    pub max_rise: T,
    /// Consecutive pair (x, x′) with the largest rise when the check fails.
    pub witness: Option<(T, T)>,
}

/// Points i/n for i = 0..=n; `n` counts intervals, so the grid has n + 1 points.
fn uniform_grid<T: Scalar>(n: usize) -> impl Iterator<Item = T> {
    let last = from_usize::<T>(n);
    (0..=n).map(move |i| if i == n { T::one() } else { from_usize::<T>(i) / last })
}

impl<T: Scalar> DiagonalSection<T> {
    /// Checks Δ(1) = 1, Δ(t) ≤ t and 0 ≤ Δ(t′) − Δ(t) ≤ d(t′ − t) on the grid i/grid_size.
    pub fn validate_lemma1(&self, grid_size: usize) -> Result<Lemma1Report<T>> {
        self.validate_lemma1_with_tolerance(grid_size, T::tolerance(LEMMA1_TOLERANCE))
    }

    pub fn validate_lemma1_with_tolerance(&self, grid_size: usize, tolerance: T) -> Result<Lemma1Report<T>> {
        if grid_size < 2 {
            return Err(Error::param("grid_size", "must be >= 2"));
        }
        let d = from_usize::<T>(self.dim());
        let mut report = Lemma1Report {
            passed: true,
            grid_size,
            tolerance,
            min_slack: T::infinity(),
            first_violation: None,
            worst_violation: None,
        };
        let record = |report: &mut Lemma1Report<T>, v: Violation<T>| {
            report.min_slack = report.min_slack.min(v.slack);
            if v.slack < -tolerance {
                report.passed = false;
                if report.first_violation.is_none() {
                    report.first_violation = Some(v);
                }
                if report.worst_violation.is_none_or(|w| v.slack < w.slack) {
                    report.worst_violation = Some(v);
                }
            }
        };

        let at_one = self.eval(T::one())?;
        record(
            &mut report,
            Violation {
                condition: Lemma1Condition::UnitAtOne,
                t: T::one(),
                t_next: None,
                slack: -(at_one - T::one()).abs(),
            },
        );

        let mut previous: Option<(T, T)> = None;
        for t in uniform_grid::<T>(grid_size) {
            let value = self.eval(t)?;
            record(
                &mut report,
                Violation {
                    condition: Lemma1Condition::BelowIdentity,
                    t,
                    t_next: None,
                    slack: t - value,
                },
            );
            if let Some((s, prev)) = previous {
                let rise = value - prev;
                record(
                    &mut report,
                    Violation {
                        condition: Lemma1Condition::Nondecreasing,
                        t: s,
                        t_next: Some(t),
                        slack: rise,
                    },
                );
                record(
                    &mut report,
                    Violation {
                        condition: Lemma1Condition::Lipschitz,
                        t: s,
                        t_next: Some(t),
                        slack: d * (t - s) - rise,
                    },
                );
            }
            previous = Some((t, value));
        }
        Ok(report)
    }

    /// Second differences Δ(t − h) − 2Δ(t) + Δ(t + h) ≥ −tol on the grid i/grid_size.
    pub fn check_convexity(&self, grid_size: usize, tolerance: T) -> Result<ConvexityReport<T>> {
        if grid_size < 3 {
            return Err(Error::param("grid_size", "must be >= 3"));
        }
        let values: Vec<(T, T)> = uniform_grid::<T>(grid_size)
            .map(|t| self.eval(t).map(|v| (t, v)))
            .collect::<Result<_>>()?;
        let mut min_second = T::infinity();
        let mut at = T::zero();
        for w in values.windows(3) {
            let second = w[0].1 - lit::<T>(2.0) * w[1].1 + w[2].1;
            if second < min_second {
                min_second = second;
                at = w[1].0;
            }
        }
        let convex = min_second >= -tolerance;
        Ok(ConvexityReport {
            convex,
            grid_size,
            tolerance,
            min_second_difference: min_second,
            witness: if convex { None } else { Some(at) },
        })
    }

    /// `check_convexity` with the default grid and tolerance 1e-9·d.
    pub fn check_convexity_default(&self) -> Result<ConvexityReport<T>> {
        let tol = T::tolerance(1e-9) * from_usize::<T>(self.dim());
        self.check_convexity(DEFAULT_GRID, tol)
    }
}

impl<T: Scalar> ArchimedeanGenerator<T> {
    /// Evaluates Ψ on a log-spaced grid over [1e-8, min(ψ(1e-8), 1e100)] and reports
    /// whether it is non-increasing within 1e-10.
    pub fn psi_monotonicity_check(&self, d: usize, grid: usize) -> Result<PsiReport<T>> {
        if d == 0 {
            return Err(Error::param("d", "dimension must be >= 1"));
        }
        if grid < 2 {
            return Err(Error::param("grid", "must be >= 2"));
        }
        let x_min = lit::<T>(1e-8);
        let psi_at_min = self.psi(x_min);
        let cap = lit::<T>(1e100).min(T::max_value().sqrt());
        let x_max = if psi_at_min.is_finite() { psi_at_min.min(cap) } else { cap };
        if !(x_max > x_min) {
            return Err(Error::Numeric(format!("degenerate Psi grid: x_max = {x_max}")));
        }
        let (l0, l1) = (x_min.ln(), x_max.ln());
        let last = from_usize::<T>(grid - 1);
        let tol = T::tolerance(1e-10);

        let mut max_rise = T::neg_infinity();
        let mut witness = None;
        let mut previous: Option<(T, T)> = None;
        for i in 0..grid {
            let x = (l0 + (l1 - l0) * from_usize::<T>(i) / last).exp();
            let value = self.psi_ratio(d, x);
            if !value.is_finite() {
                return Err(Error::Numeric(format!("Psi({x}) evaluated to {value}")));
            }
            if let Some((px, pv)) = previous {
                let rise = value - pv;
                if rise > max_rise {
                    max_rise = rise;
                    witness = Some((px, x));
                }
            }
            previous = Some((x, value));
        }
        let non_increasing = max_rise <= tol;
        Ok(PsiReport {
            non_increasing,
            grid_size: grid,
            x_max,
            max_rise,
            witness: if non_increasing { None } else { witness },
        })
    }
}
