//! Size control for max-type tests whose statistic X is coupled to an approximating
//! statistic T with known dependence structure.
//!
//! If P(‖X − T‖∞ > ε) ≤ p(ε), the rejection probability of the test that compares
//! max X_i with the 1 − α quantile q_α of max T_i differs from α by at most
//! p(ε) plus the larger of the two one-sided concentration terms of max T_i at q_α.

use serde::{Deserialize, Serialize};

use crate::bounds::{gmm_bound, nazarov_bound, thm2_upper, BoundQuery, BoundResult, GmmBound, GmmBranch};
use crate::diagonals::DiagonalSection;
use crate::error::{Error, Result};
use crate::marginals::MarginalDistribution;
use crate::montecarlo::{estimate_concentration, sample_max_via_diagonal, verify_bound, EstimateResult, SampleConfig, Verdict};
use crate::scalar::Scalar;

/// Tabulated coupling error p(ε), nonincreasing in ε.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProfile<T> {
    table: Vec<(T, T)>,
}

impl<T: Scalar> CouplingProfile<T> {
    /// `table` holds (ε, p) pairs with ε ≥ 0 strictly increasing and p ∈ [0, 1] nonincreasing.
    pub fn new(table: Vec<(T, T)>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::param("coupling", "table must not be empty"));
        }
        for &(eps, p) in &table {
            if !(eps >= T::zero() && eps.is_finite()) {
                return Err(Error::param("coupling", format!("epsilon must be finite and >= 0, got {eps}")));
            }
            if !(p >= T::zero() && p <= T::one()) {
                return Err(Error::param("coupling", format!("p must lie in [0, 1], got {p}")));
            }
        }
        for pair in table.windows(2) {
            if !(pair[1].0 > pair[0].0) {
                return Err(Error::param("coupling", "epsilon values must be strictly increasing"));
            }
            if pair[1].1 > pair[0].1 {
                return Err(Error::param(
                    "coupling",
                    format!("p must be nonincreasing in epsilon; rises at epsilon = {}", pair[1].0),
                ));
            }
        }
        Ok(Self { table })
    }

    /// p ≡ `p` for every ε ≥ 0.
    pub fn constant(p: T) -> Result<Self> {
        Self::new(vec![(T::zero(), p)])
    }

    pub fn table(&self) -> &[(T, T)] {
        &self.table
    }

    /// p at the largest tabulated ε not exceeding `epsilon`, or 1 below the table.
    ///
    /// A tabulated p(εᵢ) bounds P(‖X − T‖∞ > ε) for every ε ≥ εᵢ, so stepping down
    /// to the nearest tabulated point keeps the inequality.
    pub fn eval(&self, epsilon: T) -> T {
        let idx = self.table.partition_point(|&(e, _)| e <= epsilon);
        if idx == 0 {
            T::one()
        } else {
            self.table[idx - 1].1
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortionMode {
    /// Concentration terms from the known diagonal, Δ∘F.
    #[default]
    Exact,
    /// Concentration terms from the diagonally convex bound; only the class of the
    /// dependence is assumed, the diagonal still fixes q_α.
    ConvexClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceScenario<T> {
    pub diagonal: DiagonalSection<T>,
    pub marginal: MarginalDistribution<T>,
    pub alpha: T,
    pub coupling: CouplingProfile<T>,
    pub epsilon_grid: Vec<T>,
}

impl<T: Scalar> InferenceScenario<T> {
    pub fn new(
        diagonal: DiagonalSection<T>,
        marginal: MarginalDistribution<T>,
        alpha: T,
        coupling: CouplingProfile<T>,
        epsilon_grid: Vec<T>,
    ) -> Result<Self> {
        let scenario = Self {
            diagonal,
            marginal,
            alpha,
            coupling,
            epsilon_grid,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.epsilon_grid.is_empty() {
            return Err(Error::Usage("epsilon grid must not be empty".into()));
        }
        if let Some(e) = self.epsilon_grid.iter().find(|e| !(**e >= T::zero() && e.is_finite())) {
            return Err(Error::param("epsilon_grid", format!("entries must be finite and >= 0, got {e}")));
        }
        if self.epsilon_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("epsilon_grid", "entries must be strictly increasing"));
        }
        Ok(())
    }
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha < T::one() {
        Ok(())
    } else {
        Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")))
    }
}

/// q_α = inf{q : Δ(F(q)) ≥ 1 − α}, computed as F⁻¹(Δ⁻¹(1 − α)).
pub fn quantile_qalpha<T: Scalar>(diag: &DiagonalSection<T>, marginal: &MarginalDistribution<T>, alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    marginal.quantile(diag.inverse(T::one() - alpha)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistortionTerm<T> {
    pub epsilon: T,
    pub coupling_p: T,
    /// P(q_α − ε < max T_i ≤ q_α), or its convex-class bound.
    pub left: T,
    /// P(q_α < max T_i ≤ q_α + ε), or its convex-class bound.
    pub right: T,
    /// min(1, p(ε) + max(left, right)).
    pub total: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeDistortionReport<T> {
    pub bound: T,
    pub argmin_epsilon: T,
    pub q_alpha: T,
    pub alpha: T,
    pub mode: DistortionMode,
    pub breakdown: Vec<DistortionTerm<T>>,
}

/// Minimizes p(ε) + max(left, right) over the scenario's ε grid.
///
/// Ties go to the smallest ε. Totals are capped at 1.
pub fn size_distortion_bound<T: Scalar>(scenario: &InferenceScenario<T>, mode: DistortionMode) -> Result<SizeDistortionReport<T>> {
    scenario.validate()?;
    let (diag, marginal) = (&scenario.diagonal, &scenario.marginal);
    let q = quantile_qalpha(diag, marginal, scenario.alpha)?;
    let at = |x: T| diag.eval(marginal.cdf(x));
    let center = at(q)?;

    let mut breakdown = Vec::with_capacity(scenario.epsilon_grid.len());
    for &epsilon in &scenario.epsilon_grid {
        let (left, right) = match mode {
            DistortionMode::Exact => (
                (center - at(q - epsilon)?).max(T::zero()),
                (at(q + epsilon)? - center).max(T::zero()),
            ),
            DistortionMode::ConvexClass => {
                let window = |x: T| -> Result<T> {
                    let query = BoundQuery::new(x, epsilon, diag.dim(), marginal.clone())?;
                    Ok(thm2_upper(&query).value)
                };
                (window(q - epsilon)?, window(q)?)
            }
        };
        let coupling_p = scenario.coupling.eval(epsilon);
        breakdown.push(DistortionTerm {
            epsilon,
            coupling_p,
            left,
            right,
            total: (coupling_p + left.max(right)).min(T::one()),
        });
    }
    let best = breakdown
        .iter()
        .fold(None::<&DistortionTerm<T>>, |acc, term| match acc {
            Some(b) if b.total <= term.total => Some(b),
            _ => Some(term),
        })
        .expect("grid is nonempty");
    Ok(SizeDistortionReport {
        bound: best.total,
        argmin_epsilon: best.epsilon,
        q_alpha: q,
        alpha: scenario.alpha,
        mode,
        breakdown,
    })
}

/// One location of the simulation check of the mixture bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorCheck {
    pub x: f64,
    pub estimate: EstimateResult,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorModelReport {
    pub d: usize,
    pub epsilon: f64,
    pub gmm: GmmBound<f64>,
    /// (ε/σ_min)(√(2 ln d) + 2), the bound obtained by conditioning on the factor.
    pub conditioning_value: f64,
    pub active: GmmBranch,
    pub checks: Vec<FactorCheck>,
    pub all_pass: bool,
}

/// Default locations for the simulation check: the centre, where the narrowest
/// component dominates the density, through the tail, where σ₁ = 1 dominates.
pub const FACTOR_X_GRID: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 3.0];

/// Maxima of d independent scale-mixture coordinates with weights `p` and scales
/// `sigma`: the mixture bound, the conditioning bound, and a simulation check of the
/// former at each point of `x_grid`.
pub fn factor_model_scenario(
    p: &[f64],
    sigma: &[f64],
    d: usize,
    epsilon: f64,
    x_grid: &[f64],
    cfg: &SampleConfig,
    k_sigma: f64,
) -> Result<FactorModelReport> {
    let gmm = gmm_bound(p, sigma, d, epsilon)?;
    let sigma_min = sigma.iter().copied().fold(f64::INFINITY, f64::min);
    let conditioning_value = nazarov_bound(sigma_min, d, epsilon)?;
    let marginal = MarginalDistribution::gaussian_mixture(p.to_vec(), sigma.to_vec())?;
    let diagonal = DiagonalSection::independence(d)?;
    let samples = sample_max_via_diagonal(&diagonal, &marginal, cfg)?;
    let bound: BoundResult<f64> = gmm.to_result();
    let checks = x_grid
        .iter()
        .map(|&x| {
            let estimate = estimate_concentration(&samples, x, epsilon)?;
            Ok(FactorCheck {
                x,
                estimate,
                verdict: verify_bound(&bound, &estimate, k_sigma),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_pass = checks.iter().all(|c| c.verdict.pass);
    Ok(FactorModelReport {
        d,
        epsilon,
        gmm,
        conditioning_value,
        active: gmm.active,
        checks,
        all_pass,
    })
}
