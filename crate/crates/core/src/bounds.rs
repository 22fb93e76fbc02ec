//! Pointwise anti-concentration bounds for max(X_1, …, X_d) with common marginal F.
//!
//! Every bound returns the branch of its min/max that was active, so callers can tell
//! the dimension-driven regime apart from the mass- or hazard-driven one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginals::{check_weights, Family, MarginalDistribution};
use crate::scalar::{from_usize, lit, Scalar};
use crate::special::normal_pdf;

/// Location x, window ε and dimension d for a marginal F.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundQuery<T> {
    pub x: T,
    pub epsilon: T,
    pub d: usize,
    pub marginal: MarginalDistribution<T>,
}

impl<T: Scalar> BoundQuery<T> {
    pub fn new(x: T, epsilon: T, d: usize, marginal: MarginalDistribution<T>) -> Result<Self> {
        if x.is_nan() {
            return Err(Error::param("x", "must not be NaN"));
        }
        if !(epsilon >= T::zero()) {
            return Err(Error::param("epsilon", format!("must be >= 0, got {epsilon}")));
        }
        if d == 0 {
            return Err(Error::param("d", "dimension must be >= 1"));
        }
        Ok(Self { x, epsilon, d, marginal })
    }

    /// F(x + ε) − F(x), taken from the survival side in the upper half to avoid cancellation.
    pub fn window_mass(&self) -> T {
        let f = &self.marginal;
        let right = self.x + self.epsilon;
        if f.cdf(self.x) > lit(0.5) {
            (f.sf(self.x) - f.sf(right)).max(T::zero())
        } else {
            (f.cdf(right) - f.cdf(self.x)).max(T::zero())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
}

/// Which branch of the bound produced the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// d·(F(x+ε) − F(x)) was the smaller term.
    DimensionScaled,
    /// F(x+ε) was the smaller term.
    CumulativeMass,
    /// The lower bound was clipped at zero.
    Vanishing,
    /// 1 − F(x) − d(1 − F(x+ε)) was positive.
    Positive,
    /// 1/(1 − F(x)) was below d.
    HazardScaled,
    /// A closed-form rate below one.
    ClosedForm,
    /// A closed-form rate of at least one, reported as 1.
    Vacuous,
    /// The mixture branch (ε/p₁)(√(2 ln d) + 2Σ p_k/σ_k) was smaller.
    MixtureBranch,
    /// The conditioning branch (ε/σ_min)(√(2 ln d) + 2) was smaller.
    ConditioningBranch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    Thm1Upper,
    Thm1Lower,
    Thm2Upper,
    Nazarov,
    ClosedFormGaussian,
    ClosedFormGaussianAbs,
    ClosedFormWeibull,
    ClosedFormReverseGumbel,
    ClosedFormPareto,
    ClosedFormGamma,
    ClosedFormChiSquared,
    Gmm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResult<T> {
    pub value: T,
    pub regime: Regime,
    pub formula_id: FormulaId,
    pub side: Side,
}

impl<T: Scalar> BoundResult<T> {
    /// Wraps a closed-form rate as an upper probability bound, capping it at 1.
    pub fn from_rate(rate: T, formula_id: FormulaId) -> Self {
        let (value, regime) = if rate >= T::one() {
            (T::one(), Regime::Vacuous)
        } else {
            (rate, Regime::ClosedForm)
        };
        Self {
            value,
            regime,
            formula_id,
            side: Side::Upper,
        }
    }

    /// A fixed value, used to inject a bound by hand.
    pub fn manual(value: T, formula_id: FormulaId, side: Side) -> Self {
        Self {
            value,
            regime: Regime::ClosedForm,
            formula_id,
            side,
        }
    }
}

/// Sharp bound over all copulas: min(d(F(x+ε) − F(x)), F(x+ε)).
pub fn thm1_upper<T: Scalar>(q: &BoundQuery<T>) -> BoundResult<T> {
    let scaled = from_usize::<T>(q.d) * q.window_mass();
    let cumulative = q.marginal.cdf(q.x + q.epsilon);
    let (value, regime) = if scaled <= cumulative {
        (scaled, Regime::DimensionScaled)
    } else {
        (cumulative, Regime::CumulativeMass)
    };
    BoundResult {
        value: value.min(T::one()),
        regime,
        formula_id: FormulaId::Thm1Upper,
        side: Side::Upper,
    }
}

/// Sharp lower bound over all copulas: max(0, 1 − F(x) − d(1 − F(x+ε))).
pub fn thm1_lower<T: Scalar>(q: &BoundQuery<T>) -> BoundResult<T> {
    let raw = q.marginal.sf(q.x) - from_usize::<T>(q.d) * q.marginal.sf(q.x + q.epsilon);
    let (value, regime) = if raw > T::zero() {
        (raw, Regime::Positive)
    } else {
        (T::zero(), Regime::Vanishing)
    };
    BoundResult {
        value,
        regime,
        formula_id: FormulaId::Thm1Lower,
        side: Side::Lower,
    }
}

/// Sharp bound over diagonally convex copulas: (F(x+ε) − F(x))·min(1/(1 − F(x)), d).
pub fn thm2_upper<T: Scalar>(q: &BoundQuery<T>) -> BoundResult<T> {
    let d = from_usize::<T>(q.d);
    let survival = q.marginal.sf(q.x);
    let mass = q.window_mass();
    let (factor, regime) = if survival > T::zero() && survival.recip() < d {
        (survival.recip(), Regime::HazardScaled)
    } else {
        (d, Regime::DimensionScaled)
    };
    BoundResult {
        value: (mass * factor).min(T::one()),
        regime,
        formula_id: FormulaId::Thm2Upper,
        side: Side::Upper,
    }
}

/// Nazarov's Gaussian benchmark (ε/σ)(√(2 ln d) + 2).
pub fn nazarov_bound<T: Scalar>(sigma: T, d: usize, epsilon: T) -> Result<T> {
    check_positive("sigma", sigma)?;
    check_dim_eps(d, epsilon)?;
    Ok(epsilon / sigma * (sqrt_two_log::<T>(d) + lit::<T>(2.0)))
}

fn sqrt_two_log<T: Scalar>(d: usize) -> T {
    (lit::<T>(2.0) * from_usize::<T>(d).ln()).sqrt()
}

fn check_positive<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

fn check_dim_eps<T: Scalar>(d: usize, epsilon: T) -> Result<()> {
    if d == 0 {
        return Err(Error::param("d", "dimension must be >= 1"));
    }
    if !(epsilon >= T::zero()) {
        return Err(Error::param("epsilon", format!("must be >= 0, got {epsilon}")));
    }
    Ok(())
}

/// Marginal families with a closed-form bound valid for every diagonally convex copula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyBound<T> {
    Gaussian { sigma: T },
    /// Maxima of |X_i| for jointly Gaussian X_i with scale σ.
    GaussianAbs { sigma: T },
    Weibull { alpha: T, lambda: T },
    ReverseGumbel { lambda: T },
    Pareto { alpha: T, lambda: T },
    Gamma { alpha: T, lambda: T },
    /// χ²_p, handled as Gamma(p/2, 2).
    ChiSquared { p: u32 },
}

impl<T: Scalar> FamilyBound<T> {
    /// The closed form that covers a given marginal, if any.
    pub fn for_marginal(marginal: &MarginalDistribution<T>) -> Result<Self> {
        Ok(match marginal.family() {
            Family::Gaussian { sigma, .. } => FamilyBound::Gaussian { sigma: *sigma },
            Family::Weibull { alpha, lambda } => FamilyBound::Weibull {
                alpha: *alpha,
                lambda: *lambda,
            },
            Family::ReverseGumbel { lambda } => FamilyBound::ReverseGumbel { lambda: *lambda },
            Family::Pareto { alpha, lambda } => FamilyBound::Pareto {
                alpha: *alpha,
                lambda: *lambda,
            },
            Family::Gamma { alpha, lambda } => FamilyBound::Gamma {
                alpha: *alpha,
                lambda: *lambda,
            },
            Family::Uniform01 | Family::GaussianMixture { .. } => {
                return Err(Error::param(
                    "marginal",
                    format!("no closed-form family bound for {}", marginal.name()),
                ))
            }
        })
    }

    pub fn formula_id(&self) -> FormulaId {
        match self {
            FamilyBound::Gaussian { .. } => FormulaId::ClosedFormGaussian,
            FamilyBound::GaussianAbs { .. } => FormulaId::ClosedFormGaussianAbs,
            FamilyBound::Weibull { .. } => FormulaId::ClosedFormWeibull,
            FamilyBound::ReverseGumbel { .. } => FormulaId::ClosedFormReverseGumbel,
            FamilyBound::Pareto { .. } => FormulaId::ClosedFormPareto,
            FamilyBound::Gamma { .. } => FormulaId::ClosedFormGamma,
            FamilyBound::ChiSquared { .. } => FormulaId::ClosedFormChiSquared,
        }
    }
}

/// Closed-form rate for a family under any diagonally convex copula.
pub fn closed_form_bound<T: Scalar>(family: FamilyBound<T>, d: usize, epsilon: T) -> Result<T> {
    check_dim_eps(d, epsilon)?;
    let one = T::one();
    let log_d = from_usize::<T>(d).ln();
    match family {
        FamilyBound::Gaussian { sigma } => {
            check_positive("sigma", sigma)?;
            Ok(epsilon / sigma * (sqrt_two_log::<T>(d) + one))
        }
        FamilyBound::GaussianAbs { sigma } => {
            check_positive("sigma", sigma)?;
            Ok(epsilon / sigma * (sqrt_two_log::<T>(2 * d) + one))
        }
        FamilyBound::Weibull { alpha, lambda } => {
            if !(alpha >= one && alpha.is_finite()) {
                return Err(Error::param(
                    "alpha",
                    format!("Weibull bound requires alpha >= 1 (nondecreasing hazard), got {alpha}"),
                ));
            }
            check_positive("lambda", lambda)?;
            Ok(epsilon * alpha / lambda * (log_d + one).powf((alpha - one) / alpha))
        }
        FamilyBound::ReverseGumbel { lambda } => {
            check_positive("lambda", lambda)?;
            Ok(epsilon / lambda * (one + log_d))
        }
        FamilyBound::Pareto { alpha, lambda } => {
            check_positive("alpha", alpha)?;
            check_positive("lambda", lambda)?;
            Ok(alpha * epsilon / lambda)
        }
        FamilyBound::Gamma { alpha, lambda } => {
            if !(alpha >= one && alpha.is_finite()) {
                return Err(Error::param(
                    "alpha",
                    format!(
                        "Gamma bound requires alpha >= 1; for alpha < 1 the density is unbounded on every neighbourhood of zero (got {alpha})"
                    ),
                ));
            }
            check_positive("lambda", lambda)?;
            Ok(epsilon / lambda)
        }
        FamilyBound::ChiSquared { p } => {
            if p < 2 {
                return Err(Error::param(
                    "p",
                    format!("chi-squared bound requires p >= 2 so that alpha = p/2 >= 1, got {p}"),
                ));
            }
            closed_form_bound(
                FamilyBound::Gamma {
                    alpha: lit::<T>(p as f64) / lit(2.0),
                    lambda: lit(2.0),
                },
                d,
                epsilon,
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GmmBranch {
    Mixture,
    Conditioning,
}

/// Both branches of the Gaussian-mixture bound and the active minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GmmBound<T> {
    pub value: T,
    pub mixture_branch: T,
    pub conditioning_branch: T,
    pub active: GmmBranch,
}

impl<T: Scalar> GmmBound<T> {
    pub fn to_result(&self) -> BoundResult<T> {
        let regime = if self.value >= T::one() {
            Regime::Vacuous
        } else {
            match self.active {
                GmmBranch::Mixture => Regime::MixtureBranch,
                GmmBranch::Conditioning => Regime::ConditioningBranch,
            }
        };
        BoundResult {
            value: self.value.min(T::one()),
            regime,
            formula_id: FormulaId::Gmm,
            side: Side::Upper,
        }
    }
}

/// Checks the scale-mixture constraints: p_k ∈ (0, 1] summing to 1, σ₁ = 1 and 0 < σ_k ≤ 1.
pub fn check_gmm_parameters<T: Scalar>(p: &[T], sigma: &[T]) -> Result<()> {
    check_weights("p", p)?;
    if let Some(w) = p.iter().find(|w| !(**w > T::zero())) {
        return Err(Error::param("p", format!("entries must lie in (0, 1], got {w}")));
    }
    if p.len() != sigma.len() {
        return Err(Error::param(
            "sigma",
            format!("{} sigmas for {} weights", sigma.len(), p.len()),
        ));
    }
    if (sigma[0] - T::one()).abs() > T::tolerance(1e-12) {
        return Err(Error::param("sigma", format!("sigma_1 must equal 1, got {}", sigma[0])));
    }
    if let Some(s) = sigma.iter().find(|s| !(**s > T::zero() && **s <= T::one())) {
        return Err(Error::param("sigma", format!("entries must lie in (0, 1], got {s}")));
    }
    Ok(())
}

/// Minimum of (ε/p₁)(√(2 ln d) + 2Σ_k p_k/σ_k) and (ε/σ_min)(√(2 ln d) + 2).
pub fn gmm_bound<T: Scalar>(p: &[T], sigma: &[T], d: usize, epsilon: T) -> Result<GmmBound<T>> {
    check_gmm_parameters(p, sigma)?;
    check_dim_eps(d, epsilon)?;
    let root = sqrt_two_log::<T>(d);
    let inverse_scale_sum = p.iter().zip(sigma).fold(T::zero(), |acc, (&w, &s)| acc + w / s);
    let mixture_branch = epsilon / p[0] * (root + lit::<T>(2.0) * inverse_scale_sum);
    let sigma_min = sigma.iter().copied().fold(T::infinity(), T::min);
    let conditioning_branch = nazarov_bound(sigma_min, d, epsilon)?;
    let (value, active) = if mixture_branch <= conditioning_branch {
        (mixture_branch, GmmBranch::Mixture)
    } else {
        (conditioning_branch, GmmBranch::Conditioning)
    };
    Ok(GmmBound {
        value,
        mixture_branch,
        conditioning_branch,
        active,
    })
}

/// x* = F⁻¹(1 − 1/d), where the hazard h(x*) equals d·f(x*).
pub fn hazard_crossing<T: Scalar>(marginal: &MarginalDistribution<T>, d: usize) -> Result<T> {
    if d == 0 {
        return Err(Error::param("d", "dimension must be >= 1"));
    }
    if d == 1 {
        return Ok(marginal.support().0);
    }
    marginal.quantile(T::one() - from_usize::<T>(d).recip())
}

/// sup over x ≥ 0 of min(x + 1, d·φ(x)).
///
/// The first term increases and the second decreases, so the supremum sits at their
/// crossing, or at x = 0 when d·φ(0) ≤ 1.
pub fn sup_min_envelope<T: Scalar>(d: usize) -> Result<T> {
    if d == 0 {
        return Err(Error::param("d", "dimension must be >= 1"));
    }
    let df = from_usize::<T>(d);
    let at_zero = df * normal_pdf(T::zero());
    if at_zero <= T::one() {
        return Ok(at_zero);
    }
    let gap = |x: T| x + T::one() - df * normal_pdf(x);
    let mut lo = T::zero();
    let mut hi = sqrt_two_log::<T>(d);
    let tol = T::tolerance(1e-10);
    let half = lit::<T>(0.5);
    while hi - lo > tol {
        let mid = (lo + hi) * half;
        if gap(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + T::one()).min(df * normal_pdf(lo)))
}

/// Bound selectors, named as on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Thm1Upper,
    Thm1Lower,
    Thm2,
    Nazarov,
    ClosedForm,
    Gmm,
}

impl BoundKind {
    pub const ALL: [BoundKind; 6] = [
        BoundKind::Thm1Upper,
        BoundKind::Thm1Lower,
        BoundKind::Thm2,
        BoundKind::Nazarov,
        BoundKind::ClosedForm,
        BoundKind::Gmm,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Thm1Upper => "thm1-upper",
            BoundKind::Thm1Lower => "thm1-lower",
            BoundKind::Thm2 => "thm2",
            BoundKind::Nazarov => "nazarov",
            BoundKind::ClosedForm => "closed-form",
            BoundKind::Gmm => "gmm",
        }
    }

    pub fn side(&self) -> Side {
        match self {
            BoundKind::Thm1Lower => Side::Lower,
            _ => Side::Upper,
        }
    }

    /// Evaluates the selected bound at `q`.
    ///
    /// `nazarov` needs a Gaussian marginal and `gmm` a Gaussian mixture; `closed-form`
    /// and `nazarov` ignore `q.x` because they hold uniformly in the location.
    pub fn evaluate<T: Scalar>(&self, q: &BoundQuery<T>) -> Result<BoundResult<T>> {
        Ok(match self {
            BoundKind::Thm1Upper => thm1_upper(q),
            BoundKind::Thm1Lower => thm1_lower(q),
            BoundKind::Thm2 => thm2_upper(q),
            BoundKind::Nazarov => match q.marginal.family() {
                Family::Gaussian { sigma, .. } => {
                    BoundResult::from_rate(nazarov_bound(*sigma, q.d, q.epsilon)?, FormulaId::Nazarov)
                }
                _ => {
                    return Err(Error::param(
                        "marginal",
                        format!("nazarov bound needs a gaussian marginal, got {}", q.marginal.name()),
                    ))
                }
            },
            BoundKind::ClosedForm => {
                let family = FamilyBound::for_marginal(&q.marginal)?;
                BoundResult::from_rate(closed_form_bound(family, q.d, q.epsilon)?, family.formula_id())
            }
            BoundKind::Gmm => match q.marginal.family() {
                Family::GaussianMixture { weights, sigmas } => gmm_bound(weights, sigmas, q.d, q.epsilon)?.to_result(),
                _ => {
                    return Err(Error::param(
                        "marginal",
                        format!("gmm bound needs a gaussian_mixture marginal, got {}", q.marginal.name()),
                    ))
                }
            },
        })
    }
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown bound kind `{s}`; expected one of thm1-upper, thm1-lower, thm2, nazarov, closed-form, gmm"
                ))
            })
    }
}
