//! One-dimensional marginal families.
//!
//! Every family is continuous, so the generalized inverse `quantile` is a true
//! inverse on the interior of the support. Infinite endpoints are IEEE
//! infinities.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Scalar};
use crate::special::{gamma_p, gamma_q, ln_gamma, normal_cdf, normal_pdf, normal_quantile, normal_sf};

/// Parametrization of a marginal law.
#[derive(Debug, Clone, PartialEq)]
pub enum Family<T> {
    /// Uniform on [0, 1].
    Uniform01,
    /// N(mu, sigma²).
    Gaussian { mu: T, sigma: T },
    /// F(x) = 1 − exp(−(x/λ)^α) on x ≥ 0.
    Weibull { alpha: T, lambda: T },
    /// F(x) = 1 − exp(−e^{x/λ}) on ℝ.
    ReverseGumbel { lambda: T },
    /// F(x) = 1 − (λ/x)^α on x ≥ λ.
    Pareto { alpha: T, lambda: T },
    /// Shape α, scale λ.
    Gamma { alpha: T, lambda: T },
    /// Σ p_k N(0, σ_k²).
    GaussianMixture { weights: Vec<T>, sigmas: Vec<T> },
}

/// A validated marginal distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalDistribution<T> {
    family: Family<T>,
}

fn positive<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

fn shape_at_least_one<T: Scalar>(name: &'static str, v: T, why: &str) -> Result<()> {
    if v >= T::one() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be >= 1 ({why}), got {v}")))
    }
}

/// Checks a probability vector: nonnegative entries summing to 1 within 1e-12.
pub(crate) fn check_weights<T: Scalar>(name: &'static str, weights: &[T]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::param(name, "must be nonempty"));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= T::zero()) || !w.is_finite()) {
        return Err(Error::param(name, format!("entries must be >= 0, got {w}")));
    }
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    if (total - T::one()).abs() > T::tolerance(1e-12) {
        return Err(Error::param(name, format!("must sum to 1, got {total}")));
    }
    Ok(())
}

/// Starting point for the quantile of Σ p_k N(0, σ_k²).
///
/// In the tails one component carries nearly all of the remaining mass, so the
/// outermost of the single-component solutions p_k·Φ̄(x/σ_k) = min(t, 1 − t) is
/// already close to the root.
fn mixture_tail_guess<T: Scalar>(weights: &[T], sigmas: &[T], t: T) -> T {
    let tail = t.min(T::one() - t);
    let outer = weights
        .iter()
        .zip(sigmas)
        .filter(|(&p, _)| tail < p)
        .map(|(&p, &s)| -s * normal_quantile(tail / p))
        .fold(T::zero(), T::max);
    if t > lit(0.5) {
        outer
    } else {
        -outer
    }
}

impl<T: Scalar> MarginalDistribution<T> {
    pub fn new(family: Family<T>) -> Result<Self> {
        match &family {
            Family::Uniform01 => {}
            Family::Gaussian { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::param("mu", "must be finite"));
                }
                positive("sigma", *sigma)?;
            }
            Family::Weibull { alpha, lambda } => {
                shape_at_least_one("alpha", *alpha, "Weibull bounds need an increasing-or-constant hazard")?;
                positive("lambda", *lambda)?;
            }
            Family::ReverseGumbel { lambda } => positive("lambda", *lambda)?,
            Family::Pareto { alpha, lambda } => {
                positive("alpha", *alpha)?;
                positive("lambda", *lambda)?;
            }
            Family::Gamma { alpha, lambda } => {
                shape_at_least_one(
                    "alpha",
                    *alpha,
                    "for alpha < 1 the density is unbounded on every neighbourhood of zero",
                )?;
                positive("lambda", *lambda)?;
            }
            Family::GaussianMixture { weights, sigmas } => {
                check_weights("p", weights)?;
                if weights.len() != sigmas.len() {
                    return Err(Error::param(
                        "sigma",
                        format!("{} sigmas for {} weights", sigmas.len(), weights.len()),
                    ));
                }
                for &s in sigmas {
                    positive("sigma", s)?;
                }
            }
        }
        Ok(Self { family })
    }

    pub fn uniform01() -> Self {
        Self {
            family: Family::Uniform01,
        }
    }

    pub fn standard_normal() -> Self {
        Self {
            family: Family::Gaussian {
                mu: T::zero(),
                sigma: T::one(),
            },
        }
    }

    pub fn gaussian(mu: T, sigma: T) -> Result<Self> {
        Self::new(Family::Gaussian { mu, sigma })
    }

    pub fn weibull(alpha: T, lambda: T) -> Result<Self> {
        Self::new(Family::Weibull { alpha, lambda })
    }

    pub fn reverse_gumbel(lambda: T) -> Result<Self> {
        Self::new(Family::ReverseGumbel { lambda })
    }

    pub fn pareto(alpha: T, lambda: T) -> Result<Self> {
        Self::new(Family::Pareto { alpha, lambda })
    }

    pub fn gamma(alpha: T, lambda: T) -> Result<Self> {
        Self::new(Family::Gamma { alpha, lambda })
    }

    /// χ²_p as Gamma(p/2, 2).
    pub fn chi_squared(p: u32) -> Result<Self> {
        Self::gamma(lit::<T>(p as f64) / lit(2.0), lit(2.0))
    }

    pub fn gaussian_mixture(weights: Vec<T>, sigmas: Vec<T>) -> Result<Self> {
        Self::new(Family::GaussianMixture { weights, sigmas })
    }

    pub fn family(&self) -> &Family<T> {
        &self.family
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            Family::Uniform01 => "uniform01",
            Family::Gaussian { .. } => "gaussian",
            Family::Weibull { .. } => "weibull",
            Family::ReverseGumbel { .. } => "reverse_gumbel",
            Family::Pareto { .. } => "pareto",
            Family::Gamma { .. } => "gamma",
            Family::GaussianMixture { .. } => "gaussian_mixture",
        }
    }

    /// Closure of the support, `(lower, upper)`.
    pub fn support(&self) -> (T, T) {
        match &self.family {
            Family::Uniform01 => (T::zero(), T::one()),
            Family::Gaussian { .. } | Family::ReverseGumbel { .. } | Family::GaussianMixture { .. } => {
                (T::neg_infinity(), T::infinity())
            }
            Family::Weibull { .. } | Family::Gamma { .. } => (T::zero(), T::infinity()),
            Family::Pareto { lambda, .. } => (*lambda, T::infinity()),
        }
    }

    pub fn cdf(&self, x: T) -> T {
        match &self.family {
            Family::Uniform01 => x.max(T::zero()).min(T::one()),
            Family::Gaussian { mu, sigma } => normal_cdf((x - *mu) / *sigma),
            Family::Weibull { alpha, lambda } => {
                if x <= T::zero() {
                    T::zero()
                } else {
                    -(-(x / *lambda).powf(*alpha)).exp_m1()
                }
            }
            Family::ReverseGumbel { lambda } => -(-(x / *lambda).exp()).exp_m1(),
            Family::Pareto { alpha, lambda } => {
                if x <= *lambda {
                    T::zero()
                } else {
                    T::one() - (*lambda / x).powf(*alpha)
                }
            }
            Family::Gamma { alpha, lambda } => {
                if x <= T::zero() {
                    T::zero()
                } else {
                    gamma_p(*alpha, x / *lambda).unwrap_or_else(|_| T::nan())
                }
            }
            Family::GaussianMixture { weights, sigmas } => weights
                .iter()
                .zip(sigmas)
                .fold(T::zero(), |acc, (&p, &s)| acc + p * normal_cdf(x / s)),
        }
    }

    /// Survival function 1 − F(x), computed without cancellation where possible.
    pub fn sf(&self, x: T) -> T {
        match &self.family {
            Family::Uniform01 => T::one() - self.cdf(x),
            Family::Gaussian { mu, sigma } => normal_sf((x - *mu) / *sigma),
            Family::Weibull { alpha, lambda } => {
                if x <= T::zero() {
                    T::one()
                } else {
                    (-(x / *lambda).powf(*alpha)).exp()
                }
            }
            Family::ReverseGumbel { lambda } => (-(x / *lambda).exp()).exp(),
            Family::Pareto { alpha, lambda } => {
                if x <= *lambda {
                    T::one()
                } else {
                    (*lambda / x).powf(*alpha)
                }
            }
            Family::Gamma { alpha, lambda } => {
                if x <= T::zero() {
                    T::one()
                } else {
                    gamma_q(*alpha, x / *lambda).unwrap_or_else(|_| T::nan())
                }
            }
            Family::GaussianMixture { weights, sigmas } => weights
                .iter()
                .zip(sigmas)
                .fold(T::zero(), |acc, (&p, &s)| acc + p * normal_sf(x / s)),
        }
    }

    pub fn pdf(&self, x: T) -> T {
        match &self.family {
            Family::Uniform01 => {
                if x >= T::zero() && x <= T::one() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Family::Gaussian { mu, sigma } => normal_pdf((x - *mu) / *sigma) / *sigma,
            Family::Weibull { alpha, lambda } => {
                if x < T::zero() {
                    return T::zero();
                }
                let z = x / *lambda;
                *alpha / *lambda * z.powf(*alpha - T::one()) * (-z.powf(*alpha)).exp()
            }
            Family::ReverseGumbel { lambda } => {
                let z = x / *lambda;
                (z - z.exp()).exp() / *lambda
            }
            Family::Pareto { alpha, lambda } => {
                if x < *lambda {
                    T::zero()
                } else {
                    *alpha / *lambda * (*lambda / x).powf(*alpha + T::one())
                }
            }
            Family::Gamma { alpha, lambda } => {
                if x < T::zero() {
                    return T::zero();
                }
                let z = x / *lambda;
                if z == T::zero() {
                    // α ≥ 1: density at the origin is 1/λ for α = 1, zero otherwise
                    return if *alpha == T::one() {
                        T::one() / *lambda
                    } else {
                        T::zero()
                    };
                }
                ((*alpha - T::one()) * z.ln() - z - ln_gamma(*alpha)).exp() / *lambda
            }
            Family::GaussianMixture { weights, sigmas } => weights
                .iter()
                .zip(sigmas)
                .fold(T::zero(), |acc, (&p, &s)| acc + p * normal_pdf(x / s) / s),
        }
    }

    /// Hazard f(x) / (1 − F(x)).
    pub fn hazard(&self, x: T) -> Result<T> {
        let survival = self.sf(x);
        if !(survival > T::zero()) {
            return Err(Error::BeyondSupport(to_f64(x)));
        }
        Ok(self.pdf(x) / survival)
    }

    /// Generalized inverse inf{s : F(s) ≥ t}.
    pub fn quantile(&self, t: T) -> Result<T> {
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::domain("t", to_f64(t), "[0, 1]"));
        }
        let (lower, upper) = self.support();
        if t == T::zero() {
            return Ok(lower);
        }
        if t == T::one() {
            return Ok(upper);
        }
        Ok(match &self.family {
            Family::Uniform01 => t,
            Family::Gaussian { mu, sigma } => *mu + *sigma * normal_quantile(t),
            Family::Weibull { alpha, lambda } => *lambda * (-(-t).ln_1p()).powf(T::one() / *alpha),
            Family::ReverseGumbel { lambda } => *lambda * (-(-t).ln_1p()).ln(),
            Family::Pareto { alpha, lambda } => *lambda * (T::one() - t).powf(-T::one() / *alpha),
            Family::Gamma { alpha, lambda } => {
                let centre = *alpha * *lambda;
                let scale = alpha.sqrt() * *lambda;
                self.bracketed_inverse(t, centre, scale, centre + scale * normal_quantile(t))?
            }
            Family::GaussianMixture { weights, sigmas } => {
                let var = weights
                    .iter()
                    .zip(sigmas)
                    .fold(T::zero(), |acc, (&p, &s)| acc + p * s * s);
                let guess = mixture_tail_guess(weights, sigmas, t);
                self.bracketed_inverse(t, T::zero(), var.sqrt(), guess)?
            }
        })
    }

    /// Solves F(s) = t inside a bracket grown geometrically from centre ± 12·scale.
    /// Newton steps are taken when they stay inside the bracket, bisection otherwise.
    fn bracketed_inverse(&self, t: T, centre: T, scale: T, guess: T) -> Result<T> {
        let (support_lo, _) = self.support();
        let twelve = lit::<T>(12.0);
        let two = lit::<T>(2.0);

        let mut width = twelve * scale;
        let mut lo = (centre - width).max(support_lo);
        while lo > support_lo && self.cdf(lo) >= t {
            width = width * two;
            lo = (centre - width).max(support_lo);
            if !width.is_finite() {
                return Err(Error::Numeric("quantile bracket diverged below".into()));
            }
        }
        width = twelve * scale;
        let mut hi = centre + width;
        while self.cdf(hi) < t {
            width = width * two;
            hi = centre + width;
            if !hi.is_finite() {
                return Err(Error::Numeric("quantile bracket diverged above".into()));
            }
        }

        // F(x) − t, taken from the survival side in the upper half where 1 − t is exact.
        let upper_half = t > lit(0.5);
        let complement = T::one() - t;
        let excess = |x: T| {
            if upper_half {
                complement - self.sf(x)
            } else {
                self.cdf(x) - t
            }
        };
        let tol = (T::tolerance(1e-12) * t.min(complement)).max(T::min_positive_value());
        let mut x = if guess > lo && guess < hi { guess } else { (lo + hi) / two };
        for _ in 0..400 {
            let gap = excess(x);
            if gap >= T::zero() {
                hi = x;
                if gap <= tol {
                    return Ok(x);
                }
            } else {
                lo = x;
            }
            if hi - lo <= lit::<T>(4.0) * T::epsilon() * hi.abs().max(lo.abs()).max(T::min_positive_value()) {
                return Ok(hi);
            }
            let density = self.pdf(x);
            let mut next = x - gap / density;
            if gap < T::zero() && -gap <= tol {
                // Overshoot slightly so the iterate lands on the F ≥ t side.
                next = x - two * gap / density;
            }
            if !(next > lo && next < hi) {
                next = lo + (hi - lo) / two;
            }
            x = next;
        }
        Ok(hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = MarginalDistribution<f64>;

    fn all_families() -> Vec<M> {
        vec![
            M::uniform01(),
            M::standard_normal(),
            M::gaussian(1.5, 0.3).unwrap(),
            M::weibull(1.0, 1.0).unwrap(),
            M::weibull(2.0, 1.5).unwrap(),
            M::reverse_gumbel(1.0).unwrap(),
            M::reverse_gumbel(0.4).unwrap(),
            M::pareto(3.0, 2.0).unwrap(),
            M::pareto(0.7, 1.0).unwrap(),
            M::gamma(1.0, 1.0).unwrap(),
            M::gamma(2.5, 2.0).unwrap(),
            M::chi_squared(7).unwrap(),
            M::gaussian_mixture(vec![0.5, 0.5], vec![1.0, 0.2]).unwrap(),
            M::gaussian_mixture(vec![0.2, 0.3, 0.5], vec![1.0, 0.05, 0.6]).unwrap(),
        ]
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(M::uniform01().cdf(0.3), 0.3);
        assert_eq!(M::pareto(1.0, 1.0).unwrap().cdf(2.0), 0.5);
        assert!((M::standard_normal().cdf(0.1) - 0.539_827_837_277_029).abs() < 1e-12);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(M::uniform01().quantile(0.3).unwrap(), 0.3);
        assert!((M::pareto(1.0, 1.0).unwrap().quantile(0.5).unwrap() - 2.0).abs() < 1e-15);
        let mix = M::gaussian_mixture(vec![0.5, 0.5], vec![1.0, 0.2]).unwrap();
        assert!(mix.quantile(0.5).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pdf_examples() {
        let n = M::standard_normal();
        assert!((n.pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((M::pareto(3.0, 2.0).unwrap().pdf(2.0) - 1.5).abs() < 1e-15);
        assert!((M::weibull(2.0, 1.0).unwrap().pdf(1.0) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn hazard_examples() {
        assert!((M::reverse_gumbel(1.0).unwrap().hazard(0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((M::pareto(3.0, 1.0).unwrap().hazard(2.0).unwrap() - 1.5).abs() < 1e-14);
        assert!((M::weibull(1.0, 1.0).unwrap().hazard(5.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hazard_beyond_support_is_an_error() {
        assert!(matches!(M::uniform01().hazard(1.0), Err(Error::BeyondSupport(_))));
        assert!(matches!(M::uniform01().hazard(3.0), Err(Error::BeyondSupport(_))));
    }

    #[test]
    fn gaussian_hazard_respects_birnbaum_bound() {
        let n = M::standard_normal();
        for i in 0..2_000 {
            let x = i as f64 * 0.005;
            assert!(n.hazard(x).unwrap() <= x + 1.0);
        }
    }

    #[test]
    fn quantile_endpoints() {
        assert_eq!(M::standard_normal().quantile(0.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(M::standard_normal().quantile(1.0).unwrap(), f64::INFINITY);
        assert_eq!(M::reverse_gumbel(1.0).unwrap().quantile(0.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(M::pareto(2.0, 3.0).unwrap().quantile(0.0).unwrap(), 3.0);
        assert_eq!(M::weibull(2.0, 1.0).unwrap().quantile(1.0).unwrap(), f64::INFINITY);
        assert_eq!(M::uniform01().quantile(1.0).unwrap(), 1.0);
        assert!(matches!(M::uniform01().quantile(1.1), Err(Error::Domain { .. })));
        assert!(matches!(M::uniform01().quantile(-0.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(M::gaussian(0.0, 0.0).is_err());
        assert!(M::gaussian(f64::NAN, 1.0).is_err());
        assert!(M::weibull(0.5, 1.0).is_err());
        assert!(M::gamma(0.5, 1.0).is_err());
        assert!(M::pareto(-1.0, 1.0).is_err());
        assert!(M::reverse_gumbel(0.0).is_err());
        assert!(M::gaussian_mixture(vec![0.5, 0.4], vec![1.0, 1.0]).is_err());
        assert!(M::gaussian_mixture(vec![0.5, 0.5], vec![1.0]).is_err());
        assert!(M::gaussian_mixture(vec![1.5, -0.5], vec![1.0, 1.0]).is_err());
        let err = M::gamma(0.5, 1.0).unwrap_err().to_string();
        assert!(err.contains("unbounded"), "{err}");
    }

    #[test]
    fn round_trip_on_interior_grid() {
        for m in all_families() {
            for i in 1..1_000 {
                let t = i as f64 / 1_000.0;
                let x = m.quantile(t).unwrap();
                assert!((m.cdf(x) - t).abs() < 1e-10, "{} t={t}: F(Q(t)) = {}", m.name(), m.cdf(x));
            }
        }
    }

    #[test]
    fn cdf_and_quantile_are_monotone() {
        for m in all_families() {
            let mut prev_q = f64::NEG_INFINITY;
            for i in 1..2_000 {
                let t = i as f64 / 2_000.0;
                let q = m.quantile(t).unwrap();
                assert!(q >= prev_q, "{} quantile not monotone at {t}", m.name());
                prev_q = q;
            }
            let (lo, hi) = (m.quantile(1e-6).unwrap(), m.quantile(1.0 - 1e-6).unwrap());
            let mut prev = 0.0;
            for i in 0..=2_000 {
                let x = lo + (hi - lo) * i as f64 / 2_000.0;
                let f = m.cdf(x);
                assert!(f >= prev && (0.0..=1.0).contains(&f), "{} cdf at {x}", m.name());
                prev = f;
            }
        }
    }

    #[test]
    fn cdf_limits() {
        for m in all_families() {
            assert!(m.cdf(-1e300) < 1e-12, "{}", m.name());
            assert!(m.cdf(1e300) > 1.0 - 1e-12, "{}", m.name());
        }
    }

    #[test]
    fn hazard_times_survival_is_density() {
        for m in all_families() {
            let (lo, hi) = (m.quantile(1e-4).unwrap(), m.quantile(1.0 - 1e-4).unwrap());
            for i in 0..=500 {
                let x = lo + (hi - lo) * i as f64 / 500.0;
                if m.cdf(x) < 1.0 - 1e-12 {
                    let lhs = m.hazard(x).unwrap() * (1.0 - m.cdf(x));
                    assert!((lhs - m.pdf(x)).abs() < 1e-10, "{} at {x}", m.name());
                }
            }
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        // Composite Simpson between extreme quantiles; the neglected tails hold 2e-9.
        // Positive-support families are integrated in log x to tame heavy tails.
        for m in all_families() {
            let (lo, hi) = (m.quantile(1e-9).unwrap(), m.quantile(1.0 - 1e-9).unwrap());
            let log_scale = lo > 0.0;
            let (a, b) = if log_scale { (lo.ln(), hi.ln()) } else { (lo, hi) };
            let g = |s: f64| if log_scale { m.pdf(s.exp()) * s.exp() } else { m.pdf(s) };
            let n = 200_000;
            let h = (b - a) / n as f64;
            let mut s = g(a) + g(b);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * g(a + i as f64 * h);
            }
            let integral = s * h / 3.0;
            assert!((integral - 1.0).abs() < 1e-6, "{}: {integral}", m.name());
        }
    }

    #[test]
    fn mixture_cdf_is_weighted_component_sum() {
        let weights = vec![0.2, 0.3, 0.5];
        let sigmas = vec![1.0, 0.05, 0.6];
        let mix = M::gaussian_mixture(weights.clone(), sigmas.clone()).unwrap();
        for i in -300..=300 {
            let x = i as f64 * 0.01;
            let direct: f64 = weights
                .iter()
                .zip(&sigmas)
                .map(|(&p, &s)| p * M::gaussian(0.0, s).unwrap().cdf(x))
                .sum();
            assert!((mix.cdf(x) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_with_unit_shape_is_exponential() {
        for &lam in &[0.5, 1.0, 3.0] {
            let m = M::gamma(1.0, lam).unwrap();
            for i in 0..200 {
                let x = i as f64 * 0.1;
                assert!((m.cdf(x) + (-x / lam).exp_m1()).abs() < 1e-14);
                assert!((m.pdf(x) - (-x / lam).exp() / lam).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn chi_squared_two_has_closed_form() {
        let m = M::chi_squared(2).unwrap();
        for i in 0..200 {
            let x = i as f64 * 0.1;
            assert!((m.cdf(x) - (1.0 - (-x / 2.0).exp())).abs() < 1e-14);
        }
    }

    #[test]
    fn single_precision_marginals() {
        let w = MarginalDistribution::<f32>::weibull(2.0, 1.0).unwrap();
        assert!((w.pdf(1.0) - 0.735_758_9).abs() < 1e-6);
        let g = MarginalDistribution::<f32>::gamma(2.0, 1.0).unwrap();
        let q = g.quantile(0.5).unwrap();
        assert!((g.cdf(q) - 0.5).abs() < 1e-5);
    }
}
