//! Diagonal sections Δ(t) = C(t, …, t) of d-dimensional copulas.
//!
//! The diagonal is the distribution function of max U_i on the uniform scale, so
//! every pointwise concentration probability of the maximum is an increment of Δ.

mod checks;
mod generator;
mod tabulated;

pub use checks::{
    ConvexityReport, Lemma1Condition, Lemma1Report, PsiReport, Violation, DEFAULT_GRID, LEMMA1_TOLERANCE,
};
pub use generator::{ArchimedeanGenerator, GeneratorFamily};
pub use tabulated::Knots;

use crate::error::{Error, Result};
use crate::marginals::check_weights;
use crate::scalar::{from_usize, lit, to_f64, Scalar};
use crate::special::{hermite_rule, integrate_adaptive, normal_cdf, normal_quantile};

/// Successive Gauss–Hermite estimates must agree this closely.
const QUADRATURE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum DiagonalKind<T> {
    Independence,
    FrechetHoeffdingUpper,
    FrechetHoeffdingLower,
    /// Maximizes Δ(u + δ) − Δ(u) over all copulas.
    DeltaUp { u: T },
    /// Minimizes Δ(u + δ) − Δ(u) over all copulas.
    DeltaLo { u: T },
    /// Maximizes Δ(u + δ) − Δ(u) over diagonally convex copulas.
    DeltaConvexMax { u: T },
    Archimedean(ArchimedeanGenerator<T>),
    /// One-factor Gaussian copula with common correlation ρ.
    GaussianEquicorr { rho: T },
    Mixture {
        weights: Vec<T>,
        components: Vec<DiagonalSection<T>>,
    },
    Tabulated(Knots<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSection<T> {
    dim: usize,
    kind: DiagonalKind<T>,
}

fn check_probability<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v >= T::zero() && v <= T::one() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must lie in [0, 1], got {v}")))
    }
}

fn check_t<T: Scalar>(t: T) -> Result<()> {
    if t >= T::zero() && t <= T::one() {
        Ok(())
    } else {
        Err(Error::domain("t", to_f64(t), "[0, 1]"))
    }
}

impl<T: Scalar> DiagonalSection<T> {
    pub fn new(dim: usize, kind: DiagonalKind<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("d", "dimension must be >= 1"));
        }
        match &kind {
            DiagonalKind::DeltaUp { u } | DiagonalKind::DeltaLo { u } | DiagonalKind::DeltaConvexMax { u } => {
                check_probability("u", *u)?
            }
            DiagonalKind::GaussianEquicorr { rho } => check_probability("rho", *rho)?,
            DiagonalKind::Mixture { weights, components } => {
                check_weights("weights", weights)?;
                if weights.len() != components.len() {
                    return Err(Error::param(
                        "components",
                        format!("{} components for {} weights", components.len(), weights.len()),
                    ));
                }
                if let Some(c) = components.iter().find(|c| c.dim != dim) {
                    return Err(Error::param(
                        "components",
                        format!("component of dimension {} in a mixture of dimension {dim}", c.dim),
                    ));
                }
            }
            _ => {}
        }
        Ok(Self { dim, kind })
    }

    pub fn independence(d: usize) -> Result<Self> {
        Self::new(d, DiagonalKind::Independence)
    }

    pub fn frechet_hoeffding_upper(d: usize) -> Result<Self> {
        Self::new(d, DiagonalKind::FrechetHoeffdingUpper)
    }

    pub fn frechet_hoeffding_lower(d: usize) -> Result<Self> {
        Self::new(d, DiagonalKind::FrechetHoeffdingLower)
    }

    pub fn delta_up(d: usize, u: T) -> Result<Self> {
        Self::new(d, DiagonalKind::DeltaUp { u })
    }

    pub fn delta_lo(d: usize, u: T) -> Result<Self> {
        Self::new(d, DiagonalKind::DeltaLo { u })
    }

    pub fn delta_convex_max(d: usize, u: T) -> Result<Self> {
        Self::new(d, DiagonalKind::DeltaConvexMax { u })
    }

    pub fn archimedean(d: usize, generator: ArchimedeanGenerator<T>) -> Result<Self> {
        Self::new(d, DiagonalKind::Archimedean(generator))
    }

    pub fn gaussian_equicorr(d: usize, rho: T) -> Result<Self> {
        Self::new(d, DiagonalKind::GaussianEquicorr { rho })
    }

    pub fn mixture(d: usize, weights: Vec<T>, components: Vec<DiagonalSection<T>>) -> Result<Self> {
        Self::new(d, DiagonalKind::Mixture { weights, components })
    }

    pub fn tabulated(d: usize, knots: Knots<T>) -> Result<Self> {
        Self::new(d, DiagonalKind::Tabulated(knots))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &DiagonalKind<T> {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match &self.kind {
            DiagonalKind::Independence => "independence",
            DiagonalKind::FrechetHoeffdingUpper => "frechet_hoeffding_upper",
            DiagonalKind::FrechetHoeffdingLower => "frechet_hoeffding_lower",
            DiagonalKind::DeltaUp { .. } => "delta_up",
            DiagonalKind::DeltaLo { .. } => "delta_lo",
            DiagonalKind::DeltaConvexMax { .. } => "delta_convex_max",
            DiagonalKind::Archimedean(_) => "archimedean",
            DiagonalKind::GaussianEquicorr { .. } => "gaussian_equicorr",
            DiagonalKind::Mixture { .. } => "mixture",
            DiagonalKind::Tabulated(_) => "tabulated",
        }
    }

    fn d(&self) -> T {
        from_usize(self.dim)
    }

    /// Left end a = min(u, (d − 1)/d) of the rising stretch used by the extremal diagonals.
    fn extremal_start(&self, u: T) -> T {
        let d = self.d();
        u.min((d - T::one()) / d)
    }

    /// Slope min(1/(1 − u), d) of the convex extremal diagonal.
    fn convex_slope(&self, u: T) -> T {
        let d = self.d();
        if u >= T::one() {
            d
        } else {
            (T::one() / (T::one() - u)).min(d)
        }
    }

    /// Δ(t).
    pub fn eval(&self, t: T) -> Result<T> {
        check_t(t)?;
        let d = self.d();
        let one = T::one();
        Ok(match &self.kind {
            DiagonalKind::Independence => t.powi(self.dim as i32),
            DiagonalKind::FrechetHoeffdingUpper => t,
            DiagonalKind::FrechetHoeffdingLower => (d * t - d + one).max(T::zero()),
            DiagonalKind::DeltaUp { u } => {
                if self.dim == 1 {
                    return Ok(t);
                }
                let a = self.extremal_start(*u);
                let b = d * *u / (d - one);
                if t > b.min(one) {
                    t
                } else if t > a {
                    d * (t - a)
                } else {
                    T::zero()
                }
            }
            DiagonalKind::DeltaLo { u } => {
                let c = (d + *u - one) / d;
                if t <= *u {
                    t
                } else if t <= c {
                    *u
                } else {
                    one - d + d * t
                }
            }
            DiagonalKind::DeltaConvexMax { u } => {
                let a = self.extremal_start(*u);
                if t > a {
                    ((t - a) * self.convex_slope(*u)).min(one)
                } else {
                    T::zero()
                }
            }
            DiagonalKind::Archimedean(g) => g.diagonal(self.dim, t),
            DiagonalKind::GaussianEquicorr { rho } => self.gaussian_equicorr_eval(*rho, t)?,
            DiagonalKind::Mixture { weights, components } => {
                let mut acc = T::zero();
                for (w, c) in weights.iter().zip(components) {
                    acc = acc + *w * c.eval(t)?;
                }
                acc
            }
            DiagonalKind::Tabulated(knots) => knots.eval(t),
        })
    }

    /// E_W[Φ((Φ⁻¹(t) − √ρ·W)/√(1 − ρ))^d] with W standard normal.
    fn gaussian_equicorr_eval(&self, rho: T, t: T) -> Result<T> {
        if t == T::zero() || t == T::one() || self.dim == 1 {
            return Ok(t);
        }
        if rho == T::zero() {
            return Ok(t.powi(self.dim as i32));
        }
        if rho == T::one() {
            return Ok(t);
        }
        let z = normal_quantile(t);
        let loading = rho.sqrt();
        let spread = (T::one() - rho).sqrt();
        let n = self.dim as i32;
        let integrand = |w: T| normal_cdf((z - loading * w) / spread).powi(n);
        let tol = T::tolerance(QUADRATURE_TOLERANCE);
        let mut previous = hermite_rule(0).expect_standard_normal(integrand);
        for level in 1..3 {
            let current = hermite_rule(level).expect_standard_normal(integrand);
            if (current - previous).abs() < tol {
                return Ok(current.max(T::zero()).min(t));
            }
            previous = current;
        }
        // The Hermite nodes are too sparse when the mass of the integrand sits far in
        // the tail of W (small t with strong correlation); integrate adaptively instead.
        let twelve = lit::<T>(12.0);
        let density_weighted = |w: T| crate::special::normal_pdf(w) * integrand(w);
        integrate_adaptive(density_weighted, -twelve, twelve, 24, tol * lit(1e-3), tol * lit(1e-2))
            .map(|v| v.max(T::zero()).min(t))
            .map_err(|e| {
                Error::Numeric(format!(
                    "equicorrelated Gaussian diagonal at t = {t}, rho = {rho}, d = {}: {e}",
                    self.dim
                ))
            })
    }

    /// Δ(u + δ) − Δ(u), the probability that the uniform-scale maximum lands in (u, u + δ].
    pub fn increment(&self, u: T, delta: T) -> Result<T> {
        check_t(u)?;
        if !(delta >= T::zero()) {
            return Err(Error::domain("delta", to_f64(delta), "[0, 1 - u]"));
        }
        let upper = u + delta;
        let slack = lit::<T>(4.0) * T::epsilon();
        if upper > T::one() + slack {
            return Err(Error::domain("delta", to_f64(delta), "[0, 1 - u]"));
        }
        Ok(self.eval(upper.min(T::one()))? - self.eval(u)?)
    }

    /// Generalized inverse inf{s ∈ [0, 1] : Δ(s) ≥ t}.
    pub fn inverse(&self, t: T) -> Result<T> {
        check_t(t)?;
        let d = self.d();
        let one = T::one();
        if t == T::zero() {
            return Ok(T::zero());
        }
        Ok(match &self.kind {
            DiagonalKind::Independence => t.powf(d.recip()),
            DiagonalKind::FrechetHoeffdingUpper => t,
            DiagonalKind::FrechetHoeffdingLower => (t + d - one) / d,
            DiagonalKind::DeltaUp { u } => {
                if self.dim == 1 {
                    return Ok(t);
                }
                let a = self.extremal_start(*u);
                let b = (d * *u / (d - one)).min(one);
                if t <= d * (b - a) {
                    (a + t / d).min(one)
                } else {
                    t
                }
            }
            DiagonalKind::DeltaLo { u } => {
                if t <= *u {
                    t
                } else {
                    (t + d - one) / d
                }
            }
            DiagonalKind::DeltaConvexMax { u } => {
                (self.extremal_start(*u) + t / self.convex_slope(*u)).min(one)
            }
            DiagonalKind::Archimedean(g) => g.diagonal_inverse(self.dim, t),
            DiagonalKind::Tabulated(knots) => knots.inverse(t),
            DiagonalKind::GaussianEquicorr { rho } if *rho == T::zero() => t.powf(d.recip()),
            DiagonalKind::GaussianEquicorr { rho } if *rho == T::one() || self.dim == 1 => t,
            DiagonalKind::GaussianEquicorr { .. } | DiagonalKind::Mixture { .. } => self.bisect_inverse(t)?,
        })
    }

    /// Bisection keeping Δ(hi) ≥ t, run until the bracket is narrower than 1e-12.
    fn bisect_inverse(&self, t: T) -> Result<T> {
        let mut lo = T::zero();
        let mut hi = T::one();
        let width = T::tolerance(1e-12);
        let half = lit::<T>(0.5);
        while hi - lo > width {
            let mid = (lo + hi) * half;
            if self.eval(mid)? >= t {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Piecewise-linear interpolant of Δ on `points` equally spaced knots.
    pub fn tabulate(&self, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::param("points", "need at least two knots"));
        }
        let last = from_usize::<T>(points - 1);
        let mut knots = Vec::with_capacity(points);
        for i in 0..points {
            let t = if i + 1 == points { T::one() } else { from_usize::<T>(i) / last };
            knots.push((t, self.eval(t)?));
        }
        // Quadrature noise can leave adjacent values out of order by a few ulps.
        for i in 1..knots.len() {
            if knots[i].1 < knots[i - 1].1 {
                knots[i].1 = knots[i - 1].1;
            }
        }
        Self::tabulated(self.dim, Knots::new(knots)?)
    }

    /// True when the diagonal is convex for structural reasons, without a grid check.
    pub fn is_convex_by_construction(&self) -> Option<bool> {
        match &self.kind {
            DiagonalKind::Independence
            | DiagonalKind::FrechetHoeffdingUpper
            | DiagonalKind::FrechetHoeffdingLower
            | DiagonalKind::DeltaConvexMax { .. } => Some(true),
            DiagonalKind::GaussianEquicorr { .. } => Some(true),
            DiagonalKind::DeltaUp { .. } | DiagonalKind::DeltaLo { .. } if self.dim == 1 => Some(true),
            DiagonalKind::DeltaUp { .. } | DiagonalKind::DeltaLo { .. } => Some(false),
            DiagonalKind::Mixture { components, .. } => {
                if components.iter().all(|c| c.is_convex_by_construction() == Some(true)) {
                    Some(true)
                } else {
                    None
                }
            }
            DiagonalKind::Archimedean(_) | DiagonalKind::Tabulated(_) => None,
        }
    }
}
