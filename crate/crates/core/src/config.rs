//! JSON specifications for marginals, diagonals and inference scenarios.
//!
//! Marginals are tagged by `family`, diagonals by `kind`:
//!
//! ```json
//! {"family": "weibull", "alpha": 2.0, "lambda": 1.0}
//! {"family": "gaussian_mixture", "p": [0.5, 0.5], "sigma": [1.0, 0.2]}
//! {"kind": "delta_up", "d": 3, "u": 0.5}
//! {"kind": "archimedean", "d": 10, "family": "clayton", "theta": 2.0}
//! ```
//!
//! Unknown fields are rejected so that a misspelt parameter is reported by name
//! instead of silently taking a default.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::diagonals::{ArchimedeanGenerator, DiagonalSection, Knots};
use crate::error::{Error, Result};
use crate::inference::{CouplingProfile, DistortionMode, InferenceScenario};
use crate::marginals::{Family, MarginalDistribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalSpec {
    Uniform01,
    Gaussian {
        #[serde(default)]
        mu: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    Weibull {
        alpha: f64,
        lambda: f64,
    },
    ReverseGumbel {
        lambda: f64,
    },
    Pareto {
        alpha: f64,
        lambda: f64,
    },
    Gamma {
        alpha: f64,
        lambda: f64,
    },
    ChiSquared {
        p: u32,
    },
    GaussianMixture {
        p: Vec<f64>,
        sigma: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl MarginalSpec {
    pub fn build(&self) -> Result<MarginalDistribution<f64>> {
        match self {
            MarginalSpec::Uniform01 => Ok(MarginalDistribution::uniform01()),
            MarginalSpec::Gaussian { mu, sigma } => MarginalDistribution::gaussian(*mu, *sigma),
            MarginalSpec::Weibull { alpha, lambda } => MarginalDistribution::weibull(*alpha, *lambda),
            MarginalSpec::ReverseGumbel { lambda } => MarginalDistribution::reverse_gumbel(*lambda),
            MarginalSpec::Pareto { alpha, lambda } => MarginalDistribution::pareto(*alpha, *lambda),
            MarginalSpec::Gamma { alpha, lambda } => MarginalDistribution::gamma(*alpha, *lambda),
            MarginalSpec::ChiSquared { p } => MarginalDistribution::chi_squared(*p),
            MarginalSpec::GaussianMixture { p, sigma } => MarginalDistribution::gaussian_mixture(p.clone(), sigma.clone()),
        }
    }
}

impl From<&MarginalDistribution<f64>> for MarginalSpec {
    fn from(m: &MarginalDistribution<f64>) -> Self {
        match m.family() {
            Family::Uniform01 => MarginalSpec::Uniform01,
            Family::Gaussian { mu, sigma } => MarginalSpec::Gaussian { mu: *mu, sigma: *sigma },
            Family::Weibull { alpha, lambda } => MarginalSpec::Weibull {
                alpha: *alpha,
                lambda: *lambda,
            },
            Family::ReverseGumbel { lambda } => MarginalSpec::ReverseGumbel { lambda: *lambda },
            Family::Pareto { alpha, lambda } => MarginalSpec::Pareto {
                alpha: *alpha,
                lambda: *lambda,
            },
            Family::Gamma { alpha, lambda } => MarginalSpec::Gamma {
                alpha: *alpha,
                lambda: *lambda,
            },
            Family::GaussianMixture { weights, sigmas } => MarginalSpec::GaussianMixture {
                p: weights.clone(),
                sigma: sigmas.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorName {
    Clayton,
    Frank,
    GumbelHougaard,
    ExpCounterexample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiagonalSpec {
    Independence {
        d: usize,
    },
    FrechetHoeffdingUpper {
        d: usize,
    },
    FrechetHoeffdingLower {
        d: usize,
    },
    DeltaUp {
        d: usize,
        u: f64,
    },
    DeltaLo {
        d: usize,
        u: f64,
    },
    DeltaConvexMax {
        d: usize,
        u: f64,
    },
    Archimedean {
        d: usize,
        family: GeneratorName,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
    },
    GaussianEquicorr {
        d: usize,
        rho: f64,
    },
    /// Components must share the mixture's dimension.
    Mixture {
        d: usize,
        weights: Vec<f64>,
        components: Vec<DiagonalSpec>,
    },
    /// Knots given inline as `[[t, value], ...]` or read from a two-column CSV file.
    Tabulated {
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        knots: Option<Vec<(f64, f64)>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
    },
}

impl DiagonalSpec {
    pub fn dim(&self) -> usize {
        match self {
            DiagonalSpec::Independence { d }
            | DiagonalSpec::FrechetHoeffdingUpper { d }
            | DiagonalSpec::FrechetHoeffdingLower { d }
            | DiagonalSpec::DeltaUp { d, .. }
            | DiagonalSpec::DeltaLo { d, .. }
            | DiagonalSpec::DeltaConvexMax { d, .. }
            | DiagonalSpec::Archimedean { d, .. }
            | DiagonalSpec::GaussianEquicorr { d, .. }
            | DiagonalSpec::Mixture { d, .. }
            | DiagonalSpec::Tabulated { d, .. } => *d,
        }
    }

    /// The same construction in dimension `new_d`, applied to mixture components too.
    pub fn with_dim(&self, new_d: usize) -> Self {
        let mut spec = self.clone();
        match &mut spec {
            DiagonalSpec::Independence { d }
            | DiagonalSpec::FrechetHoeffdingUpper { d }
            | DiagonalSpec::FrechetHoeffdingLower { d }
            | DiagonalSpec::DeltaUp { d, .. }
            | DiagonalSpec::DeltaLo { d, .. }
            | DiagonalSpec::DeltaConvexMax { d, .. }
            | DiagonalSpec::Archimedean { d, .. }
            | DiagonalSpec::GaussianEquicorr { d, .. }
            | DiagonalSpec::Tabulated { d, .. } => *d = new_d,
            DiagonalSpec::Mixture { d, components, .. } => {
                *d = new_d;
                for c in components.iter_mut() {
                    *c = c.with_dim(new_d);
                }
            }
        }
        spec
    }

    pub fn generator(&self) -> Result<Option<ArchimedeanGenerator<f64>>> {
        let DiagonalSpec::Archimedean { family, theta, .. } = self else {
            return Ok(None);
        };
        let required = || theta.ok_or_else(|| Error::param("theta", "required for this generator family"));
        let generator = match family {
            GeneratorName::Clayton => ArchimedeanGenerator::clayton(required()?)?,
            GeneratorName::Frank => ArchimedeanGenerator::frank(required()?)?,
            GeneratorName::GumbelHougaard => ArchimedeanGenerator::gumbel_hougaard(required()?)?,
            GeneratorName::ExpCounterexample => {
                if theta.is_some() {
                    return Err(Error::param("theta", "exp_counterexample takes no parameter"));
                }
                ArchimedeanGenerator::exp_counterexample()
            }
        };
        Ok(Some(generator))
    }

    pub fn build(&self) -> Result<DiagonalSection<f64>> {
        match self {
            DiagonalSpec::Independence { d } => DiagonalSection::independence(*d),
            DiagonalSpec::FrechetHoeffdingUpper { d } => DiagonalSection::frechet_hoeffding_upper(*d),
            DiagonalSpec::FrechetHoeffdingLower { d } => DiagonalSection::frechet_hoeffding_lower(*d),
            DiagonalSpec::DeltaUp { d, u } => DiagonalSection::delta_up(*d, *u),
            DiagonalSpec::DeltaLo { d, u } => DiagonalSection::delta_lo(*d, *u),
            DiagonalSpec::DeltaConvexMax { d, u } => DiagonalSection::delta_convex_max(*d, *u),
            DiagonalSpec::Archimedean { d, .. } => {
                let generator = self.generator()?.expect("archimedean spec has a generator");
                DiagonalSection::archimedean(*d, generator)
            }
            DiagonalSpec::GaussianEquicorr { d, rho } => DiagonalSection::gaussian_equicorr(*d, *rho),
            DiagonalSpec::Mixture { d, weights, components } => {
                let built = components.iter().map(DiagonalSpec::build).collect::<Result<Vec<_>>>()?;
                DiagonalSection::mixture(*d, weights.clone(), built)
            }
            DiagonalSpec::Tabulated { d, knots, path } => {
                let knots = match (knots, path) {
                    (Some(k), None) => Knots::new(k.clone())?,
                    (None, Some(p)) => Knots::from_csv_path(p)?,
                    _ => {
                        return Err(Error::param(
                            "knots",
                            "a tabulated diagonal needs exactly one of `knots` or `path`",
                        ))
                    }
                };
                DiagonalSection::tabulated(*d, knots)
            }
        }
    }
}

/// A coupling table `[[epsilon, p], ...]` plus the quantities of a size-distortion run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub diagonal: DiagonalSpec,
    pub marginal: MarginalSpec,
    pub alpha: f64,
    pub coupling: Vec<(f64, f64)>,
    pub epsilon_grid: Vec<f64>,
    #[serde(default)]
    pub mode: DistortionMode,
}

impl ScenarioSpec {
    pub fn build(&self) -> Result<InferenceScenario<f64>> {
        InferenceScenario::new(
            self.diagonal.build()?,
            self.marginal.build()?,
            self.alpha,
            CouplingProfile::new(self.coupling.clone())?,
            self.epsilon_grid.clone(),
        )
    }
}

/// Inputs of the factor-model comparison; `x_grid` defaults to {0, 0.5, 1, 2, 3}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorModelSpec {
    pub p: Vec<f64>,
    pub sigma: Vec<f64>,
    pub d: usize,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_grid: Option<Vec<f64>>,
}

/// Parses JSON, prefixing serde's message (which names the offending field) with `what`.
pub fn parse_json<'a, S: Deserialize<'a>>(what: &str, text: &'a str) -> Result<S> {
    serde_json::from_str(text).map_err(|e| Error::Usage(format!("{what}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginal_specs_parse() {
        let w: MarginalSpec = parse_json("marginal", r#"{"family":"weibull","alpha":2.0,"lambda":1.0}"#).unwrap();
        assert!((w.build().unwrap().cdf(1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let m: MarginalSpec =
            parse_json("marginal", r#"{"family":"gaussian_mixture","p":[0.5,0.5],"sigma":[1,0.2]}"#).unwrap();
        assert_eq!(m.build().unwrap().name(), "gaussian_mixture");
        let g: MarginalSpec = parse_json("marginal", r#"{"family":"gaussian"}"#).unwrap();
        assert_eq!(g, MarginalSpec::Gaussian { mu: 0.0, sigma: 1.0 });
    }

    #[test]
    fn malformed_marginals_name_the_field() {
        let e = parse_json::<MarginalSpec>("marginal", r#"{"family":"weibull","alpha":2.0}"#).unwrap_err();
        assert!(e.to_string().contains("lambda"), "{e}");
        let e = parse_json::<MarginalSpec>("marginal", r#"{"family":"weibull","alpha":2,"lambda":1,"beta":3}"#)
            .unwrap_err();
        assert!(e.to_string().contains("beta"), "{e}");
        let e = parse_json::<MarginalSpec>("marginal", r#"{"family":"cauchy"}"#).unwrap_err();
        assert!(e.to_string().contains("cauchy"), "{e}");
    }

    #[test]
    fn diagonal_specs_round_trip() {
        let texts = [
            r#"{"kind":"delta_up","d":3,"u":0.5}"#,
            r#"{"kind":"archimedean","d":4,"family":"gumbel_hougaard","theta":2.0}"#,
            r#"{"kind":"archimedean","d":2,"family":"exp_counterexample"}"#,
            r#"{"kind":"mixture","d":2,"weights":[0.5,0.5],"components":[{"kind":"independence","d":2},{"kind":"frechet_hoeffding_upper","d":2}]}"#,
            r#"{"kind":"tabulated","d":2,"knots":[[0,0],[0.5,0.25],[1,1]]}"#,
        ];
        for text in texts {
            let spec: DiagonalSpec = parse_json("diagonal", text).unwrap();
            spec.build().unwrap();
            let again: DiagonalSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
            assert_eq!(again, spec);
        }
    }

    #[test]
    fn with_dim_reaches_components() {
        let spec: DiagonalSpec = parse_json(
            "diagonal",
            r#"{"kind":"mixture","d":2,"weights":[1],"components":[{"kind":"independence","d":2}]}"#,
        )
        .unwrap();
        let wide = spec.with_dim(7).build().unwrap();
        assert_eq!(wide.dim(), 7);
        assert!((wide.eval(0.5).unwrap() - 0.5f64.powi(7)).abs() < 1e-15);
    }

    #[test]
    fn generator_parameter_errors() {
        let missing: DiagonalSpec = parse_json("diagonal", r#"{"kind":"archimedean","d":2,"family":"clayton"}"#).unwrap();
        assert!(matches!(missing.build(), Err(Error::Parameter { name: "theta", .. })));
        let both: DiagonalSpec = parse_json("diagonal", r#"{"kind":"tabulated","d":2}"#).unwrap();
        assert!(both.build().is_err());
    }

    #[test]
    fn tabulated_from_csv_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("knots.csv");
        std::fs::write(&path, "t,delta\n0,0\n0.5,0.25\n1,1\n").unwrap();
        let spec = DiagonalSpec::Tabulated {
            d: 2,
            knots: None,
            path: Some(path),
        };
        assert!((spec.build().unwrap().eval(0.75).unwrap() - 0.625).abs() < 1e-15);
    }

    #[test]
    fn marginal_spec_echo() {
        let m = MarginalDistribution::gaussian_mixture(vec![0.3, 0.7], vec![1.0, 0.5]).unwrap();
        assert_eq!(MarginalSpec::from(&m).build().unwrap(), m);
    }
}
