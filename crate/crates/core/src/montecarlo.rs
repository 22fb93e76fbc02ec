//! Seeded Monte Carlo sampling of max(X_1, …, X_d) and empirical checks of bounds.
//!
//! Worker `i` draws from its own ChaCha8 stream seeded by a SplitMix64 mix of
//! `(seed, i)`. Worker outputs are concatenated in worker order, so a run is a
//! pure function of `(n, seed, workers)`.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::bounds::{BoundResult, Side};
use crate::diagonals::{DiagonalKind, DiagonalSection, Knots};
use crate::error::{Error, Result};
use crate::marginals::MarginalDistribution;
use crate::special::normal_cdf;

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;
/// Default sample count.
pub const DEFAULT_N: usize = 1_000_000;
/// Default multiplier on the standard error when verifying a bound.
pub const DEFAULT_K_SIGMA: f64 = 4.0;
/// Knots used to invert the equicorrelated Gaussian diagonal.
const EQUICORR_TABLE_KNOTS: usize = (1 << 14) + 1;
/// Grid for the pre-sampling validity check of a diagonal.
const PRECHECK_GRID: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampleConfig {
    pub n: usize,
    pub seed: u64,
    pub workers: usize,
}

impl SampleConfig {
    pub fn new(n: usize, seed: u64, workers: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "sample count must be >= 1"));
        }
        if workers == 0 {
            return Err(Error::param("workers", "must be >= 1"));
        }
        Ok(Self { n, seed, workers })
    }

    /// Number of draws assigned to worker `i`.
    fn share(&self, i: usize) -> usize {
        self.n / self.workers + usize::from(i < self.n % self.workers)
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of worker `worker`'s substream.
pub fn substream_seed(seed: u64, worker: usize) -> u64 {
    splitmix64(seed ^ splitmix64(worker as u64))
}

/// Draws of the maximum statistic together with the configuration that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxSamples {
    pub values: Vec<f64>,
    pub config: SampleConfig,
}

impl MaxSamples {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn run_workers<F>(cfg: &SampleConfig, draw: F) -> Result<MaxSamples>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let chunk = |i: usize| -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(cfg.seed, i));
        (0..cfg.share(i)).map(|_| draw(&mut rng)).collect()
    };
    let parts: Vec<Result<Vec<f64>>> = if cfg.workers == 1 {
        vec![chunk(0)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..cfg.workers).map(|i| scope.spawn(move || chunk(i))).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Numeric("sampling worker panicked".into()))))
                .collect()
        })
    };
    let mut values = Vec::with_capacity(cfg.n);
    for part in parts {
        values.extend(part?);
    }
    Ok(MaxSamples {
        values,
        config: *cfg,
    })
}

/// Draws Δ⁻¹(V) for uniform V, prepared once per diagonal.
enum UniformMaxSampler {
    Exact(DiagonalSection<f64>),
    Table(Knots<f64>),
    Mixture {
        cumulative: Vec<f64>,
        components: Vec<UniformMaxSampler>,
    },
}

impl UniformMaxSampler {
    fn new(diag: &DiagonalSection<f64>) -> Result<Self> {
        Ok(match diag.kind() {
            DiagonalKind::GaussianEquicorr { rho } if *rho > 0.0 && *rho < 1.0 && diag.dim() > 1 => {
                match diag.tabulate(EQUICORR_TABLE_KNOTS)?.kind() {
                    DiagonalKind::Tabulated(knots) => UniformMaxSampler::Table(knots.clone()),
                    _ => unreachable!("tabulate returns a tabulated diagonal"),
                }
            }
            DiagonalKind::Mixture { weights, components } => {
                let mut acc = 0.0;
                let cumulative = weights
                    .iter()
                    .map(|w| {
                        acc += w;
                        acc
                    })
                    .collect();
                UniformMaxSampler::Mixture {
                    cumulative,
                    components: components.iter().map(UniformMaxSampler::new).collect::<Result<_>>()?,
                }
            }
            _ => UniformMaxSampler::Exact(diag.clone()),
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<f64> {
        match self {
            UniformMaxSampler::Exact(diag) => diag.inverse(rng.sample(Open01)),
            UniformMaxSampler::Table(knots) => Ok(knots.inverse(rng.sample(Open01))),
            UniformMaxSampler::Mixture { cumulative, components } => {
                let pick: f64 = rng.sample(Open01);
                let last = components.len() - 1;
                let k = cumulative.partition_point(|&c| c < pick).min(last);
                components[k].draw(rng)
            }
        }
    }
}

/// n draws of F⁻¹(Δ⁻¹(V)), the maximum of a d-vector whose copula has diagonal Δ.
pub fn sample_max_via_diagonal(
    diag: &DiagonalSection<f64>,
    marginal: &MarginalDistribution<f64>,
    cfg: &SampleConfig,
) -> Result<MaxSamples> {
    let report = diag.validate_lemma1(PRECHECK_GRID)?;
    if !report.passed {
        let v = report.worst_violation.expect("failed report carries a violation");
        return Err(Error::Validation(format!(
            "{} diagonal is not a copula diagonal: {:?} fails at t = {} (slack {:e})",
            diag.name(),
            v.condition,
            v.t,
            v.slack
        )));
    }
    let sampler = UniformMaxSampler::new(diag)?;
    run_workers(cfg, |rng| marginal.quantile(sampler.draw(rng)?))
}

/// Copulas with a direct joint sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "copula", rename_all = "snake_case")]
pub enum JointCopula {
    Independence,
    Comonotone,
    GaussianEquicorr { rho: f64 },
}

/// n draws of max_i X_i from the joint law. The maximum is taken on the uniform or
/// latent-normal scale and mapped once through F⁻¹, which is monotone.
pub fn sample_max_joint(
    copula: JointCopula,
    marginal: &MarginalDistribution<f64>,
    d: usize,
    cfg: &SampleConfig,
) -> Result<MaxSamples> {
    if d == 0 {
        return Err(Error::param("d", "dimension must be >= 1"));
    }
    match copula {
        JointCopula::Independence => run_workers(cfg, |rng| {
            let mut m: f64 = 0.0;
            for _ in 0..d {
                m = m.max(rng.sample(Open01));
            }
            marginal.quantile(m)
        }),
        JointCopula::Comonotone => run_workers(cfg, |rng| marginal.quantile(rng.sample(Open01))),
        JointCopula::GaussianEquicorr { rho } => {
            if !(0.0..=1.0).contains(&rho) {
                return Err(Error::param("rho", format!("must lie in [0, 1], got {rho}")));
            }
            let (loading, spread) = (rho.sqrt(), (1.0 - rho).sqrt());
            run_workers(cfg, |rng| {
                let w: f64 = rng.sample(StandardNormal);
                let mut m = f64::NEG_INFINITY;
                for _ in 0..d {
                    let e: f64 = rng.sample(StandardNormal);
                    m = m.max(loading * w + spread * e);
                }
                marginal.quantile(normal_cdf(m))
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateResult {
    pub p_hat: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub count: usize,
    pub n: usize,
    pub seed: u64,
    pub workers: usize,
    pub z: f64,
}

/// Fraction of samples in (x, x + ε] with a 99% normal-approximation interval.
pub fn estimate_concentration(samples: &MaxSamples, x: f64, epsilon: f64) -> Result<EstimateResult> {
    estimate_concentration_with_z(samples, x, epsilon, Z_99)
}

pub fn estimate_concentration_with_z(samples: &MaxSamples, x: f64, epsilon: f64, z: f64) -> Result<EstimateResult> {
    if samples.is_empty() {
        return Err(Error::Usage("cannot estimate from an empty sample".into()));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::param("epsilon", format!("must be >= 0, got {epsilon}")));
    }
    let right = x + epsilon;
    let count = samples.values.iter().filter(|&&m| m > x && m <= right).count();
    let n = samples.len();
    let p_hat = count as f64 / n as f64;
    let stderr = (p_hat * (1.0 - p_hat) / n as f64).sqrt();
    Ok(EstimateResult {
        p_hat,
        stderr,
        ci_low: (p_hat - z * stderr).max(0.0),
        ci_high: (p_hat + z * stderr).min(1.0),
        count,
        n,
        seed: samples.config.seed,
        workers: samples.config.workers,
        z,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    /// Margin by which the check holds; negative on failure.
    pub slack: f64,
    pub side: Side,
    pub bound: f64,
    pub p_hat: f64,
    pub stderr: f64,
    pub k_sigma: f64,
}

/// Upper bounds pass when p̂ ≤ bound + k·se, lower bounds when p̂ ≥ bound − k·se.
pub fn verify_bound(bound: &BoundResult<f64>, est: &EstimateResult, k_sigma: f64) -> Verdict {
    let allowance = k_sigma * est.stderr;
    let slack = match bound.side {
        Side::Upper => bound.value + allowance - est.p_hat,
        Side::Lower => est.p_hat - (bound.value - allowance),
    };
    Verdict {
        pass: slack >= 0.0,
        slack,
        side: bound.side,
        bound: bound.value,
        p_hat: est.p_hat,
        stderr: est.stderr,
        k_sigma,
    }
}
