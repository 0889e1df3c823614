//! Benchmark mechanisms and synthetic stream families.
//!
//! The six mean-estimation mechanisms release `ΣX_i` divided by either the
//! true count n or a privatized count `ñ = max{10⁻¹², n + count_noise}` with
//! `count_noise ~ Laplace(0, 2/ε)`, plus additive noise:
//!
//! - `DPLaplace(X)      = ΣX_i/ñ + Laplace(0, 2/[ñε])`: the only ε-DP one
//! - `NonDPLaplace1(X)  = ΣX_i/n + Laplace(0, 2/[nε])`: leaks the true count
//! - `NonDPLaplace2(X)  = ΣX_i/n + Laplace(0, 2/[ñε])`: privatized scale,
//!   non-private mean
//!
//! The Gaussian kinds substitute `N(0, σ²)` with σ from the classical
//! calibration `σ = Δ·√(2·ln(1.25/δ))/ε` and the matching sensitivity (2/ñ
//! or 2/n); the count treatment is identical to the Laplace kinds.
//!
//! Stream families cover the paired fixtures the audits consume: mechanism
//! pairs on neighboring datasets, the DP-SGD canary abstraction
//! `(N(0,σ²), N(1,σ²))`, and the synthetic two-sample suites (identical
//! uniforms, a one-perturbation smooth bump alternative, Gaussian mean
//! shifts).

use alloc::vec::Vec;

use rand_chacha::rand_core::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::Point;
use crate::math;
use crate::rng::{next_open01, next_unit, stream_rng};
use crate::seq_test::PairStream;

/// Records held by a mechanism input; values in [0, 1] for the mean
/// mechanisms.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dataset {
    records: Vec<f64>,
}

impl Dataset {
    pub fn new(records: Vec<f64>) -> Result<Self> {
        if records.iter().any(|r| !r.is_finite()) {
            return Err(Error::NonFinite("dataset record"));
        }
        Ok(Dataset { records })
    }

    pub fn records(&self) -> &[f64] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.records.iter().sum()
    }

    /// The fixed neighboring pair used by the mean-mechanism benchmarks:
    /// S = {0} and S' = {0, 1} (add/remove adjacency).
    pub fn mean_benchmark_neighbors() -> (Dataset, Dataset) {
        (
            Dataset {
                records: alloc::vec![0.0],
            },
            Dataset {
                records: alloc::vec![0.0, 1.0],
            },
        )
    }
}

/// The six benchmark mechanisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MechanismKind {
    DpLaplace,
    NonDpLaplace1,
    NonDpLaplace2,
    DpGaussian,
    NonDpGaussian1,
    NonDpGaussian2,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 6] = [
        MechanismKind::DpLaplace,
        MechanismKind::NonDpLaplace1,
        MechanismKind::NonDpLaplace2,
        MechanismKind::DpGaussian,
        MechanismKind::NonDpGaussian1,
        MechanismKind::NonDpGaussian2,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            MechanismKind::DpLaplace => "DPLaplace",
            MechanismKind::NonDpLaplace1 => "NonDPLaplace1",
            MechanismKind::NonDpLaplace2 => "NonDPLaplace2",
            MechanismKind::DpGaussian => "DPGaussian",
            MechanismKind::NonDpGaussian1 => "NonDPGaussian1",
            MechanismKind::NonDpGaussian2 => "NonDPGaussian2",
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(
            self,
            MechanismKind::DpGaussian
                | MechanismKind::NonDpGaussian1
                | MechanismKind::NonDpGaussian2
        )
    }

    /// Whether the mechanism actually satisfies its claimed guarantee.
    pub fn is_private(&self) -> bool {
        matches!(self, MechanismKind::DpLaplace | MechanismKind::DpGaussian)
    }
}

/// A mechanism with its noise parameters. Laplace kinds ignore `delta`;
/// Gaussian kinds require `delta ∈ (0, 1)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MechanismSpec {
    pub kind: MechanismKind,
    pub epsilon: f64,
    pub delta: Option<f64>,
}

impl MechanismSpec {
    pub fn new(kind: MechanismKind, epsilon: f64, delta: Option<f64>) -> Result<Self> {
        let spec = MechanismSpec {
            kind,
            epsilon,
            delta,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: self.epsilon,
            });
        }
        if self.kind.is_gaussian() {
            match self.delta {
                Some(d) if d > 0.0 && d < 1.0 => {}
                other => {
                    return Err(Error::InvalidParameter {
                        name: "delta (Gaussian kinds need delta in (0,1))",
                        value: other.unwrap_or(f64::NAN),
                    })
                }
            }
        }
        Ok(())
    }
}

/// Laplace(0, scale) via inverse CDF.
pub fn sample_laplace<R: RngCore>(rng: &mut R, scale: f64) -> f64 {
    let u = next_open01(rng);
    if u < 0.5 {
        scale * math::ln(2.0 * u)
    } else {
        -scale * math::ln(2.0 * (1.0 - u))
    }
}

/// Standard normal via one-shot Box-Muller (two uniforms per draw).
pub fn sample_std_normal<R: RngCore>(rng: &mut R) -> f64 {
    let u1 = next_open01(rng);
    let u2 = next_open01(rng);
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(core::f64::consts::TAU * u2)
}

/// Classical Gaussian-mechanism calibration
/// `σ = sensitivity·√(2·ln(1.25/δ))/ε`.
pub fn gaussian_sigma_for(epsilon: f64, delta: f64, sensitivity: f64) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
        });
    }
    if !(sensitivity.is_finite() && sensitivity >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "sensitivity",
            value: sensitivity,
        });
    }
    Ok(sensitivity * math::sqrt(2.0 * math::ln(1.25 / delta)) / epsilon)
}

/// `ñ = max{10⁻¹², n + Laplace(0, 2/ε)}`; drawn fresh per mechanism call.
pub(crate) fn privatized_count<R: RngCore>(rng: &mut R, n: usize, epsilon: f64) -> f64 {
    let count_noise = sample_laplace(rng, 2.0 / epsilon);
    f64::max(1e-12, n as f64 + count_noise)
}

/// One mechanism output on the given dataset.
pub fn sample_mechanism<R: RngCore>(
    spec: &MechanismSpec,
    data: &Dataset,
    rng: &mut R,
) -> Result<f64> {
    spec.validate()?;
    let n = data.len();
    let needs_true_count = !matches!(
        spec.kind,
        MechanismKind::DpLaplace | MechanismKind::DpGaussian
    );
    if needs_true_count && n == 0 {
        return Err(Error::EmptyInput("dataset (this variant divides by n)"));
    }
    let sum = data.sum();
    let eps = spec.epsilon;
    let out = match spec.kind {
        MechanismKind::DpLaplace => {
            let nt = privatized_count(rng, n, eps);
            sum / nt + sample_laplace(rng, 2.0 / (nt * eps))
        }
        MechanismKind::NonDpLaplace1 => {
            sum / n as f64 + sample_laplace(rng, 2.0 / (n as f64 * eps))
        }
        MechanismKind::NonDpLaplace2 => {
            let nt = privatized_count(rng, n, eps);
            sum / n as f64 + sample_laplace(rng, 2.0 / (nt * eps))
        }
        MechanismKind::DpGaussian => {
            let delta = spec.delta.expect("validated");
            let nt = privatized_count(rng, n, eps);
            let sigma = gaussian_sigma_for(eps, delta, 2.0 / nt)?;
            sum / nt + sigma * sample_std_normal(rng)
        }
        MechanismKind::NonDpGaussian1 => {
            let delta = spec.delta.expect("validated");
            let sigma = gaussian_sigma_for(eps, delta, 2.0 / n as f64)?;
            sum / n as f64 + sigma * sample_std_normal(rng)
        }
        MechanismKind::NonDpGaussian2 => {
            let delta = spec.delta.expect("validated");
            let nt = privatized_count(rng, n, eps);
            let sigma = gaussian_sigma_for(eps, delta, 2.0 / nt)?;
            sum / n as f64 + sigma * sample_std_normal(rng)
        }
    };
    Ok(out)
}

/// The paired sample sources an audit can consume.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StreamFamily {
    /// X_t ~ mechanism(baseline), Y_t ~ mechanism(neighbor).
    MechanismPair {
        spec: MechanismSpec,
        baseline: Dataset,
        neighbor: Dataset,
    },
    /// The DP-SGD abstraction: X_t ~ N(0, σ²), Y_t ~ N(1, σ²).
    CanaryGaussian { sigma: f64 },
    /// Two independent uniforms on [0,1]^d (the null holds).
    UniformCube { dim: usize },
    /// Uniform vs. the smooth-bump alternative with density
    /// `1 + amplitude·cos(π·perturbations·x₁)` on [0,1]^d: `perturbations`
    /// alternating half-period bumps along the first coordinate, integrating
    /// to 1 exactly. A product over all coordinates would put the deviation
    /// at higher frequency, where the RBF kernel suppresses it.
    PerturbedUniform {
        dim: usize,
        perturbations: u32,
        amplitude: f64,
    },
    /// N(0, I_d) vs. N(shift, I_d).
    GaussianShift { dim: usize, shift: Vec<f64> },
}

/// A stream family plus the seed that reproduces it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StreamSpec {
    pub family: StreamFamily,
    pub seed: u64,
}

impl StreamSpec {
    pub fn validate(&self) -> Result<()> {
        match &self.family {
            StreamFamily::MechanismPair { spec, .. } => spec.validate(),
            StreamFamily::CanaryGaussian { sigma } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "sigma",
                        value: *sigma,
                    });
                }
                Ok(())
            }
            StreamFamily::UniformCube { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter {
                        name: "dim",
                        value: 0.0,
                    });
                }
                Ok(())
            }
            StreamFamily::PerturbedUniform {
                dim,
                perturbations,
                amplitude,
            } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter {
                        name: "dim",
                        value: 0.0,
                    });
                }
                if *perturbations == 0 {
                    return Err(Error::InvalidParameter {
                        name: "perturbations",
                        value: 0.0,
                    });
                }
                // |amplitude| ≤ 1 keeps the density inside [0, 2]
                if !(amplitude.is_finite() && math::abs(*amplitude) <= 1.0) {
                    return Err(Error::InvalidParameter {
                        name: "amplitude",
                        value: *amplitude,
                    });
                }
                Ok(())
            }
            StreamFamily::GaussianShift { dim, shift } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter {
                        name: "dim",
                        value: 0.0,
                    });
                }
                if shift.len() != *dim {
                    return Err(Error::DimensionMismatch {
                        expected: *dim,
                        found: shift.len(),
                    });
                }
                if shift.iter().any(|c| !c.is_finite()) {
                    return Err(Error::NonFinite("shift coordinate"));
                }
                Ok(())
            }
        }
    }

    /// Instantiates the stream on generator (seed, stream_id).
    pub fn build(&self, stream_id: u64) -> Result<Stream> {
        self.validate()?;
        Ok(Stream {
            family: self.family.clone(),
            rng: stream_rng(self.seed, stream_id),
        })
    }
}

/// A live paired sample source; single-owner iterator.
#[derive(Debug, Clone)]
pub struct Stream {
    family: StreamFamily,
    rng: ChaCha8Rng,
}

impl Stream {
    fn uniform_point(rng: &mut ChaCha8Rng, dim: usize) -> Point {
        let coords: Vec<f64> = (0..dim).map(|_| next_unit(rng)).collect();
        Point::new(coords).expect("uniform coordinates are finite")
    }

    fn normal_point(rng: &mut ChaCha8Rng, dim: usize, shift: Option<&[f64]>) -> Point {
        let coords: Vec<f64> = (0..dim)
            .map(|i| sample_std_normal(rng) + shift.map_or(0.0, |s| s[i]))
            .collect();
        Point::new(coords).expect("normal coordinates are finite")
    }

    fn perturbed_point(
        rng: &mut ChaCha8Rng,
        dim: usize,
        perturbations: u32,
        amplitude: f64,
    ) -> Point {
        let envelope = 1.0 + math::abs(amplitude);
        loop {
            let coords: Vec<f64> = (0..dim).map(|_| next_unit(rng)).collect();
            let density = 1.0
                + amplitude * math::cos(core::f64::consts::PI * perturbations as f64 * coords[0]);
            if next_unit(rng) * envelope < density {
                return Point::new(coords).expect("uniform coordinates are finite");
            }
        }
    }
}

impl PairStream for Stream {
    fn next_pair(&mut self) -> Option<(Point, Point)> {
        let rng = &mut self.rng;
        match &self.family {
            StreamFamily::MechanismPair {
                spec,
                baseline,
                neighbor,
            } => {
                let x = sample_mechanism(spec, baseline, rng).ok()?;
                let y = sample_mechanism(spec, neighbor, rng).ok()?;
                Some((
                    Point::scalar(x).expect("mechanism outputs are finite"),
                    Point::scalar(y).expect("mechanism outputs are finite"),
                ))
            }
            StreamFamily::CanaryGaussian { sigma } => {
                let x = sigma * sample_std_normal(rng);
                let y = 1.0 + sigma * sample_std_normal(rng);
                Some((
                    Point::scalar(x).expect("canary outputs are finite"),
                    Point::scalar(y).expect("canary outputs are finite"),
                ))
            }
            StreamFamily::UniformCube { dim } => {
                let x = Self::uniform_point(rng, *dim);
                let y = Self::uniform_point(rng, *dim);
                Some((x, y))
            }
            StreamFamily::PerturbedUniform {
                dim,
                perturbations,
                amplitude,
            } => {
                let x = Self::uniform_point(rng, *dim);
                let y = Self::perturbed_point(rng, *dim, *perturbations, *amplitude);
                Some((x, y))
            }
            StreamFamily::GaussianShift { dim, shift } => {
                let x = Self::normal_point(rng, *dim, None);
                let y = Self::normal_point(rng, *dim, Some(shift));
                Some((x, y))
            }
        }
    }
}
