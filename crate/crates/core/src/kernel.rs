//! RBF kernel evaluation and bandwidth selection.
//!
//! The sequential tests only need three kernel facilities: pointwise RBF
//! evaluation (bounded in (0, 1], as the MMD threshold derivation requires),
//! the median heuristic for picking the bandwidth from a pooled pilot sample,
//! and the four-term cross-kernel combination
//! `K(x_i,x_t) − K(x_i,y_t) − K(y_i,x_t) + K(y_i,y_t)` consumed by the online
//! witness-function learner.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// A mechanism output: a finite real vector of fixed dimension d ≥ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Builds a point, rejecting empty or non-finite coordinate vectors.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyInput("point coordinates"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point coordinate"));
        }
        Ok(Point { coords })
    }

    /// One-dimensional point.
    pub fn scalar(x: f64) -> Result<Self> {
        Point::new(alloc::vec![x])
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// How a bandwidth was chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BandwidthSource {
    /// Median of pairwise distances over a pooled pilot of `pilot_size` points.
    MedianHeuristic { pilot_size: usize },
    /// Caller-supplied constant.
    Fixed,
}

/// RBF kernel configuration: `K(x, y) = exp(−‖x−y‖² / (2·bandwidth²))`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelConfig {
    bandwidth: f64,
    source: BandwidthSource,
}

impl KernelConfig {
    /// Fixed bandwidth; must be strictly positive and finite.
    pub fn fixed(bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidBandwidth(bandwidth));
        }
        Ok(KernelConfig {
            bandwidth,
            source: BandwidthSource::Fixed,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn source(&self) -> &BandwidthSource {
        &self.source
    }
}

#[inline]
fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        let d = a - b;
        acc += d * d;
    }
    acc
}

/// Unchecked RBF evaluation on raw coordinate slices (hot path).
#[inline]
pub(crate) fn rbf_unchecked(x: &[f64], y: &[f64], bandwidth: f64) -> f64 {
    math::exp(-squared_distance(x, y) / (2.0 * bandwidth * bandwidth))
}

/// Evaluates the RBF kernel; value in (0, 1], exactly 1 iff x = y.
pub fn rbf_eval(x: &Point, y: &Point, cfg: &KernelConfig) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(rbf_unchecked(x.coords(), y.coords(), cfg.bandwidth))
}

/// Bandwidth from the median of all pairwise Euclidean distances over the
/// pooled pilot (both streams together). A zero median, which happens when
/// the mechanism output is constant on the pilot, falls back to bandwidth 1.
pub fn median_heuristic(pilot: &[Point]) -> Result<KernelConfig> {
    if pilot.len() < 2 {
        return Err(Error::PilotTooSmall {
            needed: 2,
            found: pilot.len(),
        });
    }
    let dim = pilot[0].dim();
    for p in pilot {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
    }
    let mut distances = Vec::with_capacity(pilot.len() * (pilot.len() - 1) / 2);
    for i in 0..pilot.len() {
        for j in (i + 1)..pilot.len() {
            distances.push(math::sqrt(squared_distance(
                pilot[i].coords(),
                pilot[j].coords(),
            )));
        }
    }
    distances.sort_unstable_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
    let n = distances.len();
    let median = if n % 2 == 1 {
        distances[n / 2]
    } else {
        0.5 * (distances[n / 2 - 1] + distances[n / 2])
    };
    let bandwidth = if median > 0.0 { median } else { 1.0 };
    Ok(KernelConfig {
        bandwidth,
        source: BandwidthSource::MedianHeuristic {
            pilot_size: pilot.len(),
        },
    })
}

#[inline]
pub(crate) fn cross_kernel_unchecked(
    x_i: &[f64],
    y_i: &[f64],
    x_t: &[f64],
    y_t: &[f64],
    bandwidth: f64,
) -> f64 {
    rbf_unchecked(x_i, x_t, bandwidth)
        - rbf_unchecked(x_i, y_t, bandwidth)
        - rbf_unchecked(y_i, x_t, bandwidth)
        + rbf_unchecked(y_i, y_t, bandwidth)
}

/// Four-term combination `K(x_i,x_t) − K(x_i,y_t) − K(y_i,x_t) + K(y_i,y_t)`,
/// i.e. the inner product ⟨K(x_i,·)−K(y_i,·), K(x_t,·)−K(y_t,·)⟩. Lies in
/// [−2, 2]; vanishes when either pair collapses.
pub fn cross_kernel_block(
    history: (&Point, &Point),
    current: (&Point, &Point),
    cfg: &KernelConfig,
) -> Result<f64> {
    let dim = history.0.dim();
    for p in [history.1, current.0, current.1] {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
    }
    Ok(cross_kernel_unchecked(
        history.0.coords(),
        history.1.coords(),
        current.0.coords(),
        current.1.coords(),
        cfg.bandwidth,
    ))
}
