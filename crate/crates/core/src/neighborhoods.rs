//! Local exclusion regions around the current block value and their exact
//! conditional masses.

use crate::distributions::{Conditional, Univariate};
use crate::error::{Error, Result};
use crate::sampler::{StateVector, TargetModel};

/// Masses at or above `1 - ADMISSIBILITY_MARGIN` are treated as inadmissible.
pub const ADMISSIBILITY_MARGIN: f64 = 1e-9;

/// How neighborhood size parameters are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    /// Sizes are in the units of the block coordinates.
    Absolute,
    /// Sizes are multiples of the full conditional's standard deviation
    /// (per coordinate for product-form blocks).
    ConditionalSd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NeighborhoodKind {
    Empty,
    /// `x ± halfwidth` for scalar blocks.
    Interval {
        halfwidth: f64,
    },
    /// `x ± d(x)` with `d` chosen so the interval has conditional mass `q`.
    FixedDensity {
        q: f64,
    },
    /// Euclidean ball around the block value (isotropic Gaussian blocks).
    Ball {
        radius: f64,
    },
    /// Axis-aligned rectangle around a pair of independent gamma coordinates.
    Rectangle {
        halfwidths: [f64; 2],
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborhoodSpec {
    pub kind: NeighborhoodKind,
    pub scaling: Scaling,
}

impl NeighborhoodSpec {
    pub fn empty() -> Self {
        Self {
            kind: NeighborhoodKind::Empty,
            scaling: Scaling::Absolute,
        }
    }

    pub fn interval(halfwidth: f64, scaling: Scaling) -> Result<Self> {
        Self::checked(NeighborhoodKind::Interval { halfwidth }, scaling)
    }

    pub fn fixed_density(q: f64) -> Result<Self> {
        Self::checked(NeighborhoodKind::FixedDensity { q }, Scaling::Absolute)
    }

    pub fn ball(radius: f64, scaling: Scaling) -> Result<Self> {
        Self::checked(NeighborhoodKind::Ball { radius }, scaling)
    }

    pub fn rectangle(halfwidths: [f64; 2], scaling: Scaling) -> Result<Self> {
        Self::checked(NeighborhoodKind::Rectangle { halfwidths }, scaling)
    }

    fn checked(kind: NeighborhoodKind, scaling: Scaling) -> Result<Self> {
        let spec = Self { kind, scaling };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |v: f64, what: &str| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} must be finite and nonnegative, got {v}")))
            }
        };
        match self.kind {
            NeighborhoodKind::Empty => Ok(()),
            NeighborhoodKind::Interval { halfwidth } => nonneg(halfwidth, "interval halfwidth"),
            NeighborhoodKind::FixedDensity { q } => {
                if q > 0.0 && q < 1.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!("fixed-density mass must lie in (0, 1), got {q}")))
                }
            }
            NeighborhoodKind::Ball { radius } => nonneg(radius, "ball radius"),
            NeighborhoodKind::Rectangle { halfwidths } => {
                nonneg(halfwidths[0], "rectangle halfwidth")?;
                nonneg(halfwidths[1], "rectangle halfwidth")
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.kind, NeighborhoodKind::Empty)
    }
}

/// Geometry of a realized neighborhood. All regions are open sets.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Empty,
    Interval { lo: f64, hi: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    Rectangle { lo: [f64; 2], hi: [f64; 2] },
}

impl Region {
    pub fn contains(&self, point: &[f64]) -> bool {
        match self {
            Region::Empty => false,
            Region::Interval { lo, hi } => *lo < point[0] && point[0] < *hi,
            Region::Ball { center, radius } => {
                let d2: f64 = center.iter().zip(point).map(|(c, x)| (x - c) * (x - c)).sum();
                d2 < radius * radius
            }
            Region::Rectangle { lo, hi } => (0..2).all(|k| lo[k] < point[k] && point[k] < hi[k]),
        }
    }
}

/// A neighborhood placed around a concrete block value, with its exact mass
/// under the block's full conditional.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedNeighborhood {
    pub block_index: usize,
    pub region: Region,
    /// Conditional mass inside the region.
    pub mass: f64,
    /// Conditional mass outside the region, computed directly from the tails
    /// where possible rather than as `1 - mass`.
    pub outside: f64,
}

fn scalar_interval<D: Univariate>(dist: &D, center: f64, halfwidth: f64, clip_at_zero: bool) -> (Region, f64, f64) {
    let mut lo = center - halfwidth;
    if clip_at_zero {
        lo = lo.max(0.0);
    }
    let hi = center + halfwidth;
    (
        Region::Interval { lo, hi },
        dist.interval_mass(lo, hi),
        dist.outside_mass(lo, hi),
    )
}

/// Half-width `d` with `∫_{center-d}^{center+d} π = q` under a scalar conditional.
pub fn fixed_density_halfwidth<D: Univariate>(conditional: &D, center: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("fixed-density mass must lie in (0, 1), got {q}")));
    }
    let mass = |d: f64| conditional.interval_mass(center - d, center + d);
    let mut lo = 0.0;
    let mut hi = conditional.sd();
    let mut doublings = 0;
    while mass(hi) < q {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 {
            return Err(Error::Domain(format!(
                "no interval around {center} reaches conditional mass {q}"
            )));
        }
    }
    // Safeguarded Newton: g(d) = mass(d) - q is increasing with g'(d) = π(c+d) + π(c-d).
    let mut d = 0.5 * (lo + hi);
    for _ in 0..200 {
        let g = mass(d) - q;
        if g.abs() <= 1e-14 {
            return Ok(d);
        }
        if g < 0.0 {
            lo = d;
        } else {
            hi = d;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(d);
        }
        let slope = conditional.pdf(center + d) + conditional.pdf(center - d);
        let newton = d - g / slope;
        d = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(d)
}

fn incompatible(spec: &NeighborhoodSpec, conditional: &Conditional) -> Error {
    Error::Config(format!(
        "neighborhood {:?} cannot be applied to a {}-dimensional {} conditional",
        spec.kind,
        conditional.dim(),
        match conditional {
            Conditional::Gaussian(_) => "gaussian",
            Conditional::Uniform(_) => "uniform",
            Conditional::Gamma(_) => "gamma",
            Conditional::IsotropicGaussian(_) => "isotropic gaussian",
            Conditional::GammaPair(_) => "gamma pair",
        }
    ))
}

/// Places `spec` around `current` and computes its mass under `conditional`.
pub fn realize(
    spec: &NeighborhoodSpec,
    block_index: usize,
    conditional: &Conditional,
    current: &[f64],
) -> Result<RealizedNeighborhood> {
    if current.len() != conditional.dim() {
        return Err(Error::Config(format!(
            "block {block_index} has {} coordinates but its conditional has dimension {}",
            current.len(),
            conditional.dim()
        )));
    }
    let sd_scale = |sd: f64| match spec.scaling {
        Scaling::Absolute => 1.0,
        Scaling::ConditionalSd => sd,
    };
    let (region, mass, outside) = match (&spec.kind, conditional) {
        (NeighborhoodKind::Empty, _) => (Region::Empty, 0.0, 1.0),
        (NeighborhoodKind::Interval { halfwidth }, Conditional::Gaussian(d)) => {
            scalar_interval(d, current[0], halfwidth * sd_scale(d.sd()), false)
        }
        (NeighborhoodKind::Interval { halfwidth }, Conditional::Uniform(d)) => {
            scalar_interval(d, current[0], halfwidth * sd_scale(d.sd()), false)
        }
        (NeighborhoodKind::Interval { halfwidth }, Conditional::Gamma(d)) => {
            scalar_interval(d, current[0], halfwidth * sd_scale(d.sd()), true)
        }
        (NeighborhoodKind::FixedDensity { q }, scalar) => {
            let (width, support_clip) = match scalar {
                Conditional::Gaussian(d) => (fixed_density_halfwidth(d, current[0], *q)?, false),
                Conditional::Uniform(d) => (fixed_density_halfwidth(d, current[0], *q)?, false),
                Conditional::Gamma(d) => (fixed_density_halfwidth(d, current[0], *q)?, true),
                other => return Err(incompatible(spec, other)),
            };
            let mut lo = current[0] - width;
            if support_clip {
                lo = lo.max(0.0);
            }
            // The mass is q by construction; using it verbatim keeps α exactly 1.
            (
                Region::Interval {
                    lo,
                    hi: current[0] + width,
                },
                *q,
                1.0 - *q,
            )
        }
        (NeighborhoodKind::Ball { radius }, Conditional::IsotropicGaussian(block)) => {
            let r = radius * sd_scale(block.sd());
            let mass = block.ball_mass(current, r)?;
            (
                Region::Ball {
                    center: current.to_vec(),
                    radius: r,
                },
                mass,
                1.0 - mass,
            )
        }
        (NeighborhoodKind::Rectangle { halfwidths }, Conditional::GammaPair(pair)) => {
            let mut lo = [0.0; 2];
            let mut hi = [0.0; 2];
            let mut mass = 1.0;
            for k in 0..2 {
                let w = halfwidths[k] * sd_scale(pair[k].sd());
                lo[k] = (current[k] - w).max(0.0);
                hi[k] = current[k] + w;
                mass *= pair[k].interval_mass(lo[k], hi[k]);
            }
            (Region::Rectangle { lo, hi }, mass, 1.0 - mass)
        }
        _ => return Err(incompatible(spec, conditional)),
    };
    Ok(RealizedNeighborhood {
        block_index,
        region,
        mass,
        outside,
    })
}

/// Observed range of neighborhood masses over a set of probe states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityAudit {
    pub q_min_observed: f64,
    pub q_max_observed: f64,
    /// Some probe produced a mass within [`ADMISSIBILITY_MARGIN`] of 1.
    pub violation: bool,
}

/// Realizes every block's neighborhood at every probe state and records the
/// smallest and largest masses seen.
pub fn check_admissibility<M: TargetModel + ?Sized>(
    specs: &[NeighborhoodSpec],
    model: &M,
    probe_states: &[StateVector],
) -> Result<AdmissibilityAudit> {
    if probe_states.is_empty() {
        return Err(Error::InsufficientData(
            "admissibility audit needs at least one probe state".into(),
        ));
    }
    let blocks = model.block_dims().len();
    if specs.len() != blocks {
        return Err(Error::Config(format!(
            "{} neighborhood specs given for a model with {blocks} blocks",
            specs.len()
        )));
    }
    let mut q_min = f64::INFINITY;
    let mut q_max = f64::NEG_INFINITY;
    for state in probe_states {
        for (i, spec) in specs.iter().enumerate() {
            let conditional = model.conditional(i, state)?;
            let nb = realize(spec, i, &conditional, state.block(i))?;
            q_min = q_min.min(nb.mass);
            q_max = q_max.max(nb.mass);
        }
    }
    Ok(AdmissibilityAudit {
        q_min_observed: q_min,
        q_max_observed: q_max,
        violation: q_max >= 1.0 - ADMISSIBILITY_MARGIN,
    })
}
