//! Sampled verification of homogeneity and homogeneous sector bounds.
//!
//! Every check draws its points from a seeded ChaCha stream, so identical
//! [`SampleSpec`]s give bit-identical residuals.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::homgeo::{FundamentalDomain, GeoError, HomSpace};
use crate::lindil::{Dilation, EIGEN_TOL};
use crate::quantizer::{cell_boundary_distance, hom_quantize, QuantizerError, QuantizerParams};

/// Residual denominators are floored here.
pub const DENOM_FLOOR: f64 = 1e-12;
/// Threshold on the normalised sector inner product.
pub const SECTOR_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("invalid sample spec: {0}")]
    InvalidSpec(&'static str),
    #[error("sector is invalid: {0}")]
    InvalidSector(&'static str),
    #[error("F1 must be positive on the fundamental domain, got {value} at sample {index}")]
    NonPositiveF1 { index: usize, value: f64 },
    #[error("homogeneity degrees must be positive")]
    NonPositiveDegree,
    #[error(transparent)]
    Geometry(#[from] GeoError),
    #[error(transparent)]
    Quantizer(#[from] QuantizerError),
}

/// How sample points are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSpec {
    pub count: usize,
    /// Homogeneous-norm range; radii are log-uniform inside it.
    pub radius_range: (f64, f64),
    pub seed: u64,
    /// Minimum distance, in cell fractions, from a quantizer cell boundary.
    pub boundary_margin: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            count: 10_000,
            radius_range: (1e-2, 1e2),
            seed: 42,
            boundary_margin: 1e-6,
        }
    }
}

impl SampleSpec {
    pub fn with_count(self, count: usize) -> Self {
        Self { count, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_radius_range(self, lo: f64, hi: f64) -> Self {
        Self {
            radius_range: (lo, hi),
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), CheckError> {
        let (lo, hi) = self.radius_range;
        if self.count == 0 {
            return Err(CheckError::InvalidSpec("count must be at least 1"));
        }
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(CheckError::InvalidSpec(
                "radius range must satisfy 0 < lo < hi",
            ));
        }
        if !(self.boundary_margin >= 0.0) {
            return Err(CheckError::InvalidSpec(
                "boundary margin must be nonnegative",
            ));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Uniform direction on the unit sphere of the weighted norm.
pub fn sample_unit(d: &Dilation, rng: &mut impl Rng) -> DVector<f64> {
    loop {
        let g = DVector::from_fn(d.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let w = d.weight_inv_sqrt() * g;
        let n = d.norm(&w);
        if n > 1e-8 {
            return w / n;
        }
    }
}

/// A point with homogeneous norm log-uniform in `[lo, hi)`.
pub fn sample_point(d: &Dilation, range: (f64, f64), rng: &mut impl Rng) -> DVector<f64> {
    let u = sample_unit(d, rng);
    let s = rng.random_range(range.0.ln()..range.1.ln());
    d.apply(s, &u)
}

/// Draws `spec.count` points; their homogeneous norms are known exactly by
/// construction.
pub fn sample_points(d: &Dilation, spec: &SampleSpec) -> Result<Vec<DVector<f64>>, CheckError> {
    spec.validate()?;
    let mut rng = spec.rng();
    Ok((0..spec.count)
        .map(|_| sample_point(d, spec.radius_range, &mut rng))
        .collect())
}

const FIELD_SCALES: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];

/// Max over samples and `s ∈ {-2,-1,1,2}` of
/// `‖f(d(s)x) - e^{μs} d(s) f(x)‖ / max(‖e^{μs} d(s) f(x)‖, 1e-12)`.
pub fn check_field_homogeneity(
    field: impl Fn(&DVector<f64>) -> DVector<f64>,
    d: &Dilation,
    mu: f64,
    spec: &SampleSpec,
) -> Result<f64, CheckError> {
    let mut worst: f64 = 0.0;
    for x in sample_points(d, spec)? {
        let fx = field(&x);
        for s in FIELD_SCALES {
            let lhs = field(&d.apply(s, &x));
            let rhs = d.apply(s, &fx) * (mu * s).exp();
            let r = (lhs - &rhs).norm() / rhs.norm().max(DENOM_FLOOR);
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// Discrete-homogeneity residual of `q_h(d(k a) x) = d(k a) q_h(x)` for
/// `k ∈ {-3..3}` with the quantizer's own step `a = -ln ν`.
pub fn check_quantizer_discrete_homogeneity(
    space: &HomSpace,
    p: &QuantizerParams,
    spec: &SampleSpec,
) -> Result<f64, CheckError> {
    check_quantizer_homogeneity_with_step(space, p, p.radial_step(), spec)
}

/// As [`check_quantizer_discrete_homogeneity`] but with an arbitrary
/// dilation step, so a mismatched group can be shown to fail.
pub fn check_quantizer_homogeneity_with_step(
    space: &HomSpace,
    p: &QuantizerParams,
    step: f64,
    spec: &SampleSpec,
) -> Result<f64, CheckError> {
    spec.validate()?;
    let d = space.dilation();
    let mut rng = spec.rng();
    let mut worst: f64 = 0.0;
    let mut accepted = 0;
    // Bounded so a margin that excludes everything cannot spin forever.
    let mut attempts = 0usize;
    while accepted < spec.count && attempts < 1000 * spec.count {
        attempts += 1;
        let x = sample_point(d, spec.radius_range, &mut rng);
        if spec.boundary_margin > 0.0 {
            match cell_boundary_distance(space, p, &x)? {
                Some(dist) if dist >= spec.boundary_margin => {}
                _ => continue,
            }
        }
        accepted += 1;
        let qx = hom_quantize(space, p, &x)?;
        for k in -3i32..=3 {
            if k == 0 {
                continue;
            }
            let s = k as f64 * step;
            let lhs = hom_quantize(space, p, &d.apply(s, &x))?;
            let rhs = d.apply(s, &qx);
            let r = (lhs - &rhs).norm() / rhs.norm().max(DENOM_FLOOR);
            worst = worst.max(r);
        }
    }
    if accepted == 0 {
        return Err(CheckError::InvalidSpec(
            "boundary margin excluded every sample",
        ));
    }
    Ok(worst)
}

/// A sector `[K₁, K₂]` with `K₂ - K₁ ≻ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorSpec {
    k1: DMatrix<f64>,
    k2: DMatrix<f64>,
}

impl SectorSpec {
    pub fn new(k1: DMatrix<f64>, k2: DMatrix<f64>) -> Result<Self, CheckError> {
        if !k1.is_square() || k1.shape() != k2.shape() {
            return Err(CheckError::InvalidSector(
                "K1 and K2 must be square and equal-sized",
            ));
        }
        for k in [&k1, &k2] {
            if (k - k.transpose()).amax() > 1e-12 * k.amax().max(1.0) {
                return Err(CheckError::InvalidSector("K1 and K2 must be symmetric"));
            }
        }
        let diff = &k2 - &k1;
        let diff = (&diff + diff.transpose()) * 0.5;
        if SymmetricEigen::new(diff).eigenvalues.min() <= EIGEN_TOL {
            return Err(CheckError::InvalidSector(
                "K2 - K1 must be positive definite",
            ));
        }
        Ok(Self { k1, k2 })
    }

    /// Symmetric sector `[L - κI, L + κI]`.
    pub fn symmetric(center: DMatrix<f64>, kappa: f64) -> Result<Self, CheckError> {
        let n = center.nrows();
        let i = DMatrix::identity(n, n) * kappa;
        Self::new(&center - &i, &center + &i)
    }

    pub fn k1(&self) -> &DMatrix<f64> {
        &self.k1
    }

    pub fn k2(&self) -> &DMatrix<f64> {
        &self.k2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorReport {
    pub holds: bool,
    /// Largest `⟨Φ(φ(x)) - K₁Φ(x), Φ(φ(x)) - K₂Φ(x)⟩ / max(‖Φ(x)‖², 1e-12)`.
    pub worst: f64,
}

/// Evaluates the homogeneous sector condition in `Φ`-coordinates.
pub fn check_hom_sector<E>(
    phi_map: impl Fn(&DVector<f64>) -> Result<DVector<f64>, E>,
    space: &HomSpace,
    sector: &SectorSpec,
    spec: &SampleSpec,
) -> Result<SectorReport, CheckError>
where
    CheckError: From<E>,
{
    let d = space.dilation();
    let mut worst = f64::NEG_INFINITY;
    for x in sample_points(d, spec)? {
        let px = space.phi(&x)?;
        let pf = space.phi(&phi_map(&x)?)?;
        let a = &pf - sector.k1() * &px;
        let b = &pf - sector.k2() * &px;
        let value = d.inner(&a, &b) / d.inner(&px, &px).max(DENOM_FLOOR);
        worst = worst.max(value);
    }
    Ok(SectorReport {
        holds: worst <= SECTOR_TOL,
        worst,
    })
}

/// Relative homogeneous quantization error `‖q_h(x) -̃ x‖_d / ‖x‖_d`,
/// i.e. `‖Φ(q_h(x)) - Φ(x)‖ / ‖Φ(x)‖`.
pub fn quantizer_sector_ratio(
    space: &HomSpace,
    p: &QuantizerParams,
    x: &DVector<f64>,
) -> Result<f64, CheckError> {
    let px = space.phi(x)?;
    let pq = space.phi(&hom_quantize(space, p, x)?)?;
    let d = space.dilation();
    Ok(d.norm(&(pq - &px)) / d.norm(&px).max(DENOM_FLOOR))
}

/// Empirical sector margin of `q_h` next to the analytic `ε̃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorMargin {
    pub epsilon_tilde: f64,
    pub empirical_max: f64,
}

pub fn quantizer_sector_margin(
    space: &HomSpace,
    p: &QuantizerParams,
    spec: &SampleSpec,
) -> Result<SectorMargin, CheckError> {
    let mut empirical_max: f64 = 0.0;
    for x in sample_points(space.dilation(), spec)? {
        empirical_max = empirical_max.max(quantizer_sector_ratio(space, p, &x)?);
    }
    Ok(SectorMargin {
        epsilon_tilde: p.epsilon_tilde(),
        empirical_max,
    })
}

/// Sector ratio of `q_h` measured globally and after projecting every sample
/// onto the fundamental domain `Ω = {1 ≤ ‖z‖_d < 1/ν}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalityReport {
    pub local_max: f64,
    pub global_max: f64,
    /// Largest pointwise difference between a sample's ratio and the ratio
    /// at its projection.
    pub max_pointwise_gap: f64,
}

pub fn quantizer_locality(
    space: &HomSpace,
    p: &QuantizerParams,
    spec: &SampleSpec,
) -> Result<LocalityReport, CheckError> {
    let fd = FundamentalDomain::new(space.clone(), p.radial_step(), 1.0)?;
    let mut report = LocalityReport {
        local_max: 0.0,
        global_max: 0.0,
        max_pointwise_gap: 0.0,
    };
    for x in sample_points(space.dilation(), spec)? {
        let global = quantizer_sector_ratio(space, p, &x)?;
        let (z, _) = fd.project(&x)?;
        let local = quantizer_sector_ratio(space, p, &z)?;
        report.global_max = report.global_max.max(global);
        report.local_max = report.local_max.max(local);
        report.max_pointwise_gap = report.max_pointwise_gap.max((global - local).abs());
    }
    Ok(report)
}

/// Sampled `(c_min, c_max)` of `F₂(z) / F₁(z)^{ν₂/ν₁}` over `Ω(ϱ)`.
pub fn ratio_bounds_on_domain(
    f1: impl Fn(&DVector<f64>) -> f64,
    nu1: f64,
    f2: impl Fn(&DVector<f64>) -> f64,
    nu2: f64,
    fd: &FundamentalDomain,
    spec: &SampleSpec,
) -> Result<(f64, f64), CheckError> {
    if !(nu1 > 0.0 && nu2 > 0.0) {
        return Err(CheckError::NonPositiveDegree);
    }
    let d = fd.space().dilation();
    let range = (fd.rho(), fd.rho() * fd.discrete().step().exp());
    let domain = SampleSpec {
        radius_range: range,
        ..*spec
    };
    let mut c_min = f64::INFINITY;
    let mut c_max = f64::NEG_INFINITY;
    for (index, z) in sample_points(d, &domain)?.into_iter().enumerate() {
        let a = f1(&z);
        if !(a > 0.0) {
            return Err(CheckError::NonPositiveF1 { index, value: a });
        }
        let ratio = f2(&z) / a.powf(nu2 / nu1);
        c_min = c_min.min(ratio);
        c_max = c_max.max(ratio);
    }
    Ok((c_min, c_max))
}

/// Largest relative violation of `c_min F₁^{ν₂/ν₁} ≤ F₂ ≤ c_max F₁^{ν₂/ν₁}`
/// over samples drawn from `spec.radius_range`.
pub fn ratio_sandwich_violation(
    f1: impl Fn(&DVector<f64>) -> f64,
    nu1: f64,
    f2: impl Fn(&DVector<f64>) -> f64,
    nu2: f64,
    bounds: (f64, f64),
    d: &Dilation,
    spec: &SampleSpec,
) -> Result<f64, CheckError> {
    let mut worst: f64 = 0.0;
    for x in sample_points(d, spec)? {
        let base = f1(&x).powf(nu2 / nu1);
        let v = f2(&x);
        let lo = bounds.0 * base;
        let hi = bounds.1 * base;
        let scale = base.max(DENOM_FLOOR);
        worst = worst.max((lo - v) / scale).max((v - hi) / scale);
    }
    Ok(worst)
}
