//! Canonical homogeneous norm and the homogeneous Euclidean space it induces.
//!
//! For a monotone dilation `d` and weighted norm `‖·‖`, the canonical
//! homogeneous norm of `x ≠ 0` is `e^s` where `s` solves `‖d(-s)x‖ = 1`.
//! The map `Φ(x) = ‖x‖_d d(-ln ‖x‖_d) x` is a homeomorphism of `ℝⁿ`; the
//! operations `+̃`, `·̃` and `⟨·,·⟩_d` are the Euclidean ones transported
//! through `Φ`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::lindil::{Dilation, DilationError, DiscreteDilation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("homogeneous norm solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("operation undefined at the zero vector")]
    ZeroVector,
    #[error("argument must be nonnegative, got {0}")]
    NegativeInput(f64),
    #[error("vector has non-finite entries")]
    NonFinite,
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("fundamental domain radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error(transparent)]
    Dilation(#[from] DilationError),
}

/// Settings for the canonical homogeneous norm solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomNormConfig {
    /// Accepted residual `|‖d(-s)x‖ - 1|`.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Weighted norm at or below which a vector counts as zero.
    pub zero_threshold: f64,
}

impl Default for HomNormConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_iter: 200,
            zero_threshold: 1e-12,
        }
    }
}

impl HomNormConfig {
    pub fn validate(&self) -> Result<(), GeoError> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(GeoError::InvalidConfig("rel_tol must be positive"));
        }
        if !(self.zero_threshold >= 0.0 && self.zero_threshold.is_finite()) {
            return Err(GeoError::InvalidConfig(
                "zero_threshold must be nonnegative",
            ));
        }
        if self.max_iter == 0 {
            return Err(GeoError::InvalidConfig("max_iter must be positive"));
        }
        Ok(())
    }
}

/// A dilation equipped with its canonical homogeneous norm.
#[derive(Debug, Clone)]
pub struct HomSpace {
    dilation: Dilation,
    cfg: HomNormConfig,
}

impl From<Dilation> for HomSpace {
    fn from(dilation: Dilation) -> Self {
        Self {
            dilation,
            cfg: HomNormConfig::default(),
        }
    }
}

impl HomSpace {
    pub fn new(dilation: Dilation, cfg: HomNormConfig) -> Result<Self, GeoError> {
        cfg.validate()?;
        Ok(Self { dilation, cfg })
    }

    pub fn dilation(&self) -> &Dilation {
        &self.dilation
    }

    pub fn config(&self) -> &HomNormConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.dilation.dim()
    }

    fn check(&self, x: &DVector<f64>) -> Result<(), GeoError> {
        if x.len() != self.dim() {
            return Err(GeoError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(GeoError::NonFinite);
        }
        Ok(())
    }

    pub fn is_zero(&self, x: &DVector<f64>) -> bool {
        self.dilation.norm(x) <= self.cfg.zero_threshold
    }

    /// Canonical homogeneous norm `‖x‖_d`.
    pub fn norm(&self, x: &DVector<f64>) -> Result<f64, GeoError> {
        Ok(self.log_norm(x)?.map_or(0.0, f64::exp))
    }

    /// `ln ‖x‖_d`, or `None` when `x` is treated as zero.
    ///
    /// Bisection on `g(s) = ‖d(-s)x‖ - 1`, which is strictly decreasing. The
    /// initial bracket comes from `‖x‖_d^{η̲} ≤ ‖x‖ ≤ ‖x‖_d^{η̄}` (reversed
    /// inside the unit ball).
    pub fn log_norm(&self, x: &DVector<f64>) -> Result<Option<f64>, GeoError> {
        self.check(x)?;
        let d = &self.dilation;
        let nx = d.norm(x);
        if nx <= self.cfg.zero_threshold {
            return Ok(None);
        }
        if !nx.is_finite() {
            return Err(GeoError::NonFinite);
        }
        if nx == 1.0 {
            return Ok(Some(0.0));
        }
        let g = |s: f64| d.norm_of_apply(-s, x) - 1.0;

        let ln_nx = nx.ln();
        let (a, b) = (ln_nx / d.eta_max(), ln_nx / d.eta_min());
        let pad = 1e-9 * (1.0 + a.abs().max(b.abs()));
        let (mut lo, mut hi) = (a.min(b) - pad, a.max(b) + pad);
        let mut iterations = 0;

        // The analytic bracket is exact up to rounding; widen if rounding bit.
        let mut width = hi - lo;
        if !(g(lo).is_finite() && g(hi).is_finite()) {
            return Err(GeoError::NonFinite);
        }
        while g(lo) < 0.0 {
            iterations += 1;
            if iterations > self.cfg.max_iter {
                return Err(GeoError::NoConvergence {
                    iterations,
                    residual: g(lo).abs(),
                });
            }
            hi = lo;
            lo -= width;
            width *= 2.0;
        }
        while g(hi) > 0.0 {
            iterations += 1;
            if iterations > self.cfg.max_iter {
                return Err(GeoError::NoConvergence {
                    iterations,
                    residual: g(hi).abs(),
                });
            }
            lo = hi;
            hi += width;
            width *= 2.0;
        }

        // Bisect to full precision: boundary cases such as ‖x‖_d = 2 exactly
        // must come out exact for the half-open quantizer cells.
        while iterations < self.cfg.max_iter {
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let gm = g(mid);
            if gm == 0.0 {
                return Ok(Some(mid));
            }
            if gm > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (glo, ghi) = (g(lo).abs(), g(hi).abs());
        let (s, residual) = if glo <= ghi { (lo, glo) } else { (hi, ghi) };
        if residual <= self.cfg.rel_tol {
            Ok(Some(s))
        } else {
            Err(GeoError::NoConvergence {
                iterations,
                residual,
            })
        }
    }

    /// Homogeneous projection `π_d(x) = d(-ln ‖x‖_d) x` onto the unit sphere.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>, GeoError> {
        match self.log_norm(x)? {
            Some(s) => Ok(self.dilation.apply(-s, x)),
            None => Err(GeoError::ZeroVector),
        }
    }

    /// `Φ(x) = ‖x‖_d π_d(x)`, with `Φ(0) = 0`.
    pub fn phi(&self, x: &DVector<f64>) -> Result<DVector<f64>, GeoError> {
        match self.log_norm(x)? {
            Some(s) => Ok(self.dilation.apply(-s, x) * s.exp()),
            None => Ok(DVector::zeros(x.len())),
        }
    }

    /// `Φ⁻¹(y) = ‖y‖⁻¹ d(ln ‖y‖) y`, with `Φ⁻¹(0) = 0`.
    pub fn phi_inv(&self, y: &DVector<f64>) -> DVector<f64> {
        let ny = self.dilation.norm(y);
        if ny <= self.cfg.zero_threshold || !ny.is_finite() {
            return DVector::zeros(y.len());
        }
        self.dilation.apply(ny.ln(), y) / ny
    }

    /// `x +̃ y = Φ⁻¹(Φ(x) + Φ(y))`.
    pub fn tilde_add(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>, GeoError> {
        Ok(self.phi_inv(&(self.phi(x)? + self.phi(y)?)))
    }

    /// `x -̃ y = x +̃ (-y)`.
    pub fn tilde_sub(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>, GeoError> {
        Ok(self.phi_inv(&(self.phi(x)? - self.phi(y)?)))
    }

    /// `λ ·̃ x = sign(λ) d(ln |λ|) x`, with `0 ·̃ x = 0`.
    pub fn tilde_scale(&self, lambda: f64, x: &DVector<f64>) -> DVector<f64> {
        if lambda == 0.0 {
            return DVector::zeros(x.len());
        }
        self.dilation.apply(lambda.abs().ln(), x) * lambda.signum()
    }

    /// `⟨x, y⟩_d = ⟨Φ(x), Φ(y)⟩`.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64, GeoError> {
        Ok(self.dilation.inner(&self.phi(x)?, &self.phi(y)?))
    }

    /// `H ·̃ x = Φ⁻¹(H Φ(x))`.
    pub fn matrix_apply(
        &self,
        h: &DMatrix<f64>,
        x: &DVector<f64>,
    ) -> Result<DVector<f64>, GeoError> {
        Ok(self.phi_inv(&(h * self.phi(x)?)))
    }

    fn alpha1_bar(&self, r: f64) -> f64 {
        let d = &self.dilation;
        r.powf(1.0 / d.eta_max()).max(r.powf(1.0 / d.eta_min()))
    }

    /// `ᾱ₂(ϑ)`, the bound on `‖I - d(s̃)‖` in terms of the relative
    /// `Φ`-coordinate distance `ϑ`. The contracting branch saturates at
    /// `1/η̲` for `ϑ ≥ 1`.
    pub fn alpha2_bar(&self, vartheta: f64) -> Result<f64, GeoError> {
        if !(vartheta >= 0.0) {
            return Err(GeoError::NegativeInput(vartheta));
        }
        let d = &self.dilation;
        let (lo, hi) = (d.eta_min(), d.eta_max());
        let expanding = ((vartheta + 1.0).powf(hi) - 1.0) / hi;
        let contracting = (1.0 - (1.0 - vartheta).max(0.0).powf(lo)) / lo;
        Ok(d.generator_norm() * expanding.max(contracting))
    }

    /// Class-K upper bound `α₁(ϑ) = ᾱ₁(ᾱ₂(ϑ) + 2ϑ)²` on
    /// `⟨y-x, y-x⟩_d / ⟨x, x⟩_d` where `ϑ = ‖Φ(y) - Φ(x)‖ / ‖Φ(x)‖`.
    pub fn distance_bound_alpha1(&self, vartheta: f64) -> Result<f64, GeoError> {
        let inner = self.alpha2_bar(vartheta)? + 2.0 * vartheta;
        Ok(self.alpha1_bar(inner).powi(2))
    }

    /// `1 - max{(1+ϑ)^{η̄}, (1+ϑ)^{η̲}}`, the raw lower-bound construction.
    /// It is nonpositive for every `ϑ ≥ 0`, so it is reported only.
    pub fn distance_lower_bound_raw(&self, vartheta: f64) -> Result<f64, GeoError> {
        if !(vartheta >= 0.0) {
            return Err(GeoError::NegativeInput(vartheta));
        }
        let d = &self.dilation;
        let base = 1.0 + vartheta;
        Ok(1.0 - base.powf(d.eta_max()).max(base.powf(d.eta_min())))
    }
}

/// The annulus `Ω(ϱ) = {ϱ ≤ ‖z‖_d < ϱ e^a}` of a discrete dilation with step `a`.
#[derive(Debug, Clone)]
pub struct FundamentalDomain {
    space: HomSpace,
    discrete: DiscreteDilation,
    rho: f64,
}

impl FundamentalDomain {
    pub fn new(space: HomSpace, step: f64, rho: f64) -> Result<Self, GeoError> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(GeoError::InvalidRadius(rho));
        }
        let discrete = DiscreteDilation::new(space.dilation().clone(), step)?;
        Ok(Self {
            space,
            discrete,
            rho,
        })
    }

    pub fn space(&self) -> &HomSpace {
        &self.space
    }

    pub fn discrete(&self) -> &DiscreteDilation {
        &self.discrete
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    fn membership(&self, r: f64, k: i64) -> std::cmp::Ordering {
        let scaled = r * (-self.discrete.seed(k)).exp();
        if scaled < self.rho {
            std::cmp::Ordering::Less
        } else if scaled >= self.rho * self.discrete.step().exp() {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    }

    /// Whether a homogeneous radius `r` lies in `[ϱ, ϱe^a)`.
    pub fn contains_radius(&self, r: f64) -> bool {
        self.membership(r, 0) == std::cmp::Ordering::Equal
    }

    /// The unique `k` with `d(-k a) x ∈ Ω(ϱ)`.
    pub fn index(&self, x: &DVector<f64>) -> Result<i64, GeoError> {
        let r = self.space.norm(x)?;
        if r == 0.0 {
            return Err(GeoError::ZeroVector);
        }
        Ok(self.index_of_radius(r))
    }

    pub(crate) fn index_of_radius(&self, r: f64) -> i64 {
        use std::cmp::Ordering;
        let mut k = ((r / self.rho).ln() / self.discrete.step()).floor() as i64;
        for _ in 0..4 {
            match self.membership(r, k) {
                Ordering::Equal => break,
                Ordering::Less => k -= 1,
                Ordering::Greater => k += 1,
            }
        }
        k
    }

    /// The projection `d(-k a) x` of `x` onto `Ω(ϱ)` and its index `k`.
    pub fn project(&self, x: &DVector<f64>) -> Result<(DVector<f64>, i64), GeoError> {
        let k = self.index(x)?;
        Ok((self.discrete.apply(-k, x), k))
    }
}
