//! Linear continuous dilations `d(s) = e^{sG}` that are strictly monotone with
//! respect to a weighted Euclidean norm `‖x‖ = √(xᵀPx)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::expm::{expm, is_diagonal};

/// Smallest eigenvalue accepted for `P` and for `PG + GᵀP`.
pub const EIGEN_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DilationError {
    #[error("matrices must have at least one row")]
    Empty,
    #[error("{name} is {rows}x{cols}, expected a square matrix")]
    NotSquare {
        name: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("generator is {generator}x{generator} but weight is {weight}x{weight}")]
    DimensionMismatch { generator: usize, weight: usize },
    #[error("{0} has non-finite entries")]
    NonFinite(&'static str),
    #[error("weight is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("weight is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("dilation is not monotone: smallest eigenvalue of PG + GᵀP is {min_eigenvalue:e}")]
    NotMonotone { min_eigenvalue: f64 },
    #[error("discrete dilation step must be positive and finite, got {0}")]
    NonPositiveStep(f64),
}

/// A strictly monotone linear dilation together with its weighted norm.
///
/// The monotonicity constants `eta_min`/`eta_max` are half the extreme
/// eigenvalues of `P^{1/2} G P^{-1/2} + P^{-1/2} Gᵀ P^{1/2}`.
#[derive(Debug, Clone)]
pub struct Dilation {
    generator: DMatrix<f64>,
    weight: DMatrix<f64>,
    weight_sqrt: DMatrix<f64>,
    weight_inv_sqrt: DMatrix<f64>,
    eta_min: f64,
    eta_max: f64,
    generator_norm: f64,
    diagonal: Option<DVector<f64>>,
    unit_weight: bool,
}

impl Dilation {
    pub fn new(generator: DMatrix<f64>, weight: DMatrix<f64>) -> Result<Self, DilationError> {
        let n = generator.nrows();
        if n == 0 {
            return Err(DilationError::Empty);
        }
        for (name, m) in [("generator", &generator), ("weight", &weight)] {
            if m.nrows() != m.ncols() {
                return Err(DilationError::NotSquare {
                    name,
                    rows: m.nrows(),
                    cols: m.ncols(),
                });
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(DilationError::NonFinite(name));
            }
        }
        if weight.nrows() != n {
            return Err(DilationError::DimensionMismatch {
                generator: n,
                weight: weight.nrows(),
            });
        }

        let scale = weight.amax();
        let asymmetry = (&weight - weight.transpose()).amax();
        if asymmetry > SYMMETRY_TOL * scale {
            return Err(DilationError::NotSymmetric { asymmetry });
        }
        let weight = (&weight + weight.transpose()) * 0.5;

        let eig = SymmetricEigen::new(weight.clone());
        let min_eigenvalue = eig.eigenvalues.min();
        if min_eigenvalue <= EIGEN_TOL {
            return Err(DilationError::NotPositiveDefinite { min_eigenvalue });
        }

        let lmi = &weight * &generator + generator.transpose() * &weight;
        let min_eigenvalue = SymmetricEigen::new(symmetrize(&lmi)).eigenvalues.min();
        if min_eigenvalue <= EIGEN_TOL {
            return Err(DilationError::NotMonotone { min_eigenvalue });
        }

        let weight_sqrt = spectral_map(&eig, f64::sqrt);
        let weight_inv_sqrt = spectral_map(&eig, |v| 1.0 / v.sqrt());
        let similar = &weight_sqrt * &generator * &weight_inv_sqrt;
        let sym = &similar + similar.transpose();
        let sym_eig = SymmetricEigen::new(symmetrize(&sym)).eigenvalues;
        let eta_min = 0.5 * sym_eig.min();
        let eta_max = 0.5 * sym_eig.max();
        let generator_norm = similar.singular_values().max();

        let diagonal = is_diagonal(&generator).then(|| generator.diagonal());
        let unit_weight = weight.is_identity(0.0);

        Ok(Self {
            generator,
            weight,
            weight_sqrt,
            weight_inv_sqrt,
            eta_min,
            eta_max,
            generator_norm,
            diagonal,
            unit_weight,
        })
    }

    /// The standard dilation `e^s I` with the Euclidean norm.
    pub fn standard(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n), DMatrix::identity(n, n))
            .expect("identity generator is monotone")
    }

    /// Diagonal generator with identity weight.
    pub fn diagonal(weights: &[f64]) -> Result<Self, DilationError> {
        let n = weights.len();
        Self::new(
            DMatrix::from_diagonal(&DVector::from_column_slice(weights)),
            DMatrix::identity(n, n),
        )
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn weight(&self) -> &DMatrix<f64> {
        &self.weight
    }

    pub fn weight_sqrt(&self) -> &DMatrix<f64> {
        &self.weight_sqrt
    }

    pub fn weight_inv_sqrt(&self) -> &DMatrix<f64> {
        &self.weight_inv_sqrt
    }

    pub fn eta_min(&self) -> f64 {
        self.eta_min
    }

    pub fn eta_max(&self) -> f64 {
        self.eta_max
    }

    /// Operator norm of the generator induced by the weighted norm.
    pub fn generator_norm(&self) -> f64 {
        self.generator_norm
    }

    /// `d(s) = e^{sG}`.
    pub fn dilate(&self, s: f64) -> DMatrix<f64> {
        match &self.diagonal {
            Some(g) => DMatrix::from_diagonal(&g.map(|gi| (gi * s).exp())),
            None => expm(&(&self.generator * s)),
        }
    }

    /// `d(s) x` without materialising the matrix when the generator is diagonal.
    pub fn apply(&self, s: f64, x: &DVector<f64>) -> DVector<f64> {
        match &self.diagonal {
            Some(g) => x.zip_map(g, |xi, gi| xi * (gi * s).exp()),
            None => self.dilate(s) * x,
        }
    }

    /// Weighted Euclidean norm `√(xᵀPx)`.
    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// `‖d(s)x‖` computed without allocating when the generator is diagonal.
    pub fn norm_of_apply(&self, s: f64, x: &DVector<f64>) -> f64 {
        match &self.diagonal {
            Some(g) if self.unit_weight => x
                .iter()
                .zip(g.iter())
                .map(|(xi, gi)| {
                    let v = xi * (gi * s).exp();
                    v * v
                })
                .sum::<f64>()
                .sqrt(),
            _ => self.norm(&self.apply(s, x)),
        }
    }

    /// Weighted inner product `xᵀPy`.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.weight * y))
    }

    /// Weighted operator norm of `d(s)`.
    pub fn operator_norm(&self, s: f64) -> f64 {
        let m = &self.weight_sqrt * self.dilate(s) * &self.weight_inv_sqrt;
        m.singular_values().max()
    }

    /// Bounds `(lower, upper)` with `lower ≤ ‖d(s)x‖/‖x‖ ≤ upper` for all `x ≠ 0`.
    pub fn norm_bounds(&self, s: f64) -> (f64, f64) {
        let a = (self.eta_min * s).exp();
        let b = (self.eta_max * s).exp();
        if s >= 0.0 {
            (a, b)
        } else {
            (b, a)
        }
    }
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn spectral_map(eig: &SymmetricEigen<f64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    symmetrize(&(v * d * v.transpose()))
}

/// A dilation restricted to the additive seed group `{k·step : k ∈ ℤ}`.
#[derive(Debug, Clone)]
pub struct DiscreteDilation {
    base: Dilation,
    step: f64,
}

impl DiscreteDilation {
    pub fn new(base: Dilation, step: f64) -> Result<Self, DilationError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(DilationError::NonPositiveStep(step));
        }
        Ok(Self { base, step })
    }

    pub fn base(&self) -> &Dilation {
        &self.base
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// The `k`-th seed `k·step`.
    pub fn seed(&self, k: i64) -> f64 {
        k as f64 * self.step
    }

    pub fn apply(&self, k: i64, x: &DVector<f64>) -> DVector<f64> {
        self.base.apply(self.seed(k), x)
    }
}
