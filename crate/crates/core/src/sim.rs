//! Fixed-step closed-loop simulation of homogeneous plants under (optionally
//! quantized) homogeneous state feedback.
//!
//! The right-hand side `f(x) + B u(x̂)` is discontinuous when `x̂ = q_h(x)`.
//! The quantizer is evaluated at every RK4 stage; there is no event
//! detection at cell boundaries.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::homcheck::{check_field_homogeneity, CheckError, SampleSpec};
use crate::homgeo::{GeoError, HomSpace};
use crate::lindil::Dilation;
use crate::quantizer::{HomQuantizer, QuantizerError, QuantizerParams};

/// Residual above which a drift is rejected as not homogeneous.
pub const PLANT_HOMOGENEITY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("drift is not homogeneous of degree {degree} (residual {residual:e})")]
    NotHomogeneous { degree: f64, residual: f64 },
    #[error("{what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("step must be positive and t_end at least one step (h = {step}, t_end = {t_end})")]
    InvalidHorizon { step: f64, t_end: f64 },
    #[error("state became non-finite at t = {time}")]
    NonFiniteState { time: f64, partial: Box<Trajectory> },
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Geometry(#[from] GeoError),
    #[error(transparent)]
    Quantizer(#[from] QuantizerError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

pub type Drift = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

/// `ẋ = f(x) + B u` with `f` homogeneous of degree `μ`.
#[derive(Clone)]
pub struct HomPlant {
    drift: Drift,
    input_matrix: DMatrix<f64>,
    degree: f64,
    space: HomSpace,
}

impl fmt::Debug for HomPlant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomPlant")
            .field("input_matrix", &self.input_matrix)
            .field("degree", &self.degree)
            .field("space", &self.space)
            .finish_non_exhaustive()
    }
}

impl HomPlant {
    pub fn new(
        drift: Drift,
        input_matrix: DMatrix<f64>,
        degree: f64,
        space: HomSpace,
    ) -> Result<Self, SimError> {
        let n = space.dim();
        if input_matrix.nrows() != n {
            return Err(SimError::DimensionMismatch {
                what: "input matrix rows",
                expected: n,
                got: input_matrix.nrows(),
            });
        }
        let spec = SampleSpec::default().with_count(200);
        let residual = check_field_homogeneity(|x| drift(x), space.dilation(), degree, &spec)?;
        if !(residual <= PLANT_HOMOGENEITY_TOL) {
            return Err(SimError::NotHomogeneous { degree, residual });
        }
        Ok(Self {
            drift,
            input_matrix,
            degree,
            space,
        })
    }

    pub fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.drift)(x)
    }

    pub fn input_matrix(&self) -> &DMatrix<f64> {
        &self.input_matrix
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn space(&self) -> &HomSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn inputs(&self) -> usize {
        self.input_matrix.ncols()
    }
}

/// `u(x) = ‖x‖_d^{κ} K d(-ln ‖x‖_d) x`, with `u(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomFeedback {
    pub gain: DMatrix<f64>,
    pub norm_power: f64,
}

impl HomFeedback {
    pub fn eval(&self, space: &HomSpace, x: &DVector<f64>) -> Result<DVector<f64>, GeoError> {
        match space.log_norm(x)? {
            None => Ok(DVector::zeros(self.gain.nrows())),
            Some(s) => Ok(&self.gain * space.dilation().apply(-s, x) * (self.norm_power * s).exp()),
        }
    }
}

/// Third-order example plant
/// `ẋ = (x₂x₃² + x₂², x₁, x₂ + x₃²) + (1, 0, 0)ᵀ u`,
/// homogeneous of degree 1 for `G = diag(3, 2, 1)`, `P = I`.
pub fn example_plant() -> HomPlant {
    let drift: Drift = Arc::new(|x: &DVector<f64>| {
        DVector::from_vec(vec![
            x[1] * x[2] * x[2] + x[1] * x[1],
            x[0],
            x[1] + x[2] * x[2],
        ])
    });
    let space: HomSpace = Dilation::diagonal(&[3.0, 2.0, 1.0])
        .expect("diag(3,2,1) is monotone")
        .into();
    HomPlant::new(
        drift,
        DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]),
        1.0,
        space,
    )
    .expect("example drift is homogeneous")
}

/// Gain and norm power that make [`example_plant`] a degree-1 closed loop.
pub fn example_feedback() -> HomFeedback {
    HomFeedback {
        gain: DMatrix::from_row_slice(1, 3, &[-5.5055, -15.8387, -16.3807]),
        norm_power: 4.0,
    }
}

/// `ν = 0.7`, `Δ = π/20` in three dimensions.
pub fn example_quantizer_params() -> QuantizerParams {
    QuantizerParams::new(0.7, PI / 20.0, 3).expect("valid example parameters")
}

/// Recorded closed-loop run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    /// Equal to `states` when quantization is off.
    pub quantized_states: Vec<DVector<f64>>,
    pub controls: Vec<DVector<f64>>,
    pub hom_norms: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&DVector<f64>> {
        self.states.last()
    }

    fn push(&mut self, t: f64, x: DVector<f64>, xq: DVector<f64>, u: DVector<f64>, r: f64) {
        self.times.push(t);
        self.states.push(x);
        self.quantized_states.push(xq);
        self.controls.push(u);
        self.hom_norms.push(r);
    }
}

struct ClosedLoop<'a> {
    plant: &'a HomPlant,
    feedback: &'a HomFeedback,
    quantizer: Option<&'a HomQuantizer>,
}

impl ClosedLoop<'_> {
    /// Returns `(x̂, u, ẋ)`.
    #[allow(clippy::type_complexity)]
    fn eval(
        &self,
        x: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>), SimError> {
        let xq = match self.quantizer {
            Some(q) => q.quantize(x)?,
            None => x.clone(),
        };
        let u = self.feedback.eval(self.plant.space(), &xq)?;
        let dx = self.plant.drift(x) + self.plant.input_matrix() * &u;
        Ok((xq, u, dx))
    }
}

fn is_non_finite(e: &SimError) -> bool {
    matches!(
        e,
        SimError::Geometry(GeoError::NonFinite)
            | SimError::Quantizer(QuantizerError::Geometry(GeoError::NonFinite))
    )
}

/// Integrates the closed loop with classical RK4 at fixed step `h`.
///
/// Records `t_k = k h` for `k = 0..=round(t_end/h)`. When `‖x‖` drops to
/// the zero threshold the remaining samples are recorded as zero.
pub fn simulate(
    plant: &HomPlant,
    feedback: &HomFeedback,
    quantizer: Option<&HomQuantizer>,
    x0: &DVector<f64>,
    h: f64,
    t_end: f64,
) -> Result<Trajectory, SimError> {
    let n = plant.dim();
    let m = plant.inputs();
    if x0.len() != n {
        return Err(SimError::DimensionMismatch {
            what: "initial state",
            expected: n,
            got: x0.len(),
        });
    }
    if feedback.gain.shape() != (m, n) {
        return Err(SimError::DimensionMismatch {
            what: "gain columns",
            expected: n,
            got: feedback.gain.ncols(),
        });
    }
    if let Some(q) = quantizer {
        if q.space().dim() != n {
            return Err(SimError::DimensionMismatch {
                what: "quantizer dimension",
                expected: n,
                got: q.space().dim(),
            });
        }
    }
    if !(h > 0.0 && h.is_finite() && t_end >= h && t_end.is_finite()) {
        return Err(SimError::InvalidHorizon { step: h, t_end });
    }

    let steps = (t_end / h).round() as usize;
    let system = ClosedLoop {
        plant,
        feedback,
        quantizer,
    };
    let space = plant.space();
    let mut traj = Trajectory::default();
    let mut x = x0.clone();

    for k in 0..=steps {
        let t = k as f64 * h;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFiniteState {
                time: t,
                partial: Box::new(traj),
            });
        }
        if space.is_zero(&x) {
            for j in k..=steps {
                traj.push(
                    j as f64 * h,
                    DVector::zeros(n),
                    DVector::zeros(n),
                    DVector::zeros(m),
                    0.0,
                );
            }
            break;
        }

        let stage = |y: &DVector<f64>| system.eval(y);
        let (xq, u, k1) = match stage(&x) {
            Ok(v) => v,
            Err(e) if is_non_finite(&e) => {
                return Err(SimError::NonFiniteState {
                    time: t,
                    partial: Box::new(traj),
                })
            }
            Err(e) => return Err(e),
        };
        let r = space.norm(&x)?;
        traj.push(t, x.clone(), xq, u, r);
        if k == steps {
            break;
        }

        let next = (|| -> Result<DVector<f64>, SimError> {
            let (_, _, k2) = stage(&(&x + &k1 * (0.5 * h)))?;
            let (_, _, k3) = stage(&(&x + &k2 * (0.5 * h)))?;
            let (_, _, k4) = stage(&(&x + &k3 * h))?;
            Ok(&x + (&k1 + &k2 * 2.0 + &k3 * 2.0 + &k4) * (h / 6.0))
        })();
        x = match next {
            Ok(v) => v,
            Err(e) if is_non_finite(&e) => {
                return Err(SimError::NonFiniteState {
                    time: t + h,
                    partial: Box::new(traj),
                })
            }
            Err(e) => return Err(e),
        };
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settling {
    /// First time after which `‖x(t)‖ ≤ threshold` at every recorded sample.
    pub t_enter: Option<f64>,
    /// `max_t ‖x(t)‖ / ‖x(0)‖`, zero for a zero initial state.
    pub overshoot: f64,
}

/// Settling time and overshoot in the Euclidean norm.
pub fn settling_metrics(traj: &Trajectory, threshold: f64) -> Result<Settling, SimError> {
    if traj.is_empty() {
        return Err(SimError::EmptyTrajectory);
    }
    if !(threshold > 0.0) {
        return Err(SimError::InvalidThreshold(threshold));
    }
    let norms: Vec<f64> = traj.states.iter().map(|x| x.norm()).collect();
    let t_enter = match norms.iter().rposition(|&v| v > threshold) {
        None => Some(traj.times[0]),
        Some(i) if i + 1 == norms.len() => None,
        Some(i) => Some(traj.times[i + 1]),
    };
    let peak = norms.iter().copied().fold(0.0, f64::max);
    let overshoot = if norms[0] > 0.0 { peak / norms[0] } else { 0.0 };
    Ok(Settling { t_enter, overshoot })
}
