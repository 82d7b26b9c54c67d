//! Homogeneous polar-spherical quantization.
//!
//! A state is split into its canonical homogeneous norm and its homogeneous
//! projection on the unit sphere. The norm goes through a logarithmic
//! quantizer with density `ν`, the direction through a uniform quantizer on
//! spherical angles with step `Δ`, and the two are recombined with the
//! dilation: `q_h(x) = d(ln q_r(‖x‖_d)) q_s(π_d(x))`.

use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use thiserror::Error;

use crate::homgeo::{GeoError, HomSpace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantizerError {
    #[error("radial density nu must lie in (0, 1), got {0}")]
    InvalidDensity(f64),
    #[error("angular step must lie in (0, pi], got {0}")]
    InvalidAngle(f64),
    #[error("radial anchor xi0 must be positive and finite, got {0}")]
    InvalidAnchor(f64),
    #[error("spherical coordinates need dimension at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("input must be nonnegative, got {0}")]
    NegativeInput(f64),
    #[error("seed enumeration supports n = 2 or 3, got {0}")]
    UnsupportedDimension(usize),
    #[error("vector is not on the unit sphere (weighted norm {0})")]
    NotOnSphere(f64),
    #[error(transparent)]
    Geometry(#[from] GeoError),
}

/// Parameters of the composite quantizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerParams {
    nu: f64,
    xi0: f64,
    delta_angle: f64,
    dim: usize,
}

impl QuantizerParams {
    /// Density `nu`, angular step `delta_angle` and the default anchor
    /// `ξ₀ = 2/(1+ν)`, which aligns the zeroth radial cell with `[1, 1/ν)`.
    pub fn new(nu: f64, delta_angle: f64, dim: usize) -> Result<Self, QuantizerError> {
        Self::with_anchor(nu, 2.0 / (1.0 + nu), delta_angle, dim)
    }

    pub fn with_anchor(
        nu: f64,
        xi0: f64,
        delta_angle: f64,
        dim: usize,
    ) -> Result<Self, QuantizerError> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(QuantizerError::InvalidDensity(nu));
        }
        if !(delta_angle > 0.0 && delta_angle <= PI) {
            return Err(QuantizerError::InvalidAngle(delta_angle));
        }
        if !(xi0 > 0.0 && xi0.is_finite()) {
            return Err(QuantizerError::InvalidAnchor(xi0));
        }
        if dim < 2 {
            return Err(QuantizerError::DimensionTooSmall(dim));
        }
        Ok(Self {
            nu,
            xi0,
            delta_angle,
            dim,
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn xi0(&self) -> f64 {
        self.xi0
    }

    pub fn delta_angle(&self) -> f64 {
        self.delta_angle
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Radial sector width `δ = (1-ν)/(1+ν)`.
    pub fn delta(&self) -> f64 {
        (1.0 - self.nu) / (1.0 + self.nu)
    }

    /// Dilation step `-ln ν` under which `q_h` is homogeneous.
    pub fn radial_step(&self) -> f64 {
        -self.nu.ln()
    }

    /// Seed value `ν^i ξ₀` of radial level `i`.
    pub fn level_value(&self, level: i32) -> f64 {
        self.nu.powi(level) * self.xi0
    }

    /// Half-open interval `[ν^i ξ₀/(1+δ), ν^i ξ₀/(1-δ))` of radial level `i`.
    pub fn level_interval(&self, level: i32) -> (f64, f64) {
        let v = self.level_value(level);
        let d = self.delta();
        (v / (1.0 + d), v / (1.0 - d))
    }

    /// `β(Δ) = 2√(1 - cos^{2(n-1)}(Δ/2))`.
    pub fn beta(&self) -> f64 {
        beta(self.delta_angle, self.dim)
    }

    /// `ε̃ = (1+δ)β(Δ) + δ`, the homogeneous sector width of `q_h`.
    pub fn epsilon_tilde(&self) -> f64 {
        let d = self.delta();
        (1.0 + d) * self.beta() + d
    }

    /// Bound on the spherical error `‖q_s(u) - u‖`:
    /// `√(2 - 2(2cos^{2(n-1)}(Δ/2) - 1))`.
    pub fn spherical_error_bound(&self) -> f64 {
        let c = (self.delta_angle / 2.0)
            .cos()
            .powi(2 * (self.dim as i32 - 1));
        (2.0 - 2.0 * (2.0 * c - 1.0)).max(0.0).sqrt()
    }

    /// Number of grid points on the azimuthal angle `θ_{n-1} ∈ [0, 2π)`.
    pub fn azimuth_steps(&self) -> usize {
        ((TAU / self.delta_angle).round() as usize).max(1)
    }

    /// Largest grid index on a polar angle `θ_i ∈ [0, π]`.
    pub fn polar_steps(&self) -> usize {
        (PI / self.delta_angle).round() as usize
    }

    /// Grid value of polar index `k`, clamped to `π`.
    pub fn polar_value(&self, k: usize) -> f64 {
        (k as f64 * self.delta_angle).min(PI)
    }

    /// Grid value of azimuthal index `k`.
    pub fn azimuth_value(&self, k: usize) -> f64 {
        (k % self.azimuth_steps()) as f64 * self.delta_angle
    }

    fn round_polar(&self, theta: f64) -> usize {
        let k = (theta / self.delta_angle + 0.5).floor().max(0.0) as usize;
        k.min(self.polar_steps())
    }

    fn round_azimuth(&self, theta: f64) -> usize {
        let k = (theta / self.delta_angle + 0.5).floor().max(0.0) as usize;
        k % self.azimuth_steps()
    }
}

/// `β(Δ)` for dimension `n`; zero at `Δ = 0`.
pub fn beta(delta_angle: f64, n: usize) -> f64 {
    let c = (delta_angle / 2.0).cos().powi(2 * (n as i32 - 1));
    2.0 * (1.0 - c).max(0.0).sqrt()
}

/// Output of the logarithmic quantizer. `level` is `None` for `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialLevel {
    pub value: f64,
    pub level: Option<i32>,
}

/// Logarithmic quantizer `q_r(z) = ν^i ξ₀` for `z ∈ I_i`, `q_r(0) = 0`.
///
/// Membership in `I_i` is tested in the equivalent sector form
/// `v - z ≤ δz` (closed lower end) and `z - v < δz` (open upper end), so the
/// returned value satisfies `|v - z| ≤ δz` as evaluated in floating point.
pub fn log_quantize(p: &QuantizerParams, z: f64) -> Result<RadialLevel, QuantizerError> {
    if !(z >= 0.0) {
        return Err(QuantizerError::NegativeInput(z));
    }
    if z == 0.0 {
        return Ok(RadialLevel {
            value: 0.0,
            level: None,
        });
    }
    let d = p.delta();
    let mut i = (((1.0 - d) * z / p.xi0).ln() / p.nu.ln()).floor() as i32;
    let mut best = None;
    for _ in 0..8 {
        let v = p.level_value(i);
        let above = v - z > d * z;
        let below = z - v >= d * z;
        let miss = ((v - z).abs() - d * z).max(0.0);
        if best.is_none_or(|(_, m): (i32, f64)| miss < m) {
            best = Some((i, miss));
        }
        if above {
            // seed too large: move to a finer (higher) level
            i += 1;
        } else if below {
            i -= 1;
        } else {
            return Ok(RadialLevel {
                value: v,
                level: Some(i),
            });
        }
    }
    // Rounding left a gap between adjacent cells at z; take the closest seed.
    let (i, _) = best.expect("at least one level was tried");
    Ok(RadialLevel {
        value: p.level_value(i),
        level: Some(i),
    })
}

/// Polar-spherical coordinates: radius and `n-1` angles.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalCoords {
    pub radius: f64,
    pub angles: Vec<f64>,
}

/// Euclidean spherical coordinates of `y`.
///
/// `θ_i = atan2(√(Σ_{j>i} y_j²), y_i)` for `i ≤ n-2` and
/// `θ_{n-1} = atan2(y_n, y_{n-1})` mapped into `[0, 2π)`.
pub fn to_spherical(y: &DVector<f64>) -> Result<SphericalCoords, QuantizerError> {
    let n = y.len();
    if n < 2 {
        return Err(QuantizerError::DimensionTooSmall(n));
    }
    // tail[i] = ‖(y_i, ..., y_n)‖ (0-based)
    let mut tail = vec![0.0f64; n + 1];
    for i in (0..n).rev() {
        tail[i] = tail[i + 1].hypot(y[i]);
    }
    let mut angles = Vec::with_capacity(n - 1);
    for i in 0..n - 2 {
        angles.push(tail[i + 1].atan2(y[i]));
    }
    let mut last = y[n - 1].atan2(y[n - 2]);
    if last < 0.0 {
        last += TAU;
    }
    if last >= TAU {
        last = 0.0;
    }
    angles.push(last);
    Ok(SphericalCoords {
        radius: tail[0],
        angles,
    })
}

/// Inverse of [`to_spherical`] (product-of-sines reconstruction).
pub fn from_spherical(c: &SphericalCoords) -> Result<DVector<f64>, QuantizerError> {
    let n = c.angles.len() + 1;
    if n < 2 {
        return Err(QuantizerError::DimensionTooSmall(n));
    }
    let mut y = DVector::zeros(n);
    let mut sines = c.radius;
    for (k, theta) in c.angles.iter().enumerate() {
        y[k] = sines * theta.cos();
        sines *= theta.sin();
    }
    y[n - 1] = sines;
    Ok(y)
}

/// Spherical quantizer `q_s` on the unit sphere of the weighted norm.
///
/// The direction is whitened by `P^{1/2}`, each angle is rounded to
/// `⌊θ/Δ + 1/2⌋Δ` (the azimuth modulo `2π`), and the result is mapped back
/// with `P^{-1/2}`.
pub fn spherical_quantize(
    space: &HomSpace,
    p: &QuantizerParams,
    u: &DVector<f64>,
) -> Result<DVector<f64>, QuantizerError> {
    let (_, w) = spherical_index(space, p, u)?;
    Ok(w)
}

/// Grid indices of `q_s(u)` (polar indices then the azimuthal index) and
/// the seed itself.
pub fn spherical_index(
    space: &HomSpace,
    p: &QuantizerParams,
    u: &DVector<f64>,
) -> Result<(Vec<usize>, DVector<f64>), QuantizerError> {
    let d = space.dilation();
    if u.len() != p.dim || u.len() != d.dim() {
        return Err(QuantizerError::DimensionMismatch {
            expected: p.dim,
            got: u.len(),
        });
    }
    let norm = d.norm(u);
    if !((norm - 1.0).abs() <= 1e-8) {
        return Err(QuantizerError::NotOnSphere(norm));
    }
    let c = to_spherical(&(d.weight_sqrt() * u))?;
    let m = c.angles.len();
    let mut index = Vec::with_capacity(m);
    let mut angles = Vec::with_capacity(m);
    for (k, theta) in c.angles.iter().enumerate() {
        if k + 1 == m {
            let j = p.round_azimuth(*theta);
            index.push(j);
            angles.push(p.azimuth_value(j));
        } else {
            let j = p.round_polar(*theta);
            index.push(j);
            angles.push(p.polar_value(j));
        }
    }
    let w = from_spherical(&SphericalCoords {
        radius: 1.0,
        angles,
    })?;
    Ok((index, d.weight_inv_sqrt() * w))
}

/// Seed on the unit sphere for the given angle indices.
pub fn spherical_seed(
    space: &HomSpace,
    p: &QuantizerParams,
    index: &[usize],
) -> Result<DVector<f64>, QuantizerError> {
    if index.len() + 1 != p.dim {
        return Err(QuantizerError::DimensionMismatch {
            expected: p.dim - 1,
            got: index.len(),
        });
    }
    let m = index.len();
    let angles = index
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            if k + 1 == m {
                p.azimuth_value(j)
            } else {
                p.polar_value(j)
            }
        })
        .collect();
    let w = from_spherical(&SphericalCoords {
        radius: 1.0,
        angles,
    })?;
    Ok(space.dilation().weight_inv_sqrt() * w)
}

/// Homogeneous polar-spherical quantizer `q_h`, with `q_h(0) = 0`.
pub fn hom_quantize(
    space: &HomSpace,
    p: &QuantizerParams,
    x: &DVector<f64>,
) -> Result<DVector<f64>, QuantizerError> {
    if x.len() != p.dim {
        return Err(QuantizerError::DimensionMismatch {
            expected: p.dim,
            got: x.len(),
        });
    }
    let Some(s) = space.log_norm(x)? else {
        return Ok(DVector::zeros(x.len()));
    };
    let d = space.dilation();
    let radial = log_quantize(p, s.exp())?;
    let direction = spherical_quantize(space, p, &d.apply(-s, x))?;
    Ok(d.apply(radial.value.ln(), &direction))
}

/// Distance of `x` from the nearest cell boundary of `q_h`, measured in
/// fractions of a cell: the radial coordinate is `log_ν((1-δ)‖x‖_d/ξ₀)` and
/// each angle is `θ/Δ + 1/2`; boundaries sit at integers. Returns `None`
/// for the zero vector.
pub fn cell_boundary_distance(
    space: &HomSpace,
    p: &QuantizerParams,
    x: &DVector<f64>,
) -> Result<Option<f64>, QuantizerError> {
    let Some(s) = space.log_norm(x)? else {
        return Ok(None);
    };
    let d = space.dilation();
    let frac_dist = |t: f64| (t - t.round()).abs();
    let radial = ((1.0 - p.delta()).ln() + s - p.xi0.ln()) / p.nu.ln();
    let mut dist = frac_dist(radial);
    let c = to_spherical(&(d.weight_sqrt() * d.apply(-s, x)))?;
    for theta in &c.angles {
        dist = dist.min(frac_dist(theta / p.delta_angle + 0.5));
    }
    Ok(Some(dist))
}

/// One quantization seed `d(ln ν^i ξ₀) w` for a grid direction `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    pub level: i32,
    pub angle_index: usize,
    pub coords: DVector<f64>,
    /// Homogeneous norm of `coords`, recomputed by the solver.
    pub hnorm: f64,
}

/// Every seed of radial levels `lo..=hi` in two or three dimensions.
///
/// In three dimensions the poles appear once each and `angle_index` is
/// `j M + k` for polar index `j` and azimuthal index `k` out of `M`.
pub fn seed_grid(
    space: &HomSpace,
    p: &QuantizerParams,
    levels: (i32, i32),
) -> Result<Vec<Seed>, QuantizerError> {
    let n = p.dim;
    if n != 2 && n != 3 {
        return Err(QuantizerError::UnsupportedDimension(n));
    }
    if space.dim() != n {
        return Err(QuantizerError::DimensionMismatch {
            expected: n,
            got: space.dim(),
        });
    }
    let m = p.azimuth_steps();
    let mut grid: Vec<(usize, Vec<usize>)> = Vec::new();
    if n == 2 {
        grid.extend((0..m).map(|k| (k, vec![k])));
    } else {
        for j in 0..=p.polar_steps() {
            let value = p.polar_value(j);
            let pole = j == 0 || value >= PI;
            for k in 0..(if pole { 1 } else { m }) {
                grid.push((j * m + k, vec![j, k]));
            }
            if value >= PI {
                break;
            }
        }
    }
    let directions = grid
        .into_iter()
        .map(|(i, idx)| Ok((i, spherical_seed(space, p, &idx)?)))
        .collect::<Result<Vec<_>, QuantizerError>>()?;
    let mut seeds =
        Vec::with_capacity(directions.len() * (levels.1 - levels.0 + 1).max(0) as usize);
    for level in levels.0..=levels.1 {
        let s = p.level_value(level).ln();
        for (angle_index, u) in &directions {
            let coords = space.dilation().apply(s, u);
            let hnorm = space.norm(&coords)?;
            seeds.push(Seed {
                level,
                angle_index: *angle_index,
                coords,
                hnorm,
            });
        }
    }
    Ok(seeds)
}

/// A quantizer bound to its geometry.
#[derive(Debug, Clone)]
pub struct HomQuantizer {
    space: HomSpace,
    params: QuantizerParams,
}

impl HomQuantizer {
    pub fn new(space: HomSpace, params: QuantizerParams) -> Result<Self, QuantizerError> {
        if space.dim() != params.dim {
            return Err(QuantizerError::DimensionMismatch {
                expected: space.dim(),
                got: params.dim,
            });
        }
        Ok(Self { space, params })
    }

    pub fn space(&self) -> &HomSpace {
        &self.space
    }

    pub fn params(&self) -> &QuantizerParams {
        &self.params
    }

    pub fn quantize(&self, x: &DVector<f64>) -> Result<DVector<f64>, QuantizerError> {
        hom_quantize(&self.space, &self.params, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindil::Dilation;
    use std::f64::consts::FRAC_PI_2;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn log_quantize_examples() {
        let p = QuantizerParams::with_anchor(0.5, 4.0 / 3.0, FRAC_PI_2, 2).unwrap();
        assert!((p.delta() - 1.0 / 3.0).abs() < 1e-15);
        let (lo, hi) = p.level_interval(0);
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);
        assert_eq!(
            log_quantize(&p, 1.5).unwrap(),
            RadialLevel {
                value: 4.0 / 3.0,
                level: Some(0)
            }
        );
        let r = log_quantize(&p, 3.0).unwrap();
        assert_eq!(r.level, Some(-1));
        assert!((r.value - 8.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            log_quantize(&p, 0.0).unwrap(),
            RadialLevel {
                value: 0.0,
                level: None
            }
        );
        assert_eq!(
            log_quantize(&p, -1.0),
            Err(QuantizerError::NegativeInput(-1.0))
        );
    }

    #[test]
    fn lower_boundary_belongs_to_its_cell() {
        let p = QuantizerParams::with_anchor(0.5, 4.0 / 3.0, FRAC_PI_2, 2).unwrap();
        // 1 is the closed lower end of I_0, 2 the closed lower end of I_{-1}
        assert_eq!(log_quantize(&p, 1.0).unwrap().level, Some(0));
        assert_eq!(log_quantize(&p, 2.0).unwrap().level, Some(-1));
    }

    #[test]
    fn default_anchor_aligns_with_unit_annulus() {
        let p = QuantizerParams::new(0.7, PI / 20.0, 3).unwrap();
        let (lo, hi) = p.level_interval(0);
        assert!((lo - 1.0).abs() < 1e-15);
        assert!((hi - 1.0 / 0.7).abs() < 1e-14);
    }

    #[test]
    fn params_validation() {
        assert_eq!(
            QuantizerParams::new(1.2, 0.1, 3),
            Err(QuantizerError::InvalidDensity(1.2))
        );
        assert_eq!(
            QuantizerParams::new(0.5, 0.0, 3),
            Err(QuantizerError::InvalidAngle(0.0))
        );
        assert_eq!(
            QuantizerParams::new(0.5, 4.0, 3),
            Err(QuantizerError::InvalidAngle(4.0))
        );
        assert_eq!(
            QuantizerParams::new(0.5, 0.1, 1),
            Err(QuantizerError::DimensionTooSmall(1))
        );
    }

    #[test]
    fn spherical_coordinate_examples() {
        let c = to_spherical(&v(&[0.0, 2.0])).unwrap();
        assert_eq!(c.radius, 2.0);
        assert!((c.angles[0] - FRAC_PI_2).abs() < 1e-15);
        let c = to_spherical(&v(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(c.radius, 1.0);
        assert!((c.angles[0] - FRAC_PI_2).abs() < 1e-15);
        assert!((c.angles[1] - FRAC_PI_2).abs() < 1e-15);
        let c = to_spherical(&v(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(c.angles, vec![0.0, 0.0, 0.0]);
        // negative azimuth wraps into [0, 2π)
        let c = to_spherical(&v(&[1.0, -1.0])).unwrap();
        assert!((c.angles[0] - 7.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(
            to_spherical(&v(&[1.0])),
            Err(QuantizerError::DimensionTooSmall(1))
        );
    }

    #[test]
    fn spherical_quantize_examples() {
        let sp: HomSpace = Dilation::standard(2).into();
        let p = QuantizerParams::new(0.5, FRAC_PI_2, 2).unwrap();
        let a = PI / 5.0;
        let q = spherical_quantize(&sp, &p, &v(&[a.cos(), a.sin()])).unwrap();
        assert!((q - v(&[1.0, 0.0])).amax() < 1e-15);
        let q = spherical_quantize(&sp, &p, &v(&[0.0, 1.0])).unwrap();
        assert!((q - v(&[0.0, 1.0])).amax() < 1e-15);
        // just below 2π rounds to the seed at 0, not to a duplicate at 2π
        let a = TAU - 0.1;
        let q = spherical_quantize(&sp, &p, &v(&[a.cos(), a.sin()])).unwrap();
        assert!((q - v(&[1.0, 0.0])).amax() < 1e-15);

        let sp: HomSpace = Dilation::standard(3).into();
        let p = QuantizerParams::new(0.5, PI / 20.0, 3).unwrap();
        let q = spherical_quantize(&sp, &p, &v(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(q, v(&[1.0, 0.0, 0.0]));
        assert!(matches!(
            spherical_quantize(&sp, &p, &v(&[2.0, 0.0, 0.0])),
            Err(QuantizerError::NotOnSphere(_))
        ));
    }

    #[test]
    fn error_constants() {
        let p = QuantizerParams::new(0.7, PI / 20.0, 3).unwrap();
        let c = (PI / 40.0).cos();
        let beta = 2.0 * (1.0 - c.powi(4)).sqrt();
        assert!((p.beta() - beta).abs() < 1e-15);
        assert!((p.beta() - 0.22157).abs() < 1e-5);
        let delta = 0.3 / 1.7;
        assert!((p.epsilon_tilde() - ((1.0 + delta) * beta + delta)).abs() < 1e-15);
        assert!((p.epsilon_tilde() - 0.437).abs() < 1e-3);
        assert_eq!(super::beta(0.0, 3), 0.0);
    }

    #[test]
    fn hom_quantize_examples() {
        let sp: HomSpace = Dilation::diagonal(&[3.0, 2.0, 1.0]).unwrap().into();
        let p = QuantizerParams::with_anchor(0.5, 4.0 / 3.0, FRAC_PI_2, 3).unwrap();
        assert_eq!(hom_quantize(&sp, &p, &v(&[0.0; 3])).unwrap(), v(&[0.0; 3]));
        let q = hom_quantize(&sp, &p, &v(&[8.0, 0.0, 0.0])).unwrap();
        let want = (8.0f64 / 3.0).powi(3);
        assert!((q[0] - want).abs() < 1e-10 * want, "{q}");
        assert!(q[1].abs() < 1e-12 && q[2].abs() < 1e-12);
    }

    #[test]
    fn classical_polar_quantizer_under_standard_dilation() {
        let sp: HomSpace = Dilation::standard(2).into();
        let p = QuantizerParams::new(0.6, PI / 8.0, 2).unwrap();
        let x = v(&[-1.7, 0.9]);
        let r = x.norm();
        let want =
            spherical_quantize(&sp, &p, &(&x / r)).unwrap() * log_quantize(&p, r).unwrap().value;
        assert!((hom_quantize(&sp, &p, &x).unwrap() - want).amax() < 1e-11);
    }

    #[test]
    fn seeds_from_indices_match_quantizer_output() {
        let sp: HomSpace = Dilation::standard(3).into();
        let p = QuantizerParams::new(0.7, PI / 20.0, 3).unwrap();
        let u = v(&[0.3, -0.5, 0.81]).normalize();
        let (idx, q) = spherical_index(&sp, &p, &u).unwrap();
        assert!((spherical_seed(&sp, &p, &idx).unwrap() - q).amax() < 1e-15);
    }
}
