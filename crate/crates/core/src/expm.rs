//! Matrix exponential by scaling and squaring with a [13/13] Padé approximant.
//!
//! Follows Higham's 2005 formulation. Dilation generators here are small
//! (n ≤ 10) and ‖sG‖ stays moderate, so the single high-order approximant is
//! used for every input and only the scaling exponent varies.

use nalgebra::DMatrix;

const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Computes `e^A` for a square matrix.
///
/// Panics if `a` is not square.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if n == 1 {
        return DMatrix::from_element(1, 1, a[(0, 0)].exp());
    }
    if is_diagonal(a) {
        return DMatrix::from_diagonal(&a.diagonal().map(f64::exp));
    }

    let norm = one_norm(a);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a * 2f64.powi(-squarings);

    let mut result = pade13(&scaled);
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

fn pade13(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let b = &PADE_13;
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &ident * b[1];
    let u = a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &ident * b[0];

    let numer = &v + &u;
    let denom = &v - &u;
    // The denominator is well conditioned for ‖A‖₁ ≤ θ₁₃.
    denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is nonsingular after scaling")
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn is_diagonal(a: &DMatrix<f64>) -> bool {
    a.nrows() == a.ncols()
        && a.iter()
            .enumerate()
            .all(|(k, v)| k % (a.nrows() + 1) == 0 || *v == 0.0)
}
