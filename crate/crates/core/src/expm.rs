//! Matrix exponential by scaling and squaring with a diagonal Padé
//! approximant (degree 3, 5, 7, 9 or 13 selected from the 1-norm).

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, MatRef, Scale};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, one_norm, real};

const THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_230e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
    (13, 5.371_920_351_148_152e0),
];

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
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

/// `exp(a)` for a square complex matrix.
pub fn expm(a: MatRef<'_, c64>) -> Result<Mat<c64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if !all_finite(a) {
        return Err(Error::NonFinite {
            stage: "matrix exponential input",
            index: 0,
        });
    }
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let norm = one_norm(a);
    let out = match THETA.iter().find(|(_, theta)| norm <= *theta) {
        Some(&(13, _)) => pade13(a),
        Some(&(m, _)) => pade_low(a, m),
        None => {
            let theta13 = THETA[4].1;
            let s = (norm / theta13).log2().ceil().max(0.0) as i32;
            let scaled = Scale(real(2f64.powi(-s))) * a;
            let mut r = pade13(scaled.as_ref());
            for _ in 0..s {
                r = &r * &r;
            }
            r
        }
    };
    if !all_finite(out.as_ref()) {
        return Err(Error::NonFinite {
            stage: "matrix exponential",
            index: 0,
        });
    }
    Ok(out)
}

fn solve_pade(u: Mat<c64>, v: Mat<c64>) -> Mat<c64> {
    let p = &v + &u;
    let q = &v - &u;
    q.partial_piv_lu().solve(&p)
}

fn pade_low(a: MatRef<'_, c64>, m: usize) -> Mat<c64> {
    let b: &[f64] = match m {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        _ => &B9,
    };
    let n = a.nrows();
    let ident = Mat::<c64>::identity(n, n);
    let a2 = a * a;
    // even powers I, A², A⁴, ...
    let mut powers = vec![ident, a2.clone()];
    while powers.len() < (m - 1) / 2 + 1 {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut odd = Mat::<c64>::zeros(n, n);
    let mut even = Mat::<c64>::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        if 2 * k + 1 <= m {
            odd += Scale(real(b[2 * k + 1])) * p;
        }
        if 2 * k <= m {
            even += Scale(real(b[2 * k])) * p;
        }
    }
    let u = a * &odd;
    solve_pade(u, even)
}

fn pade13(a: MatRef<'_, c64>) -> Mat<c64> {
    let b = &B13;
    let n = a.nrows();
    let ident = Mat::<c64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let s = |k: usize| Scale(real(b[k]));

    let inner_u = s(13) * &a6 + s(11) * &a4 + s(9) * &a2;
    let u_tail = s(7) * &a6 + s(5) * &a4 + s(3) * &a2 + s(1) * &ident;
    let u = a * (&a6 * &inner_u + u_tail);

    let inner_v = s(12) * &a6 + s(10) * &a4 + s(8) * &a2;
    let v = &a6 * &inner_v + s(6) * &a6 + s(4) * &a4 + s(2) * &a2 + s(0) * &ident;
    solve_pade(u, v)
}
