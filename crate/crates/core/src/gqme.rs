//! Volterra solver for `Ċ(t) = Ω₁ C(t) + ∫₀ᵗ K(t − τ) C(τ) dτ`.

use faer::c64;

use crate::csvio::fingerprint_values;
use crate::error::{invalid, Error, Result};
use crate::linalg::real;
use crate::propagator::TimeGrid;

/// Magnitude beyond which the solution is declared divergent.
const DIVERGENCE_LIMIT: f64 = 1e150;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrajectory {
    pub grid: TimeGrid,
    pub c: Vec<c64>,
    pub omega1: c64,
    pub kernel_fingerprint: String,
}

impl CorrelationTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GqmeOptions {
    pub c0: c64,
    /// Kernel samples below `floor · max|K|` at the end of the series are
    /// dropped from the convolution.
    pub kernel_floor: f64,
    /// Accept a kernel shorter than the grid, treated as zero past its end,
    /// provided its tail is already below the floor.
    pub extend_kernel: bool,
}

impl Default for GqmeOptions {
    fn default() -> Self {
        GqmeOptions {
            c0: real(1.0),
            kernel_floor: 1e-10,
            extend_kernel: false,
        }
    }
}

pub fn solve_gqme(omega1: c64, kernel: &[c64], grid: TimeGrid) -> Result<CorrelationTrajectory> {
    solve_gqme_with(omega1, kernel, grid, GqmeOptions::default())
}

/// Heun predictor–corrector with trapezoidal convolution.
pub fn solve_gqme_with(
    omega1: c64,
    kernel: &[c64],
    grid: TimeGrid,
    opts: GqmeOptions,
) -> Result<CorrelationTrajectory> {
    let n = grid.len();
    if !(opts.kernel_floor >= 0.0) {
        return Err(invalid("kernel floor must be non-negative"));
    }
    if let Some(i) = kernel
        .iter()
        .position(|k| !(k.re.is_finite() && k.im.is_finite()))
    {
        return Err(Error::NonFinite {
            stage: "gqme kernel",
            index: i,
        });
    }
    let support = kernel_support(kernel, opts.kernel_floor);
    let short = kernel.len() < n;
    if kernel.is_empty() || (short && !(opts.extend_kernel && support < kernel.len())) {
        return Err(Error::GridMismatch {
            kernel: kernel.len(),
            grid: n,
        });
    }
    let h = grid.dt();
    let k = |j: usize| if j < support { kernel[j] } else { real(0.0) };

    let mut c = Vec::with_capacity(n);
    c.push(opts.c0);
    // history(m) = h (½ K_m C_0 + Σ_{j=1}^{m−1} K_{m−j} C_j), everything but the C_m endpoint
    let history = |c: &[c64], m: usize| -> c64 {
        if m == 0 {
            return real(0.0);
        }
        let lo = m.saturating_sub(support.saturating_sub(1)).max(1);
        let mut s = if m < support {
            0.5 * k(m) * c[0]
        } else {
            real(0.0)
        };
        for j in lo..m {
            s += k(m - j) * c[j];
        }
        s * h
    };
    let endpoint = 0.5 * h * k(0);
    let deriv = |hist: c64, cm: c64, m: usize| -> c64 {
        if m == 0 {
            omega1 * cm
        } else {
            omega1 * cm + hist + endpoint * cm
        }
    };

    let mut f = deriv(real(0.0), opts.c0, 0);
    for m in 1..n {
        let prev = c[m - 1];
        let pred = prev + h * f;
        let hist = history(&c, m);
        let fp = deriv(hist, pred, m);
        let next = prev + 0.5 * h * (f + fp);
        if !(next.re.is_finite() && next.im.is_finite()) || next.norm() > DIVERGENCE_LIMIT {
            return Err(Error::Divergence { step: m });
        }
        c.push(next);
        f = deriv(hist, next, m);
    }

    Ok(CorrelationTrajectory {
        grid,
        c,
        omega1,
        kernel_fingerprint: fingerprint_values(kernel),
    })
}

/// Number of leading samples kept: one past the last sample above the floor.
fn kernel_support(kernel: &[c64], floor: f64) -> usize {
    let peak = kernel.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 1;
    }
    let thr = floor * peak;
    kernel
        .iter()
        .rposition(|v| v.norm() > thr)
        .map_or(1, |i| i + 1)
}

/// `max_k |Ċ_k − Ω₁ C_k − (K∗C)_k| / max|C|` over interior points, with
/// centered differences and trapezoidal convolution.
pub fn gqme_residual(c: &CorrelationTrajectory, kernel: &[c64], omega1: c64) -> Result<f64> {
    let n = c.c.len();
    if kernel.len() < n {
        return Err(Error::GridMismatch {
            kernel: kernel.len(),
            grid: n,
        });
    }
    let h = c.grid.dt();
    let scale = c.c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 || n < 3 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for m in 1..n - 1 {
        let dc = (c.c[m + 1] - c.c[m - 1]) / (2.0 * h);
        let mut conv = 0.5 * (kernel[m] * c.c[0] + kernel[0] * c.c[m]);
        for j in 1..m {
            conv += kernel[m - j] * c.c[j];
        }
        let r = dc - omega1 * c.c[m] - conv * h;
        worst = worst.max(r.norm());
    }
    Ok(worst / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;

    fn max_err(c: &[c64], f: impl Fn(f64) -> c64, grid: TimeGrid) -> f64 {
        c.iter()
            .enumerate()
            .map(|(k, v)| (v - f(grid.time(k))).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn memoryless_limit() {
        let w0 = 1.3;
        let mut prev = f64::NAN;
        for steps in [500, 1000] {
            let g = TimeGrid::new(5.0, steps).unwrap();
            let kern = vec![real(0.0); g.len()];
            let c = solve_gqme(I * w0, &kern, g).unwrap();
            let err = max_err(&c.c, |t| (I * w0 * t).exp(), g);
            assert!(err < 10.0 * g.dt().powi(2) * 5.0);
            if prev.is_finite() {
                assert!((3.4..4.6).contains(&(prev / err)));
            }
            prev = err;
        }
    }

    #[test]
    fn constant_kernel_gives_cosine() {
        let g = TimeGrid::new(5.0, 5000).unwrap();
        let kern = vec![real(-1.0); g.len()];
        let c = solve_gqme(real(0.0), &kern, g).unwrap();
        assert!(max_err(&c.c, |t| real(t.cos()), g) <= 1e-4);
    }

    #[test]
    fn first_derivative_approaches_omega() {
        let om = c64::new(-0.2, 0.7);
        let mut errs = Vec::new();
        for steps in [100, 1000] {
            let g = TimeGrid::new(1.0, steps).unwrap();
            let kern = vec![real(-1.0); g.len()];
            let c = solve_gqme(om, &kern, g).unwrap();
            errs.push(((c.c[1] - c.c[0]) / g.dt() - om).norm());
        }
        assert!(errs[1] < errs[0] / 5.0);
    }

    #[test]
    fn linear_in_initial_value() {
        let g = TimeGrid::new(3.0, 300).unwrap();
        let kern: Vec<c64> = g.times().iter().map(|t| real(-(-t).exp())).collect();
        let om = c64::new(0.1, 0.5);
        let a = solve_gqme(om, &kern, g).unwrap();
        let opts = GqmeOptions {
            c0: real(2.0),
            ..Default::default()
        };
        let b = solve_gqme_with(om, &kern, g, opts).unwrap();
        for (x, y) in a.c.iter().zip(&b.c) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn grid_mismatch_and_divergence() {
        let g = TimeGrid::new(1.0, 10).unwrap();
        assert!(matches!(
            solve_gqme(real(0.0), &[real(1.0); 5], g),
            Err(Error::GridMismatch {
                kernel: 5,
                grid: 11
            })
        ));
        let g = TimeGrid::new(1000.0, 1000).unwrap();
        let kern = vec![real(0.0); g.len()];
        assert!(matches!(
            solve_gqme(real(1.0), &kern, g),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn short_decayed_kernel_is_extended() {
        let g = TimeGrid::new(2.0, 200).unwrap();
        let mut kern = vec![real(-1.0); 50];
        kern.extend(vec![real(0.0); 10]);
        let opts = GqmeOptions {
            extend_kernel: true,
            ..Default::default()
        };
        let c = solve_gqme_with(real(0.0), &kern, g, opts).unwrap();
        assert_eq!(c.c.len(), g.len());
    }

    #[test]
    fn residual_distinguishes_solutions() {
        let g = TimeGrid::new(5.0, 2000).unwrap();
        let kern = vec![real(-1.0); g.len()];
        let exact = CorrelationTrajectory {
            grid: g,
            c: g.times().iter().map(|t| real(t.cos())).collect(),
            omega1: real(0.0),
            kernel_fingerprint: String::new(),
        };
        assert!(gqme_residual(&exact, &kern, real(0.0)).unwrap() < g.dt().powi(2));
        let bogus = CorrelationTrajectory {
            c: g.times()
                .iter()
                .map(|t| real((2.0 * t).sin() + 1.0))
                .collect(),
            ..exact
        };
        assert!(gqme_residual(&bogus, &kern, real(0.0)).unwrap() > 0.1);
    }
}
