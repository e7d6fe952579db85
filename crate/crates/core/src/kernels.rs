//! Closed forms and series on the unit disk and the method of images on rectangles.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{DsmError, Result};
use crate::geometry::{DomainKind, Gamma, Grid2D, Side};

const DISK_EDGE: f64 = 1e-12;

fn polar(p: [f64; 2]) -> (f64, f64) {
    (p[0].hypot(p[1]), p[1].atan2(p[0]))
}

fn check_disk(p: [f64; 2]) -> Result<f64> {
    let r = p[0].hypot(p[1]);
    if r >= 1.0 - DISK_EDGE || !r.is_finite() {
        return Err(DsmError::PointOnBoundary(p[0], p[1]));
    }
    Ok(r)
}

/// Poisson kernel of the unit disk, the probing flux for full-circle data.
pub fn disk_poisson_eta(x: [f64; 2], theta: f64) -> Result<f64> {
    let r = check_disk(x)?;
    let dx = theta.cos() - x[0];
    let dy = theta.sin() - x[1];
    Ok((1.0 - r * r) / (2.0 * PI * (dx * dx + dy * dy)))
}

/// `(η, ∂θη, ∂²θη)` of the Poisson kernel at angle `theta`.
pub fn disk_poisson_eta_derivatives(x: [f64; 2], theta: f64) -> Result<(f64, f64, f64)> {
    let r = check_disk(x)?;
    let (_, tx) = polar(x);
    let p = theta - tx;
    let d = 1.0 - 2.0 * r * p.cos() + r * r;
    let c = (1.0 - r * r) / (2.0 * PI);
    let dp = 2.0 * r * p.sin();
    let ddp = 2.0 * r * p.cos();
    let eta = c / d;
    let d1 = -c * dp / (d * d);
    let d2 = c * (2.0 * dp * dp / (d * d * d) - ddp / (d * d));
    Ok((eta, d1, d2))
}

/// Neumann function of the disk with zero boundary mean, on the circle.
pub fn disk_green_on_circle(z: [f64; 2], theta: f64) -> Result<f64> {
    let r = check_disk(z)?;
    let (_, tz) = polar(z);
    Ok(-(1.0 - 2.0 * r * (theta - tz).cos() + r * r).ln() / (2.0 * PI))
}

/// `Σ_{n≥1} n qⁿ cos(nΔ)` in closed form.
fn weighted_cosine_sum(q: f64, delta: f64) -> f64 {
    let c = delta.cos();
    let den = 1.0 - 2.0 * q * c + q * q;
    (q * c * (1.0 + q * q) - 2.0 * q * q) / (den * den)
}

/// ⟨η_x, G_z⟩₁ over the full circle, μ₀ = 0.
pub fn disk_duality_h1(x: [f64; 2], z: [f64; 2]) -> Result<f64> {
    let rx = check_disk(x)?;
    let rz = check_disk(z)?;
    let (_, tx) = polar(x);
    let (_, tz) = polar(z);
    Ok(weighted_cosine_sum(rx * rz, tx - tz) / PI)
}

/// `(|η_x|²_{H⁰}, |η_x|²_{H¹})` over the full circle, μ₀ = 0.
pub fn disk_eta_norms(x: [f64; 2]) -> Result<(f64, f64)> {
    let r = check_disk(x)?;
    let r2 = r * r;
    let h0 = (1.0 + r2) / (2.0 * PI * (1.0 - r2));
    let h1 = r2 * (r2 + 1.0) / (PI * (1.0 - r2).powi(3));
    Ok((h0, h1))
}

/// Quadrature nodes used for the arc version of the disk kernel.
pub const ARC_QUADRATURE_NODES: usize = 2048;

/// K(x, z) = ⟨η_x, G_z⟩₁ / (|η_x|^{1/2}_{H¹} |η_x|^{3/4}_{H⁰}). On an arc all
/// three integrals use the trapezoid rule over the arc with the analytic
/// kernels and their angular derivatives.
pub fn disk_kernel_k(x: [f64; 2], z: [f64; 2], gamma: Gamma) -> Result<f64> {
    let rx = check_disk(x)?;
    check_disk(z)?;
    if rx == 0.0 {
        return Ok(0.0);
    }
    let (num, h0, h1) = match gamma {
        Gamma::FullCircle => {
            let (h0, h1) = disk_eta_norms(x)?;
            (disk_duality_h1(x, z)?, h0, h1)
        }
        Gamma::Arc { start, end } => {
            let n = ARC_QUADRATURE_NODES;
            let dt = (end - start) / (n - 1) as f64;
            let (mut num, mut h0, mut h1) = (0.0, 0.0, 0.0);
            for k in 0..n {
                let w = if k == 0 || k + 1 == n { 0.5 * dt } else { dt };
                let t = start + k as f64 * dt;
                let (e, e1, e2) = disk_poisson_eta_derivatives(x, t)?;
                num -= w * e2 * disk_green_on_circle(z, t)?;
                h0 += w * e * e;
                h1 += w * e1 * e1;
            }
            (num, h0, h1)
        }
        Gamma::Sides(_) => return Err(DsmError::WrongDomain),
    };
    if h1 == 0.0 {
        return Ok(0.0);
    }
    Ok(num / (h1.powf(0.25) * h0.powf(0.375)))
}

/// Truncated two-sided Fourier series on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    pub n_max: usize,
    /// Entry `n + n_max` holds the coefficient of `e^{inθ}`.
    pub coeffs: Vec<Complex64>,
}

pub const FOURIER_CAP: usize = 200;

/// Smallest order with `r^n < 1e−12`, capped.
pub fn fourier_order(r_max: f64) -> usize {
    if r_max <= 0.0 {
        return 1;
    }
    let n = ((1e-12f64).ln() / r_max.ln()).ceil();
    if n.is_finite() {
        (n as usize).clamp(1, FOURIER_CAP)
    } else {
        FOURIER_CAP
    }
}

impl FourierCoeffs {
    pub fn coeff(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.n_max {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(n + self.n_max as i64) as usize]
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let m = self.n_max as i64;
        (-m..=m).map(|n| (self.coeff(n) * Complex64::from_polar(1.0, n as f64 * theta)).re).sum()
    }

    /// Coefficients of the Poisson kernel, `(1/2π) r^{|n|} e^{−inθ_x}`.
    pub fn poisson(x: [f64; 2], n_max: usize) -> Result<Self> {
        let r = check_disk(x)?;
        let (_, t) = polar(x);
        let m = n_max as i64;
        let coeffs = (-m..=m)
            .map(|n| Complex64::from_polar(r.powi(n.abs() as i32) / (2.0 * PI), -(n as f64) * t))
            .collect();
        Ok(FourierCoeffs { n_max, coeffs })
    }

    /// Coefficients of the zero-mean Neumann function on the circle.
    pub fn green(z: [f64; 2], n_max: usize) -> Result<Self> {
        let r = check_disk(z)?;
        let (_, t) = polar(z);
        let m = n_max as i64;
        let coeffs = (-m..=m)
            .map(|n| {
                if n == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(r.powi(n.abs() as i32) / (2.0 * PI * n.abs() as f64), -(n as f64) * t)
                }
            })
            .collect();
        Ok(FourierCoeffs { n_max, coeffs })
    }

    /// `2π Σ n² conj(a_n) b_n`, the s = 1 product of two series.
    pub fn h1_product(&self, other: &FourierCoeffs) -> f64 {
        let m = self.n_max.min(other.n_max) as i64;
        (-m..=m).map(|n| (n * n) as f64 * (self.coeff(n).conj() * other.coeff(n)).re).sum::<f64>() * 2.0 * PI
    }

    /// Largest coefficient magnitude in the outer fifth of the range.
    pub fn tail(&self) -> f64 {
        let m = self.n_max as i64;
        let from = (m - (m / 5).max(1) + 1).max(1);
        (from..=m).map(|n| self.coeff(n).norm().max(self.coeff(-n).norm())).fold(0.0, f64::max)
    }
}

/// `Σ_k (x²/4)^k / (k! (n+1)_k)`, so that `I_n(x) = (x/2)ⁿ/n! · S_n(x)`.
pub fn scaled_bessel_series(n: usize, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Modified Bessel function of the first kind, integer order.
pub fn modified_bessel_i(n: usize, x: f64) -> f64 {
    let mut pre = 1.0;
    for k in 1..=n {
        pre *= 0.5 * x / k as f64;
    }
    pre * scaled_bessel_series(n, x)
}

/// `I_n(t r) / I_n(t)`, the probing-coefficient ratio of the absorbing disk.
pub fn bessel_coeff_ratio(n: i64, sqrt_mu0: f64, r: f64) -> Result<f64> {
    if !(sqrt_mu0 > 0.0) || !(0.0..=1.0).contains(&r) {
        return Err(DsmError::InvalidConfig(format!("ratio needs t > 0 and 0 ≤ r ≤ 1, got {sqrt_mu0}, {r}")));
    }
    let n = n.unsigned_abs() as usize;
    Ok(r.powi(n as i32) * scaled_bessel_series(n, sqrt_mu0 * r) / scaled_bessel_series(n, sqrt_mu0))
}

/// ⟨η_x, G_z⟩₁ over the full circle for μ₀ = t² > 0, summed to `n_max`.
/// Each term pairs the probing and Green coefficients written with scaled
/// power series, with I_{n−1} + I_{n+1} in place of J_{n−1} − J_{n+1}.
pub fn disk_duality_h1_bessel(x: [f64; 2], z: [f64; 2], sqrt_mu0: f64, n_max: usize) -> Result<f64> {
    let rx = check_disk(x)?;
    let rz = check_disk(z)?;
    if !(sqrt_mu0 > 0.0) {
        return Err(DsmError::InvalidConfig("sqrt_mu0 must be positive".into()));
    }
    let (_, tx) = polar(x);
    let (_, tz) = polar(z);
    let t = sqrt_mu0;
    let q = rx * rz;
    let (mut sum, mut abs_sum, mut last) = (0.0, 0.0, 0.0);
    for n in 1..=n_max {
        let s_n = scaled_bessel_series(n, t);
        let qn = scaled_bessel_series(n, t * rz) * scaled_bessel_series(n, t * rx)
            / (s_n * (scaled_bessel_series(n - 1, t) + t * t * scaled_bessel_series(n + 1, t) / (4.0 * (n * (n + 1)) as f64)));
        last = n as f64 * q.powi(n as i32) * (n as f64 * (tx - tz)).cos() * qn;
        sum += last;
        abs_sum += last.abs();
    }
    if last.abs() > 1e-10 * abs_sum.max(f64::MIN_POSITIVE) && q > 0.0 {
        return Err(DsmError::TruncationNotConverged { tail: last.abs() });
    }
    Ok(sum / PI)
}

fn poly(x: f64, c: &[f64]) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

/// Modified Bessel function of the second kind, order zero (polynomial fits).
pub fn bessel_k0(x: f64) -> f64 {
    if x <= 2.0 {
        let y = 0.25 * x * x;
        -(0.5 * x).ln() * modified_bessel_i(0, x)
            + poly(y, &[-0.57721566, 0.42278420, 0.23069756, 0.03488590, 0.00262698, 0.00010750, 0.00000740])
    } else {
        let y = 2.0 / x;
        (-x).exp() / x.sqrt()
            * poly(y, &[1.25331414, -0.07832358, 0.02189568, -0.01062446, 0.00587872, -0.00251540, 0.00053208])
    }
}

/// Modified Bessel function of the second kind, order one (polynomial fits).
pub fn bessel_k1(x: f64) -> f64 {
    if x <= 2.0 {
        let y = 0.25 * x * x;
        (x * (0.5 * x).ln() * modified_bessel_i(1, x)
            + poly(y, &[1.0, 0.15443144, -0.67278579, -0.18156897, -0.01919402, -0.00110404, -0.00004686]))
            / x
    } else {
        let y = 2.0 / x;
        (-x).exp() / x.sqrt()
            * poly(y, &[1.25331414, 0.23498619, -0.03655620, 0.01504268, -0.00780353, 0.00325614, -0.00068245])
    }
}

/// Rectangle measured on one pair of opposite sides, in local coordinates:
/// `s ∈ [0, ell]` across the measured pair, `tau ∈ [0, span]` along it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectSetup {
    pub x: [f64; 2],
    pub y: [f64; 2],
    /// Measured sides are `x = const` (true) or `y = const`.
    pub vertical: bool,
}

/// Image-series truncation used by default.
pub const DEFAULT_IMAGES: usize = 20;

impl RectSetup {
    pub fn from_grid(grid: &Grid2D) -> Result<Self> {
        match (grid.geometry.kind, grid.geometry.gamma) {
            (DomainKind::Rectangle { x, y }, Gamma::Sides(s)) => match s.opposite_pair() {
                Some((Side::Left, Side::Right)) => Ok(RectSetup { x, y, vertical: true }),
                Some(_) => Ok(RectSetup { x, y, vertical: false }),
                None => Err(DsmError::WrongDomain),
            },
            _ => Err(DsmError::WrongDomain),
        }
    }

    fn local(&self, p: [f64; 2]) -> (f64, f64) {
        if self.vertical {
            (p[0] - self.x[0], p[1] - self.y[0])
        } else {
            (p[1] - self.y[0], p[0] - self.x[0])
        }
    }

    fn ell(&self) -> f64 {
        if self.vertical {
            self.x[1] - self.x[0]
        } else {
            self.y[1] - self.y[0]
        }
    }

    fn span(&self) -> f64 {
        if self.vertical {
            self.y[1] - self.y[0]
        } else {
            self.x[1] - self.x[0]
        }
    }

    /// Outward flux on Γ of −Δw = δ_x with w = 0 on the measured sides and
    /// zero flux on the others. The infinite strip between the measured sides
    /// is summed in closed form and the zero-flux sides are handled by even
    /// images along the strip, `|i| ≤ n_img`.
    pub fn eta(&self, x: [f64; 2], y: [f64; 2], n_img: usize) -> Result<f64> {
        let ell = self.ell();
        let span = self.span();
        let (s0, t0) = self.local(x);
        let (s, t) = self.local(y);
        if !(s0 > 0.0 && s0 < ell && t0 > 0.0 && t0 < span) {
            return Err(DsmError::PointOutsideDomain(x[0], x[1]));
        }
        let at_high = (s - ell).abs() <= 1e-9 * ell;
        if !at_high && s.abs() > 1e-9 * ell {
            return Err(DsmError::InvalidConfig("evaluation point is not on the measured sides".into()));
        }
        let a = PI / ell;
        let sn = (a * s0).sin();
        let cs = if at_high { -(a * s0).cos() } else { (a * s0).cos() };
        let term = |dt: f64| {
            let u = a * dt;
            if u.abs() > 700.0 {
                0.0
            } else {
                -sn / (2.0 * ell * (u.cosh() - cs))
            }
        };
        let shell = |i: i64| {
            let c = 2.0 * span * i as f64;
            term(t - (t0 + c)) + term(t - (-t0 + c))
        };
        let mut sum = shell(0);
        let mut last = sum.abs();
        for i in 1..=n_img as i64 {
            last = (shell(i) + shell(-i)).abs();
            sum += shell(i) + shell(-i);
        }
        if n_img > 0 && last > 1e-10 * sum.abs() {
            return Err(DsmError::TruncationNotConverged { tail: last });
        }
        Ok(sum)
    }
}

/// Probing flux on a rectangle measured on opposite sides (μ₀ = 0).
pub fn rect_eta(setup: &RectSetup, x: [f64; 2], y: [f64; 2], n_img: usize) -> Result<f64> {
    setup.eta(x, y, n_img)
}

/// Reflection lattice of a source in `(0, h) × (−L, L)` with Dirichlet data
/// on `x₁ ∈ {0, h}`: classes 1, 2 carry the positive sign, 3, 4 the negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageFamily {
    pub x: [f64; 2],
    pub h: f64,
    pub l: f64,
}

impl ImageFamily {
    pub fn point(&self, k: u8, i: [i64; 2]) -> [f64; 2] {
        let (a, b) = (2.0 * self.h * i[0] as f64, 4.0 * self.l * i[1] as f64);
        let [x1, x2] = self.x;
        match k {
            1 => [x1 + a, x2 + b],
            2 => [x1 + a, 2.0 * self.l - x2 + b],
            3 => [-x1 + a, x2 + b],
            _ => [-x1 + a, 2.0 * self.l - x2 + b],
        }
    }

    pub fn sign(k: u8) -> f64 {
        if k <= 2 {
            1.0
        } else {
            -1.0
        }
    }

    /// Contribution of one image to the flux at `y` on `x₁ = h` (`right`) or `x₁ = 0`.
    pub fn term(&self, k: u8, i: [i64; 2], y2: f64, right: bool) -> f64 {
        let p = self.point(k, i);
        let y1 = if right { self.h } else { 0.0 };
        let d2 = (y1 - p[0]).powi(2) + (y2 - p[1]).powi(2);
        let num = if right { self.h - p[0] } else { p[0] };
        -Self::sign(k) * num / (2.0 * PI * d2)
    }
}
