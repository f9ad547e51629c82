//! The rounding kernels φ_d over ℝ and ℂ, their Taylor coefficients and
//! inverses, and the named constants that bound norm ratios.
//!
//! φ_d^ℝ(⟨u,v⟩) is the expected inner product of sign(Zu) and sign(Zv) for a
//! Gaussian d×n matrix Z. At d = 1 it is (2/π)·arcsin; in general
//!
//! ```text
//! φ_d^ℝ(x) = C_d · x · ∫₀^{π/2} cos^d t / √(1 − x² sin² t) dt,
//! C_d      = 2Γ((d+1)/2) / (√π Γ(d/2)),
//! ```
//!
//! and φ_d^ℂ(z) = sign(z) · φ_{2d}^ℝ(|z|).

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};
use crate::matrix::{Field, SymMatrix, C64};

/// Default number of series terms.
pub const DEFAULT_TERMS: usize = 64;
/// Largest order accepted by [`phi_complex_inverse_coeffs`].
pub const MAX_INVERSE_TERMS: usize = 60;

fn gamma_ratio(num: &[f64], den: &[f64]) -> f64 {
    (num.iter().map(|&x| ln_gamma(x)).sum::<f64>() - den.iter().map(|&x| ln_gamma(x)).sum::<f64>()).exp()
}

/// The real dimension behind φ_d over `field`.
fn real_dim(d: usize, field: Field) -> usize {
    match field {
        Field::Real => d,
        Field::Complex => 2 * d,
    }
}

/// b_{1,d} = φ_d'(0) = (2/d)(Γ((d+1)/2)/Γ(d/2))², with b_{1,d}^ℂ = b_{1,2d}^ℝ.
pub fn b1_coefficient(d: usize, field: Field) -> f64 {
    assert!(d >= 1, "d must be positive");
    let d = real_dim(d, field) as f64;
    2.0 / d * gamma_ratio(&[(d + 1.0) / 2.0], &[d / 2.0]).powi(2)
}

/// Taylor coefficients of φ_d: φ_d(x) = Σ_k b_{2k+1} x|x|^{2k}.
#[derive(Clone, Debug, Serialize)]
pub struct PhiSeries {
    pub d: usize,
    pub field: Field,
    /// b_{2k+1,d} for k = 0..K.
    pub coeffs: Vec<f64>,
    /// 1 − Σ coeffs, which bounds the tail on the closed disk.
    pub truncation_error_bound: f64,
}

impl PhiSeries {
    /// b_{2k+1} = b_1 · ((½)_k)² / ((D/2+1)_k · k!) with D the real dimension.
    pub fn new(d: usize, field: Field, terms: usize) -> Self {
        let dd = real_dim(d, field) as f64;
        let mut coeffs = Vec::with_capacity(terms);
        let mut c = b1_coefficient(d, field);
        for k in 0..terms {
            coeffs.push(c);
            let k = k as f64;
            c *= (k + 0.5) * (k + 0.5) / ((dd / 2.0 + 1.0 + k) * (k + 1.0));
        }
        let bound = (1.0 - coeffs.iter().sum::<f64>()).max(0.0);
        PhiSeries { d, field, coeffs, truncation_error_bound: bound }
    }

    /// Partial sum at a point of the disk.
    pub fn eval(&self, z: C64) -> C64 {
        let r2 = z.norm_sqr();
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * r2 + c;
        }
        z * acc
    }
}

/// The closed-form series in powers of x with the (1 − x²)^{d/2} prefactor.
/// Returns (value, bound on the omitted tail). Terms are generated by their
/// ratio (k + (d+1)/2)² / ((k+1)(k + d/2 + 1)) · x².
pub fn phi_real_series(x: f64, d: usize, terms: usize) -> Result<(f64, f64)> {
    if !(x.abs() <= 1.0) {
        return domain(format!("|x| = {} exceeds 1", x.abs()));
    }
    if x.abs() == 1.0 {
        return Ok((x.signum(), 0.0));
    }
    let (s, ax) = (x.signum(), x.abs());
    let dd = d as f64;
    let (a, b) = ((dd + 1.0) / 2.0, dd / 2.0 + 1.0);
    let x2 = ax * ax;
    let pre = (1.0 - x2).powf(dd / 2.0);
    let ratio = |k: f64| (k + a) * (k + a) / ((k + 1.0) * (k + b)) * x2;
    let mut t = b1_coefficient(d, Field::Real) * ax * pre;
    let mut sum = 0.0;
    for k in 0..terms {
        sum += t;
        t *= ratio(k as f64);
    }
    // Ratios decrease to x² for d ≥ 2 and increase to x² for d = 1.
    let rho = ratio(terms as f64).max(x2);
    let tail = if rho < 1.0 { t / (1.0 - rho) } else { f64::INFINITY };
    Ok((s * sum, tail))
}

/// φ_d^ℝ by double-exponential quadrature of the integral form.
pub fn phi_real_integral(x: f64, d: usize) -> f64 {
    let dd = d as f64;
    let c = 2.0 / PI.sqrt() * gamma_ratio(&[(dd + 1.0) / 2.0], &[dd / 2.0]);
    let x2 = x * x;
    let f = |t: f64| {
        let (s, co) = t.sin_cos();
        co.max(0.0).powi(d as i32) / (1.0 - x2 * s * s).sqrt()
    };
    c * x * quadrature::double_exponential::integrate(f, 0.0, FRAC_PI_2, 1e-15).integral
}

/// Haagerup's integral x ∫₀^{π/2} cos²t / √(1 − |x|² sin²t) dt for φ_ℂ.
pub fn haagerup_integral(z: C64) -> C64 {
    let r2 = z.norm_sqr();
    let f = |t: f64| {
        let (s, c) = t.sin_cos();
        c * c / (1.0 - r2 * s * s).sqrt()
    };
    z * quadrature::double_exponential::integrate(f, 0.0, FRAC_PI_2, 1e-15).integral
}

/// φ_d^ℝ(x) for |x| ≤ 1.
///
/// d = 1 is (2/π)·arcsin. Otherwise the prefactored series is used while its
/// tail bound after [`DEFAULT_TERMS`] terms is negligible, and quadrature of
/// the integral form closer to ±1 where the series converges slowly.
pub fn phi_real(x: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return domain("d must be positive");
    }
    if !(x.abs() <= 1.0) {
        return domain(format!("|x| = {} exceeds 1", x.abs()));
    }
    if x.abs() == 1.0 {
        return Ok(x);
    }
    if d == 1 {
        return Ok(FRAC_2_PI * x.asin());
    }
    let (v, tail) = phi_real_series(x, d, DEFAULT_TERMS)?;
    if tail <= 1e-17 {
        Ok(v)
    } else {
        let v = phi_real_integral(x.abs(), d).min(1.0);
        Ok(x.signum() * v)
    }
}

/// sign z = z/|z|, with sign 0 = 1 so the result always has unit modulus.
pub fn sign(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        z / r
    }
}

/// φ_d^ℂ(z) = sign(z) · φ_{2d}^ℝ(|z|) on the closed unit disk.
pub fn phi_complex(z: C64, d: usize) -> Result<C64> {
    let r = z.norm();
    if r > 1.0 + 1e-15 {
        return domain(format!("|z| = {r} exceeds 1"));
    }
    if r == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    Ok(sign(z) * phi_real(r.min(1.0), 2 * d)?)
}

/// φ_d over either field, for a scalar stored as complex.
pub fn phi(z: C64, d: usize, field: Field) -> Result<C64> {
    match field {
        Field::Real => {
            if z.im != 0.0 {
                return domain("complex argument for the real kernel");
            }
            Ok(C64::new(phi_real(z.re, d)?, 0.0))
        }
        Field::Complex => phi_complex(z, d),
    }
}

/// Inverse of φ_𝕜 = φ_1^𝕜. Real: sin(πy/2). Complex: sign(y)·h⁻¹(|y|) with h
/// the radial profile, inverted by bisection.
pub fn phi_inverse(y: C64, field: Field) -> Result<C64> {
    let r = y.norm();
    if r > 1.0 + 1e-15 {
        return domain(format!("|y| = {r} exceeds 1"));
    }
    match field {
        Field::Real => {
            if y.im != 0.0 {
                return domain("complex argument for the real inverse");
            }
            Ok(C64::new((FRAC_PI_2 * y.re.clamp(-1.0, 1.0)).sin(), 0.0))
        }
        Field::Complex => {
            if r == 0.0 {
                return Ok(C64::new(0.0, 0.0));
            }
            let target = r.min(1.0);
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            while hi - lo > 1e-16 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if phi_real(mid, 2)? < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(sign(y) * (0.5 * (lo + hi)))
        }
    }
}

/// Power-series coefficients of φ_ℂ⁻¹(z) = Σ c_{2k+1} z|z|^{2k}.
#[derive(Clone, Debug, Serialize)]
pub struct InverseSeries {
    pub coeffs: Vec<f64>,
    /// Σ |c_{2k+1}| over the computed terms.
    pub abs_sum: f64,
    /// 1 − Σ c_{2k+1}; tends to 0 because φ_ℂ⁻¹(1) = 1.
    pub residual: f64,
}

fn rat(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Reversion of the radial series of φ_ℂ, terms k = 0..=K.
///
/// Write φ_ℂ(r) = (π/4)·r·Â(r²), where Â has rational coefficients
/// binom(2k,k)² / (16^k (k+1)). The inverse of x ↦ x·Â(x²) is y·D(y²) with
/// d_k = [s^k] B(s)^{2k+1} / (2k+1) and B = 1/Â (Lagrange inversion). These
/// are computed exactly; then c_k = (4/π)·d_k·(16/π²)^k. Plain floating-point
/// reversion loses every digit to cancellation by k ≈ 50.
pub fn phi_complex_inverse_coeffs(k_max: usize) -> Result<InverseSeries> {
    if k_max > MAX_INVERSE_TERMS {
        return Err(crate::Error::TooLarge { what: "series reversion", n: k_max, max: MAX_INVERSE_TERMS });
    }
    let len = k_max + 1;
    let mut a_hat = Vec::with_capacity(len);
    let mut central = BigInt::one();
    for k in 0..len as u64 {
        if k > 0 {
            central = central * BigInt::from(2 * (2 * k - 1)) / BigInt::from(k);
        }
        let den = BigInt::from(16u32).pow(k as u32) * BigInt::from(k + 1);
        a_hat.push(BigRational::new(&central * &central, den));
    }
    // B = 1/Â; Â₀ = 1.
    let mut b: Vec<BigRational> = Vec::with_capacity(len);
    b.push(BigRational::one());
    for j in 1..len {
        let s = (1..=j).fold(BigRational::zero(), |acc, i| acc + &a_hat[i] * &b[j - i]);
        b.push(-s);
    }
    let scale = 16.0 / (PI * PI);
    let mut c = Vec::with_capacity(len);
    for k in 0..len {
        // [s^k] B^m by the power recurrence, with B₀ = 1.
        let m = (2 * k + 1) as u64;
        let mut p: Vec<BigRational> = vec![BigRational::one()];
        for j in 1..=k {
            let mut s = BigRational::zero();
            for i in 1..=j {
                let w = (m + 1) as i64 * i as i64 - j as i64;
                s += &b[i] * &p[j - i] * BigRational::from_integer(BigInt::from(w));
            }
            p.push(s / BigRational::from_integer(BigInt::from(j as u64)));
        }
        let d_k = &p[k] * rat(1, m);
        let d_f = d_k.to_f64().unwrap_or(f64::NAN);
        c.push(4.0 / PI * d_f * scale.powi(k as i32));
    }
    let abs_sum = c.iter().map(|v| v.abs()).sum();
    let residual = 1.0 - c.iter().sum::<f64>();
    Ok(InverseSeries { coeffs: c, abs_sum, residual })
}

/// Result of applying φ_d entrywise.
#[derive(Clone, Debug)]
pub struct PhiApplied {
    pub matrix: SymMatrix,
    /// Smallest eigenvalue of Φ(G) − b_{1,d}·G when G is a correlation matrix.
    pub psd_margin: Option<f64>,
}

/// Φ_d(G) = (φ_d(g_ij)) for an equal-diagonal G with entries in the disk.
pub fn apply_phi_entrywise(g: &SymMatrix, d: usize) -> Result<PhiApplied> {
    let n = g.n();
    if g.entries().iter().any(|v| v.norm() > 1.0 + 1e-12) {
        return domain("entry outside the unit disk");
    }
    if (0..n).any(|i| (g.re(i, i) - g.re(0, 0)).abs() > crate::matrix::TOL_ZERO) {
        return domain("apply_phi_entrywise requires an equal diagonal");
    }
    let field = g.field();
    let clamp = |z: C64| if z.norm() > 1.0 { z / z.norm() } else { z };
    let mut err = None;
    let matrix = SymMatrix::from_fn(n, field, |i, j| match phi(clamp(g.get(i, j)), d, field) {
        Ok(v) => v,
        Err(e) => {
            err = Some(e);
            C64::new(0.0, 0.0)
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let unit_diag = (0..n).all(|i| (g.re(i, i) - 1.0).abs() <= 1e-12);
    let psd_margin = (unit_diag && g.is_psd()).then(|| matrix.sub(&g.scale(b1_coefficient(d, field))).min_eigenvalue());
    Ok(PhiApplied { matrix, psd_margin })
}

/// Golden-section minimization of a unimodal function on [lo, hi].
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// α_d = inf over 0 ≤ x ≤ 1 of (1 + φ_d(x)) / (1 + x), by a 10⁴-point grid
/// followed by golden-section refinement; α_d^ℂ = α_{2d}^ℝ.
pub fn alpha_d(d: usize, field: Field) -> f64 {
    let dd = real_dim(d, field);
    let psi = |x: f64| (1.0 + phi_real(x, dd).expect("x in [0,1]")) / (1.0 + x);
    let m = 10_000;
    let (mut best_i, mut best) = (0usize, f64::INFINITY);
    for i in 0..=m {
        let v = psi(i as f64 / m as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let lo = (best_i.saturating_sub(1)) as f64 / m as f64;
    let hi = ((best_i + 1).min(m)) as f64 / m as f64;
    golden_min(psi, lo, hi, 1e-10).1.min(best)
}

/// α_GW^𝕜 = α_1^𝕜.
pub fn alpha_gw(field: Field) -> f64 {
    alpha_d(1, field)
}

/// Lower bound on the PSD-cone constant K_{d,p}; `p = None` is the p → ∞
/// limit, which equals 1/b_{1,d}.
pub fn conic_lower_bound(d: usize, p: Option<usize>, field: Field) -> Result<f64> {
    if d == 0 {
        return domain("d must be positive");
    }
    let df = d as f64;
    match (p, field) {
        (Some(p), _) if p < d => domain(format!("need d <= p, got d = {d}, p = {p}")),
        (Some(p), Field::Real) => {
            let pf = p as f64;
            Ok(df / pf * gamma_ratio(&[(pf + 1.0) / 2.0, df / 2.0], &[pf / 2.0, (df + 1.0) / 2.0]).powi(2))
        }
        (Some(p), Field::Complex) => {
            let pf = p as f64;
            Ok(df / pf * gamma_ratio(&[pf + 0.5, df], &[pf, df + 0.5]).powi(2))
        }
        (None, Field::Real) => Ok(df / 2.0 * gamma_ratio(&[df / 2.0], &[(df + 1.0) / 2.0]).powi(2)),
        (None, Field::Complex) => Ok(df * gamma_ratio(&[df], &[df + 0.5]).powi(2)),
    }
}

/// E|⟨U,V⟩|^α for U, V independent and uniform on the unit sphere of 𝕜^{n+1}.
pub fn moments_closed_form(n: usize, alpha: f64, field: Field) -> Result<f64> {
    if n == 0 || !(alpha > 0.0) {
        return domain("need n >= 1 and alpha > 0");
    }
    let nf = n as f64;
    Ok(match field {
        Field::Real => gamma_ratio(&[(nf + 1.0) / 2.0, (alpha + 1.0) / 2.0], &[(nf + alpha + 1.0) / 2.0]) / PI.sqrt(),
        Field::Complex => gamma_ratio(&[alpha / 2.0 + 1.0, nf + 1.0], &[nf + alpha / 2.0 + 1.0]),
    })
}

/// Density of ⟨U,V⟩ on the real interval or the complex disk (with respect to
/// area measure in the complex case).
pub fn density_f(t: C64, n: usize, field: Field) -> Result<f64> {
    if n == 0 {
        return domain("need n >= 1");
    }
    let r2 = t.norm_sqr();
    if r2 > 1.0 {
        return domain("t outside the unit disk");
    }
    let nf = n as f64;
    Ok(match field {
        Field::Real => {
            if t.im != 0.0 {
                return domain("complex argument for the real density");
            }
            gamma_ratio(&[(nf + 1.0) / 2.0], &[nf / 2.0]) / PI.sqrt() * (1.0 - r2).powf((nf - 2.0) / 2.0)
        }
        Field::Complex => nf / PI * (1.0 - r2).powi(n as i32 - 1),
    })
}

/// Known numerical bounds on a constant whose exact value is open.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

/// Every named constant used by the inequality checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    /// Upper bound on K_γ^ℝ (and K_Γ^ℝ): sinh(π/2).
    pub k_gamma_bound_real: f64,
    /// Sharper upper bound √2(8/π − 1) on K_γ^ℝ.
    pub k_gamma_bound_real_improved: f64,
    /// Upper bound on K_γ^ℂ (and K_Γ^ℂ): 8/π − 1.
    pub k_gamma_bound_complex: f64,
    /// PSD cone constant over ℝ: π/2.
    pub psd_real: f64,
    /// PSD cone constant over ℂ: 4/π.
    pub psd_complex: f64,
    pub alpha_gw_real: f64,
    pub alpha_gw_complex: f64,
    pub k_g_real: Bounds,
    pub k_g_complex: Bounds,
    pub a0_real: f64,
    pub a0_complex: f64,
    pub sdd_real: f64,
    pub sdd_complex: f64,
    /// K_{G,1,2}^ℝ = √2.
    pub krivine_g12: f64,
}

impl ConstantsTable {
    pub fn compute() -> Self {
        let alpha_gw_real = alpha_gw(Field::Real);
        let alpha_gw_complex = alpha_gw(Field::Complex);
        let k_complex = 8.0 / PI - 1.0;
        ConstantsTable {
            k_gamma_bound_real: FRAC_PI_2.sinh(),
            k_gamma_bound_real_improved: SQRT_2 * k_complex,
            k_gamma_bound_complex: k_complex,
            psd_real: FRAC_PI_2,
            psd_complex: 4.0 / PI,
            alpha_gw_real,
            alpha_gw_complex,
            k_g_real: Bounds { lower: 1.67696, upper: 1.78221 },
            k_g_complex: Bounds { lower: 1.33807, upper: 1.40491 },
            a0_real: FRAC_2_PI,
            a0_complex: FRAC_PI_4,
            sdd_real: 1.0 + (1.0 - FRAC_2_PI) / alpha_gw_real,
            sdd_complex: 1.0 + (1.0 - FRAC_PI_4) / alpha_gw_complex,
            krivine_g12: SQRT_2,
        }
    }

    pub fn k_gamma_bound(&self, field: Field) -> f64 {
        match field {
            Field::Real => self.k_gamma_bound_real,
            Field::Complex => self.k_gamma_bound_complex,
        }
    }

    pub fn psd(&self, field: Field) -> f64 {
        match field {
            Field::Real => self.psd_real,
            Field::Complex => self.psd_complex,
        }
    }

    pub fn alpha_gw(&self, field: Field) -> f64 {
        match field {
            Field::Real => self.alpha_gw_real,
            Field::Complex => self.alpha_gw_complex,
        }
    }

    pub fn sdd(&self, field: Field) -> f64 {
        match field {
            Field::Real => self.sdd_real,
            Field::Complex => self.sdd_complex,
        }
    }
}

/// The table is computed once; α_GW needs a few thousand kernel evaluations.
pub fn constants() -> &'static ConstantsTable {
    static TABLE: std::sync::OnceLock<ConstantsTable> = std::sync::OnceLock::new();
    TABLE.get_or_init(ConstantsTable::compute)
}
