//! Gaussian sign rounding and Monte-Carlo checks of the sign identities.
//!
//! Sampling runs in fixed-size chunks, each on its own [`RngStream`] child, and
//! the chunk sums are reduced in chunk order. Results are therefore identical
//! for a given seed regardless of how rayon schedules the chunks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gram::{Constraint, GramFactor};
use crate::matrix::{Field, SymMatrix, C64};
use crate::rng::{self, RngStream};
use crate::special::{self, sign};

const CHUNK: usize = 4096;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn norm(u: &[C64]) -> f64 {
    u.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// sign of a vector: z/‖z‖, and e₁ for z = 0.
pub fn sign_vec(z: &[C64]) -> Vec<C64> {
    let r = norm(z);
    if r == 0.0 {
        let mut e = vec![zero(); z.len()];
        if let Some(first) = e.first_mut() {
            *first = C64::new(1.0, 0.0);
        }
        e
    } else {
        z.iter().map(|v| v / r).collect()
    }
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: C64,
    /// √((Var re + Var im)/N).
    pub std_err: f64,
    pub samples: usize,
}

impl McEstimate {
    /// |mean − expected| in units of the standard error.
    pub fn z_score(&self, expected: C64) -> f64 {
        let gap = (self.mean - expected).norm();
        if self.std_err > 0.0 {
            gap / self.std_err
        } else if gap <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Means of K statistics drawn jointly, `samples` times.
pub fn mc_means<const K: usize, F>(stream: RngStream, samples: usize, f: F) -> [McEstimate; K]
where
    F: Fn(&mut ChaCha8Rng) -> [C64; K] + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Vec<[f64; 4]>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.child(c as u64).rng();
            let len = CHUNK.min(samples - c * CHUNK);
            let mut acc = vec![[0.0; 4]; K];
            for _ in 0..len {
                for (a, v) in acc.iter_mut().zip(f(&mut rng)) {
                    a[0] += v.re;
                    a[1] += v.im;
                    a[2] += v.re * v.re;
                    a[3] += v.im * v.im;
                }
            }
            acc
        })
        .collect();
    let nf = samples as f64;
    std::array::from_fn(|k| {
        let mut s = [0.0; 4];
        for part in &parts {
            for (t, p) in s.iter_mut().zip(part[k]) {
                *t += p;
            }
        }
        let mean = C64::new(s[0] / nf, s[1] / nf);
        let var = if samples > 1 {
            ((s[2] - nf * mean.re * mean.re) + (s[3] - nf * mean.im * mean.im)).max(0.0) / (nf - 1.0)
        } else {
            0.0
        };
        McEstimate { mean, std_err: (var / nf).sqrt(), samples }
    })
}

pub fn mc_mean<F>(stream: RngStream, samples: usize, f: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> C64 + Sync,
{
    let [e] = mc_means(stream, samples, |rng| [f(rng)]);
    e
}

/// A uniform point on the unit sphere of 𝕜^dim.
pub fn sample_sphere(dim: usize, field: Field, rng: &mut impl Rng) -> Vec<C64> {
    assert!(dim >= 1, "dim must be positive");
    loop {
        let z = rng::gaussian_vec(rng, dim, field);
        let r = norm(&z);
        if r > 0.0 {
            return z.into_iter().map(|v| v / r).collect();
        }
    }
}

/// δ_i = sign⟨z, x_i⟩ for one Gaussian z ∈ 𝕜^d.
pub fn gaussian_sign_round(xs: &GramFactor, rng: &mut impl Rng) -> Result<Vec<C64>> {
    if xs.constraint != Constraint::UnitSphere {
        return domain("sign rounding needs unit-sphere vectors");
    }
    let z = rng::gaussian_vec(rng, xs.d, xs.field);
    Ok((0..xs.n).map(|i| sign(dot(&z, xs.column(i)))).collect())
}

/// Mean of δ*Aδ over `samples` roundings of `xs`.
pub fn rounding_average(a: &SymMatrix, xs: &GramFactor, samples: usize, stream: RngStream) -> Result<McEstimate> {
    if a.n() != xs.n {
        return domain(format!("matrix is {0}x{0} but there are {1} vectors", a.n(), xs.n));
    }
    gaussian_sign_round(xs, &mut stream.rng())?;
    Ok(mc_mean(stream, samples, |rng| {
        let delta = gaussian_sign_round(xs, rng).expect("constraint checked");
        C64::new(a.quad_form(&delta), 0.0)
    }))
}

/// Σ a_ij φ_𝕜(⟨x_i, x_j⟩), the limit of [`rounding_average`].
pub fn rounding_expectation(a: &SymMatrix, xs: &GramFactor) -> Result<f64> {
    let phi_g = xs
        .gram()
        .into_iter()
        .map(|g| {
            let g = if g.norm() > 1.0 { g / g.norm() } else { g };
            match xs.field {
                Field::Real => special::phi(C64::new(g.re, 0.0), 1, Field::Real),
                Field::Complex => special::phi(g, 1, Field::Complex),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(a.pair_sum(&phi_g))
}

/// Monte-Carlo estimate of φ_d(x) = E⟨sign(Zu), sign(Zv)⟩ with Z a d×2
/// Gaussian matrix, u = e₁ and v = (x, √(1−|x|²)).
pub fn phi_mc(x: C64, d: usize, field: Field, samples: usize, stream: RngStream) -> Result<McEstimate> {
    if d == 0 {
        return domain("d must be positive");
    }
    if field == Field::Real && x.im != 0.0 {
        return domain("complex argument for the real kernel");
    }
    if x.norm() > 1.0 {
        return domain(format!("|x| = {} exceeds 1", x.norm()));
    }
    let y = (1.0 - x.norm_sqr()).max(0.0).sqrt();
    Ok(mc_mean(stream, samples, |rng| {
        let z1 = rng::gaussian_vec(rng, d, field);
        let z2 = rng::gaussian_vec(rng, d, field);
        let zv: Vec<C64> = z1.iter().zip(&z2).map(|(a, b)| x * a + y * b).collect();
        dot(&sign_vec(&z1), &sign_vec(&zv))
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub estimate: McEstimate,
    pub expected: C64,
    pub z_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub field: Field,
    pub dim: usize,
    pub inner: C64,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_within(&self, sigmas: f64) -> bool {
        self.checks.iter().all(|c| c.z_score <= sigmas)
    }
}

/// Gaussian estimates of
/// E⟨u,z⟩⟨z,v⟩ = ⟨u,v⟩,
/// E⟨u,z⟩ sign⟨z,v⟩ = c_𝕜⟨u,v⟩ with c = √(2/π) (ℝ) or √(π/4) (ℂ),
/// E sign⟨u,z⟩ sign⟨z,v⟩ = φ_𝕜(⟨u,v⟩).
pub fn mc_identities(u: &[C64], v: &[C64], field: Field, samples: usize, stream: RngStream) -> Result<IdentityReport> {
    if u.len() != v.len() || u.is_empty() {
        return domain("u and v must have the same positive length");
    }
    for w in [u, v] {
        if (norm(w) - 1.0).abs() > 1e-10 {
            return domain("u and v must be unit vectors");
        }
        if field == Field::Real && w.iter().any(|c| c.im != 0.0) {
            return domain("complex entries in a real vector");
        }
    }
    let inner = dot(u, v);
    let c = match field {
        Field::Real => (2.0 / std::f64::consts::PI).sqrt(),
        Field::Complex => (std::f64::consts::PI / 4.0).sqrt(),
    };
    let phi = special::phi(if inner.norm() > 1.0 { inner / inner.norm() } else { inner }, 1, field)?;
    let est = mc_means(stream, samples, |rng| {
        let z = rng::gaussian_vec(rng, u.len(), field);
        let (uz, zv) = (dot(u, &z), dot(&z, v));
        [uz * zv, uz * sign(zv), sign(uz) * sign(zv)]
    });
    let names = ["product", "product-sign", "sign-sign"];
    let expected = [inner, c * inner, phi];
    let checks = (0..3)
        .map(|k| IdentityCheck {
            name: names[k].to_string(),
            estimate: est[k],
            expected: expected[k],
            z_score: est[k].z_score(expected[k]),
        })
        .collect();
    Ok(IdentityReport { field, dim: u.len(), inner, checks })
}

/// Monte-Carlo E|⟨U,V⟩|^α for U, V uniform on the unit sphere of 𝕜^{n+1}.
pub fn moments_mc(n: usize, alpha: f64, field: Field, samples: usize, stream: RngStream) -> Result<McEstimate> {
    if n == 0 || !(alpha > 0.0) {
        return domain("need n >= 1 and alpha > 0");
    }
    Ok(mc_mean(stream, samples, |rng| {
        let u = sample_sphere(n + 1, field, rng);
        let v = sample_sphere(n + 1, field, rng);
        C64::new(dot(&u, &v).norm().powf(alpha), 0.0)
    }))
}

/// Draws of ⟨U,V⟩ for U, V uniform on the unit sphere of 𝕜^{n+1}.
pub fn inner_product_samples(n: usize, field: Field, samples: usize, stream: RngStream) -> Vec<C64> {
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream.child(c as u64).rng();
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len)
                .map(|_| {
                    let u = sample_sphere(n + 1, field, &mut rng);
                    let v = sample_sphere(n + 1, field, &mut rng);
                    dot(&u, &v)
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Real θ is enumerated exactly up to this many points.
    pub exact_max_m: usize,
}

impl Default for SharpnessConfig {
    fn default() -> Self {
        SharpnessConfig { restarts: 32, max_iters: 1000, exact_max_m: 20 }
    }
}

/// γ/θ for A = G/m², G the Gram matrix of m random unit vectors in 𝕜^n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub n: usize,
    pub m: usize,
    pub field: Field,
    /// tr(AG) = ΣΣ|g_ij|²/m², attained by the sampled vectors.
    pub gamma_lower: f64,
    /// Best value of ‖(1/m)Σ t_i x_i‖² found; a feasible point, so a lower bound on θ.
    pub theta_estimate: f64,
    pub ratio_estimate: f64,
    /// K_PSD · b₁(n), the largest γ/θ possible for a rank-n Gram matrix.
    pub finite_n_bound: f64,
    /// Nominal standard error of gamma_lower, treating the pairs i < j as independent.
    pub mc_std: f64,
    pub theta_exact: bool,
    pub note: String,
}

/// One alternating run from the start t; returns ‖Σ t_i x_i‖².
fn alternate(xs: &[Vec<C64>], mut t: Vec<C64>, max_iters: usize) -> f64 {
    let n = xs[0].len();
    let weighted = |t: &[C64]| {
        let mut w = vec![zero(); n];
        for (x, ti) in xs.iter().zip(t) {
            for (wk, xk) in w.iter_mut().zip(x) {
                *wk += ti * xk;
            }
        }
        w
    };
    let mut w = weighted(&t);
    let mut val = norm(&w).powi(2);
    for _ in 0..max_iters {
        let v = sign_vec(&w);
        let next: Vec<C64> = xs.iter().map(|x| sign(dot(x, &v))).collect();
        let w_next = weighted(&next);
        let val_next = norm(&w_next).powi(2);
        assert!(
            val_next >= val - 1e-9 * val.max(1.0),
            "alternating maximization decreased: {val} -> {val_next}"
        );
        let stalled = next == t || val_next - val <= 1e-15 * val.max(1.0);
        t = next;
        w = w_next;
        val = val_next;
        if stalled {
            break;
        }
    }
    val
}

/// Sample m unit vectors in 𝕜^n and estimate γ(A)/θ(A) for A = G/m².
pub fn sharpness_experiment(
    n: usize,
    m: usize,
    field: Field,
    stream: RngStream,
    cfg: &SharpnessConfig,
) -> Result<SharpnessReport> {
    if n < 2 || m < n {
        return domain(format!("need m >= n >= 2, got n = {n}, m = {m}"));
    }
    let mut rng = stream.child(0).rng();
    let xs: Vec<Vec<C64>> = (0..m).map(|_| sample_sphere(n, field, &mut rng)).collect();
    let mf = m as f64;

    let pairs: Vec<f64> = (0..m)
        .into_par_iter()
        .flat_map_iter(|i| {
            let xs = &xs;
            (i + 1..m).map(move |j| dot(&xs[i], &xs[j]).norm_sqr())
        })
        .collect();
    let npairs = pairs.len() as f64;
    let pair_mean = pairs.iter().sum::<f64>() / npairs;
    let pair_var = pairs.iter().map(|p| (p - pair_mean).powi(2)).sum::<f64>() / (npairs - 1.0).max(1.0);
    let gamma_lower = (mf + 2.0 * npairs * pair_mean) / (mf * mf);
    let mc_std = 2.0 * npairs / (mf * mf) * (pair_var / npairs).sqrt();

    let (theta, theta_exact) = if field == Field::Real && m <= cfg.exact_max_m {
        let a = SymMatrix::real_from_fn(m, |i, j| dot(&xs[i], &xs[j]).re / (mf * mf));
        (crate::oracle::theta_real_exact(&a)?.0, true)
    } else {
        let best = (0..cfg.restarts.max(1))
            .into_par_iter()
            .map(|r| {
                let mut rng = stream.child(1 + r as u64).rng();
                let t = (0..m)
                    .map(|_| match field {
                        Field::Real => C64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0),
                        Field::Complex => C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU),
                    })
                    .collect();
                alternate(&xs, t, cfg.max_iters)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0, f64::max);
        (best / (mf * mf), false)
    };
    let finite_n_bound = special::constants().psd(field) * special::b1_coefficient(n, field);
    let note = if theta_exact {
        "theta enumerated exactly; gamma_lower is attained, so the ratio is a lower bound on gamma/theta".to_string()
    } else {
        "theta_estimate is a lower bound on theta; the ratio overstates gamma_lower/theta by the optimization gap"
            .to_string()
    };
    Ok(SharpnessReport {
        n,
        m,
        field,
        gamma_lower,
        theta_estimate: theta,
        ratio_estimate: gamma_lower / theta,
        finite_n_bound,
        mc_std,
        theta_exact,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_vec_of_zero_is_first_basis_vector() {
        let e = sign_vec(&[zero(), zero(), zero()]);
        assert_eq!(e, vec![C64::new(1.0, 0.0), zero(), zero()]);
    }

    #[test]
    fn mc_mean_is_schedule_independent() {
        let s = RngStream::new(7, 3);
        let a = mc_mean(s, 20_000, |rng| C64::new(rng::normal(rng), 0.0));
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| mc_mean(s, 20_000, |rng| C64::new(rng::normal(rng), 0.0)));
        assert_eq!(a, b);
    }

    #[test]
    fn identical_vectors_round_to_a_constant() {
        let v = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let xs = GramFactor {
            n: 4,
            d: 2,
            field: Field::Complex,
            constraint: Constraint::UnitSphere,
            vectors: v.iter().cycle().take(8).cloned().collect(),
        };
        let mut rng = RngStream::new(1, 0).rng();
        for _ in 0..20 {
            let delta = gaussian_sign_round(&xs, &mut rng).unwrap();
            assert!(delta.iter().all(|t| (t - delta[0]).norm() < 1e-15));
        }
    }

    #[test]
    fn real_d1_rounding_reproduces_signs_up_to_global_sign() {
        let signs = [1.0, -1.0, -1.0, 1.0];
        let xs = GramFactor {
            n: 4,
            d: 1,
            field: Field::Real,
            constraint: Constraint::UnitSphere,
            vectors: signs.iter().map(|&s| C64::new(s, 0.0)).collect(),
        };
        let mut rng = RngStream::new(2, 0).rng();
        for _ in 0..20 {
            let delta = gaussian_sign_round(&xs, &mut rng).unwrap();
            let g = delta[0].re;
            for (d, s) in delta.iter().zip(signs) {
                assert_eq!(d.re, g * s);
            }
        }
    }

    #[test]
    fn ball_factor_is_rejected() {
        let xs = GramFactor { n: 1, d: 1, field: Field::Real, constraint: Constraint::UnitBall, vectors: vec![zero()] };
        assert!(gaussian_sign_round(&xs, &mut RngStream::new(0, 0).rng()).is_err());
    }
}
