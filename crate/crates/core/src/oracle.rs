//! Exact small-instance values of the combinatorial quantities: the θ-seminorm
//! and Θ-norm of real matrices, box-constrained quadratic maxima, cut norm and
//! stretch. A heuristic lower bound for the complex θ-seminorm lives here too.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::matrix::{RectMatrix, SymMatrix, C64};
use crate::rng::RngStream;

/// Largest n for sign enumeration.
pub const MAX_SIGN_N: usize = 24;
/// Largest n for face enumeration of the cube.
pub const MAX_BOX_N: usize = 12;

/// Extremes of δᵀAδ over δ ∈ {−1, 1}ⁿ.
#[derive(Clone, Debug)]
pub struct SignExtremes {
    pub max: f64,
    pub argmax: Vec<f64>,
    pub min: f64,
    pub argmin: Vec<f64>,
}

fn check_sign_size(n: usize) -> Result<()> {
    if n > MAX_SIGN_N {
        return Err(Error::TooLarge { what: "sign enumeration", n, max: MAX_SIGN_N });
    }
    Ok(())
}

fn bits_to_signs(bits: u64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 }).collect()
}

/// Gray-code walk over coordinates 1..=free with the others fixed by `prefix`.
/// Returns (max, argmax bits, min, argmin bits).
fn gray_chunk(a: &[f64], n: usize, free: usize, prefix: u64) -> (f64, u64, f64, u64) {
    let mut bits = prefix << (free + 1);
    let mut delta = bits_to_signs(bits, n);
    let mut w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i * n + j] * delta[j]).sum()).collect();
    let mut v: f64 = (0..n).map(|i| delta[i] * w[i]).sum();
    let (mut best_max, mut arg_max, mut best_min, mut arg_min) = (v, bits, v, bits);
    for step in 1u64..(1u64 << free) {
        let k = step.trailing_zeros() as usize + 1;
        let dk = delta[k];
        v -= 4.0 * dk * (w[k] - a[k * n + k] * dk);
        for i in 0..n {
            w[i] -= 2.0 * a[i * n + k] * dk;
        }
        delta[k] = -dk;
        bits ^= 1 << k;
        if v > best_max {
            best_max = v;
            arg_max = bits;
        }
        if v < best_min {
            best_min = v;
            arg_min = bits;
        }
    }
    (best_max, arg_max, best_min, arg_min)
}

/// Max and min of δᵀAδ over sign vectors by Gray-code enumeration with
/// δ₁ = 1 fixed (the form is even in δ).
pub fn sign_extremes(a: &SymMatrix) -> Result<SignExtremes> {
    let n = a.n();
    check_sign_size(n)?;
    let data = a.real_entries()?;
    let split = if n > 16 { (n - 1).min(8) } else { 0 };
    let free = n - 1 - split;
    let parts: Vec<_> = (0..1u64 << split).into_par_iter().map(|p| gray_chunk(&data, n, free, p)).collect();
    let mut best = parts[0];
    for &p in &parts[1..] {
        if p.0 > best.0 {
            best.0 = p.0;
            best.1 = p.1;
        }
        if p.2 < best.2 {
            best.2 = p.2;
            best.3 = p.3;
        }
    }
    // Recompute at the argmax to shed accumulated rounding from the walk.
    let argmax = bits_to_signs(best.1, n);
    let argmin = bits_to_signs(best.3, n);
    let q = |x: &[f64]| a.quad_form(&x.iter().map(|&t| C64::new(t, 0.0)).collect::<Vec<_>>());
    Ok(SignExtremes { max: q(&argmax), argmax, min: q(&argmin), argmin })
}

/// ‖A‖_θ = max |δᵀAδ| over δ ∈ {−1,1}ⁿ, with a maximizing sign vector.
pub fn theta_real_exact(a: &SymMatrix) -> Result<(f64, Vec<f64>)> {
    let e = sign_extremes(a)?;
    if e.max >= -e.min {
        Ok((e.max, e.argmax))
    } else {
        Ok((-e.min, e.argmin))
    }
}

/// str(A) = q_=(A) + q_=(−A) = max − min of δᵀAδ over sign vectors.
pub fn stretch_exact(a: &SymMatrix) -> Result<f64> {
    let e = sign_extremes(a)?;
    Ok(e.max - e.min)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Face {
    Lo,
    Hi,
    Free,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoxMaxResult {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub face_pattern: Vec<Face>,
    /// Faces whose free block was numerically singular and was skipped; the
    /// maximum over such a face is also attained on a lower-dimensional face.
    pub singular_faces: usize,
}

/// Solve the dense system m·x = b in place by partial-pivot elimination.
/// Returns false when the pivot ratio exceeds 1e12.
fn solve_in_place(m: &mut [f64], b: &mut [f64], k: usize) -> bool {
    let mut pmax: f64 = 0.0;
    let mut pmin = f64::INFINITY;
    for c in 0..k {
        let p = (c..k).max_by(|&r, &s| m[r * k + c].abs().total_cmp(&m[s * k + c].abs())).unwrap();
        if p != c {
            for j in 0..k {
                m.swap(c * k + j, p * k + j);
            }
            b.swap(c, p);
        }
        let piv = m[c * k + c];
        pmax = pmax.max(piv.abs());
        pmin = pmin.min(piv.abs());
        if piv == 0.0 {
            return false;
        }
        for r in c + 1..k {
            let f = m[r * k + c] / piv;
            if f != 0.0 {
                for j in c..k {
                    m[r * k + j] -= f * m[c * k + j];
                }
                b[r] -= f * b[c];
            }
        }
    }
    if pmin < 1e-12 * pmax {
        return false;
    }
    for c in (0..k).rev() {
        let mut s = b[c];
        for j in c + 1..k {
            s -= m[c * k + j] * b[j];
        }
        b[c] = s / m[c * k + c];
    }
    true
}

/// q_≤(A) = max of xᵀAx over the cube [−1,1]ⁿ, by enumerating all 3ⁿ
/// lo/hi/free face patterns and solving the stationarity system on each.
pub fn box_quad_max(a: &SymMatrix) -> Result<BoxMaxResult> {
    let n = a.n();
    if n > MAX_BOX_N {
        return Err(Error::TooLarge { what: "box face enumeration", n, max: MAX_BOX_N });
    }
    let data = a.real_entries()?;
    let total = 3usize.pow(n as u32);
    let chunks = total.div_ceil(729).max(1);
    let results: Vec<_> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut best = (f64::NEG_INFINITY, vec![0.0; n], vec![Face::Free; n]);
            let mut singular = 0usize;
            let mut pattern = vec![Face::Free; n];
            let mut x = vec![0.0; n];
            let mut free = Vec::with_capacity(n);
            let mut m = vec![0.0; n * n];
            let mut rhs = vec![0.0; n];
            for idx in c * 729..((c + 1) * 729).min(total) {
                let mut t = idx;
                free.clear();
                for i in 0..n {
                    pattern[i] = match t % 3 {
                        0 => Face::Lo,
                        1 => Face::Hi,
                        _ => Face::Free,
                    };
                    t /= 3;
                    match pattern[i] {
                        Face::Lo => x[i] = -1.0,
                        Face::Hi => x[i] = 1.0,
                        Face::Free => {
                            x[i] = 0.0;
                            free.push(i);
                        }
                    }
                }
                let k = free.len();
                if k > 0 {
                    for (r, &i) in free.iter().enumerate() {
                        for (s, &j) in free.iter().enumerate() {
                            m[r * k + s] = data[i * n + j];
                        }
                        rhs[r] = -(0..n).filter(|&j| pattern[j] != Face::Free).map(|j| data[i * n + j] * x[j]).sum::<f64>();
                    }
                    if !solve_in_place(&mut m[..k * k], &mut rhs[..k], k) {
                        singular += 1;
                        continue;
                    }
                    if rhs[..k].iter().any(|v| v.abs() > 1.0 + 1e-12) {
                        continue;
                    }
                    for (r, &i) in free.iter().enumerate() {
                        x[i] = rhs[r].clamp(-1.0, 1.0);
                    }
                }
                let mut val = 0.0;
                for i in 0..n {
                    let mut row = 0.0;
                    for j in 0..n {
                        row += data[i * n + j] * x[j];
                    }
                    val += x[i] * row;
                }
                if val > best.0 {
                    best = (val, x.clone(), pattern.clone());
                }
            }
            (best, singular)
        })
        .collect();
    let singular_faces = results.iter().map(|r| r.1).sum();
    let best = results
        .into_iter()
        .map(|r| r.0)
        .max_by(|p, q| p.0.total_cmp(&q.0))
        .expect("at least one face");
    Ok(BoxMaxResult { value: best.0, argmax: best.1, face_pattern: best.2, singular_faces })
}

/// ‖A‖_Θ = max(q_≤(A), q_≤(−A)).
pub fn big_theta_real_exact(a: &SymMatrix) -> Result<f64> {
    Ok(box_quad_max(a)?.value.max(box_quad_max(&a.neg())?.value))
}

/// Heuristic lower bound on the complex θ-seminorm: multi-start coordinate
/// ascent over unit-modulus δ, each coordinate set in closed form to the
/// phase of its linear coefficient. Starts are drawn from the `angles_k`-point
/// phase grid and from continuous random phases.
pub fn theta_complex_lower(a: &SymMatrix, angles_k: usize, restarts: usize, seed: u64) -> (f64, Vec<C64>) {
    let n = a.n();
    let root = RngStream::new(seed, 0x7e7a);
    let runs: Vec<(f64, Vec<C64>)> = (0..restarts.max(1) * 2)
        .into_par_iter()
        .map(|r| {
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            let start = r / 2;
            let mut rng = root.child(r as u64).rng();
            let mut delta: Vec<C64> = (0..n)
                .map(|_| {
                    if start == 0 {
                        C64::new(1.0, 0.0)
                    } else if start % 2 == 1 && angles_k > 0 {
                        let k = rng.random_range(0..angles_k);
                        C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / angles_k as f64)
                    } else {
                        C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)
                    }
                })
                .collect();
            let mut val = sign * a.quad_form(&delta);
            for _ in 0..10_000 {
                for i in 0..n {
                    let mut h = C64::new(0.0, 0.0);
                    for j in 0..n {
                        if j != i {
                            h += a.get(i, j) * delta[j];
                        }
                    }
                    h *= sign;
                    if h.norm() > 0.0 {
                        delta[i] = h / h.norm();
                    }
                }
                let next = sign * a.quad_form(&delta);
                let done = next - val <= 1e-15 * (1.0 + val.abs());
                val = val.max(next);
                if done {
                    break;
                }
            }
            (a.quad_form(&delta).abs(), delta)
        })
        .collect();
    runs.into_iter().max_by(|p, q| p.0.total_cmp(&q.0)).unwrap()
}

/// ‖B‖_cut = max over row/column subsets of |Σ_{i∈I, j∈J} b_ij|.
pub fn cut_norm_exact(b: &RectMatrix) -> Result<f64> {
    if b.field() != crate::Field::Real {
        return domain("cut_norm_exact needs a real matrix");
    }
    let (m, n) = (b.rows(), b.cols());
    if m + n > MAX_SIGN_N {
        return Err(Error::TooLarge { what: "cut norm enumeration", n: m + n, max: MAX_SIGN_N });
    }
    // Enumerate subsets along the shorter side.
    let (rows, cols, get): (usize, usize, Box<dyn Fn(usize, usize) -> f64>) = if m <= n {
        (m, n, Box::new(|i, j| b.get(i, j).re))
    } else {
        (n, m, Box::new(|i, j| b.get(j, i).re))
    };
    let mut sums = vec![0.0; cols];
    let mut inset = vec![false; rows];
    let mut best: f64 = 0.0;
    for step in 1u64..(1u64 << rows) {
        let k = step.trailing_zeros() as usize;
        let s = if inset[k] { -1.0 } else { 1.0 };
        inset[k] = !inset[k];
        for (j, v) in sums.iter_mut().enumerate() {
            *v += s * get(k, j);
        }
        let pos: f64 = sums.iter().map(|v| v.max(0.0)).sum();
        let neg: f64 = sums.iter().map(|v| (-v).max(0.0)).sum();
        best = best.max(pos).max(neg);
    }
    Ok(best)
}
