//! Grothendieck d-norms by low-rank Gram factor ascent.
//!
//! ‖A‖_{γ,d} and ‖A‖_{Γ,d} maximize |Σ a_ij ⟨x_i, x_j⟩| over n vectors in 𝕜^d
//! on the unit sphere (γ) or in the unit ball (Γ). Both signs ±A are
//! maximized by multi-start projected gradient ascent with Armijo
//! backtracking, and the larger value is kept. Once d(d+1)/2 > n (real) or
//! d² > n (complex), the rank constraint is inactive and the value is that of
//! the underlying semidefinite program; such estimates are labelled
//! [`CertificateKind::ExactConvexRegime`].
//!
//! Over the reals at d = 1 the sphere is {±1} and gradient steps are
//! meaningless, so γ and Γ are routed to the exact enumerations of
//! [`crate::oracle`] when n is small enough.

use std::ops::{Add, AddAssign, Mul, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Field, RectMatrix, SymMatrix, C64};
use crate::oracle;
use crate::rng::{self, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Constraint {
    UnitSphere,
    UnitBall,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StepRule {
    Fixed,
    Backtracking,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    ExactClosedForm,
    ExactEnumeration,
    ExactConvexRegime,
    HeuristicLowerBound,
}

impl CertificateKind {
    pub fn is_exact(self) -> bool {
        self != CertificateKind::HeuristicLowerBound
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_rule: StepRule,
    /// Stationarity tolerance, relative to ‖A‖_F.
    pub tol_grad: f64,
    pub seed: u64,
    /// Repeat the search with doubled restarts and a fresh seed, and warn when
    /// the two runs disagree by more than 1e−5.
    pub cross_check: bool,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            restarts: 16,
            max_iters: 2000,
            step_rule: StepRule::Backtracking,
            tol_grad: 1e-9,
            seed: 0x6a09_e667,
            cross_check: true,
        }
    }
}

impl OptConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        OptConfig { seed, ..self }
    }

    pub fn quick(self) -> Self {
        OptConfig { cross_check: false, ..self }
    }
}

/// n vectors in 𝕜^d, stored column by column.
#[derive(Clone, Debug, Serialize)]
pub struct GramFactor {
    pub n: usize,
    pub d: usize,
    pub field: Field,
    pub constraint: Constraint,
    #[serde(skip)]
    pub vectors: Vec<C64>,
}

impl GramFactor {
    pub fn column(&self, i: usize) -> &[C64] {
        &self.vectors[i * self.d..(i + 1) * self.d]
    }

    /// ⟨x_i, x_j⟩ = Σ_k conj(x_ik) x_jk.
    pub fn inner(&self, i: usize, j: usize) -> C64 {
        self.column(i).iter().zip(self.column(j)).map(|(a, b)| a.conj() * b).sum()
    }

    /// The Gram matrix, row-major.
    pub fn gram(&self) -> Vec<C64> {
        let n = self.n;
        let mut g = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = self.inner(i, j);
            }
        }
        g
    }

    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.column(i).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()).collect()
    }

    /// Σ a_ij ⟨x_i, x_j⟩ (real for Hermitian A).
    pub fn objective(&self, a: &SymMatrix) -> f64 {
        a.pair_sum(&self.gram())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub certificate: GramFactor,
    pub kind: CertificateKind,
    /// +1 if A was maximized, −1 if −A was.
    pub sign: i8,
    pub d_effective: usize,
    pub iterations: usize,
    pub restarts_used: usize,
    /// |difference| between the primary run and the doubled-restart rerun.
    pub cross_check_gap: Option<f64>,
    pub warning: Option<String>,
}

/// Whether rank d already attains the unconstrained semidefinite value.
pub fn is_convex_regime(n: usize, d: usize, field: Field) -> bool {
    d >= n
        || match field {
            Field::Real => d * (d + 1) / 2 > n,
            Field::Complex => d * d > n,
        }
}

/// Smallest d in the convex regime.
pub fn convex_rank(n: usize, field: Field) -> usize {
    (1..=n).find(|&d| is_convex_regime(n, d, field)).unwrap_or(n)
}

trait Scalar:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + AddAssign + 'static
{
    const FIELD: Field;
    fn zero() -> Self;
    fn from_c64(z: C64) -> Self;
    fn to_c64(self) -> C64;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn abs2(self) -> f64;
    fn scale(self, s: f64) -> Self;
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;
    fn zero() -> Self {
        0.0
    }
    fn from_c64(z: C64) -> Self {
        z.re
    }
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for C64 {
    const FIELD: Field = Field::Complex;
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn from_c64(z: C64) -> Self {
        z
    }
    fn to_c64(self) -> C64 {
        self
    }
    fn conj(self) -> Self {
        C64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

/// One ascent problem: maximize Σ a_ij ⟨x_i, x_j⟩ for a fixed (signed) A.
struct Problem<S> {
    a: Vec<S>,
    n: usize,
    d: usize,
    constraint: Constraint,
    scale: f64,
}

impl<S: Scalar> Problem<S> {
    /// h_i = Σ_j a_ij x_j.
    fn field_of(&self, x: &[S], h: &mut [S]) {
        let (n, d) = (self.n, self.d);
        h.iter_mut().for_each(|v| *v = S::zero());
        for i in 0..n {
            let hi = &mut h[i * d..(i + 1) * d];
            for j in 0..n {
                let a = self.a[i * n + j];
                let xj = &x[j * d..(j + 1) * d];
                for k in 0..d {
                    hi[k] += a * xj[k];
                }
            }
        }
    }

    fn value(&self, x: &[S], h: &[S]) -> f64 {
        x.iter().zip(h).map(|(a, b)| (a.conj() * *b).re()).sum()
    }

    fn project_column(&self, col: &mut [S]) {
        let nrm = col.iter().map(|v| v.abs2()).sum::<f64>().sqrt();
        match self.constraint {
            Constraint::UnitSphere => {
                if nrm > 0.0 {
                    col.iter_mut().for_each(|v| *v = v.scale(1.0 / nrm));
                } else {
                    col.iter_mut().for_each(|v| *v = S::zero());
                    col[0] = S::from_c64(C64::new(1.0, 0.0));
                }
            }
            Constraint::UnitBall => {
                if nrm > 1.0 {
                    col.iter_mut().for_each(|v| *v = v.scale(1.0 / nrm));
                }
            }
        }
    }

    /// Projected (Riemannian, for the sphere) gradient of the objective.
    fn projected_gradient(&self, x: &[S], h: &[S], g: &mut [S]) {
        let d = self.d;
        for i in 0..self.n {
            let xi = &x[i * d..(i + 1) * d];
            let hi = &h[i * d..(i + 1) * d];
            let gi = &mut g[i * d..(i + 1) * d];
            let radial: f64 = xi.iter().zip(hi).map(|(a, b)| (a.conj() * *b).re()).sum();
            let nx2: f64 = xi.iter().map(|v| v.abs2()).sum();
            let strip = match self.constraint {
                Constraint::UnitSphere => true,
                Constraint::UnitBall => nx2 >= 1.0 - 1e-12 && radial > 0.0,
            };
            for k in 0..d {
                gi[k] = if strip && nx2 > 0.0 {
                    (hi[k] - xi[k].scale(radial / nx2)).scale(2.0)
                } else {
                    hi[k].scale(2.0)
                };
            }
        }
    }

    /// Coordinate ascent for the real unit sphere in dimension 1, i.e. over
    /// sign vectors: x_i ← sign(h_i) until no coordinate improves.
    fn sign_ascent(&self, x: &mut [S], max_sweeps: usize) -> usize {
        let n = self.n;
        for sweep in 0..max_sweeps {
            let mut changed = false;
            for i in 0..n {
                let mut h = 0.0;
                for j in 0..n {
                    if j != i {
                        h += (self.a[i * n + j] * x[j]).re();
                    }
                }
                let s = if h >= 0.0 { 1.0 } else { -1.0 };
                if h != 0.0 && s != x[i].re() {
                    x[i] = S::from_c64(C64::new(s, 0.0));
                    changed = true;
                }
            }
            if !changed {
                return sweep + 1;
            }
        }
        max_sweeps
    }

    /// Block coordinate ascent: each column in turn is set to the exact
    /// maximizer of a_ii‖x_i‖² + 2 Re⟨x_i, g_i⟩, g_i = Σ_{j≠i} a_ij x_j, with
    /// the other columns fixed. Monotone; stops once a sweep gains nothing.
    fn coordinate_polish(&self, x: &mut [S], mut f: f64, max_sweeps: usize) -> (f64, usize) {
        let (n, d) = (self.n, self.d);
        let mut g = vec![S::zero(); d];
        let mut h = vec![S::zero(); n * d];
        for sweep in 0..max_sweeps {
            for i in 0..n {
                g.iter_mut().for_each(|v| *v = S::zero());
                for j in (0..n).filter(|&j| j != i) {
                    let a = self.a[i * n + j];
                    for k in 0..d {
                        g[k] += a * x[j * d + k];
                    }
                }
                let gn = g.iter().map(|v| v.abs2()).sum::<f64>().sqrt();
                let aii = self.a[i * n + i].re();
                let xi = &mut x[i * d..(i + 1) * d];
                if gn == 0.0 {
                    if self.constraint == Constraint::UnitBall && aii < 0.0 {
                        xi.iter_mut().for_each(|v| *v = S::zero());
                    }
                    continue;
                }
                let r = match self.constraint {
                    Constraint::UnitBall if aii < 0.0 => (gn / -aii).min(1.0),
                    _ => 1.0,
                };
                for k in 0..d {
                    xi[k] = g[k].scale(r / gn);
                }
            }
            self.field_of(x, &mut h);
            let next = self.value(x, &h);
            let gain = next - f;
            f = next.max(f);
            if gain <= 1e-15 * self.scale {
                return (f, sweep + 1);
            }
        }
        (f, max_sweeps)
    }

    /// Ascend from `x` in place; returns (value, iterations).
    fn ascend(&self, x: &mut Vec<S>, cfg: &OptConfig) -> (f64, usize) {
        let (n, d) = (self.n, self.d);
        for i in 0..n {
            self.project_column(&mut x[i * d..(i + 1) * d]);
        }
        let mut h = vec![S::zero(); n * d];
        if S::FIELD == Field::Real && d == 1 && self.constraint == Constraint::UnitSphere {
            let it = self.sign_ascent(x, cfg.max_iters);
            self.field_of(x, &mut h);
            return (self.value(x, &h), it);
        }
        let tol = cfg.tol_grad * self.scale;
        let mut g = vec![S::zero(); n * d];
        let mut y = vec![S::zero(); n * d];
        let mut hy = vec![S::zero(); n * d];
        self.field_of(x, &mut h);
        let mut f = self.value(x, &h);
        let mut t = 0.5 / self.scale;
        let fixed_t = 0.5 / self.scale;
        let mut iters = 0;
        while iters < cfg.max_iters {
            iters += 1;
            self.projected_gradient(x, &h, &mut g);
            let gnorm2: f64 = g.iter().map(|v| v.abs2()).sum();
            if gnorm2.sqrt() <= tol {
                break;
            }
            let mut step = if cfg.step_rule == StepRule::Fixed { fixed_t } else { (2.0 * t).min(1e6 / self.scale) };
            let mut accepted = false;
            for _ in 0..80 {
                for k in 0..n * d {
                    y[k] = x[k] + g[k].scale(step);
                }
                for i in 0..n {
                    self.project_column(&mut y[i * d..(i + 1) * d]);
                }
                self.field_of(&y, &mut hy);
                let fy = self.value(&y, &hy);
                if cfg.step_rule == StepRule::Fixed {
                    accepted = true;
                } else {
                    // Armijo along the projection arc.
                    let gain: f64 = match self.constraint {
                        Constraint::UnitSphere => step * gnorm2,
                        Constraint::UnitBall => g.iter().zip(y.iter().zip(x.iter())).map(|(gk, (yk, xk))| (gk.conj() * (*yk - *xk)).re()).sum(),
                    };
                    accepted = fy >= f + 1e-4 * gain;
                }
                if accepted {
                    std::mem::swap(x, &mut y);
                    std::mem::swap(&mut h, &mut hy);
                    f = fy;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
            t = step;
        }
        let (f, sweeps) = self.coordinate_polish(x, f, cfg.max_iters);
        (f, iters + sweeps)
    }
}

/// Starting point from the leading eigenvector of the signed matrix: every
/// column is the phase of its eigenvector entry along e₁, plus noise.
fn eigen_start<S: Scalar>(a: &SymMatrix, n: usize, d: usize, rng: &mut impl rand::Rng) -> Vec<S> {
    let u = a.leading_eigenvector();
    let mut x = vec![S::zero(); n * d];
    for i in 0..n {
        let phase = if u[i].norm() > 0.0 { u[i] / u[i].norm() } else { C64::new(1.0, 0.0) };
        x[i * d] = S::from_c64(phase);
        for k in 0..d {
            x[i * d + k] += S::from_c64(rng::gaussian(rng, S::FIELD) * 0.1);
        }
    }
    x
}

struct RunResult {
    value: f64,
    sign: i8,
    x: Vec<C64>,
    iterations: usize,
}

fn multistart<S: Scalar>(a: &SymMatrix, d: usize, constraint: Constraint, signs: &[i8], cfg: &OptConfig, restarts: usize, seed: u64) -> RunResult {
    let n = a.n();
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let root = RngStream::new(seed, 0x6772_616d);
    let jobs: Vec<(i8, usize)> = signs.iter().flat_map(|&s| (0..restarts).map(move |r| (s, r))).collect();
    let runs: Vec<RunResult> = jobs
        .par_iter()
        .map(|&(s, r)| {
            let signed = if s > 0 { a.clone() } else { a.neg() };
            let problem = Problem::<S> {
                a: signed.entries().iter().map(|&z| S::from_c64(z)).collect(),
                n,
                d,
                constraint,
                scale,
            };
            let mut rng = root.child(((s > 0) as u64) << 32 | r as u64).rng();
            let mut x = if r == 0 {
                eigen_start::<S>(&signed, n, d, &mut rng)
            } else {
                (0..n * d).map(|_| S::from_c64(rng::gaussian(&mut rng, S::FIELD))).collect()
            };
            let (value, iterations) = problem.ascend(&mut x, cfg);
            RunResult { value, sign: s, x: x.into_iter().map(|v| v.to_c64()).collect(), iterations }
        })
        .collect();
    let iterations = runs.iter().map(|r| r.iterations).sum();
    let best = runs.into_iter().max_by(|p, q| p.value.total_cmp(&q.value)).expect("at least one restart");
    RunResult { iterations, ..best }
}

/// Shared driver: maximize s·Σ a_ij⟨x_i,x_j⟩ over the given signs.
fn optimize(a: &SymMatrix, d: usize, constraint: Constraint, signs: &[i8], cfg: &OptConfig) -> NormEstimate {
    let n = a.n();
    let d = d.clamp(1, n);
    let restarts = cfg.restarts.max(1);
    let run = |restarts: usize, seed: u64| match a.field() {
        Field::Real => multistart::<f64>(a, d, constraint, signs, cfg, restarts, seed),
        Field::Complex => multistart::<C64>(a, d, constraint, signs, cfg, restarts, seed),
    };
    let first = run(restarts, cfg.seed);
    let mut gap = None;
    let mut warning = None;
    let mut restarts_used = restarts;
    let best = if cfg.cross_check {
        let second = run(2 * restarts, cfg.seed ^ 0x5bd1_e995_2c8f_3a71);
        restarts_used += 2 * restarts;
        let diff = (first.value - second.value).abs();
        gap = Some(diff);
        if diff > 1e-5 * first.value.abs().max(1.0) {
            warning = Some(format!("restart runs disagree by {diff:.3e}"));
        }
        if second.value > first.value {
            RunResult { iterations: first.iterations + second.iterations, ..second }
        } else {
            RunResult { iterations: first.iterations + second.iterations, ..first }
        }
    } else {
        first
    };
    let certificate = GramFactor { n, d, field: a.field(), constraint, vectors: best.x };
    let raw = certificate.objective(a);
    let value = if signs.len() == 1 { raw } else { raw.abs() };
    let kind = if is_convex_regime(n, d, a.field()) {
        CertificateKind::ExactConvexRegime
    } else {
        CertificateKind::HeuristicLowerBound
    };
    NormEstimate {
        value,
        certificate,
        kind,
        sign: best.sign,
        d_effective: d,
        iterations: best.iterations,
        restarts_used,
        cross_check_gap: gap,
        warning,
    }
}

fn sign_certificate(delta: &[f64], constraint: Constraint) -> GramFactor {
    GramFactor {
        n: delta.len(),
        d: 1,
        field: Field::Real,
        constraint,
        vectors: delta.iter().map(|&t| C64::new(t, 0.0)).collect(),
    }
}

fn exact_estimate(a: &SymMatrix, certificate: GramFactor) -> NormEstimate {
    let raw = certificate.objective(a);
    NormEstimate {
        value: raw.abs(),
        certificate,
        kind: CertificateKind::ExactEnumeration,
        sign: if raw >= 0.0 { 1 } else { -1 },
        d_effective: 1,
        iterations: 0,
        restarts_used: 0,
        cross_check_gap: None,
        warning: None,
    }
}

/// ‖A‖_{γ,d}: unit-sphere vectors.
pub fn gamma_d(a: &SymMatrix, d: usize, cfg: &OptConfig) -> NormEstimate {
    if a.field() == Field::Real && d.min(a.n()) == 1 && a.n() <= oracle::MAX_SIGN_N {
        let (_, delta) = oracle::theta_real_exact(a).expect("size and field checked");
        return exact_estimate(a, sign_certificate(&delta, Constraint::UnitSphere));
    }
    optimize(a, d, Constraint::UnitSphere, &[1, -1], cfg)
}

/// ‖A‖_{Γ,d}: unit-ball vectors.
pub fn big_gamma_d(a: &SymMatrix, d: usize, cfg: &OptConfig) -> NormEstimate {
    if a.field() == Field::Real && d.min(a.n()) == 1 && a.n() <= oracle::MAX_BOX_N {
        let plus = oracle::box_quad_max(a).expect("size and field checked");
        let minus = oracle::box_quad_max(&a.neg()).expect("size and field checked");
        let x = if plus.value >= minus.value { plus.argmax } else { minus.argmax };
        return exact_estimate(a, sign_certificate(&x, Constraint::UnitBall));
    }
    let est = optimize(a, d, Constraint::UnitBall, &[1, -1], cfg);
    if a.classify_cones().contains(&crate::ConeLabel::ZeroDiagonal) {
        let short = est.certificate.column_norms().iter().any(|&r| r < 1.0 - 1e-6);
        if short && est.warning.is_none() {
            return NormEstimate {
                warning: Some("zero-diagonal maximizer has non-unit columns".into()),
                ..est
            };
        }
    }
    est
}

/// ‖B‖_{G,d} = ½‖[[0, B], [B*, 0]]‖_{Γ,d}.
pub fn g_d_rect(b: &RectMatrix, d: usize, cfg: &OptConfig) -> NormEstimate {
    let est = big_gamma_d(&b.embed(), d, cfg);
    NormEstimate { value: 0.5 * est.value, ..est }
}

/// ‖A‖_{G,d} of a square matrix, through its dilation.
pub fn g_d_sym(a: &SymMatrix, d: usize, cfg: &OptConfig) -> NormEstimate {
    let b = RectMatrix::from_entries(a.n(), a.n(), a.field(), a.entries()).expect("square entries");
    g_d_rect(&b, d, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// r_=: correlation matrices (unit diagonal).
    Eq,
    /// r_≤: subcorrelation matrices (diagonal in [0, 1]).
    Le,
}

/// max tr(AG) over (sub)correlation matrices, without absolute value,
/// computed at the smallest rank in the convex regime. `value` is signed.
pub fn r_signed(a: &SymMatrix, variant: Variant, cfg: &OptConfig) -> NormEstimate {
    let constraint = match variant {
        Variant::Eq => Constraint::UnitSphere,
        Variant::Le => Constraint::UnitBall,
    };
    let d = convex_rank(a.n(), a.field());
    optimize(a, d, constraint, &[1], cfg)
}

/// spr(A) = r_=(A) + r_=(−A).
pub fn spread(a: &SymMatrix, cfg: &OptConfig) -> f64 {
    r_signed(a, Variant::Eq, cfg).value + r_signed(&a.neg(), Variant::Eq, cfg).value
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Gamma,
    BigGamma,
}

/// The complex d-norm of a real matrix, computed as the real 2d-norm.
pub fn complex_norm_via_real(a: &SymMatrix, d: usize, which: Which, cfg: &OptConfig) -> Result<NormEstimate> {
    if a.field() != Field::Real {
        return Err(Error::FieldMismatch { expected: Field::Real, found: a.field() });
    }
    let est = match which {
        Which::Gamma => gamma_d(a, 2 * d, cfg),
        Which::BigGamma => big_gamma_d(a, 2 * d, cfg),
    };
    let kind = if is_convex_regime(a.n(), d, Field::Complex) || est.kind == CertificateKind::ExactConvexRegime {
        CertificateKind::ExactConvexRegime
    } else {
        est.kind
    };
    Ok(NormEstimate { kind, ..est })
}
