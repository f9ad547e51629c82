//! Inequality verification and the cut applications.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gram::{self, CertificateKind, OptConfig};
use crate::matrix::{ConeLabel, Field, RectMatrix, SymMatrix, TOL_ZERO};
use crate::oracle;
use crate::rng::RngStream;
use crate::rounding;
use crate::special::constants;

/// Default relative slack of a reported check.
pub const TOL_REPORT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub kind: CertificateKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSet {
    pub theta: NormValue,
    #[serde(rename = "Theta")]
    pub big_theta: NormValue,
    pub gamma: NormValue,
    #[serde(rename = "Gamma")]
    pub big_gamma: NormValue,
    #[serde(rename = "G")]
    pub g: NormValue,
}

/// One check of the form lhs ≤ constant·rhs + tol. Equalities x = y are
/// encoded as |x − y| ≤ 0·max(|x|, |y|) + tol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub constant_name: String,
    pub tol: f64,
    /// Both sides are certified values rather than heuristic estimates.
    pub exact: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub matrix_id: String,
    pub field: Field,
    pub n: usize,
    pub cone_labels: Vec<ConeLabel>,
    pub norms: NormSet,
    pub checks: Vec<InequalityCheck>,
    pub warnings: Vec<String>,
    pub runtime_ms: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub opt: OptConfig,
    /// Relative slack: a check passes when lhs ≤ c·rhs + tol·max(1, c·rhs).
    pub tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { opt: OptConfig::default(), tol: TOL_REPORT }
    }
}

struct Checker {
    tol: f64,
    checks: Vec<InequalityCheck>,
}

impl Checker {
    fn le(&mut self, name: &str, lhs: NormValue, constant: f64, constant_name: &str, rhs: NormValue) {
        let bound = constant * rhs.value;
        let tol = self.tol * bound.abs().max(1.0);
        self.checks.push(InequalityCheck {
            name: name.to_string(),
            lhs: lhs.value,
            rhs: rhs.value,
            constant,
            constant_name: constant_name.to_string(),
            tol,
            exact: lhs.kind.is_exact() && rhs.kind.is_exact(),
            pass: lhs.value <= bound + tol,
        });
    }

    fn eq(&mut self, name: &str, x: NormValue, y: NormValue) {
        let scale = x.value.abs().max(y.value.abs());
        let tol = self.tol * scale.max(1.0);
        let gap = (x.value - y.value).abs();
        self.checks.push(InequalityCheck {
            name: name.to_string(),
            lhs: gap,
            rhs: scale,
            constant: 0.0,
            constant_name: "equality".to_string(),
            tol,
            exact: x.kind.is_exact() && y.kind.is_exact(),
            pass: gap <= tol,
        });
    }
}

fn value_of(est: &gram::NormEstimate) -> NormValue {
    NormValue { value: est.value, kind: est.kind }
}

/// θ: exact enumeration over ℝ for n ≤ 24, otherwise the best of the
/// rank-one optimizer and phase coordinate ascent.
pub fn theta(a: &SymMatrix, cfg: &OptConfig) -> NormValue {
    if a.field() == Field::Real && a.n() <= oracle::MAX_SIGN_N {
        let (v, _) = oracle::theta_real_exact(a).expect("size and field checked");
        return NormValue { value: v, kind: CertificateKind::ExactEnumeration };
    }
    let est = value_of(&gram::gamma_d(a, 1, cfg));
    if a.field() == Field::Complex && !est.kind.is_exact() {
        let (v, _) = oracle::theta_complex_lower(a, 8, cfg.restarts, cfg.seed);
        if v > est.value {
            return NormValue { value: v, kind: CertificateKind::HeuristicLowerBound };
        }
    }
    est
}

/// Θ: exact box enumeration over ℝ for n ≤ 12, otherwise the rank-one optimizer.
pub fn big_theta(a: &SymMatrix, cfg: &OptConfig) -> NormValue {
    if a.field() == Field::Real && a.n() <= oracle::MAX_BOX_N {
        let v = oracle::big_theta_real_exact(a).expect("size and field checked");
        return NormValue { value: v, kind: CertificateKind::ExactEnumeration };
    }
    value_of(&gram::big_gamma_d(a, 1, cfg))
}

/// All five norms of A, the symmetric Grothendieck chain and the conic
/// checks that apply to A's cone labels. Failures are reported, not raised.
pub fn verify_sgi(a: &SymMatrix, matrix_id: &str, cfg: &VerifyConfig) -> VerifyReport {
    let start = Instant::now();
    let (n, field) = (a.n(), a.field());
    let opt = &cfg.opt;
    let mut warnings = Vec::new();

    let d = gram::convex_rank(n, field);
    let gamma_est = gram::gamma_d(a, d, opt);
    let big_gamma_est = gram::big_gamma_d(a, d, opt);
    let g_est = gram::g_d_sym(a, gram::convex_rank(2 * n, field), opt);
    for (name, est) in [("gamma", &gamma_est), ("Gamma", &big_gamma_est), ("G", &g_est)] {
        if let Some(w) = &est.warning {
            warnings.push(format!("{name}: {w}"));
        }
    }
    let norms = NormSet {
        theta: theta(a, opt),
        big_theta: big_theta(a, opt),
        gamma: value_of(&gamma_est),
        big_gamma: value_of(&big_gamma_est),
        g: value_of(&g_est),
    };
    if !norms.theta.kind.is_exact() {
        warnings.push("theta is a heuristic lower bound".into());
    }
    if !norms.big_theta.kind.is_exact() {
        warnings.push("Theta is a heuristic lower bound".into());
    }

    let table = constants();
    let k = table.k_gamma_bound(field);
    let k_name = match field {
        Field::Real => "k_gamma_bound_real",
        Field::Complex => "k_gamma_bound_complex",
    };
    let suffix = |s: &str| format!("{s}_{field}");
    let one = "one";
    let mut c = Checker { tol: cfg.tol, checks: Vec::new() };
    let NormSet { theta: t, big_theta: bt, gamma: g, big_gamma: bg, g: gg } = norms;
    c.le("theta <= gamma", t, 1.0, one, g);
    c.le("Theta <= Gamma", bt, 1.0, one, bg);
    c.le("gamma <= K theta", g, k, k_name, t);
    c.le("Gamma <= K Theta", bg, k, k_name, bt);

    let labels = a.classify_cones();
    for label in &labels {
        match label {
            ConeLabel::PSD => {
                c.le("gamma <= K_psd theta", g, table.psd(field), &suffix("psd"), t);
                c.eq("gamma = Gamma", g, bg);
                c.eq("gamma = G", g, gg);
            }
            ConeLabel::WeightedLaplacian => {
                let alpha = table.alpha_gw(field);
                c.le("gamma <= theta / alpha_gw", g, 1.0 / alpha, &suffix("inv_alpha_gw"), t);
            }
            ConeLabel::DiagonallyDominant => {
                c.le("gamma <= K_sdd theta", g, table.sdd(field), &suffix("sdd"), t);
            }
            ConeLabel::Nonnegative => {
                let s = NormValue { value: a.entry_sum(), kind: CertificateKind::ExactClosedForm };
                for (name, v) in [("theta", t), ("Theta", bt), ("gamma", g), ("Gamma", bg), ("G", gg)] {
                    c.eq(&format!("{name} = entry sum"), v, s);
                }
            }
            ConeLabel::ZeroDiagonal => c.eq("gamma = Gamma", g, bg),
            ConeLabel::EqualDiagonal => {}
        }
    }

    VerifyReport {
        matrix_id: matrix_id.to_string(),
        field,
        n,
        cone_labels: labels.into_iter().collect(),
        norms,
        checks: c.checks,
        warnings,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxCutReport {
    pub n: usize,
    /// ¼‖L_A‖_θ, by enumeration when n ≤ 24.
    pub exact: Option<f64>,
    pub exact_cut: Option<Vec<bool>>,
    /// ¼‖L_A‖_γ, the semidefinite relaxation.
    pub sdp_value: f64,
    pub sdp_kind: CertificateKind,
    /// Best cut among the rounding draws.
    pub rounded_value: f64,
    pub rounded_cut: Vec<bool>,
    pub rounding_draws: usize,
}

/// Total weight of edges crossing the cut.
pub fn cut_value(a: &SymMatrix, side: &[bool]) -> f64 {
    let n = a.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            if side[i] != side[j] {
                s += a.re(i, j);
            }
        }
    }
    s
}

fn check_graph(a: &SymMatrix) -> Result<()> {
    a.expect_field(Field::Real)?;
    if (0..a.n()).any(|i| a.re(i, i).abs() > TOL_ZERO) {
        return domain("weight matrix must have a zero diagonal");
    }
    if a.entries().iter().any(|v| v.re < 0.0) {
        return domain("weights must be nonnegative");
    }
    Ok(())
}

/// Max cut of the graph weighted by A: exact for n ≤ 24, plus the relaxation
/// value and the best of `draws` Gaussian sign roundings of its optimizer.
pub fn maxcut(a: &SymMatrix, draws: usize, cfg: &OptConfig) -> Result<MaxCutReport> {
    check_graph(a)?;
    let n = a.n();
    let l = a.laplacian_of()?;
    let (exact, exact_cut) = if n <= oracle::MAX_SIGN_N {
        let (v, signs) = oracle::theta_real_exact(&l)?;
        (Some(0.25 * v), Some(signs.iter().map(|&s| s > 0.0).collect()))
    } else {
        (None, None)
    };
    let sdp = gram::gamma_d(&l, gram::convex_rank(n, Field::Real), cfg);
    let mut rng = RngStream::new(cfg.seed, 0x6d61_7863).rng();
    let mut best: Option<(f64, Vec<bool>)> = None;
    for _ in 0..draws.max(1) {
        let delta = rounding::gaussian_sign_round(&sdp.certificate, &mut rng)?;
        let side: Vec<bool> = delta.iter().map(|t| t.re > 0.0).collect();
        let v = cut_value(a, &side);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, side));
        }
    }
    let (rounded_value, rounded_cut) = best.expect("at least one draw");
    Ok(MaxCutReport {
        n,
        exact,
        exact_cut,
        sdp_value: 0.25 * sdp.value,
        sdp_kind: sdp.kind,
        rounded_value,
        rounded_cut,
        rounding_draws: draws.max(1),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutNormReport {
    /// Γ/(8K) with K the real K_Γ bound.
    pub lower: f64,
    /// 3Γ/8.
    pub upper: f64,
    /// ‖L_A‖_Γ estimate for A = [[0, B], [Bᵀ, 0]].
    pub laplacian_big_gamma: f64,
    pub laplacian_kind: CertificateKind,
    /// Exact cut norm when m + n ≤ 24.
    pub exact: Option<f64>,
    /// [θ/8, 3θ/8] with θ = ‖L_A‖_θ exact, when m + n ≤ 24.
    pub theta_bracket: Option<[f64; 2]>,
}

pub fn cutnorm_bracket(b: &RectMatrix, cfg: &OptConfig) -> Result<CutNormReport> {
    if b.field() != Field::Real {
        return Err(Error::FieldMismatch { expected: Field::Real, found: b.field() });
    }
    let size = b.rows() + b.cols();
    let l = b.embed().laplacian_of()?;
    let est = gram::big_gamma_d(&l, gram::convex_rank(size, Field::Real), cfg);
    let k = constants().k_gamma_bound_real;
    let (exact, theta_bracket) = if size <= oracle::MAX_SIGN_N {
        let theta = oracle::theta_real_exact(&l)?.0;
        (Some(oracle::cut_norm_exact(b)?), Some([theta / 8.0, 3.0 * theta / 8.0]))
    } else {
        (None, None)
    };
    Ok(CutNormReport {
        lower: est.value / (8.0 * k),
        upper: 3.0 * est.value / 8.0,
        laplacian_big_gamma: est.value,
        laplacian_kind: est.kind,
        exact,
        theta_bracket,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StretchReport {
    pub stretch: f64,
    pub spread: f64,
    /// spr/str, absent when str = 0.
    pub ratio: Option<f64>,
    /// str ≤ spr + tol and spr ≤ K·str + tol, with K the real K_γ bound.
    pub bounds_hold: bool,
}

pub fn stretch_spread(a: &SymMatrix, cfg: &OptConfig, tol: f64) -> Result<StretchReport> {
    a.expect_field(Field::Real)?;
    let stretch = oracle::stretch_exact(a)?;
    let spread = gram::spread(a, cfg);
    let k = constants().k_gamma_bound_real;
    let slack = |x: f64| tol * x.abs().max(1.0);
    let bounds_hold = stretch <= spread + slack(spread) && spread <= k * stretch + slack(k * stretch);
    let ratio = (stretch > TOL_ZERO).then(|| spread / stretch);
    Ok(StretchReport { stretch, spread, ratio, bounds_hold })
}
