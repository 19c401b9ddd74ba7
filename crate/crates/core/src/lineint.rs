//! Piecewise bilinear line-integral weights J, I, U, J̃, V on the (α, β) plane
//! in exact rational arithmetic, nested and unbounded line integrals, and the
//! damped Fourier oracle for the bi-distribution A(u, v).

use crate::clifford::FourVec;
use crate::quad::{integrate, integrate_with_breaks, PanelRule, QuadError};
use num_complex::Complex64 as C;
use num_rational::Rational64 as R;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LineIntError {
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("tail beyond the cutoff contributes {tail:e}, above tolerance {tolerance:e}")]
    TailNotNegligible { tail: f64, tolerance: f64 },
    #[error("(u={u}, v={v}) lies within the damping scale {damping} of a singular line")]
    TooCloseToSingularSet { u: f64, v: f64, damping: f64 },
}

/// Half-open interval `[lo, hi)`; `None` marks an infinite end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub lo: Option<R>,
    pub hi: Option<R>,
}

impl Interval {
    pub const ALL: Interval = Interval { lo: None, hi: None };

    pub fn new(lo: Option<i64>, hi: Option<i64>) -> Self {
        Interval {
            lo: lo.map(R::from_integer),
            hi: hi.map(R::from_integer),
        }
    }

    pub fn contains(&self, x: R) -> bool {
        self.lo.is_none_or(|l| x >= l) && self.hi.is_none_or(|h| x < h)
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo.is_none_or(|l| x >= ratio_f64(l)) && self.hi.is_none_or(|h| x < ratio_f64(h))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfPlane {
    AlphaGreater,
    BetaGreater,
}

/// c₀ + c₁α + c₂β + c₃αβ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bilinear(pub [R; 4]);

impl Bilinear {
    pub fn from_ints(c: [i64; 4]) -> Self {
        Bilinear(c.map(R::from_integer))
    }

    pub fn eval(&self, a: R, b: R) -> R {
        let c = &self.0;
        c[0] + c[1] * a + c[2] * b + c[3] * a * b
    }

    pub fn eval_f64(&self, a: f64, b: f64) -> f64 {
        let c = self.0.map(ratio_f64);
        c[0] + c[1] * a + c[2] * b + c[3] * a * b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub alpha: Interval,
    pub beta: Interval,
    pub half: Option<HalfPlane>,
    pub poly: Bilinear,
}

impl Region {
    fn new(alpha: Interval, beta: Interval, half: Option<HalfPlane>, c: [i64; 4]) -> Self {
        Region {
            alpha,
            beta,
            half,
            poly: Bilinear::from_ints(c),
        }
    }

    pub fn contains(&self, a: R, b: R) -> bool {
        self.alpha.contains(a)
            && self.beta.contains(b)
            && match self.half {
                None => true,
                Some(HalfPlane::AlphaGreater) => a > b,
                Some(HalfPlane::BetaGreater) => b > a,
            }
    }

    pub fn contains_f64(&self, a: f64, b: f64) -> bool {
        self.alpha.contains_f64(a)
            && self.beta.contains_f64(b)
            && match self.half {
                None => true,
                Some(HalfPlane::AlphaGreater) => a > b,
                Some(HalfPlane::BetaGreater) => b > a,
            }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PiecewisePoly2 {
    pub regions: Vec<Region>,
}

impl PiecewisePoly2 {
    pub fn eval_exact(&self, a: R, b: R) -> R {
        self.regions
            .iter()
            .filter(|r| r.contains(a, b))
            .fold(R::zero(), |acc, r| acc + r.poly.eval(a, b))
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        self.regions
            .iter()
            .filter(|r| r.contains_f64(a, b))
            .map(|r| r.poly.eval_f64(a, b))
            .sum()
    }
}

fn ratio_f64(x: R) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LineFn {
    J,
    I,
    U,
    Jtilde,
    V,
}

impl LineFn {
    pub const ALL: [LineFn; 5] = [LineFn::J, LineFn::I, LineFn::U, LineFn::Jtilde, LineFn::V];

    pub fn name(self) -> &'static str {
        match self {
            LineFn::J => "J",
            LineFn::I => "I",
            LineFn::U => "U",
            LineFn::Jtilde => "Jtilde",
            LineFn::V => "V",
        }
    }

    pub fn from_name(s: &str) -> Option<LineFn> {
        LineFn::ALL.into_iter().find(|f| f.name() == s)
    }
}

const NEG: Interval = Interval {
    lo: None,
    hi: Some(R::new_raw(0, 1)),
};

fn unit() -> Interval {
    Interval::new(Some(0), Some(1))
}
fn from_one() -> Interval {
    Interval::new(Some(1), None)
}
fn pos() -> Interval {
    Interval::new(Some(0), None)
}

use HalfPlane::{AlphaGreater as AG, BetaGreater as BG};

pub fn j_function() -> PiecewisePoly2 {
    PiecewisePoly2 {
        regions: vec![
            Region::new(from_one(), unit(), None, [0, 1, 3, -4]),
            Region::new(NEG, unit(), None, [0, -3, -1, 4]),
            Region::new(from_one(), from_one(), Some(AG), [0, 4, 4, -8]),
            Region::new(NEG, NEG, Some(BG), [0, -4, -4, 8]),
        ],
    }
}

pub fn i_function() -> PiecewisePoly2 {
    PiecewisePoly2 {
        regions: vec![
            Region::new(from_one(), unit(), None, [-1, 1, 1, 0]),
            Region::new(NEG, unit(), None, [1, -1, -1, 0]),
        ],
    }
}

pub fn u_function() -> PiecewisePoly2 {
    let plus = [0, 2, 2, -4];
    let minus = [0, -2, -2, 4];
    PiecewisePoly2 {
        regions: vec![
            Region::new(pos(), pos(), Some(AG), plus),
            Region::new(pos(), pos(), Some(BG), minus),
            Region::new(NEG, NEG, Some(AG), plus),
            Region::new(NEG, NEG, Some(BG), minus),
        ],
    }
}

pub fn jtilde_function() -> PiecewisePoly2 {
    // (4αβ − 2α − 2β)·ε(β − α) on both quadrants, minus the unit square.
    let plus = [0, -2, -2, 4];
    let minus = [0, 2, 2, -4];
    PiecewisePoly2 {
        regions: vec![
            Region::new(unit(), unit(), None, [0, 1, -1, 0]),
            Region::new(from_one(), pos(), Some(BG), plus),
            Region::new(from_one(), pos(), Some(AG), minus),
            Region::new(unit(), from_one(), None, plus),
            Region::new(NEG, NEG, Some(BG), plus),
            Region::new(NEG, NEG, Some(AG), minus),
        ],
    }
}

pub fn v_function() -> PiecewisePoly2 {
    PiecewisePoly2 {
        regions: vec![
            Region::new(Interval::ALL, Interval::ALL, Some(AG), [0, -1, -3, 4]),
            Region::new(Interval::ALL, Interval::ALL, Some(BG), [0, 3, 1, -4]),
        ],
    }
}

pub fn piecewise(f: LineFn) -> PiecewisePoly2 {
    match f {
        LineFn::J => j_function(),
        LineFn::I => i_function(),
        LineFn::U => u_function(),
        LineFn::Jtilde => jtilde_function(),
        LineFn::V => v_function(),
    }
}

pub fn eval_piecewise(f: LineFn, alpha: f64, beta: f64) -> f64 {
    piecewise(f).eval(alpha, beta)
}

pub fn eval_piecewise_exact(f: LineFn, alpha: R, beta: R) -> R {
    piecewise(f).eval_exact(alpha, beta)
}

/// J̃ together with the three polynomial subtractions P₁, P₂, P₃ that turn J
/// into J̃ (each polynomial in one of the variables on its strip).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JtildeDerivation {
    pub jtilde: PiecewisePoly2,
    pub subtractions: [PiecewisePoly2; 3],
}

pub fn jtilde_from_j() -> JtildeDerivation {
    let strip = |alpha: Interval, beta: Interval, c: [i64; 4]| PiecewisePoly2 {
        regions: vec![Region::new(alpha, beta, None, c)],
    };
    JtildeDerivation {
        jtilde: jtilde_function(),
        subtractions: [
            strip(Interval::ALL, unit(), [0, -3, -1, 4]),
            strip(NEG, Interval::ALL, [0, -2, -2, 4]),
            strip(Interval::ALL, pos(), [0, 2, 2, -4]),
        ],
    }
}

/// J − P₁ − P₂ − P₃ − J̃ at one point.
pub fn jtilde_residual(alpha: R, beta: R) -> R {
    let d = jtilde_from_j();
    let subtracted = d
        .subtractions
        .iter()
        .fold(R::zero(), |acc, p| acc + p.eval_exact(alpha, beta));
    j_function().eval_exact(alpha, beta) - subtracted - d.jtilde.eval_exact(alpha, beta)
}

/// max |J̃ − U − V·χ₍₀,₁₎(α)χ₍₀,₁₎(β)| over the samples.
pub fn compact_identity_residual(samples: &[(R, R)]) -> R {
    let (jt, u, v) = (jtilde_function(), u_function(), v_function());
    let sq = unit();
    samples
        .iter()
        .map(|&(a, b)| {
            let vv = if sq.contains(a) && sq.contains(b) {
                v.eval_exact(a, b)
            } else {
                R::zero()
            };
            (jt.eval_exact(a, b) - u.eval_exact(a, b) - vv).abs()
        })
        .fold(R::zero(), |acc, x| if x > acc { x } else { acc })
}

/// CSV rows `alpha,beta,fn,value` on the square grid `[lo, hi]²`.
pub fn lineint_table(f: LineFn, lo: f64, hi: f64, step: f64) -> String {
    let mut out = String::from("alpha,beta,fn,value\n");
    if step <= 0.0 || hi < lo {
        return out;
    }
    let pw = piecewise(f);
    let n = ((hi - lo) / step + 1e-9).floor() as i64;
    for i in 0..=n {
        let a = lo + i as f64 * step;
        for j in 0..=n {
            let b = lo + j as f64 * step;
            // `+ 0.0` prints −0 as 0.
            let _ = writeln!(out, "{a:.6},{b:.6},{},{:.12e}", f.name(), pw.eval(a, b) + 0.0);
        }
    }
    out
}

/// ∫₀¹∫₀¹ f(α,β) dα dβ with the square split along the diagonal.
pub fn unit_square_integral(f: &dyn Fn(f64, f64) -> f64, tol: f64) -> Result<f64, LineIntError> {
    let lower = integrate(
        |a: f64| integrate(|b: f64| f(a, b), 0.0, a, tol, tol).unwrap_or(f64::NAN),
        0.0,
        1.0,
        tol,
        tol,
    )?;
    let upper = integrate(
        |a: f64| integrate(|b: f64| f(a, b), a, 1.0, tol, tol).unwrap_or(f64::NAN),
        0.0,
        1.0,
        tol,
        tol,
    )?;
    if !(lower + upper).is_finite() {
        return Err(QuadError::NotConverged {
            estimate: f64::INFINITY,
            tolerance: tol,
        }
        .into());
    }
    Ok(lower + upper)
}

/// Weight τ^p (1−τ)^q (τ−τ²)^r of a line integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineWeight {
    pub p: u32,
    pub q: u32,
    pub r: u32,
}

impl LineWeight {
    pub const fn new(p: u32, q: u32, r: u32) -> Self {
        LineWeight { p, q, r }
    }

    pub fn at(&self, tau: f64) -> f64 {
        tau.powi(self.p as i32) * (1.0 - tau).powi(self.q as i32) * (tau - tau * tau).powi(self.r as i32)
    }
}

fn segment(x: &FourVec, y: &FourVec, tau: f64) -> FourVec {
    std::array::from_fn(|i| tau * y[i] + (1.0 - tau) * x[i])
}

pub type FieldSampler<'a> = &'a dyn Fn(&FourVec) -> C;

/// ∫₀¹dτ w₁(τ) ∫₀¹dτ̃ w₂(τ̃) F(z) G(z̃), z = τy + (1−τ)x, z̃ = τ̃y + (1−τ̃)z.
pub fn nested_line_integral(
    f: FieldSampler,
    g: FieldSampler,
    x: &FourVec,
    y: &FourVec,
    w1: LineWeight,
    w2: LineWeight,
    tol: f64,
) -> Result<C, LineIntError> {
    let mut failure = None;
    let v = integrate(
        |tau: f64| {
            let z = segment(x, y, tau);
            let inner = integrate(
                |tt: f64| {
                    let zt = segment(&z, y, tt);
                    g(&zt) * w2.at(tt)
                },
                0.0,
                1.0,
                tol,
                tol,
            );
            match inner {
                Ok(v) => f(&z) * v * w1.at(tau),
                Err(e) => {
                    failure = Some(e);
                    C::zero()
                }
            }
        },
        0.0,
        1.0,
        tol,
        tol,
    )?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(v),
    }
}

/// Both sides of the change of variables α = τ, β = τ + τ̃(1−τ):
/// lhs = −2i [0,2|0]⊗[1,0|0] − 8i [0,1|1]⊗[0,1|0] as nested line integrals,
/// rhs = −2i ∫₀¹dα ∫_α¹dβ (3α+β−4αβ) F(αy+(1−α)x) G(βy+(1−β)x).
pub fn change_of_variables_check(
    f: FieldSampler,
    g: FieldSampler,
    x: &FourVec,
    y: &FourVec,
    tol: f64,
) -> Result<(C, C), LineIntError> {
    let i = C::new(0.0, 1.0);
    let a = nested_line_integral(f, g, x, y, LineWeight::new(0, 2, 0), LineWeight::new(1, 0, 0), tol)?;
    let b = nested_line_integral(f, g, x, y, LineWeight::new(0, 1, 1), LineWeight::new(0, 1, 0), tol)?;
    let lhs = -i * 2.0 * a - i * 8.0 * b;
    let mut failure = None;
    let rhs = integrate(
        |al: f64| {
            let fa = f(&segment(x, y, al));
            let inner = integrate(
                |be: f64| g(&segment(x, y, be)) * (3.0 * al + be - 4.0 * al * be),
                al,
                1.0,
                tol,
                tol,
            );
            match inner {
                Ok(v) => fa * v,
                Err(e) => {
                    failure = Some(e);
                    C::zero()
                }
            }
        },
        0.0,
        1.0,
        tol,
        tol,
    )?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok((lhs, -i * 2.0 * rhs))
}

pub type CurrentSampler<'a> = &'a dyn Fn(&FourVec) -> FourVec;

/// ∫ α² ε(α) ξ_k j^k(x⁰+α, x⃗+α·dir) dα with ξ = (1, dir), truncated at
/// |α| = cutoff; the shell cutoff < |α| < 2·cutoff serves as tail estimate.
pub fn unbounded_line_integral(
    j: CurrentSampler,
    x: &FourVec,
    dir: [f64; 3],
    cutoff: f64,
    tol: f64,
) -> Result<f64, LineIntError> {
    let integrand = |a: f64| -> f64 {
        let z = [x[0] + a, x[1] + a * dir[0], x[2] + a * dir[1], x[3] + a * dir[2]];
        let jz = j(&z);
        let xi_j = jz[0] - (dir[0] * jz[1] + dir[1] * jz[2] + dir[2] * jz[3]);
        a * a * a.signum() * xi_j
    };
    let core = integrate_with_breaks(integrand, -cutoff, cutoff, &[0.0], tol, tol)?;
    let tail = integrate(integrand, cutoff, 2.0 * cutoff, tol, tol)?.abs()
        + integrate(integrand, -2.0 * cutoff, -cutoff, tol, tol)?.abs();
    let allowed = tol.max(tol * core.abs()) * 10.0;
    if tail > allowed {
        return Err(LineIntError::TailNotNegligible {
            tail,
            tolerance: allowed,
        });
    }
    Ok(core)
}

/// ∫₀^∞ α^n e^{−zα} dα = n!/z^{n+1} for Re z > 0.
fn laplace_moment(n: u32, z: C) -> C {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    C::new(fact, 0.0) / z.powu(n + 1)
}

/// Closed forms of the damped moments ∫ α^n s(α) e^{−iαu − d|α|} dα with
/// s(α) = 1 (`signed = false`) or ε(α) (`signed = true`).
pub fn damped_moment_closed(n: u32, signed: bool, u: f64, damping: f64) -> C {
    let i = C::new(0.0, 1.0);
    let right = laplace_moment(n, C::new(damping, 0.0) + i * u);
    let left = laplace_moment(n, C::new(damping, 0.0) - i * u) * if n % 2 == 0 { 1.0 } else { -1.0 };
    if signed {
        right - left
    } else {
        right + left
    }
}

/// The same moments by composite Gauss–Legendre quadrature over [0, 40/d],
/// accepted when doubling the panel count changes the value by < 1e−10.
pub fn damped_moment_quadrature(n: u32, signed: bool, u: f64, damping: f64) -> Result<C, LineIntError> {
    let i = C::new(0.0, 1.0);
    let reach = 40.0 / damping;
    let sgn = if signed { -1.0 } else { 1.0 };
    let neg = if n % 2 == 0 { 1.0 } else { -1.0 };
    let f = |a: f64| -> C {
        let m = a.powi(n as i32) * (-damping * a).exp();
        ((-i * a * u).exp() + (i * a * u).exp() * (sgn * neg)) * m
    };
    let width = (1.0 / u.abs().max(1e-3)).min(1.0).min(1.0 / damping);
    let panels = (reach / width).ceil() as usize;
    let coarse = PanelRule::new(0.0, reach, panels, 10).integrate(f);
    let fine = PanelRule::new(0.0, reach, 2 * panels, 10).integrate(f);
    let scale = fine.norm().max(1.0);
    let diff = (fine - coarse).norm();
    if diff > 1e-10 * scale {
        return Err(QuadError::NotConverged {
            estimate: diff,
            tolerance: 1e-10 * scale,
        }
        .into());
    }
    Ok(fine)
}

/// ∫ε(α)e^{−iαu − d|α|}dα = −2iu/(u²+d²).
pub fn damped_sign_transform(u: f64, damping: f64) -> C {
    C::new(0.0, -2.0 * u / (u * u + damping * damping))
}

/// Damped A(u,v) = ∫∫U(α,β)e^{−iαu−iβv}(damping) assembled from the
/// building blocks via 2Θ(αβ)ε(α−β) = −ε(α) + ε(β) + 2ε(α−β), where the
/// ε(α−β) term is damped in the variables a = (α+β)/2, b = (α−β)/2. Each block
/// is evaluated by quadrature.
pub fn bidist_a_oracle(u: f64, v: f64, damping: f64) -> Result<C, LineIntError> {
    let d = damping;
    if u.abs() <= d || v.abs() <= d || (u + v).abs() <= d || (u - v).abs() <= d {
        return Err(LineIntError::TooCloseToSingularSet { u, v, damping });
    }
    let i = C::new(0.0, 1.0);
    // Moments of (−iα)^n: derivatives with respect to the frequency.
    let deriv = |n: u32, signed: bool, w: f64| -> Result<C, LineIntError> {
        Ok(damped_moment_quadrature(n, signed, w, d)? * (-i).powu(n))
    };
    let e = |n, w| deriv(n, true, w);
    let o = |n, w| deriv(n, false, w);
    // T(u,v) = ½[−E(u)D(v) + D(u)E(v) + 4 D(u+v) E(u−v)] and its derivatives.
    let (eu0, eu1) = (e(0, u)?, e(1, u)?);
    let (ev0, ev1) = (e(0, v)?, e(1, v)?);
    let (du0, du1) = (o(0, u)?, o(1, u)?);
    let (dv0, dv1) = (o(0, v)?, o(1, v)?);
    let (ds0, ds1, ds2) = (o(0, u + v)?, o(1, u + v)?, o(2, u + v)?);
    let (em0, em1, em2) = (e(0, u - v)?, e(1, u - v)?, e(2, u - v)?);
    let t_u = (-eu1 * dv0 + du1 * ev0 + (ds1 * em0 + ds0 * em1) * 4.0) * 0.5;
    let t_v = (-eu0 * dv1 + du0 * ev1 + (ds1 * em0 - ds0 * em1) * 4.0) * 0.5;
    let t_uv = (-eu1 * dv1 + du1 * ev1 + (ds2 * em0 - ds0 * em2) * 4.0) * 0.5;
    Ok((i * t_u + i * t_v + t_uv * 2.0) * 2.0)
}

/// Extrapolates samples `values[i] = f(dampings[i])` to zero damping by the
/// interpolating polynomial (Neville's scheme).
pub fn extrapolate_to_zero(dampings: &[f64], values: &[C]) -> C {
    let mut p = values.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (dampings[i], dampings[i + m]);
            p[i] = (p[i + 1] * xi - p[i] * xj) / (xi - xj);
        }
    }
    p[0]
}

/// Gaussian test function φ(u,v) = exp(−((u−u₀)²+(v−v₀)²)/(2s²)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTest {
    pub u0: f64,
    pub v0: f64,
    pub s: f64,
}

/// ⟨A, φ⟩ computed directly as ∫∫U(α,β) φ̃(α,β) dα dβ, with φ̃ the Fourier
/// transform of φ, by nested quadrature over the four triangles where U is
/// polynomial.
pub fn bidist_a_pairing_direct(phi: GaussianTest, tol: f64) -> Result<C, LineIntError> {
    let GaussianTest { u0, v0, s } = phi;
    let i = C::new(0.0, 1.0);
    let ft = move |a: f64, b: f64| -> C {
        (-i * (a * u0 + b * v0)).exp() * (2.0 * PI * s * s * (-(s * s) * (a * a + b * b) / 2.0).exp())
    };
    let reach = 12.0 / s;
    let u_fn = u_function();
    let mut total = C::zero();
    for (lo, hi) in [(0.0, reach), (-reach, 0.0)] {
        // β below and above the diagonal within the quadrant.
        for below in [true, false] {
            let mut failure = None;
            let v = integrate(
                |a: f64| {
                    let (b_lo, b_hi) = if below { (lo, a) } else { (a, hi) };
                    match integrate(|b: f64| ft(a, b) * u_fn.eval(a, b), b_lo, b_hi, tol, tol) {
                        Ok(v) => v,
                        Err(e) => {
                            failure = Some(e);
                            C::zero()
                        }
                    }
                },
                lo,
                hi,
                tol,
                tol,
            )?;
            if let Some(e) = failure {
                return Err(e.into());
            }
            total += v;
        }
    }
    Ok(total)
}

/// ⟨A, φ⟩ from the closed distributional form
/// A = −4πi (i∂_u + i∂_v + 2∂_u∂_v)(−PP/u δ(v) + δ(u) PP/v + 4 δ(u+v) PP/(u−v)),
/// with the principal values taken by symmetric quadrature.
pub fn bidist_a_pairing_closed(phi: GaussianTest, tol: f64) -> Result<C, LineIntError> {
    let GaussianTest { u0, v0, s } = phi;
    let i = C::new(0.0, 1.0);
    let s2 = s * s;
    // ψ = (−i∂_u − i∂_v + 2∂_u∂_v)φ, the transpose of the operator acting on φ.
    let psi = move |u: f64, v: f64| -> C {
        let p = (-((u - u0).powi(2) + (v - v0).powi(2)) / (2.0 * s2)).exp();
        let pu = -(u - u0) / s2 * p;
        let pv = -(v - v0) / s2 * p;
        let puv = (u - u0) * (v - v0) / (s2 * s2) * p;
        -i * pu - i * pv + C::new(2.0 * puv, 0.0)
    };
    let reach = u0.abs().max(v0.abs()) + 14.0 * s;
    let pv = |g: &dyn Fn(f64) -> C| integrate(|t: f64| (g(t) - g(-t)) / t, 0.0, reach, tol, tol);
    let t1 = pv(&|u| psi(u, 0.0))?;
    let t2 = pv(&|v| psi(0.0, v))?;
    let t3 = pv(&|u| psi(u, -u) * 0.5)?;
    Ok(-i * (4.0 * PI) * (-t1 + t2 + t3 * 4.0))
}
