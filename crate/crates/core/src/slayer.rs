//! Bosonic and fermionic symplectic forms and surface-layer inner products on
//! box mode sets, the conservation residual of the fermionic current, and the
//! support, time-average and positivity checks.

use crate::clifford::{mink_real, spinor_norm, Chirality, Clifford, FourVec, Sign, SpinMat, Spinor, ETA};
use crate::fields::{wave_at, BoxSetting, DiracMode, FermionicJet, MaxwellField, MaxwellMode, SHELL_TOL};
use crate::kernels::{classify, eval_hat, ConeRegion, KernelId};
use crate::lineint::{unbounded_line_integral, CurrentSampler, LineIntError};
use crate::quad::{gauss_legendre, integrate, integrate_with_breaks, QuadError};
use num_complex::Complex64 as C;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// Time steps (in units of `1/m`) of the conservation drift.
pub const DRIFT_STEPS: [f64; 3] = [0.1, 1.0, 10.0];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SlayerError {
    #[error("Maxwell field is off shell: {0}")]
    OffShellField(String),
    #[error("Maxwell mode with zero spatial momentum")]
    ZeroMomentumMode,
    #[error("jet is not a sea excitation (psi on the lower, delta_psi on the upper shell)")]
    ShellViolation,
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    LineIntegral(#[from] LineIntError),
}

/// Free real prefactors `c₁…c₄` and the regularization scales `δ`, `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub delta: f64,
    pub eps: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
            delta: 1.0,
            eps: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Symplectic,
    Inner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Bose,
    Fermi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceLayerResult {
    pub value: f64,
    pub kind: Kind,
    pub channel: Channel,
    /// Largest change under the time translations [`DRIFT_STEPS`], relative to
    /// the sum of the absolute values of the contributions to `value`.
    pub conserved_drift: f64,
    pub normalization: Constants,
}

/// `max_Δt |f(Δt) − f(0)| / max(|f(0)|, floor)`.
pub fn relative_drift(f: impl Fn(f64) -> f64, steps: &[f64], floor: f64) -> f64 {
    let base = f(0.0);
    let scale = base.abs().max(floor);
    steps.iter().map(|&dt| (f(dt) - base).abs() / scale).fold(0.0, f64::max)
}

// Bosonic channel.

fn check_maxwell(field: &MaxwellField) -> Result<(), SlayerError> {
    for m in &field.modes {
        if m.n == [0, 0, 0] {
            return Err(SlayerError::ZeroMomentumMode);
        }
        let scale: f64 = m.p.iter().map(|x| x * x).sum();
        if mink_real(&m.p, &m.p).abs() > SHELL_TOL * scale {
            return Err(SlayerError::OffShellField(format!("p² ≠ 0 for lattice point {:?}", m.n)));
        }
        let pe: C = (0..4).map(|mu| m.eps[mu] * (ETA[mu] * m.p[mu])).sum();
        let en: f64 = m.eps.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        if pe.norm() > SHELL_TOL * scale.sqrt() * en {
            return Err(SlayerError::OffShellField(format!("⟨p,ε⟩ ≠ 0 for lattice point {:?}", m.n)));
        }
    }
    Ok(())
}

fn neg(n: [i64; 3]) -> [i64; 3] {
    [-n[0], -n[1], -n[2]]
}

/// Momentum-conserving spectrum pairs `(a, b)` with `p⃗_a + p⃗_b = 0`, each with
/// `Σ_i (ε_a^i F̂_{b,i0} − ε_b^i F̂_{a,i0}) e^{−i(p⁰_a + p⁰_b)t₀}`.
fn bose_pairs(u: &MaxwellField, v: &MaxwellField, t0: f64) -> Vec<(MaxwellMode, MaxwellMode, C)> {
    let mut out = Vec::new();
    for a in u.spectrum() {
        let fa = a.field_tensor_hat();
        for b in v.spectrum() {
            if b.n != neg(a.n) {
                continue;
            }
            let fb = b.field_tensor_hat();
            let mut term = ZERO;
            for i in 1..4 {
                term += a.eps[i] * fb[i][0] - b.eps[i] * fa[i][0];
            }
            out.push((a, b, term * C::from_polar(1.0, -(a.p[0] + b.p[0]) * t0)));
        }
    }
    out
}

/// `Σ |ε_a^i F̂_{b,i0}| + |ε_b^i F̂_{a,i0}|` over the pairs of [`bose_pairs`].
fn bose_pair_sizes(u: &MaxwellField, v: &MaxwellField) -> f64 {
    let mut out = 0.0;
    for a in u.spectrum() {
        let fa = a.field_tensor_hat();
        for b in v.spectrum().into_iter().filter(|b| b.n == neg(a.n)) {
            let fb = b.field_tensor_hat();
            out += (1..4).map(|i| (a.eps[i] * fb[i][0]).norm() + (b.eps[i] * fa[i][0]).norm()).sum::<f64>();
        }
    }
    out
}

/// `(c₁/δ⁴) ∫_box (Aᵘ_i Fᵛ^{i0} − Aᵛ_i Fᵘ^{i0}) d³x` at time `t₀`.
pub fn sigma_bose(
    setting: &BoxSetting,
    u: &MaxwellField,
    v: &MaxwellField,
    t0: f64,
    k: &Constants,
) -> Result<f64, SlayerError> {
    sigma_bose_parts(setting, u, v, t0, k).map(|r| r.0)
}

/// Value and the sum of the absolute values of its contributions.
fn sigma_bose_parts(
    setting: &BoxSetting,
    u: &MaxwellField,
    v: &MaxwellField,
    t0: f64,
    k: &Constants,
) -> Result<(f64, f64), SlayerError> {
    check_maxwell(u)?;
    check_maxwell(v)?;
    let sum: C = bose_pairs(u, v, t0).iter().map(|p| p.2).sum();
    let abs = bose_pair_sizes(u, v);
    let pre = k.c1 / k.delta.powi(4) * setting.volume();
    Ok((pre * sum.re, pre.abs() * abs))
}

/// Positive-frequency field strength per lattice point.
fn positive_frequency_tensors(field: &MaxwellField) -> BTreeMap<[i64; 3], [[C; 4]; 4]> {
    let mut map: BTreeMap<[i64; 3], [[C; 4]; 4]> = BTreeMap::new();
    for m in &field.modes {
        let m = if m.p[0] > 0.0 { *m } else { m.conjugate() };
        let f = m.field_tensor_hat();
        let e = map.entry(m.n).or_insert([[ZERO; 4]; 4]);
        for i in 0..4 {
            for j in 0..4 {
                e[i][j] += f[i][j];
            }
        }
    }
    map
}

/// `−(F_{0i} H_0^i − ¼ F_{ij} H^{ij})`, spacetime indices.
fn maxwell_contraction(f: &[[C; 4]; 4], h: &[[C; 4]; 4]) -> C {
    let mut electric = ZERO;
    for i in 1..4 {
        electric += f[0][i] * h[0][i] * ETA[i];
    }
    let mut full = ZERO;
    for i in 0..4 {
        for j in 0..4 {
            full += f[i][j] * h[i][j] * ETA[i] * ETA[j];
        }
    }
    -(electric - full * 0.25)
}

/// Symmetric bilinear inner product
/// `(c₂/δ⁴) L³ Σ_{p⃗} (1/|p⃗|) 2Re G(F̂ᵘ₊(p⃗), conj F̂ᵛ₊(p⃗))` over positive
/// frequencies, `G` the negated contraction.
pub fn ip_bose(setting: &BoxSetting, u: &MaxwellField, v: &MaxwellField, k: &Constants) -> Result<f64, SlayerError> {
    ip_bose_parts(setting, u, v, k).map(|r| r.0)
}

fn ip_bose_parts(setting: &BoxSetting, u: &MaxwellField, v: &MaxwellField, k: &Constants) -> Result<(f64, f64), SlayerError> {
    check_maxwell(u)?;
    check_maxwell(v)?;
    let fu = positive_frequency_tensors(u);
    let fv = positive_frequency_tensors(v);
    let (mut sum, mut abs) = (0.0, 0.0);
    for (n, a) in &fu {
        let Some(b) = fv.get(n) else { continue };
        let bc = b.map(|row| row.map(|z| z.conj()));
        let kk = setting.momentum(*n);
        let kn = (kk[0] * kk[0] + kk[1] * kk[1] + kk[2] * kk[2]).sqrt();
        let g = maxwell_contraction(a, &bc);
        let size: f64 = a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| x.norm() * y.norm()).sum();
        sum += 2.0 * g.re / kn;
        abs += 2.0 * size / kn;
    }
    let pre = k.c2 / k.delta.powi(4) * setting.volume();
    Ok((pre * sum, pre.abs() * abs))
}

/// `κ(R, P) = ∫₀¹∫₀¹ dα dβ / ((α−β)²P² + R⁻²)`, growing like `πR/P`.
pub fn log_channel_weight(r: f64, p: f64) -> f64 {
    let rp = r * p;
    2.0 * ((r / p) * rp.atan() - (rp * rp).ln_1p() / (2.0 * p * p))
}

/// The logarithmic `ε/t` channel at infrared scale `r`: every momentum-
/// conserving pair of the symplectic form weighted by `κ(r, |p⃗|)`.
pub fn eps_t_log_channel(
    setting: &BoxSetting,
    u: &MaxwellField,
    v: &MaxwellField,
    t0: f64,
    r: f64,
    k: &Constants,
) -> Result<f64, SlayerError> {
    check_maxwell(u)?;
    check_maxwell(v)?;
    let mut sum = ZERO;
    for (a, _, term) in bose_pairs(u, v, t0) {
        let p = (a.p[1] * a.p[1] + a.p[2] * a.p[2] + a.p[3] * a.p[3]).sqrt();
        sum += term * log_channel_weight(r, p);
    }
    Ok(k.c1 / (k.delta.powi(4) * k.eps) * setting.volume() * sum.re)
}

/// `ε(q⁰) G_η(q²)/(|q⁰| + η)`: a mollified cone-supported kernel.
fn mollified_k0(q: &FourVec, eta: f64) -> f64 {
    let q2 = mink_real(q, q);
    let g = (-(q2 / eta).powi(2)).exp() / (eta * PI.sqrt());
    q[0].signum() * g / (q[0].abs() + eta)
}

/// `∫₀¹∫₀¹ w(α,β) K̂_η(−αp_a − βp_b) dα dβ` on a symmetric Gauss–Legendre grid.
pub fn pair_moment(pa: &FourVec, pb: &FourVec, eta: f64, w: &dyn Fn(f64, f64) -> f64) -> f64 {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let (x, wt) = GL.get_or_init(|| gauss_legendre(48));
    let mut s = 0.0;
    for (xa, wa) in x.iter().zip(wt) {
        let a = 0.5 * (xa + 1.0);
        for (xb, wb) in x.iter().zip(wt) {
            let b = 0.5 * (xb + 1.0);
            let q = std::array::from_fn(|mu| -a * pa[mu] - b * pb[mu]);
            s += 0.25 * wa * wb * w(a, b) * mollified_k0(&q, eta);
        }
    }
    s
}

/// The non-logarithmic `ε/t` channel: time-independent pairs (opposite
/// frequencies, `p_b = −p_a`) weighted by `∫∫(α+β−1)K̂_η(−αp_a − βp_b)`.
pub fn eps_t_nolog_channel(
    setting: &BoxSetting,
    u: &MaxwellField,
    v: &MaxwellField,
    eta: f64,
    k: &Constants,
) -> Result<f64, SlayerError> {
    check_maxwell(u)?;
    check_maxwell(v)?;
    let mut sum = ZERO;
    for (a, b, term) in bose_pairs(u, v, 0.0) {
        if a.p[0].signum() == b.p[0].signum() {
            continue;
        }
        sum += term * pair_moment(&a.p, &b.p, eta, &|x, y| x + y - 1.0);
    }
    Ok(k.c1 / (k.delta.powi(4) * k.eps) * setting.volume() * sum.re)
}

// Fermionic channel.

/// `(χ_L, χ_R, γ¹χ_L, γ²χ_L, γ³χ_L, γ¹χ_R, γ²χ_R, γ³χ_R)`
fn chiral_insertions(cl: &Clifford) -> [SpinMat; 8] {
    let chi = [cl.chi(Chirality::L), cl.chi(Chirality::R)];
    std::array::from_fn(|i| match i {
        0 | 1 => chi[i],
        _ => {
            let c = (i - 2) / 3;
            let al = (i - 2) % 3 + 1;
            *cl.gamma(al) * chi[c]
        }
    })
}

fn gamma_chi(c: usize, al: usize) -> usize {
    2 + 3 * c + (al - 1)
}

fn inner_all(cl: &Clifford, mats: &[SpinMat; 8], a: &Spinor, b: &Spinor) -> [C; 8] {
    std::array::from_fn(|i| cl.spin_inner(a, &mats[i].apply(b)))
}

fn add8(acc: &mut [C; 8], x: &[C; 8]) {
    for i in 0..8 {
        acc[i] += x[i];
    }
}

/// Symplectic form of two sea-excitation jets:
/// `(c₃/δ⁴) L⁶ Σ_{k⃗,q⃗} (ω(q⃗)² + ω(k⃗)²)/m² Σ_c Im(⟨δψᵘ(k⃗)|χ_c ψᵘ(−q⃗)⟩⟨ψᵛ(−k⃗)|χ_c̄ δψᵛ(q⃗)⟩
///  − ⟨δψᵘ(k⃗)|γ^α χ_c ψᵘ(−q⃗)⟩⟨ψᵛ(−k⃗)|γ_α χ_c δψᵛ(q⃗)⟩)`,
/// each spinor product summed over jet components.
pub fn sigma_fermi(setting: &BoxSetting, u: &FermionicJet, v: &FermionicJet, k: &Constants) -> Result<f64, SlayerError> {
    sigma_fermi_parts(setting, u, v, k).map(|r| r.0)
}

fn sigma_fermi_parts(setting: &BoxSetting, u: &FermionicJet, v: &FermionicJet, k: &Constants) -> Result<(f64, f64), SlayerError> {
    if !u.is_sea_excitation() || !v.is_sea_excitation() {
        return Err(SlayerError::ShellViolation);
    }
    let cl = Clifford::standard();
    let mats = chiral_insertions(cl);
    let mut au: BTreeMap<([i64; 3], [i64; 3]), [C; 8]> = BTreeMap::new();
    for comp in &u.components {
        for d in &comp.delta_psi {
            for p in &comp.psi {
                add8(au.entry((d.n, neg(p.n))).or_insert([ZERO; 8]), &inner_all(cl, &mats, &d.amp, &p.amp));
            }
        }
    }
    let mut bv: BTreeMap<([i64; 3], [i64; 3]), [C; 8]> = BTreeMap::new();
    for comp in &v.components {
        for p in &comp.psi {
            for d in &comp.delta_psi {
                add8(bv.entry((neg(p.n), d.n)).or_insert([ZERO; 8]), &inner_all(cl, &mats, &p.amp, &d.amp));
            }
        }
    }
    let m2 = setting.mass * setting.mass;
    let (mut sum, mut abs) = (0.0, 0.0);
    for (key, a) in &au {
        let Some(b) = bv.get(key) else { continue };
        let (kn, qn) = *key;
        let weight = (setting.omega(qn).powi(2) + setting.omega(kn).powi(2)) / m2;
        let mut term = (a[0] * b[1]).im + (a[1] * b[0]).im;
        let mut size = (a[0] * b[1]).norm() + (a[1] * b[0]).norm();
        for c in 0..2 {
            for al in 1..4 {
                let i = gamma_chi(c, al);
                // γ_α = −γ^α
                term += (a[i] * b[i]).im;
                size += (a[i] * b[i]).norm();
            }
        }
        sum += weight * term;
        abs += weight * size;
    }
    let pre = k.c3 / k.delta.powi(4) * setting.volume().powi(2);
    Ok((pre * sum, pre.abs() * abs))
}

/// `{k⃗·q⃗ (ω(q⃗)+ω(k⃗)) + |q⃗|²ω(q⃗) + |k⃗|²ω(k⃗)}`
pub fn definiteness_bracket(k: [f64; 3], q: [f64; 3], m: f64) -> f64 {
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let wk = (dot(k, k) + m * m).sqrt();
    let wq = (dot(q, q) + m * m).sqrt();
    dot(k, q) * (wq + wk) + dot(q, q) * wq + dot(k, k) * wk
}

/// Inner product of two sea-excitation jets:
/// `∓(c₄/δ⁴) L⁶ Σ_{k⃗,q⃗} Re(⟨δψᵘ(k⃗)|δψᵛ(k⃗)⟩⟨ψᵛ(q⃗)|ψᵘ(q⃗)⟩) {…}/m³`,
/// with the upper sign for `chirality_sign = Plus`.
pub fn ip_fermi(
    setting: &BoxSetting,
    u: &FermionicJet,
    v: &FermionicJet,
    chirality_sign: Sign,
    k: &Constants,
) -> Result<f64, SlayerError> {
    ip_fermi_parts(setting, u, v, chirality_sign, k).map(|r| r.0)
}

fn ip_fermi_parts(
    setting: &BoxSetting,
    u: &FermionicJet,
    v: &FermionicJet,
    chirality_sign: Sign,
    k: &Constants,
) -> Result<(f64, f64), SlayerError> {
    if !u.is_sea_excitation() || !v.is_sea_excitation() {
        return Err(SlayerError::ShellViolation);
    }
    let cl = Clifford::standard();
    let (nu, nv) = (u.components.len(), v.components.len());
    // Gram blocks per lattice point: upper[k][cu][cv], lower[q][cv][cu].
    let mut upper: BTreeMap<[i64; 3], Vec<C>> = BTreeMap::new();
    let mut lower: BTreeMap<[i64; 3], Vec<C>> = BTreeMap::new();
    for (iu, cu) in u.components.iter().enumerate() {
        for (iv, cv) in v.components.iter().enumerate() {
            for du in &cu.delta_psi {
                for dv in cv.delta_psi.iter().filter(|d| d.n == du.n) {
                    upper.entry(du.n).or_insert_with(|| vec![ZERO; nu * nv])[iu * nv + iv] +=
                        cl.spin_inner(&du.amp, &dv.amp);
                }
            }
            for pv in &cv.psi {
                for pu in cu.psi.iter().filter(|p| p.n == pv.n) {
                    lower.entry(pv.n).or_insert_with(|| vec![ZERO; nu * nv])[iu * nv + iv] +=
                        cl.spin_inner(&pv.amp, &pu.amp);
                }
            }
        }
    }
    let m = setting.mass;
    let (mut sum, mut abs) = (0.0, 0.0);
    for (kn, g_up) in &upper {
        for (qn, g_lo) in &lower {
            let re: f64 = g_up.iter().zip(g_lo).map(|(a, b)| (a * b).re).sum();
            let size: f64 = g_up.iter().zip(g_lo).map(|(a, b)| (a * b).norm()).sum();
            let w = definiteness_bracket(setting.momentum(*kn), setting.momentum(*qn), m) / m.powi(3);
            sum += re * w;
            abs += size * w;
        }
    }
    let pre = -chirality_sign.value() * k.c4 / k.delta.powi(4) * setting.volume().powi(2);
    Ok((pre * sum, pre.abs() * abs))
}

/// `Σ_c ⟨δψ_c(x)|M ψ_c(y)⟩ ∓ ⟨ψ_c(x)|M δψ_c(y)⟩` (`sign = Minus` for `∇₁−∇₂`).
fn d_pair(cl: &Clifford, jet: &FermionicJet, m: &SpinMat, x: &FourVec, y: &FourVec, sign: Sign) -> C {
    let mut s = ZERO;
    for c in &jet.components {
        let (dx, dy) = (wave_at(&c.delta_psi, x), wave_at(&c.delta_psi, y));
        let (px, py) = (wave_at(&c.psi, x), wave_at(&c.psi, y));
        s += cl.spin_inner(&dx, &m.apply(&py)) + cl.spin_inner(&px, &m.apply(&dy)) * sign.value();
    }
    s
}

/// Components `J^{kl}(x,y)` of the fermionic current tensor, with `J^{αβ}`
/// symmetrized in `αβ` and `J^{α0} := J^{0α}`.
pub fn jtensor_components(u: &FermionicJet, v: &FermionicJet, x: &FourVec, y: &FourVec) -> [[f64; 4]; 4] {
    jtensor_components_in(Clifford::standard(), u, v, x, y)
}

pub fn jtensor_components_in(cl: &Clifford, u: &FermionicJet, v: &FermionicJet, x: &FourVec, y: &FourVec) -> [[f64; 4]; 4] {
    let mats = chiral_insertions(cl);
    let dm = |jet: &FermionicJet, m: &SpinMat| d_pair(cl, jet, m, x, y, Sign::Minus);
    let dp = |jet: &FermionicJet, m: &SpinMat| d_pair(cl, jet, m, x, y, Sign::Plus);
    let mut j = [[0.0; 4]; 4];
    let mut j00 = (dm(u, &mats[0]) * dp(v, &mats[1])).im + (dm(u, &mats[1]) * dp(v, &mats[0])).im;
    for c in 0..2 {
        for al in 1..4 {
            let g = mats[gamma_chi(c, al)];
            j00 -= (dm(u, &g) * dp(v, &g.scale_re(-1.0))).im;
        }
    }
    j[0][0] = j00;
    for al in 1..4 {
        j[0][al] = j0a(cl, u, v, x, y, al);
        j[al][0] = j[0][al];
    }
    let chi = [cl.chi(Chirality::L), cl.chi(Chirality::R)];
    let mut jab = [[0.0; 3]; 3];
    for al in 1..4 {
        for be in 1..4 {
            let mut s = 0.0;
            for c in 0..2 {
                let sa = cl.sigma(0, al) * chi[c];
                let sb = cl.sigma(0, be) * chi[1 - c];
                s += (dm(u, &sa) * dp(v, &sb)).im;
                let ga = *cl.gamma(al) * chi[c];
                let gb = *cl.gamma(be) * chi[c];
                s -= (dm(u, &ga) * dp(v, &gb)).im;
            }
            jab[al - 1][be - 1] = s;
        }
    }
    for al in 0..3 {
        for be in 0..3 {
            j[al + 1][be + 1] = 0.5 * (jab[al][be] + jab[be][al]);
        }
    }
    j
}

/// `Re Tr(X_u Y_v^α) − Re Tr(X_u^α Y_v)` with
/// `X_u[M] = (∇₁−∇₂)|Mψ(y)≻≺ψ(x)|`, `Y_v[M] = (∇₁+∇₂)|Mψ(x)≻≺ψ(y)|`.
fn j0a(cl: &Clifford, u: &FermionicJet, v: &FermionicJet, x: &FourVec, y: &FourVec, al: usize) -> f64 {
    let s = cl.sigma(0, al);
    let one = SpinMat::identity();
    let xu = |m: &SpinMat| {
        let mut acc = SpinMat::zero();
        for c in &u.components {
            let (dx, dy) = (wave_at(&c.delta_psi, x), wave_at(&c.delta_psi, y));
            let (px, py) = (wave_at(&c.psi, x), wave_at(&c.psi, y));
            acc = acc + cl.ket_bra(&m.apply(&py), &dx) - cl.ket_bra(&m.apply(&dy), &px);
        }
        acc
    };
    let yv = |m: &SpinMat| {
        let mut acc = SpinMat::zero();
        for c in &v.components {
            let (dx, dy) = (wave_at(&c.delta_psi, x), wave_at(&c.delta_psi, y));
            let (px, py) = (wave_at(&c.psi, x), wave_at(&c.psi, y));
            acc = acc + cl.ket_bra(&m.apply(&dx), &py) + cl.ket_bra(&m.apply(&px), &dy);
        }
        acc
    };
    (xu(&one) * yv(&s)).trace().re - (xu(&s) * yv(&one)).trace().re
}

/// A plane-wave factor `coef · e^{ia·x} e^{−ib·y}`.
#[derive(Debug, Clone, Copy)]
struct Term {
    coef: C,
    a: FourVec,
    an: [i64; 3],
    b: FourVec,
    bn: [i64; 3],
}

fn d_terms(cl: &Clifford, jet: &FermionicJet, m: &SpinMat, sign: Sign) -> Vec<Term> {
    let mut out = Vec::new();
    let mk = |f: &DiracMode, g: &DiracMode, s: f64| Term {
        coef: cl.spin_inner(&f.amp, &m.apply(&g.amp)) * s,
        a: f.four_momentum(),
        an: f.n,
        b: g.four_momentum(),
        bn: g.n,
    };
    for c in &jet.components {
        for d in &c.delta_psi {
            for p in &c.psi {
                out.push(mk(d, p, 1.0));
            }
        }
        for p in &c.psi {
            for d in &c.delta_psi {
                out.push(mk(p, d, sign.value()));
            }
        }
    }
    out
}

/// Pairs of insertions `(M_u, M_v, ±1)` whose products build `J^{αβ}`.
fn jab_insertions(cl: &Clifford, al: usize, be: usize) -> Vec<(SpinMat, SpinMat, f64)> {
    let chi = [cl.chi(Chirality::L), cl.chi(Chirality::R)];
    let mut out = Vec::new();
    for c in 0..2 {
        out.push((cl.sigma(0, al) * chi[c], cl.sigma(0, be) * chi[1 - c], 1.0));
        out.push((*cl.gamma(al) * chi[c], *cl.gamma(be) * chi[c], -1.0));
    }
    out
}

/// `J^{αβ}(x,y)` (not symmetrized) from the plane-wave expansion of all
/// products; agrees with [`jtensor_components`] after symmetrization.
pub fn jab_mode_expansion(u: &FermionicJet, v: &FermionicJet, x: &FourVec, y: &FourVec) -> [[f64; 3]; 3] {
    let cl = Clifford::standard();
    let mut out = [[0.0; 3]; 3];
    for al in 1..4 {
        for be in 1..4 {
            let mut s = 0.0;
            for (mu, mv, sg) in jab_insertions(cl, al, be) {
                let (tu, tv) = (d_terms(cl, u, &mu, Sign::Minus), d_terms(cl, v, &mv, Sign::Plus));
                let mut z = ZERO;
                for t1 in &tu {
                    for t2 in &tv {
                        let ph = mink_real(&t1.a, x) + mink_real(&t2.a, x) - mink_real(&t1.b, y) - mink_real(&t2.b, y);
                        z += t1.coef * t2.coef * C::from_polar(1.0, ph);
                    }
                }
                s += sg * z.im;
            }
            out[al - 1][be - 1] = s;
        }
    }
    out
}

/// Fourier transform `∫ e^{−iP·ξ} (ξ̂_α ξ̂_β − δ_{αβ}/3) d³ξ = −6π²(P̂_α P̂_β − δ_{αβ}/3)/|P|³`,
/// zero at `P = 0`.
pub fn traceless_weight_hat(p: [f64; 3], al: usize, be: usize) -> f64 {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    if n == 0.0 {
        return 0.0;
    }
    let d = if al == be { 1.0 / 3.0 } else { 0.0 };
    -6.0 * PI * PI * (p[al - 1] * p[be - 1] / (n * n) - d) / n.powi(3)
}

/// `−½ ∂_t ∫_box d³x ∫ d³y J^{αβ}(t,x⃗; t,y⃗)(ξ_αξ_β/|ξ⃗|² − δ_{αβ}/3)` at time `t`,
/// keeping the products whose two `y`-factors (and two `x`-factors) carry
/// frequencies of opposite sign.
pub fn fermi_conservation_residual(setting: &BoxSetting, u: &FermionicJet, v: &FermionicJet, t: f64) -> f64 {
    residual_in(Clifford::standard(), setting, u, v, t)
}

fn residual_in(cl: &Clifford, setting: &BoxSetting, u: &FermionicJet, v: &FermionicJet, t: f64) -> f64 {
    let mut total = 0.0;
    for al in 1..4 {
        for be in 1..4 {
            for (mu, mv, sg) in jab_insertions(cl, al, be) {
                let (tu, tv) = (d_terms(cl, u, &mu, Sign::Minus), d_terms(cl, v, &mv, Sign::Plus));
                let mut z = ZERO;
                for t1 in &tu {
                    for t2 in &tv {
                        if t1.b[0].signum() == t2.b[0].signum() || t1.a[0].signum() == t2.a[0].signum() {
                            continue;
                        }
                        let big_a = [t1.an[0] + t2.an[0], t1.an[1] + t2.an[1], t1.an[2] + t2.an[2]];
                        let big_b = [t1.bn[0] + t2.bn[0], t1.bn[1] + t2.bn[1], t1.bn[2] + t2.bn[2]];
                        if big_a != big_b {
                            continue;
                        }
                        let w = traceless_weight_hat(setting.momentum(big_b), al, be);
                        if w == 0.0 {
                            continue;
                        }
                        let omega = (t1.a[0] + t2.a[0]) - (t1.b[0] + t2.b[0]);
                        z += t1.coef * t2.coef * w * I * omega * C::from_polar(1.0, omega * t);
                    }
                }
                total += sg * z.im;
            }
        }
    }
    -0.5 * setting.volume() * total
}

/// Spin transformations of the binary octahedral group (48 elements; each
/// rotation appears with both signs).
pub fn octahedral_spin_group(cl: &Clifford) -> Vec<SpinMat> {
    let c = (PI / 4.0).cos();
    let gens = [
        SpinMat::identity().scale_re(c) - cl.sigma(1, 2).scale(I * c),
        SpinMat::identity().scale_re(c) - cl.sigma(2, 3).scale(I * c),
    ];
    let mut group = vec![SpinMat::identity()];
    let mut frontier = group.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for g in &frontier {
            for h in &gens {
                let p = *h * *g;
                if !group.iter().any(|q| (*q - p).norm() < 1e-9) {
                    group.push(p);
                    next.push(p);
                }
            }
        }
        frontier = next;
    }
    group
}

/// The residual summed over the subsystems obtained by rotating the spin
/// frame through the octahedral group, which makes the summed `J^{αβ}`
/// spherically symmetric.
pub fn fermi_conservation_residual_symmetrized(setting: &BoxSetting, u: &FermionicJet, v: &FermionicJet, t: f64) -> f64 {
    let cl = Clifford::standard();
    let group = octahedral_spin_group(cl);
    let n = group.len() as f64;
    group
        .iter()
        .map(|s| residual_in(&cl.conjugated(s), setting, u, v, t))
        .sum::<f64>()
        / n
}

// Support argument for the Dirac current.

/// A spectral sample: four-momentum and spinor amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSample {
    pub p: FourVec,
    pub amp: Spinor,
}

impl From<&DiracMode> for SpectralSample {
    fn from(m: &DiracMode) -> Self {
        SpectralSample {
            p: m.four_momentum(),
            amp: m.amp,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportCheck {
    pub value: f64,
    /// Indices of samples where the kernel does not vanish.
    pub flagged: Vec<usize>,
}

/// Transform of `iK₀/t²` with the axis `k = 0` inside the cones included.
fn current_base(omega: f64, k: f64) -> C {
    if k == 0.0 && omega != 0.0 {
        return I * omega.signum();
    }
    eval_hat(KernelId::IK0OverT2, omega, k).unwrap_or(C::new(f64::NAN, f64::NAN))
}

fn current_kernel(p: &FourVec, h: f64) -> [C; 4] {
    let at = |q: [f64; 4]| current_base(q[0], (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt());
    std::array::from_fn(|mu| {
        let (mut a, mut b) = (*p, *p);
        a[mu] += h;
        b[mu] -= h;
        (at(a) - at(b)) / (2.0 * h)
    })
}

/// `Σ_samples Σ_k |K̂_k(p)|·‖a‖` with `K̂_k = ∂_{p^k}` of the transform of
/// `iK₀/t²` (one more `∂_ω` when `extra_omega_derivative`); exactly zero when
/// every sample lies strictly inside the cones.
pub fn current_sli_support_check(samples: &[SpectralSample], extra_omega_derivative: bool) -> SupportCheck {
    let mut value = 0.0;
    let mut flagged = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        let scale = s.p.iter().map(|x| x.abs()).fold(1.0, f64::max);
        let h = 1e-5 * scale;
        let k = (s.p[1] * s.p[1] + s.p[2] * s.p[2] + s.p[3] * s.p[3]).sqrt();
        let region = classify(s.p[0], k, 1e-12 * scale);
        let kernel = if extra_omega_derivative {
            let (mut a, mut b) = (s.p, s.p);
            a[0] += h;
            b[0] -= h;
            let (ka, kb) = (current_kernel(&a, h), current_kernel(&b, h));
            std::array::from_fn(|mu| (ka[mu] - kb[mu]) / (2.0 * h))
        } else {
            current_kernel(&s.p, h)
        };
        let mag: f64 = if region == ConeRegion::Boundary {
            f64::INFINITY
        } else {
            kernel.iter().map(|z| z.norm()).sum::<f64>() * spinor_norm(&s.amp)
        };
        if mag != 0.0 {
            flagged.push(i);
        }
        value += mag;
    }
    SupportCheck { value, flagged }
}

// Time-average identity.

/// `∫₀^∞ g(s) ds` via `s = u/(1−u)`.
fn half_line(g: impl Fn(f64) -> f64, tol: f64) -> Result<f64, QuadError> {
    integrate(
        |u: f64| {
            let w = 1.0 - u;
            g(u / w) / (w * w)
        },
        0.0,
        1.0,
        tol,
        tol,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeAverage {
    pub lhs: f64,
    /// `(T, rhs_T)` pairs.
    pub rhs: Vec<(f64, f64)>,
}

impl TimeAverage {
    pub fn max_deviation(&self) -> f64 {
        self.rhs.iter().map(|(_, r)| (r - self.lhs).abs()).fold(0.0, f64::max)
    }
}

/// `lhs = ∫_{−∞}^{t₀}dt ∫_{t₀}^∞dt' A(t,t')` and
/// `rhs_T = (1/2T) ∫₀^T dt ∫ (t'−t) A(t,t') dt'` for each `T`.
pub fn time_average_identity_check(
    a: &(dyn Fn(f64, f64) -> f64 + Sync),
    t0: f64,
    t_list: &[f64],
    tol: f64,
) -> Result<TimeAverage, SlayerError> {
    let inner_tol = tol * 1e-2;
    let inner_err = std::cell::Cell::new(None);
    let lhs = half_line(
        |s| match half_line(|r| a(t0 - s, t0 + r), inner_tol) {
            Ok(v) => v,
            Err(e) => {
                inner_err.set(Some(e));
                0.0
            }
        },
        tol,
    )?;
    if let Some(e) = inner_err.take() {
        return Err(e.into());
    }
    let moment = |t: f64| -> f64 {
        let fwd = half_line(|s| s * a(t, t + s), inner_tol);
        let bwd = half_line(|s| -s * a(t, t - s), inner_tol);
        match (fwd, bwd) {
            (Ok(x), Ok(y)) => x + y,
            (Err(e), _) | (_, Err(e)) => {
                inner_err.set(Some(e));
                0.0
            }
        }
    };
    let mut rhs = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let v = integrate_with_breaks(moment, 0.0, t, &[], tol * t, tol)?;
        if let Some(e) = inner_err.take() {
            return Err(e.into());
        }
        rhs.push((t, v / (2.0 * t)));
    }
    Ok(TimeAverage { lhs, rhs })
}

// Positivity of the current pole.

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub value: f64,
    /// `(∫ α² |j·ξ|(x + αξ) dα)²`, the natural size of the product.
    pub scale: f64,
}

/// `(⨍ j·ξ)(x) · (⨍ j·ξ)(y)` with `y = x + sep·(1, dir)` on the light cone
/// of `x`, both line integrals along the ray direction `dir`.
pub fn positivity_probe(
    j: CurrentSampler,
    x: &FourVec,
    dir: [f64; 3],
    sep: f64,
    cutoff: f64,
    tol: f64,
) -> Result<Probe, SlayerError> {
    let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    let dir = dir.map(|d| d / n);
    let y = [x[0] + sep, x[1] + sep * dir[0], x[2] + sep * dir[1], x[3] + sep * dir[2]];
    let ax = unbounded_line_integral(j, x, dir, cutoff, tol)?;
    let ay = unbounded_line_integral(j, &y, dir, cutoff, tol)?;
    let abs_integrand = |a: f64| {
        let z = [x[0] + a, x[1] + a * dir[0], x[2] + a * dir[1], x[3] + a * dir[2]];
        let jz = j(&z);
        a * a * (jz[0] - dir[0] * jz[1] - dir[1] * jz[2] - dir[2] * jz[3]).abs()
    };
    let b = integrate_with_breaks(abs_integrand, -cutoff, cutoff, &[0.0], tol, tol)?;
    Ok(Probe {
        value: ax * ay,
        scale: b * b,
    })
}

/// Bosonic results with their conservation drift.
pub fn bose_results(
    setting: &BoxSetting,
    u: &MaxwellField,
    v: &MaxwellField,
    k: &Constants,
) -> Result<[SurfaceLayerResult; 2], SlayerError> {
    let m = setting.mass;
    let (sigma, sigma_scale) = sigma_bose_parts(setting, u, v, 0.0, k)?;
    let (ip, ip_scale) = ip_bose_parts(setting, u, v, k)?;
    let steps = DRIFT_STEPS.map(|s| s / m);
    let su = |dt: f64| sigma_bose(setting, &u.time_translate(dt), &v.time_translate(dt), 0.0, k).unwrap_or(f64::NAN);
    let iu = |dt: f64| ip_bose(setting, &u.time_translate(dt), &v.time_translate(dt), k).unwrap_or(f64::NAN);
    Ok([
        SurfaceLayerResult {
            value: sigma,
            kind: Kind::Symplectic,
            channel: Channel::Bose,
            conserved_drift: relative_drift(su, &steps, sigma_scale.max(f64::MIN_POSITIVE)),
            normalization: *k,
        },
        SurfaceLayerResult {
            value: ip,
            kind: Kind::Inner,
            channel: Channel::Bose,
            conserved_drift: relative_drift(iu, &steps, ip_scale.max(f64::MIN_POSITIVE)),
            normalization: *k,
        },
    ])
}

/// Fermionic results with their conservation drift.
pub fn fermi_results(
    setting: &BoxSetting,
    u: &FermionicJet,
    v: &FermionicJet,
    chirality_sign: Sign,
    k: &Constants,
) -> Result<[SurfaceLayerResult; 2], SlayerError> {
    let m = setting.mass;
    let (sigma, sigma_scale) = sigma_fermi_parts(setting, u, v, k)?;
    let (ip, ip_scale) = ip_fermi_parts(setting, u, v, chirality_sign, k)?;
    let steps = DRIFT_STEPS.map(|s| s / m);
    let su = |dt: f64| sigma_fermi(setting, &u.time_translate(dt), &v.time_translate(dt), k).unwrap_or(f64::NAN);
    let iu = |dt: f64| ip_fermi(setting, &u.time_translate(dt), &v.time_translate(dt), chirality_sign, k).unwrap_or(f64::NAN);
    Ok([
        SurfaceLayerResult {
            value: sigma,
            kind: Kind::Symplectic,
            channel: Channel::Fermi,
            conserved_drift: relative_drift(su, &steps, sigma_scale.max(f64::MIN_POSITIVE)),
            normalization: *k,
        },
        SurfaceLayerResult {
            value: ip,
            kind: Kind::Inner,
            channel: Channel::Fermi,
            conserved_drift: relative_drift(iu, &steps, ip_scale.max(f64::MIN_POSITIVE)),
            normalization: *k,
        },
    ])
}
