//! Finite mode sets of on-shell Maxwell potentials and Dirac wave functions
//! in a periodic box, with free time evolution and the JSON configuration
//! format.

use crate::clifford::{
    mink_real, spinor_norm, to_complex4, CFourVec, Clifford, FourVec, Sign, SpinMat, Spinor, ETA,
};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Residual tolerance of all on-shell constructors.
pub const SHELL_TOL: f64 = 1e-9;

const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("box side {0} and mass {1} must be positive and finite")]
    InvalidSetting(f64, f64),
    #[error("mode is off shell: residual {residual:e} exceeds {tolerance:e}")]
    OffShell { residual: f64, tolerance: f64 },
    #[error("invalid mode: {0}")]
    InvalidMode(String),
    #[error("configuration error: {0}")]
    Config(String),
}

/// Periodic box of side `len` and fermion mass `mass`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSetting {
    pub len: f64,
    pub mass: f64,
}

impl BoxSetting {
    pub fn new(len: f64, mass: f64) -> Result<Self, FieldError> {
        if !(len.is_finite() && len > 0.0 && mass.is_finite() && mass > 0.0) {
            return Err(FieldError::InvalidSetting(len, mass));
        }
        Ok(BoxSetting { len, mass })
    }

    /// Default box `L = 32π/m`.
    pub fn for_mass(mass: f64) -> Result<Self, FieldError> {
        Self::new(32.0 * PI / mass, mass)
    }

    pub fn volume(&self) -> f64 {
        self.len.powi(3)
    }

    pub fn momentum(&self, n: [i64; 3]) -> [f64; 3] {
        let s = 2.0 * PI / self.len;
        [n[0] as f64 * s, n[1] as f64 * s, n[2] as f64 * s]
    }

    /// Lattice index of a spatial momentum, if it lies on the lattice.
    pub fn lattice_index(&self, p: [f64; 3]) -> Option<[i64; 3]> {
        let s = self.len / (2.0 * PI);
        let mut n = [0i64; 3];
        for i in 0..3 {
            let x = p[i] * s;
            let r = x.round();
            if (x - r).abs() > SHELL_TOL * x.abs().max(1.0) {
                return None;
            }
            n[i] = r as i64;
        }
        Some(n)
    }

    pub fn omega(&self, n: [i64; 3]) -> f64 {
        let k = self.momentum(n);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + self.mass * self.mass).sqrt()
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn phase(angle: f64) -> C {
    C::from_polar(1.0, angle)
}

/// A plane-wave Maxwell potential `ε e^{−ip·x}` in Lorenz gauge; the real
/// field adds the complex conjugate mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxwellMode {
    pub n: [i64; 3],
    pub p: FourVec,
    pub eps: CFourVec,
}

impl MaxwellMode {
    /// Null momentum on the lattice point `n` with frequency sign `shell`.
    pub fn new(setting: &BoxSetting, n: [i64; 3], shell: Sign, eps: CFourVec) -> Result<Self, FieldError> {
        if n == [0, 0, 0] {
            return Err(FieldError::InvalidMode("zero momentum".into()));
        }
        let k = setting.momentum(n);
        let p = [shell.value() * norm3(k), k[0], k[1], k[2]];
        Self::checked(n, p, eps)
    }

    /// Mode from an explicit four-momentum, which must be null and box-quantized.
    pub fn from_four_momentum(setting: &BoxSetting, p: FourVec, eps: CFourVec) -> Result<Self, FieldError> {
        let n = setting
            .lattice_index([p[1], p[2], p[3]])
            .ok_or_else(|| FieldError::InvalidMode(format!("spatial momentum {:?} is not on the box lattice", &p[1..])))?;
        if n == [0, 0, 0] {
            return Err(FieldError::InvalidMode("zero momentum".into()));
        }
        let scale = p.iter().map(|x| x * x).sum::<f64>();
        let residual = mink_real(&p, &p).abs();
        if residual > SHELL_TOL * scale {
            return Err(FieldError::OffShell {
                residual,
                tolerance: SHELL_TOL * scale,
            });
        }
        let k = setting.momentum(n);
        let p = [p[0].signum() * norm3(k), k[0], k[1], k[2]];
        Self::checked(n, p, eps)
    }

    fn checked(n: [i64; 3], p: FourVec, eps: CFourVec) -> Result<Self, FieldError> {
        let pe: C = (0..4).map(|mu| eps[mu] * (ETA[mu] * p[mu])).sum();
        let scale = p.iter().map(|x| x * x).sum::<f64>().sqrt() * eps.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        if pe.norm() > SHELL_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(FieldError::OffShell {
                residual: pe.norm(),
                tolerance: SHELL_TOL * scale,
            });
        }
        Ok(MaxwellMode { n, p, eps })
    }

    /// `F̂_{jk} = −i(p_j ε_k − ε_j p_k)`, all indices lowered.
    pub fn field_tensor_hat(&self) -> [[C; 4]; 4] {
        field_tensor(&self.p, &self.eps)
    }

    /// The conjugate mode `(−p, ε̄)` carried by the real field.
    pub fn conjugate(&self) -> MaxwellMode {
        MaxwellMode {
            n: [-self.n[0], -self.n[1], -self.n[2]],
            p: self.p.map(|x| -x),
            eps: self.eps.map(|e| e.conj()),
        }
    }

    pub fn time_translate(&self, dt: f64) -> MaxwellMode {
        let ph = phase(-self.p[0] * dt);
        MaxwellMode {
            eps: self.eps.map(|e| e * ph),
            ..*self
        }
    }
}

pub fn field_tensor(p: &FourVec, eps: &CFourVec) -> [[C; 4]; 4] {
    let mut f = [[ZERO; 4]; 4];
    for j in 0..4 {
        for k in 0..4 {
            let (pj, pk) = (ETA[j] * p[j], ETA[k] * p[k]);
            let (ej, ek) = (eps[j] * ETA[j], eps[k] * ETA[k]);
            f[j][k] = -I * (ek * pj - ej * pk);
        }
    }
    f
}

/// A real Maxwell potential given by a finite set of modes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MaxwellField {
    pub modes: Vec<MaxwellMode>,
}

impl MaxwellField {
    pub fn new(modes: Vec<MaxwellMode>) -> Self {
        MaxwellField { modes }
    }

    /// All modes of the real field: each stored mode and its conjugate.
    pub fn spectrum(&self) -> Vec<MaxwellMode> {
        self.modes.iter().flat_map(|m| [*m, m.conjugate()]).collect()
    }

    pub fn time_translate(&self, dt: f64) -> MaxwellField {
        MaxwellField::new(self.modes.iter().map(|m| m.time_translate(dt)).collect())
    }

    pub fn scaled(&self, s: f64) -> MaxwellField {
        MaxwellField::new(
            self.modes
                .iter()
                .map(|m| MaxwellMode {
                    eps: m.eps.map(|e| e * s),
                    ..*m
                })
                .collect(),
        )
    }
}

/// Two orthonormal solutions of `(k̸ − m)a = 0` with `k⁰ = shell·ω(k⃗)`,
/// obtained from `(k̸ + m)` applied to `e₁, e₂` (upper shell) or `e₃, e₄`
/// (lower shell).
pub fn dirac_basis(shell: Sign, k: [f64; 3], m: f64) -> [Spinor; 2] {
    let cl = Clifford::standard();
    let w = (norm3(k).powi(2) + m * m).sqrt();
    let kv = [shell.value() * w, k[0], k[1], k[2]];
    let proj = cl.slash_real(&kv) + SpinMat::identity().scale_re(m);
    let offset = match shell {
        Sign::Plus => 0,
        Sign::Minus => 2,
    };
    let column = |j: usize| {
        let mut e = [ZERO; 4];
        e[j] = C::from(1.0);
        proj.apply(&e)
    };
    let (mut a, mut b) = (column(offset), column(offset + 1));
    let na = spinor_norm(&a);
    a = a.map(|x| x / na);
    let proj_ab: C = (0..4).map(|i| a[i].conj() * b[i]).sum();
    for i in 0..4 {
        b[i] -= proj_ab * a[i];
    }
    let nb = spinor_norm(&b);
    b = b.map(|x| x / nb);
    [a, b]
}

/// `‖(k̸ − m)a‖` for `k = (shell·ω, k⃗)`.
pub fn dirac_residual(cl: &Clifford, shell: Sign, k: [f64; 3], m: f64, a: &Spinor) -> f64 {
    let w = (norm3(k).powi(2) + m * m).sqrt();
    let kv = [shell.value() * w, k[0], k[1], k[2]];
    let op = cl.slash_real(&kv) - SpinMat::identity().scale_re(m);
    spinor_norm(&op.apply(a))
}

/// A plane-wave Dirac solution `a e^{−ik·x}` on the lattice point `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracMode {
    pub shell: Sign,
    pub n: [i64; 3],
    pub k: [f64; 3],
    pub omega: f64,
    pub amp: Spinor,
}

impl DiracMode {
    pub fn new(setting: &BoxSetting, shell: Sign, n: [i64; 3], amp: Spinor) -> Result<Self, FieldError> {
        let k = setting.momentum(n);
        let omega = setting.omega(n);
        let residual = dirac_residual(Clifford::standard(), shell, k, setting.mass, &amp);
        let tolerance = SHELL_TOL * (omega + setting.mass) * spinor_norm(&amp).max(1.0);
        if residual > tolerance {
            return Err(FieldError::OffShell { residual, tolerance });
        }
        Ok(DiracMode {
            shell,
            n,
            k,
            omega,
            amp,
        })
    }

    /// Mode with amplitude `c₀b₀ + c₁b₁` in the basis of [`dirac_basis`].
    pub fn from_basis(setting: &BoxSetting, shell: Sign, n: [i64; 3], coeffs: [C; 2]) -> Self {
        let b = dirac_basis(shell, setting.momentum(n), setting.mass);
        let amp = std::array::from_fn(|i| coeffs[0] * b[0][i] + coeffs[1] * b[1][i]);
        DiracMode {
            shell,
            n,
            k: setting.momentum(n),
            omega: setting.omega(n),
            amp,
        }
    }

    pub fn four_momentum(&self) -> FourVec {
        [self.shell.value() * self.omega, self.k[0], self.k[1], self.k[2]]
    }

    /// Signed frequency `k⁰`.
    pub fn frequency(&self) -> f64 {
        self.shell.value() * self.omega
    }

    /// `a e^{−ik·x}`
    pub fn value_at(&self, x: &FourVec) -> Spinor {
        let ph = phase(-mink_real(&self.four_momentum(), x));
        self.amp.map(|a| a * ph)
    }

    pub fn time_translate(&self, dt: f64) -> DiracMode {
        let ph = phase(-self.frequency() * dt);
        DiracMode {
            amp: self.amp.map(|a| a * ph),
            ..*self
        }
    }

    pub fn scaled(&self, s: C) -> DiracMode {
        DiracMode {
            amp: self.amp.map(|a| a * s),
            ..*self
        }
    }
}

/// One wave function `ψ` with its variation `δψ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JetComponent {
    pub psi: Vec<DiracMode>,
    pub delta_psi: Vec<DiracMode>,
}

/// A fermionic jet `∇P = −Σ_c |δψ_c≻≺ψ_c|` built from finitely many
/// wave functions and their variations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FermionicJet {
    pub components: Vec<JetComponent>,
}

pub fn wave_at(modes: &[DiracMode], x: &FourVec) -> Spinor {
    let mut s = [ZERO; 4];
    for m in modes {
        let v = m.value_at(x);
        for i in 0..4 {
            s[i] += v[i];
        }
    }
    s
}

impl FermionicJet {
    pub fn single(psi: Vec<DiracMode>, delta_psi: Vec<DiracMode>) -> Self {
        FermionicJet {
            components: vec![JetComponent { psi, delta_psi }],
        }
    }

    /// `ψ` on the lower shell and `δψ` on the upper shell in every component.
    pub fn is_sea_excitation(&self) -> bool {
        self.components.iter().all(|c| {
            c.psi.iter().all(|m| m.shell == Sign::Minus) && c.delta_psi.iter().all(|m| m.shell == Sign::Plus)
        })
    }

    pub fn is_empty(&self) -> bool {
        self.components.iter().all(|c| c.psi.is_empty() && c.delta_psi.is_empty())
    }

    pub fn modes(&self) -> impl Iterator<Item = &DiracMode> {
        self.components.iter().flat_map(|c| c.psi.iter().chain(c.delta_psi.iter()))
    }

    pub fn time_translate(&self, dt: f64) -> FermionicJet {
        FermionicJet {
            components: self
                .components
                .iter()
                .map(|c| JetComponent {
                    psi: c.psi.iter().map(|m| m.time_translate(dt)).collect(),
                    delta_psi: c.delta_psi.iter().map(|m| m.time_translate(dt)).collect(),
                })
                .collect(),
        }
    }

    /// Multiplies every `δψ` amplitude by `s` (the jet is linear in `δψ`).
    pub fn scaled(&self, s: f64) -> FermionicJet {
        FermionicJet {
            components: self
                .components
                .iter()
                .map(|c| JetComponent {
                    psi: c.psi.clone(),
                    delta_psi: c.delta_psi.iter().map(|m| m.scaled(C::from(s))).collect(),
                })
                .collect(),
        }
    }

    /// `∇P(x,y) = −Σ_c |δψ_c(x)≻≺ψ_c(y)|`
    pub fn nabla_p(&self, cl: &Clifford, x: &FourVec, y: &FourVec) -> SpinMat {
        let mut m = SpinMat::zero();
        for c in &self.components {
            m = m - cl.ket_bra(&wave_at(&c.delta_psi, x), &wave_at(&c.psi, y));
        }
        m
    }
}

/// A mode quadruple `(δψᵘ, ψᵘ, δψᵛ, ψᵛ)` with equal momentum transfer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadruple {
    pub delta_u: [i64; 3],
    pub psi_u: [i64; 3],
    pub delta_v: [i64; 3],
    pub psi_v: [i64; 3],
    pub gap_u: f64,
    pub gap_v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingReport {
    pub matched: usize,
    pub violations: Vec<Quadruple>,
    pub implication_holds: bool,
}

/// Enumerates quadruples with `p⃗_{δψᵘ} − p⃗_{ψᵘ} = p⃗_{δψᵛ} − p⃗_{ψᵛ}` (paired
/// within each jet component) and flags those whose signed frequency gaps
/// differ by more than `tol`.
pub fn pairing_predicates(u: &FermionicJet, v: &FermionicJet, tol: f64) -> PairingReport {
    let mut matched = 0;
    let mut violations = Vec::new();
    let sub = |a: [i64; 3], b: [i64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    for cu in &u.components {
        for du in &cu.delta_psi {
            for pu in &cu.psi {
                let tu = sub(du.n, pu.n);
                let gap_u = du.frequency() - pu.frequency();
                for cv in &v.components {
                    for dv in &cv.delta_psi {
                        for pv in &cv.psi {
                            if sub(dv.n, pv.n) != tu {
                                continue;
                            }
                            matched += 1;
                            let gap_v = dv.frequency() - pv.frequency();
                            if (gap_u - gap_v).abs() > tol * gap_u.abs().max(gap_v.abs()).max(1.0) {
                                violations.push(Quadruple {
                                    delta_u: du.n,
                                    psi_u: pu.n,
                                    delta_v: dv.n,
                                    psi_v: pv.n,
                                    gap_u,
                                    gap_v,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    let implication_holds = violations.is_empty();
    PairingReport {
        matched,
        violations,
        implication_holds,
    }
}

/// Null vector of a complex `rows × cols` system by Gaussian elimination
/// with full pivoting; `None` unless the rank is exactly `cols − 1`.
fn null_vector(mut a: Vec<Vec<C>>, cols: usize, tol: f64) -> Option<Vec<C>> {
    let rows = a.len();
    let mut perm: Vec<usize> = (0..cols).collect();
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let mut rank = 0;
    while rank < rows.min(cols) {
        let mut best = (0.0, 0, 0);
        for (i, row) in a.iter().enumerate().skip(rank) {
            for (j, z) in row.iter().enumerate().skip(rank) {
                if z.norm() > best.0 {
                    best = (z.norm(), i, j);
                }
            }
        }
        if best.0 <= tol * scale {
            break;
        }
        a.swap(rank, best.1);
        for row in a.iter_mut() {
            row.swap(rank, best.2);
        }
        perm.swap(rank, best.2);
        let piv = a[rank][rank];
        for i in 0..rows {
            if i == rank {
                continue;
            }
            let f = a[i][rank] / piv;
            if f == ZERO {
                continue;
            }
            for j in rank..cols {
                let v = a[rank][j];
                a[i][j] -= f * v;
            }
        }
        rank += 1;
    }
    if rank != cols - 1 {
        return None;
    }
    // Free variable is the last permuted column.
    let mut x = vec![ZERO; cols];
    x[cols - 1] = C::from(1.0);
    for r in 0..rank {
        x[r] = -a[r][cols - 1] / a[r][r];
    }
    let mut out = vec![ZERO; cols];
    for (pos, &orig) in perm.iter().enumerate() {
        out[orig] = x[pos];
    }
    Some(out)
}

/// Sea-excitation jet whose `∇P` satisfies the conservation conditions with
/// signs `(s1, +)` at every pair of points. Two components: `δψ_c` is the
/// rest-frame upper-shell spinor `e_c`, and `ψ_c = Σ_k scale_k Σ_j c̄_{cj}(k) b_j(k)`
/// with `b_j(k)` the lower-shell basis and `c(k)` spanning the null space of
/// the six linear conditions.
pub fn conscond_jet(
    setting: &BoxSetting,
    s1: Sign,
    momenta: &[[i64; 3]],
    scales: &[C],
) -> Result<FermionicJet, FieldError> {
    let cl = Clifford::standard();
    let m = setting.mass;
    let rest = dirac_basis(Sign::Plus, [0.0; 3], m);
    let mut comps = [JetComponent::default(), JetComponent::default()];
    for c in 0..2 {
        comps[c].delta_psi.push(DiracMode::from_basis(
            setting,
            Sign::Plus,
            [0, 0, 0],
            if c == 0 { [C::from(1.0), ZERO] } else { [ZERO, C::from(1.0)] },
        ));
    }
    for (n, scale) in momenta.iter().zip(scales) {
        let b = dirac_basis(Sign::Minus, setting.momentum(*n), m);
        // ∇P as a linear function of the four coefficients c_{cj}.
        let jet_matrix = |coef: &[C]| -> SpinMat {
            let mut mat = SpinMat::zero();
            for c in 0..2 {
                let psi: Spinor = std::array::from_fn(|i| coef[2 * c].conj() * b[0][i] + coef[2 * c + 1].conj() * b[1][i]);
                mat = mat - cl.ket_bra(&rest[c], &psi);
            }
            mat
        };
        let mut system = vec![vec![ZERO; 4]; 6];
        for col in 0..4 {
            let mut e = [ZERO; 4];
            e[col] = C::from(1.0);
            let t = cl.conscond_traces(&jet_matrix(&e), s1, Sign::Plus);
            for row in 0..6 {
                system[row][col] = t[row];
            }
        }
        let null = null_vector(system, 4, 1e-10)
            .ok_or_else(|| FieldError::InvalidMode(format!("no unique conserved coupling at lattice point {n:?}")))?;
        let norm = null.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for c in 0..2 {
            let coeffs = [
                (null[2 * c] / norm).conj() * *scale,
                (null[2 * c + 1] / norm).conj() * *scale,
            ];
            let mode = DiracMode::from_basis(setting, Sign::Minus, *n, coeffs);
            if spinor_norm(&mode.amp) > 0.0 {
                comps[c].psi.push(mode);
            }
        }
    }
    Ok(FermionicJet {
        components: comps.into_iter().collect(),
    })
}

/// Single-component sea-excitation jet violating the frequency implication:
/// `u` couples `δψ(n_a) ↔ ψ(0)` and `v` couples `δψ(2n_a) ↔ ψ(n_a)`, equal
/// momentum transfer with unequal frequency gaps.
pub fn counterexample_jets(setting: &BoxSetting, n_a: [i64; 3]) -> (FermionicJet, FermionicJet) {
    let two = [2 * n_a[0], 2 * n_a[1], 2 * n_a[2]];
    let one = C::from(1.0);
    let h = C::new(0.3, 0.7);
    let u = FermionicJet::single(
        vec![DiracMode::from_basis(setting, Sign::Minus, [0, 0, 0], [one, h])],
        vec![DiracMode::from_basis(setting, Sign::Plus, n_a, [h, one])],
    );
    let v = FermionicJet::single(
        vec![DiracMode::from_basis(setting, Sign::Minus, n_a, [one, -h])],
        vec![DiracMode::from_basis(setting, Sign::Plus, two, [h.conj(), one])],
    );
    (u, v)
}

// JSON configuration.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxwellModeJson {
    pub p: [f64; 4],
    pub eps_re: [f64; 4],
    #[serde(default)]
    pub eps_im: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaxwellFieldJson {
    Modes { modes: Vec<MaxwellModeJson> },
    Single(MaxwellModeJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracModeJson {
    pub shell: i8,
    pub n: [i64; 3],
    #[serde(default)]
    pub amp_re: Option<[f64; 4]>,
    #[serde(default)]
    pub amp_im: Option<[f64; 4]>,
    /// Coefficients `[re₀, im₀, re₁, im₁]` in the standard basis of the shell.
    #[serde(default)]
    pub basis: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetComponentJson {
    pub psi: Vec<DiracModeJson>,
    pub delta_psi: Vec<DiracModeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JetJson {
    Components { components: Vec<JetComponentJson> },
    Single(JetComponentJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldConfigJson {
    #[serde(rename = "box", default)]
    pub box_len: Option<f64>,
    pub mass: f64,
    #[serde(default)]
    pub maxwell: Vec<MaxwellFieldJson>,
    #[serde(default)]
    pub jets: Vec<JetJson>,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    pub setting: BoxSetting,
    pub maxwell: Vec<MaxwellField>,
    pub jets: Vec<FermionicJet>,
}

impl FieldConfig {
    pub fn from_json_str(s: &str) -> Result<Self, FieldError> {
        let raw: FieldConfigJson = serde_json::from_str(s).map_err(|e| FieldError::Config(e.to_string()))?;
        Self::from_raw(&raw)
    }

    pub fn from_raw(raw: &FieldConfigJson) -> Result<Self, FieldError> {
        let setting = match raw.box_len {
            Some(l) => BoxSetting::new(l, raw.mass)?,
            None => BoxSetting::for_mass(raw.mass)?,
        };
        let maxwell_mode = |m: &MaxwellModeJson| {
            let eps = std::array::from_fn(|i| C::new(m.eps_re[i], m.eps_im[i]));
            MaxwellMode::from_four_momentum(&setting, m.p, eps)
        };
        let maxwell = raw
            .maxwell
            .iter()
            .map(|f| {
                let modes = match f {
                    MaxwellFieldJson::Single(m) => vec![maxwell_mode(m)?],
                    MaxwellFieldJson::Modes { modes } => modes.iter().map(maxwell_mode).collect::<Result<_, _>>()?,
                };
                Ok(MaxwellField::new(modes))
            })
            .collect::<Result<Vec<_>, FieldError>>()?;
        let dirac_mode = |m: &DiracModeJson| -> Result<DiracMode, FieldError> {
            let shell = match m.shell {
                1 => Sign::Plus,
                -1 => Sign::Minus,
                s => return Err(FieldError::Config(format!("shell must be 1 or -1, got {s}"))),
            };
            match (m.basis, m.amp_re) {
                (Some(b), None) => Ok(DiracMode::from_basis(
                    &setting,
                    shell,
                    m.n,
                    [C::new(b[0], b[1]), C::new(b[2], b[3])],
                )),
                (None, Some(re)) => {
                    let im = m.amp_im.unwrap_or([0.0; 4]);
                    DiracMode::new(&setting, shell, m.n, std::array::from_fn(|i| C::new(re[i], im[i])))
                }
                _ => Err(FieldError::Config("a Dirac mode needs exactly one of `amp_re` or `basis`".into())),
            }
        };
        let component = |c: &JetComponentJson| -> Result<JetComponent, FieldError> {
            Ok(JetComponent {
                psi: c.psi.iter().map(dirac_mode).collect::<Result<_, _>>()?,
                delta_psi: c.delta_psi.iter().map(dirac_mode).collect::<Result<_, _>>()?,
            })
        };
        let jets = raw
            .jets
            .iter()
            .map(|j| {
                let components = match j {
                    JetJson::Single(c) => vec![component(c)?],
                    JetJson::Components { components } => components.iter().map(component).collect::<Result<_, _>>()?,
                };
                Ok(FermionicJet { components })
            })
            .collect::<Result<Vec<_>, FieldError>>()?;
        Ok(FieldConfig { setting, maxwell, jets })
    }
}

/// Complex four-vector from real and imaginary parts.
pub fn cvec(re: [f64; 4], im: [f64; 4]) -> CFourVec {
    std::array::from_fn(|i| C::new(re[i], im[i]))
}

/// A transverse polarization `ε = (0, ε⃗)` with `ε⃗ ⟂ p⃗` built from the
/// coefficients `(a, b)` on an orthonormal frame of the plane ⟂ p⃗, plus a
/// gauge part `λp`.
pub fn transverse_polarization(p: &FourVec, a: C, b: C, lambda: C) -> CFourVec {
    let k = [p[1], p[2], p[3]];
    let kn = norm3(k);
    let khat = k.map(|x| x / kn);
    let trial = if khat[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = trial[0] * khat[0] + trial[1] * khat[1] + trial[2] * khat[2];
    let mut e1 = [trial[0] - d * khat[0], trial[1] - d * khat[1], trial[2] - d * khat[2]];
    let n1 = norm3(e1);
    e1 = e1.map(|x| x / n1);
    let e2 = [
        khat[1] * e1[2] - khat[2] * e1[1],
        khat[2] * e1[0] - khat[0] * e1[2],
        khat[0] * e1[1] - khat[1] * e1[0],
    ];
    let pc = to_complex4(p);
    std::array::from_fn(|mu| {
        let spatial = if mu == 0 { ZERO } else { a * e1[mu - 1] + b * e2[mu - 1] };
        spatial + lambda * pc[mu]
    })
}
