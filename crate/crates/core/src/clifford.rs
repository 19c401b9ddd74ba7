//! Dirac matrices, the indefinite spin scalar product, spectral projectors of
//! the closed chain and the algebraic jet conditions.

use num_complex::Complex64 as C;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;

pub type Spinor = [C; 4];
pub type CFourVec = [C; 4];
pub type FourVec = [f64; 4];

/// Diagonal of the Minkowski metric, signature (+,-,-,-).
pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliffordError {
    #[error("closed chain is degenerate: |d| = {d_abs:e} below threshold {threshold:e}")]
    DegenerateChain { d_abs: f64, threshold: f64 },
    #[error("jet violates the conservation conditions for the requested sign")]
    ChiralityViolated,
}

/// A choice of sign `±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn from_f64(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

/// Chirality index `c` of the projectors `χ_L = (1-γ⁵)/2`, `χ_R = (1+γ⁵)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chirality {
    L,
    R,
}

impl Chirality {
    pub const BOTH: [Chirality; 2] = [Chirality::L, Chirality::R];

    pub fn opposite(self) -> Chirality {
        match self {
            Chirality::L => Chirality::R,
            Chirality::R => Chirality::L,
        }
    }
}

/// Bilinear Minkowski product (no complex conjugation).
pub fn mink(a: &CFourVec, b: &CFourVec) -> C {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

pub fn mink_real(a: &FourVec, b: &FourVec) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

pub fn conj4(a: &CFourVec) -> CFourVec {
    [a[0].conj(), a[1].conj(), a[2].conj(), a[3].conj()]
}

pub fn to_complex4(a: &FourVec) -> CFourVec {
    [C::from(a[0]), C::from(a[1]), C::from(a[2]), C::from(a[3])]
}

pub fn spinor_add(a: &Spinor, b: &Spinor) -> Spinor {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

pub fn spinor_scale(a: &Spinor, s: C) -> Spinor {
    [a[0] * s, a[1] * s, a[2] * s, a[3] * s]
}

pub fn spinor_norm(a: &Spinor) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// 4×4 complex matrix acting on Dirac spinors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMat(pub [[C; 4]; 4]);

impl SpinMat {
    pub fn zero() -> Self {
        SpinMat([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Self::diag([ONE; 4])
    }

    pub fn diag(d: [C; 4]) -> Self {
        let mut m = Self::zero();
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    pub fn from_real(rows: [[f64; 4]; 4]) -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = C::from(rows[i][j]);
            }
        }
        m
    }

    pub fn scale(&self, s: C) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        m
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C::from(s))
    }

    /// Euclidean (Hermitian) adjoint.
    pub fn dagger(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn apply(&self, v: &Spinor) -> Spinor {
        let mut out = [ZERO; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i] += self.0[i][j] * v[j];
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    /// The matrix `a b†` (Euclidean outer product).
    pub fn outer(a: &Spinor, b: &Spinor) -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = a[i] * b[j].conj();
            }
        }
        m
    }
}

impl Add for SpinMat {
    type Output = SpinMat;
    fn add(self, rhs: SpinMat) -> SpinMat {
        let mut m = self;
        m += rhs;
        m
    }
}

impl AddAssign for SpinMat {
    fn add_assign(&mut self, rhs: SpinMat) {
        for i in 0..4 {
            for j in 0..4 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
    }
}

impl Sub for SpinMat {
    type Output = SpinMat;
    fn sub(self, rhs: SpinMat) -> SpinMat {
        self + (-rhs)
    }
}

impl Neg for SpinMat {
    type Output = SpinMat;
    fn neg(self) -> SpinMat {
        self.scale_re(-1.0)
    }
}

impl Mul for SpinMat {
    type Output = SpinMat;
    fn mul(self, rhs: SpinMat) -> SpinMat {
        let mut m = SpinMat::zero();
        for i in 0..4 {
            for k in 0..4 {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..4 {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }
}

impl Mul<C> for SpinMat {
    type Output = SpinMat;
    fn mul(self, rhs: C) -> SpinMat {
        self.scale(rhs)
    }
}

/// Result of the closed-chain spectral decomposition.
#[derive(Debug, Clone, Copy)]
pub struct ClosedChain {
    pub f_plus: SpinMat,
    pub f_minus: SpinMat,
    pub d: C,
    /// `2ξ² / (d + 2ξξ̄)`
    pub c: C,
    /// `-(d - 2ξξ̄) / (2ξ̄²)`
    pub c_alt: C,
}

/// A representation of the Dirac algebra. All operations that depend on the
/// choice of spinor basis go through this type.
#[derive(Debug, Clone)]
pub struct Clifford {
    gamma: [SpinMat; 4],
    gamma5: SpinMat,
}

impl Clifford {
    /// Dirac representation: `γ⁰ = diag(1,1,-1,-1)`, `γ^j = [[0, σ_j], [-σ_j, 0]]`.
    pub fn dirac() -> Self {
        let pauli: [[[C; 2]; 2]; 3] = [
            [[ZERO, ONE], [ONE, ZERO]],
            [[ZERO, -I], [I, ZERO]],
            [[ONE, ZERO], [ZERO, -ONE]],
        ];
        let g0 = SpinMat::diag([ONE, ONE, -ONE, -ONE]);
        let mut gamma = [g0, SpinMat::zero(), SpinMat::zero(), SpinMat::zero()];
        for (j, s) in pauli.iter().enumerate() {
            let mut m = SpinMat::zero();
            for a in 0..2 {
                for b in 0..2 {
                    m.0[a][b + 2] = s[a][b];
                    m.0[a + 2][b] = -s[a][b];
                }
            }
            gamma[j + 1] = m;
        }
        let gamma5 = (gamma[0] * gamma[1] * gamma[2] * gamma[3]).scale(I);
        Clifford { gamma, gamma5 }
    }

    /// Shared Dirac representation.
    pub fn standard() -> &'static Clifford {
        static STD: OnceLock<Clifford> = OnceLock::new();
        STD.get_or_init(Clifford::dirac)
    }

    /// The representation `γ ↦ S γ S†` for a unitary `S`.
    pub fn conjugated(&self, s: &SpinMat) -> Self {
        let sd = s.dagger();
        let gamma = self.gamma.map(|g| *s * g * sd);
        Clifford {
            gamma,
            gamma5: *s * self.gamma5 * sd,
        }
    }

    pub fn gamma(&self, mu: usize) -> &SpinMat {
        &self.gamma[mu]
    }

    pub fn gamma5(&self) -> &SpinMat {
        &self.gamma5
    }

    /// `σ^{jk} = (i/2)[γ^j, γ^k]`
    pub fn sigma(&self, j: usize, k: usize) -> SpinMat {
        self.gamma[j].commutator(&self.gamma[k]).scale(C::new(0.0, 0.5))
    }

    pub fn chi(&self, c: Chirality) -> SpinMat {
        let s = match c {
            Chirality::L => -0.5,
            Chirality::R => 0.5,
        };
        SpinMat::identity().scale_re(0.5) + self.gamma5.scale_re(s)
    }

    /// `ξ̸ = γ^μ ξ_μ`
    pub fn slash(&self, xi: &CFourVec) -> SpinMat {
        let mut m = SpinMat::zero();
        for mu in 0..4 {
            m += self.gamma[mu].scale(xi[mu] * ETA[mu]);
        }
        m
    }

    pub fn slash_real(&self, p: &FourVec) -> SpinMat {
        self.slash(&to_complex4(p))
    }

    /// Spin scalar product `≺ψ|φ≻ = ψ† γ⁰ φ`.
    pub fn spin_inner(&self, psi: &Spinor, phi: &Spinor) -> C {
        let g0phi = self.gamma[0].apply(phi);
        psi.iter().zip(g0phi.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// Adjoint with respect to the spin scalar product, `γ⁰ M† γ⁰`.
    pub fn spin_adjoint(&self, m: &SpinMat) -> SpinMat {
        self.gamma[0] * m.dagger() * self.gamma[0]
    }

    /// The operator `|a≻≺b|`, i.e. `a b† γ⁰`.
    pub fn ket_bra(&self, a: &Spinor, b: &Spinor) -> SpinMat {
        SpinMat::outer(a, b) * self.gamma[0]
    }

    pub fn closed_chain_projectors(&self, xi: &CFourVec) -> Result<ClosedChain, CliffordError> {
        let xib = conj4(xi);
        let xx = mink(xi, &xib);
        let z = mink(xi, xi);
        let zb = mink(&xib, &xib);
        let d = (xx * xx - z * zb).sqrt() * 2.0;
        let scale: f64 = xi.iter().map(|c| c.norm_sqr()).sum();
        let threshold = 1e-9 * scale;
        if d.norm() <= threshold {
            return Err(CliffordError::DegenerateChain {
                d_abs: d.norm(),
                threshold,
            });
        }
        let comm = self.slash(xi).commutator(&self.slash(&xib)).scale(d.inv());
        let half = SpinMat::identity().scale_re(0.5);
        Ok(ClosedChain {
            f_plus: half + comm.scale_re(0.5),
            f_minus: half - comm.scale_re(0.5),
            d,
            c: z * 2.0 / (d + xx * 2.0),
            c_alt: -(d - xx * 2.0) / (zb * 2.0),
        })
    }

    /// The six traces `Tr((1+s₁iγ⁰)γ^α ∇P)` and `Tr(γ⁵(1+s₂γ⁰)γ^α ∇P)`, α = 1,2,3.
    pub fn conscond_traces(&self, nabla_p: &SpinMat, s1: Sign, s2: Sign) -> [C; 6] {
        let one = SpinMat::identity();
        let a = one + self.gamma[0].scale(I * s1.value());
        let b = self.gamma5 * (one + self.gamma[0].scale_re(s2.value()));
        let mut out = [ZERO; 6];
        for al in 1..4 {
            out[al - 1] = (a * self.gamma[al] * *nabla_p).trace();
            out[al + 2] = (b * self.gamma[al] * *nabla_p).trace();
        }
        out
    }

    pub fn conscond_check(&self, nabla_p: &SpinMat, s1: Sign, s2: Sign) -> bool {
        let tol = 1e-10 * nabla_p.norm().max(1.0);
        self.conscond_traces(nabla_p, s1, s2)
            .iter()
            .all(|t| t.norm() <= tol)
    }

    /// `γ⁰g + (1 - sign·iγ⁰)(a⃗·γ⃗) + α·1 + γ⁵γ⁰h + β·iγ⁵`
    pub fn chiral_jet(&self, g: C, h: C, a: [C; 3], alpha: C, beta: C, sign: Sign) -> SpinMat {
        self.conscond_ansatz(g, h, a, [ZERO; 3], alpha, beta, sign, Sign::Plus)
    }

    /// General solution of the conservation conditions:
    /// `γ⁰g + (1 - s₁iγ⁰)(a⃗·γ⃗) + α·1 + γ⁵γ⁰h + γ⁵(1 - s₂γ⁰)(b⃗·γ⃗) + β·iγ⁵`.
    #[allow(clippy::too_many_arguments)]
    pub fn conscond_ansatz(
        &self,
        g: C,
        h: C,
        a: [C; 3],
        b: [C; 3],
        alpha: C,
        beta: C,
        s1: Sign,
        s2: Sign,
    ) -> SpinMat {
        let one = SpinMat::identity();
        let g0 = self.gamma[0];
        let adotg = self.spatial_dot(&a);
        let bdotg = self.spatial_dot(&b);
        g0.scale(g)
            + (one - g0.scale(I * s1.value())) * adotg
            + one.scale(alpha)
            + (self.gamma5 * g0).scale(h)
            + self.gamma5 * (one - g0.scale_re(s2.value())) * bdotg
            + self.gamma5.scale(I * beta)
    }

    /// `a⃗·γ⃗ = Σ_α a_α γ^α`
    pub fn spatial_dot(&self, a: &[C; 3]) -> SpinMat {
        let mut m = SpinMat::zero();
        for al in 0..3 {
            m += self.gamma[al + 1].scale(a[al]);
        }
        m
    }

    /// Returns `(Tr(σ^{0α}{∇P,∇P*}), -sign·Tr(γ^α{∇P,∇P*}))` for α = 1,2,3.
    pub fn anticomm_trace_equiv(
        &self,
        nabla_p: &SpinMat,
        nabla_p_star: &SpinMat,
        sign: Sign,
    ) -> Result<([C; 3], [C; 3]), CliffordError> {
        let ok = self.conscond_check(nabla_p, sign, Sign::Plus)
            || self.conscond_check(nabla_p, sign, Sign::Minus);
        if !ok {
            return Err(CliffordError::ChiralityViolated);
        }
        let ac = nabla_p.anticommutator(nabla_p_star);
        let mut lhs = [ZERO; 3];
        let mut rhs = [ZERO; 3];
        for al in 1..4 {
            lhs[al - 1] = (self.sigma(0, al) * ac).trace();
            rhs[al - 1] = (self.gamma[al] * ac).trace() * (-sign.value());
        }
        Ok((lhs, rhs))
    }
}

/// Unitary matrix from Gram–Schmidt orthonormalisation of the columns of `m`.
pub fn gram_schmidt_unitary(m: &SpinMat) -> SpinMat {
    let mut cols: Vec<Spinor> = (0..4).map(|j| [m.0[0][j], m.0[1][j], m.0[2][j], m.0[3][j]]).collect();
    for j in 0..4 {
        for k in 0..j {
            let proj: C = (0..4).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..4 {
                let v = cols[k][i];
                cols[j][i] -= proj * v;
            }
        }
        let n = spinor_norm(&cols[j]);
        cols[j] = spinor_scale(&cols[j], C::from(1.0 / n));
    }
    let mut u = SpinMat::zero();
    for j in 0..4 {
        for i in 0..4 {
            u.0[i][j] = cols[j][i];
        }
    }
    u
}
