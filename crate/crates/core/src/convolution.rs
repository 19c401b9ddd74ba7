//! Convolutions of light-cone and mass-cone distributions with a mass-shell
//! delta: closed forms, their one-dimensional proof-level reductions, and the
//! near-shell scaling fits.

use crate::clifford::{mink_real, FourVec};
use crate::quad::{integrate, gauss_legendre, QuadError};
use num_complex::Complex64 as C;
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConvError {
    #[error("q² = {q2} is not timelike")]
    SpacelikeQ { q2: f64 },
    #[error("q = {q:?} is not inside the open upper mass cone")]
    OutsideUpperCone { q: FourVec },
    #[error("mass must be positive, got {m}")]
    InvalidMass { m: f64 },
    #[error(transparent)]
    QuadratureNotConverged(#[from] QuadError),
    #[error("scaling fit unstable: {0}")]
    FitUnstable(String),
}

pub type Sampler<'a> = &'a dyn Fn(&FourVec) -> C;

/// Momentum q, mass m and an optional test function h (default ≡ 1), which
/// enters the leading terms only through h(−q).
#[derive(Clone, Copy)]
pub struct ShellIntegralQuery<'a> {
    pub q: FourVec,
    pub m: f64,
    pub h: Option<Sampler<'a>>,
}

impl<'a> ShellIntegralQuery<'a> {
    pub fn new(q: FourVec, m: f64) -> Self {
        ShellIntegralQuery { q, m, h: None }
    }

    pub fn with_h(mut self, h: Sampler<'a>) -> Self {
        self.h = Some(h);
        self
    }

    fn h_at_minus_q(&self) -> C {
        match self.h {
            Some(h) => h(&self.q.map(|x| -x)),
            None => C::new(1.0, 0.0),
        }
    }

    fn check_mass(&self) -> Result<(), ConvError> {
        if self.m > 0.0 && self.m.is_finite() {
            Ok(())
        } else {
            Err(ConvError::InvalidMass { m: self.m })
        }
    }

    fn check_upper_cone(&self) -> Result<(), ConvError> {
        self.check_mass()?;
        if mink_real(&self.q, &self.q) > 0.0 && self.q[0] > 0.0 {
            Ok(())
        } else {
            Err(ConvError::OutsideUpperCone { q: self.q })
        }
    }
}

fn spatial_norm(q: &FourVec) -> f64 {
    (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt()
}

/// ∫d⁴p/(2π)⁴ K̂₀(p) δ((p−q)²−m²) h(p−q) to leading order:
/// (1/32π³)·((q²−m²)/q²)·ε(q⁰)·h(−q).
pub fn conv_k0_shell(query: &ShellIntegralQuery) -> Result<C, ConvError> {
    query.check_mass()?;
    let q2 = mink_real(&query.q, &query.q);
    if q2 <= 0.0 {
        return Err(ConvError::SpacelikeQ { q2 });
    }
    let m2 = query.m * query.m;
    let value = (q2 - m2) / q2 * query.q[0].signum() / (32.0 * PI.powi(3));
    Ok(query.h_at_minus_q() * value)
}

/// Real roots of a continuous function on `[lo, hi]`: sign changes on a
/// uniform grid, refined by bisection to machine precision.
fn bracketed_roots(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    let h = (hi - lo) / cells as f64;
    let mut roots = Vec::new();
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..=cells {
        let b = lo + i as f64 * h;
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut x0, mut x1, mut f0) = (a, b, fa);
            while x1 - x0 > f64::EPSILON * x0.abs().max(x1.abs()).max(1e-300) {
                let mid = 0.5 * (x0 + x1);
                if mid <= x0 || mid >= x1 {
                    break;
                }
                let fm = f(mid);
                if fm == 0.0 {
                    x0 = mid;
                    x1 = mid;
                    break;
                }
                if f0 * fm < 0.0 {
                    x1 = mid;
                } else {
                    x0 = mid;
                    f0 = fm;
                }
            }
            roots.push(0.5 * (x0 + x1));
        }
        a = b;
        fa = fb;
    }
    roots
}

/// Rest-frame reduction q = (Ω, 0⃗), h ≡ 1:
/// (4π/(2π)⁴) ∫dω ∫k²dk δ(ω²−k²) ε(ω) δ((ω−Ω)²−k²−m²).
/// The first delta fixes k = |ω| with Jacobian 1/(2k); the remaining
/// δ(g(ω)) is resolved by locating the roots of g numerically and dividing by
/// |g′| from the chain rule.
pub fn conv_k0_shell_oracle(omega: f64, m: f64) -> C {
    let k_of = |w: f64| w.abs();
    let dk_of = |w: f64| w.signum();
    let g = |w: f64| (w - omega).powi(2) - k_of(w).powi(2) - m * m;
    let dg = |w: f64| 2.0 * (w - omega) - 2.0 * k_of(w) * dk_of(w);
    let reach = 4.0 * (omega.abs() + m) + (omega * omega + m * m) / omega.abs().max(1e-300);
    let mut total = 0.0;
    for w in bracketed_roots(&g, -reach, reach, 4096) {
        let k = k_of(w);
        if k == 0.0 {
            continue;
        }
        let weight = k * k * w.signum() / (2.0 * k) / dg(w).abs();
        total += weight;
    }
    C::new(4.0 * PI / (2.0 * PI).powi(4) * total, 0.0)
}

/// Curly bracket of the mass-cone convolution:
/// ℓ_max/16π³ + (m²/32π³|q⃗|)·log((q⁰−|q⃗|−ℓ)/(q⁰+|q⃗|−ℓ))|₀^{ℓ_max},
/// with the analytic |q⃗| → 0 limit −2/(q⁰−ℓ) of the log term.
pub fn masscone_bracket(q: &FourVec, m: f64) -> Result<f64, ConvError> {
    ShellIntegralQuery::new(*q, m).check_upper_cone()?;
    let qs = spatial_norm(q);
    let q0 = q[0];
    let lmax = q0 - (qs * qs + m * m).sqrt();
    let log_term = |l: f64| -> f64 {
        if qs < 1e-6 * m {
            -2.0 / (q0 - l)
        } else {
            ((q0 - qs - l) / (q0 + qs - l)).ln() / qs
        }
    };
    let pi3 = PI.powi(3);
    Ok(lmax / (16.0 * pi3) + m * m / (32.0 * pi3) * (log_term(lmax) - log_term(0.0)))
}

/// ∫d⁴p/(2π)⁴ Θ(p²)/|p⃗| δ((p−q)²−m²) Θ(q⁰−p⁰) h(p−q) to leading order.
pub fn conv_masscone_shell(query: &ShellIntegralQuery) -> Result<C, ConvError> {
    query.check_upper_cone()?;
    Ok(query.h_at_minus_q() * masscone_bracket(&query.q, query.m)?)
}

/// ℓ-integral of the proof: (1/16π³)∫₀^{ℓ_max}((q−l)²−m²)/(q−l)² dℓ for
/// q² ≥ m², and (1/16π³)∫_{ℓ_max}^0 (m²−(q−l)²)/(q−l)² dℓ (ℓ_max < 0) for
/// q² < m², with l = (ℓ, 0⃗).
pub fn conv_masscone_shell_oracle(query: &ShellIntegralQuery) -> Result<f64, ConvError> {
    query.check_upper_cone()?;
    let (q, m) = (query.q, query.m);
    let qs2 = q[1] * q[1] + q[2] * q[2] + q[3] * q[3];
    let lmax = q[0] - (qs2 + m * m).sqrt();
    let r2 = |l: f64| (q[0] - l).powi(2) - qs2;
    let pi3 = PI.powi(3);
    if lmax >= 0.0 {
        let v = integrate(|l: f64| (r2(l) - m * m) / r2(l), 0.0, lmax, 1e-15, 1e-13)?;
        Ok(v / (16.0 * pi3))
    } else {
        let v = integrate(|l: f64| (m * m - r2(l)) / r2(l), lmax, 0.0, 1e-15, 1e-13)?;
        Ok(v / (16.0 * pi3))
    }
}

/// Shell integrals ∫d⁴p/(2π)⁴ w(p) δ(p²) Θ(±p⁰) δ((p−r)²−m²) for w = 1 and
/// w = p⁰, as 1D integrals over k = |p⃗| after resolving the angular delta.
/// With D = ±(r²−m²) > 0 the admissible k fill [D/2(r⁰+R), D/2(r⁰−R)],
/// R = |r⃗|, and the angular Jacobian gives
/// (1/32π³R)∫dk w = (D/32π³r²)·⟨w⟩ over that interval.
fn null_shell_moments(r0: f64, rs: f64, m: f64, future: bool) -> (f64, f64) {
    let r2 = r0 * r0 - rs * rs;
    let s = if future { 1.0 } else { -1.0 };
    let d = s * (r2 - m * m);
    if d <= 0.0 || r2 <= 0.0 || r0 <= 0.0 {
        return (0.0, 0.0);
    }
    let (k_lo, k_hi) = (d / (2.0 * (r0 + rs)), d / (2.0 * (r0 - rs)));
    let (x, w) = gauss_legendre(4);
    let mean_k: f64 = x
        .iter()
        .zip(&w)
        .map(|(x, w)| 0.5 * w * (k_lo + 0.5 * (k_hi - k_lo) * (x + 1.0)))
        .sum();
    let pref = d / (32.0 * PI.powi(3) * r2);
    (pref, pref * s * mean_k)
}

/// ∫d⁴p/(2π)⁴ Θ(p²) (ω/|p⃗|) δ((p−q)²−m²) Θ(q⁰−p⁰) with ω = p⁰, through the
/// substitution Θ(p²)/|p⃗| = 2∫dℓ δ((p−l)²)Θ(±(p−l)⁰): an outer ℓ-integral of
/// the shifted shell moments, ω = p⁰ + ℓ.
pub fn conv_omega_weighted(q: &FourVec, m: f64) -> Result<f64, ConvError> {
    omega_weighted_parts(q, m).map(|(_, w)| w)
}

/// Same reduction without the ω factor; reproduces the mass-cone bracket.
pub fn conv_masscone_reduced(q: &FourVec, m: f64) -> Result<f64, ConvError> {
    omega_weighted_parts(q, m).map(|(c, _)| c)
}

fn omega_weighted_parts(q: &FourVec, m: f64) -> Result<(f64, f64), ConvError> {
    ShellIntegralQuery::new(*q, m).check_upper_cone()?;
    let rs = spatial_norm(q);
    let lmax = q[0] - (rs * rs + m * m).sqrt();
    let future = lmax >= 0.0;
    let (lo, hi) = if future { (0.0, lmax) } else { (lmax, 0.0) };
    let plain = integrate(|l: f64| 2.0 * null_shell_moments(q[0] - l, rs, m, future).0, lo, hi, 1e-300, 1e-13)?;
    let weighted = integrate(
        |l: f64| {
            let (i0, iw) = null_shell_moments(q[0] - l, rs, m, future);
            2.0 * (iw + l * i0)
        },
        lo,
        hi,
        1e-300,
        1e-13,
    )?;
    Ok((plain, weighted))
}

/// Momenta q = (√(m²+δ+|q⃗|²), q⃗) with q² − m² = δ for each δ.
pub fn approach_shell(m: f64, qvec: [f64; 3], deltas: &[f64]) -> Vec<FourVec> {
    let qs2 = qvec.iter().map(|x| x * x).sum::<f64>();
    deltas
        .iter()
        .map(|d| [(m * m + d + qs2).sqrt(), qvec[0], qvec[1], qvec[2]])
        .collect()
}

/// Least-squares slope of log|value| against log|q²−m²|.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub offsets: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn fit_power_law(offsets: &[f64], values: &[f64]) -> Result<ScalingFit, ConvError> {
    if offsets.len() < 2 || offsets.len() != values.len() {
        return Err(ConvError::FitUnstable(format!(
            "need at least two paired samples, got {} and {}",
            offsets.len(),
            values.len()
        )));
    }
    let mut xs = Vec::with_capacity(offsets.len());
    let mut ys = Vec::with_capacity(offsets.len());
    for (&d, &v) in offsets.iter().zip(values) {
        if d == 0.0 || v == 0.0 || !d.is_finite() || !v.is_finite() {
            return Err(ConvError::FitUnstable(format!("sample ({d}, {v}) has no logarithm")));
        }
        xs.push(d.abs().ln());
        ys.push(v.abs().ln());
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx < 1e-12 {
        return Err(ConvError::FitUnstable("offsets do not vary".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(ScalingFit {
        slope,
        intercept: my - slope * mx,
        offsets: offsets.to_vec(),
        values: values.to_vec(),
    })
}

/// Fitted exponent of the ω-weighted shell integral along `q_sequence`.
pub fn conv_omega_scaling(q_sequence: &[FourVec], m: f64) -> Result<ScalingFit, ConvError> {
    let offsets: Vec<f64> = q_sequence.iter().map(|q| mink_real(q, q) - m * m).collect();
    let values = q_sequence
        .iter()
        .map(|q| conv_omega_weighted(q, m))
        .collect::<Result<Vec<_>, _>>()?;
    fit_power_law(&offsets, &values)
}

/// Fitted exponent of the mass-cone bracket along `q_sequence`.
pub fn masscone_scaling(q_sequence: &[FourVec], m: f64) -> Result<ScalingFit, ConvError> {
    let offsets: Vec<f64> = q_sequence.iter().map(|q| mink_real(q, q) - m * m).collect();
    let values = q_sequence
        .iter()
        .map(|q| masscone_bracket(q, m))
        .collect::<Result<Vec<_>, _>>()?;
    fit_power_law(&offsets, &values)
}

/// CSV rows `kind,q0,q1,q2,q3,m,closed,oracle,rel_err` comparing each closed
/// form with its reduction. The K₀ rows use the rest frame of q.
pub fn convolution_table(queries: &[(FourVec, f64)]) -> Result<String, ConvError> {
    let mut out = String::from("kind,q0,q1,q2,q3,m,closed,oracle,rel_err\n");
    let rel = |a: f64, b: f64| if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() };
    for &(q, m) in queries {
        let query = ShellIntegralQuery::new(q, m);
        let q2 = mink_real(&q, &q);
        if q2 > 0.0 {
            let closed = conv_k0_shell(&query)?.re;
            let oracle = conv_k0_shell_oracle(q[0].signum() * q2.sqrt(), m).re;
            let _ = writeln!(
                out,
                "k0_shell,{},{},{},{},{m},{closed:.15e},{oracle:.15e},{:.3e}",
                q[0],
                q[1],
                q[2],
                q[3],
                rel(closed, oracle)
            );
        }
        if q2 > 0.0 && q[0] > 0.0 {
            let closed = conv_masscone_shell(&query)?.re;
            let oracle = conv_masscone_shell_oracle(&query)?;
            let _ = writeln!(
                out,
                "masscone_shell,{},{},{},{},{m},{closed:.15e},{oracle:.15e},{:.3e}",
                q[0],
                q[1],
                q[2],
                q[3],
                rel(closed, oracle)
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pi3() -> f64 {
        PI.powi(3)
    }

    #[test]
    fn k0_shell_examples() {
        let v = conv_k0_shell(&ShellIntegralQuery::new([2.0, 0.0, 0.0, 0.0], 1.0)).unwrap();
        assert!((v.re - 3.0 / (128.0 * pi3())).abs() < 1e-15 && v.im == 0.0);
        let v = conv_k0_shell(&ShellIntegralQuery::new([-2.0, 0.0, 0.0, 0.0], 1.0)).unwrap();
        assert!((v.re + 3.0 / (128.0 * pi3())).abs() < 1e-15);
        let v = conv_k0_shell(&ShellIntegralQuery::new([1.0, 0.0, 0.0, 0.0], 1.0)).unwrap();
        assert_eq!(v.re, 0.0);
        assert!(matches!(
            conv_k0_shell(&ShellIntegralQuery::new([1.0, 2.0, 0.0, 0.0], 1.0)),
            Err(ConvError::SpacelikeQ { .. })
        ));
    }

    #[test]
    fn k0_shell_uses_test_function_at_minus_q() {
        let h = |p: &FourVec| C::new(p[0], p[1]);
        let q = [2.0, 0.5, 0.0, 0.0];
        let plain = conv_k0_shell(&ShellIntegralQuery::new(q, 1.0)).unwrap();
        let v = conv_k0_shell(&ShellIntegralQuery::new(q, 1.0).with_h(&h)).unwrap();
        assert!((v - plain * C::new(-2.0, -0.5)).norm() < 1e-16);
    }

    #[test]
    fn k0_oracle_examples() {
        let closed = conv_k0_shell(&ShellIntegralQuery::new([2.0, 0.0, 0.0, 0.0], 1.0)).unwrap();
        assert!((conv_k0_shell_oracle(2.0, 1.0) - closed).norm() < 1e-12 * closed.norm());
        assert!((conv_k0_shell_oracle(-2.0, 1.0) + closed).norm() < 1e-12 * closed.norm());
        assert!(conv_k0_shell_oracle(1.0, 1.0).norm() < 1e-15);
    }

    #[test]
    fn bracketed_roots_find_simple_roots() {
        let r = bracketed_roots(&|x| (x - 0.3) * (x + 1.7), -5.0, 5.0, 100);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 1.7).abs() < 1e-14 && (r[1] - 0.3).abs() < 1e-14);
    }

    #[test]
    fn masscone_examples() {
        let q = [2.0, 0.0, 0.0, 0.0];
        let b = masscone_bracket(&q, 1.0).unwrap();
        assert!((b - 1.0 / (32.0 * pi3())).abs() < 1e-12 * b);
        let o = conv_masscone_shell_oracle(&ShellIntegralQuery::new(q, 1.0)).unwrap();
        assert!((o - 1.0 / (32.0 * pi3())).abs() < 1e-12 * o);
        let on_shell = [2.0_f64.sqrt(), 1.0, 0.0, 0.0];
        assert!(masscone_bracket(&on_shell, 1.0).unwrap().abs() < 1e-14);
        assert!(conv_masscone_shell_oracle(&ShellIntegralQuery::new(on_shell, 1.0)).unwrap().abs() < 1e-14);
        assert!(matches!(
            masscone_bracket(&[-2.0, 0.0, 0.0, 0.0], 1.0),
            Err(ConvError::OutsideUpperCone { .. })
        ));
    }

    #[test]
    fn masscone_closed_form_matches_oracle_on_both_sides_of_the_shell() {
        for q in [[1.5, 0.5, 0.0, 0.0], [2.0, 1.0, 0.0, 0.0], [0.9, 0.3, -0.2, 0.1], [0.5, 0.0, 0.0, 0.0]] {
            let query = ShellIntegralQuery::new(q, 1.0);
            let c = conv_masscone_shell(&query).unwrap().re;
            let o = conv_masscone_shell_oracle(&query).unwrap();
            assert!((c - o).abs() < 1e-10 * o.abs(), "q={q:?}: {c} vs {o}");
            assert!(o > 0.0);
        }
    }

    #[test]
    fn small_spatial_momentum_limit_is_continuous() {
        let a = masscone_bracket(&[2.0, 1e-7, 0.0, 0.0], 1.0).unwrap();
        let b = masscone_bracket(&[2.0, 2e-6, 0.0, 0.0], 1.0).unwrap();
        assert!((a - b).abs() < 1e-9 * a);
    }

    #[test]
    fn reduced_integral_reproduces_bracket() {
        for q in [[2.0, 0.0, 0.0, 0.0], [1.5, 0.5, 0.0, 0.0], [0.9, 0.3, -0.2, 0.1]] {
            let r = conv_masscone_reduced(&q, 1.0).unwrap();
            let b = masscone_bracket(&q, 1.0).unwrap();
            assert!((r - b).abs() < 1e-10 * b, "q={q:?}: {r} vs {b}");
        }
    }

    #[test]
    fn omega_weighted_rest_frame_closed_form() {
        // Covariance gives ∫p^μ δ(p²)Θ(p⁰)δ((p−r)²−m²) ∝ r^μ with p·r = (r²−m²)/2, so the
        // ω-moment is r⁰(r²−m²)²/(64π³r⁴); integrate it over ℓ by Simpson.
        let (q0, m) = (1.2_f64, 1.0_f64);
        let lmax = q0 - m;
        let f = |l: f64| {
            let r0 = q0 - l;
            let r2 = r0 * r0;
            let i0 = (r2 - m * m) / (32.0 * pi3() * r2);
            let iw = r0 * (r2 - m * m).powi(2) / (64.0 * pi3() * r2 * r2);
            2.0 * (iw + l * i0)
        };
        let n = 2000;
        let h = lmax / n as f64;
        let mut s = f(0.0) + f(lmax);
        for k in 1..n {
            s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        let simpson = s * h / 3.0;
        let v = conv_omega_weighted(&[q0, 0.0, 0.0, 0.0], m).unwrap();
        assert!((v - simpson).abs() < 1e-10 * simpson, "{v} vs {simpson}");
    }

    #[test]
    fn scaling_exponents() {
        let qs = approach_shell(1.0, [0.4, 0.0, 0.3], &[0.1, 0.05, 0.025, 0.0125]);
        let w = conv_omega_scaling(&qs, 1.0).unwrap();
        assert!(w.slope >= 2.9 && w.slope <= 3.3, "slope {}", w.slope);
        let b = masscone_scaling(&qs, 1.0).unwrap();
        assert!(b.slope >= 1.9 && b.slope <= 2.1, "slope {}", b.slope);
        assert_eq!(conv_omega_weighted(&approach_shell(1.0, [0.4, 0.0, 0.3], &[0.0])[0], 1.0).unwrap(), 0.0);
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        assert!(matches!(fit_power_law(&[0.1], &[1.0]), Err(ConvError::FitUnstable(_))));
        assert!(matches!(fit_power_law(&[0.1, 0.05], &[1.0, 0.0]), Err(ConvError::FitUnstable(_))));
        assert!(matches!(fit_power_law(&[0.1, 0.1], &[1.0, 2.0]), Err(ConvError::FitUnstable(_))));
        let f = fit_power_law(&[1.0, 2.0, 4.0], &[3.0, 12.0, 48.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 3.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn table_has_header_and_rows() {
        let t = convolution_table(&[([2.0, 0.0, 0.0, 0.0], 1.0), ([1.0, 2.0, 0.0, 0.0], 1.0)]).unwrap();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "kind,q0,q1,q2,q3,m,closed,oracle,rel_err");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("k0_shell,2,0,0,0,1,"));
        assert!(lines[2].starts_with("masscone_shell,2,"));
        assert_eq!(convolution_table(&[]).unwrap().lines().count(), 1);
    }
}
