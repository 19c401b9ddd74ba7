//! One PASS/FAIL line per acceptance criterion.

use num_complex::Complex64 as C;
use num_rational::Rational64 as R;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sli::clifford::{gram_schmidt_unitary, mink_real, Clifford, FourVec, Sign, SpinMat};
use sli::convolution::{
    approach_shell, conv_k0_shell, conv_k0_shell_oracle, conv_masscone_shell, conv_masscone_shell_oracle,
    conv_omega_weighted, masscone_bracket, ShellIntegralQuery,
};
use sli::fields::{conscond_jet, counterexample_jets, transverse_polarization, BoxSetting, DiracMode, FermionicJet, JetComponent, MaxwellField, MaxwellMode};
use sli::kernels::{eval_hat, mollified_oracle_fit, KernelId};
use sli::lineint::{eval_piecewise_exact, jtilde_residual, LineFn};
use sli::slayer::*;
use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xACCE_97A4 ^ salt)
}

fn cplx(r: &mut ChaCha8Rng) -> C {
    C::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

fn sign(r: &mut ChaCha8Rng) -> Sign {
    if r.gen_bool(0.5) {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

fn lattice(r: &mut ChaCha8Rng) -> [i64; 3] {
    [r.gen_range(-2..=2), r.gen_range(-2..=2), r.gen_range(-2..=2)]
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Least-squares slope of `ln|y|` against `ln|x|`.
fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.abs().ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn maxwell_at(s: &BoxSetting, r: &mut ChaCha8Rng, points: &[[i64; 3]], gauge: bool) -> MaxwellField {
    MaxwellField::new(
        points
            .iter()
            .map(|&n| {
                let sh = sign(r);
                let k = s.momentum(n);
                let p = [sh.value() * norm3(k), k[0], k[1], k[2]];
                let lambda = if gauge { cplx(r) } else { C::from(0.0) };
                MaxwellMode::new(s, n, sh, transverse_polarization(&p, cplx(r), cplx(r), lambda)).unwrap()
            })
            .collect(),
    )
}

fn nonzero_points(r: &mut ChaCha8Rng, count: usize) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    while out.len() < count {
        let n = lattice(r);
        if n != [0, 0, 0] {
            out.push(n);
        }
    }
    out
}

fn sea_jet(s: &BoxSetting, r: &mut ChaCha8Rng) -> FermionicJet {
    let components = (0..2)
        .map(|_| JetComponent {
            psi: (0..2).map(|_| DiracMode::from_basis(s, Sign::Minus, lattice(r), [cplx(r), cplx(r)])).collect(),
            delta_psi: vec![DiracMode::from_basis(s, Sign::Plus, lattice(r), [cplx(r), cplx(r)])],
        })
        .collect();
    FermionicJet { components }
}

fn conscond_at(s: &BoxSetting, r: &mut ChaCha8Rng, momenta: &[[i64; 3]]) -> FermionicJet {
    loop {
        if let Ok(j) = conscond_jet(s, sign(r), momenta, &[cplx(r), cplx(r)]) {
            return j;
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst_k0: f64 = 0.0;
    let mut worst_cone: f64 = 0.0;
    let mut done = 0;
    while done < 100 {
        let m: f64 = r.gen_range(0.3..3.0);
        let q0: f64 = r.gen_range(0.2..5.0);
        let u: f64 = r.gen_range(0.0..0.95);
        let dir = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let dn = norm3(dir);
        let q: FourVec = [q0, u * q0 * dir[0] / dn, u * q0 * dir[1] / dn, u * q0 * dir[2] / dn];
        let q2 = mink_real(&q, &q);
        if dn < 1e-3 || (q2 - m * m).abs() < 0.05 * m * m {
            continue;
        }
        let query = ShellIntegralQuery::new(q, m);
        let cone = conv_masscone_shell(&query).unwrap().re;
        let cone_oracle = conv_masscone_shell_oracle(&query).unwrap();
        worst_cone = worst_cone.max((cone - cone_oracle).abs() / cone_oracle.abs());
        let omega = if r.gen_bool(0.5) { q2.sqrt() } else { -q2.sqrt() };
        let k0 = conv_k0_shell(&ShellIntegralQuery::new([omega, 0.0, 0.0, 0.0], m)).unwrap().re;
        let k0_oracle = conv_k0_shell_oracle(omega, m).re;
        worst_k0 = worst_k0.max((k0 - k0_oracle).abs() / k0_oracle.abs());
        done += 1;
    }
    let target = 1.0 / (32.0 * PI.powi(3));
    let anchor = conv_masscone_shell(&ShellIntegralQuery::new([2.0, 0.0, 0.0, 0.0], 1.0)).unwrap().re;
    let anchor_err = (anchor - target).abs() / target;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_k0 < 1e-10 && worst_cone < 1e-10 && anchor_err < 1e-12 && secs < 5.0,
        format!("K0 rel {worst_k0:.1e}, mass cone rel {worst_cone:.1e}, anchor rel {anchor_err:.1e}, {secs:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let deltas = [0.1, 0.05, 0.025, 0.0125];
    let mut omega_min = f64::INFINITY;
    let mut bracket = (f64::INFINITY, f64::NEG_INFINITY);
    for qvec in [[0.0, 0.0, 0.0], [0.4, 0.0, 0.3], [1.0, -0.5, 0.2]] {
        let qs = approach_shell(1.0, qvec, &deltas);
        let offs: Vec<f64> = qs.iter().map(|q| mink_real(q, q) - 1.0).collect();
        let w: Vec<f64> = qs.iter().map(|q| conv_omega_weighted(q, 1.0).unwrap()).collect();
        let b: Vec<f64> = qs.iter().map(|q| masscone_bracket(q, 1.0).unwrap()).collect();
        omega_min = omega_min.min(loglog_slope(&offs, &w));
        let sb = loglog_slope(&offs, &b);
        bracket = (bracket.0.min(sb), bracket.1.max(sb));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        omega_min >= 2.9 && bracket.0 >= 1.9 && bracket.1 <= 2.1 && secs < 10.0,
        format!("ω-weighted exponent ≥ {omega_min:.3}, bracket exponents in [{:.3}, {:.3}], {secs:.2} s", bracket.0, bracket.1),
    )
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let one = R::one();
    let chi = |x: R| if x > R::zero() && x < one { one } else { R::zero() };
    let ev = eval_piecewise_exact;
    let (mut subtraction, mut compact, mut anti) = (0, 0, 0);
    let mut n = 0;
    while n < 10_000 {
        let q: i64 = r.gen_range(2..=97);
        let a = R::new(r.gen_range(-4 * q..=4 * q), q);
        let q: i64 = r.gen_range(2..=97);
        let b = R::new(r.gen_range(-4 * q..=4 * q), q);
        if a.is_zero() || b.is_zero() || a == one || b == one || a == b {
            continue;
        }
        n += 1;
        subtraction += usize::from(!jtilde_residual(a, b).is_zero());
        compact += usize::from(ev(LineFn::Jtilde, a, b) - ev(LineFn::U, a, b) != ev(LineFn::V, a, b) * chi(a) * chi(b));
        anti += usize::from(
            ev(LineFn::J, one - a, one - b) != -ev(LineFn::J, a, b)
                || ev(LineFn::U, b, a) != -ev(LineFn::U, a, b)
                || ev(LineFn::V, b, a) != -ev(LineFn::V, a, b),
        );
    }
    outcome(
        subtraction + compact + anti == 0,
        format!("failures: subtraction {subtraction}, compact {compact}, antisymmetry {anti} of 10000"),
    )
}

/// `(∂²_ω − ∂²_k − (2/k)∂_k) f` by centered differences.
fn wave_stencil(id: KernelId, w: f64, k: f64, h: f64) -> C {
    let f = |a: f64, b: f64| eval_hat(id, a, b).unwrap();
    let c = f(w, k);
    (f(w + h, k) - c * 2.0 + f(w - h, k)) / (h * h)
        - (f(w, k + h) - c * 2.0 + f(w, k - h)) / (h * h)
        - (f(w, k + h) - f(w, k - h)) / (h * k)
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut r = rng(4);
    let mut parity: f64 = 0.0;
    for id in KernelId::ALL {
        let mut done = 0;
        while done < 100 {
            let (w, k): (f64, f64) = (r.gen_range(-4.0..4.0), r.gen_range(0.1..4.0));
            if (w.abs() - k).abs() < 1e-3 {
                continue;
            }
            let (a, b) = (eval_hat(id, w, k).unwrap(), eval_hat(id, -w, k).unwrap());
            parity = parity.max((b - a * id.parity()).norm() / a.norm().max(1e-300));
            done += 1;
        }
    }
    // Residual bound: O(h²) truncation plus O(ε/h²) rounding.
    let h = 1e-3;
    let mut harmonic: f64 = 0.0;
    let scalar = [
        KernelId::IK0OverT,
        KernelId::IK0OverT2,
        KernelId::DeltaOverT,
        KernelId::DeltaOverT2,
        KernelId::XiK0OverT3,
        KernelId::XiXiK0OverT4,
        KernelId::XiXiDeltaOverT3,
    ];
    for id in scalar {
        let mut done = 0;
        while done < 20 {
            let (w, k): (f64, f64) = (r.gen_range(-3.0..3.0), r.gen_range(0.2..3.0));
            if (w.abs() - k).abs() < 0.1 || w.abs() < 0.1 {
                continue;
            }
            let size = eval_hat(id, w, k).unwrap().norm().max(1.0);
            harmonic = harmonic.max(wave_stencil(id, w, k, h).norm() / (size * (1e-2 * h * h + 1e-12 / (h * h))));
            done += 1;
        }
    }
    let points = [(0.3, 1.0), (0.5, 1.5), (1.8, 1.0), (-2.2, 1.2), (-0.4, 0.9), (2.5, 0.8)];
    let outside = [(0.3, 1.0), (0.5, 1.5), (-0.2, 0.9), (1.1, 1.6), (-0.6, 2.0), (0.0, 0.7)];
    let mut fits = Vec::new();
    let mut fit_ok = true;
    for (id, pts) in [
        (KernelId::IK0OverT, &points),
        (KernelId::IK0OverT2, &points),
        (KernelId::DeltaOverT, &points),
        (KernelId::DeltaOverT2, &points),
        (KernelId::XiK0OverT3, &outside),
    ] {
        let fit = mollified_oracle_fit(id, pts, 0.1, 60.0).unwrap();
        fit_ok &= fit.max_rel_residual < 0.01;
        fits.push(format!("{} {:.4}{:+.4}i", id.name(), fit.ratio.re, fit.ratio.im));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        parity < 1e-12 && harmonic <= 1.0 && fit_ok && secs < 60.0,
        format!("parity {parity:.1e}, harmonicity/bound {harmonic:.2}, constants [{}], {secs:.2} s", fits.join(", ")),
    )
}

fn criterion_5() -> Outcome {
    let s = BoxSetting::for_mass(1.0).unwrap();
    let k = Constants::default();
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    // Configurations with a nonzero value, per functional; σ_bose vanishes
    // when all paired modes share a shell.
    let mut nonzero = [0usize; 4];
    for _ in 0..20 {
        let pts = nonzero_points(&mut r, 3);
        let u = maxwell_at(&s, &mut r, &pts, true);
        let v = maxwell_at(&s, &mut r, &pts, true);
        for (i, res) in bose_results(&s, &u, &v, &k).unwrap().iter().enumerate() {
            worst = worst.max(res.conserved_drift);
            nonzero[i] += usize::from(res.value != 0.0);
        }
        let momenta = [[0, 0, 0], lattice(&mut r)];
        let u = conscond_at(&s, &mut r, &momenta);
        let v = conscond_at(&s, &mut r, &momenta);
        for (i, res) in fermi_results(&s, &u, &v, Sign::Plus, &k).unwrap().iter().enumerate() {
            worst = worst.max(res.conserved_drift);
            nonzero[2 + i] += usize::from(res.value != 0.0);
        }
    }
    let (cu, cv) = counterexample_jets(&s, [1, 0, 0]);
    let residual = fermi_conservation_residual(&s, &cu, &cv, 0.0);
    outcome(
        worst < 1e-10 && nonzero.iter().all(|&n| n >= 10) && residual.abs() > 1e-6,
        format!("max relative drift {worst:.1e}, nonzero configs (σ_b, ip_b, σ_f, ip_f) {nonzero:?} of 20, counterexample residual {residual:.4e}"),
    )
}

fn criterion_6() -> Outcome {
    let s = BoxSetting::for_mass(1.0).unwrap();
    let k = Constants::default();
    let mut r = rng(6);
    let mut most_negative: f64 = 0.0;
    for _ in 0..1000 {
        let pts = nonzero_points(&mut r, 2);
        let u = maxwell_at(&s, &mut r, &pts, false);
        most_negative = most_negative.max(-ip_bose(&s, &u, &u, &k).unwrap());
    }
    let mut gauge: f64 = 0.0;
    for _ in 0..20 {
        let n = nonzero_points(&mut r, 1)[0];
        let kk = s.momentum(n);
        let p = [norm3(kk), kk[0], kk[1], kk[2]];
        let lambda = cplx(&mut r);
        let g = MaxwellField::new(vec![MaxwellMode::new(&s, n, Sign::Plus, p.map(|x| lambda * x)).unwrap()]);
        let v = maxwell_at(&s, &mut r, &[n], false);
        gauge = gauge.max(ip_bose(&s, &g, &g, &k).unwrap().abs()).max(ip_bose(&s, &g, &v, &k).unwrap().abs());
    }
    let mut bracket_min = f64::INFINITY;
    let mut spurious = 0;
    for _ in 0..100_000 {
        let a: [f64; 3] = std::array::from_fn(|_| r.gen_range(-3.0..3.0));
        let b: [f64; 3] = std::array::from_fn(|_| r.gen_range(-3.0..3.0));
        let v = definiteness_bracket(a, b, 1.0);
        bracket_min = bracket_min.min(v);
        if v <= 1e-12 && norm3([a[0] + b[0], a[1] + b[1], a[2] + b[2]]) > 1e-6 {
            spurious += 1;
        }
    }
    let opposite = definiteness_bracket([0.3, -1.2, 0.7], [-0.3, 1.2, -0.7], 1.0).abs();
    let (mut pos, mut neg) = (0, 0);
    for _ in 0..1000 {
        let j = sea_jet(&s, &mut r);
        let v = ip_fermi(&s, &j, &j, Sign::Plus, &k).unwrap();
        pos += usize::from(v > 0.0);
        neg += usize::from(v < 0.0);
    }
    outcome(
        most_negative <= 0.0 && gauge < 1e-9 && bracket_min >= -1e-12 && spurious == 0 && opposite < 1e-12 && pos.min(neg) == 0,
        format!(
            "min (u,u)_bose {:.1e}, gauge {gauge:.1e}, bracket min {bracket_min:.1e} with {spurious} spurious zeros, (u,u)_fermi signs +{pos}/−{neg}",
            -most_negative
        ),
    )
}

fn criterion_7() -> Outcome {
    let cl = Clifford::standard();
    let mut r = rng(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let sg = sign(&mut r);
        let a = [cplx(&mut r), cplx(&mut r), cplx(&mut r)];
        let p = cl.chiral_jet(cplx(&mut r), cplx(&mut r), a, cplx(&mut r), cplx(&mut r), sg);
        let (l, rr) = cl.anticomm_trace_equiv(&p, &cl.spin_adjoint(&p), sg).unwrap();
        let scale = l.iter().map(|z| z.norm()).fold(1.0, f64::max);
        worst = worst.max((0..3).map(|i| (l[i] - rr[i]).norm()).fold(0.0, f64::max) / scale);
    }
    let (one, zero) = (C::from(1.0), C::from(0.0));
    let control = cl.conscond_ansatz(zero, zero, [one, zero, zero], [zero, one, zero], zero, zero, Sign::Plus, Sign::Plus);
    let detected = match cl.anticomm_trace_equiv(&control, &cl.spin_adjoint(&control), Sign::Plus) {
        Ok((l, rr)) => (0..3).map(|i| (l[i] - rr[i]).norm()).fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    let rejected = cl
        .anticomm_trace_equiv(&SpinMat(std::array::from_fn(|_| std::array::from_fn(|_| cplx(&mut r)))), &SpinMat::identity(), Sign::Plus)
        .is_err();
    outcome(
        worst < 1e-10 && detected > 1e-6 && rejected,
        format!("chiral mismatch {worst:.1e}, non-chiral control mismatch {detected:.3}, generic matrix rejected {rejected}"),
    )
}

fn criterion_8() -> Outcome {
    let s = BoxSetting::for_mass(1.0).unwrap();
    let mut r = rng(8);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let samples: Vec<SpectralSample> = (0..4)
            .map(|_| SpectralSample::from(&DiracMode::from_basis(&s, sign(&mut r), lattice(&mut r), [cplx(&mut r), cplx(&mut r)])))
            .collect();
        worst = worst.max(current_sli_support_check(&samples, false).value).max(current_sli_support_check(&samples, true).value);
    }
    let injected = [SpectralSample {
        p: [0.5, 2.0, 0.0, 0.0],
        amp: [C::from(1.0), C::from(0.0), C::from(0.0), C::from(0.0)],
    }];
    let spacelike = current_sli_support_check(&injected, false);
    outcome(
        worst == 0.0 && spacelike.value > 0.0 && spacelike.flagged == vec![0],
        format!("on-shell maximum {worst:e}, spacelike mode {:.4}", spacelike.value),
    )
}

fn criterion_9() -> Outcome {
    // For A(t,t') = f(t − t'), the flux integral is ∫₀^∞ s f(−s) ds.
    let cases: [(&str, fn(f64) -> f64, f64); 3] = [
        ("s·e^{−s²}", |s| s * (-s * s).exp(), -PI.sqrt() / 4.0),
        ("sin s·e^{−|s|}", |s| s.sin() * (-s.abs()).exp(), -0.5),
        ("s/(1+s²)²", |s| s / (1.0 + s * s).powi(2), -PI / 4.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, f, exact) in cases {
        let a = move |t: f64, tp: f64| f(t - tp);
        let res = time_average_identity_check(&a, 0.0, &[100.0], 1e-10).unwrap();
        let dev = res.max_deviation();
        pass &= dev < 1e-5 && (res.lhs - exact).abs() < 1e-8;
        parts.push(format!("{name}: |rhs−lhs| {dev:.1e}, |lhs−exact| {:.1e}", (res.lhs - exact).abs()));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_10() -> Outcome {
    let mut r = rng(10);
    let mut worst: f64 = 0.0;
    let mut coincidence = true;
    for _ in 0..100 {
        let c: [f64; 4] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        let amp: [f64; 4] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        let w: f64 = r.gen_range(0.5..1.5);
        let tilt: f64 = r.gen_range(-1.0..1.0);
        let j = move |z: &FourVec| -> FourVec {
            let d2: f64 = (0..4).map(|i| (z[i] - c[i]).powi(2)).sum();
            let g = (-d2 / (w * w)).exp() * (1.0 + tilt * (z[1] - c[1]));
            amp.map(|a| a * g)
        };
        let x: FourVec = std::array::from_fn(|_| r.gen_range(-0.5..0.5));
        let dir: [f64; 3] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        let sep = r.gen_range(0.0..0.01);
        let p = positivity_probe(&j, &x, dir, sep, 10.0, 1e-12).unwrap();
        let p0 = positivity_probe(&j, &x, dir, 0.0, 10.0, 1e-12).unwrap();
        worst = worst.max(-p.value / p.scale.max(1e-300));
        coincidence &= p0.value >= 0.0;
    }
    outcome(worst <= 1e-6 && coincidence, format!("most negative value/scale {:.1e}, coincidence nonnegative {coincidence}", -worst))
}

fn clifford_residuals(cl: &Clifford, r: &mut ChaCha8Rng) -> (f64, f64) {
    let mut rel: f64 = 0.0;
    let id = SpinMat::identity();
    for mu in 0..4 {
        for nu in 0..4 {
            let eta = if mu != nu { 0.0 } else if mu == 0 { 2.0 } else { -2.0 };
            rel = rel.max((cl.gamma(mu).anticommutator(cl.gamma(nu)) - id.scale_re(eta)).norm());
        }
        rel = rel.max(cl.gamma5().anticommutator(cl.gamma(mu)).norm());
    }
    rel = rel.max((*cl.gamma5() * *cl.gamma5() - id).norm());
    let mut proj: f64 = 0.0;
    let mut done = 0;
    while done < 100 {
        let xi: [C; 4] = std::array::from_fn(|_| cplx(r));
        let Ok(cc) = cl.closed_chain_projectors(&xi) else { continue };
        let (s, sb) = (cl.slash(&xi), cl.slash(&xi.map(|z| z.conj())));
        proj = proj
            .max((cc.f_plus * cc.f_plus - cc.f_plus).norm())
            .max((cc.f_minus * cc.f_minus - cc.f_minus).norm())
            .max((cc.f_plus * cc.f_minus).norm())
            .max((cc.f_plus + cc.f_minus - id).norm())
            .max((cc.f_minus * s - (cc.f_minus * sb).scale(cc.c)).norm())
            .max((cc.f_minus * s - (cc.f_minus * sb).scale(cc.c_alt)).norm());
        done += 1;
    }
    (rel, proj)
}

fn criterion_11() -> Outcome {
    let mut r = rng(11);
    let u = gram_schmidt_unitary(&SpinMat(std::array::from_fn(|_| std::array::from_fn(|_| cplx(&mut r)))));
    let (rel, proj) = clifford_residuals(Clifford::standard(), &mut rng(111));
    let (rel_u, proj_u) = clifford_residuals(&Clifford::standard().conjugated(&u), &mut rng(111));
    let worst = rel.max(proj).max(rel_u).max(proj_u);
    outcome(
        worst < 1e-10,
        format!("standard basis: relations {rel:.1e}, projectors {proj:.1e}; rotated basis: {rel_u:.1e}, {proj_u:.1e}"),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("convolution closed forms", criterion_1),
        ("shell scaling exponents", criterion_2),
        ("piecewise identities", criterion_3),
        ("kernel catalogue", criterion_4),
        ("conservation", criterion_5),
        ("definiteness", criterion_6),
        ("σ^{0α} / γ^α equivalence", criterion_7),
        ("support on the mass shells", criterion_8),
        ("time-averaging identity", criterion_9),
        ("positivity probe", criterion_10),
        ("Clifford layer", criterion_11),
    ];
    let mut failed = Vec::new();
    std::io::stdout().lock().write_all(b"\n").unwrap();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        // Written to the stdout handle directly, which the test harness does not capture.
        let line = format!("{} {:>2} {name}: {}\n", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        std::io::stdout().lock().write_all(line.as_bytes()).unwrap();
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
