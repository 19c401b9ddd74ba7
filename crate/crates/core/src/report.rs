//! Verification suites and the JSON report they produce.

use crate::clifford::{gram_schmidt_unitary, Clifford, FourVec, Sign, SpinMat};
use crate::convolution::{
    approach_shell, conv_k0_shell, conv_k0_shell_oracle, conv_masscone_shell, conv_masscone_shell_oracle,
    conv_omega_scaling, masscone_scaling, ShellIntegralQuery,
};
use crate::fields::{
    conscond_jet, counterexample_jets, dirac_residual, pairing_predicates, transverse_polarization, BoxSetting,
    DiracMode, FermionicJet, FieldConfig, FieldConfigJson, FieldError, JetComponent, MaxwellField, MaxwellMode,
};
use crate::kernels::{eval_hat, harmonicity_residual, mollified_oracle_fit, KernelId};
use crate::lineint::{compact_identity_residual, eval_piecewise_exact, jtilde_residual, LineFn};
use crate::slayer::*;
use num_complex::Complex64 as C;
use num_rational::Rational64 as R;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub const SUITES: [&str; 6] = ["clifford", "convolution", "fields", "kernels", "lineint", "slayer"];

/// Field configuration used when none is supplied.
pub const DEFAULT_FIELDS: &str = include_str!("../default_fields.json");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReportError {
    #[error("unknown suite `{0}` (known: clifford, convolution, fields, kernels, lineint, slayer, all)")]
    UnknownSuite(String),
    #[error("invalid field configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub check: String,
    pub status: Status,
    pub value: f64,
    pub tolerance: f64,
    pub paper_ref: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub suites: Vec<String>,
    pub passed: bool,
    pub checks: Vec<CheckEntry>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: u64,
    /// Tolerance overrides keyed by full check name.
    pub tolerances: BTreeMap<String, f64>,
    pub fields: FieldConfigJson,
}

impl RunOptions {
    pub fn new(seed: u64) -> Self {
        RunOptions {
            seed,
            tolerances: BTreeMap::new(),
            fields: serde_json::from_str(DEFAULT_FIELDS).expect("default field configuration parses"),
        }
    }

    pub fn with_fields_json(mut self, json: &str) -> Result<Self, ReportError> {
        self.fields = serde_json::from_str(json).map_err(|e| ReportError::Config(e.to_string()))?;
        Ok(self)
    }
}

/// Expands `all` and validates names; the result is sorted and deduplicated.
pub fn resolve_suites(names: &[String]) -> Result<Vec<String>, ReportError> {
    let mut out = Vec::new();
    for n in names {
        if n == "all" {
            out.extend(SUITES.iter().map(|s| s.to_string()));
        } else if SUITES.contains(&n.as_str()) {
            out.push(n.clone());
        } else {
            return Err(ReportError::UnknownSuite(n.clone()));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Runs the suites concurrently; entries are ordered by suite name.
pub fn run_suites(names: &[String], opts: &RunOptions) -> Result<Report, ReportError> {
    let suites = resolve_suites(names)?;
    let results: Vec<Vec<CheckEntry>> = std::thread::scope(|scope| {
        let handles: Vec<_> = suites.iter().map(|s| scope.spawn(move || run_suite(s, opts))).collect();
        handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
    });
    let checks: Vec<CheckEntry> = results.into_iter().flatten().collect();
    Ok(Report {
        seed: opts.seed,
        suites,
        passed: checks.iter().all(|c| c.status == Status::Pass),
        checks,
    })
}

pub fn run_suite(name: &str, opts: &RunOptions) -> Vec<CheckEntry> {
    let mut ctx = Ctx {
        suite: name,
        opts,
        entries: Vec::new(),
    };
    match name {
        "clifford" => clifford_suite(&mut ctx),
        "convolution" => convolution_suite(&mut ctx),
        "fields" => fields_suite(&mut ctx),
        "kernels" => kernels_suite(&mut ctx),
        "lineint" => lineint_suite(&mut ctx),
        "slayer" => slayer_suite(&mut ctx),
        _ => {}
    }
    ctx.entries
}

struct Ctx<'a> {
    suite: &'a str,
    opts: &'a RunOptions,
    entries: Vec<CheckEntry>,
}

impl Ctx<'_> {
    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt)
    }

    fn push(&mut self, name: &str, paper_ref: &str, value: f64, default_tol: f64, at_least: bool) {
        let check = format!("{}.{}", self.suite, name);
        let tolerance = self.opts.tolerances.get(&check).copied().unwrap_or(default_tol);
        let ok = if at_least { value >= tolerance } else { value <= tolerance };
        self.entries.push(CheckEntry {
            check,
            status: if ok { Status::Pass } else { Status::Fail },
            value,
            tolerance,
            paper_ref: paper_ref.to_string(),
        });
    }

    /// Passes when `value ≤ tolerance`; errors and NaN fail.
    fn at_most(&mut self, name: &str, paper_ref: &str, value: Result<f64, String>, tol: f64) {
        self.push(name, paper_ref, value.unwrap_or(f64::NAN), tol, false);
    }

    /// Passes when `value ≥ threshold`.
    fn at_least(&mut self, name: &str, paper_ref: &str, value: Result<f64, String>, threshold: f64) {
        self.push(name, paper_ref, value.unwrap_or(f64::NAN), threshold, true);
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn cplx(rng: &mut ChaCha8Rng) -> C {
    C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

// clifford

fn random_unitary(rng: &mut ChaCha8Rng) -> SpinMat {
    gram_schmidt_unitary(&SpinMat(std::array::from_fn(|_| std::array::from_fn(|_| cplx(rng)))))
}

fn clifford_relation_residual(cl: &Clifford) -> f64 {
    let mut worst: f64 = 0.0;
    for mu in 0..4 {
        for nu in 0..4 {
            let eta = if mu != nu { 0.0 } else if mu == 0 { 2.0 } else { -2.0 };
            let r = cl.gamma(mu).anticommutator(cl.gamma(nu)) - SpinMat::identity().scale_re(eta);
            worst = worst.max(r.norm());
        }
        worst = worst.max(cl.gamma5().anticommutator(cl.gamma(mu)).norm());
    }
    worst.max((*cl.gamma5() * *cl.gamma5() - SpinMat::identity()).norm())
}

/// Worst projector residual over random ξ, and the number of ξ evaluated.
fn projector_residuals(cl: &Clifford, rng: &mut ChaCha8Rng, n: usize) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < n {
        let xi: [C; 4] = std::array::from_fn(|_| cplx(rng));
        let cc = match cl.closed_chain_projectors(&xi) {
            Ok(cc) => cc,
            Err(_) => continue,
        };
        let xib = xi.map(|z| z.conj());
        let (s, sb) = (cl.slash(&xi), cl.slash(&xib));
        worst = worst
            .max((cc.f_plus * cc.f_plus - cc.f_plus).norm())
            .max((cc.f_minus * cc.f_minus - cc.f_minus).norm())
            .max((cc.f_plus + cc.f_minus - SpinMat::identity()).norm())
            .max((cc.f_minus * s - (cc.f_minus * sb).scale(cc.c)).norm())
            .max((cc.f_minus * s - (cc.f_minus * sb).scale(cc.c_alt)).norm());
        done += 1;
    }
    Ok(worst)
}

fn clifford_suite(ctx: &mut Ctx) {
    let std_cl = Clifford::standard();
    let mut rng = ctx.rng(1);
    let u = random_unitary(&mut rng);
    let other = std_cl.conjugated(&u);
    ctx.at_most(
        "relations",
        "Clifford relations {γ^μ,γ^ν} = 2η^{μν}, γ⁵ anticommuting and squaring to one",
        Ok(clifford_relation_residual(std_cl).max(clifford_relation_residual(&other))),
        1e-10,
    );
    ctx.at_most(
        "closed_chain_projectors",
        "spectral projectors F± of the closed chain: idempotent, complete, F₋ξ̸ = c·F₋ξ̸̄ with both c",
        projector_residuals(std_cl, &mut ctx.rng(2), 100),
        1e-10,
    );
    ctx.at_most(
        "representation_independence",
        "projector identities in a randomly rotated spinor basis",
        projector_residuals(&other, &mut ctx.rng(2), 100),
        1e-10,
    );
    let mut rng = ctx.rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let sign = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
        let p = std_cl.chiral_jet(cplx(&mut rng), cplx(&mut rng), std::array::from_fn(|_| cplx(&mut rng)), cplx(&mut rng), cplx(&mut rng), sign);
        match std_cl.anticomm_trace_equiv(&p, &std_cl.spin_adjoint(&p), sign) {
            Ok((l, r)) => {
                let scale = l.iter().map(|z| z.norm()).fold(1.0, f64::max);
                worst = worst.max((0..3).map(|k| (l[k] - r[k]).norm()).fold(0.0, f64::max) / scale);
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    ctx.at_most(
        "sigma_gamma_equivalence",
        "σ^{0α} and ∓γ^α insertions agree for chirally symmetric jets",
        Ok(worst),
        1e-10,
    );
    let one = C::from(1.0);
    let zero = C::from(0.0);
    let control = std_cl.conscond_ansatz(zero, zero, [one, zero, zero], [zero, one, zero], zero, zero, Sign::Plus, Sign::Plus);
    let detected = std_cl
        .anticomm_trace_equiv(&control, &std_cl.spin_adjoint(&control), Sign::Plus)
        .map(|(l, r)| (0..3).map(|k| (l[k] - r[k]).norm()).fold(0.0, f64::max))
        .map_err(err);
    ctx.at_least(
        "sigma_gamma_non_chiral_control",
        "the equivalence fails for a jet outside the chiral class",
        detected,
        1e-6,
    );
}

// convolution

fn random_cone_query(rng: &mut ChaCha8Rng) -> (FourVec, f64) {
    loop {
        let q0: f64 = rng.gen_range(0.2..5.0);
        let u: f64 = rng.gen_range(0.0..0.95);
        let m: f64 = rng.gen_range(0.3..3.0);
        let dir: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        if n < 1e-3 {
            continue;
        }
        let qs = u * q0;
        if (q0 * q0 - qs * qs - m * m).abs() < 0.05 * m * m {
            continue;
        }
        return ([q0, qs * dir[0] / n, qs * dir[1] / n, qs * dir[2] / n], m);
    }
}

fn convolution_suite(ctx: &mut Ctx) {
    let mut rng = ctx.rng(10);
    let k0 = (0..100)
        .map(|_| {
            let omega = rng.gen_range(0.2..5.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let m: f64 = rng.gen_range(0.3..3.0);
            if (omega * omega - m * m).abs() < 1e-3 {
                return Ok(0.0);
            }
            let closed = conv_k0_shell(&ShellIntegralQuery::new([omega, 0.0, 0.0, 0.0], m)).map_err(err)?.re;
            let oracle = conv_k0_shell_oracle(omega, m).re;
            Ok((closed - oracle).abs() / oracle.abs())
        })
        .try_fold(0.0f64, |a, r: Result<f64, String>| r.map(|x| a.max(x)));
    ctx.at_most("k0_shell_vs_oracle", "K₀ convolved with the mass shell, closed form vs direct integral", k0, 1e-10);
    let mut rng = ctx.rng(11);
    let cone = (0..100)
        .map(|_| {
            let (q, m) = random_cone_query(&mut rng);
            let query = ShellIntegralQuery::new(q, m);
            let closed = conv_masscone_shell(&query).map_err(err)?.re;
            let oracle = conv_masscone_shell_oracle(&query).map_err(err)?;
            Ok((closed - oracle).abs() / oracle.abs())
        })
        .try_fold(0.0f64, |a, r: Result<f64, String>| r.map(|x| a.max(x)));
    ctx.at_most("masscone_vs_oracle", "mass cone convolved with the mass shell, closed form vs direct integral", cone, 1e-10);
    let target = 1.0 / (32.0 * PI.powi(3));
    let anchor = conv_masscone_shell(&ShellIntegralQuery::new([2.0, 0.0, 0.0, 0.0], 1.0))
        .map(|v| (v.re - target).abs() / target)
        .map_err(err);
    ctx.at_most("anchor", "value 1/(32π³) at q = (2,0,0,0), m = 1", anchor, 1e-12);
    let deltas = [0.1, 0.05, 0.025, 0.0125];
    let mut omega_min = f64::INFINITY;
    let mut bracket_dev: f64 = 0.0;
    let mut failure = None;
    for qvec in [[0.0, 0.0, 0.0], [0.4, 0.0, 0.3], [1.0, -0.5, 0.2]] {
        let qs = approach_shell(1.0, qvec, &deltas);
        match (conv_omega_scaling(&qs, 1.0), masscone_scaling(&qs, 1.0)) {
            (Ok(w), Ok(b)) => {
                omega_min = omega_min.min(w.slope);
                bracket_dev = bracket_dev.max((b.slope - 2.0).abs());
            }
            (Err(e), _) | (_, Err(e)) => failure = Some(err(e)),
        }
    }
    let res = |v: f64| failure.clone().map_or(Ok(v), Err);
    ctx.at_least("omega_weighted_exponent", "ω-weighted shell integral vanishes at least cubically", res(omega_min), 2.9);
    ctx.at_most("bracket_exponent_deviation", "curly bracket vanishes quadratically on the shell", res(bracket_dev), 0.1);
}

// fields

fn fields_suite(ctx: &mut Ctx) {
    let cfg = FieldConfig::from_raw(&ctx.opts.fields);
    let status = match &cfg {
        Ok(_) => Ok(0.0),
        Err(FieldError::OffShell { residual, .. }) => Ok(*residual),
        Err(e) => Err(err(e)),
    };
    ctx.at_most("config_on_shell", "configured modes lie on their shells", status, 0.0);
    if let Ok(cfg) = &cfg {
        let cl = Clifford::standard();
        let mut worst: f64 = 0.0;
        for jet in &cfg.jets {
            for m in jet.modes() {
                worst = worst.max(dirac_residual(cl, m.shell, m.k, cfg.setting.mass, &m.amp));
            }
        }
        ctx.at_most("config_dirac_residual", "(k̸ − m)ψ̂ = 0 for configured Dirac modes", Ok(worst), 1e-10);
        let mut worst: f64 = 0.0;
        for f in &cfg.maxwell {
            for m in f.spectrum() {
                let ft = m.field_tensor_hat();
                for i in 0..4 {
                    let fp: C = (0..4).map(|j| ft[i][j] * m.p[j]).sum();
                    worst = worst.max(fp.norm());
                    for j in 0..4 {
                        worst = worst.max((ft[i][j] + ft[j][i]).norm());
                    }
                }
            }
        }
        ctx.at_most("config_field_tensor", "F̂ antisymmetric with F̂_{μν}p^ν = 0", Ok(worst), 1e-12);
    }
    let setting = BoxSetting::for_mass(1.0).expect("unit mass box");
    let mut rng = ctx.rng(20);
    let cl = Clifford::standard();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = [rng.gen_range(-3..=3), rng.gen_range(-3..=3), rng.gen_range(-3..=3)];
        let shell = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
        let m = DiracMode::from_basis(&setting, shell, n, [cplx(&mut rng), cplx(&mut rng)]);
        let scale = crate::clifford::spinor_norm(&m.amp).max(1e-300);
        worst = worst.max(dirac_residual(cl, shell, m.k, setting.mass, &m.amp) / scale);
    }
    ctx.at_most("dirac_basis_on_shell", "box plane waves solve the Dirac equation", Ok(worst), 1e-12);
    let (u, v) = counterexample_jets(&setting, [1, 0, 0]);
    let violations = pairing_predicates(&u, &v, 1e-12).violations.len() as f64;
    ctx.at_least(
        "pairing_counterexample_detected",
        "momentum transfer without matching frequency gap is flagged",
        Ok(violations),
        1.0,
    );
}

// kernels

fn kernels_suite(ctx: &mut Ctx) {
    let mut rng = ctx.rng(30);
    let mut worst: f64 = 0.0;
    let mut failure = None;
    for id in KernelId::ALL {
        let mut done = 0;
        while done < 100 {
            let (w, k): (f64, f64) = (rng.gen_range(-4.0..4.0), rng.gen_range(0.1..4.0));
            if (w.abs() - k).abs() < 1e-3 {
                continue;
            }
            match (eval_hat(id, w, k), eval_hat(id, -w, k)) {
                (Ok(a), Ok(b)) => worst = worst.max((b - a * id.parity()).norm() / a.norm().max(1e-300)),
                (Err(e), _) | (_, Err(e)) => failure = Some(err(e)),
            }
            done += 1;
        }
    }
    let parity = failure.map_or(Ok(worst), Err);
    ctx.at_most("parity", "ω-parity annotations of the kernel tables", parity, 1e-12);
    let mut rng = ctx.rng(31);
    let mut worst: f64 = 0.0;
    let mut failure = None;
    let h = 1e-3;
    for id in [
        KernelId::IK0OverT,
        KernelId::IK0OverT2,
        KernelId::DeltaOverT,
        KernelId::DeltaOverT2,
        KernelId::XiK0OverT3,
        KernelId::XiXiK0OverT4,
        KernelId::XiXiDeltaOverT3,
    ] {
        let mut done = 0;
        while done < 20 {
            let (w, k): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(0.2..3.0));
            if (w.abs() - k).abs() < 0.1 || w.abs() < 0.1 {
                continue;
            }
            match harmonicity_residual(id, w, k, h) {
                Ok(r) => worst = worst.max(r.norm() / (1e-3 * h * h + 1e-13 / (h * h))),
                Err(e) => failure = Some(err(e)),
            }
            done += 1;
        }
    }
    ctx.at_most(
        "harmonicity",
        "(∂²_ω − ∂²_k − (2/k)∂_k)K̂ = 0 off the light cone, residual relative to its O(h²) bound",
        failure.map_or(Ok(worst), Err),
        1.0,
    );
    let points = [(0.3, 1.0), (0.5, 1.5), (1.8, 1.0), (-2.2, 1.2), (-0.4, 0.9), (2.5, 0.8)];
    let outside = [(0.3, 1.0), (0.5, 1.5), (-0.2, 0.9), (1.1, 1.6), (-0.6, 2.0), (0.0, 0.7)];
    for (id, pts, expected) in [
        (KernelId::IK0OverT, &points, C::new(2.0 * PI * PI, 0.0)),
        (KernelId::IK0OverT2, &points, C::new(2.0 * PI * PI, 0.0)),
        (KernelId::DeltaOverT, &points, C::new(-2.0 * PI, 0.0)),
        (KernelId::DeltaOverT2, &points, C::new(2.0 * PI, 0.0)),
        (KernelId::XiK0OverT3, &outside, C::new(0.0, 2.0 * PI * PI)),
    ] {
        let fit = mollified_oracle_fit(id, pts, 0.1, 60.0).map_err(err);
        let value = fit.map(|f| f.max_rel_residual.max((f.ratio - expected).norm() / expected.norm()));
        ctx.at_most(
            &format!("mollified_oracle.{}", id.name()),
            "mollified position-space kernel transformed radially matches the closed form up to one constant",
            value,
            0.01,
        );
    }
}

// lineint

fn random_rational_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<(R, R)> {
    let mut out = Vec::with_capacity(n);
    let bad = |x: R| x.is_zero() || x == R::one();
    while out.len() < n {
        let mut r = || {
            let q: i64 = rng.gen_range(2..=97);
            R::new(rng.gen_range(-4 * q..=4 * q), q)
        };
        let (a, b) = (r(), r());
        if bad(a) || bad(b) || a == b {
            continue;
        }
        out.push((a, b));
    }
    out
}

fn lineint_suite(ctx: &mut Ctx) {
    let pts = random_rational_points(&mut ctx.rng(40), 10_000);
    let failures = pts.iter().filter(|&&(a, b)| !jtilde_residual(a, b).is_zero()).count();
    ctx.at_most("subtraction_identity", "J − P₁ − P₂ − P₃ = J̃, exact rational arithmetic (count of failures)", Ok(failures as f64), 0.0);
    let compact = compact_identity_residual(&pts);
    ctx.at_most(
        "compact_identity",
        "J̃ − U = V·χ₍₀,₁₎(α)χ₍₀,₁₎(β), exact rational arithmetic",
        Ok(*compact.numer() as f64 / *compact.denom() as f64),
        0.0,
    );
    let one = R::one();
    let failures = pts
        .iter()
        .filter(|&&(a, b)| {
            let ev = |f, x, y| eval_piecewise_exact(f, x, y);
            ev(LineFn::J, one - a, one - b) != -ev(LineFn::J, a, b)
                || ev(LineFn::U, b, a) != -ev(LineFn::U, a, b)
                || ev(LineFn::V, b, a) != -ev(LineFn::V, a, b)
        })
        .count();
    ctx.at_most("antisymmetries", "J odd under (α,β) → (1−α,1−β); U, V odd under α ↔ β (count of failures)", Ok(failures as f64), 0.0);
}

// slayer

fn random_maxwell(setting: &BoxSetting, rng: &mut ChaCha8Rng, modes: usize, gauge: bool) -> MaxwellField {
    let mut points = Vec::new();
    while points.len() < modes {
        let n = [rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2)];
        if n != [0, 0, 0] {
            points.push(n);
        }
    }
    random_maxwell_at(setting, rng, &points, gauge)
}

/// A random field on the lattice points of `like`, so that both fields pair.
fn random_partner(setting: &BoxSetting, rng: &mut ChaCha8Rng, like: &MaxwellField, gauge: bool) -> MaxwellField {
    let points: Vec<[i64; 3]> = like.modes.iter().map(|m| m.n).collect();
    random_maxwell_at(setting, rng, &points, gauge)
}

fn random_maxwell_at(setting: &BoxSetting, rng: &mut ChaCha8Rng, points: &[[i64; 3]], gauge: bool) -> MaxwellField {
    let mut out = Vec::new();
    for &n in points {
        let shell = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
        let k = setting.momentum(n);
        let p = [shell.value() * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt(), k[0], k[1], k[2]];
        let lambda = if gauge { cplx(rng) } else { C::from(0.0) };
        let eps = transverse_polarization(&p, cplx(rng), cplx(rng), lambda);
        out.push(MaxwellMode::new(setting, n, shell, eps).expect("transverse mode on shell"));
    }
    MaxwellField::new(out)
}

fn random_sea_jet(setting: &BoxSetting, rng: &mut ChaCha8Rng) -> FermionicJet {
    let mut components = Vec::new();
    for _ in 0..2 {
        let mut pick = |shell| {
            let n = [rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2)];
            DiracMode::from_basis(setting, shell, n, [cplx(rng), cplx(rng)])
        };
        components.push(JetComponent {
            psi: vec![pick(Sign::Minus), pick(Sign::Minus)],
            delta_psi: vec![pick(Sign::Plus)],
        });
    }
    FermionicJet { components }
}

/// Two conscond jets on the momenta `{0, n⃗}`; `δψ` sits at the zero mode, so
/// both functionals pair the jets.
fn random_conscond_pair(setting: &BoxSetting, rng: &mut ChaCha8Rng) -> (FermionicJet, FermionicJet) {
    let n = [rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2)];
    let momenta = [[0, 0, 0], n];
    (random_conscond_jet_at(setting, rng, &momenta), random_conscond_jet_at(setting, rng, &momenta))
}

fn random_conscond_jet_at(setting: &BoxSetting, rng: &mut ChaCha8Rng, momenta: &[[i64; 3]]) -> FermionicJet {
    loop {
        let s1 = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
        let scales = [cplx(rng), cplx(rng)];
        if let Ok(j) = conscond_jet(setting, s1, momenta, &scales) {
            return j;
        }
    }
}

fn max_of(values: impl Iterator<Item = Result<f64, SlayerError>>) -> Result<f64, String> {
    values.map(|r| r.map_err(err)).try_fold(0.0f64, |a, r| r.map(|x| a.max(x)))
}

fn slayer_suite(ctx: &mut Ctx) {
    let setting = BoxSetting::for_mass(1.0).expect("unit mass box");
    let k = Constants::default();
    let mut rng = ctx.rng(50);
    let bose = max_of((0..20).map(|_| {
        let u = random_maxwell(&setting, &mut rng, 3, true);
        let v = random_partner(&setting, &mut rng, &u, true);
        bose_results(&setting, &u, &v, &k).map(|r| r[0].conserved_drift.max(r[1].conserved_drift))
    }));
    ctx.at_most("bose_conservation", "σ and (·,·) of Maxwell fields are independent of the time slice", bose, 1e-10);
    let mut rng = ctx.rng(51);
    let fermi = max_of((0..20).map(|_| {
        let (u, v) = random_conscond_pair(&setting, &mut rng);
        fermi_results(&setting, &u, &v, Sign::Plus, &k).map(|r| r[0].conserved_drift.max(r[1].conserved_drift))
    }));
    ctx.at_most("fermi_conservation", "σ and (·,·) of chirally symmetric jets are independent of the time slice", fermi, 1e-10);
    let mut rng = ctx.rng(52);
    let conscond_res = (0..5)
        .map(|_| {
            let (u, v) = random_conscond_pair(&setting, &mut rng);
            fermi_conservation_residual(&setting, &u, &v, 0.3).abs()
        })
        .fold(0.0, f64::max);
    ctx.at_most("conscond_residual", "no flux through the spatial current for chirally symmetric jets", Ok(conscond_res), 1e-12);
    let (cu, cv) = counterexample_jets(&setting, [1, 0, 0]);
    let raw = fermi_conservation_residual(&setting, &cu, &cv, 0.0);
    ctx.at_least(
        "counterexample_residual",
        "jets violating the frequency implication produce a conservation residual",
        Ok(raw.abs()),
        1e-6,
    );
    let sym = fermi_conservation_residual_symmetrized(&setting, &cu, &cv, 0.0);
    ctx.at_most(
        "symmetrized_residual",
        "spherical symmetrization removes the traceless spatial current (relative to the raw residual)",
        Ok(sym.abs() / raw.abs()),
        1e-10,
    );
    let mut rng = ctx.rng(53);
    let mut worst: f64 = 0.0;
    let mut failure = None;
    for _ in 0..1000 {
        let u = random_maxwell(&setting, &mut rng, 2, false);
        match ip_bose(&setting, &u, &u, &k) {
            Ok(v) => worst = worst.max(-v),
            Err(e) => failure = Some(err(e)),
        }
    }
    ctx.at_most("ip_bose_nonnegative", "(u,u) ≥ 0 for on-shell Maxwell fields (most negative value)", failure.map_or(Ok(worst), Err), 0.0);
    let mut rng = ctx.rng(54);
    let gauge = max_of((0..20).map(|_| {
        let n = [rng.gen_range(1..=2), rng.gen_range(-2..=2), 0];
        let k3 = setting.momentum(n);
        let p = [(k3[0] * k3[0] + k3[1] * k3[1]).sqrt(), k3[0], k3[1], k3[2]];
        let lambda = cplx(&mut rng);
        let g = MaxwellMode::new(&setting, n, Sign::Plus, p.map(|x| lambda * x)).expect("gauge mode");
        let v = random_maxwell_at(&setting, &mut rng, &[n, [-n[0], -n[1], 1]], false);
        let gf = MaxwellField::new(vec![g]);
        Ok(ip_bose(&setting, &gf, &v, &k)?.abs().max(sigma_bose(&setting, &gf, &v, 0.0, &k)?.abs()))
    }));
    ctx.at_most("gauge_modes_decouple", "pure gauge modes are in the kernel of σ and (·,·)", gauge, 1e-9);
    let mut rng = ctx.rng(55);
    let mut most_negative: f64 = 0.0;
    let mut spurious_zero = 0usize;
    for _ in 0..100_000 {
        let kk: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
        let q: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
        let b = definiteness_bracket(kk, q, 1.0);
        most_negative = most_negative.max(-b);
        let sep = ((kk[0] + q[0]).powi(2) + (kk[1] + q[1]).powi(2) + (kk[2] + q[2]).powi(2)).sqrt();
        if b <= 1e-12 && sep > 1e-6 {
            spurious_zero += 1;
        }
    }
    ctx.at_most("bracket_nonnegative", "the definiteness bracket is nonnegative (most negative value)", Ok(most_negative), 1e-12);
    ctx.at_most("bracket_zero_only_at_opposite_momenta", "the bracket vanishes only for q⃗ = −k⃗ (count of other zeros)", Ok(spurious_zero as f64), 0.0);
    let mut rng = ctx.rng(56);
    let mut flips = 0usize;
    let mut failure = None;
    for _ in 0..1000 {
        let jet = random_sea_jet(&setting, &mut rng);
        match ip_fermi(&setting, &jet, &jet, Sign::Plus, &k) {
            Ok(v) if v < 0.0 => flips += 1,
            Ok(_) => {}
            Err(e) => failure = Some(err(e)),
        }
    }
    ctx.at_most("ip_fermi_sign_constant", "(u,u) has one sign on sea-excitation jets (count of opposite signs)", failure.map_or(Ok(flips as f64), Err), 0.0);
    let mut rng = ctx.rng(57);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (u, v) = random_conscond_pair(&setting, &mut rng);
        let x: FourVec = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        let y: FourVec = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        let j = jtensor_components(&u, &v, &x, &y);
        let jt = jtensor_components(&u, &v, &y, &x);
        let scale = j[0][0].abs().max(1e-300);
        for a in 0..4 {
            for b in 0..4 {
                worst = worst.max((j[a][b] - jt[b][a]).abs() / scale);
                if a > 0 && b > 0 {
                    worst = worst.max(j[a][b].abs() / scale);
                }
            }
        }
    }
    ctx.at_most(
        "jtensor_chiral",
        "J^{kl}(x,y) = J^{lk}(y,x) and J^{αβ} = 0 for chirally symmetric jets (relative to J⁰⁰)",
        Ok(worst),
        1e-10,
    );
    let mut rng = ctx.rng(58);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let jet = random_sea_jet(&setting, &mut rng);
        let samples: Vec<SpectralSample> = jet.modes().map(SpectralSample::from).collect();
        worst = worst
            .max(current_sli_support_check(&samples, false).value)
            .max(current_sli_support_check(&samples, true).value);
    }
    ctx.at_most("support_on_shell", "the current kernel vanishes on the mass shells (exact)", Ok(worst), 0.0);
    let injected = [SpectralSample {
        p: [0.5, 2.0, 0.0, 0.0],
        amp: [C::from(1.0), C::from(0.0), C::from(0.0), C::from(0.0)],
    }];
    ctx.at_least(
        "support_spacelike_detected",
        "a spacelike mode outside the cones is seen by the kernel",
        Ok(current_sli_support_check(&injected, false).value),
        1e-6,
    );
    let kernels: [(&str, &(dyn Fn(f64) -> f64 + Sync)); 3] = [
        ("gaussian", &|s: f64| s * (-s * s).exp()),
        ("damped_sine", &|s: f64| s.sin() * (-s.abs()).exp()),
        ("rational", &|s: f64| s / (1.0 + s * s).powi(2)),
    ];
    for (name, f) in kernels {
        let a = |x: f64, y: f64| f(x - y);
        let dev = time_average_identity_check(&a, 0.0, &[100.0], 1e-10).map(|r| r.max_deviation()).map_err(err);
        ctx.at_most(&format!("time_average.{name}"), "time-averaged first moment equals the flux integral", dev, 1e-5);
    }
    let mut rng = ctx.rng(59);
    let mut worst: f64 = 0.0;
    let mut coincidence_ok = true;
    let mut failure = None;
    for _ in 0..100 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let amp: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let w: f64 = rng.gen_range(0.5..1.5);
        let j = move |z: &FourVec| -> FourVec {
            let r2: f64 = (0..4).map(|i| (z[i] - c[i]).powi(2)).sum();
            amp.map(|a| a * (-r2 / (w * w)).exp())
        };
        let x: FourVec = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
        let dir: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let sep = rng.gen_range(0.0..0.01);
        match (positivity_probe(&j, &x, dir, sep, 10.0, 1e-12), positivity_probe(&j, &x, dir, 0.0, 10.0, 1e-12)) {
            (Ok(p), Ok(p0)) => {
                worst = worst.max(-p.value / p.scale.max(1e-300));
                coincidence_ok &= p0.value >= 0.0;
            }
            (Err(e), _) | (_, Err(e)) => failure = Some(err(e)),
        }
    }
    let worst = if coincidence_ok { worst } else { f64::INFINITY };
    ctx.at_most("positivity_probe", "the pole coefficient is a product of coinciding line integrals (most negative, relative)", failure.map_or(Ok(worst), Err), 1e-6);
    let mut rng = ctx.rng(60);
    let u = random_maxwell(&setting, &mut rng, 3, false);
    let v = random_partner(&setting, &mut rng, &u, false);
    let anti = (|| {
        let a = eps_t_log_channel(&setting, &u, &v, 0.0, 50.0, &k)?;
        let b = eps_t_log_channel(&setting, &v, &u, 0.0, 50.0, &k)?;
        Ok::<f64, SlayerError>((a + b).abs() / a.abs().max(1e-300))
    })()
    .map_err(err);
    ctx.at_most("eps_t_log_antisymmetric", "the logarithmic ε/t channel is antisymmetric", anti, 1e-12);
    let nolog = (|| {
        let n = eps_t_nolog_channel(&setting, &u, &v, 0.1, &k)?;
        let s = sigma_bose(&setting, &u, &v, 0.0, &k)?;
        Ok::<f64, SlayerError>(n.abs() / s.abs().max(1e-300))
    })()
    .map_err(err);
    ctx.at_most("eps_t_nolog_vanishes", "the non-logarithmic ε/t channel is supported on the mass shell and vanishes", nolog, 1e-12);
    config_checks(ctx, &k);
}

/// Functionals of the configured fields: symmetry and conservation.
fn config_checks(ctx: &mut Ctx, k: &Constants) {
    let cfg = match FieldConfig::from_raw(&ctx.opts.fields) {
        Ok(c) => c,
        Err(e) => {
            ctx.at_most("config_valid", "configured fields satisfy the hypotheses", Err(err(e)), 0.0);
            return;
        }
    };
    let s = cfg.setting;
    if let [u, v, ..] = cfg.maxwell.as_slice() {
        let r = (|| {
            let [sig, ip] = bose_results(&s, u, v, k)?;
            let swapped = sigma_bose(&s, v, u, 0.0, k)?;
            let ip_swapped = ip_bose(&s, v, u, k)?;
            let sym = (sig.value + swapped).abs() / sig.value.abs().max(1e-300)
                + (ip.value - ip_swapped).abs() / ip.value.abs().max(1e-300);
            Ok::<f64, SlayerError>(sym.max(sig.conserved_drift).max(ip.conserved_drift))
        })()
        .map_err(err);
        ctx.at_most("config_bose", "configured Maxwell fields: σ antisymmetric, (·,·) symmetric, both conserved", r, 1e-10);
    }
    if let [u, v, ..] = cfg.jets.as_slice() {
        let r = (|| {
            let [sig, ip] = fermi_results(&s, u, v, Sign::Plus, k)?;
            let swapped = sigma_fermi(&s, v, u, k)?;
            let sym = (sig.value + swapped).abs() / sig.value.abs().max(1e-300);
            Ok::<f64, SlayerError>(sym.max(sig.conserved_drift).max(ip.conserved_drift))
        })()
        .map_err(err);
        ctx.at_most("config_fermi", "configured jets: σ antisymmetric, both functionals conserved", r, 1e-10);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        let names = vec!["clifford".to_string(), "bogus".to_string()];
        assert_eq!(resolve_suites(&names), Err(ReportError::UnknownSuite("bogus".into())));
        let all = resolve_suites(&["all".to_string(), "kernels".to_string()]).unwrap();
        assert_eq!(all, SUITES.map(String::from).to_vec());
    }

    #[test]
    fn default_fields_validate() {
        let opts = RunOptions::new(1);
        let cfg = FieldConfig::from_raw(&opts.fields).unwrap();
        assert!(cfg.maxwell.len() >= 2 && cfg.jets.len() >= 2);
    }

    #[test]
    fn tolerance_override_applies() {
        let mut opts = RunOptions::new(3);
        opts.tolerances.insert("lineint.antisymmetries".into(), -1.0);
        let entries = run_suite("lineint", &opts);
        let e = entries.iter().find(|e| e.check == "lineint.antisymmetries").unwrap();
        assert_eq!(e.status, Status::Fail);
        assert_eq!(e.tolerance, -1.0);
        let others = entries.iter().filter(|e| e.check != "lineint.antisymmetries");
        assert!(others.clone().count() > 0);
        assert!(others.into_iter().all(|e| e.status == Status::Pass));
    }

    #[test]
    fn off_shell_config_fails_the_fields_suite() {
        let json = r#"{"mass": 1.0, "maxwell": [{"p": [1.2, 0.0625, 0.0, 0.0], "eps_re": [0, 0, 1, 0]}]}"#;
        let opts = RunOptions::new(1).with_fields_json(json).unwrap();
        let entries = run_suite("fields", &opts);
        let e = entries.iter().find(|e| e.check == "fields.config_on_shell").unwrap();
        assert_eq!(e.status, Status::Fail);
        assert!(!e.paper_ref.is_empty());
    }
}
