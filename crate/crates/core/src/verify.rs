//! Randomized identity suite: the exterior engine against the closed-form
//! displays, and the reduced fields against the full systems.

use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exterior::{
    build_phi, build_psi, cyclic_three_omega, d_phi_display, eta123, eta_omega, hodge_star,
    laplacian, laplacian_phi_display_form, laplacian_psi_display_form, psi_display, tau0_display,
    torsion, vol_n, AnsatzParams, Form,
};
use crate::flows::{random_rational, reduced_rhs, verify_reduction_with, FlowKind};
use crate::par::{self, Execution};
use crate::scalar::{ratio, Scalar};
use crate::sign::Sign;

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DISPLAY_POINTS: usize = 50;
pub const REDUCTION_POINTS: usize = 100;
pub const FLOAT_TOLERANCE: f64 = 1e-12;

/// A coefficient of a closed-form display deliberately shifted, to confirm
/// the suite notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// 0: `vol_N`, 1: `η₂₃ω₁` and `η₃₁ω₂`, 2: `η₁₂ω₃`.
    LaplacianPsi(usize),
    /// 0: `η₁₂₃`, 1: `η₁ω₁` and `η₂ω₂`, 2: `η₃ω₃`.
    LaplacianPhi(usize),
    DPhi,
    Tau0,
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fault::LaplacianPsi(i) => write!(f, "laplacian_psi[{i}]"),
            Fault::LaplacianPhi(i) => write!(f, "laplacian_phi[{i}]"),
            Fault::DPhi => f.write_str("d_phi"),
            Fault::Tau0 => f.write_str("tau0"),
        }
    }
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let indexed = |prefix: &str| {
            s.strip_prefix(prefix)
                .and_then(|r| r.strip_prefix('['))
                .and_then(|r| r.strip_suffix(']'))
                .and_then(|r| r.parse::<usize>().ok())
                .filter(|i| *i < 3)
        };
        if let Some(i) = indexed("laplacian_psi") {
            return Ok(Fault::LaplacianPsi(i));
        }
        if let Some(i) = indexed("laplacian_phi") {
            return Ok(Fault::LaplacianPhi(i));
        }
        match s {
            "d_phi" => Ok(Fault::DPhi),
            "tau0" => Ok(Fault::Tau0),
            _ => Err(format!(
                "unknown fault {s:?} (laplacian_psi[0-2], laplacian_phi[0-2], d_phi, tau0)"
            )),
        }
    }
}

const FAULT_SHIFT: (i64, i64) = (1, 1000);

fn shift<S: Scalar>() -> S {
    S::from_int(FAULT_SHIFT.0) / S::from_int(FAULT_SHIFT.1)
}

fn perturb_laplacian_psi<S: Scalar>(f: &mut Form<S>, index: usize) {
    match index {
        0 => f.add_term(vol_n(), shift()),
        1 => {
            for i in [1, 2] {
                let (m, sign) = cyclic_three_omega(i);
                f.add_term(m, shift::<S>() * S::from_int(sign));
            }
        }
        _ => {
            let (m, sign) = cyclic_three_omega(3);
            f.add_term(m, shift::<S>() * S::from_int(sign));
        }
    }
}

fn perturb_laplacian_phi<S: Scalar>(f: &mut Form<S>, index: usize) {
    match index {
        0 => f.add_term(eta123(), shift()),
        1 => {
            f.add_term(eta_omega(1), shift());
            f.add_term(eta_omega(2), shift());
        }
        _ => f.add_term(eta_omega(3), shift()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub statement: String,
    pub points: usize,
    pub max_residual: f64,
    /// `None` for exact rational checks, which pass only on exact equality.
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl IdentityCheck {
    fn exact(name: &str, statement: &str, points: usize, residuals: &[BigRational]) -> Self {
        let max = residuals
            .iter()
            .map(|r| r.to_f64_lossy().abs())
            .fold(0.0, f64::max);
        IdentityCheck {
            name: name.into(),
            statement: statement.into(),
            points,
            max_residual: max,
            tolerance: None,
            passed: residuals.iter().all(|r| r.is_zero()),
        }
    }

    fn float(name: &str, statement: &str, points: usize, residuals: &[f64], tol: f64) -> Self {
        let max = residuals.iter().fold(0.0, |m: f64, r| if r.is_nan() { f64::INFINITY } else { m.max(*r) });
        IdentityCheck {
            name: name.into(),
            statement: statement.into(),
            points,
            max_residual: max,
            tolerance: Some(tol),
            passed: max < tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub fault: Option<Fault>,
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn max_float_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.max_residual).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub display_points: usize,
    pub reduction_points: usize,
    pub fault: Option<Fault>,
    pub execution: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: DEFAULT_SEED,
            display_points: DISPLAY_POINTS,
            reduction_points: REDUCTION_POINTS,
            fault: None,
            execution: Execution::default(),
        }
    }
}

fn max_abs_exact(f: &Form<BigRational>) -> BigRational {
    f.terms()
        .map(|(_, c)| c.abs())
        .fold(BigRational::zero(), |m, c| if c > m { c } else { m })
}

fn relative_f64(diff: &Form<f64>, reference: &Form<f64>) -> f64 {
    diff.max_abs() / reference.max_abs().max(1.0)
}

/// A random restricted point `(a, b, c)` with both branch signs to be tried.
#[derive(Debug, Clone)]
struct Point {
    a: BigRational,
    b: BigRational,
    c: BigRational,
    /// Independent third scale for the general `dφ` display.
    a2: BigRational,
    epsilon: Sign,
}

fn points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
    (0..n)
        .map(|i| Point {
            a: random_rational(rng),
            b: random_rational(rng),
            c: random_rational(rng),
            a2: random_rational(rng),
            epsilon: if i % 2 == 0 { Sign::Plus } else { Sign::Minus },
        })
        .collect()
}

impl Point {
    fn exact(&self) -> AnsatzParams<BigRational> {
        AnsatzParams::restricted(self.a.clone(), self.b.clone(), self.c.clone(), self.epsilon)
            .expect("random rationals are positive")
    }

    fn general(&self) -> AnsatzParams<BigRational> {
        AnsatzParams::new(
            self.a.clone(),
            self.a2.clone(),
            self.b.clone(),
            self.c.clone(),
            self.epsilon,
        )
        .expect("random rationals are positive")
    }

    fn float(&self) -> AnsatzParams<f64> {
        AnsatzParams::restricted(
            self.a.to_f64_lossy(),
            self.b.to_f64_lossy(),
            self.c.to_f64_lossy(),
            self.epsilon,
        )
        .expect("random rationals are positive")
    }
}

#[derive(Default)]
struct PointResiduals {
    psi_display: BigRational,
    d_psi: BigRational,
    laplacian_psi: BigRational,
    laplacian_psi_f64: f64,
    laplacian_phi: BigRational,
    laplacian_phi_f64: f64,
    d_phi: BigRational,
    tau0: BigRational,
    tau3: BigRational,
}

fn residuals_at(p: &Point, fault: Option<Fault>) -> PointResiduals {
    let q = p.exact();
    let (a, b, c, e) = (&p.a, &p.b, &p.c, q.eps());
    let phi = build_phi(&q);
    let psi = build_psi(&q);

    let mut lap_psi_shown = laplacian_psi_display_form(a, b, c, &e);
    let mut lap_phi_shown = laplacian_phi_display_form(a, b, c, &e);
    if let Some(Fault::LaplacianPsi(i)) = fault {
        perturb_laplacian_psi(&mut lap_psi_shown, i);
    }
    if let Some(Fault::LaplacianPhi(i)) = fault {
        perturb_laplacian_phi(&mut lap_phi_shown, i);
    }

    let fq = p.float();
    let (af, bf, cf, ef) = (fq.a(1), fq.a(3), fq.c(), fq.eps());
    let mut lap_psi_f = laplacian_psi_display_form(af, bf, cf, &ef);
    let mut lap_phi_f = laplacian_phi_display_form(af, bf, cf, &ef);
    if let Some(Fault::LaplacianPsi(i)) = fault {
        perturb_laplacian_psi(&mut lap_psi_f, i);
    }
    if let Some(Fault::LaplacianPhi(i)) = fault {
        perturb_laplacian_phi(&mut lap_phi_f, i);
    }
    let lap_psi_engine_f = laplacian(&build_psi(&fq), &fq);
    let lap_phi_engine_f = laplacian(&build_phi(&fq), &fq);

    let g = p.general();
    let mut d_phi_shown = d_phi_display(&g);
    if fault == Some(Fault::DPhi) {
        d_phi_shown.add_term(vol_n(), shift());
    }

    let t = torsion(&q);
    let mut tau0_shown = tau0_display(a, b, c, &e);
    if fault == Some(Fault::Tau0) {
        tau0_shown += shift::<BigRational>();
    }
    let tau3 = hodge_star(&t.tau3_star, &q);
    let tau3_wedges = max_abs_exact(&tau3.wedge(&phi)).max(max_abs_exact(&tau3.wedge(&psi)));

    PointResiduals {
        psi_display: max_abs_exact(&(&psi - &psi_display(&q))),
        d_psi: max_abs_exact(&psi.d()),
        laplacian_psi: max_abs_exact(&(&laplacian(&psi, &q) - &lap_psi_shown)),
        laplacian_psi_f64: relative_f64(&(&lap_psi_engine_f - &lap_psi_f), &lap_psi_f),
        laplacian_phi: max_abs_exact(&(&laplacian(&phi, &q) - &lap_phi_shown)),
        laplacian_phi_f64: relative_f64(&(&lap_phi_engine_f - &lap_phi_f), &lap_phi_f),
        d_phi: max_abs_exact(&(&build_phi(&g).d() - &d_phi_shown)),
        tau0: (t.tau0 - tau0_shown).abs(),
        tau3: tau3_wedges,
    }
}

fn nearly_parallel_checks(fault: Option<Fault>) -> Vec<IdentityCheck> {
    let one = ratio(1, 1);
    let q = AnsatzParams::restricted(one.clone(), one.clone(), one.clone(), Sign::Minus).unwrap();
    let t = torsion(&q);
    let mut tau0_shown = tau0_display(&one, &one, &one, &q.eps());
    if fault == Some(Fault::Tau0) {
        tau0_shown += shift::<BigRational>();
    }
    let four = ratio(4, 1);
    let dev = &t.d_phi - &build_psi(&q).scale(&four);
    let exact = IdentityCheck::exact(
        "nearly_parallel_3_sasakian",
        "at (a,b,c,eps) = (1,1,1,-1): tau0 = 4 (engine and display) and d(phi) = 4 psi",
        1,
        &[
            (t.tau0.clone() - four.clone()).abs(),
            (tau0_shown - four).abs(),
            max_abs_exact(&dev),
        ],
    );

    let s = 1.0 / 5f64.sqrt();
    let qf = AnsatzParams::restricted(s, s, 1.0, Sign::Plus).unwrap();
    let tf = torsion(&qf);
    let mut shown = tau0_display(&s, &s, &1.0, &1.0);
    if fault == Some(Fault::Tau0) {
        shown += shift::<f64>();
    }
    let expected = 12.0 / 5f64.sqrt();
    let dev = &tf.d_phi - &build_psi(&qf).scale(&tf.tau0);
    let float = IdentityCheck::float(
        "nearly_parallel_squashed",
        "at (1/sqrt5, 1/sqrt5, 1, +1): tau0 = 12/sqrt5 (engine and display) and d(phi) = tau0 psi",
        1,
        &[
            (tf.tau0 - expected).abs(),
            (shown - expected).abs(),
            dev.max_abs(),
        ],
        FLOAT_TOLERANCE,
    );
    vec![exact, float]
}

fn negation_check(rng: &mut ChaCha8Rng, n: usize) -> IdentityCheck {
    let mut residuals = Vec::with_capacity(n);
    for i in 0..n {
        let (u, v) = (rng.random_range(0.01..4.0), rng.random_range(0.0..4.0));
        let e = if i % 2 == 0 { Sign::Plus } else { Sign::Minus };
        let f = reduced_rhs(FlowKind::flow(e), u, v).expect("u > 0");
        let c = reduced_rhs(FlowKind::coflow(e), u, v).expect("u > 0");
        // Exact: any nonzero difference is a failure.
        residuals.push(if f[0] == -c[0] && f[1] == -c[1] { 0.0 } else { f64::INFINITY });
    }
    IdentityCheck {
        tolerance: Some(0.0),
        passed: residuals.iter().all(|r| *r == 0.0),
        ..IdentityCheck::float(
            "negation",
            "the Laplacian flow field is exactly the negated coflow field",
            n,
            &residuals,
            0.0,
        )
    }
}

fn invariant_line_check(rng: &mut ChaCha8Rng, n: usize) -> IdentityCheck {
    let mut residuals = Vec::with_capacity(n);
    let mut broken_off_line = true;
    for _ in 0..n {
        let x: f64 = rng.random_range(0.01..4.0);
        for k in [FlowKind::coflow(Sign::Plus), FlowKind::flow(Sign::Plus), FlowKind::ricci()] {
            let r = reduced_rhs(k, x, x).expect("u > 0");
            residuals.push((r[0] - r[1]).abs() / r[0].abs().max(1.0));
        }
        let r = reduced_rhs(FlowKind::ricci(), 1.0, x).expect("u > 0");
        residuals.push(r[0].abs());
        if (x - 1.0).abs() > 1e-3 {
            let r = reduced_rhs(FlowKind::coflow(Sign::Minus), x, x).expect("u > 0");
            broken_off_line &= (r[0] - r[1]).abs() > 1e-9;
        }
    }
    let mut check = IdentityCheck::float(
        "invariant_lines",
        "X = Y is invariant for eps = +1, A = B and A = 1 for Ricci; X = Y is not invariant for eps = -1 away from (1,1)",
        n,
        &residuals,
        FLOAT_TOLERANCE,
    );
    check.passed &= broken_off_line;
    check
}

/// Run the whole suite.
pub fn run_identity_suite(opts: &VerifyOptions) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let pts = points(&mut rng, opts.display_points);
    let res = par::map(&pts, opts.execution, |p| residuals_at(p, opts.fault));
    let n = pts.len();
    let collect_exact = |f: fn(&PointResiduals) -> BigRational| res.iter().map(f).collect::<Vec<_>>();
    let collect_float = |f: fn(&PointResiduals) -> f64| res.iter().map(f).collect::<Vec<_>>();

    let mut checks = vec![
        IdentityCheck::exact("psi_is_star_phi", "*phi equals the displayed 4-form psi", n, &collect_exact(|r| r.psi_display.clone())),
        IdentityCheck::exact("d_psi_zero", "d(psi) = 0", n, &collect_exact(|r| r.d_psi.clone())),
        IdentityCheck::exact("laplacian_psi", "engine Laplacian of psi equals the coflow display", n, &collect_exact(|r| r.laplacian_psi.clone())),
        IdentityCheck::float("laplacian_psi_f64", "same, in double precision (relative)", n, &collect_float(|r| r.laplacian_psi_f64), FLOAT_TOLERANCE),
        IdentityCheck::exact("laplacian_phi", "engine Laplacian of phi equals the flow display", n, &collect_exact(|r| r.laplacian_phi.clone())),
        IdentityCheck::float("laplacian_phi_f64", "same, in double precision (relative)", n, &collect_float(|r| r.laplacian_phi_f64), FLOAT_TOLERANCE),
        IdentityCheck::exact("d_phi", "d(phi) equals the four-term display for independent a1, a2, a3", n, &collect_exact(|r| r.d_phi.clone())),
        IdentityCheck::exact("tau0", "tau0 from projection equals the closed form", n, &collect_exact(|r| r.tau0.clone())),
        IdentityCheck::exact("tau3_orthogonal", "tau3 ^ phi = tau3 ^ psi = 0", n, &collect_exact(|r| r.tau3.clone())),
    ];
    checks.extend(nearly_parallel_checks(opts.fault));
    for k in FlowKind::all() {
        let r = verify_reduction_with(k, opts.reduction_points, rng.random(), opts.execution);
        let mut residuals = vec![r.chain_rule_max_residual];
        residuals.extend(r.exterior_max_residual);
        let statement = if k.is_laplacian() {
            "reduced field equals the chain-rule image of the full system, which equals the engine Laplacian"
        } else {
            "reduced field equals the chain-rule image of the full system"
        };
        checks.push(IdentityCheck::float(
            &format!("reduction_{}", k.label().replace(' ', "_").replace('=', "")),
            statement,
            r.points,
            &residuals,
            r.tolerance,
        ));
    }
    checks.push(negation_check(&mut rng, opts.reduction_points));
    checks.push(invariant_line_check(&mut rng, opts.reduction_points));

    let passed = checks.iter().all(|c| c.passed);
    VerificationReport {
        seed: opts.seed,
        fault: opts.fault,
        checks,
        passed,
    }
}
