//! Acceptance criteria 1–12, one `[PASS]`/`[FAIL]` line each. Exits nonzero
//! when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use g2flow::dynamics::{
    analyze, axis_intercepts, basin_map, integrate, nullcline_max_u, separatrix, separatrix_options,
    Grid, IntegrateOptions, Region, Terminal, Which,
};
use g2flow::exterior::{
    build_phi, build_psi, d_phi_display, laplacian, laplacian_phi_display_form,
    laplacian_psi_display_form, tau0_display, torsion, AnsatzParams, Form,
};
use g2flow::flows::{c2_rate, random_rational, reduced_rhs, verify_reduction, FlowKind, PhaseState};
use g2flow::scalar::ratio;
use g2flow::verify::DEFAULT_SEED;
use g2flow::Sign;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ stream)
}

fn exact_triple(r: &mut ChaCha8Rng) -> [BigRational; 3] {
    [random_rational(r), random_rational(r), random_rational(r)]
}

fn float_triple(r: &mut ChaCha8Rng) -> [f64; 3] {
    [r.random_range(0.1..5.0), r.random_range(0.1..5.0), r.random_range(0.1..5.0)]
}

fn exact_params(t: &[BigRational; 3], e: Sign) -> AnsatzParams<BigRational> {
    AnsatzParams::restricted(t[0].clone(), t[1].clone(), t[2].clone(), e).unwrap()
}

fn float_params(t: &[f64; 3], e: Sign) -> AnsatzParams<f64> {
    AnsatzParams::restricted(t[0], t[1], t[2], e).unwrap()
}

fn relative(diff: &Form<f64>, reference: &Form<f64>) -> f64 {
    diff.max_abs() / reference.max_abs().max(1.0)
}

type Drift = fn([f64; 2]) -> f64;

const POINTS: usize = 50;

/// Exact agreement at rational points and `< 1e−12` at float points, for a
/// Laplacian display, on both branches.
fn laplacian_display_check(
    stream: u64,
    engine: fn(&AnsatzParams<BigRational>) -> Form<BigRational>,
    engine_f: fn(&AnsatzParams<f64>) -> Form<f64>,
    shown: fn(&BigRational, &BigRational, &BigRational, &BigRational) -> Form<BigRational>,
    shown_f: fn(&f64, &f64, &f64, &f64) -> Form<f64>,
    extra: Option<fn(&AnsatzParams<BigRational>) -> bool>,
) -> (usize, f64, bool) {
    let mut r = rng(stream);
    let mut exact_failures = 0;
    let mut worst = 0.0_f64;
    let mut extra_ok = true;
    for e in Sign::BOTH {
        for _ in 0..POINTS {
            let t = exact_triple(&mut r);
            let p = exact_params(&t, e);
            let diff = &engine(&p) - &shown(&t[0], &t[1], &t[2], &p.eps());
            if !diff.is_zero() {
                exact_failures += 1;
            }
            if let Some(f) = extra {
                extra_ok &= f(&p);
            }
            let tf = float_triple(&mut r);
            let q = float_params(&tf, e);
            let shown = shown_f(&tf[0], &tf[1], &tf[2], &q.eps());
            worst = worst.max(relative(&(&engine_f(&q) - &shown), &shown));
        }
    }
    (exact_failures, worst, extra_ok)
}

fn lap_psi<S: g2flow::scalar::Scalar>(p: &AnsatzParams<S>) -> Form<S> {
    laplacian(&build_psi(p), p)
}

fn lap_phi<S: g2flow::scalar::Scalar>(p: &AnsatzParams<S>) -> Form<S> {
    laplacian(&build_phi(p), p)
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let (bad, worst, closed) = laplacian_display_check(
        1,
        lap_psi,
        lap_psi,
        laplacian_psi_display_form,
        laplacian_psi_display_form,
        Some(|p| build_psi(p).d().is_zero()),
    );
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad == 0 && closed && worst < 1e-12 && secs < 5.0,
        format!(
            "d(psi)=0 {}; Laplacian of psi vs display: {bad}/{} exact mismatches, float max rel {worst:e}; {secs:.2} s",
            if closed { "holds" } else { "FAILS" },
            2 * POINTS
        ),
    )
}

fn ac2() -> Outcome {
    let (bad, worst, _) = laplacian_display_check(
        2,
        lap_phi,
        lap_phi,
        laplacian_phi_display_form,
        laplacian_phi_display_form,
        None,
    );
    outcome(
        bad == 0 && worst < 1e-12,
        format!(
            "Laplacian of phi vs display: {bad}/{} exact mismatches, float max rel {worst:e}",
            2 * POINTS
        ),
    )
}

fn ac3() -> Outcome {
    let mut r = rng(3);
    let mut d_phi_bad = 0;
    let mut tau0_bad = 0;
    for k in 0..POINTS {
        let e = if k % 2 == 0 { Sign::Plus } else { Sign::Minus };
        let t = exact_triple(&mut r);
        let a2 = random_rational(&mut r);
        let g = AnsatzParams::new(t[0].clone(), a2, t[1].clone(), t[2].clone(), e).unwrap();
        if !(&build_phi(&g).d() - &d_phi_display(&g)).is_zero() {
            d_phi_bad += 1;
        }
        let p = exact_params(&t, e);
        if torsion(&p).tau0 != tau0_display(&t[0], &t[1], &t[2], &p.eps()) {
            tau0_bad += 1;
        }
    }

    let one = ratio(1, 1);
    let four = ratio(4, 1);
    let p = AnsatzParams::restricted(one.clone(), one.clone(), one, Sign::Minus).unwrap();
    let tor = torsion(&p);
    let sasakian = tor.tau0 == four && (&tor.d_phi - &build_psi(&p).scale(&four)).is_zero();

    let s = 1.0 / 5f64.sqrt();
    let q = AnsatzParams::restricted(s, s, 1.0, Sign::Plus).unwrap();
    let tq = torsion(&q);
    let tau0_err = (tq.tau0 - 12.0 / 5f64.sqrt()).abs();
    let dev = (&tq.d_phi - &build_psi(&q).scale(&tq.tau0)).max_abs();

    outcome(
        d_phi_bad == 0 && tau0_bad == 0 && sasakian && tau0_err < 1e-12 && dev < 1e-12,
        format!(
            "d(phi) mismatches {d_phi_bad}/{POINTS}, tau0 mismatches {tau0_bad}/{POINTS}; \
             (1,1,1,-1): tau0=4 and d(phi)=4 psi {}; squashed: |tau0-12/sqrt5| = {tau0_err:e}, |d(phi)-tau0 psi| = {dev:e}",
            if sasakian { "exact" } else { "FAIL" }
        ),
    )
}

fn ac4() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, kind) in FlowKind::all().into_iter().enumerate() {
        let rep = verify_reduction(kind, 100, DEFAULT_SEED + k as u64);
        ok &= rep.passed;
        parts.push(match rep.exterior_max_residual {
            Some(x) => format!("{kind}: chain {:e}, engine {x:e}", rep.chain_rule_max_residual),
            None => format!("{kind}: chain {:e}", rep.chain_rule_max_residual),
        });
    }
    outcome(ok, parts.join("; "))
}

fn ac5() -> Outcome {
    let cases = [
        (FlowKind::coflow(Sign::Plus), [0.2, 0.2], [-20.0, -64.0 / 5.0]),
        (FlowKind::coflow(Sign::Minus), [1.0, 1.0], [-64.0, -4.0]),
        (FlowKind::ricci(), [0.2, 0.2], [-208.0 / 5.0, 16.0]),
        (FlowKind::ricci(), [1.0, 1.0], [-16.0, -16.0]),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (kind, at, want) in cases {
        let got = analyze(kind, at).ok().and_then(|r| r.eigenvalues.real());
        let err = got
            .map(|g| (g[0] - want[0]).abs().max((g[1] - want[1]).abs()))
            .unwrap_or(f64::INFINITY);
        ok &= err < 1e-9;
        parts.push(format!("{kind} at ({}, {}): {:?} (err {err:e})", at[0], at[1], got));
    }
    outcome(ok, parts.join("; "))
}

fn ac6() -> Outcome {
    let mut r = rng(6);
    let mut bad = 0;
    for e in Sign::BOTH {
        for _ in 0..100 {
            let (u, v) = (r.random_range(0.01..3.0), r.random_range(0.0..3.0));
            let c = reduced_rhs(FlowKind::coflow(e), u, v).unwrap();
            let f = reduced_rhs(FlowKind::flow(e), u, v).unwrap();
            if f[0] != -c[0] || f[1] != -c[1] {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("{bad}/200 points differ from exact negation"))
}

fn ac7() -> Outcome {
    let opts = IntegrateOptions {
        s_max: 5.0,
        stop_on_convergence: false,
        ..Default::default()
    };
    let runs: Vec<(&str, FlowKind, [f64; 2], Drift)> = vec![
        ("coflow+ X=Y", FlowKind::coflow(Sign::Plus), [0.05, 0.05], |p| (p[0] - p[1]).abs()),
        ("coflow+ X=Y", FlowKind::coflow(Sign::Plus), [0.6, 0.6], |p| (p[0] - p[1]).abs()),
        ("coflow+ X=Y", FlowKind::coflow(Sign::Plus), [1.5, 1.5], |p| (p[0] - p[1]).abs()),
        ("flow+ X=Y", FlowKind::flow(Sign::Plus), [0.15, 0.15], |p| (p[0] - p[1]).abs()),
        ("flow+ X=Y", FlowKind::flow(Sign::Plus), [0.25, 0.25], |p| (p[0] - p[1]).abs()),
        ("flow+ X=Y", FlowKind::flow(Sign::Plus), [1.0, 1.0], |p| (p[0] - p[1]).abs()),
        ("ricci A=B", FlowKind::ricci(), [0.1, 0.1], |p| (p[0] - p[1]).abs()),
        ("ricci A=B", FlowKind::ricci(), [0.5, 0.5], |p| (p[0] - p[1]).abs()),
        ("ricci A=B", FlowKind::ricci(), [1.7, 1.7], |p| (p[0] - p[1]).abs()),
        ("ricci A=1", FlowKind::ricci(), [1.0, 0.3], |p| (p[0] - 1.0).abs()),
        ("ricci A=1", FlowKind::ricci(), [1.0, 1.8], |p| (p[0] - 1.0).abs()),
    ];
    let mut worst = 0.0_f64;
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, kind, p, drift) in runs {
        match integrate(kind, PhaseState::new(p[0], p[1], 1.0), &opts) {
            Ok(tr) => {
                let d = tr.samples.iter().map(|s| drift(s.point())).fold(0.0, f64::max);
                worst = worst.max(d);
                ok &= d < 1e-8;
                parts.push(format!("{name} from ({}, {}): {d:e} to s={:.3} [{}]", p[0], p[1], tr.last().s, tr.terminal.tag()));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    outcome(ok, format!("max drift {worst:e}; {}", parts.join("; ")))
}

fn ac8() -> Outcome {
    let start = Instant::now();
    let region = Region::new(0.05, 2.0, 0.05, 2.0).unwrap();
    let grid = Grid::square(region, 20).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (e, target) in [(Sign::Plus, [0.2, 0.2]), (Sign::Minus, [1.0, 1.0])] {
        let map = basin_map(FlowKind::coflow(e), grid, &IntegrateOptions::default());
        let good = map
            .cells
            .iter()
            .filter(|c| {
                matches!(&c.outcome, Ok(t) if t.converged_to(target, 1e-12))
                    && c.final_distance.is_some_and(|d| d < 1e-6)
            })
            .count();
        let worst = map.cells.iter().filter_map(|c| c.final_distance).fold(0.0, f64::max);
        ok &= good == map.cells.len();
        parts.push(format!("eps={e}: {good}/{} to ({}, {}), worst final distance {worst:e}", map.cells.len(), target[0], target[1]));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    outcome(ok, format!("{}; {secs:.2} s", parts.join("; ")))
}

/// Side of the point `p` relative to the polyline through the stable manifold.
fn side_of(manifold: &[[f64; 2]], p: [f64; 2]) -> f64 {
    let (k, _) = manifold
        .iter()
        .enumerate()
        .map(|(k, q)| (k, (q[0] - p[0]).hypot(q[1] - p[1])))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let (i, j) = if k + 1 < manifold.len() { (k, k + 1) } else { (k - 1, k) };
    let t = [manifold[j][0] - manifold[i][0], manifold[j][1] - manifold[i][1]];
    let w = [p[0] - manifold[k][0], p[1] - manifold[k][1]];
    (t[0] * w[1] - t[1] * w[0]).signum()
}

fn ac9() -> Outcome {
    let kind = FlowKind::ricci();
    let saddle = analyze(kind, [0.2, 0.2]).unwrap();
    let sep = match separatrix(kind, &saddle, &separatrix_options()) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    // One connected polyline: branch 0 reversed, the saddle, branch 1.
    let mut manifold: Vec<[f64; 2]> = sep.stable[0].samples.iter().rev().map(|s| s.point()).collect();
    manifold.push(sep.saddle);
    manifold.extend(sep.stable[1].samples.iter().map(|s| s.point()));

    let e_u = sep.unstable_eigenvector;
    let opts = IntegrateOptions::default();
    let mut fates = Vec::new();
    let mut sides = Vec::new();
    for sgn in [1.0, -1.0] {
        let p = [0.2 + sgn * 1e-2 * e_u[0], 0.2 + sgn * 1e-2 * e_u[1]];
        sides.push(side_of(&manifold, p));
        let t = integrate(kind, PhaseState::new(p[0], p[1], 1.0), &opts).map(|t| t.terminal);
        fates.push((p, t));
    }
    let opposite = sides[0] * sides[1] < 0.0;
    let converged = fates.iter().filter(|(_, t)| matches!(t, Ok(t) if t.converged_to([1.0, 1.0], 1e-12))).count();
    let collapsed = fates.iter().filter(|(_, t)| matches!(t, Ok(Terminal::CollapseOrigin))).count();

    // Region R: 0 < A < 1/5, between γ_B below and γ_A above.
    let gamma_a = |a: f64| (2.0 * a - 4.0 * a * a) / (1.0 + a);
    let gamma_b = |a: f64| (6.0 * a * a - 2.0 * a * a * a) / (1.0 + 3.0 * a * a);
    let mut r_total = 0;
    let mut r_collapsed = 0;
    for i in 1..10 {
        let a = 0.02 * i as f64;
        for j in 1..10 {
            let b = gamma_b(a) + (gamma_a(a) - gamma_b(a)) * j as f64 / 10.0;
            r_total += 1;
            if matches!(
                integrate(kind, PhaseState::new(a, b, 1.0), &opts).map(|t| t.terminal),
                Ok(Terminal::CollapseOrigin)
            ) {
                r_collapsed += 1;
            }
        }
    }
    let fate_text: Vec<String> = fates
        .iter()
        .map(|(p, t)| {
            format!(
                "({:.6}, {:.6}) -> {}",
                p[0],
                p[1],
                t.as_ref().map(|t| t.to_string()).unwrap_or_else(|e| e.to_string())
            )
        })
        .collect();
    outcome(
        opposite && converged == 1 && collapsed == 1 && r_collapsed == r_total,
        format!(
            "sides of stable manifold {}; {}; region R {r_collapsed}/{r_total} collapse_origin",
            if opposite { "opposite" } else { "SAME" },
            fate_text.join(", ")
        ),
    )
}

fn ac10() -> Outcome {
    let opts = IntegrateOptions::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (e, centre) in [(Sign::Plus, [0.2, 0.2]), (Sign::Minus, [1.0, 1.0])] {
        let kind = FlowKind::flow(e);
        let mut exits = Vec::new();
        for k in 0..8 {
            let th = k as f64 * std::f64::consts::FRAC_PI_4;
            let p = [centre[0] + 1e-3 * th.cos(), centre[1] + 1e-3 * th.sin()];
            let exit = integrate(kind, PhaseState::new(p[0], p[1], 1.0), &opts).ok().and_then(|tr| {
                tr.samples
                    .iter()
                    .find(|s| (s.u - centre[0]).hypot(s.v - centre[1]) > 0.1)
                    .map(|s| s.s)
            });
            ok &= exit.is_some_and(f64::is_finite);
            exits.push(exit);
        }
        let s_max = exits.iter().flatten().fold(0.0_f64, |m, s| m.max(*s));
        let s_min = exits.iter().flatten().fold(f64::INFINITY, |m, s| m.min(*s));
        parts.push(format!(
            "eps={e}: {}/8 exit the 0.1 ball, s in [{s_min:.4}, {s_max:.4}]",
            exits.iter().flatten().count()
        ));
    }
    outcome(ok, parts.join("; "))
}

fn ac11() -> Outcome {
    let k = FlowKind::ricci();
    let ga = axis_intercepts(k, Which::UNullcline, 5.0);
    let gb = axis_intercepts(k, Which::VNullcline, 5.0);
    let near = |got: &[f64], want: [f64; 2]| {
        got.len() == 2 && (got[0] - want[0]).abs() < 1e-9 && (got[1] - want[1]).abs() < 1e-9
    };
    let x_bar = nullcline_max_u(FlowKind::coflow(Sign::Minus), Which::VNullcline, [0.01, 3.0]).ok().flatten();
    let in_range = x_bar.is_some_and(|x| x > 1.0 && x < 2.0);
    outcome(
        near(&ga, [0.0, 0.5]) && near(&gb, [0.0, 3.0]) && in_range,
        format!("gamma_A meets B=0 at {ga:?}; gamma_B at {gb:?}; coflow eps=-1 gamma_Y max u = {x_bar:?}"),
    )
}

fn ac12() -> Outcome {
    let coflow = c2_rate(FlowKind::coflow(Sign::Minus), 1.0, 1.0).unwrap_or(f64::NAN);
    let ricci = c2_rate(FlowKind::ricci(), 1.0, 1.0).unwrap_or(f64::NAN);
    let coflow_ok = (coflow - 16.0).abs() < 1e-12;
    let ricci_ok = (ricci + 12.0).abs() < 1e-12;
    outcome(
        coflow_ok && ricci_ok,
        format!(
            "coflow eps=-1 at (1,1): d(c2)/dt = {coflow} (expected 16{}); ricci at (1,1): d(c2)/dt = {ricci} (expected -12)",
            if coflow_ok { "" } else { "; d(c4)/dt = 2 c2 d(c2)/dt would be 16" }
        ),
    )
}

type Check = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(&str, Check); 12] = [
        ("identity suite for psi", ac1),
        ("Laplacian of phi", ac2),
        ("d(phi), tau0 and nearly parallel points", ac3),
        ("reduced-system oracle", ac4),
        ("eigenvalue regression", ac5),
        ("negation identity", ac6),
        ("invariant lines", ac7),
        ("coflow convergence", ac8),
        ("Ricci dichotomy", ac9),
        ("Laplacian-flow instability", ac10),
        ("nullcline anchors", ac11),
        ("scale behaviour", ac12),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.passed {
            failed += 1;
        }
        println!(
            "[{}] AC-{} {name}: {} ({:.2} s)",
            if o.passed { "PASS" } else { "FAIL" },
            k + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
