use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::DynamicsError;
use crate::flows::{c2_rate, reduced_jacobian, reduced_rhs, FlowKind, PhaseState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Forward,
    /// Integrates the negated field. `s` still increases along the stored
    /// samples; the rescaled time actually elapsed is `−s`.
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forward" => Ok(Direction::Forward),
            "backward" => Ok(Direction::Backward),
            other => Err(format!("unknown direction {other:?} (forward, backward)")),
        }
    }
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    pub s_max: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
    pub collapse_floor: f64,
    /// A collapse with `max(u, v)` below this is tagged as collapse to the origin.
    pub origin_radius: f64,
    pub divergence_ceiling: f64,
    pub convergence_rhs: f64,
    pub convergence_radius: f64,
    /// Points treated as attractors for the convergence event; `None` uses
    /// the interior critical points of the flow.
    pub targets: Option<Vec<[f64; 2]>>,
    pub stop_on_convergence: bool,
    pub direction: Direction,
    /// Keep every accepted step, or only the endpoints.
    pub record: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            rtol: 1e-9,
            atol: 1e-12,
            s_max: 200.0,
            initial_step: 1e-4,
            max_step: 0.5,
            min_step: 1e-14,
            max_steps: 500_000,
            collapse_floor: 1e-6,
            origin_radius: 1e-3,
            divergence_ceiling: 1e6,
            convergence_rhs: 1e-10,
            convergence_radius: 1e-4,
            targets: None,
            stop_on_convergence: true,
            direction: Direction::Forward,
            record: true,
        }
    }
}

impl IntegrateOptions {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let positive = [
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("s_max", self.s_max),
            ("initial_step", self.initial_step),
            ("max_step", self.max_step),
            ("min_step", self.min_step),
            ("collapse_floor", self.collapse_floor),
            ("origin_radius", self.origin_radius),
            ("divergence_ceiling", self.divergence_ceiling),
            ("convergence_rhs", self.convergence_rhs),
            ("convergence_radius", self.convergence_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DynamicsError::InvalidOption(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.max_steps == 0 {
            return Err(DynamicsError::InvalidOption("max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Terminal {
    Converged { point: [f64; 2] },
    CollapseOrigin,
    CollapseBoundary { point: [f64; 2] },
    Diverged,
    /// `c²` left the range of `f64` while `(u, v)` stayed finite.
    ScaleOverflow,
    MaxTime,
    StepUnderflow,
    StepLimit,
}

impl Terminal {
    /// Short tag without coordinates.
    pub fn tag(&self) -> &'static str {
        match self {
            Terminal::Converged { .. } => "converged",
            Terminal::CollapseOrigin => "collapse_origin",
            Terminal::CollapseBoundary { .. } => "collapse_boundary",
            Terminal::Diverged => "diverged",
            Terminal::ScaleOverflow => "scale_overflow",
            Terminal::MaxTime => "max_time",
            Terminal::StepUnderflow => "step_underflow",
            Terminal::StepLimit => "step_limit",
        }
    }

    pub fn converged_to(&self, p: [f64; 2], tol: f64) -> bool {
        matches!(self, Terminal::Converged { point } if dist(*point, p) <= tol)
    }

    pub fn is_collapse(&self) -> bool {
        matches!(self, Terminal::CollapseOrigin | Terminal::CollapseBoundary { .. })
    }
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminal::Converged { point: [u, v] } => write!(f, "converged({u},{v})"),
            Terminal::CollapseBoundary { point: [u, v] } => write!(f, "collapse_boundary({u},{v})"),
            other => f.write_str(other.tag()),
        }
    }
}

/// Inverse of `Display`: a bare tag, or `converged(u,v)` /
/// `collapse_boundary(u,v)`.
impl FromStr for Terminal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("unrecognized terminal {s:?}");
        if let Some((tag, rest)) = s.split_once('(') {
            let inner = rest.strip_suffix(')').ok_or_else(bad)?;
            let (u, v) = inner.split_once(',').ok_or_else(bad)?;
            let point = [
                u.trim().parse::<f64>().map_err(|_| bad())?,
                v.trim().parse::<f64>().map_err(|_| bad())?,
            ];
            return match tag {
                "converged" => Ok(Terminal::Converged { point }),
                "collapse_boundary" => Ok(Terminal::CollapseBoundary { point }),
                _ => Err(bad()),
            };
        }
        Ok(match s {
            "collapse_origin" => Terminal::CollapseOrigin,
            "diverged" => Terminal::Diverged,
            "scale_overflow" => Terminal::ScaleOverflow,
            "max_time" => Terminal::MaxTime,
            "step_underflow" => Terminal::StepUnderflow,
            "step_limit" => Terminal::StepLimit,
            _ => return Err(bad()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub s: f64,
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub c2: f64,
}

impl Sample {
    pub fn point(&self) -> [f64; 2] {
        [self.u, self.v]
    }

    pub fn phase_state(&self) -> PhaseState {
        PhaseState {
            u: self.u,
            v: self.v,
            c2: self.c2,
            t: self.t,
            s: self.s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub kind: FlowKind,
    pub direction: Direction,
    pub samples: Vec<Sample>,
    pub terminal: Terminal,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories hold at least one sample")
    }
}

pub(crate) fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

type State = [f64; 4];

const LOG_C2_CEILING: f64 = 700.0;

/// Largest step keeping `h·‖J‖_F` inside the real stability interval of the
/// pair. Without it the step settles at the stability limit near a stiff
/// node and the state jitters at tolerance level instead of converging.
const STABILITY_LIMIT: f64 = 2.5;

fn stability_cap(kind: FlowKind, y: &State) -> f64 {
    match reduced_jacobian(kind, y[0], y[1]) {
        Ok(j) => {
            let f = j.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
            if f > 0.0 {
                STABILITY_LIMIT / f
            } else {
                f64::INFINITY
            }
        }
        Err(_) => f64::INFINITY,
    }
}

/// `d/ds (u, v, ln c², t)`.
fn field(kind: FlowKind, sign: f64, y: &State) -> Option<State> {
    let [u, v, log_c2, _] = *y;
    if !(u > 0.0 && v > 0.0) {
        return None;
    }
    let [du, dv] = reduced_rhs(kind, u, v).ok()?;
    let rate = c2_rate(kind, u, v).ok()?;
    let out = [sign * du, sign * dv, sign * rate, sign * log_c2.exp()];
    out.iter().all(|x| x.is_finite()).then_some(out)
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct StepResult {
    y: State,
    k_end: State,
    err: f64,
}

fn dopri_step(
    kind: FlowKind,
    sign: f64,
    y: &State,
    k1: &State,
    h: f64,
    opts: &IntegrateOptions,
) -> Option<StepResult> {
    let mut k = [[0.0; 4]; 7];
    k[0] = *k1;
    for stage in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage][j];
            if a != 0.0 {
                for i in 0..4 {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[stage] = field(kind, sign, &ys)?;
        if stage == 6 {
            let mut err = 0.0;
            for i in 0..4 {
                let mut e = 0.0;
                for (s, ks) in k.iter().enumerate() {
                    e += E[s] * ks[i];
                }
                let scale = opts.atol + opts.rtol * y[i].abs().max(ys[i].abs());
                err += (h * e / scale).powi(2);
            }
            return Some(StepResult {
                y: ys,
                k_end: k[6],
                err: (err / 4.0).sqrt(),
            });
        }
    }
    unreachable!()
}

fn sample(s: f64, y: &State) -> Sample {
    Sample {
        s,
        t: y[3],
        u: y[0],
        v: y[1],
        c2: y[2].exp(),
    }
}

fn check_events(y: &State, k: &State, targets: &[[f64; 2]], opts: &IntegrateOptions) -> Option<Terminal> {
    let p = [y[0], y[1]];
    if opts.stop_on_convergence {
        let speed = k[0].hypot(k[1]);
        if speed < opts.convergence_rhs {
            if let Some(t) = targets.iter().find(|t| dist(p, **t) < opts.convergence_radius) {
                return Some(Terminal::Converged { point: *t });
            }
        }
    }
    if p[0].min(p[1]) < opts.collapse_floor {
        return Some(if p[0].max(p[1]) < opts.origin_radius {
            Terminal::CollapseOrigin
        } else {
            Terminal::CollapseBoundary { point: p }
        });
    }
    if p[0].hypot(p[1]) > opts.divergence_ceiling {
        return Some(Terminal::Diverged);
    }
    if y[2] > LOG_C2_CEILING || !y[3].is_finite() {
        return Some(Terminal::ScaleOverflow);
    }
    None
}

/// Integrate the rescaled flow together with `ln c²` and `t`, using the
/// Dormand–Prince 5(4) pair with events checked after every accepted step.
pub fn integrate(
    kind: FlowKind,
    initial: PhaseState,
    opts: &IntegrateOptions,
) -> Result<Trajectory, DynamicsError> {
    opts.validate()?;
    initial.validate().map_err(DynamicsError::InvalidInitial)?;
    let sign = opts.direction.sign();
    let targets = opts
        .targets
        .clone()
        .unwrap_or_else(|| kind.interior_critical_points());
    let mut y: State = [initial.u, initial.v, initial.c2.ln(), initial.t];
    let mut k = field(kind, sign, &y).ok_or({
        DynamicsError::InvalidInitial(crate::flows::FlowError::NonPositive {
            what: "field at initial state",
            value: f64::NAN,
        })
    })?;
    let s0 = initial.s;
    let mut s = s0;
    let mut samples = vec![sample(s, &y)];
    let mut accepted = 0;
    let mut rejected = 0;
    let mut h = opts.initial_step.min(opts.max_step).min(stability_cap(kind, &y));
    let finish = |samples: &mut Vec<Sample>, s: f64, y: &State, accepted, rejected, terminal| {
        if samples.last().is_none_or(|l: &Sample| l.s != s) {
            samples.push(sample(s, y));
        }
        Trajectory {
            kind,
            direction: opts.direction,
            samples: std::mem::take(samples),
            terminal,
            accepted_steps: accepted,
            rejected_steps: rejected,
        }
    };
    if let Some(t) = check_events(&y, &k, &targets, opts) {
        return Ok(finish(&mut samples, s, &y, 0, 0, t));
    }
    let s_end = s0 + opts.s_max;
    loop {
        if s >= s_end {
            return Ok(finish(&mut samples, s, &y, accepted, rejected, Terminal::MaxTime));
        }
        if accepted + rejected >= opts.max_steps {
            return Ok(finish(&mut samples, s, &y, accepted, rejected, Terminal::StepLimit));
        }
        let last = s + h >= s_end;
        let h_try = if last { s_end - s } else { h };
        if h_try < opts.min_step * s.abs().max(1.0) && !last {
            return Ok(finish(&mut samples, s, &y, accepted, rejected, Terminal::StepUnderflow));
        }
        match dopri_step(kind, sign, &y, &k, h_try, opts) {
            Some(step) if step.err <= 1.0 => {
                s = if last { s_end } else { s + h_try };
                y = step.y;
                k = step.k_end;
                accepted += 1;
                if opts.record {
                    samples.push(sample(s, &y));
                }
                if let Some(t) = check_events(&y, &k, &targets, opts) {
                    return Ok(finish(&mut samples, s, &y, accepted, rejected, t));
                }
                let factor = if step.err == 0.0 {
                    5.0
                } else {
                    (0.9 * step.err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = (h_try * factor).min(opts.max_step).min(stability_cap(kind, &y));
            }
            Some(step) => {
                rejected += 1;
                h = h_try * (0.9 * step.err.powf(-0.2)).clamp(0.1, 0.9);
            }
            None => {
                rejected += 1;
                h = h_try * 0.5;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sign::Sign;

    /// Classical fixed-step RK4 on `(u, v)`, the independent oracle.
    fn rk4(kind: FlowKind, p: [f64; 2], h: f64, steps: usize) -> [f64; 2] {
        let f = |p: [f64; 2]| reduced_rhs(kind, p[0], p[1]).unwrap();
        let mut p = p;
        for _ in 0..steps {
            let k1 = f(p);
            let k2 = f([p[0] + h / 2.0 * k1[0], p[1] + h / 2.0 * k1[1]]);
            let k3 = f([p[0] + h / 2.0 * k2[0], p[1] + h / 2.0 * k2[1]]);
            let k4 = f([p[0] + h * k3[0], p[1] + h * k3[1]]);
            for i in 0..2 {
                p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        p
    }

    fn fixed_horizon(s: f64) -> IntegrateOptions {
        IntegrateOptions {
            s_max: s,
            stop_on_convergence: false,
            ..Default::default()
        }
    }

    #[test]
    fn terminal_text_round_trips() {
        let all = [
            Terminal::Converged { point: [0.2, 0.20000000000000004] },
            Terminal::CollapseOrigin,
            Terminal::CollapseBoundary { point: [0.5, 0.0] },
            Terminal::Diverged,
            Terminal::ScaleOverflow,
            Terminal::MaxTime,
            Terminal::StepUnderflow,
            Terminal::StepLimit,
        ];
        for t in all {
            assert_eq!(t.to_string().parse::<Terminal>(), Ok(t));
        }
        assert!("converged(1)".parse::<Terminal>().is_err());
        assert!("nope".parse::<Terminal>().is_err());
        assert_eq!("backward".parse(), Ok(Direction::Backward));
    }

    #[test]
    fn agrees_with_rk4() {
        let cases = [
            (FlowKind::coflow(Sign::Plus), [0.3, 0.4]),
            (FlowKind::coflow(Sign::Minus), [2.0, 0.5]),
            (FlowKind::ricci(), [0.15, 0.1]),
            (FlowKind::flow(Sign::Plus), [0.5, 0.3]),
        ];
        for (k, p) in cases {
            let s = 0.05;
            let tr = integrate(k, PhaseState::new(p[0], p[1], 1.0), &fixed_horizon(s)).unwrap();
            assert_eq!(tr.terminal, Terminal::MaxTime, "{k}");
            let end = tr.last();
            assert_eq!(end.s, s);
            let oracle = rk4(k, p, s / 20_000.0, 20_000);
            assert!(dist(end.point(), oracle) < 1e-8, "{k}: {:?} vs {oracle:?}", end.point());
        }
    }

    #[test]
    fn anchored_terminals() {
        let opts = IntegrateOptions::default();
        let run = |k, u, v| integrate(k, PhaseState::new(u, v, 1.0), &opts).unwrap();
        let t = run(FlowKind::coflow(Sign::Plus), 0.3, 0.4).terminal;
        assert!(t.converged_to([0.2, 0.2], 1e-12), "{t}");
        let t = run(FlowKind::coflow(Sign::Minus), 2.0, 0.5).terminal;
        assert!(t.converged_to([1.0, 1.0], 1e-12), "{t}");
        let t = run(FlowKind::ricci(), 0.15, 0.1).terminal;
        assert_eq!(t, Terminal::CollapseOrigin);
        let tr = run(FlowKind::flow(Sign::Plus), 0.201, 0.201);
        assert!(tr.samples.iter().any(|s| dist(s.point(), [0.2, 0.2]) > 0.1));
    }

    #[test]
    fn converged_endpoint_is_close() {
        let tr = integrate(
            FlowKind::coflow(Sign::Plus),
            PhaseState::new(0.3, 0.4, 1.0),
            &IntegrateOptions::default(),
        )
        .unwrap();
        assert!(dist(tr.last().point(), [0.2, 0.2]) < 1e-6);
    }

    #[test]
    fn samples_strictly_increase_in_s() {
        let tr = integrate(
            FlowKind::ricci(),
            PhaseState::new(0.7, 1.6, 1.0),
            &IntegrateOptions::default(),
        )
        .unwrap();
        assert!(tr.samples.windows(2).all(|w| w[0].s < w[1].s));
        assert!(tr.samples.iter().all(|s| s.u > 0.0));
    }

    #[test]
    fn fixed_point_stays_put() {
        let k = FlowKind::coflow(Sign::Minus);
        let tr = integrate(k, PhaseState::new(1.0, 1.0, 1.0), &fixed_horizon(3.0)).unwrap();
        for s in &tr.samples {
            assert_eq!(s.point(), [1.0, 1.0]);
            assert!((s.c2 - (8.0 * s.t + 1.0)).abs() < 1e-7 * s.c2);
        }
        let tr = integrate(k, PhaseState::new(1.0, 1.0, 1.0), &IntegrateOptions::default()).unwrap();
        assert_eq!(tr.samples.len(), 1);
        assert!(tr.terminal.converged_to([1.0, 1.0], 0.0));
    }

    #[test]
    fn ricci_shrinks_linearly_near_einstein_point() {
        let tr = integrate(FlowKind::ricci(), PhaseState::new(1.0, 1.0, 1.0), &fixed_horizon(0.2))
            .unwrap();
        for s in tr.samples.iter().skip(1) {
            let slope = (s.c2 - 1.0) / s.t;
            assert!((slope + 12.0).abs() < 1e-6, "{slope}");
        }
    }

    #[test]
    fn backward_reverses_forward() {
        let k = FlowKind::ricci();
        let fwd = integrate(k, PhaseState::new(0.4, 0.6, 1.0), &fixed_horizon(0.05)).unwrap();
        let end = fwd.last();
        let opts = IntegrateOptions {
            direction: Direction::Backward,
            ..fixed_horizon(0.05)
        };
        let back = integrate(k, PhaseState::new(end.u, end.v, end.c2), &opts).unwrap();
        let b = back.last();
        assert!(dist(b.point(), [0.4, 0.6]) < 1e-8);
        assert!((b.c2 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_input() {
        let k = FlowKind::ricci();
        let o = IntegrateOptions::default();
        assert!(integrate(k, PhaseState::new(0.0, 1.0, 1.0), &o).is_err());
        assert!(integrate(k, PhaseState::new(1.0, -1.0, 1.0), &o).is_err());
        assert!(integrate(k, PhaseState::new(1.0, 1.0, 0.0), &o).is_err());
        let bad = IntegrateOptions {
            rtol: 0.0,
            ..Default::default()
        };
        assert!(integrate(k, PhaseState::new(1.0, 1.0, 1.0), &bad).is_err());
    }

    #[test]
    fn endpoints_only_when_not_recording() {
        let opts = IntegrateOptions {
            record: false,
            ..Default::default()
        };
        let tr = integrate(FlowKind::coflow(Sign::Plus), PhaseState::new(1.0, 0.5, 1.0), &opts).unwrap();
        assert_eq!(tr.samples.len(), 2);
        assert!(tr.terminal.converged_to([0.2, 0.2], 0.0));
    }

    #[test]
    fn min_step_underflow_is_reported() {
        let opts = IntegrateOptions {
            min_step: 0.4,
            initial_step: 0.5,
            ..Default::default()
        };
        let tr = integrate(FlowKind::coflow(Sign::Minus), PhaseState::new(2.0, 0.5, 1.0), &opts).unwrap();
        assert_eq!(tr.terminal, Terminal::StepUnderflow);
    }
}
