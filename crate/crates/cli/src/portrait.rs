//! Phase portraits as standalone SVG.
//!
//! Every drawn element carries its model coordinates in `data-*` attributes;
//! screen coordinates follow from the `data-u0 … data-v1` window on the root.

use std::fmt::Write as _;

use g2flow::dynamics::{
    find_critical_points, integrate, separatrix, separatrix_options, trace_nullcline,
    Classification, CriticalPointReport, IntegrateOptions, Region, Trajectory, Which,
};
use g2flow::flows::{reduced_rhs, Family, FlowKind, PhaseState};

use crate::config::{config_error, Failure};

pub const WIDTH: f64 = 720.0;
pub const HEIGHT: f64 = 720.0;
pub const MARGIN: f64 = 60.0;
const NULLCLINE_SAMPLES: usize = 800;
const FLOW_LINE_SEEDS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct PortraitOptions {
    /// Direction-field arrows per axis.
    pub grid: usize,
    /// Rescaled-time span of each sample flow line.
    pub s_max: f64,
    pub separatrices: bool,
}

impl Default for PortraitOptions {
    fn default() -> Self {
        PortraitOptions {
            grid: 20,
            s_max: 10.0,
            separatrices: true,
        }
    }
}

/// Model to screen map for a region.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub region: Region,
}

impl Frame {
    pub fn sx(&self) -> f64 {
        (WIDTH - 2.0 * MARGIN) / (self.region.u1 - self.region.u0)
    }

    pub fn sy(&self) -> f64 {
        (HEIGHT - 2.0 * MARGIN) / (self.region.v1 - self.region.v0)
    }

    pub fn to_screen(&self, p: [f64; 2]) -> [f64; 2] {
        [
            MARGIN + (p[0] - self.region.u0) * self.sx(),
            HEIGHT - MARGIN - (p[1] - self.region.v0) * self.sy(),
        ]
    }

    pub fn to_model(&self, q: [f64; 2]) -> [f64; 2] {
        [
            self.region.u0 + (q[0] - MARGIN) / self.sx(),
            self.region.v0 + (HEIGHT - MARGIN - q[1]) / self.sy(),
        ]
    }

    /// Unit screen direction of a model-space vector.
    fn screen_dir(&self, f: [f64; 2]) -> Option<[f64; 2]> {
        let d = [f[0] * self.sx(), -f[1] * self.sy()];
        let n = d[0].hypot(d[1]);
        (n > 0.0 && n.is_finite()).then(|| [d[0] / n, d[1] / n])
    }
}

fn points_attr(frame: &Frame, pts: &[[f64; 2]]) -> String {
    let mut s = String::new();
    for (k, p) in pts.iter().enumerate() {
        let q = frame.to_screen(*p);
        if k > 0 {
            s.push(' ');
        }
        write!(s, "{},{}", q[0], q[1]).unwrap();
    }
    s
}

/// Split a polyline into the runs that stay inside the region.
fn clip_runs(region: &Region, pts: impl IntoIterator<Item = [f64; 2]>) -> Vec<Vec<[f64; 2]>> {
    let mut runs = vec![Vec::new()];
    for p in pts {
        if region.contains(p) {
            runs.last_mut().unwrap().push(p);
        } else if !runs.last().unwrap().is_empty() {
            runs.push(Vec::new());
        }
    }
    runs.retain(|r| r.len() >= 2);
    runs
}

/// Arrowhead triangle at `base` pointing along `f`, tip first.
fn arrowhead(frame: &Frame, base: [f64; 2], f: [f64; 2], size: f64) -> Option<[[f64; 2]; 3]> {
    let d = frame.screen_dir(f)?;
    let b = frame.to_screen(base);
    let n = [-d[1], d[0]];
    Some([
        [b[0] + size * d[0], b[1] + size * d[1]],
        [b[0] - 0.5 * size * d[0] + 0.5 * size * n[0], b[1] - 0.5 * size * d[1] + 0.5 * size * n[1]],
        [b[0] - 0.5 * size * d[0] - 0.5 * size * n[0], b[1] - 0.5 * size * d[1] - 0.5 * size * n[1]],
    ])
}

fn polygon(tri: &[[f64; 2]; 3]) -> String {
    tri.iter()
        .map(|p| format!("{},{}", p[0], p[1]))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Sample nearest to the given fraction of the run's screen arc length.
fn at_arc_fraction(frame: &Frame, run: &[[f64; 2]], fraction: f64) -> [f64; 2] {
    let q: Vec<[f64; 2]> = run.iter().map(|p| frame.to_screen(*p)).collect();
    let total: f64 = q.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).sum();
    let mut acc = 0.0;
    for (k, w) in q.windows(2).enumerate() {
        acc += (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
        if acc >= fraction * total {
            return run[k + 1];
        }
    }
    run[run.len() - 1]
}

fn class_name(c: Classification) -> &'static str {
    match c {
        Classification::StableNode => "stable_node",
        Classification::UnstableNode => "unstable_node",
        Classification::Saddle => "saddle",
        Classification::Degenerate => "degenerate",
        Classification::StableSpiral => "stable_spiral",
        Classification::UnstableSpiral => "unstable_spiral",
        Classification::Center => "center",
    }
}

fn draw_trajectory(out: &mut String, frame: &Frame, kind: FlowKind, tr: &Trajectory, class: &str) {
    let pts: Vec<[f64; 2]> = tr.samples.iter().map(|s| s.point()).collect();
    for run in clip_runs(&frame.region, pts) {
        writeln!(
            out,
            r#"<g class="{class}"><polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#,
            if class == "separatrix" { "#c0392b" } else { "#2c3e50" },
            points_attr(frame, &run)
        )
        .unwrap();
        let base = at_arc_fraction(frame, &run, 1.0 / 3.0);
        if let Ok(f) = reduced_rhs(kind, base[0], base[1]) {
            let f = match tr.direction {
                g2flow::dynamics::Direction::Forward => f,
                g2flow::dynamics::Direction::Backward => [-f[0], -f[1]],
            };
            if let Some(tri) = arrowhead(frame, base, f, 7.0) {
                writeln!(
                    out,
                    r#"<polygon class="arrowhead" data-u="{}" data-v="{}" data-du="{}" data-dv="{}" fill="{}" points="{}"/>"#,
                    base[0],
                    base[1],
                    f[0],
                    f[1],
                    if class == "separatrix" { "#c0392b" } else { "#2c3e50" },
                    polygon(&tri)
                )
                .unwrap();
            }
        }
        out.push_str("</g>\n");
    }
}

/// Render the portrait of `kind` over `region`.
pub fn render(kind: FlowKind, region: Region, opts: &PortraitOptions) -> Result<String, Failure> {
    if opts.grid < 2 {
        return Err(Failure::Config(format!("--grid must be at least 2, got {}", opts.grid)));
    }
    if !(opts.s_max > 0.0 && opts.s_max.is_finite()) {
        return Err(Failure::Config(format!("flow-line span must be positive, got {}", opts.s_max)));
    }
    let frame = Frame { region };
    let (un, vn) = kind.coordinate_names();
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" data-family="{}" data-epsilon="{}" data-u0="{}" data-u1="{}" data-v0="{}" data-v1="{}">"#,
        kind.family(),
        kind.epsilon().map(|e| e.to_string()).unwrap_or_default(),
        region.u0,
        region.u1,
        region.v0,
        region.v1
    )
    .unwrap();
    writeln!(out, "<title>{}</title>", kind.label()).unwrap();
    writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();

    // Frame, ticks and labels.
    let lo = frame.to_screen([region.u0, region.v0]);
    let hi = frame.to_screen([region.u1, region.v1]);
    writeln!(
        out,
        r#"<rect class="frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        lo[0],
        hi[1],
        hi[0] - lo[0],
        lo[1] - hi[1]
    )
    .unwrap();
    out.push_str("<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n");
    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let u = region.u0 + t * (region.u1 - region.u0);
        let v = region.v0 + t * (region.v1 - region.v0);
        let x = frame.to_screen([u, region.v0]);
        let y = frame.to_screen([region.u0, v]);
        writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/><text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            x[0], x[1], x[0], x[1] + 5.0, x[0], x[1] + 18.0, tick_label(u)
        )
        .unwrap();
        writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/><text x="{}" y="{}" text-anchor="end">{}</text>"#,
            y[0], y[1], y[0] - 5.0, y[1], y[0] - 8.0, y[1] + 4.0, tick_label(v)
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{un}</text><text x="{}" y="{}" text-anchor="middle">{vn}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        20.0,
        HEIGHT / 2.0
    )
    .unwrap();
    out.push_str("</g>\n");

    // Direction field at cell centres.
    out.push_str("<g class=\"field\">\n");
    let n = opts.grid;
    let cell = [(region.u1 - region.u0) / n as f64, (region.v1 - region.v0) / n as f64];
    let len = 0.35 * (WIDTH - 2.0 * MARGIN) / n as f64;
    for j in 0..n {
        for i in 0..n {
            let p = [
                region.u0 + (i as f64 + 0.5) * cell[0],
                region.v0 + (j as f64 + 0.5) * cell[1],
            ];
            let Ok(f) = reduced_rhs(kind, p[0], p[1]) else { continue };
            let Some(d) = frame.screen_dir(f) else { continue };
            let b = frame.to_screen(p);
            let tail = [b[0] - 0.5 * len * d[0], b[1] - 0.5 * len * d[1]];
            let tip = [b[0] + 0.5 * len * d[0], b[1] + 0.5 * len * d[1]];
            let head = arrowhead(&frame, frame.to_model(tip), f, 0.3 * len).expect("direction exists");
            writeln!(
                out,
                r##"<g class="arrow" data-u="{}" data-v="{}" data-du="{}" data-dv="{}"><line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#95a5a6"/><polygon fill="#95a5a6" points="{}"/></g>"##,
                p[0], p[1], f[0], f[1], tail[0], tail[1], tip[0], tip[1], polygon(&head)
            )
            .unwrap();
        }
    }
    out.push_str("</g>\n");

    // Nullclines: the nontrivial quadratic factors, then the trivial lines.
    out.push_str("<g class=\"nullclines\">\n");
    let u_lo = if region.u0 > 0.0 {
        region.u0
    } else {
        1e-4 * (region.u1 - region.u0)
    };
    for (which, tag, color) in [(Which::UNullcline, "u", "#2980b9"), (Which::VNullcline, "v", "#27ae60")] {
        let curve = trace_nullcline(kind, which, [u_lo, region.u1], NULLCLINE_SAMPLES).map_err(config_error)?;
        for branch in &curve.branches {
            for run in clip_runs(&region, branch.iter().copied()) {
                writeln!(
                    out,
                    r#"<polyline class="nullcline" data-which="{tag}" fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#,
                    points_attr(&frame, &run)
                )
                .unwrap();
            }
        }
    }
    if region.v0 == 0.0 {
        writeln!(
            out,
            r##"<polyline class="nullcline trivial" data-which="v" fill="none" stroke="#27ae60" stroke-width="1.6" points="{}"/>"##,
            points_attr(&frame, &[[region.u0, 0.0], [region.u1, 0.0]])
        )
        .unwrap();
    }
    if kind.family() == Family::Ricci && region.u0 <= 1.0 && 1.0 <= region.u1 {
        writeln!(
            out,
            r##"<polyline class="nullcline trivial" data-which="u" fill="none" stroke="#2980b9" stroke-width="1.6" points="{}"/>"##,
            points_attr(&frame, &[[1.0, region.v0], [1.0, region.v1]])
        )
        .unwrap();
    }
    out.push_str("</g>\n");

    // Invariant diagonal.
    let d0 = region.u0.max(region.v0);
    let d1 = region.u1.min(region.v1);
    if d1 > d0 {
        let a = frame.to_screen([d0, d0]);
        let b = frame.to_screen([d1, d1]);
        writeln!(
            out,
            r##"<line class="invariant" data-line="u=v" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#7f8c8d" stroke-dasharray="6,4"/>"##,
            a[0], a[1], b[0], b[1]
        )
        .unwrap();
    }

    // Sample flow lines and separatrices.
    let search = find_critical_points(kind, region).map_err(config_error)?;
    let flow_opts = IntegrateOptions {
        s_max: opts.s_max,
        ..Default::default()
    };
    out.push_str("<g class=\"flow-lines\">\n");
    let m = FLOW_LINE_SEEDS;
    for j in 0..m {
        for i in 0..m {
            let p = [
                region.u0 + (i as f64 + 0.5) / m as f64 * (region.u1 - region.u0),
                region.v0 + (j as f64 + 0.5) / m as f64 * (region.v1 - region.v0),
            ];
            if let Ok(tr) = integrate(kind, PhaseState::new(p[0], p[1], 1.0), &flow_opts) {
                draw_trajectory(&mut out, &frame, kind, &tr, "flow-line");
            }
        }
    }
    if opts.separatrices {
        let sep_opts = IntegrateOptions {
            s_max: opts.s_max,
            ..separatrix_options()
        };
        for saddle in search.interior().filter(|r| r.classification == Classification::Saddle) {
            if let Ok(sep) = separatrix(kind, saddle, &sep_opts) {
                for tr in sep.stable.iter().chain(sep.unstable.iter()) {
                    draw_trajectory(&mut out, &frame, kind, tr, "separatrix");
                }
            }
        }
    }
    out.push_str("</g>\n");

    out.push_str("<g class=\"critical-points\">\n");
    for r in &search.points {
        write_marker(&mut out, &frame, r);
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

fn write_marker(out: &mut String, frame: &Frame, r: &CriticalPointReport) {
    let q = frame.to_screen(r.location);
    let fill = match r.classification {
        Classification::StableNode | Classification::StableSpiral => "black",
        _ => "white",
    };
    writeln!(
        out,
        r#"<circle class="critical" data-u="{}" data-v="{}" data-classification="{}" cx="{}" cy="{}" r="5" fill="{fill}" stroke="black" stroke-width="1.5"/>"#,
        r.location[0],
        r.location[1],
        class_name(r.classification),
        q[0],
        q[1]
    )
    .unwrap();
}

/// Axis labels only; data attributes carry full precision.
fn tick_label(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}
