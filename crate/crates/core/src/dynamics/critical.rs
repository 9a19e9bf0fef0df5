use serde::Serialize;

use super::{DynamicsError, Region};
use crate::flows::{reduced_jacobian, reduced_rhs, FlowKind};
use crate::par::{self, Execution};

pub type Matrix2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Eigenvalues {
    /// Sorted ascending.
    Real { values: [f64; 2] },
    Complex { re: f64, im: f64 },
}

impl Eigenvalues {
    pub fn real(&self) -> Option<[f64; 2]> {
        match *self {
            Eigenvalues::Real { values } => Some(values),
            Eigenvalues::Complex { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    StableNode,
    UnstableNode,
    Saddle,
    Degenerate,
    StableSpiral,
    UnstableSpiral,
    Center,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPointReport {
    pub location: [f64; 2],
    pub residual: f64,
    pub jacobian: Matrix2,
    pub eigenvalues: Eigenvalues,
    /// Unit eigenvectors matching the real eigenvalues, when there are two.
    pub eigenvectors: Option<[[f64; 2]; 2]>,
    pub classification: Classification,
    pub on_boundary: bool,
}

/// Analytic Jacobian of the reduced field.
pub fn jacobian(kind: FlowKind, at: [f64; 2]) -> Result<Matrix2, DynamicsError> {
    reduced_jacobian(kind, at[0], at[1]).map_err(DynamicsError::Flow)
}

/// Central-difference Jacobian with step `1e−6·max(1, |x|)`.
pub fn jacobian_fd(kind: FlowKind, at: [f64; 2]) -> Result<Matrix2, DynamicsError> {
    let mut j = [[0.0; 2]; 2];
    for col in 0..2 {
        let h = 1e-6 * at[col].abs().max(1.0);
        let mut hi = at;
        let mut lo = at;
        hi[col] += h;
        lo[col] -= h;
        let fh = reduced_rhs(kind, hi[0], hi[1]).map_err(DynamicsError::Flow)?;
        let fl = reduced_rhs(kind, lo[0], lo[1]).map_err(DynamicsError::Flow)?;
        for row in 0..2 {
            j[row][col] = (fh[row] - fl[row]) / (2.0 * h);
        }
    }
    Ok(j)
}

pub fn eigenvalues(j: &Matrix2) -> Eigenvalues {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let off = j[0][1] * j[1][0];
    // Discriminant as ((a − d)² + 4bc) avoids cancellation in tr² − 4det.
    let half_gap = (j[0][0] - j[1][1]) / 2.0;
    let disc = half_gap * half_gap + off;
    let scale = tr * tr + 4.0 * det.abs();
    if disc >= -1e-14 * scale {
        let r = disc.max(0.0).sqrt();
        let l1 = if tr >= 0.0 { tr / 2.0 + r } else { tr / 2.0 - r };
        let l2 = if l1 != 0.0 { det / l1 } else { tr / 2.0 - (l1 - tr / 2.0) };
        let mut values = [l1, l2];
        values.sort_by(f64::total_cmp);
        Eigenvalues::Real { values }
    } else {
        Eigenvalues::Complex {
            re: tr / 2.0,
            im: (-disc).sqrt(),
        }
    }
}

/// Unit eigenvector for a real eigenvalue, sign chosen so the first nonzero
/// component is positive.
pub fn eigenvector(j: &Matrix2, lambda: f64) -> [f64; 2] {
    let r1 = [j[0][1], lambda - j[0][0]];
    let r2 = [lambda - j[1][1], j[1][0]];
    let n1 = r1[0].hypot(r1[1]);
    let n2 = r2[0].hypot(r2[1]);
    let (mut v, n) = if n1 >= n2 { (r1, n1) } else { (r2, n2) };
    if n == 0.0 {
        return [1.0, 0.0];
    }
    v = [v[0] / n, v[1] / n];
    if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
        v = [-v[0], -v[1]];
    }
    v
}

pub fn classify(e: &Eigenvalues, scale: f64) -> Classification {
    let tiny = 1e-9 * scale.max(1.0);
    match *e {
        Eigenvalues::Real { values: [l1, l2] } => {
            if l1.abs() < tiny || l2.abs() < tiny {
                Classification::Degenerate
            } else if l1 < 0.0 && l2 < 0.0 {
                Classification::StableNode
            } else if l1 > 0.0 && l2 > 0.0 {
                Classification::UnstableNode
            } else {
                Classification::Saddle
            }
        }
        Eigenvalues::Complex { re, .. } => {
            if re.abs() < tiny {
                Classification::Center
            } else if re < 0.0 {
                Classification::StableSpiral
            } else {
                Classification::UnstableSpiral
            }
        }
    }
}

/// Jacobian, spectrum and classification at a point.
pub fn analyze(kind: FlowKind, at: [f64; 2]) -> Result<CriticalPointReport, DynamicsError> {
    let f = reduced_rhs(kind, at[0], at[1]).map_err(DynamicsError::Flow)?;
    let j = jacobian(kind, at)?;
    let e = eigenvalues(&j);
    let scale = j.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let eigenvectors = e
        .real()
        .filter(|[l1, l2]| l1 != l2)
        .map(|[l1, l2]| [eigenvector(&j, l1), eigenvector(&j, l2)]);
    Ok(CriticalPointReport {
        location: at,
        residual: f[0].hypot(f[1]),
        jacobian: j,
        eigenvalues: e,
        eigenvectors,
        classification: classify(&e, scale),
        on_boundary: at[1] == 0.0,
    })
}

pub const NEWTON_GRID: usize = 50;
pub const NEWTON_MAX_ITER: usize = 100;
pub const NEWTON_TOLERANCE: f64 = 1e-12;
pub const SUBCELLS: usize = 5;

fn norm(f: [f64; 2]) -> f64 {
    f[0].hypot(f[1])
}

/// Damped Newton iteration, run while the residual keeps falling so that
/// degenerate zeros are approached as closely as double precision allows.
/// The linear step is regularized where the Jacobian is singular; on the
/// invariant axis `v = 0` the iteration stays one-dimensional.
pub fn newton(kind: FlowKind, start: [f64; 2]) -> Option<[f64; 2]> {
    let eval = |p: [f64; 2]| {
        reduced_rhs(kind, p[0], p[1])
            .ok()
            .filter(|f| f[0].is_finite() && f[1].is_finite())
    };
    let mut x = start;
    let mut f = eval(x)?;
    for _ in 0..NEWTON_MAX_ITER {
        if f == [0.0, 0.0] {
            break;
        }
        let Some(delta) = newton_step(kind, x, f) else { break };
        let r0 = norm(f);
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-12 {
            let y = [x[0] + lambda * delta[0], x[1] + lambda * delta[1]];
            if let Some(fy) = eval(y).filter(|fy| norm(*fy) < r0) {
                x = y;
                f = fy;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (norm(f) < NEWTON_TOLERANCE).then_some(x)
}

fn newton_step(kind: FlowKind, x: [f64; 2], f: [f64; 2]) -> Option<[f64; 2]> {
    let j = reduced_jacobian(kind, x[0], x[1]).ok()?;
    let delta = if x[1] == 0.0 && f[1] == 0.0 {
        [-f[0] / j[0][0], 0.0]
    } else {
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let jj = j.iter().flatten().map(|x| x * x).sum::<f64>();
        if det.abs() > 1e-10 * jj.max(1e-300) {
            [
                -(j[1][1] * f[0] - j[0][1] * f[1]) / det,
                -(-j[1][0] * f[0] + j[0][0] * f[1]) / det,
            ]
        } else {
            // (JᵀJ + μI)δ = −Jᵀf
            let mu = 1e-12 * jj.max(1e-300);
            let g = [
                j[0][0] * f[0] + j[1][0] * f[1],
                j[0][1] * f[0] + j[1][1] * f[1],
            ];
            let m00 = j[0][0] * j[0][0] + j[1][0] * j[1][0] + mu;
            let m01 = j[0][0] * j[0][1] + j[1][0] * j[1][1];
            let m11 = j[0][1] * j[0][1] + j[1][1] * j[1][1] + mu;
            let d = m00 * m11 - m01 * m01;
            [-(m11 * g[0] - m01 * g[1]) / d, -(-m01 * g[0] + m00 * g[1]) / d]
        }
    };
    (delta[0].is_finite() && delta[1].is_finite()).then_some(delta)
}

/// Zeros closer than this are reported once.
pub const MERGE_RADIUS: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subcell {
    pub u_range: [f64; 2],
    pub v_range: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSearch {
    pub kind: FlowKind,
    pub region: Region,
    pub seeds: usize,
    pub points: Vec<CriticalPointReport>,
    /// Subcells none of whose seeds converged to any zero.
    pub failed_subcells: Vec<Subcell>,
}

impl CriticalSearch {
    pub fn interior(&self) -> impl Iterator<Item = &CriticalPointReport> {
        self.points.iter().filter(|p| !p.on_boundary)
    }

    pub fn locations(&self) -> Vec<[f64; 2]> {
        self.points.iter().map(|p| p.location).collect()
    }
}

fn seed_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .map(|x| if x <= 0.0 { 1e-3 * (hi - lo) / n as f64 } else { x })
        .collect()
}

pub fn find_critical_points(kind: FlowKind, region: Region) -> Result<CriticalSearch, DynamicsError> {
    find_critical_points_with(kind, region, Execution::default())
}

/// Newton from a 50×50 seed grid, deduplicated, each zero analyzed.
pub fn find_critical_points_with(
    kind: FlowKind,
    region: Region,
    exec: Execution,
) -> Result<CriticalSearch, DynamicsError> {
    let us = seed_axis(region.u0, region.u1, NEWTON_GRID);
    let vs: Vec<f64> = (0..NEWTON_GRID)
        .map(|i| region.v0 + (region.v1 - region.v0) * i as f64 / (NEWTON_GRID - 1) as f64)
        .collect();
    let seeds: Vec<(usize, usize, [f64; 2])> = (0..NEWTON_GRID)
        .flat_map(|i| (0..NEWTON_GRID).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, [us[i], vs[j]]))
        .collect();
    let results = par::map(&seeds, exec, |(_, _, p)| {
        newton(kind, *p).map(|mut x| {
            if x[1].abs() < 1e-12 {
                x[1] = 0.0;
            }
            x
        })
    });

    let per = NEWTON_GRID / SUBCELLS;
    let mut converged_in = [[false; SUBCELLS]; SUBCELLS];
    let mut candidates: Vec<([f64; 2], f64)> = Vec::new();
    let slack = 1e-9;
    for ((i, j, _), r) in seeds.iter().zip(&results) {
        let Some(x) = r else { continue };
        converged_in[i / per][j / per] = true;
        let inside = x[0] >= region.u0 - slack
            && x[0] <= region.u1 + slack
            && x[1] >= region.v0 - slack
            && x[1] <= region.v1 + slack
            && x[1] >= 0.0;
        if inside {
            let f = reduced_rhs(kind, x[0], x[1]).map_err(DynamicsError::Flow)?;
            candidates.push((*x, norm(f)));
        }
    }
    // Exact boundary zeros first, then by residual.
    candidates.sort_by(|a, b| {
        (a.0[1] != 0.0)
            .cmp(&(b.0[1] != 0.0))
            .then(a.1.total_cmp(&b.1))
            .then(a.0[0].total_cmp(&b.0[0]))
            .then(a.0[1].total_cmp(&b.0[1]))
    });
    let mut found: Vec<[f64; 2]> = Vec::new();
    for (x, _) in candidates {
        if !found.iter().any(|y| super::integrate::dist(x, *y) < MERGE_RADIUS) {
            found.push(x);
        }
    }
    found.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));

    let mut failed_subcells = Vec::new();
    let du = (region.u1 - region.u0) / SUBCELLS as f64;
    let dv = (region.v1 - region.v0) / SUBCELLS as f64;
    for (a, row) in converged_in.iter().enumerate() {
        for (b, ok) in row.iter().enumerate() {
            if !ok {
                failed_subcells.push(Subcell {
                    u_range: [region.u0 + a as f64 * du, region.u0 + (a + 1) as f64 * du],
                    v_range: [region.v0 + b as f64 * dv, region.v0 + (b + 1) as f64 * dv],
                });
            }
        }
    }
    let points = found
        .into_iter()
        .map(|x| analyze(kind, x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CriticalSearch {
        kind,
        region,
        seeds: seeds.len(),
        points,
        failed_subcells,
    })
}
