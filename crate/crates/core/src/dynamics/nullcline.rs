use serde::Serialize;

use super::DynamicsError;
use crate::flows::{Family, FlowKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    /// `u̇ = 0` (γ_X, γ_A).
    UNullcline,
    /// `v̇ = 0` (γ_Y, γ_B).
    VNullcline,
}

/// Polynomial in `u`, ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, u: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    /// Nonnegative real roots in `[0, u_max]`: zero with its multiplicity
    /// stripped, the rest by sign changes and bisection.
    pub fn nonnegative_roots(&self, u_max: f64) -> Vec<f64> {
        let mut coeffs = self.0.as_slice();
        let mut roots = Vec::new();
        if coeffs.iter().all(|c| *c == 0.0) {
            return roots;
        }
        if coeffs[0] == 0.0 {
            roots.push(0.0);
            while coeffs[0] == 0.0 {
                coeffs = &coeffs[1..];
            }
        }
        let p = Poly(coeffs.to_vec());
        let n = 20_000;
        let mut prev_u = 0.0;
        let mut prev = p.eval(prev_u);
        for i in 1..=n {
            let u = u_max * i as f64 / n as f64;
            let val = p.eval(u);
            if val == 0.0 {
                roots.push(u);
            } else if prev != 0.0 && prev.signum() != val.signum() {
                let (mut lo, mut hi) = (prev_u, u);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if p.eval(mid).signum() == p.eval(lo).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev_u = u;
            prev = val;
        }
        roots
    }
}

/// The nontrivial factor of a nullcline as a quadratic in `v` with
/// coefficients polynomial in `u`: `q₂(u)v² + q₁(u)v + q₀(u) = 0`. The trivial
/// factors (`v = 0` for the v-nullclines, `A = 1` for the Ricci γ_A) are left out.
pub fn nullcline_quadratic(kind: FlowKind, which: Which) -> [Poly; 3] {
    let e = kind.epsilon().map(|s| s.as_f64()).unwrap_or(1.0);
    match (kind.family(), which) {
        (Family::Ricci, Which::UNullcline) => [
            Poly(vec![0.0]),
            Poly(vec![1.0, 1.0]),
            Poly(vec![0.0, -2.0, 4.0]),
        ],
        (Family::Ricci, Which::VNullcline) => [
            Poly(vec![0.0]),
            Poly(vec![-1.0, 0.0, -3.0]),
            Poly(vec![0.0, 0.0, 6.0, -2.0]),
        ],
        (_, Which::UNullcline) => [
            Poly(vec![1.0, 1.0]),
            Poly(vec![0.0, -2.0 * e, -4.0 * e, 4.0 * e]),
            Poly(vec![0.0, 0.0, 2.0, -2.0, -4.0]),
        ],
        (_, Which::VNullcline) => [
            Poly(vec![2.0, -2.0]),
            Poly(vec![-e, -3.0 * e, 2.0 * e]),
            Poly(vec![0.0, 2.0, -4.0]),
        ],
    }
}

/// Real roots of `a v² + b v + c`, ascending, computed without cancellation.
pub fn solve_quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-15 * scale {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sgn = if b >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (b + sgn * disc.sqrt());
    let mut r = if q == 0.0 {
        vec![0.0, 0.0]
    } else {
        vec![q / a, c / q]
    };
    r.sort_by(f64::total_cmp);
    r
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullclineCurve {
    pub kind: FlowKind,
    pub which: Which,
    /// Connected runs of samples ordered by `u`.
    pub branches: Vec<Vec<[f64; 2]>>,
}

impl NullclineCurve {
    pub fn points(&self) -> impl Iterator<Item = &[f64; 2]> {
        self.branches.iter().flatten()
    }
}

fn roots_at(q: &[Poly; 3], u: f64) -> Vec<f64> {
    solve_quadratic(q[0].eval(u), q[1].eval(u), q[2].eval(u))
}

fn check_range(u_range: [f64; 2]) -> Result<(), DynamicsError> {
    if !(u_range[0] > 0.0 && u_range[1] > u_range[0] && u_range[1].is_finite()) {
        return Err(DynamicsError::InvalidRegion(format!(
            "nullcline u-range must satisfy 0 < u0 < u1, got {u_range:?}"
        )));
    }
    Ok(())
}

/// Distance between roots that stays meaningful when one escapes to infinity.
fn root_gap(p: f64, r: f64) -> f64 {
    (p - r).abs() / (1.0 + p.abs() + r.abs())
}

/// Put the roots at the next sample into the branch slots by continuity, so a
/// branch keeps its identity where the leading coefficient vanishes and the
/// sorted order of the roots flips.
fn assign_roots(prev: [Option<f64>; 2], roots: &[f64]) -> [Option<f64>; 2] {
    match (roots, prev) {
        ([], _) => [None, None],
        ([r], [Some(p0), Some(p1)]) => {
            if root_gap(p0, *r) <= root_gap(p1, *r) {
                [Some(*r), None]
            } else {
                [None, Some(*r)]
            }
        }
        ([r], [None, Some(_)]) => [None, Some(*r)],
        ([r], _) => [Some(*r), None],
        ([r0, r1, ..], [Some(p0), Some(p1)]) => {
            if root_gap(p0, *r0) + root_gap(p1, *r1) <= root_gap(p0, *r1) + root_gap(p1, *r0) {
                [Some(*r0), Some(*r1)]
            } else {
                [Some(*r1), Some(*r0)]
            }
        }
        ([r0, r1, ..], [None, Some(p1)]) if root_gap(p1, *r0) < root_gap(p1, *r1) => [Some(*r1), Some(*r0)],
        ([r0, r1, ..], [Some(p0), None]) if root_gap(p0, *r1) < root_gap(p0, *r0) => [Some(*r1), Some(*r0)],
        ([r0, r1, ..], _) => [Some(*r0), Some(*r1)],
    }
}

/// Zero of the constant coefficient `q₀` between `lo` and `hi`, where a root
/// in `v` passes through the axis.
fn axis_crossing(q0: &Poly, mut lo: f64, mut hi: f64) -> Option<f64> {
    let f_lo = q0.eval(lo);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_lo.signum() == q0.eval(hi).signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q0.eval(mid).signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Sample the nullcline at `n` values of `u`; each of the (at most two) roots
/// in `v` feeds its own branch, broken wherever the root is missing or negative.
/// A branch that crosses `v = 0` between samples ends (or starts) exactly on
/// the axis.
pub fn trace_nullcline(
    kind: FlowKind,
    which: Which,
    u_range: [f64; 2],
    n: usize,
) -> Result<NullclineCurve, DynamicsError> {
    check_range(u_range)?;
    let q = nullcline_quadratic(kind, which);
    let mut branches: Vec<Vec<[f64; 2]>> = Vec::new();
    let mut open: [Option<usize>; 2] = [None, None];
    let mut prev: [Option<f64>; 2] = [None, None];
    let mut prev_u = u_range[0];
    let n = n.max(2);
    for i in 0..n {
        let u = u_range[0] + (u_range[1] - u_range[0]) * i as f64 / (n - 1) as f64;
        let roots: Vec<f64> = roots_at(&q, u).into_iter().filter(|v| v.is_finite()).collect();
        let now = assign_roots(prev, &roots);
        for slot in 0..2 {
            let crossed = match (prev[slot], now[slot]) {
                (Some(pr), Some(r)) if (pr >= 0.0) != (r >= 0.0) => axis_crossing(&q[2], prev_u, u),
                _ => None,
            };
            match (now[slot].filter(|v| *v >= 0.0), open[slot]) {
                (Some(v), Some(b)) => branches[b].push([u, v]),
                (Some(v), None) => {
                    let mut b = Vec::new();
                    if let Some(uc) = crossed {
                        b.push([uc, 0.0]);
                    }
                    b.push([u, v]);
                    branches.push(b);
                    open[slot] = Some(branches.len() - 1);
                }
                (None, b) => {
                    if let (Some(b), Some(uc)) = (b, crossed) {
                        branches[b].push([uc, 0.0]);
                    }
                    open[slot] = None;
                }
            }
        }
        prev = now;
        prev_u = u;
    }
    Ok(NullclineCurve {
        kind,
        which,
        branches,
    })
}

/// Values of `u` where the nullcline meets `v = 0` inside `[0, u_max]`.
pub fn axis_intercepts(kind: FlowKind, which: Which, u_max: f64) -> Vec<f64> {
    nullcline_quadratic(kind, which)[2].nonnegative_roots(u_max)
}

fn has_nonnegative_root(q: &[Poly; 3], u: f64) -> bool {
    roots_at(q, u).iter().any(|v| *v >= 0.0)
}

/// Largest `u` in range at which the nullcline has a point with `v ≥ 0`,
/// refined by bisection on the existence of a root.
pub fn nullcline_max_u(kind: FlowKind, which: Which, u_range: [f64; 2]) -> Result<Option<f64>, DynamicsError> {
    check_range(u_range)?;
    let q = nullcline_quadratic(kind, which);
    let n = 20_000;
    let at = |i: usize| u_range[0] + (u_range[1] - u_range[0]) * i as f64 / n as f64;
    let Some(last) = (0..=n).rev().find(|&i| has_nonnegative_root(&q, at(i))) else {
        return Ok(None);
    };
    if last == n {
        return Ok(Some(u_range[1]));
    }
    let (mut lo, mut hi) = (at(last), at(last + 1));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if has_nonnegative_root(&q, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}
