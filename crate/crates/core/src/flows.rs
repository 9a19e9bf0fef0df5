//! The three geometric flows restricted to the ansatz `a₁ = a₂ = a`, `a₃ = b`.
//!
//! Each flow is available in two forms: the full system for the scales
//! `(a, b, c)` in physical time `t`, and the scale-invariant planar system
//! in `(X, Y) = (a²/c², ab/c²)` (Laplacian flow and coflow) or
//! `(A, B) = (a²/c², b²/c²)` (Ricci flow), parametrized by `s` with
//! `ds/dt = 1/c²`.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exterior::{
    build_phi, build_psi, cyclic_coefficient, cyclic_three_omega, eta123, eta_omega, laplacian, vol_n, AnsatzParams,
};
use crate::par::{self, Execution};
use crate::scalar::{ratio, Scalar};
use crate::sign::Sign;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("monomial map is singular at (a, b, c) = ({a}, {b}, {c})")]
    SingularMonomialMap { a: f64, b: f64, c: f64 },
}

fn positive(what: &'static str, value: f64) -> Result<f64, FlowError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(FlowError::NonPositive { what, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    LaplacianCoflow,
    LaplacianFlow,
    Ricci,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::LaplacianCoflow => "coflow",
            Family::LaplacianFlow => "flow",
            Family::Ricci => "ricci",
        })
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "coflow" => Ok(Family::LaplacianCoflow),
            "flow" => Ok(Family::LaplacianFlow),
            "ricci" => Ok(Family::Ricci),
            other => Err(format!("unknown flow family {other:?} (coflow, flow, ricci)")),
        }
    }
}

/// A flow family together with its branch sign. The Ricci flow only sees the
/// metric, which does not depend on ε, so its sign is normalized away.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FlowKind {
    family: Family,
    epsilon: Sign,
}

impl FlowKind {
    pub fn new(family: Family, epsilon: Sign) -> Self {
        let epsilon = if family == Family::Ricci {
            Sign::Plus
        } else {
            epsilon
        };
        FlowKind { family, epsilon }
    }

    pub fn coflow(epsilon: Sign) -> Self {
        Self::new(Family::LaplacianCoflow, epsilon)
    }

    pub fn flow(epsilon: Sign) -> Self {
        Self::new(Family::LaplacianFlow, epsilon)
    }

    pub fn ricci() -> Self {
        Self::new(Family::Ricci, Sign::Plus)
    }

    /// Every distinct system: coflow and flow on both branches, and Ricci.
    pub fn all() -> [FlowKind; 5] {
        [
            Self::coflow(Sign::Plus),
            Self::coflow(Sign::Minus),
            Self::flow(Sign::Plus),
            Self::flow(Sign::Minus),
            Self::ricci(),
        ]
    }

    pub fn family(self) -> Family {
        self.family
    }

    /// `None` for the Ricci flow.
    pub fn epsilon(self) -> Option<Sign> {
        (self.family != Family::Ricci).then_some(self.epsilon)
    }

    fn eps(self) -> f64 {
        self.epsilon.as_f64()
    }

    pub fn is_laplacian(self) -> bool {
        self.family != Family::Ricci
    }

    pub fn coordinate_names(self) -> (&'static str, &'static str) {
        match self.family {
            Family::Ricci => ("A", "B"),
            _ => ("X", "Y"),
        }
    }

    /// Interior zeros of the reduced field (the nearly parallel points, and
    /// for Ricci both Einstein metrics).
    pub fn interior_critical_points(self) -> Vec<[f64; 2]> {
        match (self.family, self.epsilon) {
            (Family::Ricci, _) => vec![[0.2, 0.2], [1.0, 1.0]],
            (_, Sign::Plus) => vec![[0.2, 0.2]],
            (_, Sign::Minus) => vec![[1.0, 1.0]],
        }
    }

    /// Zeros on the collapsed boundary `v = 0`.
    pub fn boundary_critical_points(self) -> Vec<[f64; 2]> {
        match self.family {
            Family::Ricci => vec![[0.5, 0.0], [1.0, 0.0]],
            _ => vec![[0.5, 0.0]],
        }
    }

    pub fn label(self) -> String {
        match self.epsilon() {
            Some(e) => format!("{} eps={}", self.family, e),
            None => self.family.to_string(),
        }
    }
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Point of a rescaled trajectory: planar coordinates plus the carried scale
/// and both clocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub u: f64,
    pub v: f64,
    pub c2: f64,
    pub t: f64,
    pub s: f64,
}

impl PhaseState {
    pub fn new(u: f64, v: f64, c2: f64) -> Self {
        PhaseState {
            u,
            v,
            c2,
            t: 0.0,
            s: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        positive("u", self.u)?;
        positive("v", self.v)?;
        positive("c2", self.c2)?;
        Ok(())
    }

    pub fn from_triple(kind: FlowKind, x: ScaleTriple) -> Self {
        let c2 = x.c * x.c;
        let u = x.a * x.a / c2;
        let v = match kind.family {
            Family::Ricci => x.b * x.b / c2,
            _ => x.a * x.b / c2,
        };
        PhaseState::new(u, v, c2)
    }

    /// Recover `(a, b, c)` from `(u, v, c²)`.
    pub fn triple(&self, kind: FlowKind) -> ScaleTriple {
        let c = self.c2.sqrt();
        let a = (self.u * self.c2).sqrt();
        let b = match kind.family {
            Family::Ricci => (self.v * self.c2).sqrt(),
            _ => self.v * self.c2 / a,
        };
        ScaleTriple { a, b, c }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ScaleTriple {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, FlowError> {
        Ok(ScaleTriple {
            a: positive("a", a)?,
            b: positive("b", b)?,
            c: positive("c", c)?,
        })
    }

    pub fn scaled(&self, lambda: f64) -> ScaleTriple {
        ScaleTriple {
            a: lambda * self.a,
            b: lambda * self.b,
            c: lambda * self.c,
        }
    }
}

fn coflow_du(e: f64, x: f64, y: f64) -> f64 {
    let x2 = x * x;
    4.0 / x2
        * ((x + 1.0) * y * y + 2.0 * e * (2.0 * x2 - 2.0 * x - 1.0) * x * y
            - 2.0 * x2 * (2.0 * x - 1.0) * (x + 1.0))
}

fn coflow_dv_plain(e: f64, x: f64, y: f64) -> f64 {
    let x2 = x * x;
    4.0 * y / x2
        * (2.0 * (1.0 - x) * y * y + e * (2.0 * x2 - 3.0 * x - 1.0) * y + 2.0 * x * (1.0 - 2.0 * x))
}

/// For ε = +1 the v-component is written as `u̇ + 4(Y − X)G/X²`, the same
/// rational function, so that `X = Y` is reproduced exactly in floating point.
/// The overall factor `Y` still makes `Y = 0` exact.
fn coflow_rhs(e: f64, x: f64, y: f64) -> [f64; 2] {
    let du = coflow_du(e, x, y);
    let dv = if y == 0.0 {
        0.0
    } else if e > 0.0 {
        let g = (2.0 - 2.0 * x) * y * y - (2.0 * x + 2.0) * y + 2.0 * x - 2.0 * x * x - 4.0 * x * x * x;
        du + 4.0 * (y - x) * g / (x * x)
    } else {
        coflow_dv_plain(e, x, y)
    };
    [du, dv]
}

fn ricci_da(a: f64, b: f64) -> f64 {
    4.0 * (1.0 - a) / a * (b * (1.0 + a) - 2.0 * a * (1.0 - 2.0 * a))
}

#[cfg(test)]
fn ricci_db_plain(a: f64, b: f64) -> f64 {
    4.0 * b / (a * a) * (2.0 * a * a * (3.0 - a) - b * (1.0 + 3.0 * a * a))
}

/// `Ḃ = Ȧ + 4(B − A)G/A²`, keeping `A = B` exact, and `B = 0` through the
/// overall factor `B`.
fn ricci_rhs(a: f64, b: f64) -> [f64; 2] {
    let da = ricci_da(a, b);
    if b == 0.0 {
        return [da, 0.0];
    }
    let g = -(1.0 + 3.0 * a * a) * b + 6.0 * a * a - 4.0 * a * a * a - 2.0 * a;
    [da, da + 4.0 * (b - a) * g / (a * a)]
}

/// Scale-invariant planar field `(du/ds, dv/ds)`.
///
/// `v = 0` is admitted (the fields extend to the collapsed boundary); `u ≤ 0`
/// is rejected since every component divides by a power of `u`. The
/// Laplacian flow is exactly the negated coflow.
pub fn reduced_rhs(kind: FlowKind, u: f64, v: f64) -> Result<[f64; 2], FlowError> {
    positive("u", u)?;
    Ok(match kind.family {
        Family::LaplacianCoflow => coflow_rhs(kind.eps(), u, v),
        Family::LaplacianFlow => {
            let [du, dv] = coflow_rhs(kind.eps(), u, v);
            [-du, -dv]
        }
        Family::Ricci => ricci_rhs(u, v),
    })
}

/// Closed-form partial derivatives of [`reduced_rhs`], row-major
/// `[[∂u̇/∂u, ∂u̇/∂v], [∂v̇/∂u, ∂v̇/∂v]]`.
pub fn reduced_jacobian(kind: FlowKind, u: f64, v: f64) -> Result<[[f64; 2]; 2], FlowError> {
    positive("u", u)?;
    Ok(match kind.family {
        Family::LaplacianCoflow => coflow_jacobian(kind.eps(), u, v),
        Family::LaplacianFlow => {
            let j = coflow_jacobian(kind.eps(), u, v);
            [[-j[0][0], -j[0][1]], [-j[1][0], -j[1][1]]]
        }
        Family::Ricci => ricci_jacobian(u, v),
    })
}

fn coflow_jacobian(e: f64, x: f64, y: f64) -> [[f64; 2]; 2] {
    let x2 = x * x;
    let x3 = x2 * x;
    // u̇ = 4P/X², P = (X+1)Y² + 2ε(2X³−2X²−X)Y − (4X⁴+2X³−2X²)
    let p = (x + 1.0) * y * y + 2.0 * e * (2.0 * x3 - 2.0 * x2 - x) * y
        - (4.0 * x2 * x2 + 2.0 * x3 - 2.0 * x2);
    let p_x = y * y + 2.0 * e * (6.0 * x2 - 4.0 * x - 1.0) * y - (16.0 * x3 + 6.0 * x2 - 4.0 * x);
    let p_y = 2.0 * (x + 1.0) * y + 2.0 * e * (2.0 * x3 - 2.0 * x2 - x);
    // v̇ = 4YQ/X², Q = 2(1−X)Y² + ε(2X²−3X−1)Y + 2X − 4X²
    let q = 2.0 * (1.0 - x) * y * y + e * (2.0 * x2 - 3.0 * x - 1.0) * y + 2.0 * x - 4.0 * x2;
    let q_x = -2.0 * y * y + e * (4.0 * x - 3.0) * y + 2.0 - 8.0 * x;
    let q_y = 4.0 * (1.0 - x) * y + e * (2.0 * x2 - 3.0 * x - 1.0);
    [
        [4.0 * (p_x / x2 - 2.0 * p / x3), 4.0 * p_y / x2],
        [4.0 * y * (q_x / x2 - 2.0 * q / x3), 4.0 * (q + y * q_y) / x2],
    ]
}

fn ricci_jacobian(a: f64, b: f64) -> [[f64; 2]; 2] {
    let a2 = a * a;
    // Ȧ = 4(1−A)R/A, R = B(1+A) − 2A + 4A²
    let r = b * (1.0 + a) - 2.0 * a + 4.0 * a2;
    let r_a = b - 2.0 + 8.0 * a;
    // Ḃ = 4BS/A², S = 6A² − 2A³ − B − 3A²B
    let s = 6.0 * a2 - 2.0 * a2 * a - b - 3.0 * a2 * b;
    let s_a = 12.0 * a - 6.0 * a2 - 6.0 * a * b;
    let s_b = -(1.0 + 3.0 * a2);
    [
        [
            4.0 * (-r / a + (1.0 - a) * (r_a * a - r) / a2),
            4.0 * (1.0 - a) * (1.0 + a) / a,
        ],
        [4.0 * b * (s_a / a2 - 2.0 * s / (a2 * a)), 4.0 * (s + b * s_b) / a2],
    ]
}

/// Exponents `(p, q, r)` of the monomials `aᵖbᵍcʳ` whose time derivatives
/// the full systems prescribe.
pub fn monomial_exponents(kind: FlowKind) -> [[f64; 3]; 3] {
    match kind.family {
        // c⁴, a²c², abc²
        Family::LaplacianCoflow => [[0.0, 0.0, 4.0], [2.0, 0.0, 2.0], [1.0, 1.0, 2.0]],
        // a²b, ac², bc²
        Family::LaplacianFlow => [[2.0, 1.0, 0.0], [1.0, 0.0, 2.0], [0.0, 1.0, 2.0]],
        // a², b², c²
        Family::Ricci => [[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]],
    }
}

pub fn monomial_values(kind: FlowKind, x: ScaleTriple) -> [f64; 3] {
    monomial_exponents(kind).map(|[p, q, r]| x.a.powf(p) * x.b.powf(q) * x.c.powf(r))
}

/// Time derivatives of the three monomials, as given by the full systems.
pub fn monomial_rates(kind: FlowKind, x: ScaleTriple) -> [f64; 3] {
    let ScaleTriple { a, b, c } = x;
    let e = kind.eps();
    let (a2, b2, c2) = (a * a, b * b, c * c);
    let a3 = a2 * a;
    match kind.family {
        Family::LaplacianCoflow => [
            8.0 * (2.0 * a2 + b2 + 2.0 * c2 + 2.0 * e * b * c2 / a - b2 * c2 / a2),
            4.0 * (2.0 * a2 - b2 + 2.0 * c2 + 4.0 * e * a3 * b / c2 + 2.0 * a2 * b2 / c2
                - 2.0 * e * b * c2 / a
                + b2 * c2 / a2),
            4.0 * (e * b2 + 4.0 * a3 * b / c2 + 2.0 * e * a2 * b2 / c2 + 2.0 * b * c2 / a
                - e * b2 * c2 / a2),
        ],
        Family::LaplacianFlow => [
            8.0 * a2 * b / c2
                * (2.0 * a2 / c2 + b2 / c2 + 2.0 + 2.0 * e * b / a - b2 / a2),
            4.0 * (e * b + 4.0 * a3 / c2 + 2.0 * e * a2 * b / c2 + 2.0 * c2 / a
                - e * b * c2 / a2),
            4.0 * b
                * (2.0 - b2 / a2 + 2.0 * c2 / a2 + 4.0 * e * a * b / c2 + 2.0 * b2 / c2
                    - 2.0 * e * b * c2 / (a3)
                    + b2 * c2 / (a2 * a2)),
        ],
        Family::Ricci => [
            -4.0 * (2.0 - b2 / a2 + 2.0 * a2 * a2 / (c2 * c2)),
            -4.0 * (b2 * b2 / (a2 * a2) + 2.0 * b2 * b2 / (c2 * c2)),
            -4.0 * (6.0 - 2.0 * a2 / c2 - b2 / c2),
        ],
    }
}

/// Solve `E·r = rhs` by partial-pivot elimination.
fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let mut aug = [[0.0; 4]; 3];
    for i in 0..3 {
        aug[i][..3].copy_from_slice(&m[i]);
        aug[i][3] = rhs[i];
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))?;
        if aug[pivot][col].abs() < 1e-12 {
            return None;
        }
        aug.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = aug[row][col] / aug[col][col];
                for k in col..4 {
                    aug[row][k] -= f * aug[col][k];
                }
            }
        }
    }
    Some([aug[0][3] / aug[0][0], aug[1][3] / aug[1][1], aug[2][3] / aug[2][2]])
}

/// Logarithmic rates `(ȧ/a, ḃ/b, ċ/c)` from monomial derivatives: since
/// `ṁ/m = p·ȧ/a + q·ḃ/b + r·ċ/c`, the exponent matrix is the whole linear map.
pub fn log_rates_from_monomials(
    kind: FlowKind,
    x: ScaleTriple,
    rates: [f64; 3],
) -> Result<[f64; 3], FlowError> {
    let m = monomial_values(kind, x);
    let rhs = [rates[0] / m[0], rates[1] / m[1], rates[2] / m[2]];
    solve3(monomial_exponents(kind), rhs).ok_or(FlowError::SingularMonomialMap {
        a: x.a,
        b: x.b,
        c: x.c,
    })
}

/// `(da/dt, db/dt, dc/dt)` for the full system.
pub fn full_system_rhs(kind: FlowKind, x: ScaleTriple) -> Result<[f64; 3], FlowError> {
    let x = ScaleTriple::new(x.a, x.b, x.c)?;
    let r = log_rates_from_monomials(kind, x, monomial_rates(kind, x))?;
    Ok([r[0] * x.a, r[1] * x.b, r[2] * x.c])
}

/// Image of a full-system velocity under `(a,b,c) ↦ (u,v)` in rescaled time.
pub fn chain_rule_image(kind: FlowKind, x: ScaleTriple, dx: [f64; 3]) -> [f64; 2] {
    let ScaleTriple { a, b, c } = x;
    let (ra, rb, rc) = (dx[0] / a, dx[1] / b, dx[2] / c);
    let c2 = c * c;
    let u = a * a / c2;
    match kind.family {
        Family::Ricci => {
            let v = b * b / c2;
            [c2 * u * (2.0 * ra - 2.0 * rc), c2 * v * (2.0 * rb - 2.0 * rc)]
        }
        _ => {
            let v = a * b / c2;
            [c2 * u * (2.0 * ra - 2.0 * rc), c2 * v * (ra + rb - 2.0 * rc)]
        }
    }
}

/// `d(c²)/dt` at a scale-invariant point, through the full system at `c = 1`.
/// The value is scale-invariant.
pub fn c2_rate(kind: FlowKind, u: f64, v: f64) -> Result<f64, FlowError> {
    positive("u", u)?;
    positive("v", v)?;
    let a = u.sqrt();
    let b = match kind.family {
        Family::Ricci => v.sqrt(),
        _ => v / a,
    };
    let [_, _, dc] = full_system_rhs(kind, ScaleTriple { a, b, c: 1.0 })?;
    Ok(2.0 * dc)
}

/// `(dc²/ds, dt/ds) = (c²·d(c²)/dt, c²)`.
pub fn scale_rhs(kind: FlowKind, state: &PhaseState) -> Result<[f64; 2], FlowError> {
    positive("c2", state.c2)?;
    let rate = c2_rate(kind, state.u, state.v)?;
    Ok([state.c2 * rate, state.c2])
}

/// Outcome of checking the reduced field against the full system (chain
/// rule) and, for the Laplacian families, against the exterior engine.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub kind: FlowKind,
    pub seed: u64,
    pub points: usize,
    pub chain_rule_max_residual: f64,
    pub exterior_max_residual: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

pub const REDUCTION_TOLERANCE: f64 = 1e-10;

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

/// Norm-wise relative error `‖x − y‖∞ / max(1, ‖y‖∞)`.
fn rel_vec(x: &[f64], y: &[f64]) -> f64 {
    let scale = y.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

/// A random positive rational `p/q` with numerator and denominator below 30.
pub fn random_rational(rng: &mut impl Rng) -> BigRational {
    ratio(rng.random_range(1..30), rng.random_range(1..30))
}

/// Monomial derivatives read off the exterior-engine Laplacian of ψ (coflow)
/// or φ (flow), together with the size of any component outside the ansatz.
pub fn exterior_monomial_rates(
    kind: FlowKind,
    p: &AnsatzParams<BigRational>,
) -> ([f64; 3], f64) {
    let eps = p.eps();
    let f = |x: BigRational| x.to_f64_lossy();
    match kind.family {
        Family::LaplacianCoflow => {
            let lap = laplacian(&build_psi(p), p);
            let c1 = cyclic_coefficient(&lap, 1);
            let c2 = cyclic_coefficient(&lap, 2);
            let c3 = cyclic_coefficient(&lap, 3);
            let vol = lap.coefficient(&vol_n());
            let stray = lap
                .terms()
                .filter(|(m, _)| {
                    **m != vol_n()
                        && (1..=3).all(|i| **m != cyclic_three_omega(i).0)
                })
                .map(|(_, c)| c.to_f64_lossy().abs())
                .fold(0.0, f64::max);
            let mismatch = rel(f(c1.clone()), f(c2.clone())).max(stray);
            // ψ = c⁴ vol_N − εabc²(η₂₃ω₁ + η₃₁ω₂) − a²c² η₁₂ω₃
            ([f(vol), f(-c3), f(-(eps * c1))], mismatch)
        }
        Family::LaplacianFlow => {
            let lap = laplacian(&build_phi(p), p);
            let top = lap.coefficient(&eta123());
            let w1 = lap.coefficient(&eta_omega(1));
            let w2 = lap.coefficient(&eta_omega(2));
            let w3 = lap.coefficient(&eta_omega(3));
            let stray = lap
                .terms()
                .filter(|(m, _)| **m != eta123() && (1..=3).all(|i| **m != eta_omega(i)))
                .map(|(_, c)| c.to_f64_lossy().abs())
                .fold(0.0, f64::max);
            let mismatch = rel(f(w1.clone()), f(w2)).max(stray);
            // φ = εa²b η₁₂₃ − ac²(η₁ω₁ + η₂ω₂) − εbc² η₃ω₃
            ([f(eps.clone() * top), f(-w1), f(-(eps * w3))], mismatch)
        }
        Family::Ricci => panic!("no exterior oracle for the Ricci flow"),
    }
}

/// Check the reduction at `points` random rational scale triples.
pub fn verify_reduction(kind: FlowKind, points: usize, seed: u64) -> ReductionReport {
    verify_reduction_with(kind, points, seed, Execution::default())
}

pub fn verify_reduction_with(
    kind: FlowKind,
    points: usize,
    seed: u64,
    exec: Execution,
) -> ReductionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<[BigRational; 3]> = (0..points)
        .map(|_| {
            [
                random_rational(&mut rng),
                random_rational(&mut rng),
                random_rational(&mut rng),
            ]
        })
        .collect();
    let residuals = par::map(&samples, exec, |[a, b, c]| {
        let x = ScaleTriple {
            a: a.to_f64_lossy(),
            b: b.to_f64_lossy(),
            c: c.to_f64_lossy(),
        };
        let dx = match full_system_rhs(kind, x) {
            Ok(dx) => dx,
            Err(_) => return (f64::INFINITY, Some(f64::INFINITY)),
        };
        let image = chain_rule_image(kind, x, dx);
        let state = PhaseState::from_triple(kind, x);
        let chain = match reduced_rhs(kind, state.u, state.v) {
            Ok(r) => rel_vec(&image, &r),
            Err(_) => f64::INFINITY,
        };
        let ext = kind.is_laplacian().then(|| {
            let p = AnsatzParams::restricted(a.clone(), b.clone(), c.clone(), kind.epsilon)
                .expect("positive rationals");
            let (rates, mismatch) = exterior_monomial_rates(kind, &p);
            let shown = monomial_rates(kind, x);
            let r = mismatch.max(rel_vec(&shown, &rates));
            match log_rates_from_monomials(kind, x, rates) {
                Ok(lr) => {
                    let from_engine = [lr[0] * x.a, lr[1] * x.b, lr[2] * x.c];
                    r.max(rel_vec(&dx, &from_engine))
                }
                Err(_) => f64::INFINITY,
            }
        });
        (chain, ext)
    });
    let chain_rule_max_residual = residuals.iter().map(|r| r.0).fold(0.0, f64::max);
    let exterior_max_residual = kind.is_laplacian().then(|| {
        residuals
            .iter()
            .filter_map(|r| r.1)
            .fold(0.0, f64::max)
    });
    let passed = chain_rule_max_residual < REDUCTION_TOLERANCE
        && exterior_max_residual.is_none_or(|r| r < REDUCTION_TOLERANCE);
    ReductionReport {
        kind,
        seed,
        points,
        chain_rule_max_residual,
        exterior_max_residual,
        tolerance: REDUCTION_TOLERANCE,
        passed,
    }
}
