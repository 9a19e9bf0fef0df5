use serde::Serialize;

use super::critical::{Classification, CriticalPointReport};
use super::integrate::{integrate, Direction, IntegrateOptions, Trajectory};
use super::DynamicsError;
use crate::flows::{FlowKind, PhaseState};

pub const SEPARATRIX_OFFSET: f64 = 1e-6;
pub const SEPARATRIX_RTOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Separatrix {
    pub saddle: [f64; 2],
    pub stable_eigenvector: [f64; 2],
    pub unstable_eigenvector: [f64; 2],
    /// Integrated backward from `saddle ± offset·e_s`.
    pub stable: [Trajectory; 2],
    /// Integrated forward from `saddle ± offset·e_u`.
    pub unstable: [Trajectory; 2],
}

pub fn separatrix_options() -> IntegrateOptions {
    IntegrateOptions {
        rtol: SEPARATRIX_RTOL,
        atol: 1e-14,
        s_max: 50.0,
        ..Default::default()
    }
}

/// Stable and unstable manifolds of a saddle by shooting along the
/// eigenvectors.
pub fn separatrix(
    kind: FlowKind,
    saddle: &CriticalPointReport,
    opts: &IntegrateOptions,
) -> Result<Separatrix, DynamicsError> {
    if saddle.classification != Classification::Saddle {
        return Err(DynamicsError::NotASaddle {
            location: saddle.location,
            classification: saddle.classification,
        });
    }
    let values = saddle.eigenvalues.real().expect("saddles have real spectra");
    let vectors = saddle.eigenvectors.expect("saddles have distinct eigenvalues");
    // values are ascending, so index 0 is the negative one.
    let (e_s, e_u) = if values[0] < 0.0 {
        (vectors[0], vectors[1])
    } else {
        (vectors[1], vectors[0])
    };
    let p = saddle.location;
    let shoot = |e: [f64; 2], sign: f64, direction: Direction| {
        let start = PhaseState::new(
            p[0] + sign * SEPARATRIX_OFFSET * e[0],
            p[1] + sign * SEPARATRIX_OFFSET * e[1],
            1.0,
        );
        let o = IntegrateOptions {
            direction,
            ..opts.clone()
        };
        integrate(kind, start, &o)
    };
    Ok(Separatrix {
        saddle: p,
        stable_eigenvector: e_s,
        unstable_eigenvector: e_u,
        stable: [
            shoot(e_s, 1.0, Direction::Backward)?,
            shoot(e_s, -1.0, Direction::Backward)?,
        ],
        unstable: [
            shoot(e_u, 1.0, Direction::Forward)?,
            shoot(e_u, -1.0, Direction::Forward)?,
        ],
    })
}
