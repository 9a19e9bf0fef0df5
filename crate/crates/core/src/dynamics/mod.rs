//! Numerical dynamics of the planar reduced flows.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::flows::FlowError;

pub mod basin;
pub mod critical;
pub mod integrate;
pub mod nullcline;
pub mod separatrix;

pub use basin::{basin_map, basin_map_with, BasinCell, BasinMap, Grid};
pub use critical::{
    analyze, classify, eigenvalues, eigenvector, find_critical_points, find_critical_points_with,
    jacobian, jacobian_fd, Classification, CriticalPointReport, CriticalSearch, Eigenvalues,
    Matrix2, Subcell,
};
pub use integrate::{integrate, Direction, IntegrateOptions, Sample, Terminal, Trajectory};
pub use nullcline::{
    axis_intercepts, nullcline_max_u, nullcline_quadratic, solve_quadratic, trace_nullcline,
    NullclineCurve, Poly, Which,
};
pub use separatrix::{separatrix, separatrix_options, Separatrix, SEPARATRIX_OFFSET};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("invalid initial state: {0}")]
    InvalidInitial(FlowError),
    #[error(transparent)]
    Flow(FlowError),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("point ({}, {}) is {classification:?}, not a saddle", location[0], location[1])]
    NotASaddle {
        location: [f64; 2],
        classification: Classification,
    },
}

/// Axis-aligned rectangle `[u0, u1] × [v0, v1]` in the closed quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Region {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl Region {
    pub fn new(u0: f64, u1: f64, v0: f64, v1: f64) -> Result<Self, DynamicsError> {
        let r = Region { u0, u1, v0, v1 };
        if ![u0, u1, v0, v1].iter().all(|x| x.is_finite()) {
            return Err(DynamicsError::InvalidRegion(format!("non-finite bound in {r}")));
        }
        if u0 < 0.0 || v0 < 0.0 {
            return Err(DynamicsError::InvalidRegion(format!("{r} leaves the closed quadrant")));
        }
        if u1 <= u0 || v1 <= v0 {
            return Err(DynamicsError::InvalidRegion(format!("{r} is empty")));
        }
        Ok(r)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.u0 && p[0] <= self.u1 && p[1] >= self.v0 && p[1] <= self.v1
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]×[{}, {}]", self.u0, self.u1, self.v0, self.v1)
    }
}

/// Parses `u0,u1,v0,v1`.
impl FromStr for Region {
    type Err = DynamicsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| DynamicsError::InvalidRegion(format!("{s:?}: {e}")))?;
        match parts[..] {
            [u0, u1, v0, v1] => Region::new(u0, u1, v0, v1),
            _ => Err(DynamicsError::InvalidRegion(format!(
                "{s:?}: expected four comma-separated numbers u0,u1,v0,v1"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_parsing() {
        let r: Region = "0,2.2,0,2.2".parse().unwrap();
        assert_eq!(r, Region::new(0.0, 2.2, 0.0, 2.2).unwrap());
        assert!("0,1,0".parse::<Region>().is_err());
        assert!("1,0,0,1".parse::<Region>().is_err());
        assert!("-1,1,0,1".parse::<Region>().is_err());
        assert!("a,1,0,1".parse::<Region>().is_err());
        assert!("0,inf,0,1".parse::<Region>().is_err());
    }
}
