use std::collections::BTreeMap;

use serde::Serialize;

use super::integrate::{integrate, IntegrateOptions, Terminal};
use super::{DynamicsError, Region};
use crate::flows::{FlowKind, PhaseState};
use crate::par::{self, Execution};

/// `nu × nv` nodes spanning a region of the open quadrant, corners included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub region: Region,
    pub nu: usize,
    pub nv: usize,
}

impl Grid {
    pub fn new(region: Region, nu: usize, nv: usize) -> Result<Self, DynamicsError> {
        if region.u0 <= 0.0 || region.v0 <= 0.0 {
            return Err(DynamicsError::InvalidRegion(format!(
                "basin grids must lie in the open quadrant, got {region}"
            )));
        }
        if nu < 2 || nv < 2 {
            return Err(DynamicsError::InvalidRegion(format!(
                "basin grids need at least 2 nodes per axis, got {nu}×{nv}"
            )));
        }
        Ok(Grid { region, nu, nv })
    }

    pub fn square(region: Region, n: usize) -> Result<Self, DynamicsError> {
        Self::new(region, n, n)
    }

    /// Node `(i, j)`, `i` along `u`.
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        let r = &self.region;
        [
            r.u0 + (r.u1 - r.u0) * i as f64 / (self.nu - 1) as f64,
            r.v0 + (r.v1 - r.v0) * j as f64 / (self.nv - 1) as f64,
        ]
    }

    /// Row-major in `v`, then `u`.
    pub fn nodes(&self) -> Vec<(usize, usize, [f64; 2])> {
        (0..self.nv)
            .flat_map(|j| (0..self.nu).map(move |i| (i, j)))
            .map(|(i, j)| (i, j, self.node(i, j)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinCell {
    pub i: usize,
    pub j: usize,
    pub u: f64,
    pub v: f64,
    pub outcome: Result<Terminal, String>,
    /// Distance from the final sample to the reported limit, for converged cells.
    pub final_distance: Option<f64>,
}

impl BasinCell {
    pub fn label(&self) -> String {
        match &self.outcome {
            Ok(t) => t.to_string(),
            Err(_) => "error".into(),
        }
    }

    /// Outcome bucket: tag plus limit point for convergence only, so that
    /// collapse points along the boundary share a bucket.
    pub fn bucket(&self) -> String {
        match &self.outcome {
            Ok(t @ Terminal::Converged { .. }) => t.to_string(),
            Ok(t) => t.tag().to_string(),
            Err(_) => "error".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinMap {
    pub kind: FlowKind,
    pub grid: Grid,
    pub cells: Vec<BasinCell>,
}

impl BasinMap {
    pub fn counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for c in &self.cells {
            *m.entry(c.bucket()).or_insert(0) += 1;
        }
        m
    }

    pub fn cell(&self, i: usize, j: usize) -> &BasinCell {
        &self.cells[j * self.grid.nu + i]
    }
}

pub fn basin_map(kind: FlowKind, grid: Grid, opts: &IntegrateOptions) -> BasinMap {
    basin_map_with(kind, grid, opts, Execution::default())
}

/// Integrate every node to its terminal tag.
pub fn basin_map_with(kind: FlowKind, grid: Grid, opts: &IntegrateOptions, exec: Execution) -> BasinMap {
    let opts = IntegrateOptions {
        record: false,
        ..opts.clone()
    };
    let nodes = grid.nodes();
    let cells = par::map(&nodes, exec, |&(i, j, [u, v])| {
        let r = integrate(kind, PhaseState::new(u, v, 1.0), &opts);
        let final_distance = r.as_ref().ok().and_then(|tr| match tr.terminal {
            Terminal::Converged { point } => Some(super::integrate::dist(tr.last().point(), point)),
            _ => None,
        });
        BasinCell {
            i,
            j,
            u,
            v,
            outcome: r.map(|tr| tr.terminal).map_err(|e| e.to_string()),
            final_distance,
        }
    });
    BasinMap { kind, grid, cells }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sign::Sign;

    #[test]
    fn coflow_plus_converges_everywhere() {
        let g = Grid::square(Region::new(0.05, 2.0, 0.05, 2.0).unwrap(), 8).unwrap();
        let m = basin_map(FlowKind::coflow(Sign::Plus), g, &IntegrateOptions::default());
        for c in &m.cells {
            assert!(c.outcome.as_ref().unwrap().converged_to([0.2, 0.2], 0.0), "{c:?}");
            assert!(c.final_distance.unwrap() < 1e-6);
        }
    }

    #[test]
    fn ricci_has_two_basins() {
        let g = Grid::square(Region::new(0.05, 2.0, 0.05, 2.0).unwrap(), 8).unwrap();
        let m = basin_map(FlowKind::ricci(), g, &IntegrateOptions::default());
        let counts = m.counts();
        assert!(counts.contains_key("converged(1,1)"), "{counts:?}");
        assert!(counts.contains_key("collapse_origin"), "{counts:?}");
    }

    #[test]
    fn deterministic_across_execution_modes() {
        let g = Grid::square(Region::new(0.1, 1.5, 0.1, 1.5).unwrap(), 5).unwrap();
        let o = IntegrateOptions::default();
        let a = basin_map_with(FlowKind::ricci(), g, &o, Execution::Parallel);
        let b = basin_map_with(FlowKind::ricci(), g, &o, Execution::Sequential);
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_closed_quadrant_grids() {
        assert!(Grid::square(Region::new(0.0, 1.0, 0.1, 1.0).unwrap(), 4).is_err());
        assert!(Grid::square(Region::new(0.1, 1.0, 0.1, 1.0).unwrap(), 1).is_err());
    }
}
