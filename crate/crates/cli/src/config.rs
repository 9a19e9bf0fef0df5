use std::fmt;
use std::path::PathBuf;

use g2flow::dynamics::{Direction, IntegrateOptions, Region};
use g2flow::flows::{Family, FlowKind};
use g2flow::verify::Fault;
use g2flow::Sign;
use serde::Serialize;

use crate::table::num;

/// Why a command did not succeed; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unusable values or an unwritable output path.
    Config(String),
    /// The identity suite ran and something did not hold.
    Verification(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Config(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "error: {m}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

pub fn config_error(e: impl fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

/// Axis range used when `--region` is omitted.
pub const DEFAULT_REGION: Region = Region {
    u0: 0.0,
    u1: 2.2,
    v0: 0.0,
    v1: 2.2,
};

/// Family plus the ε flag; ε is required for the two Laplacian families.
pub fn resolve_kind(family: Family, epsilon: Option<Sign>) -> Result<FlowKind, Failure> {
    match (family, epsilon) {
        (Family::Ricci, e) => Ok(FlowKind::new(Family::Ricci, e.unwrap_or(Sign::Plus))),
        (f, Some(e)) => Ok(FlowKind::new(f, e)),
        (f, None) => Err(Failure::Config(format!(
            "--epsilon (+1 or -1) is required for the {f} family"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Initial {
    pub u: f64,
    pub v: f64,
    pub c2: f64,
}

/// Everything a command runs from, echoed into its output. Output paths are
/// not part of the echo, so the same run written to two places is identical.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Sign>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<Initial>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_on_convergence: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
    #[serde(skip)]
    pub kind: Option<FlowKind>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: &'static str, seed: u64) -> Self {
        RunConfig {
            command,
            seed,
            family: None,
            epsilon: None,
            initial: None,
            region: None,
            grid: None,
            s_max: None,
            rtol: None,
            atol: None,
            direction: None,
            stop_on_convergence: None,
            fault: None,
            kind: None,
            out: None,
        }
    }

    pub fn with_kind(mut self, kind: FlowKind) -> Self {
        self.family = Some(kind.family().to_string());
        self.epsilon = kind.epsilon();
        self.kind = Some(kind);
        self
    }

    pub fn kind(&self) -> FlowKind {
        self.kind.expect("flow commands carry a kind")
    }

    /// Integrator settings implied by the echoed fields, validated.
    pub fn integrate_options(&self) -> Result<IntegrateOptions, Failure> {
        let mut opts = IntegrateOptions::default();
        if let Some(s) = self.s_max {
            opts.s_max = s;
        }
        if let Some(r) = self.rtol {
            opts.rtol = r;
        }
        if let Some(a) = self.atol {
            opts.atol = a;
        }
        if let Some(d) = self.direction {
            opts.direction = d;
        }
        if let Some(s) = self.stop_on_convergence {
            opts.stop_on_convergence = s;
        }
        opts.validate().map_err(config_error)?;
        Ok(opts)
    }

    /// `# key=value` lines heading every delimited output.
    pub fn header_lines(&self) -> Vec<(String, String)> {
        let mut h = vec![
            ("tool".to_string(), crate::TOOL.to_string()),
            ("version".to_string(), crate::VERSION.to_string()),
            ("command".to_string(), self.command.to_string()),
            ("seed".to_string(), self.seed.to_string()),
        ];
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                h.push((k.to_string(), v));
            }
        };
        push("family", self.family.clone());
        push("epsilon", self.epsilon.map(|e| e.to_string()));
        if let Some(i) = self.initial {
            push("u0", Some(num(i.u)));
            push("v0", Some(num(i.v)));
            push("c2_0", Some(num(i.c2)));
        }
        push(
            "region",
            self.region.map(|r| [r.u0, r.u1, r.v0, r.v1].map(num).join(",")),
        );
        push("grid", self.grid.map(|g| g.to_string()));
        push("s_max", self.s_max.map(num));
        push("rtol", self.rtol.map(num));
        push("atol", self.atol.map(num));
        push("direction", self.direction.map(|d| d.to_string()));
        push("stop_on_convergence", self.stop_on_convergence.map(|s| s.to_string()));
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_is_mandatory_for_laplacian_families() {
        assert!(resolve_kind(Family::LaplacianCoflow, None).is_err());
        assert!(resolve_kind(Family::LaplacianFlow, None).is_err());
        assert_eq!(resolve_kind(Family::Ricci, None).unwrap(), FlowKind::ricci());
        assert_eq!(
            resolve_kind(Family::Ricci, Some(Sign::Minus)).unwrap(),
            FlowKind::ricci()
        );
    }

    #[test]
    fn tolerances_must_be_positive() {
        let mut c = RunConfig::new("simulate", 1).with_kind(FlowKind::ricci());
        c.rtol = Some(0.0);
        assert!(c.integrate_options().is_err());
        c.rtol = Some(1e-9);
        c.atol = Some(-1.0);
        assert!(c.integrate_options().is_err());
        c.atol = None;
        assert!(c.integrate_options().is_ok());
    }
}
