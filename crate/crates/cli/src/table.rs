//! Delimited text: trajectories and basin rasters, each headed by `# key=value`
//! lines. Floats are written by [`num`], the shortest text that parses back
//! to the same `f64`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use g2flow::dynamics::{BasinMap, Direction, Sample, Terminal, Trajectory};
use g2flow::flows::{Family, FlowKind};
use g2flow::Sign;

use crate::config::RunConfig;

pub const TRAJECTORY_COLUMNS: &str = "s,t,u,v,c2,a,b,c";
pub const BASIN_COLUMNS: &str = "i,j,u,v,outcome,final_distance";

/// Shortest round-trip decimal, switching to exponent form for very small or
/// large magnitudes. Independent of locale.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn header(out: &mut String, lines: &[(String, String)]) {
    for (k, v) in lines {
        writeln!(out, "# {k}={v}").unwrap();
    }
}

pub fn write_trajectory(cfg: &RunConfig, tr: &Trajectory) -> String {
    let mut lines = cfg.header_lines();
    lines.push(("terminal".into(), tr.terminal.to_string()));
    lines.push(("accepted_steps".into(), tr.accepted_steps.to_string()));
    lines.push(("rejected_steps".into(), tr.rejected_steps.to_string()));
    lines.push(("samples".into(), tr.samples.len().to_string()));
    let mut out = String::new();
    header(&mut out, &lines);
    writeln!(out, "{TRAJECTORY_COLUMNS}").unwrap();
    for s in &tr.samples {
        let x = s.phase_state().triple(tr.kind);
        let row = [s.s, s.t, s.u, s.v, s.c2, x.a, x.b, x.c].map(num);
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

/// Header map and data rows of a delimited file.
fn split(text: &str) -> Result<(BTreeMap<String, String>, Vec<&str>), String> {
    let mut meta = BTreeMap::new();
    let mut rows = Vec::new();
    let mut saw_columns = false;
    for line in text.lines() {
        if let Some(kv) = line.strip_prefix("# ") {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| format!("malformed header line {line:?}"))?;
            meta.insert(k.to_string(), v.to_string());
        } else if !saw_columns {
            saw_columns = true;
            rows.push(line);
        } else if !line.is_empty() {
            rows.push(line);
        }
    }
    Ok((meta, rows))
}

fn field<'a>(meta: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str, String> {
    meta.get(key)
        .map(String::as_str)
        .ok_or_else(|| format!("missing header {key:?}"))
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("bad {what} {s:?}"))
}

/// Reads back what [`write_trajectory`] wrote.
pub fn parse_trajectory(text: &str) -> Result<Trajectory, String> {
    let (meta, rows) = split(text)?;
    let family: Family = field(&meta, "family")?.parse()?;
    let epsilon = match meta.get("epsilon") {
        Some(e) => e.parse::<Sign>()?,
        None => Sign::Plus,
    };
    let kind = FlowKind::new(family, epsilon);
    let direction: Direction = match meta.get("direction") {
        Some(d) => d.parse()?,
        None => Direction::Forward,
    };
    let terminal: Terminal = field(&meta, "terminal")?.parse()?;
    let accepted_steps = parse_num(field(&meta, "accepted_steps")?, "accepted_steps")?;
    let rejected_steps = parse_num(field(&meta, "rejected_steps")?, "rejected_steps")?;

    let (columns, data) = rows.split_first().ok_or("no column line")?;
    if *columns != TRAJECTORY_COLUMNS {
        return Err(format!("unexpected columns {columns:?}"));
    }
    let samples = data
        .iter()
        .map(|row| {
            let f: Vec<f64> = row
                .split(',')
                .map(|x| parse_num(x, "number"))
                .collect::<Result<_, _>>()?;
            if f.len() != 8 {
                return Err(format!("expected 8 fields in {row:?}"));
            }
            Ok(Sample {
                s: f[0],
                t: f[1],
                u: f[2],
                v: f[3],
                c2: f[4],
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    if samples.is_empty() {
        return Err("trajectory has no samples".into());
    }
    Ok(Trajectory {
        kind,
        direction,
        samples,
        terminal,
        accepted_steps,
        rejected_steps,
    })
}

pub fn write_basins(cfg: &RunConfig, map: &BasinMap) -> String {
    let mut lines = cfg.header_lines();
    lines.push(("nu".into(), map.grid.nu.to_string()));
    lines.push(("nv".into(), map.grid.nv.to_string()));
    let mut out = String::new();
    header(&mut out, &lines);
    writeln!(out, "{BASIN_COLUMNS}").unwrap();
    for c in &map.cells {
        let d = c.final_distance.map(num).unwrap_or_default();
        writeln!(out, "{},{},{},{},\"{}\",{}", c.i, c.j, num(c.u), num(c.v), c.label(), d).unwrap();
    }
    out
}

/// One raster cell as read back: indices, node and outcome label.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterCell {
    pub i: usize,
    pub j: usize,
    pub u: f64,
    pub v: f64,
    pub outcome: String,
    pub final_distance: Option<f64>,
}

pub fn parse_basins(text: &str) -> Result<(BTreeMap<String, String>, Vec<RasterCell>), String> {
    let (meta, rows) = split(text)?;
    let (columns, data) = rows.split_first().ok_or("no column line")?;
    if *columns != BASIN_COLUMNS {
        return Err(format!("unexpected columns {columns:?}"));
    }
    let cells = data
        .iter()
        .map(|row| {
            let (head, rest) = row
                .split_once(",\"")
                .ok_or_else(|| format!("malformed row {row:?}"))?;
            let (outcome, tail) = rest
                .split_once("\",")
                .ok_or_else(|| format!("malformed row {row:?}"))?;
            let h: Vec<&str> = head.split(',').collect();
            if h.len() != 4 {
                return Err(format!("malformed row {row:?}"));
            }
            Ok(RasterCell {
                i: parse_num(h[0], "i")?,
                j: parse_num(h[1], "j")?,
                u: parse_num(h[2], "u")?,
                v: parse_num(h[3], "v")?,
                outcome: outcome.to_string(),
                final_distance: if tail.is_empty() {
                    None
                } else {
                    Some(parse_num(tail, "final_distance")?)
                },
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok((meta, cells))
}
