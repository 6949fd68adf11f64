//! Plot-ready CSV and JSON files. Floats are written with 17 significant
//! digits so that values read back are bit-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::coords::Chart;
use crate::duct::{DuctHistory, DuctState};
use crate::error::{Error, Result};
use crate::gradients::compute_field;
use crate::solver::grid::GridState;
use crate::solver::trace::CharacteristicTrace;

pub const SNAPSHOT_HEADER: &str = "t,x,v,u,h,p,c,alpha,beta,y,q,fwdRC,bwdRC";
pub const TRACE_HEADER: &str = "t,x,c,yq,a0,a1,a2,residual";
pub const DUCT_HEADER: &str = "t,x,position,a,z,u,m,vhat,p,c,alpha,beta";

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(out: &mut String, values: &[f64]) {
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(&float(*v));
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Model(format!("serializing {}: {e}", path.display())))?;
    s.push('\n');
    write_file(path, &s)
}

/// One row per node per level.
pub fn snapshots_csv(chart: &Chart, levels: &[GridState]) -> Result<String> {
    let mut out = String::from(SNAPSHOT_HEADER);
    out.push('\n');
    for s in levels {
        let f = compute_field(chart, s)?;
        for i in 0..s.n() {
            let p = &f.points[i];
            row(
                &mut out,
                &[
                    s.t,
                    s.x(i),
                    p.v,
                    s.u[i],
                    s.h[i],
                    p.derivs.p,
                    p.c(),
                    f.alpha[i],
                    f.beta[i],
                    f.y[i],
                    f.q[i],
                ],
            );
            let _ = writeln!(out, ",{},{}", f.forward[i].label(), f.backward[i].label());
        }
    }
    Ok(out)
}

/// All traces in one file; `trace` in the index gives the row range.
pub fn traces_csv(traces: &[CharacteristicTrace]) -> (String, Vec<TraceIndexEntry>) {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    let mut index = Vec::with_capacity(traces.len());
    let mut first_row = 0;
    for (id, tr) in traces.iter().enumerate() {
        for s in &tr.samples {
            row(&mut out, &[s.t, s.x, s.c, s.yq, s.a0, s.a1, s.a2, s.residual]);
            out.push('\n');
        }
        let (a2_inf, a2_sup) = tr.a2_range();
        index.push(TraceIndexEntry {
            trace: id,
            family: match tr.family {
                crate::riccati::Branch::Forward => "forward",
                crate::riccati::Branch::Backward => "backward",
            },
            x0: tr.x0,
            first_row,
            rows: tr.samples.len(),
            max_residual: tr.max_residual(),
            max_alpha_residual: tr.max_alpha_residual(),
            a2_inf,
            a2_sup,
            truncated: tr.truncated.clone(),
        });
        first_row += tr.samples.len();
    }
    (out, index)
}

/// Locates each trace inside traces.csv (rows counted after the header).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceIndexEntry {
    pub trace: usize,
    pub family: &'static str,
    pub x0: f64,
    pub first_row: usize,
    pub rows: usize,
    pub max_residual: f64,
    pub max_alpha_residual: f64,
    pub a2_inf: f64,
    pub a2_sup: f64,
    pub truncated: Option<String>,
}

pub fn write_traces(dir: &Path, traces: &[CharacteristicTrace]) -> Result<()> {
    let (csv, index) = traces_csv(traces);
    write_file(&dir.join("traces.csv"), &csv)?;
    write_json(&dir.join("traces_index.json"), &index)
}

pub fn duct_csv(history: &DuctHistory) -> Result<String> {
    let mut out = String::from(DUCT_HEADER);
    out.push('\n');
    for s in &history.levels {
        duct_rows(&mut out, history, s)?;
    }
    Ok(out)
}

fn duct_rows(out: &mut String, h: &DuctHistory, s: &DuctState) -> Result<()> {
    let k = &h.constants;
    let g = s.gradients(k, &h.profile)?;
    for i in 0..s.n() {
        let node = s.node(&h.profile, i);
        row(
            out,
            &[
                s.t,
                s.x(i),
                s.position[i],
                node.a,
                node.z,
                node.u,
                node.m,
                k.vhat_of_z(node.z),
                k.pressure(node.z, node.m, node.a),
                k.sound_speed(node.z, node.m, node.a),
                g[i].alpha,
                g[i].beta,
            ],
        );
        out.push('\n');
    }
    Ok(())
}

/// `dir/n<nodes>` for refinement studies.
pub fn level_dir(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("n{n}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(1.0), "1.0000000000000000e0");
    }
}
