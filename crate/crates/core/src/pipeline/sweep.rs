use std::fmt::Write as _;

use super::config::PipelineConfig;
use super::run::run_pipeline;
use crate::error::Result;
use crate::metrics::{confusion, kappa, pcc};
use crate::raster::{BinaryMap, Raster};
use crate::scalar::Real;

pub const SWEEP_HEADER: &str = "T,b,fp,fn,oe,pcc,kc";

/// One grid cell; every score is NaN when the cell failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub t: usize,
    pub b: f64,
    pub fp: f64,
    pub fn_: f64,
    pub oe: f64,
    pub pcc: f64,
    pub kc: f64,
}

impl SweepRow {
    fn failed(t: usize, b: f64) -> Self {
        Self { t, b, fp: f64::NAN, fn_: f64::NAN, oe: f64::NAN, pcc: f64::NAN, kc: f64::NAN }
    }
}

/// Runs the full detector for every `(T, b)` pair with the shared seed of
/// `base`, sorted by `T` then `b`.
pub fn sweep<T: Real>(
    i1: &Raster<T>,
    i2: &Raster<T>,
    truth: &BinaryMap,
    base: &PipelineConfig,
    t_list: &[usize],
    b_list: &[f64],
) -> Vec<SweepRow> {
    let mut ts = t_list.to_vec();
    ts.sort_unstable();
    let mut bs = b_list.to_vec();
    bs.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(ts.len() * bs.len());
    for &t in &ts {
        for &b in &bs {
            let cfg = PipelineConfig { t, b, ..base.clone() };
            let row = score_cell(i1, i2, truth, &cfg).unwrap_or_else(|e| {
                log::warn!("sweep cell T={t} b={b} failed: {e}");
                SweepRow::failed(t, b)
            });
            rows.push(row);
        }
    }
    rows
}

fn score_cell<T: Real>(i1: &Raster<T>, i2: &Raster<T>, truth: &BinaryMap, cfg: &PipelineConfig) -> Result<SweepRow> {
    let out = run_pipeline(i1, i2, cfg)?;
    let c = confusion(&out.change_map, truth)?;
    Ok(SweepRow {
        t: cfg.t,
        b: cfg.b,
        fp: c.fp as f64,
        fn_: c.fn_ as f64,
        oe: c.oe() as f64,
        pcc: pcc(&c),
        kc: kappa(&c).unwrap_or(f64::NAN),
    })
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{},{}", r.t, r.b, r.fp, r.fn_, r.oe, r.pcc, r.kc);
    }
    out
}
