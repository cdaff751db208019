//! CSV exchange formats for fields.

use ndarray::Array2;

use super::grid::{midpoints_to_nodes, nodes_to_midpoints, Grid1D};
use super::observables::{FieldMap2D, Observables};
use crate::error::{LdError, Result};

pub const FIELD_HEADER: [&str; 8] = ["x", "gap_or_plane", "f", "V", "Phi", "h", "jx", "jz"];

fn io_err<E: std::fmt::Display>(e: E) -> LdError {
    LdError::Parse(e.to_string())
}

/// One row per (node, index) with index 0..=N. Plane fields refer to plane `index`, gap fields
/// to gap `index` (NaN for index 0). Midpoint fields are interpolated to nodes.
pub fn write_field_csv<W: std::io::Write>(obs: &Observables, grid: &Grid1D, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIELD_HEADER).map_err(io_err)?;
    let np = obs.planes();
    let at_nodes = |arr: &Array2<f64>, row: usize| midpoints_to_nodes(&arr.row(row).to_vec());
    for n in 0..np {
        let v = at_nodes(&obs.V, n);
        let jx = at_nodes(&obs.jx, n);
        let (phi, h, jz) = if n == 0 {
            let nan = vec![f64::NAN; grid.nodes_len()];
            (nan.clone(), nan.clone(), nan)
        } else {
            (obs.Phi.row(n - 1).to_vec(), at_nodes(&obs.h, n - 1), at_nodes(&obs.jz, n - 1))
        };
        for i in 0..grid.nodes_len() {
            let rec = [
                grid.node(i).to_string(),
                n.to_string(),
                obs.f[[n, i]].to_string(),
                v[i].to_string(),
                phi[i].to_string(),
                h[i].to_string(),
                jx[i].to_string(),
                jz[i].to_string(),
            ];
            w.write_record(&rec).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

/// Parses the output of [`write_field_csv`] back into observables.
pub fn read_field_csv<R: std::io::Read>(input: R) -> Result<Observables> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(io_err)?.clone();
    if header.iter().collect::<Vec<_>>() != FIELD_HEADER {
        return Err(LdError::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows: Vec<(usize, [f64; 6])> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(io_err)?;
        let idx: usize = rec[1].parse().map_err(io_err)?;
        let mut vals = [0.0; 6];
        for (j, v) in vals.iter_mut().enumerate() {
            *v = rec[j + 2].parse().map_err(io_err)?;
        }
        rows.push((idx, vals));
    }
    let np = rows.iter().map(|r| r.0).max().ok_or_else(|| LdError::Parse("empty field file".into()))? + 1;
    if !rows.len().is_multiple_of(np) || np < 2 {
        return Err(LdError::Parse("ragged field file".into()));
    }
    let nodes = rows.len() / np;
    let m = nodes - 1;
    let column = |n: usize, c: usize| -> Vec<f64> {
        rows.iter().filter(|r| r.0 == n).map(|r| r.1[c]).collect()
    };
    let mut f = Array2::zeros((np, nodes));
    let mut v = Array2::zeros((np, m));
    let mut jx = Array2::zeros((np, m));
    let mut phi = Array2::zeros((np - 1, nodes));
    let mut h = Array2::zeros((np - 1, m));
    let mut jz = Array2::zeros((np - 1, m));
    for n in 0..np {
        let fc = column(n, 0);
        if fc.len() != nodes {
            return Err(LdError::Parse(format!("plane {n} has {} rows", fc.len())));
        }
        for i in 0..nodes {
            f[[n, i]] = fc[i];
        }
        for (k, val) in nodes_to_midpoints(&column(n, 1)).into_iter().enumerate() {
            v[[n, k]] = val;
        }
        for (k, val) in nodes_to_midpoints(&column(n, 4)).into_iter().enumerate() {
            jx[[n, k]] = val;
        }
        if n > 0 {
            for (i, val) in column(n, 2).into_iter().enumerate() {
                phi[[n - 1, i]] = val;
            }
            for (k, val) in nodes_to_midpoints(&column(n, 3)).into_iter().enumerate() {
                h[[n - 1, k]] = val;
            }
            for (k, val) in nodes_to_midpoints(&column(n, 5)).into_iter().enumerate() {
                jz[[n - 1, k]] = val;
            }
        }
    }
    Ok(Observables {
        f,
        V: v,
        Phi: phi,
        h,
        jx,
        jz,
    })
}

/// Writes a [`FieldMap2D`] as `x,z,h` rows.
pub fn write_lift_csv<W: std::io::Write>(map: &FieldMap2D, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "z", "h"]).map_err(io_err)?;
    for (row, z) in map.values.iter().zip(&map.z) {
        for (x, h) in map.x.iter().zip(row) {
            w.write_record(&[x.to_string(), z.to_string(), h.to_string()]).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;
    Ok(())
}
