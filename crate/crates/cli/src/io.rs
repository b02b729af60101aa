//! File formats: trajectory CSV, plain-text matrices, capacity JSON.
//!
//! Floats are printed with Rust's shortest round-trip formatting, so
//! writing and re-reading reproduces every value bit for bit.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};

use gsemm_core::{CapacityResult, EnergyReport, Trajectory};

use crate::CliError;

fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x}")
    }
}

/// Header: `time,m_1..m_K,E_total,E_assoc,E_seq,E_c,F,G`. Energy cells are
/// left empty when a run records no energies (and the decomposition cells
/// when the variant has none).
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let k = traj.overlaps.first().map_or(0, |m| m.len());
    let mut out = String::new();
    out.push_str("time");
    for i in 1..=k {
        let _ = write!(out, ",m_{i}");
    }
    out.push_str(",E_total,E_assoc,E_seq,E_c,F,G\n");

    for (idx, &t) in traj.times.iter().enumerate() {
        let _ = write!(out, "{}", fmt_f64(t));
        for m in traj.overlaps[idx].iter() {
            let _ = write!(out, ",{}", fmt_f64(*m));
        }
        match traj.energies.as_ref().map(|e| &e[idx]) {
            Some(r) => {
                let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
                let _ = write!(
                    out,
                    ",{},{},{},{},{},{}",
                    fmt_f64(r.total),
                    opt(r.e_assoc),
                    opt(r.e_seq),
                    opt(r.e_c),
                    fmt_f64(r.f_rate),
                    fmt_f64(r.g_rate)
                );
            }
            None => out.push_str(",,,,,,"),
        }
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

/// Inverse of [`write_trajectory_csv`]; states are not part of the format.
pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::config("empty trajectory file".to_string()))?;
    let columns: Vec<&str> = header.split(',').collect();
    let k = columns.iter().filter(|c| c.starts_with("m_")).count();

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        overlaps: Vec::new(),
        energies: None,
    };
    let mut energies = Vec::new();
    let mut any_energy = false;
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != k + 7 {
            return Err(CliError::config(format!(
                "line {}: expected {} fields, found {}",
                lineno + 2,
                k + 7,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64, CliError> {
            s.parse()
                .map_err(|e| CliError::config(format!("line {}: {e}", lineno + 2)))
        };
        let parse_opt = |s: &str| -> Result<Option<f64>, CliError> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse(s).map(Some)
            }
        };
        traj.times.push(parse(fields[0])?);
        let m: Result<Vec<f64>, _> = fields[1..=k].iter().map(|s| parse(s)).collect();
        traj.overlaps.push(Array1::from(m?));
        let total = parse_opt(fields[k + 1])?;
        if let Some(total) = total {
            any_energy = true;
            energies.push(EnergyReport {
                total,
                e_assoc: parse_opt(fields[k + 2])?,
                e_seq: parse_opt(fields[k + 3])?,
                e_c: parse_opt(fields[k + 4])?,
                f_rate: parse(fields[k + 5])?,
                g_rate: parse(fields[k + 6])?,
            });
        }
    }
    if any_energy {
        if energies.len() != traj.times.len() {
            return Err(CliError::config(
                "energy columns present on only some rows".to_string(),
            ));
        }
        traj.energies = Some(energies);
    }
    Ok(traj)
}

fn write_matrix_block(out: &mut String, m: &Array2<f64>) {
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
}

/// Plain-text matrix blocks: a `rows cols` header line, then row-major
/// values, one row per line. A file may hold several blocks back to back.
pub fn write_matrices(path: &Path, matrices: &[&Array2<f64>]) -> Result<(), CliError> {
    let mut out = String::new();
    for m in matrices {
        write_matrix_block(&mut out, m);
    }
    write_file(path, out.as_bytes())
}

pub fn read_matrices(path: &Path) -> Result<Vec<Array2<f64>>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut tokens = text.split_whitespace();
    let mut out = Vec::new();
    while let Some(first) = tokens.next() {
        let rows: usize = first
            .parse()
            .map_err(|e| CliError::config(format!("bad matrix header: {e}")))?;
        let cols: usize = tokens
            .next()
            .ok_or_else(|| CliError::config("truncated matrix header".to_string()))?
            .parse()
            .map_err(|e| CliError::config(format!("bad matrix header: {e}")))?;
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            let tok = tokens
                .next()
                .ok_or_else(|| CliError::config("truncated matrix body".to_string()))?;
            values.push(
                tok.parse::<f64>()
                    .map_err(|e| CliError::config(format!("bad matrix value: {e}")))?,
            );
        }
        let m = Array2::from_shape_vec((rows, cols), values)
            .map_err(|e| CliError::config(format!("bad matrix shape: {e}")))?;
        out.push(m);
    }
    Ok(out)
}

/// One JSON object per episode length, collected in an array.
pub fn capacity_json(results: &[CapacityResult]) -> serde_json::Value {
    let items: Vec<serde_json::Value> = results
        .iter()
        .map(|r| {
            serde_json::json!({
                "variant": r.variant.name(),
                "k": r.k,
                "trials": r.trials,
                "mean_min_nf": r.mean_min_nf,
                "std_min_nf": r.std_min_nf,
                "saturated_count": r.saturated_count,
                "per_trial": r.min_n_f_per_trial,
            })
        })
        .collect();
    serde_json::Value::Array(items)
}

pub fn write_capacity_table(path: &Path, results: &[CapacityResult]) -> Result<(), CliError> {
    let mut out = String::from("variant,k,trials,mean_min_nf,std_min_nf,saturated_count\n");
    for r in results {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.variant.name(),
            r.k,
            r.trials,
            opt(r.mean_min_nf),
            opt(r.std_min_nf),
            r.saturated_count
        );
    }
    write_file(path, out.as_bytes())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::config(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    let mut f = std::fs::File::create(path)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}
