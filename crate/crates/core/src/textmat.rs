//! Plain-text interchange format for complex matrices.
//!
//! Files carry a version line, a `cfg` header with every configuration
//! field, and any number of named matrices with explicit complex entries in
//! row-major order (one matrix row per line, alternating re/im). Floats are
//! written in Rust's shortest round-trip form, so export followed by import
//! is bit-exact.
//!
//! ```text
//! dpa-mimo textmat v1
//! cfg m_t=2 m_r=2 n_t_sub=4 ... seed=7
//! matrix f_rf 8 8
//! 0.35355339059327373 0 ... (16 numbers per row here)
//! ...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::config::{Error, Result, SystemConfig};
use crate::model::ChannelRealization;
use crate::sounding::{measurement_matrix, PilotPlan};

const MAGIC: &str = "dpa-mimo textmat v1";

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

fn cfg_line(cfg: &SystemConfig) -> String {
    format!(
        "cfg m_t={} m_r={} n_t_sub={} n_r_sub={} n_t_beam={} n_r_beam={} n_s={} \
         l_indiv={} l_common={} var_los={} var_nlos={} pilot_power={} data_power={} \
         noise_var={} seed={}",
        cfg.m_t,
        cfg.m_r,
        cfg.n_t_sub,
        cfg.n_r_sub,
        cfg.n_t_beam,
        cfg.n_r_beam,
        cfg.n_s,
        cfg.l_indiv,
        cfg.l_common,
        cfg.var_los,
        cfg.var_nlos,
        cfg.pilot_power,
        cfg.data_power,
        cfg.noise_var,
        cfg.seed
    )
}

fn parse_cfg_line(path: &Path, line: &str) -> Result<SystemConfig> {
    let mut fields = std::collections::HashMap::new();
    for tok in line.split_whitespace().skip(1) {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(path, format!("bad cfg token {tok:?}")))?;
        fields.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| -> Result<String> {
        fields
            .get(k)
            .cloned()
            .ok_or_else(|| parse_err(path, format!("cfg field {k} missing")))
    };
    let usize_of = |k: &str| -> Result<usize> {
        get(k)?
            .parse()
            .map_err(|e| parse_err(path, format!("cfg field {k}: {e}")))
    };
    let f64_of = |k: &str| -> Result<f64> {
        get(k)?
            .parse()
            .map_err(|e| parse_err(path, format!("cfg field {k}: {e}")))
    };
    Ok(SystemConfig {
        m_t: usize_of("m_t")?,
        m_r: usize_of("m_r")?,
        n_t_sub: usize_of("n_t_sub")?,
        n_r_sub: usize_of("n_r_sub")?,
        n_t_beam: usize_of("n_t_beam")?,
        n_r_beam: usize_of("n_r_beam")?,
        n_s: usize_of("n_s")?,
        l_indiv: usize_of("l_indiv")?,
        l_common: usize_of("l_common")?,
        var_los: f64_of("var_los")?,
        var_nlos: f64_of("var_nlos")?,
        pilot_power: f64_of("pilot_power")?,
        data_power: f64_of("data_power")?,
        noise_var: f64_of("noise_var")?,
        seed: get("seed")?
            .parse()
            .map_err(|e| parse_err(path, format!("cfg field seed: {e}")))?,
    })
}

/// Writes named matrices with a configuration header.
pub fn write_matrices(
    path: &Path,
    cfg: &SystemConfig,
    matrices: &[(&str, &Array2<C64>)],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&cfg_line(cfg));
    out.push('\n');
    for (name, m) in matrices {
        writeln!(out, "matrix {} {} {}", name, m.nrows(), m.ncols()).expect("string write");
        for i in 0..m.nrows() {
            let mut line = String::new();
            for j in 0..m.ncols() {
                if j > 0 {
                    line.push(' ');
                }
                let v = m[[i, j]];
                write!(line, "{} {}", v.re, v.im).expect("string write");
            }
            out.push_str(&line);
            out.push('\n');
        }
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Reads back a matrix file: configuration header plus named matrices.
pub fn read_matrices(path: &Path) -> Result<(SystemConfig, Vec<(String, Array2<C64>)>)> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l.trim() == MAGIC => {}
        other => {
            return Err(parse_err(
                path,
                format!("expected header {MAGIC:?}, found {other:?}"),
            ))
        }
    }
    let cfg = match lines.next() {
        Some(l) if l.starts_with("cfg ") => parse_cfg_line(path, l)?,
        other => return Err(parse_err(path, format!("expected cfg line, found {other:?}"))),
    };
    let mut matrices = Vec::new();
    while let Some(line) = lines.next() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        if parts.next() != Some("matrix") {
            return Err(parse_err(path, format!("expected matrix header, got {line:?}")));
        }
        let name = parts
            .next()
            .ok_or_else(|| parse_err(path, "matrix name missing"))?
            .to_string();
        let rows: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(path, "bad matrix row count"))?;
        let cols: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(path, "bad matrix column count"))?;
        let mut m = Array2::zeros((rows, cols));
        for i in 0..rows {
            let row_line = lines
                .next()
                .ok_or_else(|| parse_err(path, format!("matrix {name} truncated at row {i}")))?;
            let mut nums = row_line.split_whitespace();
            for j in 0..cols {
                let re: f64 = nums
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse_err(path, format!("matrix {name} row {i} short")))?;
                let im: f64 = nums
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse_err(path, format!("matrix {name} row {i} short")))?;
                m[[i, j]] = C64::new(re, im);
            }
            if nums.next().is_some() {
                return Err(parse_err(path, format!("matrix {name} row {i} has extra entries")));
            }
        }
        matrices.push((name, m));
    }
    Ok((cfg, matrices))
}

/// Exports a pilot plan (all six pilot matrices plus the equivalent
/// measurement matrix) for cross-implementation comparison.
pub fn plan_to_file(plan: &PilotPlan, path: &Path) -> Result<()> {
    write_matrices(
        path,
        &plan.cfg,
        &[
            ("f_rf", &plan.f_rf),
            ("f_bb", &plan.f_bb),
            ("f", &plan.f),
            ("w_rf", &plan.w_rf),
            ("w_bb", &plan.w_bb),
            ("w", &plan.w),
            ("phi", plan.phi.dense()),
        ],
    )
}

/// Imports a pilot plan, rebuilding the measurement operator from the
/// stored composite pilots and checking it against the stored phi.
pub fn plan_from_file(path: &Path) -> Result<PilotPlan> {
    let (cfg, mats) = read_matrices(path)?;
    let find = |name: &str| -> Result<Array2<C64>> {
        mats.iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m.clone())
            .ok_or_else(|| parse_err(path, format!("matrix {name} missing")))
    };
    let f = find("f")?;
    let w = find("w")?;
    let phi = measurement_matrix(&f, &w, &cfg)?;
    let stored_phi = find("phi")?;
    if stored_phi.dim() != phi.dense().dim() {
        return Err(parse_err(path, "stored phi has the wrong shape"));
    }
    let err = (phi.dense() - &stored_phi)
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    if err > 1e-9 {
        return Err(parse_err(
            path,
            format!("stored phi deviates from the pilots by {err:.3e}"),
        ));
    }
    Ok(PilotPlan {
        f_rf: find("f_rf")?,
        f_bb: find("f_bb")?,
        f,
        w_rf: find("w_rf")?,
        w_bb: find("w_bb")?,
        w,
        phi,
        cfg,
    })
}

/// Exports a channel realization (beam-domain and spatial matrices).
pub fn channel_to_file(ch: &ChannelRealization, cfg: &SystemConfig, path: &Path) -> Result<()> {
    write_matrices(path, cfg, &[("g", &ch.g), ("h", &ch.h)])
}

/// Imports a channel written by [`channel_to_file`]: returns the embedded
/// configuration with the beam-domain and spatial matrices.
pub fn channel_from_file(path: &Path) -> Result<(SystemConfig, Array2<C64>, Array2<C64>)> {
    let (cfg, mats) = read_matrices(path)?;
    let mut g = None;
    let mut h = None;
    for (name, m) in mats {
        match name.as_str() {
            "g" => g = Some(m),
            "h" => h = Some(m),
            _ => {}
        }
    }
    match (g, h) {
        (Some(g), Some(h)) => Ok((cfg, g, h)),
        _ => Err(parse_err(path, "channel file must contain matrices g and h")),
    }
}
