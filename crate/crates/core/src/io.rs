//! JSON interchange for kernels and line models. Forbidden steps travel as
//! `null`; a band-1 model ships its energies as the diagonal/off-diagonal
//! pair, wider bands add the full matrix.

use crate::error::{Error, Result};
use crate::model::{
    EdgeEnergies, KernelStructure, SosModel, TailCoupling, WalkKernel, WallMode,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct KernelDto {
    cutoff: usize,
    structure: KernelStructure,
    wall_mode: WallMode,
    rows: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct SosDto {
    cutoff: usize,
    #[serde(rename = "V")]
    v: Vec<f64>,
    /// W(x, x) for x = 0..=cutoff; null marks a forbidden hold.
    #[serde(rename = "W_diag")]
    w_diag: Vec<Option<f64>>,
    /// W(x, x+1) for x = 0..cutoff.
    #[serde(rename = "W_offdiag")]
    w_offdiag: Vec<Option<f64>>,
    tail: Option<TailCoupling>,
    #[serde(default)]
    log_step_factor: f64,
    /// Full energy matrix, present only when the band exceeds 1; it wins
    /// over the band-1 fields when both appear.
    #[serde(rename = "W_full", default, skip_serializing_if = "Option::is_none")]
    w_full: Option<Vec<Vec<Option<f64>>>>,
}

fn bad_json(what: &str, e: serde_json::Error) -> Error {
    Error::InvalidInput(format!("malformed {what} JSON: {e}"))
}

pub fn kernel_to_json(k: &WalkKernel) -> String {
    let dto = KernelDto {
        cutoff: k.cutoff(),
        structure: k.structure(),
        wall_mode: k.wall_mode(),
        rows: (0..=k.cutoff()).map(|x| k.dense_row(x)).collect(),
    };
    serde_json::to_string_pretty(&dto).expect("kernel serialization is infallible")
}

pub fn kernel_from_json(text: &str) -> Result<WalkKernel> {
    let dto: KernelDto = serde_json::from_str(text).map_err(|e| bad_json("kernel", e))?;
    if dto.rows.len() != dto.cutoff + 1 {
        return Err(Error::InvalidInput(format!(
            "kernel claims cutoff {} but has {} rows",
            dto.cutoff,
            dto.rows.len()
        )));
    }
    let k = WalkKernel::from_dense(&dto.rows, dto.structure, dto.wall_mode)?;
    let violations = k.validate();
    if let Some(v) = violations.first() {
        return Err(Error::InvalidInput(format!(
            "kernel fails validation ({} problem{}): {v}",
            violations.len(),
            if violations.len() == 1 { "" } else { "s" }
        )));
    }
    Ok(k)
}

pub fn sos_to_json(m: &SosModel) -> String {
    let c = m.cutoff();
    let w = m.energies();
    let dto = SosDto {
        cutoff: c,
        v: m.potential().to_vec(),
        w_diag: (0..=c).map(|x| w.get(x, x)).collect(),
        w_offdiag: (0..c).map(|x| w.get(x, x + 1)).collect(),
        tail: m.tail(),
        log_step_factor: m.log_step_factor(),
        w_full: (m.band() > 1).then(|| {
            (0..=c).map(|x| (0..=c).map(|y| w.get(x, y)).collect()).collect()
        }),
    };
    serde_json::to_string_pretty(&dto).expect("model serialization is infallible")
}

pub fn sos_from_json(text: &str) -> Result<SosModel> {
    let dto: SosDto = serde_json::from_str(text).map_err(|e| bad_json("line model", e))?;
    let c = dto.cutoff;
    if dto.v.len() != c + 1 {
        return Err(Error::InvalidInput(format!(
            "potential has {} sites for cutoff {c}",
            dto.v.len()
        )));
    }
    let w = if let Some(full) = dto.w_full {
        if full.len() != c + 1 || full.iter().any(|r| r.len() != c + 1) {
            return Err(Error::InvalidInput("full energy matrix is not square".into()));
        }
        let mut band = 1usize;
        for (x, row) in full.iter().enumerate() {
            for (y, cell) in row.iter().enumerate() {
                if cell.is_some() {
                    band = band.max(x.abs_diff(y));
                }
            }
        }
        let mut w = EdgeEnergies::new_forbidden(c, band);
        for (x, row) in full.iter().enumerate() {
            for (y, cell) in row.iter().enumerate().skip(x) {
                if let Some(e) = *cell {
                    w.set(x, y, e);
                }
            }
        }
        w
    } else {
        if dto.w_diag.len() != c + 1 || dto.w_offdiag.len() != c {
            return Err(Error::InvalidInput(format!(
                "energy arrays have lengths {} / {} for cutoff {c}",
                dto.w_diag.len(),
                dto.w_offdiag.len()
            )));
        }
        let mut w = EdgeEnergies::new_forbidden(c, 1);
        for (x, cell) in dto.w_diag.iter().enumerate() {
            if let Some(e) = *cell {
                w.set(x, x, e);
            }
        }
        for (x, cell) in dto.w_offdiag.iter().enumerate() {
            if let Some(e) = *cell {
                w.set(x, x + 1, e);
            }
        }
        w
    };
    let model = SosModel::new(dto.v, w, dto.log_step_factor)?;
    Ok(match dto.tail {
        Some(t) => model.with_tail(t),
        None => model,
    })
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn read_kernel(path: &Path) -> Result<WalkKernel> {
    kernel_from_json(&read_text(path)?)
}

pub fn write_kernel(path: &Path, k: &WalkKernel) -> Result<()> {
    write_text(path, &kernel_to_json(k))
}

pub fn read_sos(path: &Path) -> Result<SosModel> {
    sos_from_json(&read_text(path)?)
}

pub fn write_sos(path: &Path, m: &SosModel) -> Result<()> {
    write_text(path, &sos_to_json(m))
}
