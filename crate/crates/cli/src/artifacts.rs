//! Reading and writing stage artifacts as binary containers.

use anyhow::{bail, Context, Result};
use gelfand_core::boundary::ScatteringSlice;
use gelfand_core::container::{self, Dtype};
use gelfand_core::coords::LambdaGrid;
use gelfand_core::dbar::LambdaField;
use gelfand_core::forward::DtNMap;
use gelfand_core::fourier::{FrequencyField, FrequencyLayout};
use gelfand_core::grid::VolumeGrid;
use gelfand_core::Vec3;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DtnMeta {
    pub max_degree: usize,
    pub role: String,
    pub route: String,
    pub delta: f64,
    pub seed: u64,
}

pub fn write_dtn(out: &Path, name: &str, phi: &DtNMap, meta: &DtnMeta) -> Result<()> {
    let n = phi.dim();
    let h = container::header("dtn", vec![n, n], Dtype::Float64, vec![], meta)?;
    let rows: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| phi.matrix[(i, j)])).collect();
    container::write_real(&out.join(name), &h, &rows)?;
    Ok(())
}

pub fn read_dtn(out: &Path, name: &str) -> Result<(DtNMap, DtnMeta)> {
    let (h, data) = container::read_real(&out.join(name))
        .with_context(|| format!("reading {name} (run `forward` first)"))?;
    expect_kind(&h, "dtn")?;
    let meta: DtnMeta = container::meta(&h)?;
    let n = gelfand_core::harmonics::count(meta.max_degree);
    if h.shape != [n, n] {
        bail!("{name}: shape {:?} does not match degree {}", h.shape, meta.max_degree);
    }
    let mut phi = gelfand_core::forward::dtn_zero(meta.max_degree);
    for i in 0..n {
        for j in 0..n {
            phi.matrix[(i, j)] = data[i * n + j];
        }
    }
    Ok((phi, meta))
}

#[derive(Debug, Serialize, Deserialize)]
struct SliceMeta {
    grid: LambdaGrid,
    valid: Vec<bool>,
}

pub fn write_slice(out: &Path, slice: &ScatteringSlice) -> Result<()> {
    let g = &slice.grid;
    let meta = SliceMeta {
        grid: g.clone(),
        valid: slice.valid.clone(),
    };
    let h = container::header("ring-slice", vec![g.n_p(), 2, g.n_angular], Dtype::Complex128, vec![], meta)?;
    container::write_complex(&out.join("slice"), &h, &slice.values)?;
    Ok(())
}

pub fn read_slice(out: &Path) -> Result<ScatteringSlice> {
    let (h, values) = container::read_complex(&out.join("slice")).context("reading slice (run `scatter` first)")?;
    expect_kind(&h, "ring-slice")?;
    let meta: SliceMeta = container::meta(&h)?;
    if meta.valid.len() != values.len() {
        bail!("slice mask has {} entries for {} values", meta.valid.len(), values.len());
    }
    Ok(ScatteringSlice {
        grid: meta.grid,
        values,
        valid: meta.valid,
    })
}

pub fn write_field(out: &Path, field: &LambdaField) -> Result<()> {
    let g = &field.grid;
    let shape = vec![g.n_p(), 2, g.n_levels(), g.n_angular];
    let h = container::header("lambda-field", shape, Dtype::Complex128, vec![], &field.grid)?;
    container::write_complex(&out.join("field"), &h, &field.values)?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct FrequencyMeta {
    points: Vec<Vec3>,
    weights: Vec<f64>,
    band_radius: Option<f64>,
    layout: FrequencyLayout,
}

pub fn write_frequency(out: &Path, name: &str, f: &FrequencyField) -> Result<()> {
    let meta = FrequencyMeta {
        points: f.points.clone(),
        weights: f.weights.clone(),
        band_radius: f.band_radius,
        layout: f.layout,
    };
    let h = container::header("frequency-field", vec![f.values.len()], Dtype::Complex128, vec![], meta)?;
    container::write_complex(&out.join(name), &h, &f.values)?;
    Ok(())
}

pub fn read_frequency(out: &Path, name: &str) -> Result<FrequencyField> {
    let (h, values) =
        container::read_complex(&out.join(name)).with_context(|| format!("reading {name} (run `dbar` first)"))?;
    expect_kind(&h, "frequency-field")?;
    let m: FrequencyMeta = container::meta(&h)?;
    if m.points.len() != values.len() {
        bail!("{name}: {} points for {} values", m.points.len(), values.len());
    }
    Ok(FrequencyField {
        points: m.points,
        values,
        weights: m.weights,
        band_radius: m.band_radius,
        layout: m.layout,
    })
}

#[derive(Debug, Serialize)]
struct VolumeMeta {
    half_width: f64,
    centred_nodes: bool,
}

pub fn write_volume(out: &Path, name: &str, grid: &VolumeGrid, values: &[f64]) -> Result<()> {
    let n = grid.n();
    let h = container::header(
        "volume",
        vec![n, n, n],
        Dtype::Float64,
        vec![grid.spacing(); 3],
        VolumeMeta {
            half_width: grid.half_width(),
            centred_nodes: true,
        },
    )?;
    container::write_real(&out.join(name), &h, values)?;
    Ok(())
}

fn expect_kind(h: &container::Header, kind: &str) -> Result<()> {
    if h.kind != kind {
        bail!("expected a {kind} container, found {}", h.kind);
    }
    Ok(())
}

pub fn write_json(out: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    std::fs::write(out.join(name), serde_json::to_vec_pretty(value)?)?;
    Ok(())
}
