//! The `IFNM` model file.
//!
//! Little-endian: magic `IFNM`, version `u32`; the architecture (spatial dims
//! `u8`, layers, channels, buffer as `u32`, initial modes as one `u32` per
//! axis, activation, normalization and grid kind as `u8`, init scale, input
//! scaling and output scaling as `f64`, input and output channels `u32`); then the parameter count `u64` and per
//! parameter its name (`u64` length + UTF-8), kind `u8` (0 real, 1 complex
//! as interleaved re/im), rank `u8`, extents `u64` and the `f64` data.
//! Effective modes of a spectral tensor are its mode extents minus the buffer.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::codec::{put_f64s, put_string, put_u64, Reader};
use crate::error::{arg_err, Result};
use crate::model::{Activation, FnoConfig, FnoModel, GridKind, Normalization, ParamMut, ParamRef, Scaling};
use crate::spectral::SpectralWeights;
use crate::tensor::ComplexTensor;

pub const MAGIC: &[u8; 4] = b"IFNM";
pub const VERSION: u32 = 1;

fn put_u32(out: &mut Vec<u8>, x: usize) {
    out.extend_from_slice(&(x as u32).to_le_bytes());
}

pub fn to_bytes(model: &FnoModel) -> Vec<u8> {
    let c = &model.config;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(c.spatial_dims as u8);
    put_u32(&mut out, c.layers);
    put_u32(&mut out, c.channels);
    put_u32(&mut out, c.buffer);
    for &k in &c.modes {
        put_u32(&mut out, k);
    }
    out.push(match c.activation {
        Activation::Relu => 0,
    });
    out.push(match c.normalization {
        Normalization::None => 0,
        Normalization::Instance => 1,
    });
    out.push(match c.grid {
        GridKind::Periodic => 0,
        GridKind::Closed => 1,
    });
    put_f64s(&mut out, &[c.init_scale, model.scaling.input, model.scaling.output]);
    put_u32(&mut out, model.input_channels);
    put_u32(&mut out, model.output_channels);
    let params = model.params();
    put_u64(&mut out, params.len() as u64);
    for (name, p) in params {
        put_string(&mut out, &name);
        out.push(matches!(p, ParamRef::Complex(_)) as u8);
        out.push(p.shape().len() as u8);
        for &e in p.shape() {
            put_u64(&mut out, e as u64);
        }
        match p {
            ParamRef::Real(t) => put_f64s(&mut out, t.data()),
            ParamRef::Complex(t) => {
                for z in t.data() {
                    put_f64s(&mut out, &[z.re, z.im]);
                }
            }
        }
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<FnoModel> {
    let mut r = Reader::new(bytes);
    if r.take(4)? != MAGIC {
        return Err(r.error_at(0, "bad magic, expected IFNM"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(r.error_at(4, format!("unsupported version {version}")));
    }
    let at = r.pos;
    let spatial_dims = r.u8()? as usize;
    if !(1..=2).contains(&spatial_dims) {
        return Err(r.error_at(at, format!("spatial dims {spatial_dims} not supported")));
    }
    let layers = r.u32()? as usize;
    let channels = r.u32()? as usize;
    let buffer = r.u32()? as usize;
    let modes = (0..spatial_dims).map(|_| r.u32().map(|k| k as usize)).collect::<Result<Vec<_>>>()?;
    let at = r.pos;
    let activation = match r.u8()? {
        0 => Activation::Relu,
        x => return Err(r.error_at(at, format!("unknown activation {x}"))),
    };
    let normalization = match r.u8()? {
        0 => Normalization::None,
        1 => Normalization::Instance,
        x => return Err(r.error_at(at + 1, format!("unknown normalization {x}"))),
    };
    let grid = match r.u8()? {
        0 => GridKind::Periodic,
        1 => GridKind::Closed,
        x => return Err(r.error_at(at + 2, format!("unknown grid kind {x}"))),
    };
    let init_scale = r.f64()?;
    let at_scaling = r.pos;
    let scaling = Scaling { input: r.f64()?, output: r.f64()? };
    scaling.validate().map_err(|e| r.error_at(at_scaling, e.to_string()))?;
    let input_channels = r.u32()? as usize;
    let output_channels = r.u32()? as usize;
    let config = FnoConfig { spatial_dims, layers, channels, modes, buffer, activation, normalization, init_scale, grid };
    let at = r.pos;
    let mut model =
        FnoModel::init(config, input_channels, output_channels, 0).map_err(|e| r.error_at(at, e.to_string()))?;
    model.scaling = scaling;

    let count = r.u64()? as usize;
    let expected = model.params().len();
    if count != expected {
        return Err(r.error_at(at, format!("{count} parameters stored, architecture has {expected}")));
    }
    let mut loaded = Vec::with_capacity(count);
    for _ in 0..count {
        let at = r.pos;
        let name = r.string()?;
        let kind = r.u8()?;
        let rank = r.u8()? as usize;
        let shape = (0..rank).map(|_| r.u64().map(|e| e as usize)).collect::<Result<Vec<_>>>()?;
        match kind {
            0 => loaded.push((at, name, Loaded::Real(r.tensor(shape)?))),
            1 => {
                let len = shape.iter().product::<usize>();
                let raw = r.f64s(len.saturating_mul(2))?;
                let data = raw.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
                let t = ComplexTensor::new(shape, data).map_err(|e| r.error_at(at, e.to_string()))?;
                loaded.push((at, name, Loaded::Complex(t)));
            }
            x => return Err(r.error_at(at, format!("unknown parameter kind {x}"))),
        }
    }
    if r.remaining() != 0 {
        return Err(r.error_at(r.pos, "trailing bytes after parameters"));
    }

    // Spectral tensors first: their shapes carry the effective modes.
    for (at, name, value) in &loaded {
        if let (Some(layer), Loaded::Complex(t)) = (spectral_layer(name), value) {
            let extents = &t.shape()[..spatial_dims];
            if extents.iter().any(|&m| m <= buffer) {
                return Err(r.error_at(*at, format!("{name} retains no modes beyond the buffer")));
            }
            let effective = extents.iter().map(|m| m - buffer).collect();
            SpectralWeights::from_parts(t.clone(), effective, buffer)
                .and_then(|w| model.set_spectral(layer, w))
                .map_err(|e| r.error_at(*at, e.to_string()))?;
        }
    }
    for ((pname, p), (at, name, value)) in model.params_mut().into_iter().zip(&loaded) {
        if &pname != name {
            return Err(r.error_at(*at, format!("expected parameter {pname}, found {name}")));
        }
        match (p, value) {
            (ParamMut::Real(dst), Loaded::Real(src)) if dst.shape() == src.shape() => *dst = src.clone(),
            (ParamMut::Complex(dst), Loaded::Complex(src)) if dst.shape() == src.shape() => {}
            _ => return Err(r.error_at(*at, format!("parameter {name} has the wrong kind or shape"))),
        }
    }
    Ok(model)
}

enum Loaded {
    Real(crate::tensor::RealTensor),
    Complex(ComplexTensor),
}

fn spectral_layer(name: &str) -> Option<usize> {
    name.strip_prefix("blocks.")?.strip_suffix(".spectral")?.parse().ok()
}

pub fn save(model: &FnoModel, path: &Path) -> Result<()> {
    fs::write(path, to_bytes(model))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<FnoModel> {
    if !path.is_file() {
        return arg_err(format!("checkpoint {} not found", path.display()));
    }
    from_bytes(&fs::read(path)?)
}
