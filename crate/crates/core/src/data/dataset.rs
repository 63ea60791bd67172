//! Input/output pairs and the `IFND` binary container.
//!
//! Layout, all little-endian: magic `IFND`, version `u32`, problem tag `u8`,
//! sample count `u64`; then per sample the rank `u8`, the extents as `u64`
//! (grid axes followed by the channel axis), the input payload and the output
//! payload as `f64`; finally the generation config as a `u64` byte length and
//! UTF-8 text.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codec::Reader;
use crate::error::{arg_err, Result};
use crate::model::GridKind;
use crate::tensor::RealTensor;

pub const MAGIC: &[u8; 4] = b"IFND";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Burgers,
    Darcy,
}

impl Problem {
    pub fn tag(self) -> u8 {
        match self {
            Problem::Burgers => 0,
            Problem::Darcy => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Problem::Burgers),
            1 => Some(Problem::Darcy),
            _ => None,
        }
    }

    pub fn spatial_dims(self) -> usize {
        match self {
            Problem::Burgers => 1,
            Problem::Darcy => 2,
        }
    }

    /// Burgers lives on the periodic interval; Darcy grids include both boundaries.
    pub fn grid_kind(self) -> GridKind {
        match self {
            Problem::Burgers => GridKind::Periodic,
            Problem::Darcy => GridKind::Closed,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Problem::Burgers => "burgers",
            Problem::Darcy => "darcy",
        }
    }
}

/// One `(input, output)` pair, each shaped `[grid..., channels]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub input: RealTensor,
    pub output: RealTensor,
}

impl Sample {
    pub fn new(input: RealTensor, output: RealTensor) -> Result<Self> {
        let (si, so) = (input.shape(), output.shape());
        if si.len() < 2 || si.len() != so.len() || si[..si.len() - 1] != so[..so.len() - 1] {
            return arg_err(format!("sample grids differ: input {si:?}, output {so:?}"));
        }
        Ok(Self { input, output })
    }

    pub fn grid(&self) -> &[usize] {
        let s = self.input.shape();
        &s[..s.len() - 1]
    }

    pub fn input_channels(&self) -> usize {
        *self.input.shape().last().unwrap()
    }

    pub fn output_channels(&self) -> usize {
        *self.output.shape().last().unwrap()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub problem: Problem,
    pub samples: Vec<Sample>,
    /// Generation config text stored alongside the data.
    pub config: String,
}

impl Dataset {
    pub fn new(problem: Problem, samples: Vec<Sample>, config: String) -> Result<Self> {
        if let Some(first) = samples.first() {
            let (si, so) = (first.input.shape(), first.output.shape());
            if si != so {
                return arg_err(format!("stored samples need equal input and output shapes, got {si:?} and {so:?}"));
            }
            if si.len() != problem.spatial_dims() + 1 {
                return arg_err(format!("{} samples must have rank {}", problem.name(), problem.spatial_dims() + 1));
            }
            if let Some((i, _)) =
                samples.iter().enumerate().find(|(_, s)| s.input.shape() != si || s.output.shape() != so)
            {
                return arg_err(format!("sample {i} has a different shape from sample 0"));
            }
        }
        Ok(Self { problem, samples, config })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Grid extent along every axis, `None` for an empty dataset.
    pub fn resolution(&self) -> Option<usize> {
        self.samples.first().map(|s| s.grid()[0])
    }

    /// Subsamples every grid axis to `target` points. Periodic grids need
    /// `target | N`; closed grids need `(target − 1) | (N − 1)`.
    pub fn at_resolution(&self, target: usize) -> Result<Dataset> {
        let Some(n) = self.resolution() else {
            return Ok(self.clone());
        };
        if target == n {
            return Ok(self.clone());
        }
        let stride = subsample_stride(self.problem.grid_kind(), n, target)?;
        let samples = self
            .samples
            .iter()
            .map(|s| Sample::new(subsample(&s.input, stride, target)?, subsample(&s.output, stride, target)?))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(self.problem, samples, self.config.clone())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(self.problem.tag());
        out.extend_from_slice(&(self.samples.len() as u64).to_le_bytes());
        for s in &self.samples {
            out.push(s.input.rank() as u8);
            for &e in s.input.shape() {
                out.extend_from_slice(&(e as u64).to_le_bytes());
            }
            for t in [&s.input, &s.output] {
                for x in t.data() {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
        out.extend_from_slice(&(self.config.len() as u64).to_le_bytes());
        out.extend_from_slice(self.config.as_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Dataset> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != MAGIC {
            return Err(r.error_at(0, "bad magic, expected IFND"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(r.error_at(4, format!("unsupported version {version}")));
        }
        let tag_at = r.pos;
        let problem = Problem::from_tag(r.u8()?).ok_or_else(|| r.error_at(tag_at, "unknown problem tag"))?;
        let count = r.u64()?;
        let mut samples = Vec::new();
        for _ in 0..count {
            let at = r.pos;
            let rank = r.u8()? as usize;
            if rank < 2 {
                return Err(r.error_at(at, format!("sample rank {rank} is below 2")));
            }
            let shape = (0..rank).map(|_| r.u64().map(|e| e as usize)).collect::<Result<Vec<_>>>()?;
            let input = r.tensor(shape.clone())?;
            let output = r.tensor(shape)?;
            samples.push(Sample::new(input, output).map_err(|e| r.error_at(at, e.to_string()))?);
        }
        let len = r.u64()? as usize;
        let at = r.pos;
        let config = String::from_utf8(r.take(len)?.to_vec()).map_err(|_| r.error_at(at, "config is not UTF-8"))?;
        if r.pos != bytes.len() {
            return Err(r.error_at(r.pos, "trailing bytes after config"));
        }
        Dataset::new(problem, samples, config).map_err(|e| r.error_at(0, e.to_string()))
    }
}

/// Byte length of a file holding `count` samples of shape `[grid..., channels]`.
pub fn encoded_len(count: usize, grid: &[usize], channels: usize, config_len: usize) -> usize {
    let points: usize = grid.iter().product();
    let per = 1 + 8 * (grid.len() + 1) + 16 * points * channels;
    4 + 4 + 1 + 8 + count * per + 8 + config_len
}

pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    fs::write(path, ds.to_bytes())?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    Dataset::from_bytes(&fs::read(path)?)
}

pub fn subsample_stride(kind: GridKind, n: usize, target: usize) -> Result<usize> {
    let ok = match kind {
        GridKind::Periodic => target > 0 && target <= n && n.is_multiple_of(target),
        GridKind::Closed => target > 1 && target <= n && (n - 1).is_multiple_of(target - 1),
    };
    if !ok {
        return arg_err(format!("cannot subsample a {kind:?} grid of {n} points to {target}"));
    }
    Ok(match kind {
        GridKind::Periodic => n / target,
        GridKind::Closed => (n - 1) / (target - 1),
    })
}

/// Keeps every `stride`-th point on each grid axis of a `[grid..., channels]` tensor.
pub fn subsample(t: &RealTensor, stride: usize, target: usize) -> Result<RealTensor> {
    let shape = t.shape();
    let dims = shape.len() - 1;
    let c = shape[dims];
    let mut new_shape = vec![target; dims];
    new_shape.push(c);
    let mut out = RealTensor::zeros(&new_shape);
    let mut idx = vec![0usize; dims + 1];
    for o in 0..out.len() / c {
        let mut rem = o;
        for d in (0..dims).rev() {
            idx[d] = (rem % target) * stride;
            rem /= target;
        }
        idx[dims] = 0;
        let src = t.offset(&idx);
        out.data_mut()[o * c..(o + 1) * c].copy_from_slice(&t.data()[src..src + c]);
    }
    Ok(out)
}
