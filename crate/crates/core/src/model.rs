//! The Fourier neural operator `Q ∘ (W_L + K_L) ∘ … ∘ σ(W_1 + K_1) ∘ P`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Gradients, ParamId, Tape, Value, Var};
use crate::data::{Dataset, Sample};
use crate::error::{arg_err, Result};
use crate::spectral::{fourier_conv, SpectralWeights};
use crate::tensor::{ComplexTensor, RealTensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    None,
    Instance,
}

/// How grid coordinates appended to the input are laid out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    /// `x_i = i / N` on a periodic cell.
    Periodic,
    /// `x_i = i / (N − 1)`, both end points on the grid.
    Closed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FnoConfig {
    pub spatial_dims: usize,
    pub layers: usize,
    pub channels: usize,
    /// Initial effective modes `K₀` per spatial axis.
    pub modes: Vec<usize>,
    pub buffer: usize,
    pub activation: Activation,
    pub normalization: Normalization,
    /// Standard deviation of the spectral weight entries (re and im each).
    pub init_scale: f64,
    pub grid: GridKind,
}

/// `1/C²`. A mode slice holds `C²` entries, so its initial strength is about
/// `2·C²·init_scale²`; at `1/C` that is 2 regardless of width and fresh modes
/// outweigh trained ones.
pub fn default_init_scale(channels: usize) -> f64 {
    1.0 / (channels * channels) as f64
}

impl FnoConfig {
    /// Defaults: 4 layers, 32 channels, `K₀ = 1`, `b = 5`, instance norm, `init_scale = 1/C²`.
    pub fn new(spatial_dims: usize) -> Self {
        let channels = 32;
        Self {
            spatial_dims,
            layers: 4,
            channels,
            modes: vec![1; spatial_dims],
            buffer: 5,
            activation: Activation::Relu,
            normalization: Normalization::Instance,
            init_scale: default_init_scale(channels),
            grid: GridKind::Periodic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.spatial_dims) {
            return arg_err(format!("spatial_dims must be 1 or 2, got {}", self.spatial_dims));
        }
        if self.layers == 0 || self.channels == 0 {
            return arg_err("layers and channels must be at least 1");
        }
        if self.modes.len() != self.spatial_dims || self.modes.contains(&0) {
            return arg_err(format!("need one initial mode count ≥ 1 per axis, got {:?}", self.modes));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return arg_err("init_scale must be finite and non-negative");
        }
        Ok(())
    }
}

/// Pointwise affine map `x·W + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pointwise {
    pub weight: RealTensor,
    pub bias: RealTensor,
}

impl Pointwise {
    fn random(fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let std = (1.0 / fan_in as f64).sqrt();
        let weight = RealTensor::from_fn(&[fan_in, fan_out], |_| std * rng.sample::<f64, _>(StandardNormal));
        Self { weight, bias: RealTensor::zeros(&[fan_out]) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceNormParams {
    pub gamma: RealTensor,
    pub beta: RealTensor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub spectral: SpectralWeights,
    pub linear: Pointwise,
    pub norm: Option<InstanceNormParams>,
}

/// Borrowed view of one trainable tensor.
pub enum ParamRef<'a> {
    Real(&'a RealTensor),
    Complex(&'a ComplexTensor),
}

pub enum ParamMut<'a> {
    Real(&'a mut RealTensor),
    Complex(&'a mut ComplexTensor),
}

impl ParamRef<'_> {
    pub fn to_value(&self) -> Value {
        match self {
            ParamRef::Real(t) => Value::Real((*t).clone()),
            ParamRef::Complex(t) => Value::Complex((*t).clone()),
        }
    }

    pub fn shape(&self) -> &[usize] {
        match self {
            ParamRef::Real(t) => t.shape(),
            ParamRef::Complex(t) => t.shape(),
        }
    }
}

/// Fixed scalar scaling around the network: inputs are divided by `input`,
/// outputs multiplied by `output`. Not trained; [`Scaling::fit`] sets both to
/// root-mean-square values of a training set so targets start at unit size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaling {
    pub input: f64,
    pub output: f64,
}

impl Default for Scaling {
    fn default() -> Self {
        Self { input: 1.0, output: 1.0 }
    }
}

impl Scaling {
    pub fn fit(ds: &Dataset) -> Self {
        let rms = |f: fn(&Sample) -> &RealTensor| {
            let (mut sum, mut count) = (0.0, 0usize);
            for s in &ds.samples {
                sum += f(s).data().iter().map(|x| x * x).sum::<f64>();
                count += f(s).len();
            }
            let r = (sum / count.max(1) as f64).sqrt();
            if r > 0.0 && r.is_finite() { r } else { 1.0 }
        };
        Self { input: rms(|s| &s.input), output: rms(|s| &s.output) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.input > 0.0 && self.input.is_finite() && self.output > 0.0 && self.output.is_finite()) {
            return arg_err("scaling factors must be positive and finite");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FnoModel {
    pub config: FnoConfig,
    pub input_channels: usize,
    pub output_channels: usize,
    pub scaling: Scaling,
    pub lift: Pointwise,
    pub blocks: Vec<Block>,
    pub proj: Pointwise,
}

impl FnoModel {
    /// Seeded initialization: spectral entries `~ N(0, init_scale²)` per part,
    /// pointwise weights `~ N(0, 1/fan_in)`, biases zero, norm scale one.
    pub fn init(config: FnoConfig, input_channels: usize, output_channels: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        if input_channels == 0 || output_channels == 0 {
            return arg_err("input and output channel counts must be positive");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = config.channels;
        let lift = Pointwise::random(input_channels + config.spatial_dims, c, &mut rng);
        let mut blocks = Vec::with_capacity(config.layers);
        for _ in 0..config.layers {
            let spectral = SpectralWeights::random(&config.modes, config.buffer, c, config.init_scale, &mut rng)?;
            let linear = Pointwise::random(c, c, &mut rng);
            let norm = match config.normalization {
                Normalization::Instance => Some(InstanceNormParams {
                    gamma: RealTensor::new(vec![c], vec![1.0; c])?,
                    beta: RealTensor::zeros(&[c]),
                }),
                Normalization::None => None,
            };
            blocks.push(Block { spectral, linear, norm });
        }
        let proj = Pointwise::random(c, output_channels, &mut rng);
        Ok(Self { config, input_channels, output_channels, scaling: Scaling::default(), lift, blocks, proj })
    }

    /// Effective modes per layer, per axis.
    pub fn model_modes(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.spectral.effective_modes().to_vec()).collect()
    }

    /// Largest retained mode extent per axis over all layers.
    pub fn max_retained(&self) -> Vec<usize> {
        let mut out = vec![0; self.config.spatial_dims];
        for b in &self.blocks {
            for (o, m) in out.iter_mut().zip(b.spectral.mode_extents()) {
                *o = (*o).max(m);
            }
        }
        out
    }

    pub fn params(&self) -> Vec<(String, ParamRef<'_>)> {
        let mut out = vec![
            ("lift.weight".to_string(), ParamRef::Real(&self.lift.weight)),
            ("lift.bias".to_string(), ParamRef::Real(&self.lift.bias)),
        ];
        for (l, b) in self.blocks.iter().enumerate() {
            out.push((format!("blocks.{l}.spectral"), ParamRef::Complex(b.spectral.weights())));
            out.push((format!("blocks.{l}.weight"), ParamRef::Real(&b.linear.weight)));
            out.push((format!("blocks.{l}.bias"), ParamRef::Real(&b.linear.bias)));
            if let Some(n) = &b.norm {
                out.push((format!("blocks.{l}.norm.gamma"), ParamRef::Real(&n.gamma)));
                out.push((format!("blocks.{l}.norm.beta"), ParamRef::Real(&n.beta)));
            }
        }
        out.push(("proj.weight".to_string(), ParamRef::Real(&self.proj.weight)));
        out.push(("proj.bias".to_string(), ParamRef::Real(&self.proj.bias)));
        out
    }

    /// Same order as [`FnoModel::params`].
    pub fn params_mut(&mut self) -> Vec<(String, ParamMut<'_>)> {
        let mut out = vec![
            ("lift.weight".to_string(), ParamMut::Real(&mut self.lift.weight)),
            ("lift.bias".to_string(), ParamMut::Real(&mut self.lift.bias)),
        ];
        for (l, b) in self.blocks.iter_mut().enumerate() {
            let Block { spectral, linear, norm } = b;
            out.push((format!("blocks.{l}.spectral"), ParamMut::Complex(spectral.weights_mut())));
            out.push((format!("blocks.{l}.weight"), ParamMut::Real(&mut linear.weight)));
            out.push((format!("blocks.{l}.bias"), ParamMut::Real(&mut linear.bias)));
            if let Some(n) = norm {
                out.push((format!("blocks.{l}.norm.gamma"), ParamMut::Real(&mut n.gamma)));
                out.push((format!("blocks.{l}.norm.beta"), ParamMut::Real(&mut n.beta)));
            }
        }
        out.push(("proj.weight".to_string(), ParamMut::Real(&mut self.proj.weight)));
        out.push(("proj.bias".to_string(), ParamMut::Real(&mut self.proj.bias)));
        out
    }

    /// Number of real scalars; complex entries count twice.
    pub fn num_parameters(&self) -> usize {
        self.params()
            .iter()
            .map(|(_, p)| match p {
                ParamRef::Real(t) => t.len(),
                ParamRef::Complex(t) => 2 * t.len(),
            })
            .sum()
    }

    /// All parameters flattened in [`FnoModel::params`] order, complex as (re, im).
    pub fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_parameters());
        for (_, p) in self.params() {
            match p {
                ParamRef::Real(t) => out.extend_from_slice(t.data()),
                ParamRef::Complex(t) => out.extend(t.data().iter().flat_map(|z| [z.re, z.im])),
            }
        }
        out
    }

    pub fn load_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_parameters() {
            return arg_err(format!("expected {} values, got {}", self.num_parameters(), flat.len()));
        }
        let mut pos = 0;
        for (_, p) in self.params_mut() {
            match p {
                ParamMut::Real(t) => {
                    let n = t.len();
                    t.data_mut().copy_from_slice(&flat[pos..pos + n]);
                    pos += n;
                }
                ParamMut::Complex(t) => {
                    for z in t.data_mut() {
                        z.re = flat[pos];
                        z.im = flat[pos + 1];
                        pos += 2;
                    }
                }
            }
        }
        Ok(())
    }

    /// Gradients flattened in the same order as [`FnoModel::flatten_params`].
    pub fn flatten_grads(&self, grads: &Gradients) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.num_parameters());
        for (i, (name, _)) in self.params().iter().enumerate() {
            match grads.get(ParamId(i)) {
                Some(Value::Real(t)) => out.extend_from_slice(t.data()),
                Some(Value::Complex(t)) => out.extend(t.data().iter().flat_map(|z| [z.re, z.im])),
                None => return arg_err(format!("missing gradient for {name}")),
            }
        }
        Ok(out)
    }

    fn check_input(&self, v: &RealTensor) -> Result<()> {
        let d = self.config.spatial_dims;
        if v.rank() != d + 1 || v.shape()[d] != self.input_channels {
            return arg_err(format!(
                "expected input of shape grid({d} axes) × {}, got {:?}",
                self.input_channels,
                v.shape()
            ));
        }
        for (axis, (&n, &m)) in v.shape()[..d].iter().zip(&self.max_retained()).enumerate() {
            if n < m {
                return arg_err(format!("grid extent {n} along axis {axis} is below the {m} retained modes"));
            }
        }
        Ok(())
    }

    /// Appends normalized grid coordinates as extra channels.
    pub fn with_coordinates(&self, v: &RealTensor) -> Result<RealTensor> {
        let d = self.config.spatial_dims;
        let grid = &v.shape()[..d];
        let cin = v.shape()[d];
        let coord = |i: usize, n: usize| match self.config.grid {
            GridKind::Periodic => i as f64 / n as f64,
            GridKind::Closed if n > 1 => i as f64 / (n - 1) as f64,
            GridKind::Closed => 0.0,
        };
        let points: usize = grid.iter().product();
        let mut data = Vec::with_capacity(points * (cin + d));
        for (p, row) in v.data().chunks_exact(cin).enumerate() {
            data.extend_from_slice(row);
            match d {
                1 => data.push(coord(p, grid[0])),
                _ => {
                    data.push(coord(p / grid[1], grid[0]));
                    data.push(coord(p % grid[1], grid[1]));
                }
            }
        }
        let mut shape = grid.to_vec();
        shape.push(cin + d);
        RealTensor::new(shape, data)
    }

    /// Records the network on unscaled data: the input is divided by
    /// `scaling.input` but the output is not multiplied by `scaling.output`.
    /// Parameters are registered as `ParamId(i)` in [`FnoModel::params`] order.
    pub fn record_forward(&self, tape: &mut Tape, v: &RealTensor) -> Result<Var> {
        self.check_input(v)?;
        let mut ids = Vec::new();
        for (i, (_, p)) in self.params().iter().enumerate() {
            ids.push(tape.param(ParamId(i), p.to_value())?);
        }
        let mut next = ids.into_iter();
        let mut take = || next.next().expect("parameter count");
        let mut v = v.clone();
        if self.scaling.input != 1.0 {
            v.data_mut().iter_mut().for_each(|x| *x /= self.scaling.input);
        }
        let x = tape.constant(Value::Real(self.with_coordinates(&v)?));
        let (lw, lb) = (take(), take());
        let mut h = tape.pointwise_linear(x, lw, lb)?;
        let last = self.blocks.len() - 1;
        for (l, block) in self.blocks.iter().enumerate() {
            let (r, w, b) = (take(), take(), take());
            let spectral = fourier_conv(tape, h, r)?;
            let local = tape.pointwise_linear(h, w, b)?;
            h = tape.add(spectral, local)?;
            if block.norm.is_some() {
                let (g, be) = (take(), take());
                h = tape.instance_norm(h, g, be)?;
            }
            if l < last {
                h = match self.config.activation {
                    Activation::Relu => tape.relu(h)?,
                };
            }
        }
        let (qw, qb) = (take(), take());
        tape.pointwise_linear(h, qw, qb)
    }

    pub fn forward(&self, v: &RealTensor) -> Result<RealTensor> {
        let mut tape = Tape::new();
        let out = self.record_forward(&mut tape, v)?;
        let mut out = tape.value(out).as_real()?.clone();
        if self.scaling.output != 1.0 {
            out.data_mut().iter_mut().for_each(|x| *x *= self.scaling.output);
        }
        Ok(out)
    }

    /// Relative L2 loss of one sample and its gradient. Relative L2 is scale
    /// invariant, so the target is divided by `scaling.output` instead of
    /// scaling the recorded output.
    pub fn loss_and_grads(&self, input: &RealTensor, target: &RealTensor) -> Result<(f64, Gradients)> {
        let mut tape = Tape::new();
        let out = self.record_forward(&mut tape, input)?;
        let mut target = target.clone();
        if self.scaling.output != 1.0 {
            target.data_mut().iter_mut().for_each(|x| *x /= self.scaling.output);
        }
        let t = tape.constant(Value::Real(target));
        let loss = tape.relative_l2(out, t)?;
        let value = tape.value(loss).as_real()?.data()[0];
        Ok((value, tape.backward(loss)?))
    }

    pub fn set_spectral(&mut self, layer: usize, weights: SpectralWeights) -> Result<()> {
        let Some(block) = self.blocks.get_mut(layer) else {
            return arg_err(format!("no layer {layer}"));
        };
        if weights.channels() != self.config.channels || weights.buffer_modes() != block.spectral.buffer_modes() {
            return arg_err("replacement spectral weights have the wrong channel or buffer count");
        }
        block.spectral = weights;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::{numeric_gradient, relative_error};

    fn small_config(layers: usize, c: usize, k: usize, b: usize) -> FnoConfig {
        FnoConfig {
            layers,
            channels: c,
            modes: vec![k],
            buffer: b,
            init_scale: 1.0 / c as f64,
            ..FnoConfig::new(1)
        }
    }

    #[test]
    fn same_seed_same_model() {
        let a = FnoModel::init(FnoConfig::new(1), 1, 1, 3).unwrap();
        let b = FnoModel::init(FnoConfig::new(1), 1, 1, 3).unwrap();
        assert_eq!(a, b);
        let c = FnoModel::init(FnoConfig::new(1), 1, 1, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn default_modes_extent_is_six() {
        let m = FnoModel::init(FnoConfig::new(1), 1, 1, 0).unwrap();
        for b in &m.blocks {
            assert_eq!(b.spectral.mode_extents(), vec![6]);
        }
        assert_eq!(m.model_modes(), vec![vec![1]; 4]);
    }

    #[test]
    fn parameter_count_closed_form() {
        let m = FnoModel::init(FnoConfig::new(1), 1, 1, 0).unwrap();
        let (c, l, modes, din, dout) = (32, 4, 6, 2, 1);
        let per_block = 2 * modes * c * c + c * c + c + 2 * c;
        let expect = din * c + c + l * per_block + c * dout + dout;
        assert_eq!(m.num_parameters(), expect);
        let by_traversal: usize = m
            .params()
            .iter()
            .map(|(_, p)| match p {
                ParamRef::Real(t) => t.data().len(),
                ParamRef::Complex(t) => t.data().len() * 2,
            })
            .sum();
        assert_eq!(by_traversal, expect);
    }

    #[test]
    fn zero_parameters_give_zero_output() {
        let mut m = FnoModel::init(small_config(2, 4, 2, 1), 1, 1, 0).unwrap();
        let zeros = vec![0.0; m.num_parameters()];
        m.load_flat_params(&zeros).unwrap();
        let v = RealTensor::from_fn(&[16, 1], |i| (i as f64).sin());
        assert!(m.forward(&v).unwrap().data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn identity_composition() {
        let n = 16;
        let cfg = FnoConfig {
            layers: 1,
            channels: 1,
            modes: vec![n],
            buffer: 0,
            normalization: Normalization::None,
            ..FnoConfig::new(1)
        };
        let mut m = FnoModel::init(cfg, 1, 1, 0).unwrap();
        // P picks the data channel and ignores the coordinate; Q is the identity.
        m.lift.weight = RealTensor::new(vec![2, 1], vec![1.0, 0.0]).unwrap();
        m.proj.weight = RealTensor::new(vec![1, 1], vec![1.0]).unwrap();
        m.blocks[0].linear.weight = RealTensor::zeros(&[1, 1]);
        let eye = ComplexTensor::from_fn(&[n, 1, 1], |_| num_complex::Complex64::new(1.0, 0.0));
        m.set_spectral(0, SpectralWeights::from_parts(eye, vec![n], 0).unwrap()).unwrap();
        let v = RealTensor::from_fn(&[n, 1], |i| ((i * 5) % 7) as f64 - 3.0);
        let out = m.forward(&v).unwrap();
        for (a, b) in out.data().iter().zip(v.data()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn input_shape_checked() {
        let m = FnoModel::init(small_config(1, 4, 3, 2), 1, 1, 0).unwrap();
        assert!(m.forward(&RealTensor::zeros(&[16, 2])).is_err());
        assert!(m.forward(&RealTensor::zeros(&[4, 1])).is_err());
        assert!(m.forward(&RealTensor::zeros(&[5, 1])).is_ok());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = FnoModel::init(small_config(2, 4, 3, 2), 1, 1, 11).unwrap();
        let v = RealTensor::from_fn(&[16, 1], |i| (0.4 * i as f64).sin() + 0.3);
        let t = RealTensor::from_fn(&[16, 1], |i| (0.2 * i as f64).cos());
        let (_, grads) = m.loss_and_grads(&v, &t).unwrap();
        let analytic = m.flatten_grads(&grads).unwrap();
        let mut probe = m.clone();
        let numeric = numeric_gradient(
            |p| {
                probe.load_flat_params(p).unwrap();
                probe.loss_and_grads(&v, &t).unwrap().0
            },
            &m.flatten_params(),
            1e-6,
        );
        let err = relative_error(&analytic, &numeric);
        assert!(err < 1e-5, "relative error {err}");
        // Per tensor as well, so a small parameter block cannot hide behind a large one.
        let mut start = 0;
        for (name, p) in m.params() {
            let len = match p {
                ParamRef::Real(t) => t.len(),
                ParamRef::Complex(t) => 2 * t.len(),
            };
            let (a, n) = (&analytic[start..start + len], &numeric[start..start + len]);
            let scale = n.iter().map(|x| x * x).sum::<f64>().sqrt();
            let diff = a.iter().zip(n).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            assert!(diff < 1e-5 * scale.max(1e-4), "{name}: error {diff} at scale {scale}");
            start += len;
        }
    }

    #[test]
    fn forward_2d_runs() {
        let cfg = FnoConfig { layers: 2, channels: 3, modes: vec![2, 3], buffer: 1, ..FnoConfig::new(2) };
        let m = FnoModel::init(cfg, 1, 1, 0).unwrap();
        let v = RealTensor::from_fn(&[6, 7, 1], |i| i as f64 * 0.01);
        assert_eq!(m.forward(&v).unwrap().shape(), &[6, 7, 1]);
    }
}
