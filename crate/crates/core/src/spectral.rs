//! Fourier convolution: mode truncation, learnable per-mode channel mixing,
//! frequency strengths and prefix-preserving growth of the weight tensor.
//!
//! Along each spatial axis the retained modes are packed in order of
//! increasing |k|, negative frequency first at each magnitude:
//! `0, −1, +1, −2, +2, …`. Keeping the first `M` packed modes therefore keeps
//! the `⌈M/2⌉` lowest non-negative and `⌊M/2⌋` lowest negative frequencies,
//! and growing `M` only appends new modes at the end of the axis.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::autodiff::{Tape, Value, Var};
use crate::error::{arg_err, Result};
use crate::tensor::{ComplexTensor, RealTensor};

/// Signed frequency of packed mode index `j`.
pub fn mode_frequency(j: usize) -> i64 {
    if j % 2 == 1 {
        -(j as i64 + 1) / 2
    } else {
        j as i64 / 2
    }
}

/// DFT bin (in `0..n`) holding packed mode `j` on an axis of extent `n`.
pub fn mode_bin(j: usize, n: usize) -> usize {
    mode_frequency(j).rem_euclid(n as i64) as usize
}

/// Number of lowest modes kept along each spatial axis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncationSpec {
    pub retained: Vec<usize>,
}

impl TruncationSpec {
    pub fn new(retained: Vec<usize>) -> Self {
        Self { retained }
    }
}

/// Packed-mode ↔ grid-bin correspondence for one (grid, modes) pair.
#[derive(Clone, Debug)]
pub struct ModeMap {
    grid: Vec<usize>,
    modes: Vec<usize>,
    /// Flat grid index of each packed mode, packed modes in row-major order.
    bins: Vec<usize>,
    /// Product of trailing (non-grid) extents.
    trailing: usize,
}

impl ModeMap {
    pub fn new(grid: &[usize], modes: &[usize], trailing: usize) -> Result<Self> {
        if grid.len() != modes.len() {
            return arg_err(format!("{} grid axes but {} mode counts", grid.len(), modes.len()));
        }
        for (d, (&m, &n)) in modes.iter().zip(grid).enumerate() {
            if m > n {
                return arg_err(format!("retained modes {m} exceed extent {n} along axis {d}"));
            }
        }
        let total: usize = modes.iter().product();
        let mut bins = Vec::with_capacity(total);
        let mut idx = vec![0usize; modes.len()];
        for _ in 0..total {
            let flat = idx
                .iter()
                .zip(grid)
                .fold(0, |acc, (&j, &n)| acc * n + mode_bin(j, n));
            bins.push(flat);
            for d in (0..modes.len()).rev() {
                idx[d] += 1;
                if idx[d] < modes[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        Ok(Self { grid: grid.to_vec(), modes: modes.to_vec(), bins, trailing })
    }

    /// Map for contracting a spectrum `[N.., C]` with weights `[M.., C, C]`.
    pub fn for_contraction(x_shape: &[usize], w_shape: &[usize]) -> Result<Self> {
        if w_shape.len() < 3 || x_shape.len() + 1 != w_shape.len() {
            return arg_err(format!("cannot contract spectrum {x_shape:?} with weights {w_shape:?}"));
        }
        let d = w_shape.len() - 2;
        let c = x_shape[d];
        if w_shape[d] != c || w_shape[d + 1] != c {
            return arg_err(format!("channel mismatch: input has {c}, weights are {w_shape:?}"));
        }
        Self::new(&x_shape[..d], &w_shape[..d], c)
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    fn grid_shape(&self) -> Vec<usize> {
        let mut s = self.grid.clone();
        s.push(self.trailing);
        s
    }

    pub(crate) fn contract(&self, x: &ComplexTensor, w: &ComplexTensor) -> ComplexTensor {
        let c = self.trailing;
        let mut out = ComplexTensor::zeros(&self.grid_shape());
        let (xd, wd) = (x.data(), w.data());
        let od = out.data_mut();
        for (p, &f) in self.bins.iter().enumerate() {
            let xrow = &xd[f * c..(f + 1) * c];
            let orow = &mut od[f * c..(f + 1) * c];
            let wblock = &wd[p * c * c..(p + 1) * c * c];
            for (i, xi) in xrow.iter().enumerate() {
                let wrow = &wblock[i * c..(i + 1) * c];
                for (o, wv) in orow.iter_mut().zip(wrow) {
                    *o += xi * wv;
                }
            }
        }
        out
    }

    pub(crate) fn contract_adjoint_input(&self, g: &ComplexTensor, w: &ComplexTensor) -> ComplexTensor {
        let c = self.trailing;
        let mut out = ComplexTensor::zeros(&self.grid_shape());
        let (gd, wd) = (g.data(), w.data());
        let od = out.data_mut();
        for (p, &f) in self.bins.iter().enumerate() {
            let grow = &gd[f * c..(f + 1) * c];
            let wblock = &wd[p * c * c..(p + 1) * c * c];
            for i in 0..c {
                let wrow = &wblock[i * c..(i + 1) * c];
                let mut acc = Complex64::default();
                for (gv, wv) in grow.iter().zip(wrow) {
                    acc += gv * wv.conj();
                }
                od[f * c + i] = acc;
            }
        }
        out
    }

    pub(crate) fn contract_adjoint_weights(&self, g: &ComplexTensor, x: &ComplexTensor) -> ComplexTensor {
        let c = self.trailing;
        let mut shape = self.modes.clone();
        shape.extend([c, c]);
        let mut out = ComplexTensor::zeros(&shape);
        let (gd, xd) = (g.data(), x.data());
        let od = out.data_mut();
        for (p, &f) in self.bins.iter().enumerate() {
            let grow = &gd[f * c..(f + 1) * c];
            for i in 0..c {
                let xc = xd[f * c + i].conj();
                let orow = &mut od[(p * c + i) * c..(p * c + i + 1) * c];
                for (o, gv) in orow.iter_mut().zip(grow) {
                    *o = xc * gv;
                }
            }
        }
        out
    }
}

fn split_grid(shape: &[usize], spec: &TruncationSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    let d = spec.retained.len();
    if shape.len() < d {
        return arg_err(format!("tensor of rank {} has fewer than {d} grid axes", shape.len()));
    }
    Ok((shape[..d].to_vec(), shape[d..].to_vec()))
}

/// Gathers the retained modes of a full spectrum into a dense `[M.., rest..]` tensor.
pub fn truncate_modes(x: &ComplexTensor, spec: &TruncationSpec) -> Result<ComplexTensor> {
    let (grid, rest) = split_grid(x.shape(), spec)?;
    let trailing: usize = rest.iter().product();
    let map = ModeMap::new(&grid, &spec.retained, trailing)?;
    let mut shape = spec.retained.clone();
    shape.extend(&rest);
    let mut data = Vec::with_capacity(map.bins.len() * trailing);
    for &f in &map.bins {
        data.extend_from_slice(&x.data()[f * trailing..(f + 1) * trailing]);
    }
    ComplexTensor::new(shape, data)
}

/// Places packed modes back on a full grid, zero elsewhere. Adjoint of [`truncate_modes`].
pub fn scatter_modes(y: &ComplexTensor, spec: &TruncationSpec, grid: &[usize]) -> Result<ComplexTensor> {
    let (modes, rest) = split_grid(y.shape(), spec)?;
    if modes != spec.retained {
        return arg_err(format!("mode extents {modes:?} do not match {:?}", spec.retained));
    }
    let trailing: usize = rest.iter().product();
    let map = ModeMap::new(grid, &spec.retained, trailing)?;
    let mut shape = grid.to_vec();
    shape.extend(&rest);
    let mut out = ComplexTensor::zeros(&shape);
    for (p, &f) in map.bins.iter().enumerate() {
        out.data_mut()[f * trailing..(f + 1) * trailing].copy_from_slice(&y.data()[p * trailing..(p + 1) * trailing]);
    }
    Ok(out)
}

/// Learnable per-mode transform `R` of shape `(K_d + b)… × C × C`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralWeights {
    weights: ComplexTensor,
    effective: Vec<usize>,
    buffer: usize,
    channels: usize,
}

impl SpectralWeights {
    /// Random weights with real and imaginary parts drawn from `N(0, init_scale²)`.
    pub fn random<R: Rng + ?Sized>(
        effective: &[usize],
        buffer: usize,
        channels: usize,
        init_scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if effective.is_empty() || effective.contains(&0) || channels == 0 {
            return arg_err("spectral weights need ≥1 effective mode per axis and ≥1 channel");
        }
        let mut shape: Vec<usize> = effective.iter().map(|k| k + buffer).collect();
        shape.extend([channels, channels]);
        let weights = ComplexTensor::from_fn(&shape, |_| sample_entry(init_scale, rng));
        Ok(Self { weights, effective: effective.to_vec(), buffer, channels })
    }

    /// Wraps an existing tensor; its mode extents must equal `effective + buffer`.
    pub fn from_parts(weights: ComplexTensor, effective: Vec<usize>, buffer: usize) -> Result<Self> {
        let shape = weights.shape();
        let d = effective.len();
        if d == 0 || shape.len() != d + 2 || shape[d] != shape[d + 1] {
            return arg_err(format!("weights {shape:?} are not (modes…, C, C) for {d} axes"));
        }
        for (k, &m) in effective.iter().zip(shape) {
            if *k == 0 || k + buffer != m {
                return arg_err(format!("effective {effective:?} + buffer {buffer} does not match {shape:?}"));
            }
        }
        if !weights.is_finite() {
            return arg_err("spectral weights contain non-finite values");
        }
        let channels = shape[d];
        Ok(Self { weights, effective, buffer, channels })
    }

    pub fn weights(&self) -> &ComplexTensor {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut ComplexTensor {
        &mut self.weights
    }

    pub fn effective_modes(&self) -> &[usize] {
        &self.effective
    }

    pub fn buffer_modes(&self) -> usize {
        self.buffer
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn spatial_dims(&self) -> usize {
        self.effective.len()
    }

    /// Total retained modes `K_d + b` per axis.
    pub fn mode_extents(&self) -> Vec<usize> {
        self.weights.shape()[..self.spatial_dims()].to_vec()
    }

    pub fn truncation(&self) -> TruncationSpec {
        TruncationSpec::new(self.mode_extents())
    }
}

fn sample_entry<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Complex64 {
    if scale == 0.0 {
        return Complex64::default();
    }
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

/// Per-axis strength vectors `S_k^{(d)}`: the summed squared moduli of all
/// weight entries whose mode index along axis `d` is `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencySpectrum {
    pub strengths: Vec<Vec<f64>>,
}

pub fn frequency_strength(r: &SpectralWeights) -> FrequencySpectrum {
    let extents = r.mode_extents();
    let cc = r.channels * r.channels;
    let mut strengths: Vec<Vec<f64>> = extents.iter().map(|&m| vec![0.0; m]).collect();
    let mut idx = vec![0usize; extents.len()];
    for block in r.weights.data().chunks_exact(cc) {
        let s: f64 = block.iter().map(|z| z.norm_sqr()).sum();
        for (d, &j) in idx.iter().enumerate() {
            strengths[d][j] += s;
        }
        for d in (0..extents.len()).rev() {
            idx[d] += 1;
            if idx[d] < extents[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    FrequencySpectrum { strengths }
}

/// Copies `old` (shape `old_shape`) into the leading corner of a zero tensor of `new_shape`.
pub(crate) fn embed_prefix<T: Copy + Default>(old: &[T], old_shape: &[usize], new_shape: &[usize]) -> Vec<T> {
    let mut out = vec![T::default(); new_shape.iter().product()];
    if old.is_empty() {
        return out;
    }
    let rank = old_shape.len();
    let mut idx = vec![0usize; rank];
    for &v in old {
        let flat = idx.iter().zip(new_shape).fold(0, |acc, (&i, &n)| acc * n + i);
        out[flat] = v;
        for d in (0..rank).rev() {
            idx[d] += 1;
            if idx[d] < old_shape[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

/// Grows the effective modes to `new_effective`, keeping every old entry at
/// its old index and drawing the new entries from `N(0, init_scale²)`.
pub fn expand_weights<R: Rng + ?Sized>(
    r: &SpectralWeights,
    new_effective: &[usize],
    init_scale: f64,
    rng: &mut R,
) -> Result<SpectralWeights> {
    if new_effective.len() != r.effective.len() {
        return arg_err("expansion must give a mode count for every axis");
    }
    if let Some(d) = (0..new_effective.len()).find(|&d| new_effective[d] < r.effective[d]) {
        return arg_err(format!(
            "cannot shrink axis {d} from {} to {} effective modes",
            r.effective[d], new_effective[d]
        ));
    }
    if new_effective == r.effective.as_slice() {
        return Ok(r.clone());
    }
    let old_shape = r.weights.shape();
    let d = r.spatial_dims();
    let mut shape: Vec<usize> = new_effective.iter().map(|k| k + r.buffer).collect();
    shape.extend([r.channels, r.channels]);
    let mut data = embed_prefix(r.weights.data(), old_shape, &shape);
    let mut idx = vec![0usize; shape.len()];
    for v in data.iter_mut() {
        let is_new = idx[..d].iter().zip(old_shape).any(|(i, n)| i >= n);
        if is_new {
            *v = sample_entry(init_scale, rng);
        }
        for a in (0..shape.len()).rev() {
            idx[a] += 1;
            if idx[a] < shape[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(SpectralWeights {
        weights: ComplexTensor::new(shape, data)?,
        effective: new_effective.to_vec(),
        buffer: r.buffer,
        channels: r.channels,
    })
}

/// Records `ℱ⁻¹(R · T(ℱ v))` on the tape for `v` of shape `grid × C`; returns the real part.
pub fn fourier_conv(tape: &mut Tape, v: Var, r: Var) -> Result<Var> {
    let rank = tape.value(v).shape().len();
    if rank < 2 {
        return arg_err("fourier_conv expects input of shape grid × C");
    }
    let axes: Vec<usize> = (0..rank - 1).collect();
    let spectrum = tape.dft(v, &axes)?;
    let mixed = tape.mode_contract(spectrum, r)?;
    tape.idft_real(mixed, &axes)
}

/// Stand-alone evaluation of the Fourier convolution.
pub fn fourier_conv_forward(v: &RealTensor, r: &SpectralWeights) -> Result<RealTensor> {
    let mut tape = Tape::new();
    let vv = tape.constant(Value::Real(v.clone()));
    let rv = tape.constant(Value::Complex(r.weights.clone()));
    let out = fourier_conv(&mut tape, vv, rv)?;
    Ok(tape.value(out).as_real()?.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{dft_real, idft};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn packing_order() {
        let freqs: Vec<i64> = (0..7).map(mode_frequency).collect();
        assert_eq!(freqs, vec![0, -1, 1, -2, 2, -3, 3]);
    }

    #[test]
    fn n8_m3_keeps_expected_bins() {
        let map = ModeMap::new(&[8], &[3], 1).unwrap();
        let mut bins = map.bins().to_vec();
        bins.sort();
        // ⌈3/2⌉ = 2 non-negative (0, 1) and ⌊3/2⌋ = 1 negative (7).
        assert_eq!(bins, vec![0, 1, 7]);
    }

    #[test]
    fn retained_bins_match_closed_form() {
        for n in 1..20usize {
            for m in 0..=n {
                let map = ModeMap::new(&[n], &[m], 1).unwrap();
                let mut bins = map.bins().to_vec();
                bins.sort();
                let mut expect: Vec<usize> = (0..m.div_ceil(2)).collect();
                expect.extend(n - m / 2..n);
                expect.sort();
                assert_eq!(bins, expect, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn retained_exceeding_extent_is_error() {
        let x = ComplexTensor::zeros(&[4, 2]);
        assert!(truncate_modes(&x, &TruncationSpec::new(vec![5])).is_err());
    }

    #[test]
    fn full_retention_round_trips() {
        let x = ComplexTensor::from_fn(&[6, 5, 2], |i| Complex64::new(i as f64, -(i as f64) * 0.5));
        let spec = TruncationSpec::new(vec![6, 5]);
        let y = truncate_modes(&x, &spec).unwrap();
        assert_eq!(scatter_modes(&y, &spec, &[6, 5]).unwrap(), x);
    }

    #[test]
    fn constant_signal_keeps_only_mode_zero() {
        let x = RealTensor::new(vec![8, 1], vec![3.0; 8]).unwrap();
        let spec = dft_real(&x, &[0]).unwrap();
        for m in 1..=8 {
            let t = truncate_modes(&spec, &TruncationSpec::new(vec![m])).unwrap();
            assert!((t.data()[0].re - 24.0).abs() < 1e-12);
            assert!(t.data()[1..].iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn strength_of_single_entry() {
        let mut w = ComplexTensor::zeros(&[3, 1, 1]);
        w.set(&[1, 0, 0], Complex64::new(1.0, 1.0));
        let r = SpectralWeights::from_parts(w, vec![1], 2).unwrap();
        assert_eq!(frequency_strength(&r).strengths, vec![vec![0.0, 2.0, 0.0]]);
        let zero = SpectralWeights::from_parts(ComplexTensor::zeros(&[3, 2, 2]), vec![1], 2).unwrap();
        assert_eq!(frequency_strength(&zero).strengths, vec![vec![0.0; 3]]);
    }

    #[test]
    fn strength_matches_brute_force_2d() {
        let r = SpectralWeights::random(&[2, 3], 1, 3, 0.7, &mut rng()).unwrap();
        let s = frequency_strength(&r);
        let w = r.weights();
        for k in 0..3 {
            let mut brute = 0.0;
            for k2 in 0..4 {
                for i in 0..3 {
                    for j in 0..3 {
                        brute += w.get(&[k, k2, i, j]).norm_sqr();
                    }
                }
            }
            assert!((s.strengths[0][k] - brute).abs() <= 1e-12 * brute.max(1.0));
        }
        for k2 in 0..4 {
            let mut brute = 0.0;
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        brute += w.get(&[k, k2, i, j]).norm_sqr();
                    }
                }
            }
            assert!((s.strengths[1][k2] - brute).abs() <= 1e-12 * brute.max(1.0));
        }
    }

    #[test]
    fn expand_same_size_is_identity() {
        let r = SpectralWeights::random(&[2], 2, 2, 1.0, &mut rng()).unwrap();
        assert_eq!(expand_weights(&r, &[2], 1.0, &mut rng()).unwrap(), r);
    }

    #[test]
    fn expand_1d_preserves_prefix() {
        let r = SpectralWeights::random(&[2], 2, 2, 1.0, &mut rng()).unwrap();
        let e = expand_weights(&r, &[3], 1.0, &mut rng()).unwrap();
        assert_eq!(e.weights().shape(), &[5, 2, 2]);
        assert_eq!(&e.weights().data()[..16], r.weights().data());
        assert_eq!(e.effective_modes(), &[3]);
    }

    #[test]
    fn expand_2d_grows_only_first_axis() {
        let r = SpectralWeights::random(&[2, 2], 2, 2, 1.0, &mut rng()).unwrap();
        let e = expand_weights(&r, &[3, 2], 0.5, &mut rng()).unwrap();
        assert_eq!(e.weights().shape(), &[5, 4, 2, 2]);
        for a in 0..4 {
            for b in 0..4 {
                for i in 0..2 {
                    for j in 0..2 {
                        assert_eq!(e.weights().get(&[a, b, i, j]), r.weights().get(&[a, b, i, j]));
                    }
                }
            }
        }
        assert!((0..4).any(|b| e.weights().get(&[4, b, 0, 0]) != Complex64::default()));
    }

    #[test]
    fn shrinking_is_rejected() {
        let r = SpectralWeights::random(&[3], 1, 1, 1.0, &mut rng()).unwrap();
        assert!(expand_weights(&r, &[2], 1.0, &mut rng()).is_err());
    }

    fn identity_weights(modes: usize, c: usize) -> SpectralWeights {
        let w = ComplexTensor::from_fn(&[modes, c, c], |f| {
            let (i, o) = ((f / c) % c, f % c);
            if i == o { Complex64::new(1.0, 0.0) } else { Complex64::default() }
        });
        SpectralWeights::from_parts(w, vec![modes], 0).unwrap()
    }

    #[test]
    fn identity_weights_full_modes_is_identity() {
        let v = RealTensor::from_fn(&[12, 3], |i| ((i * 7919) % 13) as f64 - 6.0);
        let out = fourier_conv_forward(&v, &identity_weights(12, 3)).unwrap();
        for (a, b) in out.data().iter().zip(v.data()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_weights_low_pass() {
        let n = 16;
        let v = RealTensor::from_fn(&[n, 2], |i| ((i * 31) % 11) as f64 * 0.3 - 1.0);
        let out = fourier_conv_forward(&v, &identity_weights(5, 2)).unwrap();
        // Oracle: zero every bin outside {0, ±1, ±2} by hand, then invert.
        let mut spec = dft_real(&v, &[0]).unwrap();
        for k in 0..n {
            let freq = if k <= n / 2 { k as i64 } else { k as i64 - n as i64 };
            if freq.abs() > 2 {
                for c in 0..2 {
                    spec.set(&[k, c], Complex64::default());
                }
            }
        }
        let expect = idft(&spec, &[0]).unwrap().real_part();
        for (a, b) in out.data().iter().zip(expect.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_input_uses_mode_zero_only() {
        let (n, c) = (10, 2);
        let r = SpectralWeights::random(&[1], 3, c, 1.0, &mut rng()).unwrap();
        let consts = [1.5, -0.5];
        let v = RealTensor::from_fn(&[n, c], |i| consts[i % c]);
        let out = fourier_conv_forward(&v, &r).unwrap();
        for o in 0..c {
            let expect: f64 = (0..c).map(|i| (r.weights().get(&[0, i, o]) * consts[i]).re).sum();
            for x in 0..n {
                assert!((out.get(&[x, o]) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn channel_mismatch_is_error() {
        let r = SpectralWeights::random(&[2], 1, 3, 1.0, &mut rng()).unwrap();
        let v = RealTensor::zeros(&[8, 2]);
        assert!(fourier_conv_forward(&v, &r).is_err());
    }
}
