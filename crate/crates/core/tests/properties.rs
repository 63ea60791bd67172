mod common;

use common::*;
use ifno::autodiff::{Tape, Value, Var};
use ifno::data::{Dataset, Problem, Sample};
use ifno::model::{FnoConfig, FnoModel, Normalization};
use ifno::scheduler::find_min_modes;
use ifno::spectral::{expand_weights, fourier_conv_forward, scatter_modes, truncate_modes, SpectralWeights, TruncationSpec};
use ifno::tensor::{dft, dft_real, idft, RealTensor};
use ifno::train::{AdamState, adam_step};
use ifno::autodiff::Gradients;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn grid_1d() -> impl Strategy<Value = Vec<usize>> {
    (2usize..40).prop_map(|n| vec![n])
}

fn grid_2d() -> impl Strategy<Value = Vec<usize>> {
    (2usize..12, 2usize..12).prop_map(|(a, b)| vec![a, b])
}

fn grid() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![grid_1d(), grid_2d()]
}

fn channel_variances(x: &RealTensor) -> Vec<f64> {
    let c = *x.shape().last().unwrap();
    let n = (x.len() / c) as f64;
    (0..c)
        .map(|ch| {
            let vals: Vec<f64> = x.data().iter().skip(ch).step_by(c).copied().collect();
            let mean = vals.iter().sum::<f64>() / n;
            vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
        })
        .collect()
}

fn axes(g: &[usize]) -> Vec<usize> {
    (0..g.len()).collect()
}

fn with_channels(g: &[usize], c: usize) -> Vec<usize> {
    let mut s = g.to_vec();
    s.push(c);
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dft_round_trip(g in grid(), seed in any::<u64>()) {
        let x = complex(&g, &mut rng(seed));
        let back = idft(&dft(&x, &axes(&g)).unwrap(), &axes(&g)).unwrap();
        let err: f64 = x.data().iter().zip(back.data()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let norm: f64 = x.data().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err < 1e-12 * norm, "{err}");
    }

    #[test]
    fn parseval(g in grid(), seed in any::<u64>()) {
        let x = real(&g, &mut rng(seed));
        let spec = dft_real(&x, &axes(&g)).unwrap();
        let n: usize = g.iter().product();
        let freq: f64 = spec.data().iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        let space = x.dot(&x);
        prop_assert!((freq - space).abs() < 1e-10 * space);
    }

    #[test]
    fn dft_is_linear(g in grid(), seed in any::<u64>(), a in -3.0f64..3.0) {
        let mut r = rng(seed);
        let (x, y) = (complex(&g, &mut r), complex(&g, &mut r));
        let ax = axes(&g);
        let combo = ifno::tensor::ComplexTensor::new(
            g.clone(),
            x.data().iter().zip(y.data()).map(|(p, q)| p * a + q).collect(),
        ).unwrap();
        let (fx, fy, fc) = (dft(&x, &ax).unwrap(), dft(&y, &ax).unwrap(), dft(&combo, &ax).unwrap());
        for ((p, q), c) in fx.data().iter().zip(fy.data()).zip(fc.data()) {
            prop_assert!((p * a + q - c).norm() < 1e-9);
        }
    }

    #[test]
    fn adjoint_dft_and_idft(g in grid(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let ax = axes(&g);
        let real_in = [Value::Real(real(&g, &mut r))];
        let complex_in = [Value::Complex(complex(&g, &mut r))];
        let a2 = ax.clone();
        prop_assert!(adjoint_mismatch(&real_in, &move |t: &mut Tape, v: &[Var]| t.dft(v[0], &a2).unwrap(), &mut r) < 1e-10);
        let a2 = ax.clone();
        prop_assert!(adjoint_mismatch(&complex_in, &move |t: &mut Tape, v: &[Var]| t.dft(v[0], &a2).unwrap(), &mut r) < 1e-10);
        let a2 = ax.clone();
        prop_assert!(adjoint_mismatch(&complex_in, &move |t: &mut Tape, v: &[Var]| t.idft(v[0], &a2).unwrap(), &mut r) < 1e-10);
        let a2 = ax.clone();
        prop_assert!(adjoint_mismatch(&complex_in, &move |t: &mut Tape, v: &[Var]| t.idft_real(v[0], &a2).unwrap(), &mut r) < 1e-10);
    }

    #[test]
    fn adjoint_mode_contract(g in grid(), c in 1usize..4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let modes: Vec<usize> = g.iter().map(|&n| 1 + (seed as usize % n)).collect();
        let mut ws = modes.clone();
        ws.extend([c, c]);
        let inputs = [Value::Complex(complex(&with_channels(&g, c), &mut r)), Value::Complex(complex(&ws, &mut r))];
        let f = |t: &mut Tape, v: &[Var]| t.mode_contract(v[0], v[1]).unwrap();
        prop_assert!(adjoint_mismatch(&inputs, &f, &mut r) < 1e-10);
    }

    #[test]
    fn adjoint_pointwise_add_scale(g in grid(), cin in 1usize..5, cout in 1usize..5, s in -2.0f64..2.0, seed in any::<u64>()) {
        let mut r = rng(seed);
        let inputs = [
            Value::Real(real(&with_channels(&g, cin), &mut r)),
            Value::Real(real(&[cin, cout], &mut r)),
            Value::Real(real(&[cout], &mut r)),
        ];
        let f = |t: &mut Tape, v: &[Var]| t.pointwise_linear(v[0], v[1], v[2]).unwrap();
        prop_assert!(adjoint_mismatch(&inputs, &f, &mut r) < 1e-10);
        let pair = [Value::Complex(complex(&g, &mut r)), Value::Complex(complex(&g, &mut r))];
        let f = |t: &mut Tape, v: &[Var]| t.add(v[0], v[1]).unwrap();
        prop_assert!(adjoint_mismatch(&pair, &f, &mut r) < 1e-10);
        let f = move |t: &mut Tape, v: &[Var]| t.scalar_mul(v[0], s).unwrap();
        prop_assert!(adjoint_mismatch(&pair[..1], &f, &mut r) < 1e-10);
    }

    #[test]
    fn adjoint_relu(g in grid(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let inputs = [Value::Real(away_from_zero(&real(&g, &mut r), 0.1))];
        let f = |t: &mut Tape, v: &[Var]| t.relu(v[0]).unwrap();
        prop_assert!(adjoint_mismatch(&inputs, &f, &mut r) < 1e-10);
    }

    #[test]
    fn adjoint_instance_norm(g in grid(), c in 1usize..4, seed in any::<u64>()) {
        prop_assume!(g.iter().product::<usize>() >= 4);
        let mut r = rng(seed);
        let x = real(&with_channels(&g, c), &mut r);
        // The stencil needs the step to be small next to each channel's spread.
        prop_assume!(channel_variances(&x).iter().all(|&v| v > 0.25));
        let inputs = [Value::Real(x), Value::Real(real(&[c], &mut r)), Value::Real(real(&[c], &mut r))];
        let f = |t: &mut Tape, v: &[Var]| t.instance_norm(v[0], v[1], v[2]).unwrap();
        prop_assert!(adjoint_mismatch(&inputs, &f, &mut r) < 1e-10);
    }

    #[test]
    fn adjoint_relative_l2(g in grid(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (p, t) = (real(&g, &mut r), real(&g, &mut r));
        // Both norms in the ratio must stay clear of zero for the stencil.
        let diff: f64 = p.data().iter().zip(t.data()).map(|(a, b)| (a - b).powi(2)).sum();
        prop_assume!(t.dot(&t) > 0.5 && diff > 0.5);
        let inputs = [Value::Real(p), Value::Real(t)];
        let f = |t: &mut Tape, v: &[Var]| t.relative_l2(v[0], v[1]).unwrap();
        prop_assert!(adjoint_mismatch(&inputs, &f, &mut r) < 1e-10);
    }

    #[test]
    fn truncation_is_adjoint_of_scatter(g in grid(), c in 1usize..3, seed in any::<u64>()) {
        let mut r = rng(seed);
        let retained: Vec<usize> = g.iter().map(|&n| 1 + (seed as usize % n)).collect();
        let spec = TruncationSpec::new(retained.clone());
        let x = complex(&with_channels(&g, c), &mut r);
        let y = complex(&with_channels(&retained, c), &mut r);
        let lhs = truncate_modes(&x, &spec).unwrap().dot(&y);
        let rhs = x.dot(&scatter_modes(&y, &spec, &g).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn min_modes_matches_brute_force(
        s in prop::collection::vec(0.0f64..10.0, 2..64),
        alpha in prop::sample::select(vec![0.5, 0.9, 0.99, 1.0]),
        k in 1usize..64,
    ) {
        prop_assume!(s.iter().sum::<f64>() > 0.0);
        let k_prev = 1 + (k - 1) % s.len();
        prop_assert_eq!(find_min_modes(&s, alpha, k_prev), brute_force_min_modes(&s, alpha, k_prev));
        prop_assert!(find_min_modes(&s, alpha, k_prev) >= k_prev);
    }

    #[test]
    fn min_modes_scale_invariant(
        s in prop::collection::vec(0.01f64..10.0, 2..64),
        alpha in 0.01f64..1.0,
        exp in -8i32..8,
    ) {
        let c = 2f64.powi(exp);
        let scaled: Vec<f64> = s.iter().map(|x| x * c).collect();
        prop_assert_eq!(find_min_modes(&scaled, alpha, 1), find_min_modes(&s, alpha, 1));
    }

    #[test]
    fn expansion_keeps_prefix(
        k in prop::collection::vec(1usize..5, 1..=2),
        grow in prop::collection::vec(0usize..4, 2),
        b in 0usize..3,
        c in 1usize..4,
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let w = SpectralWeights::random(&k, b, c, 0.3, &mut r).unwrap();
        let target: Vec<usize> = k.iter().zip(&grow).map(|(a, g)| a + g).collect();
        let grown = expand_weights(&w, &target, 0.3, &mut r).unwrap();
        prop_assert_eq!(grown.effective_modes(), target.as_slice());
        let old = w.weights();
        let new = grown.weights();
        let d = k.len();
        for (flat, z) in old.data().iter().enumerate() {
            let mut idx = vec![0; old.rank()];
            let mut rest = flat;
            for a in (0..old.rank()).rev() {
                idx[a] = rest % old.shape()[a];
                rest /= old.shape()[a];
            }
            prop_assert_eq!(new.get(&idx).re.to_bits(), z.re.to_bits());
            prop_assert_eq!(new.get(&idx).im.to_bits(), z.im.to_bits());
        }
        // Zero-scale growth leaves the layer's output untouched.
        let zero = expand_weights(&w, &target, 0.0, &mut r).unwrap();
        let n: Vec<usize> = target.iter().map(|t| 2 * (t + b) + 1).collect();
        let v = real(&with_channels(&n[..d], c), &mut r);
        let before = fourier_conv_forward(&v, &w).unwrap();
        let after = fourier_conv_forward(&v, &zero).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn adam_moments_follow_growth(k in 1usize..4, grow in 1usize..4, seed in any::<u64>()) {
        let cfg = FnoConfig { layers: 1, channels: 2, modes: vec![k], buffer: 1, normalization: Normalization::None, ..FnoConfig::new(1) };
        let mut model = FnoModel::init(cfg, 1, 1, seed).unwrap();
        let mut r = rng(seed);
        let v = real(&[16, 1], &mut r);
        let target = real(&[16, 1], &mut r);
        let (_, grads): (f64, Gradients) = model.loss_and_grads(&v, &target).unwrap();
        let mut state = AdamState::new();
        adam_step(&mut model, &grads, &mut state, 1e-3, 0.0).unwrap();
        let before = state.moments("blocks.0.spectral").unwrap().clone();
        let grown = expand_weights(&model.blocks[0].spectral, &[k + grow], 0.1, &mut r).unwrap();
        let shape = grown.weights().shape().to_vec();
        model.set_spectral(0, grown).unwrap();
        state.grow("blocks.0.spectral", &shape).unwrap();
        let after = state.moments("blocks.0.spectral").unwrap();
        for (old, new) in [(&before.first, &after.first), (&before.second, &after.second)] {
            let (old, new) = (old.as_complex().unwrap(), new.as_complex().unwrap());
            let per_mode = old.len() / old.shape()[0];
            prop_assert_eq!(&new.data()[..old.len()], old.data());
            prop_assert!(new.data()[old.len()..].iter().all(|z| *z == Complex64::new(0.0, 0.0)));
            prop_assert_eq!(new.len(), shape[0] * per_mode);
        }
    }

    #[test]
    fn dataset_round_trip(count in 0usize..4, n in 2usize..20, two_d in any::<bool>(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (problem, g) = if two_d { (Problem::Darcy, vec![n, n]) } else { (Problem::Burgers, vec![n]) };
        let samples = (0..count)
            .map(|_| Sample::new(real(&with_channels(&g, 1), &mut r), real(&with_channels(&g, 1), &mut r)).unwrap())
            .collect();
        let ds = Dataset::new(problem, samples, format!("seed = {seed}\n")).unwrap();
        let bytes = ds.to_bytes();
        prop_assert_eq!(bytes.len(), ifno::data::encoded_len(count, &g, 1, ds.config.len()));
        let back = Dataset::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes(), bytes);
        prop_assert_eq!(back.samples.len(), count);
    }

    #[test]
    fn forward_is_deterministic(seed in any::<u64>(), n in 12usize..40) {
        let cfg = FnoConfig { layers: 2, channels: 4, modes: vec![3], buffer: 2, ..FnoConfig::new(1) };
        let m = FnoModel::init(cfg, 1, 1, seed).unwrap();
        let v = real(&[n, 1], &mut rng(seed));
        let a: Vec<u64> = m.forward(&v).unwrap().data().iter().map(|x| x.to_bits()).collect();
        let b: Vec<u64> = m.forward(&v).unwrap().data().iter().map(|x| x.to_bits()).collect();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn relative_l2_is_scale_free_in_the_target() {
    let mut r = rng(3);
    let p = real(&[32, 1], &mut r);
    let t = real(&[32, 1], &mut r);
    let base = ifno::train::relative_l2(&p, &t).unwrap();
    let scaled = |x: &RealTensor, s: f64| RealTensor::new(x.shape().to_vec(), x.data().iter().map(|v| v * s).collect()).unwrap();
    let again = ifno::train::relative_l2(&scaled(&p, 7.0), &scaled(&t, 7.0)).unwrap();
    assert!((base - again).abs() < 1e-14);
}
