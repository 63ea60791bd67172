#![allow(dead_code)]

use ifno::autodiff::{ParamId, Tape, Value, Var};
use ifno::tensor::{ComplexTensor, RealTensor};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn real<R: Rng>(shape: &[usize], rng: &mut R) -> RealTensor {
    RealTensor::from_fn(shape, |_| rng.sample(StandardNormal))
}

pub fn complex<R: Rng>(shape: &[usize], rng: &mut R) -> ComplexTensor {
    ComplexTensor::from_fn(shape, |_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// A random value of the same kind and shape.
pub fn like<R: Rng>(v: &Value, rng: &mut R) -> Value {
    match v {
        Value::Real(t) => Value::Real(real(t.shape(), rng)),
        Value::Complex(t) => Value::Complex(complex(t.shape(), rng)),
    }
}

fn axpy(x: &Value, t: f64, d: &Value) -> Value {
    match (x, d) {
        (Value::Real(a), Value::Real(b)) => Value::Real(
            RealTensor::new(a.shape().to_vec(), a.data().iter().zip(b.data()).map(|(p, q)| p + t * q).collect())
                .unwrap(),
        ),
        (Value::Complex(a), Value::Complex(b)) => Value::Complex(
            ComplexTensor::new(a.shape().to_vec(), a.data().iter().zip(b.data()).map(|(p, q)| p + q * t).collect())
                .unwrap(),
        ),
        _ => panic!("kind mismatch"),
    }
}

fn eval(inputs: &[Value], build: &dyn Fn(&mut Tape, &[Var]) -> Var) -> (Tape, Var) {
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().enumerate().map(|(i, v)| tape.param(ParamId(i), v.clone()).unwrap()).collect();
    let out = build(&mut tape, &vars);
    (tape, out)
}

/// Dot-product test of the recorded adjoint: compares `⟨dx, Jᵀy⟩` from the
/// tape with `d/dt ⟨f(x + t·dx), y⟩` from a five-point stencil. The mismatch
/// is divided by `‖dx‖·‖Jᵀy‖`, which bounds both sides; the inner product
/// itself can land arbitrarily close to zero for random directions.
pub fn adjoint_mismatch<R: Rng>(inputs: &[Value], build: &dyn Fn(&mut Tape, &[Var]) -> Var, rng: &mut R) -> f64 {
    let (tape, out) = eval(inputs, build);
    let y = like(tape.value(out), rng);
    let dirs: Vec<Value> = inputs.iter().map(|v| like(v, rng)).collect();
    let grads = tape.vjp(out, y.clone()).unwrap();
    let g: Vec<&Value> = (0..inputs.len()).map(|i| grads.get(ParamId(i)).unwrap()).collect();
    let lhs: f64 = dirs.iter().zip(&g).map(|(d, g)| d.dot(g)).sum();
    let scale = (dirs.iter().map(|d| d.dot(d)).sum::<f64>() * g.iter().map(|g| g.dot(g)).sum::<f64>()).sqrt();
    let phi = |t: f64| {
        let moved: Vec<Value> = inputs.iter().zip(&dirs).map(|(x, d)| axpy(x, t, d)).collect();
        let (tape, out) = eval(&moved, build);
        tape.value(out).dot(&y)
    };
    let h = 1e-3;
    let rhs = (-phi(2.0 * h) + 8.0 * phi(h) - 8.0 * phi(-h) + phi(-2.0 * h)) / (12.0 * h);
    (lhs - rhs).abs() / scale.max(1e-300)
}

/// Smallest `K ∈ [k_prev, p]` whose cumulative ratio reaches `alpha`, else `p`.
pub fn brute_force_min_modes(s: &[f64], alpha: f64, k_prev: usize) -> usize {
    let total: f64 = s.iter().sum();
    (k_prev..=s.len()).find(|&k| s[..k].iter().sum::<f64>() / total >= alpha).unwrap_or(s.len())
}

/// Keeps every ReLU input at least `margin` away from the kink.
pub fn away_from_zero(t: &RealTensor, margin: f64) -> RealTensor {
    RealTensor::new(
        t.shape().to_vec(),
        t.data().iter().map(|&x| if x >= 0.0 { x + margin } else { x - margin }).collect(),
    )
    .unwrap()
}
