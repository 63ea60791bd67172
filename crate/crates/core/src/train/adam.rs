//! Adam with decoupled weight decay and a step learning-rate schedule.

use std::collections::BTreeMap;

use crate::autodiff::{Gradients, ParamId, Value};
use crate::error::{arg_err, Result};
use crate::model::{FnoModel, ParamMut};
use crate::spectral::embed_prefix;
use crate::tensor::ComplexTensor;

/// First and second moments of one parameter, shaped like the parameter,
/// plus how many updates each entry has received.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub first: Value,
    pub second: Value,
    /// Per-entry update counts used for bias correction. Entries added by an
    /// expansion start at zero like their moments, so their first update is
    /// corrected as a first update and not scaled up by a stale global count.
    pub updates: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    moments: BTreeMap<String, Moments>,
}

impl Default for AdamState {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8, step: 0, moments: BTreeMap::new() }
    }
}

impl AdamState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn moments(&self, name: &str) -> Option<&Moments> {
        self.moments.get(name)
    }

    /// Reshapes the moments of a complex parameter after its mode axes grew.
    /// Old entries keep their indices; new entries start at zero.
    pub fn grow(&mut self, name: &str, new_shape: &[usize]) -> Result<()> {
        let Some(m) = self.moments.get_mut(name) else {
            return Ok(());
        };
        m.updates = embed_prefix(&m.updates, m.first.shape(), new_shape);
        for value in [&mut m.first, &mut m.second] {
            let Value::Complex(t) = value else {
                return arg_err(format!("{name} is not a complex parameter"));
            };
            let data = embed_prefix(t.data(), t.shape(), new_shape);
            *t = ComplexTensor::new(new_shape.to_vec(), data)?;
        }
        Ok(())
    }
}

/// Bias-corrected Adam update of every parameter of `model`. Decoupled weight
/// decay `p ← p·(1 − lr·wd)` is applied to the pre-step value.
/// Complex entries are updated as independent (re, im) pairs that share one
/// update count.
pub fn adam_step(model: &mut FnoModel, grads: &Gradients, state: &mut AdamState, lr: f64, weight_decay: f64) -> Result<()> {
    state.step += 1;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.eps);
    let decay = 1.0 - lr * weight_decay;
    let corrections = |count: &mut u64| {
        *count += 1;
        let t = (*count).min(i32::MAX as u64) as i32;
        (1.0 - b1.powi(t), 1.0 - b2.powi(t))
    };
    let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64, (bc1, bc2): (f64, f64)| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        if weight_decay != 0.0 {
            *p *= decay;
        }
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    };
    for (i, (name, param)) in model.params_mut().into_iter().enumerate() {
        let Some(g) = grads.get(ParamId(i)) else {
            return arg_err(format!("missing gradient for {name}"));
        };
        let entry = state.moments.entry(name.clone()).or_insert_with(|| Moments {
            first: g.zeros_like(),
            second: g.zeros_like(),
            updates: vec![0; g.shape().iter().product()],
        });
        let counts = &mut entry.updates;
        match (param, g, &mut entry.first, &mut entry.second) {
            (ParamMut::Real(p), Value::Real(g), Value::Real(m), Value::Real(v)) => {
                check_shapes(&name, p.shape(), g.shape(), m.shape())?;
                let entries = p.data_mut().iter_mut().zip(g.data()).zip(m.data_mut()).zip(v.data_mut());
                for ((((p, g), m), v), n) in entries.zip(counts.iter_mut()) {
                    update(p, *g, m, v, corrections(n));
                }
            }
            (ParamMut::Complex(p), Value::Complex(g), Value::Complex(m), Value::Complex(v)) => {
                check_shapes(&name, p.shape(), g.shape(), m.shape())?;
                let entries = p.data_mut().iter_mut().zip(g.data()).zip(m.data_mut()).zip(v.data_mut());
                for ((((p, g), m), v), n) in entries.zip(counts.iter_mut()) {
                    let c = corrections(n);
                    update(&mut p.re, g.re, &mut m.re, &mut v.re, c);
                    update(&mut p.im, g.im, &mut m.im, &mut v.im, c);
                }
            }
            _ => return arg_err(format!("gradient kind mismatch for {name}")),
        }
    }
    Ok(())
}

fn check_shapes(name: &str, p: &[usize], g: &[usize], m: &[usize]) -> Result<()> {
    if p != g || p != m {
        return arg_err(format!("shape mismatch for {name}: param {p:?}, grad {g:?}, moments {m:?}"));
    }
    Ok(())
}

/// `lr0 · 0.5^⌊epoch / period⌋`.
pub fn lr_at(epoch: usize, lr0: f64, halving_period: usize) -> f64 {
    if halving_period == 0 {
        return lr0;
    }
    lr0 * 0.5f64.powi((epoch / halving_period) as i32)
}
