use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::DqnError;
use crate::math;

/// Fully connected layer, weights row-major `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dense {
    pub(crate) inputs: usize,
    pub(crate) outputs: usize,
    pub(crate) w: Vec<f64>,
    pub(crate) b: Vec<f64>,
}

impl Dense {
    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.outputs {
            let row = &self.w[o * self.inputs..(o + 1) * self.inputs];
            out.push(self.b[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>());
        }
    }
}

/// Value network: affine + ReLU (+ inverted dropout while training) per
/// hidden layer, affine output.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    pub(crate) layers: Vec<Dense>,
    pub dropout: f64,
}

/// One regression example: push `Q(state, action)` toward `target`.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub state: &'a [f64],
    pub action: usize,
    pub target: f64,
    pub weight: f64,
}

pub fn huber(x: f64, delta: f64) -> f64 {
    let a = math::abs(x);
    if a <= delta {
        0.5 * x * x
    } else {
        delta * (a - 0.5 * delta)
    }
}

pub fn huber_grad(x: f64, delta: f64) -> f64 {
    x.clamp(-delta, delta)
}

struct Trace {
    /// Input to each layer.
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of each hidden layer.
    pre: Vec<Vec<f64>>,
    /// Dropout multipliers of each hidden layer (0 or 1/(1−p)).
    masks: Vec<Vec<f64>>,
    out: Vec<f64>,
}

impl QNetwork {
    /// He-uniform initialisation with zero biases.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], dropout: f64, rng: &mut R) -> Self {
        let layers = sizes
            .windows(2)
            .map(|p| {
                let bound = math::sqrt(6.0 / p[0] as f64);
                Dense {
                    inputs: p[0],
                    outputs: p[1],
                    w: (0..p[0] * p[1]).map(|_| rng.gen_range(-bound..bound)).collect(),
                    b: vec![0.0; p[1]],
                }
            })
            .collect();
        Self { layers, dropout }
    }

    /// Network with every parameter set to zero.
    pub fn zeros(sizes: &[usize]) -> Self {
        let layers = sizes
            .windows(2)
            .map(|p| Dense { inputs: p[0], outputs: p[1], w: vec![0.0; p[0] * p[1]], b: vec![0.0; p[1]] })
            .collect();
        Self { layers, dropout: 0.0 }
    }

    /// Builds a network from explicit `(weights, biases)` per layer.
    pub fn from_layers(layers: &[(Vec<f64>, Vec<f64>)], dropout: f64) -> Result<Self, DqnError> {
        let mut out = Vec::new();
        let mut prev: Option<usize> = None;
        for (w, b) in layers {
            let outputs = b.len();
            if outputs == 0 || w.len() % outputs != 0 {
                return Err(DqnError::DimMismatch { expected: outputs, got: w.len() });
            }
            let inputs = w.len() / outputs;
            if let Some(p) = prev {
                if p != inputs {
                    return Err(DqnError::DimMismatch { expected: p, got: inputs });
                }
            }
            prev = Some(outputs);
            out.push(Dense { inputs, outputs, w: w.clone(), b: b.clone() });
        }
        Ok(Self { layers: out, dropout })
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.layers.iter().map(|l| l.inputs).collect();
        s.extend(self.layers.last().map(|l| l.outputs));
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.inputs)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// All parameters flattened layer by layer, weights before biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            p.extend_from_slice(&l.w);
            p.extend_from_slice(&l.b);
        }
        p
    }

    pub fn set_parameters(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.param_count(), "parameter vector length");
        let mut i = 0;
        for l in &mut self.layers {
            let n = l.w.len();
            l.w.copy_from_slice(&p[i..i + n]);
            i += n;
            let n = l.b.len();
            l.b.copy_from_slice(&p[i..i + n]);
            i += n;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.w.iter().chain(&l.b).all(|v| v.is_finite()))
    }

    /// Inference pass; dropout is inactive.
    pub fn forward(&self, state: &[f64]) -> Result<Vec<f64>, DqnError> {
        if state.len() != self.input_dim() {
            return Err(DqnError::DimMismatch { expected: self.input_dim(), got: state.len() });
        }
        let mut x = state.to_vec();
        let mut y = Vec::new();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            l.apply(&x, &mut y);
            if i != last {
                y.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            core::mem::swap(&mut x, &mut y);
        }
        Ok(x)
    }

    fn trace<R: Rng + ?Sized>(&self, state: &[f64], dropout: Option<&mut R>) -> Trace {
        let last = self.layers.len() - 1;
        let mut t = Trace { inputs: Vec::new(), pre: Vec::new(), masks: Vec::new(), out: Vec::new() };
        let mut x = state.to_vec();
        let mut rng = dropout;
        let keep = 1.0 - self.dropout;
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(l.outputs);
            l.apply(&x, &mut z);
            t.inputs.push(x);
            if i == last {
                t.out = z;
                break;
            }
            let mask: Vec<f64> = match rng.as_deref_mut() {
                Some(r) if self.dropout > 0.0 => {
                    (0..z.len()).map(|_| if r.gen::<f64>() < keep { 1.0 / keep } else { 0.0 }).collect()
                }
                _ => vec![1.0; z.len()],
            };
            x = z.iter().zip(&mask).map(|(v, m)| v.max(0.0) * m).collect();
            t.pre.push(z);
            t.masks.push(mask);
        }
        t
    }

    /// Importance-weighted mean Huber loss over the batch.
    pub fn loss(&self, batch: &[Sample], delta: f64) -> Result<f64, DqnError> {
        let mut total = 0.0;
        for s in batch {
            let q = self.forward(s.state)?;
            total += s.weight * huber(q[s.action] - s.target, delta);
        }
        Ok(total / batch.len().max(1) as f64)
    }

    /// Loss, per-sample TD errors `Q − target` and the gradient with respect
    /// to [`parameters`](Self::parameters). Dropout masks are drawn from `rng`
    /// when given.
    pub fn loss_and_grad<R: Rng + ?Sized>(
        &self,
        batch: &[Sample],
        delta: f64,
        mut rng: Option<&mut R>,
    ) -> Result<(f64, Vec<f64>, Vec<f64>), DqnError> {
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> =
            self.layers.iter().map(|l| (vec![0.0; l.w.len()], vec![0.0; l.b.len()])).collect();
        let mut loss = 0.0;
        let mut td = Vec::with_capacity(batch.len());
        let inv_n = 1.0 / batch.len().max(1) as f64;
        for s in batch {
            if s.state.len() != self.input_dim() {
                return Err(DqnError::DimMismatch { expected: self.input_dim(), got: s.state.len() });
            }
            if s.action >= self.output_dim() {
                return Err(DqnError::DimMismatch { expected: self.output_dim(), got: s.action });
            }
            let t = self.trace(s.state, rng.as_deref_mut());
            let err = t.out[s.action] - s.target;
            td.push(err);
            loss += s.weight * huber(err, delta) * inv_n;
            let mut upstream = vec![0.0; self.output_dim()];
            upstream[s.action] = s.weight * huber_grad(err, delta) * inv_n;
            for li in (0..self.layers.len()).rev() {
                let l = &self.layers[li];
                let x = &t.inputs[li];
                let (gw, gb) = &mut grads[li];
                for o in 0..l.outputs {
                    let u = upstream[o];
                    if u == 0.0 {
                        continue;
                    }
                    gb[o] += u;
                    for (g, v) in gw[o * l.inputs..(o + 1) * l.inputs].iter_mut().zip(x) {
                        *g += u * v;
                    }
                }
                if li == 0 {
                    break;
                }
                let mut down = vec![0.0; l.inputs];
                for o in 0..l.outputs {
                    let u = upstream[o];
                    if u == 0.0 {
                        continue;
                    }
                    for (d, w) in down.iter_mut().zip(&l.w[o * l.inputs..(o + 1) * l.inputs]) {
                        *d += u * w;
                    }
                }
                let (pre, mask) = (&t.pre[li - 1], &t.masks[li - 1]);
                for ((d, z), m) in down.iter_mut().zip(pre).zip(mask) {
                    *d *= if *z > 0.0 { *m } else { 0.0 };
                }
                upstream = down;
            }
        }
        let mut flat = Vec::with_capacity(self.param_count());
        for (gw, gb) in grads {
            flat.extend(gw);
            flat.extend(gb);
        }
        Ok((loss, td, flat))
    }

    /// Plain gradient-descent update.
    pub fn sgd(&mut self, grad: &[f64], lr: f64) {
        let mut i = 0;
        for l in &mut self.layers {
            for p in l.w.iter_mut().chain(l.b.iter_mut()) {
                *p -= lr * grad[i];
                i += 1;
            }
        }
    }
}
