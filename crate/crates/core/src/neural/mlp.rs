use rand::Rng as _;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rng::Rng;

pub const HIDDEN_DIM: usize = 32;
pub const LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NeuralError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

fn check(expected: usize, actual: usize) -> Result<(), NeuralError> {
    if expected == actual {
        Ok(())
    } else {
        Err(NeuralError::DimensionMismatch { expected, actual })
    }
}

#[inline]
fn leaky(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        LEAKY_SLOPE * x
    }
}

#[inline]
fn leaky_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        LEAKY_SLOPE
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMlp {
    input_dim: usize,
    hidden_dim: usize,
    output_dim: usize,
    params: Vec<f64>,
}

/// Two linear layers with a Leaky ReLU in between:
/// `y = W2 · leaky(W1 · x + b1) + b2`.
///
/// All parameters live in one flat vector laid out as `W1 | b1 | W2 | b2`,
/// weights row-major (one row per output unit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMlp", into = "RawMlp")]
pub struct Mlp {
    input_dim: usize,
    hidden_dim: usize,
    output_dim: usize,
    params: Vec<f64>,
}

impl TryFrom<RawMlp> for Mlp {
    type Error = String;

    fn try_from(raw: RawMlp) -> Result<Self, Self::Error> {
        let want = Mlp::param_count(raw.input_dim, raw.hidden_dim, raw.output_dim);
        if raw.params.len() != want {
            return Err(format!(
                "network {}x{}x{} needs {want} parameters, found {}",
                raw.input_dim,
                raw.hidden_dim,
                raw.output_dim,
                raw.params.len()
            ));
        }
        if raw.params.iter().any(|p| !p.is_finite()) {
            return Err("network parameters must be finite".into());
        }
        Ok(Mlp { input_dim: raw.input_dim, hidden_dim: raw.hidden_dim, output_dim: raw.output_dim, params: raw.params })
    }
}

impl From<Mlp> for RawMlp {
    fn from(m: Mlp) -> Self {
        RawMlp { input_dim: m.input_dim, hidden_dim: m.hidden_dim, output_dim: m.output_dim, params: m.params }
    }
}

/// Intermediate values of one forward pass, kept for `backward`.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pre: Vec<f64>,
    hidden: Vec<f64>,
    pub output: Vec<f64>,
}

impl Mlp {
    pub fn param_count(input_dim: usize, hidden_dim: usize, output_dim: usize) -> usize {
        hidden_dim * input_dim + hidden_dim + output_dim * hidden_dim + output_dim
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize, output_dim: usize) -> Self {
        Mlp { input_dim, hidden_dim, output_dim, params: vec![0.0; Self::param_count(input_dim, hidden_dim, output_dim)] }
    }

    /// Fan-in uniform initialization, `U(-1/sqrt(fan_in), 1/sqrt(fan_in))` per layer.
    pub fn new(input_dim: usize, hidden_dim: usize, output_dim: usize, rng: &mut Rng) -> Self {
        let mut net = Self::zeros(input_dim, hidden_dim, output_dim);
        let b1 = 1.0 / (input_dim as f64).sqrt();
        let b2 = 1.0 / (hidden_dim as f64).sqrt();
        let split = hidden_dim * input_dim + hidden_dim;
        for (k, p) in net.params.iter_mut().enumerate() {
            let bound = if k < split { b1 } else { b2 };
            *p = rng.gen_range(-bound..=bound);
        }
        net
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn same_shape(&self, other: &Mlp) -> bool {
        (self.input_dim, self.hidden_dim, self.output_dim) == (other.input_dim, other.hidden_dim, other.output_dim)
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let w1 = self.hidden_dim * self.input_dim;
        let b1 = w1 + self.hidden_dim;
        let w2 = b1 + self.output_dim * self.hidden_dim;
        (w1, b1, w2)
    }

    pub fn w1(&self) -> &[f64] {
        &self.params[..self.offsets().0]
    }

    pub fn b1(&self) -> &[f64] {
        let (w1, b1, _) = self.offsets();
        &self.params[w1..b1]
    }

    pub fn w2(&self) -> &[f64] {
        let (_, b1, w2) = self.offsets();
        &self.params[b1..w2]
    }

    pub fn b2(&self) -> &[f64] {
        &self.params[self.offsets().2..]
    }

    /// Mutable views of `(W1, b1, W2, b2)`.
    pub fn layers_mut(&mut self) -> (&mut [f64], &mut [f64], &mut [f64], &mut [f64]) {
        let (w1, b1, w2) = self.offsets();
        let (a, rest) = self.params.split_at_mut(w1);
        let (b, rest) = rest.split_at_mut(b1 - w1);
        let (c, d) = rest.split_at_mut(w2 - b1);
        (a, b, c, d)
    }

    pub fn forward_pass(&self, x: &[f64]) -> Result<ForwardPass, NeuralError> {
        check(self.input_dim, x.len())?;
        let (w1, b1, w2, b2) = (self.w1(), self.b1(), self.w2(), self.b2());
        let mut pre = b1.to_vec();
        for (h, p) in pre.iter_mut().enumerate() {
            let row = &w1[h * self.input_dim..(h + 1) * self.input_dim];
            *p += row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
        }
        let hidden: Vec<f64> = pre.iter().map(|&p| leaky(p)).collect();
        let mut output = b2.to_vec();
        for (o, y) in output.iter_mut().enumerate() {
            let row = &w2[o * self.hidden_dim..(o + 1) * self.hidden_dim];
            *y += row.iter().zip(&hidden).map(|(w, hv)| w * hv).sum::<f64>();
        }
        Ok(ForwardPass { pre, hidden, output })
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NeuralError> {
        Ok(self.forward_pass(x)?.output)
    }

    /// Accumulates `d(upstream · y)/d(params)` into `grads` (same layout as `params`).
    pub fn backward(
        &self,
        x: &[f64],
        pass: &ForwardPass,
        upstream: &[f64],
        grads: &mut [f64],
    ) -> Result<(), NeuralError> {
        check(self.input_dim, x.len())?;
        check(self.output_dim, upstream.len())?;
        check(self.params.len(), grads.len())?;
        let (o_w1, o_b1, o_w2) = self.offsets();
        let w2 = self.w2();
        let (g_w1, rest) = grads.split_at_mut(o_w1);
        let (g_b1, rest) = rest.split_at_mut(o_b1 - o_w1);
        let (g_w2, g_b2) = rest.split_at_mut(o_w2 - o_b1);

        let mut d_hidden = vec![0.0; self.hidden_dim];
        for (o, &g) in upstream.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            g_b2[o] += g;
            let row = o * self.hidden_dim;
            for h in 0..self.hidden_dim {
                g_w2[row + h] += g * pass.hidden[h];
                d_hidden[h] += g * w2[row + h];
            }
        }
        for h in 0..self.hidden_dim {
            let d_pre = d_hidden[h] * leaky_grad(pass.pre[h]);
            if d_pre == 0.0 {
                continue;
            }
            g_b1[h] += d_pre;
            let row = &mut g_w1[h * self.input_dim..(h + 1) * self.input_dim];
            for (g, xi) in row.iter_mut().zip(x) {
                *g += d_pre * xi;
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    /// SHA-256 over dims and the raw little-endian parameter bits.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for d in [self.input_dim, self.hidden_dim, self.output_dim] {
            h.update((d as u64).to_le_bytes());
        }
        for p in &self.params {
            h.update(p.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// `target <- tau * source + (1 - tau) * target`, elementwise.
pub fn soft_update(target: &mut Mlp, source: &Mlp, tau: f64) {
    assert!(target.same_shape(source), "soft update between differently shaped networks");
    for (t, s) in target.params.iter_mut().zip(&source.params) {
        *t = tau * s + (1.0 - tau) * *t;
    }
}
