//! Fully connected tanh network `N(x; θ)` with exact x-derivatives up to
//! second order and parameter gradients of `w0 N + w1 N' + w2 N''`.

use rand_distr::{Distribution, Normal};
use serde::Serialize;
use thiserror::Error;

use crate::jet::Jet2;
use crate::sample::{rng, stream};

/// Default number of hidden layers.
pub const DEFAULT_DEPTH: usize = 2;
/// Default hidden width.
pub const DEFAULT_WIDTH: usize = 32;

const MAGIC: &[u8; 8] = b"PINNCKP1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("layer sizes must start and end with 1 and have at least two entries, got {0:?}")]
    Sizes(Vec<usize>),
    #[error("expected {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Network {
    sizes: Vec<usize>,
    seed: u64,
    params: Vec<f64>,
}

/// Per-layer parameter offsets: weights are `fan_out × fan_in` row-major,
/// followed by `fan_out` biases.
fn layer_offsets(sizes: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut at = 0;
    offsets.push(0);
    for w in sizes.windows(2) {
        at += (w[0] + 1) * w[1];
        offsets.push(at);
    }
    offsets
}

fn check_sizes(sizes: &[usize]) -> Result<(), NetError> {
    if sizes.len() < 2 || sizes[0] != 1 || *sizes.last().unwrap() != 1 || sizes.contains(&0) {
        return Err(NetError::Sizes(sizes.to_vec()));
    }
    Ok(())
}

fn hidden_sizes(depth: usize, width: usize) -> Vec<usize> {
    let mut sizes = vec![1];
    sizes.extend(std::iter::repeat_n(width, depth));
    sizes.push(1);
    sizes
}

impl Network {
    /// `depth` tanh layers of `width` units; weights and biases drawn from
    /// `N(0, 1/fan_in)`.
    pub fn init(seed: u64, depth: usize, width: usize) -> Result<Self, NetError> {
        let sizes = hidden_sizes(depth, width);
        check_sizes(&sizes)?;
        let mut r = rng(seed, stream::NET_INIT);
        let mut params = Vec::with_capacity(param_count(&sizes));
        for w in sizes.windows(2) {
            let normal = Normal::new(0.0, 1.0 / (w[0] as f64).sqrt()).expect("positive std");
            for _ in 0..(w[0] + 1) * w[1] {
                params.push(normal.sample(&mut r));
            }
        }
        Ok(Self { sizes, seed, params })
    }

    pub fn zeros(depth: usize, width: usize) -> Result<Self, NetError> {
        let sizes = hidden_sizes(depth, width);
        check_sizes(&sizes)?;
        let params = vec![0.0; param_count(&sizes)];
        Ok(Self { sizes, seed: 0, params })
    }

    /// Arbitrary layer sizes `[1, .., 1]`; `[1, 1]` is a purely linear map.
    pub fn from_parts(sizes: Vec<usize>, params: Vec<f64>, seed: u64) -> Result<Self, NetError> {
        check_sizes(&sizes)?;
        let expected = param_count(&sizes);
        if params.len() != expected {
            return Err(NetError::ParamCount { expected, got: params.len() });
        }
        Ok(Self { sizes, seed, params })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<(), NetError> {
        if params.len() != self.params.len() {
            return Err(NetError::ParamCount { expected: self.params.len(), got: params.len() });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    fn layers(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let offsets = layer_offsets(&self.sizes);
        self.sizes
            .windows(2)
            .zip(offsets)
            .map(|(w, off)| (w[0], w[1], off))
    }

    pub fn forward(&self, x: f64) -> f64 {
        let mut a = vec![x];
        let last = self.sizes.len() - 2;
        for (l, (fan_in, fan_out, off)) in self.layers().enumerate() {
            let (w, b) = self.params[off..off + (fan_in + 1) * fan_out].split_at(fan_in * fan_out);
            let mut z = Vec::with_capacity(fan_out);
            for j in 0..fan_out {
                let mut s = b[j];
                for i in 0..fan_in {
                    s += w[j * fan_in + i] * a[i];
                }
                z.push(if l == last { s } else { s.tanh() });
            }
            a = z;
        }
        a[0]
    }

    pub fn forward_jet(&self, x: f64) -> Jet2 {
        let mut ws = Workspace::new(self);
        self.forward_jet_ws(x, &mut ws)
    }

    /// Forward pass that keeps every layer's jets in `ws` for a following
    /// reverse pass.
    pub fn forward_jet_ws(&self, x: f64, ws: &mut Workspace) -> Jet2 {
        ws.acts[0][0] = Jet2::variable(x);
        let last = self.sizes.len() - 2;
        for (l, (fan_in, fan_out, off)) in self.layers().enumerate() {
            let (w, b) = self.params[off..off + (fan_in + 1) * fan_out].split_at(fan_in * fan_out);
            let (prev, rest) = ws.acts.split_at_mut(l + 1);
            let a = &prev[l];
            for j in 0..fan_out {
                let (mut v, mut d1, mut d2) = (b[j], 0.0, 0.0);
                for i in 0..fan_in {
                    let wji = w[j * fan_in + i];
                    v += wji * a[i].value;
                    d1 += wji * a[i].first;
                    d2 += wji * a[i].second;
                }
                let z = Jet2::new(v, d1, d2);
                ws.pre[l][j] = z;
                rest[0][j] = if l == last { z } else { z.tanh() };
            }
        }
        ws.acts[last + 1][0]
    }

    /// Adds `scale * ∇_θ (w0 N + w1 N' + w2 N'')(x)` to `grad` and returns
    /// the jet of `N` at `x`.
    pub fn accumulate_grad(
        &self,
        x: f64,
        weights: [f64; 3],
        scale: f64,
        ws: &mut Workspace,
        grad: &mut [f64],
    ) -> Jet2 {
        let out = self.forward_jet_ws(x, ws);
        self.backward(weights.map(|w| w * scale), ws, grad);
        out
    }

    /// Reverse pass for the point of the last [`Network::forward_jet_ws`]
    /// call on `ws`: adds `∇_θ (w0 N + w1 N' + w2 N'')` to `grad`.
    pub fn backward(&self, weights: [f64; 3], ws: &mut Workspace, grad: &mut [f64]) {
        assert_eq!(grad.len(), self.params.len());
        let layers: Vec<_> = self.layers().collect();
        let last = layers.len() - 1;
        ws.adj[last][0] = weights;
        for l in (0..=last).rev() {
            let (fan_in, fan_out, off) = layers[l];
            let (gw, gb) = grad[off..off + (fan_in + 1) * fan_out].split_at_mut(fan_in * fan_out);
            let a = &ws.acts[l];
            for j in 0..fan_out {
                let zb = ws.adj[l][j];
                gb[j] += zb[0];
                for i in 0..fan_in {
                    gw[j * fan_in + i] += zb[0] * a[i].value + zb[1] * a[i].first + zb[2] * a[i].second;
                }
            }
            if l == 0 {
                break;
            }
            // adjoint of the activations feeding layer l, then through tanh
            let w = &self.params[off..off + fan_in * fan_out];
            let (below, here) = ws.adj.split_at_mut(l);
            let zbar_in = &mut below[l - 1];
            let zbar_out = &here[0];
            for i in 0..fan_in {
                let mut ab = [0.0; 3];
                for j in 0..fan_out {
                    let wji = w[j * fan_in + i];
                    for c in 0..3 {
                        ab[c] += wji * zbar_out[j][c];
                    }
                }
                let z = ws.pre[l - 1][i];
                let t = z.value.tanh();
                let t1 = 1.0 - t * t;
                let t2 = -2.0 * t * t1;
                let t3 = -2.0 * t1 * t1 + 4.0 * t * t * t1;
                zbar_in[i] = [
                    ab[0] * t1 + ab[1] * t2 * z.first + ab[2] * (t3 * z.first * z.first + t2 * z.second),
                    ab[1] * t1 + 2.0 * ab[2] * t2 * z.first,
                    ab[2] * t1,
                ];
            }
        }
    }

    /// `∇_θ (w0 N + w1 N' + w2 N'')` at `x`.
    pub fn grad_theta(&self, x: f64, weights: [f64; 3]) -> Vec<f64> {
        let mut grad = vec![0.0; self.params.len()];
        let mut ws = Workspace::new(self);
        self.accumulate_grad(x, weights, 1.0, &mut ws, &mut grad);
        grad
    }

    /// Little-endian blob: magic, layer count, sizes (u32), seed (u64),
    /// parameter count (u64), parameters (f64).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + 4 * self.sizes.len() + 8 * self.params.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.sizes.len() as u32).to_le_bytes());
        for &s in &self.sizes {
            out.extend_from_slice(&(s as u32).to_le_bytes());
        }
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&(self.params.len() as u64).to_le_bytes());
        for p in &self.params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, NetError> {
        let mut r = Reader { bytes, at: 0 };
        if r.take(8)? != MAGIC {
            return Err(NetError::Checkpoint("bad magic".into()));
        }
        let count = u32::from_le_bytes(r.array()?) as usize;
        if count > 1 << 16 {
            return Err(NetError::Checkpoint(format!("implausible layer count {count}")));
        }
        let sizes = (0..count)
            .map(|_| Ok(u32::from_le_bytes(r.array()?) as usize))
            .collect::<Result<Vec<_>, NetError>>()?;
        let seed = u64::from_le_bytes(r.array()?);
        let n = u64::from_le_bytes(r.array()?) as usize;
        check_sizes(&sizes)?;
        if n != param_count(&sizes) {
            return Err(NetError::ParamCount { expected: param_count(&sizes), got: n });
        }
        let params = (0..n)
            .map(|_| Ok(f64::from_le_bytes(r.array()?)))
            .collect::<Result<Vec<_>, NetError>>()?;
        if r.at != bytes.len() {
            return Err(NetError::Checkpoint("trailing bytes".into()));
        }
        Ok(Self { sizes, seed, params })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], NetError> {
        let end = self.at + n;
        let s = self
            .bytes
            .get(self.at..end)
            .ok_or_else(|| NetError::Checkpoint("truncated".into()))?;
        self.at = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], NetError> {
        Ok(self.take(N)?.try_into().unwrap())
    }
}

/// `Σ (fan_in + 1) · fan_out` over consecutive layer pairs.
pub fn param_count(sizes: &[usize]) -> usize {
    *layer_offsets(sizes).last().unwrap()
}

/// Scratch buffers reused across forward/reverse passes.
#[derive(Debug, Clone)]
pub struct Workspace {
    acts: Vec<Vec<Jet2>>,
    pre: Vec<Vec<Jet2>>,
    adj: Vec<Vec<[f64; 3]>>,
}

impl Workspace {
    pub fn new(net: &Network) -> Self {
        let acts = net.sizes.iter().map(|&s| vec![Jet2::constant(0.0); s]).collect();
        let pre = net.sizes[1..].iter().map(|&s| vec![Jet2::constant(0.0); s]).collect();
        let adj = net.sizes[1..].iter().map(|&s| vec![[0.0; 3]; s]).collect();
        Self { acts, pre, adj }
    }
}
