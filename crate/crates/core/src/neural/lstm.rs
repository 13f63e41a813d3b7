//! Forward pass, backpropagation through time and the regularized
//! crossentropy objective.
//!
//! Padding tokens are skipped rather than fed as zero vectors, so the state
//! entering the first real token is exactly zero. Windows of a batch are
//! merged into a prefix forest keyed by their non-padding tokens: every
//! distinct prefix is evaluated once, and during backpropagation each node
//! receives the summed state gradients of its children. Dropout only touches
//! the head, so the sharing is exact.

use std::collections::HashMap;

use rand::Rng as _;

use super::params::NetworkParams;
use crate::error::{Error, Result};
use crate::eventlog::PrefixSample;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    /// Inverted dropout on the last recurrent layer's output.
    Train {
        dropout: f64,
    },
    Infer,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RegularizationSpec {
    pub l1: f64,
    pub l2: f64,
    pub dropout: f64,
}

impl RegularizationSpec {
    pub fn none() -> Self {
        RegularizationSpec::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l1 >= 0.0 && self.l2 >= 0.0 && (0.0..1.0).contains(&self.dropout)) {
            return Err(Error::InvalidConfig(format!(
                "invalid regularization {self:?}"
            )));
        }
        Ok(())
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const ROOT: usize = usize::MAX;

/// Prefix forest: node `n` extends `parent[n]` (or the zero state) by
/// `token[n]`. Parents always precede their children.
#[derive(Default)]
struct Forest {
    token: Vec<usize>,
    parent: Vec<usize>,
    index: HashMap<(usize, usize), usize>,
}

impl Forest {
    /// Inserts a token path and returns its end node (`ROOT` when empty).
    fn insert(&mut self, tokens: &[usize]) -> usize {
        let mut at = ROOT;
        for &t in tokens {
            at = match self.index.get(&(at, t)) {
                Some(&n) => n,
                None => {
                    let n = self.token.len();
                    self.token.push(t);
                    self.parent.push(at);
                    self.index.insert((at, t), n);
                    n
                }
            };
        }
        at
    }

    fn len(&self) -> usize {
        self.token.len()
    }
}

/// Activations of one layer at every forest node.
struct LayerTrace {
    /// `nodes × 4H`, post-activation (i, f, g, o).
    gates: Vec<f64>,
    cells: Vec<f64>,
    tanh_cells: Vec<f64>,
    outputs: Vec<f64>,
}

struct ForestTrace {
    /// `nodes × d_emb` when an embedding is present.
    embedded: Vec<f64>,
    layers: Vec<LayerTrace>,
}

impl ForestTrace {
    fn top_output(&self, node: usize, hidden: usize) -> Vec<f64> {
        if node == ROOT {
            return vec![0.0; hidden];
        }
        let top = self.layers.last().expect("at least one layer");
        top.outputs[node * hidden..(node + 1) * hidden].to_vec()
    }
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// `count × hidden` inverted-dropout multipliers, drawn sample by sample.
pub(crate) fn dropout_masks(count: usize, hidden: usize, rate: f64, seed: u64) -> Option<Vec<f64>> {
    if rate <= 0.0 {
        return None;
    }
    let keep = 1.0 / (1.0 - rate);
    let mut rng = rng::seeded(seed);
    Some(
        (0..count * hidden)
            .map(|_| {
                if rng.random::<f64>() < rate {
                    0.0
                } else {
                    keep
                }
            })
            .collect(),
    )
}

impl NetworkParams {
    fn check_tokens(&self, prefix: &[usize]) -> Result<Vec<usize>> {
        let shape = self.shape();
        let mut tokens = Vec::with_capacity(prefix.len());
        for &t in prefix {
            if t >= shape.vocab {
                return Err(Error::TokenOutOfRange {
                    index: t,
                    size: shape.vocab,
                });
            }
            if t != shape.pad {
                tokens.push(t);
            }
        }
        Ok(tokens)
    }

    fn run_forest(&self, forest: &Forest) -> ForestTrace {
        let shape = *self.shape();
        let layout = &self.layout;
        let w = self.values();
        let h = shape.hidden;
        let nodes = forest.len();

        let embedded = match (&layout.embedding, shape.embedding_dim) {
            (Some(e), Some(d)) => {
                let table = &w[e.clone()];
                forest
                    .token
                    .iter()
                    .flat_map(|&t| table[t * d..(t + 1) * d].iter().copied())
                    .collect()
            }
            _ => Vec::new(),
        };

        let mut layers: Vec<LayerTrace> = Vec::with_capacity(layout.layers.len());
        let mut z = vec![0.0; 4 * h];
        for (l, slots) in layout.layers.iter().enumerate() {
            let kernel = &w[slots.kernel.clone()];
            let recurrent = &w[slots.recurrent.clone()];
            let bias = &w[slots.bias.clone()];
            let mut tr = LayerTrace {
                gates: vec![0.0; nodes * 4 * h],
                cells: vec![0.0; nodes * h],
                tanh_cells: vec![0.0; nodes * h],
                outputs: vec![0.0; nodes * h],
            };
            for n in 0..nodes {
                z.copy_from_slice(bias);
                if l == 0 && layout.embedding.is_none() {
                    let tok = forest.token[n];
                    axpy(1.0, &kernel[tok * 4 * h..(tok + 1) * 4 * h], &mut z);
                } else {
                    let x = if l == 0 {
                        &embedded[n * slots.input_dim..(n + 1) * slots.input_dim]
                    } else {
                        &layers[l - 1].outputs[n * h..(n + 1) * h]
                    };
                    for (j, &xj) in x.iter().enumerate() {
                        axpy(xj, &kernel[j * 4 * h..(j + 1) * 4 * h], &mut z);
                    }
                }
                let p = forest.parent[n];
                if p != ROOT {
                    let h_prev = &tr.outputs[p * h..(p + 1) * h];
                    for (j, &hj) in h_prev.iter().enumerate() {
                        axpy(hj, &recurrent[j * 4 * h..(j + 1) * 4 * h], &mut z);
                    }
                }
                let g = &mut tr.gates[n * 4 * h..(n + 1) * 4 * h];
                for k in 0..h {
                    g[k] = sigmoid(z[k]);
                    g[h + k] = sigmoid(z[h + k]);
                    g[2 * h + k] = z[2 * h + k].tanh();
                    g[3 * h + k] = sigmoid(z[3 * h + k]);
                }
                for k in 0..h {
                    let c_prev = if p != ROOT { tr.cells[p * h + k] } else { 0.0 };
                    let c = g[h + k] * c_prev + g[k] * g[2 * h + k];
                    let tc = c.tanh();
                    tr.cells[n * h + k] = c;
                    tr.tanh_cells[n * h + k] = tc;
                    tr.outputs[n * h + k] = g[3 * h + k] * tc;
                }
            }
            layers.push(tr);
        }
        ForestTrace { embedded, layers }
    }

    /// Logits of the dense head for a (possibly dropped-out) hidden vector.
    fn head_logits(&self, hidden_out: &[f64]) -> Vec<f64> {
        let v = self.shape().vocab;
        let w = self.values();
        let kernel = &w[self.layout.head_kernel.clone()];
        let mut logits = w[self.layout.head_bias.clone()].to_vec();
        for (j, &hj) in hidden_out.iter().enumerate() {
            axpy(hj, &kernel[j * v..(j + 1) * v], &mut logits);
        }
        logits
    }

    /// Next-token distribution for one prefix window.
    pub fn forward(&self, prefix: &[usize], mode: Mode, dropout_seed: u64) -> Result<Vec<f64>> {
        let tokens = self.check_tokens(prefix)?;
        let h = self.shape().hidden;
        let mut forest = Forest::default();
        let end = forest.insert(&tokens);
        let mut out = self.run_forest(&forest).top_output(end, h);
        if let Mode::Train { dropout } = mode {
            if let Some(mask) = dropout_masks(1, h, dropout, dropout_seed) {
                for (o, m) in out.iter_mut().zip(&mask) {
                    *o *= m;
                }
            }
        }
        let mut p = self.head_logits(&out);
        softmax_in_place(&mut p);
        Ok(p)
    }

    /// Inference-mode distributions for many windows at once, sharing
    /// common prefixes.
    pub fn forward_batch<P: AsRef<[usize]>>(&self, prefixes: &[P]) -> Result<Vec<Vec<f64>>> {
        let h = self.shape().hidden;
        let mut forest = Forest::default();
        let mut ends = Vec::with_capacity(prefixes.len());
        for p in prefixes {
            ends.push(forest.insert(&self.check_tokens(p.as_ref())?));
        }
        let trace = self.run_forest(&forest);
        Ok(ends
            .into_iter()
            .map(|e| {
                let mut p = self.head_logits(&trace.top_output(e, h));
                softmax_in_place(&mut p);
                p
            })
            .collect())
    }

    /// Index of the most probable next token (ties go to the lowest index).
    pub fn predict_argmax(&self, prefix: &[usize]) -> Result<usize> {
        let p = self.forward(prefix, Mode::Infer, 0)?;
        Ok(argmax(&p))
    }

    /// Backpropagation through the forest; `dh_top` holds, per node, the
    /// gradient arriving at the last layer's output from the head.
    fn backward_forest(
        &self,
        forest: &Forest,
        trace: &ForestTrace,
        dh_top: Vec<f64>,
        grads: &mut [f64],
    ) {
        let shape = *self.shape();
        let layout = &self.layout;
        let w = self.values();
        let h = shape.hidden;
        let nodes = forest.len();
        if nodes == 0 {
            return;
        }

        let mut d_out = dh_top;
        let mut dz = vec![0.0; 4 * h];
        let mut dh_rec = vec![0.0; nodes * h];
        let mut dc_acc = vec![0.0; nodes * h];

        for l in (0..layout.layers.len()).rev() {
            let slots = &layout.layers[l];
            let tr = &trace.layers[l];
            let one_hot = l == 0 && layout.embedding.is_none();
            let mut d_in = if one_hot {
                Vec::new()
            } else {
                vec![0.0; nodes * slots.input_dim]
            };
            dh_rec.iter_mut().for_each(|x| *x = 0.0);
            dc_acc.iter_mut().for_each(|x| *x = 0.0);
            let kernel = &w[slots.kernel.clone()];
            let recurrent = &w[slots.recurrent.clone()];

            for n in (0..nodes).rev() {
                let p = forest.parent[n];
                let g = &tr.gates[n * 4 * h..(n + 1) * 4 * h];
                for k in 0..h {
                    let dh = d_out[n * h + k] + dh_rec[n * h + k];
                    let (i, f, gg, o) = (g[k], g[h + k], g[2 * h + k], g[3 * h + k]);
                    let tc = tr.tanh_cells[n * h + k];
                    let c_prev = if p != ROOT { tr.cells[p * h + k] } else { 0.0 };
                    let dc = dc_acc[n * h + k] + dh * o * (1.0 - tc * tc);
                    if p != ROOT {
                        dc_acc[p * h + k] += dc * f;
                    }
                    dz[k] = dc * gg * i * (1.0 - i);
                    dz[h + k] = dc * c_prev * f * (1.0 - f);
                    dz[2 * h + k] = dc * i * (1.0 - gg * gg);
                    dz[3 * h + k] = dh * tc * o * (1.0 - o);
                }

                axpy(1.0, &dz, &mut grads[slots.bias.clone()]);

                if one_hot {
                    let start = slots.kernel.start + forest.token[n] * 4 * h;
                    axpy(1.0, &dz, &mut grads[start..start + 4 * h]);
                } else {
                    let x = if l == 0 {
                        &trace.embedded[n * slots.input_dim..(n + 1) * slots.input_dim]
                    } else {
                        &trace.layers[l - 1].outputs[n * h..(n + 1) * h]
                    };
                    let dk = &mut grads[slots.kernel.clone()];
                    for (j, &xj) in x.iter().enumerate() {
                        axpy(xj, &dz, &mut dk[j * 4 * h..(j + 1) * 4 * h]);
                        d_in[n * slots.input_dim + j] =
                            dot(&kernel[j * 4 * h..(j + 1) * 4 * h], &dz);
                    }
                }

                if p != ROOT {
                    let h_prev = &tr.outputs[p * h..(p + 1) * h];
                    let dr = &mut grads[slots.recurrent.clone()];
                    for j in 0..h {
                        axpy(h_prev[j], &dz, &mut dr[j * 4 * h..(j + 1) * 4 * h]);
                        dh_rec[p * h + j] += dot(&recurrent[j * 4 * h..(j + 1) * 4 * h], &dz);
                    }
                }
            }

            if l > 0 {
                d_out = d_in;
            } else if let (Some(e), Some(d)) = (&layout.embedding, shape.embedding_dim) {
                for (n, &tok) in forest.token.iter().enumerate() {
                    let start = e.start + tok * d;
                    axpy(1.0, &d_in[n * d..(n + 1) * d], &mut grads[start..start + d]);
                }
            }
        }
    }

    /// L1/L2 penalty over the weight matrices, adding its gradient into `grads`.
    fn penalty(&self, reg: &RegularizationSpec, grads: Option<&mut [f64]>) -> f64 {
        if reg.l1 == 0.0 && reg.l2 == 0.0 {
            return 0.0;
        }
        let w = self.values();
        let mut total = 0.0;
        for r in self.penalized_ranges() {
            for &x in &w[r.clone()] {
                total += reg.l1 * x.abs() + reg.l2 * x * x;
            }
        }
        if let Some(g) = grads {
            for r in self.penalized_ranges() {
                for i in r.clone() {
                    let x = w[i];
                    let sign = if x > 0.0 {
                        1.0
                    } else if x < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    g[i] += reg.l1 * sign + 2.0 * reg.l2 * x;
                }
            }
        }
        total
    }

    /// Regularized objective only, no gradients.
    pub fn loss(&self, batch: &[PrefixSample], reg: &RegularizationSpec, seed: u64) -> Result<f64> {
        reg.validate()?;
        let masks = dropout_masks(batch.len(), self.shape().hidden, reg.dropout, seed);
        self.objective(batch, reg, masks.as_deref(), false)
            .map(|(l, _)| l)
    }

    /// Mean crossentropy over the batch plus `l1·Σ|w| + l2·Σw²`, and the
    /// gradient of that objective with respect to every parameter.
    pub fn loss_and_gradients(
        &self,
        batch: &[PrefixSample],
        reg: &RegularizationSpec,
        seed: u64,
    ) -> Result<(f64, Vec<f64>)> {
        reg.validate()?;
        let masks = dropout_masks(batch.len(), self.shape().hidden, reg.dropout, seed);
        self.objective(batch, reg, masks.as_deref(), true)
            .map(|(l, g)| (l, g.expect("gradients requested")))
    }

    fn objective(
        &self,
        batch: &[PrefixSample],
        reg: &RegularizationSpec,
        masks: Option<&[f64]>,
        want_grads: bool,
    ) -> Result<(f64, Option<Vec<f64>>)> {
        if batch.is_empty() {
            return Err(Error::InvalidConfig("empty batch".into()));
        }
        let shape = *self.shape();
        let (h, v) = (shape.hidden, shape.vocab);
        let scale = 1.0 / batch.len() as f64;

        let mut forest = Forest::default();
        let mut ends = Vec::with_capacity(batch.len());
        for s in batch {
            if s.target >= v {
                return Err(Error::TokenOutOfRange {
                    index: s.target,
                    size: v,
                });
            }
            ends.push(forest.insert(&self.check_tokens(&s.prefix)?));
        }
        let trace = self.run_forest(&forest);

        let mut grads = want_grads.then(|| vec![0.0; self.len()]);
        let head_kernel = self.layout.head_kernel.clone();
        let head_bias = self.layout.head_bias.clone();
        let mut dh_top = vec![0.0; forest.len() * h];
        let mut crossentropy = 0.0;
        let mut dropped = vec![0.0; h];

        for (i, (s, &end)) in batch.iter().zip(&ends).enumerate() {
            let top = trace.top_output(end, h);
            let mask = masks.map(|m| &m[i * h..(i + 1) * h]);
            match mask {
                Some(m) => {
                    for k in 0..h {
                        dropped[k] = top[k] * m[k];
                    }
                }
                None => dropped.copy_from_slice(&top),
            }
            let mut p = self.head_logits(&dropped);
            softmax_in_place(&mut p);
            crossentropy -= p[s.target].ln();

            if let Some(g) = grads.as_mut() {
                // dL/dlogits = (p - onehot) / B
                let mut dlogits = p;
                dlogits[s.target] -= 1.0;
                dlogits.iter_mut().for_each(|x| *x *= scale);
                axpy(1.0, &dlogits, &mut g[head_bias.clone()]);
                let kernel = &self.values()[head_kernel.clone()];
                let dk = &mut g[head_kernel.clone()];
                for j in 0..h {
                    axpy(dropped[j], &dlogits, &mut dk[j * v..(j + 1) * v]);
                    if end != ROOT {
                        let d = dot(&kernel[j * v..(j + 1) * v], &dlogits);
                        dh_top[end * h + j] += match mask {
                            Some(m) => d * m[j],
                            None => d,
                        };
                    }
                }
            }
        }
        if let Some(g) = grads.as_mut() {
            self.backward_forest(&forest, &trace, dh_top, g);
        }

        let loss = crossentropy * scale + self.penalty(reg, grads.as_deref_mut());
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss);
        }
        Ok((loss, grads))
    }
}

pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in p.iter().enumerate() {
        if x > p[best] {
            best = i;
        }
    }
    best
}

pub fn forward(
    params: &NetworkParams,
    prefix: &[usize],
    mode: Mode,
    dropout_seed: u64,
) -> Result<Vec<f64>> {
    params.forward(prefix, mode, dropout_seed)
}

pub fn loss_and_gradients(
    params: &NetworkParams,
    batch: &[PrefixSample],
    reg: &RegularizationSpec,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    params.loss_and_gradients(batch, reg, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::params::NetShape;
    use proptest::prelude::*;

    fn net(emb: Option<usize>, layers: usize, seed: u64) -> NetworkParams {
        NetworkParams::init(
            NetShape {
                vocab: 8,
                pad: 7,
                embedding_dim: emb,
                hidden: 5,
                layers,
            },
            seed,
        )
        .unwrap()
    }

    #[test]
    fn all_pad_prefix_gives_softmax_of_head_bias() {
        let mut p = net(None, 2, 3);
        p.head_bias_mut()
            .copy_from_slice(&[0.3, -1.0, 2.0, 0.0, 0.5, 0.1, -0.2, 1.1]);
        let out = p.forward(&[7; 6], Mode::Infer, 0).unwrap();
        let mut expected = p.head_bias().to_vec();
        softmax_in_place(&mut expected);
        for (a, b) in out.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_dropout_train_equals_infer() {
        let p = net(Some(2), 1, 4);
        let a = p
            .forward(&[7, 7, 5, 0, 2], Mode::Train { dropout: 0.0 }, 9)
            .unwrap();
        let b = p.forward(&[7, 7, 5, 0, 2], Mode::Infer, 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dropout_changes_training_output_only() {
        let p = net(None, 1, 4);
        let prefix = [7, 5, 0, 2, 3];
        let a = p.forward(&prefix, Mode::Train { dropout: 0.4 }, 1).unwrap();
        let b = p.forward(&prefix, Mode::Infer, 0).unwrap();
        assert_ne!(a, b);
        assert_eq!(b, p.forward(&prefix, Mode::Infer, 77).unwrap());
    }

    #[test]
    fn out_of_vocab_token_is_an_error() {
        let p = net(None, 1, 0);
        assert!(matches!(
            p.forward(&[7, 8], Mode::Infer, 0),
            Err(Error::TokenOutOfRange { index: 8, size: 8 })
        ));
    }

    #[test]
    fn uniform_head_gives_ln_vocab() {
        let mut p = net(None, 1, 0);
        let hk = p.layout.head_kernel.clone();
        p.values_mut()[hk].iter_mut().for_each(|x| *x = 0.0);
        p.head_bias_mut().iter_mut().for_each(|x| *x = 0.0);
        let batch = vec![
            PrefixSample {
                prefix: vec![7, 5, 1],
                target: 2,
            },
            PrefixSample {
                prefix: vec![7, 7, 5],
                target: 0,
            },
        ];
        let l = p.loss(&batch, &RegularizationSpec::none(), 0).unwrap();
        assert!((l - 8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn penalty_adds_to_crossentropy() {
        let p = net(None, 1, 2);
        let batch = vec![PrefixSample {
            prefix: vec![7, 5, 1],
            target: 2,
        }];
        let plain = p.loss(&batch, &RegularizationSpec::none(), 0).unwrap();
        let reg = RegularizationSpec {
            l1: 1e-3,
            l2: 1e-3,
            dropout: 0.0,
        };
        let expected: f64 = p
            .penalized_ranges()
            .iter()
            .flat_map(|r| p.values()[r.clone()].iter())
            .map(|w| 1e-3 * w.abs() + 1e-3 * w * w)
            .sum();
        let with = p.loss(&batch, &reg, 0).unwrap();
        assert!((with - plain - expected).abs() < 1e-12);
    }

    #[test]
    fn shared_prefixes_match_per_sample_gradients() {
        let p = net(Some(2), 2, 6);
        let reg = RegularizationSpec {
            l1: 0.0,
            l2: 0.0,
            dropout: 0.3,
        };
        let batch = vec![
            PrefixSample {
                prefix: vec![7, 5, 1],
                target: 2,
            },
            PrefixSample {
                prefix: vec![7, 5, 1],
                target: 3,
            },
            PrefixSample {
                prefix: vec![5, 1, 2],
                target: 2,
            },
            PrefixSample {
                prefix: vec![7, 7, 5],
                target: 6,
            },
            PrefixSample {
                prefix: vec![7, 7, 7],
                target: 5,
            },
            PrefixSample {
                prefix: vec![4, 0, 3],
                target: 1,
            },
        ];
        let h = p.shape().hidden;
        let masks = dropout_masks(batch.len(), h, reg.dropout, 10).unwrap();
        let (loss, grads) = p.objective(&batch, &reg, Some(&masks), true).unwrap();
        let grads = grads.unwrap();

        let mut ref_loss = 0.0;
        let mut ref_grads = vec![0.0; p.len()];
        for (i, s) in batch.iter().enumerate() {
            let m = &masks[i * h..(i + 1) * h];
            let (l, g) = p
                .objective(std::slice::from_ref(s), &reg, Some(m), true)
                .unwrap();
            ref_loss += l / batch.len() as f64;
            axpy(1.0 / batch.len() as f64, &g.unwrap(), &mut ref_grads);
        }
        assert!((loss - ref_loss).abs() < 1e-12);
        for (a, b) in grads.iter().zip(&ref_grads) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn batch_inference_matches_single_calls() {
        let p = net(None, 2, 1);
        let prefixes = vec![vec![7, 5, 1], vec![7, 5, 2], vec![7, 7, 7], vec![5, 1, 0]];
        let batch = p.forward_batch(&prefixes).unwrap();
        for (pre, out) in prefixes.iter().zip(&batch) {
            assert_eq!(out, &p.forward(pre, Mode::Infer, 0).unwrap());
        }
    }

    proptest! {
        #[test]
        fn outputs_are_distributions(
            seed in 0u64..1000,
            prefix in prop::collection::vec(0usize..8, 1..8),
            emb in prop::option::of(1usize..4),
            layers in 1usize..3,
        ) {
            let p = net(emb, layers, seed);
            let out = p.forward(&prefix, Mode::Infer, 0).unwrap();
            prop_assert!(out.iter().all(|&x| x >= 0.0));
            prop_assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let tr = p.forward(&prefix, Mode::Train { dropout: 0.4 }, seed).unwrap();
            prop_assert!((tr.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
