use std::ops::Range;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Architecture of a next-token network: optional embedding, stacked LSTM
/// layers, dense softmax head over the full token vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetShape {
    /// Token count, specials included.
    pub vocab: usize,
    /// Index of the padding token. Padding steps are skipped.
    pub pad: usize,
    pub embedding_dim: Option<usize>,
    pub hidden: usize,
    pub layers: usize,
}

/// Smallest `d` with `d^4 >= n`, i.e. the ceiling of the fourth root.
pub fn embedding_dim_for(n_activities: usize) -> usize {
    let mut d = 1usize;
    while d.pow(4) < n_activities {
        d += 1;
    }
    d
}

impl NetShape {
    pub fn input_dim(&self) -> usize {
        self.embedding_dim.unwrap_or(self.vocab)
    }

    fn validate(&self) -> Result<()> {
        if self.vocab < 2 || self.pad >= self.vocab || self.hidden == 0 || self.layers == 0 {
            return Err(Error::Shape(format!("degenerate network shape {self:?}")));
        }
        if self.embedding_dim == Some(0) {
            return Err(Error::Shape("embedding dimension must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct LayerSlots {
    pub input_dim: usize,
    /// `input_dim × 4H`, gate order i, f, g, o.
    pub kernel: Range<usize>,
    /// `H × 4H`.
    pub recurrent: Range<usize>,
    /// `4H`.
    pub bias: Range<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Layout {
    /// `vocab × d_emb`.
    pub embedding: Option<Range<usize>>,
    pub layers: Vec<LayerSlots>,
    /// `H × vocab`.
    pub head_kernel: Range<usize>,
    pub head_bias: Range<usize>,
    pub total: usize,
    /// Weight-matrix entries subject to L1/L2: embedding and LSTM matrices.
    /// Biases, the padding row of the input matrix and the dense head are
    /// excluded.
    pub penalized: Vec<Range<usize>>,
}

impl Layout {
    fn new(shape: &NetShape) -> Layout {
        let mut at = 0usize;
        let mut take = |n: usize| {
            let r = at..at + n;
            at += n;
            r
        };
        let h = shape.hidden;
        let embedding = shape.embedding_dim.map(|d| take(shape.vocab * d));
        let mut layers = Vec::with_capacity(shape.layers);
        for l in 0..shape.layers {
            let input_dim = if l == 0 { shape.input_dim() } else { h };
            layers.push(LayerSlots {
                input_dim,
                kernel: take(input_dim * 4 * h),
                recurrent: take(h * 4 * h),
                bias: take(4 * h),
            });
        }
        let head_kernel = take(h * shape.vocab);
        let head_bias = take(shape.vocab);

        let mut penalized = Vec::new();
        let split_out_pad = |r: &Range<usize>, row: usize, out: &mut Vec<Range<usize>>| {
            let pad_row = r.start + shape.pad * row..r.start + (shape.pad + 1) * row;
            out.push(r.start..pad_row.start);
            out.push(pad_row.end..r.end);
        };
        match (&embedding, shape.embedding_dim) {
            (Some(e), Some(d)) => {
                split_out_pad(e, d, &mut penalized);
                penalized.push(layers[0].kernel.clone());
            }
            _ => split_out_pad(&layers[0].kernel, 4 * h, &mut penalized),
        }
        penalized.push(layers[0].recurrent.clone());
        for l in &layers[1..] {
            penalized.push(l.kernel.clone());
            penalized.push(l.recurrent.clone());
        }
        penalized.retain(|r| !r.is_empty());

        Layout {
            embedding,
            layers,
            head_kernel,
            head_bias,
            total: at,
            penalized,
        }
    }
}

/// Flat parameter vector plus the shape that gives it meaning. Gradients and
/// optimizer moments share the same layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsDoc", into = "ParamsDoc")]
pub struct NetworkParams {
    shape: NetShape,
    pub(crate) layout: Layout,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ParamsDoc {
    shape: NetShape,
    values: Vec<f64>,
}

impl TryFrom<ParamsDoc> for NetworkParams {
    type Error = Error;

    fn try_from(doc: ParamsDoc) -> Result<Self> {
        NetworkParams::from_values(doc.shape, doc.values)
    }
}

impl From<NetworkParams> for ParamsDoc {
    fn from(p: NetworkParams) -> Self {
        ParamsDoc {
            shape: p.shape,
            values: p.values,
        }
    }
}

impl NetworkParams {
    /// Glorot-uniform weights, zero biases, forget-gate biases at 1.
    pub fn init(shape: NetShape, seed: u64) -> Result<Self> {
        shape.validate()?;
        let layout = Layout::new(&shape);
        let mut values = vec![0.0; layout.total];
        let mut rng = rng::seeded(seed);
        let mut glorot = |r: &Range<usize>, fan_in: usize, fan_out: usize| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for v in &mut values[r.clone()] {
                *v = rng.random_range(-limit..limit);
            }
        };
        let h = shape.hidden;
        if let (Some(e), Some(d)) = (&layout.embedding, shape.embedding_dim) {
            glorot(e, shape.vocab, d);
        }
        for l in &layout.layers {
            glorot(&l.kernel, l.input_dim, 4 * h);
            glorot(&l.recurrent, h, 4 * h);
        }
        glorot(&layout.head_kernel, h, shape.vocab);
        for l in &layout.layers {
            for v in &mut values[l.bias.start + h..l.bias.start + 2 * h] {
                *v = 1.0;
            }
        }
        Ok(NetworkParams {
            shape,
            layout,
            values,
        })
    }

    pub fn from_values(shape: NetShape, values: Vec<f64>) -> Result<Self> {
        shape.validate()?;
        let layout = Layout::new(&shape);
        if values.len() != layout.total {
            return Err(Error::Shape(format!(
                "expected {} parameters for {shape:?}, got {}",
                layout.total,
                values.len()
            )));
        }
        Ok(NetworkParams {
            shape,
            layout,
            values,
        })
    }

    pub fn shape(&self) -> &NetShape {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Range of the dense output layer (kernel then bias).
    pub fn head_range(&self) -> Range<usize> {
        self.layout.head_kernel.start..self.layout.head_bias.end
    }

    pub fn head_bias(&self) -> &[f64] {
        &self.values[self.layout.head_bias.clone()]
    }

    pub fn head_bias_mut(&mut self) -> &mut [f64] {
        let r = self.layout.head_bias.clone();
        &mut self.values[r]
    }

    pub(crate) fn penalized_ranges(&self) -> &[Range<usize>] {
        &self.layout.penalized
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(emb: Option<usize>, layers: usize) -> NetShape {
        NetShape {
            vocab: 8,
            pad: 7,
            embedding_dim: emb,
            hidden: 4,
            layers,
        }
    }

    #[test]
    fn fourth_root_ceiling() {
        assert_eq!(embedding_dim_for(1), 1);
        assert_eq!(embedding_dim_for(5), 2);
        assert_eq!(embedding_dim_for(16), 2);
        assert_eq!(embedding_dim_for(17), 3);
        assert_eq!(embedding_dim_for(81), 3);
        assert_eq!(embedding_dim_for(82), 4);
    }

    #[test]
    fn parameter_counts() {
        // one-hot, one layer: 8*16 + 4*16 + 16 + 4*8 + 8
        let p = NetworkParams::init(shape(None, 1), 0).unwrap();
        assert_eq!(p.len(), 128 + 64 + 16 + 32 + 8);
        // embedding 2, two layers
        let p = NetworkParams::init(shape(Some(2), 2), 0).unwrap();
        assert_eq!(
            p.len(),
            16 + (2 * 16 + 64 + 16) + (4 * 16 + 64 + 16) + 32 + 8
        );
    }

    #[test]
    fn penalty_excludes_biases_pad_row_and_head() {
        let p = NetworkParams::init(shape(None, 1), 0).unwrap();
        let covered: usize = p.penalized_ranges().iter().map(|r| r.len()).sum();
        assert_eq!(covered, (8 - 1) * 16 + 64);
        let head = p.head_range();
        assert!(p.penalized_ranges().iter().all(|r| r.end <= head.start));
        let pad_row = 7 * 16..8 * 16;
        for r in p.penalized_ranges() {
            assert!(r.end <= pad_row.start || r.start >= pad_row.end);
        }
    }

    #[test]
    fn forget_bias_starts_at_one() {
        let p = NetworkParams::init(shape(None, 2), 1).unwrap();
        for l in &p.layout.layers {
            let b = &p.values()[l.bias.clone()];
            assert!(b[..4].iter().all(|&x| x == 0.0));
            assert!(b[4..8].iter().all(|&x| x == 1.0));
            assert!(b[8..].iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn serde_round_trip_is_exact() {
        let p = NetworkParams::init(shape(Some(2), 2), 5).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        let q: NetworkParams = serde_json::from_str(&json).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(NetworkParams::from_values(shape(None, 1), vec![0.0; 3]).is_err());
    }
}
