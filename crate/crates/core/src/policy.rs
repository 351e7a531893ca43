//! Single-hidden-layer sigmoid policy network.
//!
//! The network maps the observable exogenous signals plus the hour of the day
//! to a vector of normalized decisions in `(0, 1)`. Weights live in one flat
//! vector so the optimizer can treat them as a genome. Layout, row-major:
//! `W1 (hidden × input)`, `b1 (hidden)`, `W2 (output × hidden)`, `b2 (output)`.

use serde::{Deserialize, Serialize};

use crate::environment::ObservableState;
use crate::error::{Error, Result};

/// Exogenous signals fed to the network (hour of day excluded).
pub const EXOGENOUS_INPUTS: usize = 5;
/// Exogenous signals plus the hour of day.
pub const INPUT_DIM: usize = EXOGENOUS_INPUTS + 1;
pub const DEFAULT_HIDDEN: usize = 15;
/// Default box for weight search.
pub const DEFAULT_WEIGHT_BOUND: f64 = 10.0;

pub const INPUT_NAMES: [&str; INPUT_DIM] = [
    "temperature",
    "wind_speed",
    "solar_radiation",
    "streamflow",
    "prior_day_price",
    "hour_of_day",
];

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
}

impl Architecture {
    pub fn new(hidden_dim: usize, output_dim: usize) -> Self {
        Architecture {
            input_dim: INPUT_DIM,
            hidden_dim,
            output_dim,
        }
    }

    pub fn weight_count(&self) -> usize {
        (self.input_dim + 1) * self.hidden_dim + (self.hidden_dim + 1) * self.output_dim
    }
}

/// Affine map from raw signal units onto roughly `[0, 1]`:
/// `normalized = (raw - offset) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputNormalization {
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

impl InputNormalization {
    /// Leaves exogenous signals untouched and maps the hour to `h / 23`.
    pub fn identity() -> Self {
        let mut scale = vec![1.0; INPUT_DIM];
        scale[INPUT_DIM - 1] = 23.0;
        InputNormalization {
            offset: vec![0.0; INPUT_DIM],
            scale,
        }
    }

    /// Min-max scaling of each exogenous signal over the given raw samples.
    /// Constant signals get scale 1. The hour always maps to `h / 23`.
    pub fn fit<'a>(samples: impl IntoIterator<Item = &'a ObservableState>) -> Self {
        let mut lo = [f64::INFINITY; EXOGENOUS_INPUTS];
        let mut hi = [f64::NEG_INFINITY; EXOGENOUS_INPUTS];
        for s in samples {
            let raw = s.exogenous();
            for a in 0..EXOGENOUS_INPUTS {
                lo[a] = lo[a].min(raw[a]);
                hi[a] = hi[a].max(raw[a]);
            }
        }
        let mut norm = Self::identity();
        for a in 0..EXOGENOUS_INPUTS {
            if lo[a].is_finite() {
                norm.offset[a] = lo[a];
                let span = hi[a] - lo[a];
                norm.scale[a] = if span > 0.0 { span } else { 1.0 };
            }
        }
        norm
    }

    pub fn validate(&self, input_dim: usize) -> Result<()> {
        if self.offset.len() != input_dim || self.scale.len() != input_dim {
            return Err(Error::Architecture(format!(
                "normalization has {} offsets and {} scales for {input_dim} inputs",
                self.offset.len(),
                self.scale.len()
            )));
        }
        if self
            .scale
            .iter()
            .chain(&self.offset)
            .any(|v| !v.is_finite())
            || self.scale.iter().any(|&s| s <= 0.0)
        {
            return Err(Error::Architecture(
                "normalization scales must be finite and positive".into(),
            ));
        }
        Ok(())
    }

    fn apply(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.offset.iter().zip(&self.scale))
            .map(|(x, (o, s))| (x - o) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyNetwork {
    pub architecture: Architecture,
    pub normalization: InputNormalization,
    pub weights: Vec<f64>,
}

impl PolicyNetwork {
    /// Builds a network from a flat weight vector. This is the decode half
    /// of the genome encoding.
    pub fn new(
        architecture: Architecture,
        normalization: InputNormalization,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if weights.len() != architecture.weight_count() {
            return Err(Error::Architecture(format!(
                "expected {} weights for {}-{}-{} network, got {}",
                architecture.weight_count(),
                architecture.input_dim,
                architecture.hidden_dim,
                architecture.output_dim,
                weights.len()
            )));
        }
        normalization.validate(architecture.input_dim)?;
        Ok(PolicyNetwork {
            architecture,
            normalization,
            weights,
        })
    }

    pub fn zeros(architecture: Architecture, normalization: InputNormalization) -> Self {
        let w = vec![0.0; architecture.weight_count()];
        Self::new(architecture, normalization, w).expect("zero network is well formed")
    }

    /// The flat genome.
    pub fn encode(&self) -> &[f64] {
        &self.weights
    }

    pub fn decode(
        weights: &[f64],
        architecture: Architecture,
        normalization: InputNormalization,
    ) -> Result<Self> {
        Self::new(architecture, normalization, weights.to_vec())
    }

    pub fn output_dim(&self) -> usize {
        self.architecture.output_dim
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        let Architecture {
            input_dim: n,
            hidden_dim: h,
            output_dim: k,
        } = self.architecture;
        let (w1, rest) = self.weights.split_at(h * n);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(k * h);
        (w1, b1, w2, b2)
    }

    fn hidden(&self, x: &[f64]) -> Vec<f64> {
        let n = self.architecture.input_dim;
        let (w1, b1, _, _) = self.split();
        b1.iter()
            .enumerate()
            .map(|(j, b)| {
                let row = &w1[j * n..(j + 1) * n];
                sigmoid(b + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>())
            })
            .collect()
    }

    fn output(&self, hidden: &[f64]) -> Vec<f64> {
        let h = self.architecture.hidden_dim;
        let (_, _, w2, b2) = self.split();
        b2.iter()
            .enumerate()
            .map(|(k, b)| {
                let row = &w2[k * h..(k + 1) * h];
                sigmoid(b + row.iter().zip(hidden).map(|(w, z)| w * z).sum::<f64>())
            })
            .collect()
    }

    /// Network output for raw (unnormalized) inputs.
    pub fn forward_raw(&self, raw: &[f64]) -> Vec<f64> {
        debug_assert_eq!(raw.len(), self.architecture.input_dim);
        let x = self.normalization.apply(raw);
        self.output(&self.hidden(&x))
    }

    pub fn forward(&self, obs: &ObservableState) -> Vec<f64> {
        self.forward_raw(&obs.raw_inputs())
    }

    /// Jacobian `∂u_k / ∂raw_a`, one row per output, with respect to raw
    /// input units.
    pub fn input_gradient_raw(&self, raw: &[f64]) -> Vec<Vec<f64>> {
        let Architecture {
            input_dim: n,
            hidden_dim: h,
            output_dim: k,
        } = self.architecture;
        let x = self.normalization.apply(raw);
        let z = self.hidden(&x);
        let u = self.output(&z);
        let (w1, _, w2, _) = self.split();
        let dz: Vec<f64> = z.iter().map(|zj| zj * (1.0 - zj)).collect();
        (0..k)
            .map(|o| {
                let du = u[o] * (1.0 - u[o]);
                (0..n)
                    .map(|a| {
                        let s: f64 = (0..h)
                            .map(|j| w2[o * h + j] * dz[j] * w1[j * n + a])
                            .sum();
                        du * s / self.normalization.scale[a]
                    })
                    .collect()
            })
            .collect()
    }

    pub fn input_gradient(&self, obs: &ObservableState) -> Vec<Vec<f64>> {
        self.input_gradient_raw(&obs.raw_inputs())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let net: PolicyNetwork = serde_json::from_str(text)?;
        Self::new(net.architecture, net.normalization, net.weights)
    }
}
