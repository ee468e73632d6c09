//! Online learners for the trainer's two judgments.
//!
//! [`EffectivenessModel`] is a linear regressor trained one squared-error
//! gradient step at a time toward the trainer's ±1 signal.
//! [`SocialModel`] is a logistic unit (optionally behind one tanh hidden
//! layer) trained one cross-entropy step at a time toward the binary label.
//!
//! Both keep their parameters in one flat vector so that checkpoints and
//! finite-difference checks see the same layout the update uses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Linear model: `w · x + b`. Parameter layout: `[w..., b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectivenessModel {
    params: Vec<f64>,
    pub learning_rate: f64,
}

impl EffectivenessModel {
    pub fn new(input_len: usize, learning_rate: f64) -> Self {
        EffectivenessModel {
            params: vec![0.0; input_len + 1],
            learning_rate,
        }
    }

    pub fn input_len(&self) -> usize {
        self.params.len() - 1
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let d = self.input_len();
        debug_assert_eq!(x.len(), d);
        dot(&self.params[..d], x) + self.params[d]
    }

    /// `½ (prediction − target)²`
    pub fn loss(&self, x: &[f64], target: f64) -> f64 {
        0.5 * (self.predict(x) - target).powi(2)
    }

    pub fn gradient(&self, x: &[f64], target: f64) -> Vec<f64> {
        let err = self.predict(x) - target;
        x.iter()
            .map(|v| err * v)
            .chain(std::iter::once(err))
            .collect()
    }

    pub fn update(&mut self, x: &[f64], target: f64) {
        let grad = self.gradient(x, target);
        for (p, g) in self.params.iter_mut().zip(grad) {
            *p -= self.learning_rate * g;
        }
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn set_parameters(&mut self, params: Vec<f64>) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::config(format!(
                "effectiveness model expects {} parameters, got {}",
                self.params.len(),
                params.len()
            )));
        }
        self.params = params;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SocialArchitecture {
    Linear,
    Hidden { width: usize },
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Binary permissibility classifier.
///
/// Linear layout: `[w..., b]`.
/// Hidden layout: `[W1 (width × d, row-major)..., b1..., w2..., b2]` with
/// `tanh` hidden units. `w2` and `b2` start at zero so an untrained model of
/// either kind outputs exactly 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialModel {
    architecture: SocialArchitecture,
    input_len: usize,
    params: Vec<f64>,
    pub learning_rate: f64,
    threshold: f64,
}

impl SocialModel {
    pub fn new(
        input_len: usize,
        architecture: SocialArchitecture,
        learning_rate: f64,
        threshold: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::config(format!(
                "decision threshold {threshold} outside (0, 1]"
            )));
        }
        let params = match architecture {
            SocialArchitecture::Linear => vec![0.0; input_len + 1],
            SocialArchitecture::Hidden { width } => {
                if width == 0 {
                    return Err(Error::config("hidden layer width must be positive"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let scale = 1.0 / (input_len as f64).sqrt();
                let mut p: Vec<f64> = (0..width * input_len)
                    .map(|_| rng.gen_range(-scale..scale))
                    .collect();
                p.extend(std::iter::repeat_n(0.0, 2 * width + 1));
                p
            }
        };
        Ok(SocialModel {
            architecture,
            input_len,
            params,
            learning_rate,
            threshold,
        })
    }

    pub fn architecture(&self) -> SocialArchitecture {
        self.architecture
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    /// Pre-activation of the output unit, plus the hidden activations when
    /// there is a hidden layer.
    fn forward(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let d = self.input_len;
        debug_assert_eq!(x.len(), d);
        match self.architecture {
            SocialArchitecture::Linear => (dot(&self.params[..d], x) + self.params[d], Vec::new()),
            SocialArchitecture::Hidden { width } => {
                let (w1, rest) = self.params.split_at(width * d);
                let (b1, rest) = rest.split_at(width);
                let (w2, b2) = rest.split_at(width);
                let hidden: Vec<f64> = (0..width)
                    .map(|j| (dot(&w1[j * d..(j + 1) * d], x) + b1[j]).tanh())
                    .collect();
                (dot(w2, &hidden) + b2[0], hidden)
            }
        }
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        self.forward(x).0
    }

    /// Probability that the action is permissible, kept strictly inside
    /// (0, 1).
    pub fn output(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
    }

    pub fn predict_permissible(&self, x: &[f64]) -> bool {
        self.output(x) >= self.threshold
    }

    /// Cross-entropy `−[y ln p + (1 − y) ln(1 − p)]` for `y ∈ {0, 1}`.
    pub fn loss(&self, x: &[f64], label: f64) -> f64 {
        let z = self.logit(x);
        softplus(z) - label * z
    }

    pub fn gradient(&self, x: &[f64], label: f64) -> Vec<f64> {
        let d = self.input_len;
        let (z, hidden) = self.forward(x);
        let dz = sigmoid(z) - label;
        match self.architecture {
            SocialArchitecture::Linear => x
                .iter()
                .map(|v| dz * v)
                .chain(std::iter::once(dz))
                .collect(),
            SocialArchitecture::Hidden { width } => {
                let w2 = &self.params[width * d + width..width * d + 2 * width];
                let mut grad = vec![0.0; self.params.len()];
                for j in 0..width {
                    let dpre = dz * w2[j] * (1.0 - hidden[j] * hidden[j]);
                    for (k, xv) in x.iter().enumerate() {
                        grad[j * d + k] = dpre * xv;
                    }
                    grad[width * d + j] = dpre;
                    grad[width * d + width + j] = dz * hidden[j];
                }
                grad[width * d + 2 * width] = dz;
                grad
            }
        }
    }

    pub fn update(&mut self, x: &[f64], label: f64) {
        let grad = self.gradient(x, label);
        for (p, g) in self.params.iter_mut().zip(grad) {
            *p -= self.learning_rate * g;
        }
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn set_parameters(&mut self, params: Vec<f64>) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::config(format!(
                "social model expects {} parameters, got {}",
                self.params.len(),
                params.len()
            )));
        }
        self.params = params;
        Ok(())
    }
}
