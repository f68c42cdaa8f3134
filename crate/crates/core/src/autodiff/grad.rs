//! Parameter gradients, shape-congruent with the owning network.

use ndarray::{Array1, Array2};

use crate::nn::Mlp;

/// Gradient of a scalar with respect to every parameter of one [`Mlp`].
///
/// Layout mirrors the network: one matrix per weight layer, one vector per
/// bias layer. Flat iteration order (layer by layer, weights row-major, then
/// bias) is the canonical parameter order shared with
/// [`Mlp::params_flat`](crate::nn::Mlp::params_flat) and the optimizer.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpGrad {
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
}

impl MlpGrad {
    pub fn zeros_like(net: &Mlp) -> Self {
        MlpGrad {
            weights: net
                .weights()
                .iter()
                .map(|w| Array2::zeros(w.raw_dim()))
                .collect(),
            biases: net
                .biases()
                .iter()
                .map(|b| Array1::zeros(b.raw_dim()))
                .collect(),
        }
    }

    pub(crate) fn from_parts(weights: Vec<Array2<f64>>, biases: Vec<Array1<f64>>) -> Self {
        MlpGrad { weights, biases }
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.weights
    }

    pub(crate) fn biases_mut(&mut self) -> &mut [Array1<f64>] {
        &mut self.biases
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// One entry per trainable parameter, in canonical order.
    pub fn iter_flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights
            .iter()
            .zip(self.biases.iter())
            .flat_map(|(w, b)| w.iter().chain(b.iter()))
            .copied()
    }

    pub fn is_finite(&self) -> bool {
        self.iter_flat().all(|g| g.is_finite())
    }

    /// Accumulate `other` into `self`. Shapes must be congruent.
    pub fn add_assign(&mut self, other: &MlpGrad) {
        for (a, b) in self.weights.iter_mut().zip(other.weights.iter()) {
            *a += b;
        }
        for (a, b) in self.biases.iter_mut().zip(other.biases.iter()) {
            *a += b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for w in &mut self.weights {
            *w *= c;
        }
        for b in &mut self.biases {
            *b *= c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::LayerSpec;

    #[test]
    fn flat_count_matches_network() {
        let net = Mlp::new(LayerSpec::new(vec![2, 8, 3]).unwrap(), 3, 1).unwrap();
        let g = MlpGrad::zeros_like(&net);
        assert_eq!(g.param_count(), net.param_count());
        assert_eq!(g.iter_flat().count(), net.param_count());
    }

    #[test]
    fn accumulate_and_scale() {
        let net = Mlp::new(LayerSpec::new(vec![2, 3, 1]).unwrap(), 3, 1).unwrap();
        let mut a = MlpGrad::zeros_like(&net);
        let mut b = MlpGrad::zeros_like(&net);
        b.weights_mut()[0][[0, 0]] = 2.0;
        b.biases_mut()[1][0] = -1.0;
        a.add_assign(&b);
        a.add_assign(&b);
        a.scale(0.5);
        assert_eq!(a.weights()[0][[0, 0]], 2.0);
        assert_eq!(a.biases()[1][0], -1.0);
    }
}
