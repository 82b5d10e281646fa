use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{glorot_uniform, shape_check, Gradients, NeuralError, ParameterSet, Tensor};

/// Layer widths of a tanh MLP, input first, output last. Parameters live in a
/// [`ParameterSet`] as `<name>.w<i>` (shape `[out, in]`) and `<name>.b<i>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpArch {
    pub name: String,
    pub widths: Vec<usize>,
}

/// Activations saved by a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpCache {
    net: String,
    /// Input to each affine layer; entries past the first are tanh outputs.
    layer_inputs: Vec<Vec<f64>>,
}

impl MlpArch {
    pub fn new(name: impl Into<String>, widths: Vec<usize>) -> Self {
        assert!(widths.len() >= 2, "an MLP needs input and output widths");
        Self {
            name: name.into(),
            widths,
        }
    }

    pub fn layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn weight_name(&self, layer: usize) -> String {
        format!("{}.w{layer}", self.name)
    }

    pub fn bias_name(&self, layer: usize) -> String {
        format!("{}.b{layer}", self.name)
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng>(&self, params: &mut ParameterSet, rng: &mut R) {
        for l in 0..self.layers() {
            let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
            params.insert(self.weight_name(l), glorot_uniform(fan_out, fan_in, rng));
            params.insert(self.bias_name(l), Tensor::zeros(vec![fan_out]));
        }
    }

    /// All-zero weights and biases.
    pub fn init_zero(&self, params: &mut ParameterSet) {
        for l in 0..self.layers() {
            let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
            params.insert(self.weight_name(l), Tensor::zeros(vec![fan_out, fan_in]));
            params.insert(self.bias_name(l), Tensor::zeros(vec![fan_out]));
        }
    }

    fn layer<'p>(&self, params: &'p ParameterSet, l: usize) -> Result<(&'p Tensor, &'p Tensor), NeuralError> {
        let w = params.get(&self.weight_name(l))?;
        let b = params.get(&self.bias_name(l))?;
        let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
        shape_check(&self.weight_name(l), fan_in * fan_out, w.len())?;
        shape_check(&self.bias_name(l), fan_out, b.len())?;
        Ok((w, b))
    }

    pub fn forward(&self, params: &ParameterSet, input: &[f64]) -> Result<(Vec<f64>, MlpCache), NeuralError> {
        shape_check(&format!("{} input", self.name), self.input_width(), input.len())?;
        let mut layer_inputs = Vec::with_capacity(self.layers());
        let mut x = input.to_vec();
        for l in 0..self.layers() {
            let (w, b) = self.layer(params, l)?;
            let fan_in = self.widths[l];
            let mut z = b.values.clone();
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &w.values[o * fan_in..(o + 1) * fan_in];
                *zo += row.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
            }
            if l + 1 < self.layers() {
                z.iter_mut().for_each(|v| *v = v.tanh());
            }
            layer_inputs.push(std::mem::replace(&mut x, z));
        }
        Ok((
            x,
            MlpCache {
                net: self.name.clone(),
                layer_inputs,
            },
        ))
    }

    /// Accumulates parameter gradients into `grads` and returns the gradient
    /// with respect to the input.
    pub fn backward(
        &self,
        params: &ParameterSet,
        cache: &MlpCache,
        upstream: &[f64],
        grads: &mut Gradients,
    ) -> Result<Vec<f64>, NeuralError> {
        if cache.net != self.name {
            return Err(NeuralError::MissingTensor(format!(
                "forward cache for '{}' (got '{}')",
                self.name, cache.net
            )));
        }
        shape_check("forward cache depth", self.layers(), cache.layer_inputs.len())?;
        shape_check(&format!("{} upstream", self.name), self.output_width(), upstream.len())?;
        let mut g = upstream.to_vec();
        for l in (0..self.layers()).rev() {
            let (w, _) = self.layer(params, l)?;
            let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
            let a = &cache.layer_inputs[l];
            shape_check("cached activation", fan_in, a.len())?;
            {
                let gw = grads.entry(&self.weight_name(l), &[fan_out, fan_in]);
                for o in 0..fan_out {
                    if g[o] == 0.0 {
                        continue;
                    }
                    let row = &mut gw.values[o * fan_in..(o + 1) * fan_in];
                    for (r, ai) in row.iter_mut().zip(a) {
                        *r += g[o] * ai;
                    }
                }
            }
            {
                let gb = grads.entry(&self.bias_name(l), &[fan_out]);
                for (b, go) in gb.values.iter_mut().zip(&g) {
                    *b += go;
                }
            }
            let mut ga = vec![0.0; fan_in];
            for o in 0..fan_out {
                let row = &w.values[o * fan_in..(o + 1) * fan_in];
                for (gi, wi) in ga.iter_mut().zip(row) {
                    *gi += wi * g[o];
                }
            }
            if l > 0 {
                for (gi, ai) in ga.iter_mut().zip(a) {
                    *gi *= 1.0 - ai * ai;
                }
            }
            g = ga;
        }
        Ok(g)
    }
}

pub fn mlp_forward(
    params: &ParameterSet,
    input: &[f64],
    arch: &MlpArch,
) -> Result<(Vec<f64>, MlpCache), NeuralError> {
    arch.forward(params, input)
}

pub fn mlp_backward(
    params: &ParameterSet,
    arch: &MlpArch,
    cache: &MlpCache,
    upstream: &[f64],
    grads: &mut Gradients,
) -> Result<Vec<f64>, NeuralError> {
    arch.backward(params, cache, upstream, grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::grad_check;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_net_outputs_zero() {
        let arch = MlpArch::new("z", vec![3, 4, 2]);
        let mut p = ParameterSet::new();
        arch.init_zero(&mut p);
        let (y, _) = arch.forward(&p, &[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(y, vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer() {
        let arch = MlpArch::new("id", vec![2, 2]);
        let mut p = ParameterSet::new();
        p.insert("id.w0", Tensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]));
        p.insert("id.b0", Tensor::zeros(vec![2]));
        assert_eq!(arch.forward(&p, &[0.3, -7.0]).unwrap().0, vec![0.3, -7.0]);
    }

    #[test]
    fn hand_evaluated_two_layer() {
        // h = tanh(W0 x + b0), y = W1 h + b1
        let arch = MlpArch::new("n", vec![2, 2, 1]);
        let mut p = ParameterSet::new();
        p.insert("n.w0", Tensor::new(vec![2, 2], vec![0.5, -1.0, 2.0, 0.25]));
        p.insert("n.b0", Tensor::new(vec![2], vec![0.1, -0.2]));
        p.insert("n.w1", Tensor::new(vec![1, 2], vec![1.5, -0.75]));
        p.insert("n.b1", Tensor::new(vec![1], vec![0.3]));
        let x = [0.8, -0.4];
        let h0 = (0.5f64 * 0.8 + (-1.0) * (-0.4) + 0.1).tanh();
        let h1 = (2.0f64 * 0.8 + 0.25 * (-0.4) - 0.2).tanh();
        let expected = 1.5 * h0 - 0.75 * h1 + 0.3;
        let (y, _) = arch.forward(&p, &x).unwrap();
        assert!((y[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn input_shape_checked() {
        let arch = MlpArch::new("z", vec![3, 2]);
        let mut p = ParameterSet::new();
        arch.init_zero(&mut p);
        assert!(matches!(
            arch.forward(&p, &[1.0]),
            Err(NeuralError::ShapeMismatch { expected: 3, actual: 1, .. })
        ));
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let arch = MlpArch::new("n", vec![3, 5, 2]);
        let mut p = ParameterSet::new();
        arch.init(&mut p, &mut ChaCha8Rng::seed_from_u64(3));
        let (_, cache) = arch.forward(&p, &[0.1, 0.2, 0.3]).unwrap();
        let mut g = Gradients::new();
        let gin = arch.backward(&p, &cache, &[0.0, 0.0], &mut g).unwrap();
        assert!(g.is_zero());
        assert!(gin.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_affine_weight_grad_is_outer_product() {
        let arch = MlpArch::new("a", vec![3, 2]);
        let mut p = ParameterSet::new();
        arch.init(&mut p, &mut ChaCha8Rng::seed_from_u64(4));
        let x = [1.0, -2.0, 0.5];
        let up = [0.3, -1.5];
        let (_, cache) = arch.forward(&p, &x).unwrap();
        let mut g = Gradients::new();
        arch.backward(&p, &cache, &up, &mut g).unwrap();
        let gw = &g.get("a.w0").unwrap().values;
        for o in 0..2 {
            for i in 0..3 {
                assert_eq!(gw[o * 3 + i], up[o] * x[i]);
            }
        }
        assert_eq!(g.get("a.b0").unwrap().values, up.to_vec());
    }

    #[test]
    fn cache_from_other_net_rejected() {
        let a = MlpArch::new("a", vec![2, 2]);
        let b = MlpArch::new("b", vec![2, 2]);
        let mut p = ParameterSet::new();
        a.init_zero(&mut p);
        b.init_zero(&mut p);
        let (_, cache) = a.forward(&p, &[0.0, 0.0]).unwrap();
        assert!(b.backward(&p, &cache, &[1.0, 1.0], &mut Gradients::new()).is_err());
    }

    #[test]
    fn random_two_layer_matches_finite_differences() {
        let arch = MlpArch::new("n", vec![4, 6, 3]);
        let mut p = ParameterSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        arch.init(&mut p, &mut rng);
        let x = [0.4, -0.9, 0.2, 0.7];
        let c = [0.5, -1.0, 2.0];
        // loss = c · y + 0.5 |y|^2
        let report = grad_check(&p, 1e-5, 1000, |params| {
            let (y, cache) = arch.forward(params, &x)?;
            let loss = y.iter().zip(&c).map(|(a, b)| a * b + 0.5 * a * a).sum();
            let up: Vec<f64> = y.iter().zip(&c).map(|(a, b)| b + a).collect();
            let mut g = Gradients::new();
            arch.backward(params, &cache, &up, &mut g)?;
            Ok((loss, g))
        })
        .unwrap();
        assert!(report.max_rel_error < 1e-4, "{report:?}");
        assert_eq!(report.coordinates, p.num_values());
    }
}
