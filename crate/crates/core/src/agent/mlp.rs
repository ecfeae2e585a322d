//! Dense multilayer perceptron with rectifier hidden layers and manual
//! backpropagation. Weight matrices are flat row-major (out x in).

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    /// Bounded squashing for the actor.
    Tanh,
    /// Raw linear output for the critic.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    /// weights[l] has shape sizes[l+1] x sizes[l], row-major.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    output: OutputActivation,
}

/// Post-activation values of every layer, input first.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().unwrap()
    }
}

/// Gradients with respect to all parameters and to the input.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub dw: Vec<Vec<f64>>,
    pub db: Vec<Vec<f64>>,
    pub dinput: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            dw: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            db: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            dinput: vec![0.0; net.sizes[0]],
        }
    }

    pub fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (a, b) in self.dw.iter_mut().zip(&other.dw) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
        for (a, b) in self.db.iter_mut().zip(&other.db) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
        for (x, y) in self.dinput.iter_mut().zip(&other.dinput) {
            *x += scale * y;
        }
    }
}

impl Mlp {
    /// Random init with uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    pub fn random<R: Rng>(sizes: &[usize], output: OutputActivation, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output layers");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = 1.0 / libm::sqrt(fan_in as f64);
            weights.push((0..fan_in * fan_out).map(|_| rng.gen_range(-bound..=bound)).collect());
            biases.push((0..fan_out).map(|_| rng.gen_range(-bound..=bound)).collect());
        }
        Self { sizes: sizes.to_vec(), weights, biases, output }
    }

    /// Shrinks the output layer's parameters. Small final-layer init
    /// keeps early policies near zero, which stabilizes training.
    pub fn scale_final_layer(&mut self, scale: f64) {
        for w in self.weights.last_mut().unwrap() {
            *w *= scale;
        }
        for b in self.biases.last_mut().unwrap() {
            *b *= scale;
        }
    }

    /// Zeroes the final-layer weights and bias of the given output
    /// units, pinning those outputs to the activation of zero.
    pub fn zero_output_units(&mut self, units: core::ops::Range<usize>) {
        let in_dim = self.sizes[self.sizes.len() - 2];
        let weights = self.weights.last_mut().unwrap();
        let biases = self.biases.last_mut().unwrap();
        for u in units {
            for w in &mut weights[u * in_dim..(u + 1) * in_dim] {
                *w = 0.0;
            }
            biases[u] = 0.0;
        }
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn forward(&self, input: &[f64]) -> Result<ForwardCache, SimError> {
        if input.len() != self.sizes[0] {
            return Err(SimError::Shape { expected: self.sizes[0], got: input.len() });
        }
        let n_layers = self.weights.len();
        let mut activations = Vec::with_capacity(n_layers + 1);
        activations.push(input.to_vec());
        for l in 0..n_layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let prev = &activations[l];
            let w = &self.weights[l];
            let mut out = self.biases[l].clone();
            for o in 0..n_out {
                let row = &w[o * n_in..(o + 1) * n_in];
                let mut acc = 0.0;
                for (wi, ai) in row.iter().zip(prev.iter()) {
                    acc += wi * ai;
                }
                out[o] += acc;
            }
            let last = l == n_layers - 1;
            for v in out.iter_mut() {
                *v = if last {
                    match self.output {
                        OutputActivation::Tanh => libm::tanh(*v),
                        OutputActivation::Identity => *v,
                    }
                } else if *v < 0.0 {
                    0.0
                } else {
                    *v
                };
            }
            activations.push(out);
        }
        Ok(ForwardCache { activations })
    }

    /// Backpropagates `upstream` (dLoss/dOutput) through the cached
    /// forward pass.
    pub fn backward(&self, cache: &ForwardCache, upstream: &[f64]) -> Result<Gradients, SimError> {
        let n_layers = self.weights.len();
        if cache.activations.len() != n_layers + 1 {
            return Err(SimError::Shape { expected: n_layers + 1, got: cache.activations.len() });
        }
        if upstream.len() != self.output_dim() {
            return Err(SimError::Shape { expected: self.output_dim(), got: upstream.len() });
        }
        let mut grads = Gradients::zeros_like(self);
        // Delta at the output, through the output activation.
        let out = cache.output();
        let mut delta: Vec<f64> = match self.output {
            OutputActivation::Tanh => {
                upstream.iter().zip(out).map(|(u, y)| u * (1.0 - y * y)).collect()
            }
            OutputActivation::Identity => upstream.to_vec(),
        };
        for l in (0..n_layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let prev = &cache.activations[l];
            let w = &self.weights[l];
            let dw = &mut grads.dw[l];
            for o in 0..n_out {
                let d = delta[o];
                grads.db[l][o] = d;
                let row = &mut dw[o * n_in..(o + 1) * n_in];
                for (g, a) in row.iter_mut().zip(prev.iter()) {
                    *g = d * a;
                }
            }
            let mut dprev = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                let row = &w[o * n_in..(o + 1) * n_in];
                for (dp, wi) in dprev.iter_mut().zip(row.iter()) {
                    *dp += d * wi;
                }
            }
            if l > 0 {
                // Rectifier derivative via the post-activation sign.
                for (dp, a) in dprev.iter_mut().zip(prev.iter()) {
                    if *a <= 0.0 {
                        *dp = 0.0;
                    }
                }
            }
            delta = dprev;
        }
        grads.dinput = delta;
        Ok(grads)
    }

    /// theta += step * gradient (use a negative step for descent).
    pub fn apply_gradient(&mut self, grads: &Gradients, step: f64) {
        for (w, dw) in self.weights.iter_mut().zip(&grads.dw) {
            for (x, g) in w.iter_mut().zip(dw) {
                *x += step * g;
            }
        }
        for (b, db) in self.biases.iter_mut().zip(&grads.db) {
            for (x, g) in b.iter_mut().zip(db) {
                *x += step * g;
            }
        }
    }

    /// target = tau * online + (1 - tau) * target, elementwise.
    pub fn soft_update_from(&mut self, online: &Mlp, tau: f64) {
        for (t, o) in self.weights.iter_mut().zip(&online.weights) {
            for (x, y) in t.iter_mut().zip(o) {
                *x = tau * y + (1.0 - tau) * *x;
            }
        }
        for (t, o) in self.biases.iter_mut().zip(&online.biases) {
            for (x, y) in t.iter_mut().zip(o) {
                *x = tau * y + (1.0 - tau) * *x;
            }
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// All parameters flattened, weights then bias per layer.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<(), SimError> {
        if flat.len() != self.param_count() {
            return Err(SimError::Shape { expected: self.param_count(), got: flat.len() });
        }
        let mut at = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            let wn = w.len();
            w.copy_from_slice(&flat[at..at + wn]);
            at += wn;
            let bn = b.len();
            b.copy_from_slice(&flat[at..at + bn]);
            at += bn;
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.weights.iter().chain(&self.biases).all(|v| v.iter().all(|x| x.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    #[test]
    fn zero_net_tanh_outputs_zero() {
        let mut net = Mlp::random(&[3, 4, 2], OutputActivation::Tanh, &mut rng(0));
        let zeros = vec![0.0; net.param_count()];
        net.set_params_flat(&zeros).unwrap();
        let out = net.forward(&[0.4, -0.2, 1.0]).unwrap();
        assert_eq!(out.output(), &[0.0, 0.0]);
    }

    #[test]
    fn single_layer_identity_matches_matvec() {
        let mut net = Mlp::random(&[2, 2], OutputActivation::Identity, &mut rng(0));
        // W = [[1, 2], [3, 4]], b = [0.5, -0.5]
        net.set_params_flat(&[1.0, 2.0, 3.0, 4.0, 0.5, -0.5]).unwrap();
        let out = net.forward(&[1.0, -1.0]).unwrap();
        assert_eq!(out.output(), &[1.0 - 2.0 + 0.5, 3.0 - 4.0 - 0.5]);
    }

    // Independent naive matrix-arithmetic oracle for the forward pass.
    fn naive_forward(net: &Mlp, input: &[f64]) -> Vec<f64> {
        let sizes = net.layer_sizes();
        let flat = net.params_flat();
        let mut at = 0;
        let mut x = input.to_vec();
        for l in 0..sizes.len() - 1 {
            let (n_in, n_out) = (sizes[l], sizes[l + 1]);
            let w = &flat[at..at + n_in * n_out];
            at += n_in * n_out;
            let b = &flat[at..at + n_out];
            at += n_out;
            let mut y = vec![0.0; n_out];
            for o in 0..n_out {
                y[o] = b[o] + (0..n_in).map(|j| w[o * n_in + j] * x[j]).sum::<f64>();
            }
            if l == sizes.len() - 2 {
                if net.output_activation() == OutputActivation::Tanh {
                    for v in y.iter_mut() {
                        *v = v.tanh();
                    }
                }
            } else {
                for v in y.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            x = y;
        }
        x
    }

    #[test]
    fn forward_matches_naive_oracle() {
        let mut r = rng(3);
        for _ in 0..10 {
            let net = Mlp::random(&[4, 8, 2], OutputActivation::Tanh, &mut r);
            let input: Vec<f64> = (0..4).map(|_| r.gen_range(-1.0..1.0)).collect();
            let got = net.forward(&input).unwrap();
            let want = naive_forward(&net, &input);
            for (g, w) in got.output().iter().zip(&want) {
                assert!((g - w).abs() < 1e-12);
            }
        }
    }

    /// Central finite differences of a scalar loss over every parameter.
    fn fd_param_grads(net: &Mlp, loss: impl Fn(&Mlp) -> f64, h: f64) -> Vec<f64> {
        let base = net.params_flat();
        let mut grads = vec![0.0; base.len()];
        for k in 0..base.len() {
            let mut plus = net.clone();
            let mut minus = net.clone();
            let mut p = base.clone();
            p[k] += h;
            plus.set_params_flat(&p).unwrap();
            p[k] = base[k] - h;
            minus.set_params_flat(&p).unwrap();
            grads[k] = (loss(&plus) - loss(&minus)) / (2.0 * h);
        }
        grads
    }

    fn flat_grads(net: &Mlp, g: &Gradients) -> Vec<f64> {
        let mut out = Vec::with_capacity(net.param_count());
        for (dw, db) in g.dw.iter().zip(&g.db) {
            out.extend_from_slice(dw);
            out.extend_from_slice(db);
        }
        out
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut r = rng(7);
        for trial in 0..5 {
            let net = Mlp::random(&[3, 6, 2], OutputActivation::Tanh, &mut r);
            let input: Vec<f64> = (0..3).map(|_| r.gen_range(-1.0..1.0)).collect();
            let target: Vec<f64> = (0..2).map(|_| r.gen_range(-0.5..0.5)).collect();
            // loss = 0.5 * ||out - target||^2
            let loss = |n: &Mlp| -> f64 {
                let out = n.forward(&input).unwrap();
                out.output().iter().zip(&target).map(|(o, t)| 0.5 * (o - t) * (o - t)).sum()
            };
            let cache = net.forward(&input).unwrap();
            let upstream: Vec<f64> =
                cache.output().iter().zip(&target).map(|(o, t)| o - t).collect();
            let analytic = flat_grads(&net, &net.backward(&cache, &upstream).unwrap());
            let numeric = fd_param_grads(&net, loss, 1e-5);
            for (k, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
                let scale = a.abs().max(n.abs()).max(1e-8);
                assert!(
                    (a - n).abs() / scale <= 1e-4,
                    "trial {trial} param {k}: analytic {a} vs numeric {n}"
                );
            }
        }
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let mut r = rng(11);
        let net = Mlp::random(&[4, 5, 1], OutputActivation::Identity, &mut r);
        let input: Vec<f64> = (0..4).map(|_| r.gen_range(-1.0..1.0)).collect();
        let cache = net.forward(&input).unwrap();
        let analytic = net.backward(&cache, &[1.0]).unwrap().dinput;
        let h = 1e-5;
        for k in 0..input.len() {
            let mut plus = input.clone();
            plus[k] += h;
            let mut minus = input.clone();
            minus[k] -= h;
            let numeric = (net.forward(&plus).unwrap().output()[0]
                - net.forward(&minus).unwrap().output()[0])
                / (2.0 * h);
            let scale = analytic[k].abs().max(numeric.abs()).max(1e-8);
            assert!((analytic[k] - numeric).abs() / scale <= 1e-4);
        }
    }

    #[test]
    fn zero_upstream_zero_gradients() {
        let net = Mlp::random(&[3, 4, 2], OutputActivation::Tanh, &mut rng(5));
        let cache = net.forward(&[0.1, 0.2, 0.3]).unwrap();
        let g = net.backward(&cache, &[0.0, 0.0]).unwrap();
        assert!(flat_grads(&net, &g).iter().all(|x| *x == 0.0));
        assert!(g.dinput.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn gradient_of_sum_is_sum_of_gradients() {
        let net = Mlp::random(&[3, 4, 2], OutputActivation::Identity, &mut rng(6));
        let cache = net.forward(&[0.3, -0.1, 0.8]).unwrap();
        let g1 = net.backward(&cache, &[1.0, 0.0]).unwrap();
        let g2 = net.backward(&cache, &[0.0, 1.0]).unwrap();
        let gsum = net.backward(&cache, &[1.0, 1.0]).unwrap();
        let mut combined = Gradients::zeros_like(&net);
        combined.add_scaled(&g1, 1.0);
        combined.add_scaled(&g2, 1.0);
        for (a, b) in flat_grads(&net, &gsum).iter().zip(flat_grads(&net, &combined)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let net = Mlp::random(&[3, 2], OutputActivation::Tanh, &mut rng(1));
        assert!(net.forward(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn soft_update_endpoints() {
        let mut r = rng(8);
        let online = Mlp::random(&[2, 3, 1], OutputActivation::Identity, &mut r);
        let target0 = Mlp::random(&[2, 3, 1], OutputActivation::Identity, &mut r);
        let mut frozen = target0.clone();
        frozen.soft_update_from(&online, 0.0);
        assert_eq!(frozen.params_flat(), target0.params_flat());
        let mut copied = target0.clone();
        copied.soft_update_from(&online, 1.0);
        assert_eq!(copied.params_flat(), online.params_flat());
    }

    #[test]
    fn params_roundtrip() {
        let net = Mlp::random(&[3, 5, 2], OutputActivation::Tanh, &mut rng(9));
        let mut other = Mlp::random(&[3, 5, 2], OutputActivation::Tanh, &mut rng(10));
        other.set_params_flat(&net.params_flat()).unwrap();
        assert_eq!(net.params_flat(), other.params_flat());
    }

    use rand::Rng;
}
