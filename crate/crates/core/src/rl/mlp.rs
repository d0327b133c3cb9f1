use nalgebra::{DMatrix, DMatrixView, DVectorView};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fully connected network with `tanh` hidden layers and a linear output.
///
/// All weights and biases live in one flat vector so optimizers, soft
/// updates and checkpoints can treat the network as a single parameter
/// array. Layer `l` stores its `out x in` weight matrix column-major,
/// followed by its bias. Batches are matrices with one sample per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Layer activations from a forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct MlpCache {
    /// `acts[0]` is the input, `acts[l]` the output of layer `l`.
    pub acts: Vec<DMatrix<f64>>,
}

impl MlpCache {
    pub fn output(&self) -> &DMatrix<f64> {
        self.acts.last().expect("cache holds the input at least")
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn new(sizes: &[usize], rng: &mut impl Rng) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Config(format!("invalid layer sizes {sizes:?}")));
        }
        let mut params = Vec::with_capacity(param_count(sizes));
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)));
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params,
        })
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Config(format!("invalid layer sizes {sizes:?}")));
        }
        let expected = param_count(sizes);
        if params.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: params.len(),
            });
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Offsets of the weight and bias blocks of layer `l`.
    fn offsets(&self, l: usize) -> (usize, usize) {
        let w_off = param_count(&self.sizes[..=l]);
        (w_off, w_off + self.sizes[l + 1] * self.sizes[l])
    }

    fn layer(&self, l: usize) -> (DMatrixView<'_, f64>, DVectorView<'_, f64>) {
        let (rows, cols) = (self.sizes[l + 1], self.sizes[l]);
        let (w_off, b_off) = self.offsets(l);
        (
            DMatrixView::from_slice(&self.params[w_off..b_off], rows, cols),
            DVectorView::from_slice(&self.params[b_off..b_off + rows], rows),
        )
    }

    fn check_input(&self, x: &DMatrix<f64>) {
        assert_eq!(
            x.nrows(),
            self.input_dim(),
            "network input has wrong dimension"
        );
    }

    pub fn forward(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.check_input(x);
        let mut a = x.clone();
        for l in 0..self.num_layers() {
            a = self.affine(l, &a);
            if l + 1 < self.num_layers() {
                a.apply(|v| *v = v.tanh());
            }
        }
        a
    }

    pub fn forward_cached(&self, x: &DMatrix<f64>) -> MlpCache {
        self.check_input(x);
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(x.clone());
        for l in 0..self.num_layers() {
            let mut z = self.affine(l, &acts[l]);
            if l + 1 < self.num_layers() {
                z.apply(|v| *v = v.tanh());
            }
            acts.push(z);
        }
        MlpCache { acts }
    }

    fn affine(&self, l: usize, a: &DMatrix<f64>) -> DMatrix<f64> {
        let (w, b) = self.layer(l);
        let mut z = w * a;
        for mut col in z.column_iter_mut() {
            col += b;
        }
        z
    }

    /// Backpropagates `d_out` (gradient of a scalar loss with respect to the
    /// network output, same shape as the output) and returns the gradient
    /// with respect to the input. Parameter gradients are written into
    /// `grad` when given.
    pub fn backward(
        &self,
        cache: &MlpCache,
        d_out: &DMatrix<f64>,
        mut grad: Option<&mut [f64]>,
    ) -> DMatrix<f64> {
        assert_eq!(
            d_out.shape(),
            cache.output().shape(),
            "output gradient has wrong shape"
        );
        if let Some(g) = grad.as_deref() {
            assert_eq!(
                g.len(),
                self.params.len(),
                "gradient buffer has wrong length"
            );
        }
        let mut dz = d_out.clone();
        for l in (0..self.num_layers()).rev() {
            let a_prev = &cache.acts[l];
            if let Some(g) = grad.as_deref_mut() {
                let (w_off, b_off) = self.offsets(l);
                let gw = &dz * a_prev.transpose();
                g[w_off..b_off].copy_from_slice(gw.as_slice());
                for (gb, row) in g[b_off..b_off + dz.nrows()].iter_mut().zip(dz.row_iter()) {
                    *gb = row.sum();
                }
            }
            let (w, _) = self.layer(l);
            let mut da = w.transpose() * &dz;
            if l > 0 {
                da.zip_apply(a_prev, |d, a| *d *= 1.0 - a * a);
            }
            dz = da;
        }
        dz
    }

    /// `self <- (1 - tau) self + tau online`.
    pub fn soft_update_from(&mut self, online: &Mlp, tau: f64) -> Result<()> {
        if self.sizes != online.sizes {
            return Err(Error::Dimension {
                expected: self.params.len(),
                got: online.params.len(),
            });
        }
        for (t, o) in self.params.iter_mut().zip(&online.params) {
            *t = (1.0 - tau) * *t + tau * o;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net(sizes: &[usize]) -> Mlp {
        Mlp::new(sizes, &mut ChaCha8Rng::seed_from_u64(3)).unwrap()
    }

    #[test]
    fn param_layout() {
        let m = net(&[3, 4, 2]);
        assert_eq!(m.num_params(), 3 * 4 + 4 + 4 * 2 + 2);
        assert!(Mlp::from_params(&[3, 4, 2], vec![0.0; 5]).is_err());
    }

    #[test]
    fn forward_matches_hand_computation() {
        // 1 -> 1 -> 1: y = w2 tanh(w1 x + b1) + b2
        let m = Mlp::from_params(&[1, 1, 1], vec![0.5, 0.1, -2.0, 0.3]).unwrap();
        let y = m.forward(&DMatrix::from_element(1, 1, 2.0));
        assert!((y[0] - (-2.0 * (1.1f64).tanh() + 0.3)).abs() < 1e-15);
    }

    #[test]
    fn forward_is_columnwise() {
        let m = net(&[3, 5, 2]);
        let x = DMatrix::from_fn(3, 4, |i, j| (i as f64 - j as f64) * 0.3);
        let y = m.forward(&x);
        for j in 0..4 {
            let yj = m.forward(&x.columns(j, 1).into_owned());
            assert_eq!(yj.column(0), y.column(j));
        }
    }

    #[test]
    fn soft_update_limits() {
        let online = Mlp::from_params(&[1, 1], vec![0.0, 0.0]).unwrap();
        let mut target = Mlp::from_params(&[1, 1], vec![1.0, 1.0]).unwrap();
        target.soft_update_from(&online, 0.0).unwrap();
        assert_eq!(target.params(), &[1.0, 1.0]);
        target.soft_update_from(&online, 0.005).unwrap();
        assert!((target.params()[0] - 0.995).abs() < 1e-15);
        target.soft_update_from(&online, 1.0).unwrap();
        assert_eq!(target, online);
        let other = Mlp::from_params(&[2, 1], vec![0.0; 3]).unwrap();
        assert!(target.soft_update_from(&other, 0.5).is_err());
    }
}
