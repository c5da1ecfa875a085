//! The two-layer ReLU network `f(x) = Σ_k v_k·max(0, w_kᵀx − b_k) + β`, its
//! squared loss and gradient, and the normalized reduced form.
//!
//! Parameters live in one flat vector laid out as `[w (K×d, row-major), b (K),
//! v (K), β]`. Gradients, Hessian-vector products and checkpoints all use the
//! same layout.

mod checkpoint;
mod dataset;
mod reduced;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use dataset::{Dataset, GroundTruth};
pub use reduced::{Atom, ReducedForm, MERGE_TOL};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};
use crate::numerics::SeededRng;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoLayerNet {
    d: usize,
    k: usize,
    params: Vec<f64>,
}

/// Number of scalar parameters of a width-`k` network on ℝ^d.
pub fn param_count(d: usize, k: usize) -> usize {
    k * (d + 2) + 1
}

impl TwoLayerNet {
    /// Builds a network from its flat parameter vector.
    pub fn from_flat(d: usize, k: usize, params: Vec<f64>) -> Result<Self> {
        if d == 0 || k == 0 {
            return Err(invalid(format!("network needs d >= 1 and K >= 1 (got d={d}, K={k})")));
        }
        if params.len() != param_count(d, k) {
            return Err(invalid(format!(
                "expected {} parameters for d={d}, K={k}, got {}",
                param_count(d, k),
                params.len()
            )));
        }
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(format!("parameter {i} is {}", params[i])));
        }
        Ok(Self { d, k, params })
    }

    pub fn from_parts(w: &[Vec<f64>], b: &[f64], v: &[f64], beta: f64) -> Result<Self> {
        let k = w.len();
        if k == 0 || b.len() != k || v.len() != k {
            return Err(invalid("w, b and v must have the same positive length"));
        }
        let d = w[0].len();
        if w.iter().any(|row| row.len() != d) {
            return Err(invalid("all input-weight vectors must have the same dimension"));
        }
        let mut params = Vec::with_capacity(param_count(d, k));
        w.iter().for_each(|row| params.extend_from_slice(row));
        params.extend_from_slice(b);
        params.extend_from_slice(v);
        params.push(beta);
        Self::from_flat(d, k, params)
    }

    pub fn zeros(d: usize, k: usize) -> Result<Self> {
        Self::from_flat(d, k, vec![0.0; param_count(d, k)])
    }

    /// Fan-in Kaiming initialization: `w ~ N(0, 2/d)`, `v ~ N(0, 2/K)`,
    /// zero biases and zero output bias.
    pub fn kaiming_init(rng: &mut SeededRng, d: usize, k: usize) -> Result<Self> {
        let mut net = Self::zeros(d, k)?;
        let wd = Normal::new(0.0, (2.0 / d as f64).sqrt()).expect("valid std");
        let vd = Normal::new(0.0, (2.0 / k as f64).sqrt()).expect("valid std");
        for p in &mut net.params[..k * d] {
            *p = wd.sample(rng);
        }
        let v_start = k * (d + 1);
        for p in &mut net.params[v_start..v_start + k] {
            *p = vd.sample(rng);
        }
        Ok(net)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn width(&self) -> usize {
        self.k
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Replaces the parameter vector, keeping the shape.
    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(invalid("parameter vector has the wrong length"));
        }
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(format!("parameter {i} is {}", params[i])));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    pub fn w(&self) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((self.k, self.d), &self.params[..self.k * self.d]).expect("layout")
    }

    pub fn w_row(&self, k: usize) -> &[f64] {
        &self.params[k * self.d..(k + 1) * self.d]
    }

    pub fn b(&self) -> &[f64] {
        let s = self.k * self.d;
        &self.params[s..s + self.k]
    }

    pub fn v(&self) -> &[f64] {
        let s = self.k * (self.d + 1);
        &self.params[s..s + self.k]
    }

    pub fn beta(&self) -> f64 {
        self.params[self.params.len() - 1]
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.d {
            return Err(invalid(format!("input has dimension {d}, network expects {}", self.d)));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        let mut out = self.beta();
        for (k, (&bk, &vk)) in self.b().iter().zip(self.v()).enumerate() {
            let z = crate::numerics::dot(self.w_row(k), x) - bk;
            if z > 0.0 {
                out += vk * z;
            }
        }
        Ok(out)
    }

    /// Pre-activations `Z[i, k] = w_kᵀx_i − b_k`.
    pub fn preactivations(&self, xs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_dim(xs.ncols())?;
        let mut z = times_transpose(xs, self.w());
        let b = ArrayView1::from(self.b());
        z -= &b.insert_axis(Axis(0));
        Ok(z)
    }

    /// Network outputs on every row of `xs`.
    pub fn forward_batch(&self, xs: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        let mut z = self.preactivations(xs)?;
        z.mapv_inplace(relu);
        let mut out = z.dot(&ArrayView1::from(self.v()));
        out += self.beta();
        Ok(out)
    }

    /// `(1/2n) Σ (y_i − f(x_i))²`.
    pub fn loss(&self, data: &Dataset) -> Result<f64> {
        let f = self.forward_batch(data.inputs())?;
        let n = data.len() as f64;
        Ok(f.iter().zip(data.labels()).map(|(fi, yi)| (fi - yi).powi(2)).sum::<f64>() / (2.0 * n))
    }

    /// Exact loss gradient in the flat layout, using `φ'(0) = 0`.
    pub fn grad(&self, data: &Dataset) -> Result<Vec<f64>> {
        Ok(self.loss_and_grad(data)?.1)
    }

    pub fn loss_and_grad(&self, data: &Dataset) -> Result<(f64, Vec<f64>)> {
        let xs = data.inputs();
        self.check_dim(xs.ncols())?;
        let (d, k) = (self.d, self.k);
        let n = data.len() as f64;
        let (b, v, beta) = (self.b(), self.v(), self.beta());

        // Activations in place of the pre-activations; a > 0 exactly where z > 0.
        let mut a = times_transpose(xs, self.w());
        let mut resid = Vec::with_capacity(data.len());
        for (mut row, &y) in a.rows_mut().into_iter().zip(data.labels()) {
            let row = row.as_slice_mut().expect("standard layout");
            let mut f = beta;
            for ((ak, &bk), &vk) in row.iter_mut().zip(b).zip(v) {
                *ak = relu(*ak - bk);
                f += vk * *ak;
            }
            resid.push(f - y);
        }
        let loss = resid.iter().map(|r| r * r).sum::<f64>() / (2.0 * n);

        let mut g = vec![0.0; param_count(d, k)];
        let (gw_part, rest) = g.split_at_mut(k * d);
        let (gb, rest) = rest.split_at_mut(k);
        let (gv, gbeta) = rest.split_at_mut(k);
        // Overwrite a with M[i, k] = r_i v_k 1{z_ik > 0} / n after using it for ∂v.
        for (mut row, &ri) in a.rows_mut().into_iter().zip(&resid) {
            let row = row.as_slice_mut().expect("standard layout");
            let rn = ri / n;
            for (((ak, &vk), gvk), gbk) in row.iter_mut().zip(v).zip(gv.iter_mut()).zip(gb.iter_mut()) {
                if *ak > 0.0 {
                    *gvk += *ak * rn;
                    let m = rn * vk;
                    *gbk -= m;
                    *ak = m;
                } else {
                    *ak = 0.0;
                }
            }
        }
        transpose_times(a.view(), xs, gw_part);
        gbeta[0] = resid.iter().sum::<f64>() / n;
        Ok((loss, g))
    }

    /// Normalized reduced form, valid on the closed ball of radius `radius`.
    pub fn to_reduced_form(&self, radius: f64) -> Result<ReducedForm> {
        ReducedForm::from_net(self, radius)
    }
}

/// Below this input dimension, `X Wᵀ` and `Mᵀ X` are computed by plain loops,
/// which beat the blocked matrix product when one side is this thin.
pub(crate) const THIN_DIM: usize = 4;

/// `X Wᵀ` (`n × K`, row-major) for a row-major `K × d` weight block.
pub(crate) fn times_transpose(xs: ArrayView2<'_, f64>, w: ArrayView2<'_, f64>) -> Array2<f64> {
    if xs.ncols() > THIN_DIM {
        return row_major(xs.dot(&w.t()));
    }
    let (n, k) = (xs.nrows(), w.nrows());
    let mut out = Array2::zeros((n, k));
    for (mut orow, x) in out.rows_mut().into_iter().zip(xs.rows()) {
        for (o, wk) in orow.iter_mut().zip(w.rows()) {
            *o = wk.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        }
    }
    out
}

/// `Mᵀ X` as a flat row-major `K × d` block.
pub(crate) fn transpose_times(m: ArrayView2<'_, f64>, xs: ArrayView2<'_, f64>, out: &mut [f64]) {
    let d = xs.ncols();
    if d > THIN_DIM {
        let g = m.t().dot(&xs);
        out.copy_from_slice(g.as_standard_layout().as_slice().expect("standard layout"));
        return;
    }
    out.fill(0.0);
    for (mrow, x) in m.rows().into_iter().zip(xs.rows()) {
        for (&mik, o) in mrow.iter().zip(out.chunks_exact_mut(d)) {
            if mik != 0.0 {
                for (oj, xj) in o.iter_mut().zip(x.iter()) {
                    *oj += mik * xj;
                }
            }
        }
    }
}

/// `a` in row-major layout (products with one unit dimension may come back column-major).
pub(crate) fn row_major(a: Array2<f64>) -> Array2<f64> {
    if a.is_standard_layout() {
        a
    } else {
        a.as_standard_layout().into_owned()
    }
}

#[inline]
pub(crate) fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sample_uniform_ball;

    fn naive_forward(net: &TwoLayerNet, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..net.width() {
            let mut z = -net.b()[k];
            for j in 0..net.dim() {
                z += net.w_row(k)[j] * x[j];
            }
            s += net.v()[k] * z.max(0.0);
        }
        s + net.beta()
    }

    fn random_data(rng: &mut SeededRng, d: usize, n: usize) -> Dataset {
        let xs = sample_uniform_ball(rng, d, n).unwrap();
        let ys = crate::numerics::sample_gaussian(rng, 1.0, n).unwrap();
        Dataset::new(xs, ys).unwrap()
    }

    #[test]
    fn constant_net() {
        let mut p = vec![0.0; param_count(2, 3)];
        *p.last_mut().unwrap() = 0.7;
        let net = TwoLayerNet::from_flat(2, 3, p).unwrap();
        assert_eq!(net.forward(&[0.3, -0.1]).unwrap(), 0.7);
    }

    #[test]
    fn single_neuron() {
        let net = TwoLayerNet::from_parts(&[vec![1.0, 0.0]], &[0.0], &[1.0], 0.0).unwrap();
        assert_eq!(net.forward(&[0.5, -0.9]).unwrap(), 0.5);
        assert!(net.forward(&[0.5]).is_err());
    }

    #[test]
    fn batch_matches_naive_evaluator() {
        let mut rng = SeededRng::new(3);
        let net = TwoLayerNet::kaiming_init(&mut rng, 4, 7).unwrap();
        let xs = sample_uniform_ball(&mut rng, 4, 100).unwrap();
        let batch = net.forward_batch(xs.view()).unwrap();
        for (row, fb) in xs.rows().into_iter().zip(batch.iter()) {
            let x = row.to_vec();
            let naive = naive_forward(&net, &x);
            assert!((naive - fb).abs() < 1e-12);
            assert!((naive - net.forward(&x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_single_point() {
        let net = TwoLayerNet::zeros(1, 1).unwrap();
        let data = Dataset::new(Array2::from_elem((1, 1), 0.2), vec![2.0]).unwrap();
        assert_eq!(net.loss(&data).unwrap(), 2.0);
    }

    #[test]
    fn loss_matches_naive_sum() {
        let mut rng = SeededRng::new(5);
        let net = TwoLayerNet::kaiming_init(&mut rng, 3, 5).unwrap();
        let data = random_data(&mut rng, 3, 20);
        let mut s = 0.0;
        for (row, y) in data.inputs().rows().into_iter().zip(data.labels()) {
            s += (y - naive_forward(&net, &row.to_vec())).powi(2);
        }
        assert!((net.loss(&data).unwrap() - s / 40.0).abs() < 1e-12);
    }

    #[test]
    fn output_bias_gradient_is_mean_residual() {
        let mut rng = SeededRng::new(6);
        let net = TwoLayerNet::kaiming_init(&mut rng, 2, 4).unwrap();
        let data = random_data(&mut rng, 2, 9);
        let f = net.forward_batch(data.inputs()).unwrap();
        let mean: f64 = f.iter().zip(data.labels()).map(|(a, b)| a - b).sum::<f64>() / 9.0;
        let g = net.grad(&data).unwrap();
        assert!((g.last().unwrap() - mean).abs() < 1e-14);
    }

    #[test]
    fn zero_residuals_give_zero_gradient() {
        let mut rng = SeededRng::new(7);
        let net = TwoLayerNet::kaiming_init(&mut rng, 3, 4).unwrap();
        let xs = sample_uniform_ball(&mut rng, 3, 6).unwrap();
        let ys = net.forward_batch(xs.view()).unwrap().to_vec();
        let data = Dataset::new(xs, ys).unwrap();
        assert!(net.loss(&data).unwrap() < 1e-30);
        assert!(net.grad(&data).unwrap().iter().all(|g| g.abs() < 1e-15));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = SeededRng::new(8);
        let net = TwoLayerNet::kaiming_init(&mut rng, 3, 4).unwrap();
        let data = random_data(&mut rng, 3, 8);
        let g = net.grad(&data).unwrap();
        let h = 1e-5;
        for i in 0..net.params().len() {
            let mut p = net.params().to_vec();
            p[i] += h;
            let up = TwoLayerNet::from_flat(3, 4, p.clone()).unwrap().loss(&data).unwrap();
            p[i] -= 2.0 * h;
            let down = TwoLayerNet::from_flat(3, 4, p).unwrap().loss(&data).unwrap();
            let fd = (up - down) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-5 * g[i].abs().max(1e-3), "coord {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn kaiming_shapes_and_variance() {
        let mut rng = SeededRng::new(9);
        let net = TwoLayerNet::kaiming_init(&mut rng, 10, 2048).unwrap();
        assert_eq!(net.w().dim(), (2048, 10));
        assert_eq!(net.b().len(), 2048);
        assert_eq!(net.v().len(), 2048);
        assert!(net.b().iter().all(|&b| b == 0.0));
        assert_eq!(net.beta(), 0.0);
        let w = net.w();
        let var = w.iter().map(|x| x * x).sum::<f64>() / w.len() as f64;
        assert!((0.18..=0.22).contains(&var), "{var}");
        let again = TwoLayerNet::kaiming_init(&mut SeededRng::new(9), 10, 2048).unwrap();
        assert_eq!(net, again);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(TwoLayerNet::from_flat(0, 1, vec![0.0]).is_err());
        assert!(TwoLayerNet::from_flat(2, 1, vec![0.0; 4]).is_err());
        assert!(TwoLayerNet::from_flat(1, 1, vec![0.0, 0.0, f64::NAN, 0.0]).is_err());
    }
}
