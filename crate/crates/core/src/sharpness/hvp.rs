use log::warn;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{invalid, Result};
use crate::numerics::{power_iteration_from, EigenEstimate, PowerOptions, SeededRng};
use crate::relu_net::{param_count, row_major, times_transpose, transpose_times, Dataset, TwoLayerNet};

/// Pre-activations closer than this to zero trigger a warning: the loss is
/// not twice differentiable there and `1{z > 0}` is used as is.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// The loss Hessian at a fixed parameter point, applied matrix-free.
///
/// `H δ = (1/n) Σ_i (∇f_iᵀδ) ∇f_i + (1/n) Σ_i r_i ∇²f_i δ`, with `r_i = f_i − y_i`.
/// `∇²f_i` only couples `v_k` with `(w_k, b_k)` through the active indicator.
pub struct HessianOperator<'a> {
    xs: ArrayView2<'a, f64>,
    d: usize,
    k: usize,
    v: Vec<f64>,
    acts: Array2<f64>,
    resid: Array1<f64>,
    gauss_newton_only: bool,
}

impl<'a> HessianOperator<'a> {
    pub fn new(net: &TwoLayerNet, data: &'a Dataset) -> Result<Self> {
        let xs = data.inputs();
        let z = net.preactivations(xs)?;
        let near = z.iter().filter(|z| z.abs() < BOUNDARY_TOL).count();
        if near > 0 {
            warn!("{near} pre-activations lie within {BOUNDARY_TOL:e} of an activation boundary; using 1{{z > 0}}");
        }
        let acts = row_major(z.mapv(|z| z.max(0.0)));
        let mut resid = acts.dot(&ArrayView1::from(net.v()));
        resid += net.beta();
        resid -= &ArrayView1::from(data.labels());
        Ok(Self {
            xs,
            d: net.dim(),
            k: net.width(),
            v: net.v().to_vec(),
            acts,
            resid,
            gauss_newton_only: false,
        })
    }

    /// Same point, residual term dropped: the (PSD) Gauss–Newton matrix.
    pub fn gauss_newton(mut self) -> Self {
        self.gauss_newton_only = true;
        self
    }

    pub fn dim(&self) -> usize {
        param_count(self.d, self.k)
    }

    pub fn apply(&self, delta: &[f64], out: &mut [f64]) {
        let (d, k) = (self.d, self.k);
        let n = self.xs.nrows() as f64;
        let dw = ArrayView2::from_shape((k, d), &delta[..k * d]).expect("layout");
        let db = &delta[k * d..k * (d + 1)];
        let dv = &delta[k * (d + 1)..k * (d + 2)];
        let dbeta = delta[k * (d + 2)];
        let with_resid = !self.gauss_newton_only;

        out.fill(0.0);
        let (ow, rest) = out.split_at_mut(k * d);
        let (ob, rest) = rest.split_at_mut(k);
        let (ov, obeta) = rest.split_at_mut(k);

        // P[i, k] = x_iᵀδw_k, later overwritten by the w-block weights M[i, k].
        let mut p = times_transpose(self.xs, dw);
        let mut s_sum = 0.0;
        for ((mut prow, arow), &ri) in p.rows_mut().into_iter().zip(self.acts.rows()).zip(self.resid.iter()) {
            let prow = prow.as_slice_mut().expect("standard layout");
            let arow = arow.to_slice().expect("standard layout");
            // s_i = (J δ)_i
            let mut si = dbeta;
            for ((((pk, &ak), &vk), &dvk), &dbk) in prow.iter_mut().zip(arow).zip(&self.v).zip(dv).zip(db) {
                if ak > 0.0 {
                    *pk -= dbk;
                    si += ak * dvk + *pk * vk;
                }
            }
            s_sum += si;
            let r = if with_resid { ri } else { 0.0 };
            for ((((pk, &ak), &vk), &dvk), (obk, ovk)) in
                prow.iter_mut().zip(arow).zip(&self.v).zip(dv).zip(ob.iter_mut().zip(ov.iter_mut()))
            {
                if ak > 0.0 {
                    *ovk += (ak * si + r * *pk) / n;
                    let m = (si * vk + r * dvk) / n;
                    *obk -= m;
                    *pk = m;
                } else {
                    *pk = 0.0;
                }
            }
        }
        transpose_times(p.view(), self.xs, ow);
        obeta[0] = s_sum / n;
    }

    /// Largest algebraic eigenvalue, optionally warm-started.
    pub fn lambda_max(&self, opts: PowerOptions, start: Option<&[f64]>, rng: &mut SeededRng) -> Result<EigenEstimate> {
        power_iteration_from(|x, y| self.apply(x, y), self.dim(), start, opts, rng)
    }
}

/// `(∇²L)·vec` in the flat parameter layout.
pub fn hessian_vector_product(net: &TwoLayerNet, data: &Dataset, vec: &[f64]) -> Result<Vec<f64>> {
    if vec.len() != net.params().len() {
        return Err(invalid(format!(
            "vector has length {}, expected {}",
            vec.len(),
            net.params().len()
        )));
    }
    let op = HessianOperator::new(net, data)?;
    let mut out = vec![0.0; vec.len()];
    op.apply(vec, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dot, sample_gaussian, sample_uniform_ball};

    fn instance(seed: u64, d: usize, k: usize, n: usize) -> (TwoLayerNet, Dataset) {
        let mut rng = SeededRng::new(seed);
        let net = TwoLayerNet::kaiming_init(&mut rng, d, k).unwrap();
        let mut p = net.params().to_vec();
        for b in &mut p[k * d..k * (d + 1)] {
            *b = sample_gaussian(&mut rng, 0.3, 1).unwrap()[0];
        }
        p[k * (d + 2)] = 0.2;
        let net = TwoLayerNet::from_flat(d, k, p).unwrap();
        let xs = sample_uniform_ball(&mut rng, d, n).unwrap();
        let ys = sample_gaussian(&mut rng, 1.0, n).unwrap();
        (net, Dataset::new(xs, ys).unwrap())
    }

    #[test]
    fn matches_finite_differences_of_gradient() {
        let (net, data) = instance(1, 2, 3, 5);
        let mut rng = SeededRng::new(2);
        let m = net.params().len();
        let dir = sample_gaussian(&mut rng, 1.0, m).unwrap();
        let hv = hessian_vector_product(&net, &data, &dir).unwrap();
        let h = 1e-5;
        let shifted = |sign: f64| {
            let p: Vec<f64> = net.params().iter().zip(&dir).map(|(p, d)| p + sign * h * d).collect();
            TwoLayerNet::from_flat(2, 3, p).unwrap().grad(&data).unwrap()
        };
        let (up, down) = (shifted(1.0), shifted(-1.0));
        for i in 0..m {
            let fd = (up[i] - down[i]) / (2.0 * h);
            assert!((fd - hv[i]).abs() <= 1e-4 * hv[i].abs().max(1e-2), "{i}: {fd} vs {}", hv[i]);
        }
    }

    #[test]
    fn symmetric_and_linear() {
        let (net, data) = instance(3, 3, 4, 7);
        let mut rng = SeededRng::new(4);
        let m = net.params().len();
        let a = sample_gaussian(&mut rng, 1.0, m).unwrap();
        let b = sample_gaussian(&mut rng, 1.0, m).unwrap();
        let ha = hessian_vector_product(&net, &data, &a).unwrap();
        let hb = hessian_vector_product(&net, &data, &b).unwrap();
        assert!((dot(&a, &hb) - dot(&ha, &b)).abs() < 1e-10);
        let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - 0.5 * y).collect();
        let hc = hessian_vector_product(&net, &data, &combo).unwrap();
        for i in 0..m {
            assert!((hc[i] - (2.0 * ha[i] - 0.5 * hb[i])).abs() < 1e-10);
        }
    }

    #[test]
    fn gauss_newton_part_is_psd() {
        let (net, data) = instance(5, 2, 6, 9);
        let op = HessianOperator::new(&net, &data).unwrap().gauss_newton();
        let mut rng = SeededRng::new(6);
        let mut out = vec![0.0; op.dim()];
        for _ in 0..20 {
            let v = sample_gaussian(&mut rng, 1.0, op.dim()).unwrap();
            op.apply(&v, &mut out);
            assert!(dot(&v, &out) >= -1e-12);
        }
    }

    #[test]
    fn interpolating_net_has_only_gauss_newton_term() {
        let (net, data) = instance(7, 2, 3, 6);
        let fitted = net.forward_batch(data.inputs()).unwrap().to_vec();
        let data = data.relabel(fitted).unwrap();
        let full = HessianOperator::new(&net, &data).unwrap();
        let gn = HessianOperator::new(&net, &data).unwrap().gauss_newton();
        let mut rng = SeededRng::new(8);
        let v = sample_gaussian(&mut rng, 1.0, full.dim()).unwrap();
        let (mut a, mut b) = (vec![0.0; full.dim()], vec![0.0; full.dim()]);
        full.apply(&v, &mut a);
        gn.apply(&v, &mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(dot(&v, &a) >= 0.0);
    }

    #[test]
    fn wrong_length_rejected() {
        let (net, data) = instance(9, 1, 2, 3);
        assert!(hessian_vector_product(&net, &data, &[0.0; 3]).is_err());
    }
}
