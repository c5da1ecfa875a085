//! Full-batch gradient descent with global-norm clipping, weight decay and
//! sharpness telemetry.

mod log;

pub use self::log::{TrainLog, TRAIN_LOG_HEADER};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{norm, PowerOptions, SeededRng};
use crate::relu_net::{Dataset, TwoLayerNet};
use crate::sharpness::HessianOperator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub eta: f64,
    pub epochs: usize,
    pub clip_threshold: f64,
    pub weight_decay: f64,
    /// When false, weight decay skips the biases `b` and `β`.
    pub decay_biases: bool,
    pub seed: u64,
    /// Record sharpness every this many epochs (0 disables telemetry).
    pub sharpness_every: usize,
    /// Power-iteration tolerance for telemetry.
    pub sharpness_rel_tol: f64,
    pub sharpness_max_iters: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            eta: 0.01,
            epochs: 1000,
            clip_threshold: 50.0,
            weight_decay: 0.0,
            decay_biases: true,
            seed: 0,
            sharpness_every: 0,
            sharpness_rel_tol: 1e-6,
            sharpness_max_iters: 2000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(invalid(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.clip_threshold > 0.0) {
            return Err(invalid(format!("clip threshold must be positive, got {}", self.clip_threshold)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(invalid(format!("weight decay must be non-negative, got {}", self.weight_decay)));
        }
        if !(self.sharpness_rel_tol > 0.0) || self.sharpness_max_iters == 0 {
            return Err(invalid("sharpness telemetry needs a positive tolerance and iteration budget"));
        }
        Ok(())
    }
}

/// What one step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// Loss before the step.
    pub loss: f64,
    /// `‖∇L + λθ‖` before clipping.
    pub grad_norm: f64,
    pub clipped: bool,
}

/// One step `θ ← θ − η·clip(∇L + λθ)` in place.
pub fn gd_step_in_place(net: &mut TwoLayerNet, data: &Dataset, cfg: &TrainConfig) -> Result<StepInfo> {
    let (loss, mut g) = net.loss_and_grad(data)?;
    if !loss.is_finite() || g.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("loss {loss} or its gradient is not finite")));
    }
    if cfg.weight_decay > 0.0 {
        let (d, k) = (net.dim(), net.width());
        let params = net.params();
        for (i, (gi, p)) in g.iter_mut().zip(params).enumerate() {
            let is_bias = (k * d..k * (d + 1)).contains(&i) || i == params.len() - 1;
            if cfg.decay_biases || !is_bias {
                *gi += cfg.weight_decay * p;
            }
        }
    }
    let grad_norm = norm(&g);
    let clipped = grad_norm > cfg.clip_threshold;
    let scale = if clipped { cfg.eta * cfg.clip_threshold / grad_norm } else { cfg.eta };
    let next: Vec<f64> = net.params().iter().zip(&g).map(|(p, gi)| p - scale * gi).collect();
    net.set_params(&next)?;
    Ok(StepInfo { loss, grad_norm, clipped })
}

pub fn gd_step(net: &TwoLayerNet, data: &Dataset, cfg: &TrainConfig) -> Result<TwoLayerNet> {
    cfg.validate()?;
    let mut out = net.clone();
    gd_step_in_place(&mut out, data, cfg)?;
    Ok(out)
}

/// Failure part-way through training, with the log up to that point.
#[derive(Debug)]
pub struct TrainFailure {
    pub error: Error,
    pub log: TrainLog,
    pub net: TwoLayerNet,
}

/// Runs `cfg.epochs` steps. Deterministic in `(net, data, cfg)`.
///
/// The log records the loss before every step and, after the last step, the
/// final loss under epoch `cfg.epochs`. Sharpness is sampled before the step
/// of every epoch divisible by `sharpness_every` and at the final point.
pub fn train(net: &TwoLayerNet, data: &Dataset, cfg: &TrainConfig) -> std::result::Result<(TwoLayerNet, TrainLog), Box<TrainFailure>> {
    let mut current = net.clone();
    let mut log = TrainLog::default();
    let fail = |error: Error, log: TrainLog, net: TwoLayerNet| Box::new(TrainFailure { error, log, net });
    if let Err(e) = cfg.validate() {
        return Err(fail(e, log, current));
    }
    let mut rng = SeededRng::derive(cfg.seed, &[0x5A_A4_9E]);
    let mut warm: Option<Vec<f64>> = None;
    let opts = PowerOptions {
        rel_tol: cfg.sharpness_rel_tol,
        max_iters: cfg.sharpness_max_iters,
    };
    let mut probe = |net: &TwoLayerNet, epoch: usize, log: &mut TrainLog, warm: &mut Option<Vec<f64>>| -> Result<()> {
        let op = HessianOperator::new(net, data)?;
        let est = op.lambda_max(opts, warm.as_deref(), &mut rng)?;
        log.sharpness.push((epoch, est.value));
        *warm = Some(est.vector);
        Ok(())
    };
    for epoch in 0..cfg.epochs {
        if cfg.sharpness_every > 0 && epoch % cfg.sharpness_every == 0 {
            if let Err(e) = probe(&current, epoch, &mut log, &mut warm) {
                return Err(fail(e, log, current));
            }
        }
        match gd_step_in_place(&mut current, data, cfg) {
            Ok(info) => {
                log.loss.push(info.loss);
                if info.clipped {
                    log.clip_epochs.push(epoch);
                }
            }
            Err(e) => return Err(fail(e, log, current)),
        }
    }
    match current.loss(data) {
        Ok(l) if l.is_finite() => log.loss.push(l),
        Ok(l) => return Err(fail(Error::NonFinite(format!("final loss {l}")), log, current)),
        Err(e) => return Err(fail(e, log, current)),
    }
    if cfg.sharpness_every > 0 {
        if let Err(e) = probe(&current, cfg.epochs, &mut log, &mut warm) {
            return Err(fail(e, log, current));
        }
    }
    Ok((current, log))
}
