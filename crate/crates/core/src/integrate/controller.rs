//! Step-size control from the embedded error estimate.

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ControllerMode {
    /// `h* = kappa h (eps/delta)^alpha`.
    I,
    /// `h* = kappa h (eps/delta)^beta1 (delta_prev/eps)^beta2` after an
    /// accepted step; the I formula otherwise. Gains default to `0.7/phat`
    /// and `0.4/phat`.
    Pi {
        beta1: Option<f64>,
        beta2: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControllerConfig {
    pub epsilon: f64,
    pub kappa: f64,
    /// Defaults to `0.7 / phat`.
    pub alpha: Option<f64>,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub h0: f64,
    pub mode: ControllerMode,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("controller setting `{name}` = {value} is out of range ({rule})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        rule: &'static str,
    },
}

impl ControllerConfig {
    pub fn new(epsilon: f64, h0: f64) -> Self {
        Self {
            epsilon,
            kappa: 0.9,
            alpha: None,
            kappa_min: 0.2,
            kappa_max: 5.0,
            h0,
            mode: ControllerMode::I,
        }
    }

    pub fn with_mode(mut self, mode: ControllerMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = |name, value: f64, ok: bool, rule| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange { name, value, rule })
            }
        };
        check("epsilon", self.epsilon, self.epsilon > 0.0, "> 0")?;
        check("h0", self.h0, self.h0 > 0.0 && self.h0.is_finite(), "> 0")?;
        check("kappa", self.kappa, self.kappa > 0.0 && self.kappa < 1.0, "in (0, 1)")?;
        check(
            "kappa_min",
            self.kappa_min,
            self.kappa_min > 0.0 && self.kappa_min < 1.0,
            "in (0, 1)",
        )?;
        check("kappa_max", self.kappa_max, self.kappa_max > 1.0, "> 1")?;
        if let Some(a) = self.alpha {
            check("alpha", a, a > 0.0, "> 0")?;
        }
        Ok(())
    }

    pub fn alpha_for(&self, p_hat: u32) -> f64 {
        self.alpha.unwrap_or(0.7 / f64::from(p_hat.max(1)))
    }

    fn clamp(&self, h: f64, proposal: f64) -> f64 {
        proposal.clamp(self.kappa_min * h, self.kappa_max * h)
    }
}

/// One I-controller decision: `(accepted, h_next)`.
pub fn control_step(cfg: &ControllerConfig, h: f64, delta_norm: f64, p_hat: u32) -> (bool, f64) {
    let accepted = delta_norm <= cfg.epsilon;
    let proposal = if delta_norm == 0.0 {
        cfg.kappa_max * h
    } else {
        cfg.kappa * h * (cfg.epsilon / delta_norm).powf(cfg.alpha_for(p_hat))
    };
    (accepted, cfg.clamp(h, proposal))
}

/// Controller with the memory the PI mode needs.
#[derive(Clone, Debug)]
pub struct Controller {
    cfg: ControllerConfig,
    p_hat: u32,
    previous: Option<f64>,
}

impl Controller {
    pub fn new(cfg: ControllerConfig, p_hat: u32) -> Self {
        Self {
            cfg,
            p_hat,
            previous: None,
        }
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    /// Decides on a step of size `h`. `record` is false for steps clipped
    /// to hit the final time, which stay out of the PI history.
    pub fn propose(&mut self, h: f64, delta_norm: f64, record: bool) -> (bool, f64) {
        let (accepted, h_i) = control_step(&self.cfg, h, delta_norm, self.p_hat);
        let ControllerMode::Pi { beta1, beta2 } = self.cfg.mode else {
            return (accepted, h_i);
        };
        let mut h_next = h_i;
        if accepted {
            if let (Some(prev), true) = (self.previous, delta_norm > 0.0) {
                let ph = f64::from(self.p_hat.max(1));
                let b1 = beta1.unwrap_or(0.7 / ph);
                let b2 = beta2.unwrap_or(0.4 / ph);
                let eps = self.cfg.epsilon;
                let proposal = self.cfg.kappa * h * (eps / delta_norm).powf(b1) * (prev / eps).powf(b2);
                h_next = self.cfg.clamp(h, proposal);
            }
            if record {
                self.previous = Some(delta_norm.max(f64::MIN_POSITIVE));
            }
        }
        (accepted, h_next)
    }
}
