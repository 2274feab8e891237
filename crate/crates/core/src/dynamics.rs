//! Closed-form primitives for current-mode low-pass filters.
//!
//! The differential pair integrator (DPI) is treated as a linear first-order
//! low-pass whose output jumps by a fixed amount at every input spike. Between
//! events the state decays analytically, so any number of idle seconds costs
//! one `exp`. The second-order variant (SO-DPI) cascades two such stages.

use crate::error::{positive, Error, Result};

/// `(e^(rate·t) − 1) / rate`, continuous through `rate = 0` (where it is `t`).
pub fn growth_integral(rate: f64, t: f64) -> f64 {
    let x = rate * t;
    if x.abs() < 1e-8 {
        t * (1.0 + 0.5 * x)
    } else {
        libm::expm1(x) / rate
    }
}

/// First-order DPI state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState {
    pub value: f64,
    pub tau: f64,
    pub last_update: f64,
}

impl FilterState {
    pub fn new(tau: f64) -> Result<Self> {
        Self::with_value(tau, 0.0, 0.0)
    }

    pub fn with_value(tau: f64, value: f64, t: f64) -> Result<Self> {
        positive("tau", tau)?;
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidParameter { name: "value", value });
        }
        Ok(Self { value, tau, last_update: t })
    }

    /// Value the filter will have at `t`, without touching the state.
    pub fn value_at(&self, t: f64) -> f64 {
        self.value * libm::exp(-(t - self.last_update) / self.tau)
    }

    /// Free decay up to `t`.
    pub fn advance(&self, t: f64) -> Result<Self> {
        if t < self.last_update {
            return Err(Error::Ordering { from: self.last_update, to: t });
        }
        Ok(Self { value: self.value_at(t), last_update: t, ..*self })
    }

    /// Adds a spike-triggered jump. The state must already sit at the spike time.
    pub fn kick(&self, jump: f64) -> Result<Self> {
        if !(jump.is_finite() && jump >= 0.0) {
            return Err(Error::InvalidParameter { name: "jump", value: jump });
        }
        Ok(Self { value: self.value + jump, ..*self })
    }

    /// `advance` followed by `kick`.
    pub fn spike(&self, t: f64, jump: f64) -> Result<Self> {
        self.advance(t)?.kick(jump)
    }
}

/// Two cascaded first-order stages; `stage2` low-pass filters `stage1`.
///
/// `dI₂/dt = (I₁ − I₂)/τ₂` so the cascade has unit DC gain and an impulse into
/// stage 1 produces a two-exponential (or, for equal time constants, an alpha
/// function) response in stage 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoDpiState {
    pub stage1: FilterState,
    pub stage2: FilterState,
}

impl SoDpiState {
    pub fn new(tau1: f64, tau2: f64) -> Result<Self> {
        Ok(Self { stage1: FilterState::new(tau1)?, stage2: FilterState::new(tau2)? })
    }

    pub fn last_update(&self) -> f64 {
        self.stage1.last_update.max(self.stage2.last_update)
    }

    pub fn advance(&self, t: f64) -> Result<Self> {
        let from = self.last_update();
        if t < from {
            return Err(Error::Ordering { from, to: t });
        }
        // Stages are kept in lock-step, so one elapsed time covers both.
        let dt = t - self.stage1.last_update;
        let (tau1, tau2) = (self.stage1.tau, self.stage2.tau);
        let i1 = self.stage1.value;
        let decay2 = libm::exp(-dt / tau2);
        // ∫₀^dt e^{-(dt-s)/τ₂} e^{-s/τ₁} ds / τ₂, written as e^{-dt/τ₂}·φ(1/τ₂ − 1/τ₁, dt)/τ₂
        // so that τ₁ → τ₂ reduces smoothly to the alpha-function form (dt/τ)·e^{-dt/τ}.
        let k = 1.0 / tau2 - 1.0 / tau1;
        let transfer = decay2 * growth_integral(k, dt) / tau2;
        let v2 = self.stage2.value * decay2 + i1 * transfer;
        Ok(Self { stage1: self.stage1.advance(t)?, stage2: FilterState { value: v2.max(0.0), last_update: t, ..self.stage2 } })
    }

    /// Spike into the first stage.
    pub fn kick(&self, jump: f64) -> Result<Self> {
        Ok(Self { stage1: self.stage1.kick(jump)?, ..*self })
    }

    pub fn spike(&self, t: f64, jump: f64) -> Result<Self> {
        self.advance(t)?.kick(jump)
    }

    /// Smooth output of the cascade.
    pub fn output(&self) -> f64 {
        self.stage2.value
    }
}

/// Half-open interval `[start, start + width)` produced by a pulse extender.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseWindow {
    pub start: f64,
    pub width: f64,
}

impl PulseWindow {
    pub fn new(start: f64, width: f64) -> Result<Self> {
        positive("width", width)?;
        Ok(Self { start, width })
    }

    pub fn end(&self) -> f64 {
        self.start + self.width
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end()
    }
}
