//! Spiking ADC: a monitored current charges a capacitor through a hysteresis
//! window; each crossing emits a spike followed by a refractory reset.

use alloc::vec::Vec;

use crate::error::{non_negative, positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SadcConfig {
    pub c_mem: f64,
    pub delta_v: f64,
    pub t_refr: f64,
    pub channel: u8,
}

impl Default for SadcConfig {
    fn default() -> Self {
        Self { c_mem: 100e-15, delta_v: 0.1, t_refr: 1e-6, channel: 0 }
    }
}

impl SadcConfig {
    pub fn validate(&self) -> Result<()> {
        positive("c_mem", self.c_mem)?;
        positive("delta_v", self.delta_v)?;
        non_negative("t_refr", self.t_refr)?;
        Ok(())
    }

    fn charge(&self) -> f64 {
        self.c_mem * self.delta_v
    }
}

/// Output rate for a constant input current.
pub fn sadc_rate(i_in: f64, cfg: &SadcConfig) -> Result<f64> {
    cfg.validate()?;
    non_negative("i_in", i_in)?;
    if i_in == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (cfg.charge() / i_in + cfg.t_refr))
}

/// Spike times for a piecewise-constant input: `samples[k] = (t_k, i_k)` holds
/// on `[t_k, t_{k+1})`, the last sample until `t_end`.
pub fn sadc_events(samples: &[(f64, f64)], cfg: &SadcConfig, t_end: f64) -> Result<Vec<f64>> {
    cfg.validate()?;
    if let Some(k) = samples.windows(2).position(|w| w[1].0 < w[0].0) {
        return Err(Error::NonMonotoneInput { index: k + 1 });
    }
    let q_th = cfg.charge();
    let mut spikes = Vec::new();
    let mut q = 0.0;
    let mut blocked_until = f64::NEG_INFINITY;
    for (k, &(t0, i)) in samples.iter().enumerate() {
        non_negative("i_in", i)?;
        let t1 = samples.get(k + 1).map_or(t_end, |s| s.0).min(t_end);
        let mut t = t0.max(blocked_until);
        while t < t1 {
            if i <= 0.0 {
                break;
            }
            let t_hit = t + (q_th - q) / i;
            if t_hit <= t1 {
                spikes.push(t_hit);
                q = 0.0;
                blocked_until = t_hit + cfg.t_refr;
                t = blocked_until;
            } else {
                q += i * (t1 - t);
                t = t1;
            }
        }
    }
    Ok(spikes)
}

/// Current estimates `(t_k, c·Δv/(ISI_k − t_refr))` at every spike after the first.
pub fn sadc_reconstruct(spikes: &[f64], cfg: &SadcConfig) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    Ok(spikes
        .windows(2)
        .filter_map(|w| {
            let charge_time = w[1] - w[0] - cfg.t_refr;
            (charge_time > 0.0).then(|| (w[1], cfg.charge() / charge_time))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_limits() {
        let cfg = SadcConfig::default();
        assert_eq!(sadc_rate(0.0, &cfg).unwrap(), 0.0);
        let r = sadc_rate(1.0, &cfg).unwrap();
        assert!((r - 1.0 / cfg.t_refr).abs() / r < 1e-6);
        let mut last = 0.0;
        for k in 0..=30 {
            let i = 1e-12 * 10f64.powf(k as f64 / 10.0);
            let r = sadc_rate(i, &cfg).unwrap();
            assert!(r > last);
            last = r;
        }
        assert!(sadc_rate(1e-9, &cfg).unwrap() / sadc_rate(1e-12, &cfg).unwrap() > 500.0);
    }

    #[test]
    fn constant_input_reconstructs_within_one_percent() {
        let cfg = SadcConfig::default();
        for i in [3e-12, 1e-10, 2e-9] {
            let spikes = sadc_events(&[(0.0, i)], &cfg, 1.0).unwrap();
            let rate = spikes.len() as f64;
            assert!((rate - sadc_rate(i, &cfg).unwrap()).abs() <= 1.0);
            for (_, est) in sadc_reconstruct(&spikes, &cfg).unwrap() {
                assert!((est - i).abs() / i < 0.01);
            }
        }
    }

    #[test]
    fn decaying_input_is_tracked() {
        let cfg = SadcConfig::default();
        let tau = 10e-3;
        let samples: Vec<(f64, f64)> = (0..5000)
            .map(|k| {
                let t = k as f64 * 10e-6;
                (t, 1e-9 * (-t / tau).exp())
            })
            .collect();
        let spikes = sadc_events(&samples, &cfg, 0.05).unwrap();
        let rec = sadc_reconstruct(&spikes, &cfg).unwrap();
        assert!(rec.len() > 50);
        for w in rec.windows(2) {
            assert!(w[1].1 <= w[0].1 * 1.01);
        }
        for &(t, est) in rec.iter().filter(|r| r.0 < 0.03) {
            let truth = 1e-9 * (-t / tau).exp();
            assert!((est - truth).abs() / truth < 0.1, "{t}: {est} vs {truth}");
        }
    }

    #[test]
    fn two_spikes_give_one_point() {
        let cfg = SadcConfig::default();
        assert_eq!(sadc_reconstruct(&[0.0, 1e-3], &cfg).unwrap().len(), 1);
        assert!(sadc_reconstruct(&[0.0], &cfg).unwrap().is_empty());
    }
}
