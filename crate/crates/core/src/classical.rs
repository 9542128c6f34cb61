//! Electron orbits in crossed uniform fields.

use crate::error::{Error, Result};

/// Initial data and field parameters for one classical orbit.
///
/// `omega_b` and `v_d` are taken directly rather than derived from a mass and
/// charge, since the quantum modules have neither.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalConfig {
    pub x0: f64,
    pub y0: f64,
    pub v0x: f64,
    pub v0y: f64,
    pub omega_b: f64,
    pub v_d: f64,
}

impl ClassicalConfig {
    pub fn new(x0: f64, y0: f64, v0x: f64, v0y: f64, omega_b: f64, v_d: f64) -> Result<Self> {
        let cfg = Self {
            x0,
            y0,
            v0x,
            v0y,
            omega_b,
            v_d,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.x0, self.y0, self.v0x, self.v0y, self.omega_b, self.v_d];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "classical parameters must be finite".into(),
            ));
        }
        if self.omega_b <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "ω_B = {} must be positive",
                self.omega_b
            )));
        }
        Ok(())
    }

    /// Orbit radius around the drifting center.
    pub fn radius(&self) -> f64 {
        (self.v0y + self.v_d).hypot(self.v0x) / self.omega_b
    }
}

/// Position at time `t` for an electron (charge −e).
pub fn trajectory(cfg: &ClassicalConfig, t: f64) -> (f64, f64) {
    let w = cfg.omega_b;
    let (s, c) = (w * t).sin_cos();
    let a = cfg.v0y + cfg.v_d;
    let x = cfg.x0 + (a * (c - 1.0) + cfg.v0x * s) / w;
    let y = cfg.y0 + (a * s + cfg.v0x * (1.0 - c)) / w - cfg.v_d * t;
    (x, y)
}

/// Center of the instantaneous circle; moves along −y at speed `v_d`.
pub fn guiding_center(cfg: &ClassicalConfig, t: f64) -> (f64, f64) {
    let w = cfg.omega_b;
    (
        cfg.x0 - (cfg.v0y + cfg.v_d) / w,
        cfg.y0 - cfg.v_d * t + cfg.v0x / w,
    )
}

/// Left minus right side of the moving-circle equation along the orbit.
pub fn circle_residual(cfg: &ClassicalConfig, t: f64) -> f64 {
    let (x, y) = trajectory(cfg, t);
    let (h, k) = guiding_center(cfg, t);
    let r = cfg.radius();
    (x - h).powi(2) + (y - k).powi(2) - r * r
}
