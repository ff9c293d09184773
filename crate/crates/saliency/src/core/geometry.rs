use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CM_PER_INCH: f64 = 2.54;

/// Physical viewing setup of an eye-tracking experiment.
///
/// `display_*` is the region of the screen the video occupied, which may
/// differ from the video resolution (e.g. upscaled presentation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewingGeometry {
    pub screen_w_px: u32,
    pub screen_h_px: u32,
    /// Screen diagonal in inches.
    pub screen_diagonal_in: f64,
    /// Viewing distance in centimeters.
    pub viewing_distance_cm: f64,
    pub display_w_px: u32,
    pub display_h_px: u32,
}

impl ViewingGeometry {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("screen_w_px", self.screen_w_px as f64),
            ("screen_h_px", self.screen_h_px as f64),
            ("screen_diagonal_in", self.screen_diagonal_in),
            ("viewing_distance_cm", self.viewing_distance_cm),
            ("display_w_px", self.display_w_px as f64),
            ("display_h_px", self.display_h_px as f64),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidGeometry(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        if self.display_w_px > self.screen_w_px || self.display_h_px > self.screen_h_px {
            return Err(Error::InvalidGeometry(format!(
                "display {}x{} exceeds screen {}x{}",
                self.display_w_px, self.display_h_px, self.screen_w_px, self.screen_h_px
            )));
        }
        Ok(())
    }

    /// Physical size of one screen pixel in centimeters.
    pub fn pixel_pitch_cm(&self) -> f64 {
        let diag_px =
            ((self.screen_w_px as f64).powi(2) + (self.screen_h_px as f64).powi(2)).sqrt();
        self.screen_diagonal_in * CM_PER_INCH / diag_px
    }
}

/// Pixels subtended by one degree of visual angle at the configured
/// viewing distance: `2 d tan(0.5 deg) / pitch`.
pub fn pixels_per_degree(geom: &ViewingGeometry) -> Result<f64> {
    geom.validate()?;
    let half_deg = 0.5_f64.to_radians();
    Ok(2.0 * geom.viewing_distance_cm * half_deg.tan() / geom.pixel_pitch_cm())
}
