//! Running maxima of identity residuals.

use serde::Serialize;

/// Below this reference magnitude a residual is reported in absolute terms.
pub const RELATIVE_FLOOR: f64 = 1e-12;

/// Largest residual seen so far together with the largest magnitude of the
/// reference quantity it is measured against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Residual {
    pub absolute: f64,
    pub scale: f64,
}

impl Residual {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, residual: f64, reference: f64) {
        // NaN must never hide behind `max`.
        self.absolute = if residual.is_nan() || self.absolute.is_nan() {
            f64::NAN
        } else {
            self.absolute.max(residual)
        };
        self.scale = self.scale.max(reference.abs());
    }

    pub fn merge(&mut self, other: &Residual) {
        self.record(other.absolute, other.scale);
    }

    /// Residual divided by the reference scale, or the absolute residual when
    /// the reference vanishes.
    pub fn relative(&self) -> f64 {
        if self.scale > RELATIVE_FLOOR {
            self.absolute / self.scale
        } else {
            self.absolute
        }
    }
}
