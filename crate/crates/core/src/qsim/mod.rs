//! Dense state-vector simulation of registers of two-state sites.
//!
//! Basis index convention: site 0 is the most significant bit of the index, so
//! the basis string `x0 x1 … x(n-1)` read left to right is the binary
//! representation of the index.

mod gate;
mod state;

pub use gate::Gate;
pub use state::{
    Amplitude, MeasurementOutcome, StateVector, ZeroTest, AMPLITUDE_TOLERANCE, DEFAULT_MAX_SITES,
    NORM_TOLERANCE,
};

use num_complex::Complex64;

/// The `M` ("fair coin flip") matrix, `(1/√2)[[1, 1], [1, −1]]`.
pub fn m_matrix() -> [[Complex64; 2]; 2] {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    use std::f64::consts::PI;
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.3 + 4.0 * PI) - 0.3).abs() < 1e-12);
        assert!((wrap_angle(-0.3 - 2.0 * PI) + 0.3).abs() < 1e-12);
    }
}
