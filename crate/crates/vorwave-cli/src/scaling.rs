//! Non-dimensionalization of the physical problem.
//!
//! Lengths scale by `(Q^2/g)^{1/3}` (the critical-stream depth), the stream
//! function by `Q`, velocities by `(Qg)^{1/3}`; the dimensional vorticity
//! `upsilon` maps to `omega(psi) = (Q/g^2)^{1/3} upsilon(Q psi)` and the
//! total head `R` to `r = R / R_c` with `R_c = (3/2)(Qg)^{2/3}`.

use crate::CliError;

#[derive(Debug, Clone, Copy)]
pub struct Scaling {
    pub q: f64,
    pub g: f64,
}

impl Scaling {
    pub fn new(q: f64, g: f64) -> Result<Self, CliError> {
        if q == 0.0 {
            return Err(CliError::Config(
                "`dimensional.Q`: the case of zero rate of flow needs special treatment".into(),
            ));
        }
        if g.is_nan() || g <= 0.0 {
            return Err(CliError::Config(format!("`dimensional.g`: must be positive, got {g}")));
        }
        Ok(Self { q, g })
    }

    /// `(Q^2/g)^{1/3}`, the length unit.
    pub fn length_unit(&self) -> f64 {
        (self.q * self.q / self.g).cbrt()
    }

    /// `R_c = (3/2)(Qg)^{2/3}`, the head of the critical uniform stream.
    pub fn critical_head(&self) -> f64 {
        1.5 * (self.q * self.g * self.q * self.g).cbrt()
    }

    pub fn head_to_nondimensional(&self, r_dim: f64) -> f64 {
        r_dim / self.critical_head()
    }

    pub fn head_to_dimensional(&self, r: f64) -> f64 {
        r * self.critical_head()
    }

    pub fn length_to_dimensional(&self, length: f64) -> f64 {
        length * self.length_unit()
    }

    pub fn length_to_nondimensional(&self, length_dim: f64) -> f64 {
        length_dim / self.length_unit()
    }

    /// `omega(psi) = (Q/g^2)^{1/3} upsilon(Q psi)`: given the dimensional
    /// vorticity value at `Q psi`, returns the non-dimensional one.
    pub fn vorticity_to_nondimensional(&self, upsilon_at_q_psi: f64) -> f64 {
        (self.q / (self.g * self.g)).cbrt() * upsilon_at_q_psi
    }

    pub fn vorticity_to_dimensional(&self, omega: f64) -> f64 {
        omega / (self.q / (self.g * self.g)).cbrt()
    }

    /// Argument map of the vorticity: `psi -> Q psi`.
    pub fn stream_to_dimensional(&self, psi: f64) -> f64 {
        psi * self.q
    }

    pub fn stream_to_nondimensional(&self, psi_dim: f64) -> f64 {
        psi_dim / self.q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_parameters_are_identity() {
        let sc = Scaling::new(1.0, 1.0).unwrap();
        assert_eq!(sc.length_unit(), 1.0);
        assert_eq!(sc.critical_head(), 1.5);
        assert_eq!(sc.head_to_nondimensional(1.5), 1.0);
    }

    #[test]
    fn wavelength_scaling_example() {
        // Q = 8, g = 1: lengths scale by (64)^{1/3} = 4.
        let sc = Scaling::new(8.0, 1.0).unwrap();
        assert!((sc.length_unit() - 4.0).abs() < 1e-14);
        assert!((sc.length_to_dimensional(1.7) - 6.8).abs() < 1e-14);
    }

    #[test]
    fn round_trips() {
        let sc = Scaling::new(-2.7, 9.81).unwrap();
        for &x in &[0.3, 1.0, 42.0] {
            assert!((sc.head_to_dimensional(sc.head_to_nondimensional(x)) - x).abs() <= 1e-12 * x);
            assert!(
                (sc.length_to_nondimensional(sc.length_to_dimensional(x)) - x).abs() <= 1e-12 * x
            );
            assert!(
                (sc.vorticity_to_dimensional(sc.vorticity_to_nondimensional(x)) - x).abs()
                    <= 1e-12 * x
            );
        }
    }

    #[test]
    fn rejects_zero_flow_rate() {
        assert!(Scaling::new(0.0, 1.0).is_err());
        assert!(Scaling::new(1.0, -1.0).is_err());
    }
}
