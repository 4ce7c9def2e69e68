//! Physical constants in SI units.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Result};

/// Boltzmann constant (J/K), exact SI value.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Mass of a rubidium-87 atom (kg), 86.909 u.
pub const RB87_MASS: f64 = 1.443_160_9e-25;

/// Speed of light in vacuum (m/s), exact SI value.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Group velocity of light in standard single-mode telecom fiber (m/s).
pub const FIBER_GROUP_VELOCITY: f64 = 2.0e8;

/// Bundle of physical constants used by the dephasing model and link-budget
/// conversions. Immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// J/K
    pub boltzmann_k: f64,
    /// kg
    pub rb87_mass: f64,
    /// m/s
    pub speed_of_light: f64,
    /// m/s
    pub fiber_group_velocity: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            boltzmann_k: BOLTZMANN,
            rb87_mass: RB87_MASS,
            speed_of_light: SPEED_OF_LIGHT,
            fiber_group_velocity: FIBER_GROUP_VELOCITY,
        }
    }
}

impl PhysicalConstants {
    /// Builds a constant set, rejecting non-positive entries.
    pub fn new(
        boltzmann_k: f64,
        rb87_mass: f64,
        speed_of_light: f64,
        fiber_group_velocity: f64,
    ) -> Result<Self> {
        require_positive("boltzmann_k", boltzmann_k)?;
        require_positive("rb87_mass", rb87_mass)?;
        require_positive("speed_of_light", speed_of_light)?;
        require_positive("fiber_group_velocity", fiber_group_velocity)?;
        Ok(Self {
            boltzmann_k,
            rb87_mass,
            speed_of_light,
            fiber_group_velocity,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_positive() {
        let c = PhysicalConstants::default();
        assert!(c.boltzmann_k > 0.0);
        assert!(c.rb87_mass > 0.0);
        assert!(c.speed_of_light > 0.0);
        assert!(c.fiber_group_velocity > 0.0);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(PhysicalConstants::new(0.0, RB87_MASS, SPEED_OF_LIGHT, 2e8).is_err());
        assert!(PhysicalConstants::new(BOLTZMANN, -1.0, SPEED_OF_LIGHT, 2e8).is_err());
    }
}
