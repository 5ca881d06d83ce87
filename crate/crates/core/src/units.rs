//! Decibel conversions.

/// Power ratio in dB to linear scale. `+inf` maps to `+inf`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power ratio to dB. Zero maps to `-inf`.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Absolute power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    linear_to_db(watts) + 30.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_points() {
        assert_relative_eq!(db_to_linear(10.0), 10.0, max_relative = 1e-15);
        assert_relative_eq!(
            db_to_linear(-3.0),
            0.501_187_233_627_272_3,
            max_relative = 1e-14
        );
        assert_relative_eq!(dbm_to_watts(30.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            dbm_to_watts(-94.0),
            3.981_071_705_534_969e-13,
            max_relative = 1e-12
        );
        assert_eq!(db_to_linear(f64::INFINITY), f64::INFINITY);
        assert_eq!(linear_to_db(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn roundtrip() {
        for db in [-40.0, -13.0, 0.0, 10.43, 24.0] {
            assert_relative_eq!(linear_to_db(db_to_linear(db)), db, epsilon = 1e-12);
            assert_relative_eq!(watts_to_dbm(dbm_to_watts(db)), db, epsilon = 1e-12);
        }
    }
}
