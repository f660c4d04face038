//! Unit conversions applied at the configuration boundary.

/// Neper-to-decibel factor, `20 log10(e)`.
pub const DB_PER_NEPER: f64 = 8.685_889_638_065_037;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Converts an attenuation quoted in dB/m into the natural-log amplitude
/// coefficient (1/m) used by the channel model.
pub fn db_per_m_to_alpha(db_per_m: f64) -> f64 {
    db_per_m / DB_PER_NEPER
}

pub fn alpha_to_db_per_m(alpha: f64) -> f64 {
    alpha * DB_PER_NEPER
}
