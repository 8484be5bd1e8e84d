//! Floating point helpers backed by `libm`.
//!
//! All transcendental functions go through `libm` so that results are
//! bit-identical across targets and independent of the platform libm.

pub use libm::{atan2, cos, exp, floor, log10, log2, pow, sin, sqrt};

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub fn db_to_linear(db: f64) -> f64 {
    pow(10.0, db / 10.0)
}

/// `10·log10(x)`; `-inf` for zero.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * log10(x)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

/// Linear map of `x` from `[lo, hi]` onto `[0, 1]`, clipped.
pub fn normalize_clip(x: f64, lo: f64, hi: f64) -> f64 {
    if x.is_nan() {
        return 0.0;
    }
    ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halving_power_is_minus_three_db() {
        let d = linear_to_db(0.5);
        assert!((d + 3.0103).abs() < 1e-4);
    }

    #[test]
    fn dbm_round_trip() {
        assert!((watts_to_dbm(1e-3)).abs() < 1e-12);
        assert!((dbm_to_watts(-104.0) - 3.981_071_705_534_97e-14).abs() < 1e-24);
    }

    #[test]
    fn normalize_clips() {
        assert_eq!(normalize_clip(-200.0, -120.0, -60.0), 0.0);
        assert_eq!(normalize_clip(0.0, -120.0, -60.0), 1.0);
        assert!((normalize_clip(-90.0, -120.0, -60.0) - 0.5).abs() < 1e-12);
        assert_eq!(normalize_clip(f64::NAN, 0.0, 1.0), 0.0);
    }
}
