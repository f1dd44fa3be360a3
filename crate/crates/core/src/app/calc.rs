//! Link-budget and interferometric-stability arithmetic.

use std::fmt;

use crate::error::{Error, Result};

pub const VACUUM_LIGHT_SPEED: f64 = 299_792_458.0;
/// Group velocity in standard telecom fiber.
pub const FIBER_SIGNAL_SPEED: f64 = 2.0e8;
pub const DEFAULT_PHASE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub distance_m: f64,
    pub attenuation_db_per_km: f64,
    pub detection_time_s: f64,
    pub signal_speed_m_per_s: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("distance_m", self.distance_m),
            ("detection_time_s", self.detection_time_s),
            ("signal_speed_m_per_s", self.signal_speed_m_per_s),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::OutOfDomain {
                    name,
                    value: v,
                    domain: "(0, inf)",
                });
            }
        }
        if !(self.attenuation_db_per_km.is_finite() && self.attenuation_db_per_km >= 0.0) {
            return Err(Error::OutOfDomain {
                name: "attenuation_db_per_km",
                value: self.attenuation_db_per_km,
                domain: "[0, inf)",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalityReport {
    pub budget: LinkBudget,
    /// `detection_time · signal_speed`
    pub min_separation_m: f64,
    /// Same bound for a signal travelling at fiber group velocity.
    pub min_separation_fiber_m: f64,
    /// `10^(−attenuation · distance_km / 10)`
    pub transmission: f64,
    pub separated: bool,
}

pub fn transmission(attenuation_db_per_km: f64, distance_m: f64) -> f64 {
    10f64.powf(-attenuation_db_per_km * distance_m / 1000.0 / 10.0)
}

pub fn locality_check(lb: &LinkBudget) -> Result<LocalityReport> {
    lb.validate()?;
    let min_separation_m = lb.detection_time_s * lb.signal_speed_m_per_s;
    Ok(LocalityReport {
        budget: *lb,
        min_separation_m,
        min_separation_fiber_m: lb.detection_time_s * FIBER_SIGNAL_SPEED,
        transmission: transmission(lb.attenuation_db_per_km, lb.distance_m),
        separated: lb.distance_m >= min_separation_m,
    })
}

impl fmt::Display for LocalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = &self.budget;
        writeln!(f, "distance_m            {}", b.distance_m)?;
        writeln!(f, "attenuation_db_per_km {}", b.attenuation_db_per_km)?;
        writeln!(f, "detection_time_s      {:e}", b.detection_time_s)?;
        writeln!(f, "signal_speed_m_per_s  {:e}", b.signal_speed_m_per_s)?;
        writeln!(f, "min separation        {:.3} m", self.min_separation_m)?;
        writeln!(f, "min separation, fiber {:.3} m", self.min_separation_fiber_m)?;
        writeln!(
            f,
            "fiber transmission    {:.6} ({:.3} dB)",
            self.transmission,
            b.attenuation_db_per_km * b.distance_m / 1000.0
        )?;
        write!(
            f,
            "space-like separated  {}",
            if self.separated { "yes" } else { "no" }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub k_norm_per_m: f64,
    pub delta_l_m: f64,
    /// `‖k‖ ΔL`, the phase drift in radians.
    pub product: f64,
    pub threshold: f64,
    pub stable: bool,
}

pub fn phase_stability(k_norm_per_m: f64, delta_l_m: f64, threshold: f64) -> Result<StabilityReport> {
    for (name, v) in [("k_norm_per_m", k_norm_per_m), ("delta_l_m", delta_l_m)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::OutOfDomain {
                name,
                value: v,
                domain: "[0, inf)",
            });
        }
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::OutOfDomain {
            name: "threshold",
            value: threshold,
            domain: "(0, inf)",
        });
    }
    let product = k_norm_per_m * delta_l_m;
    Ok(StabilityReport {
        k_norm_per_m,
        delta_l_m,
        product,
        threshold,
        stable: product < threshold,
    })
}

impl fmt::Display for StabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "k_norm_per_m {:e}", self.k_norm_per_m)?;
        writeln!(f, "delta_l_m    {:e}", self.delta_l_m)?;
        writeln!(f, "|k| dL       {:.6} rad", self.product)?;
        write!(
            f,
            "stable       {} (threshold {})",
            if self.stable { "yes" } else { "no" },
            self.threshold
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn budget(distance_m: f64, db: f64) -> LinkBudget {
        LinkBudget {
            distance_m,
            attenuation_db_per_km: db,
            detection_time_s: 1e-6,
            signal_speed_m_per_s: 3e8,
        }
    }

    #[test]
    fn microsecond_detection_needs_300_m() {
        let r = locality_check(&budget(300.0, 2.0)).unwrap();
        assert_abs_diff_eq!(r.min_separation_m, 300.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.min_separation_fiber_m, 200.0, epsilon = 1e-9);
        assert!(r.separated);
        assert!(!locality_check(&budget(299.0, 2.0)).unwrap().separated);
    }

    #[test]
    fn transmission_from_decibels() {
        let r = locality_check(&budget(300.0, 2.0)).unwrap();
        assert_abs_diff_eq!(r.transmission, 10f64.powf(-0.06), epsilon = 1e-15);
        assert_abs_diff_eq!(r.transmission, 0.871, epsilon = 1e-3);
        for d in [1.0, 300.0, 1e5] {
            assert_eq!(locality_check(&budget(d, 0.0)).unwrap().transmission, 1.0);
        }
    }

    #[test]
    fn link_budget_domain() {
        assert!(locality_check(&budget(0.0, 2.0)).is_err());
        assert!(locality_check(&budget(300.0, -1.0)).is_err());
        let mut b = budget(300.0, 2.0);
        b.signal_speed_m_per_s = f64::NAN;
        assert!(locality_check(&b).is_err());
    }

    #[test]
    fn stability_examples() {
        let zero = phase_stability(1e7, 0.0, DEFAULT_PHASE_THRESHOLD).unwrap();
        assert_eq!(zero.product, 0.0);
        assert!(zero.stable);

        let k = 2.0 * PI / 800e-9;
        assert_abs_diff_eq!(k, 7.854e6, epsilon = 1e2);
        let edge = phase_stability(k, 1.27e-8, DEFAULT_PHASE_THRESHOLD).unwrap();
        assert_abs_diff_eq!(edge.product, 0.1, epsilon = 1e-3);

        assert!(!phase_stability(1.0, 1.0, DEFAULT_PHASE_THRESHOLD).unwrap().stable);
        assert!(phase_stability(-1.0, 1.0, 0.1).is_err());
        assert!(phase_stability(1.0, 1.0, 0.0).is_err());
    }
}
