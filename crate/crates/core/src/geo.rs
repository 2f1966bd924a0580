use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
    }
}

/// Great-circle distance in gigameters (10^6 km).
pub fn haversine_gm(a: GeoPoint, b: GeoPoint) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    let km = 2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin();
    km / 1e6
}

/// `rate * distance`, quantized to micro-units.
pub fn distance_cost(rate: &Rational, a: GeoPoint, b: GeoPoint) -> Rational {
    rational::from_f64(rational::to_f64(rate) * haversine_gm(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_distances() {
        let la = GeoPoint::new(34.0522, -118.2437);
        let nyc = GeoPoint::new(40.7128, -74.0060);
        let d = haversine_gm(la, nyc) * 1e6;
        assert!((d - 3936.0).abs() < 5.0, "{d}");
        assert_eq!(haversine_gm(la, la), 0.0);
        // quarter meridian
        let q = haversine_gm(GeoPoint::new(0.0, 0.0), GeoPoint::new(90.0, 0.0));
        assert!((q - EARTH_RADIUS_KM * std::f64::consts::FRAC_PI_2 / 1e6).abs() < 1e-12);
    }

    #[test]
    fn cost_is_quantized() {
        let a = GeoPoint::new(0.0, 0.0);
        let b = GeoPoint::new(0.0, 1.0);
        let c = distance_cost(&rational::int(1000), a, b);
        // 111.19 km = 0.00011119 Gm, times 1000
        assert_eq!(rational::format_decimal(&c), "0.111195");
    }
}
