//! US cities for the synthetic case study: the 100 most populous cities
//! plus the three largest cities of each data-center state. Populations are
//! 2020 census counts; coordinates are city-center approximations.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct City {
    pub name: &'static str,
    pub state: &'static str,
    pub lat: f64,
    pub lon: f64,
    pub population: u64,
}

const fn city(name: &'static str, state: &'static str, lat: f64, lon: f64, population: u64) -> City {
    City { name, state, lat, lon, population }
}

pub static CITIES: &[City] = &[
    city("New York", "NY", 40.7128, -74.0060, 8_804_190),
    city("Los Angeles", "CA", 34.0522, -118.2437, 3_898_747),
    city("Chicago", "IL", 41.8781, -87.6298, 2_746_388),
    city("Houston", "TX", 29.7604, -95.3698, 2_304_580),
    city("Phoenix", "AZ", 33.4484, -112.0740, 1_608_139),
    city("Philadelphia", "PA", 39.9526, -75.1652, 1_603_797),
    city("San Antonio", "TX", 29.4241, -98.4936, 1_434_625),
    city("San Diego", "CA", 32.7157, -117.1611, 1_386_932),
    city("Dallas", "TX", 32.7767, -96.7970, 1_304_379),
    city("San Jose", "CA", 37.3382, -121.8863, 1_013_240),
    city("Austin", "TX", 30.2672, -97.7431, 961_855),
    city("Jacksonville", "FL", 30.3322, -81.6557, 949_611),
    city("Fort Worth", "TX", 32.7555, -97.3308, 918_915),
    city("Columbus", "OH", 39.9612, -82.9988, 905_748),
    city("Indianapolis", "IN", 39.7684, -86.1581, 887_642),
    city("Charlotte", "NC", 35.2271, -80.8431, 874_579),
    city("San Francisco", "CA", 37.7749, -122.4194, 873_965),
    city("Seattle", "WA", 47.6062, -122.3321, 737_015),
    city("Denver", "CO", 39.7392, -104.9903, 715_522),
    city("Washington", "DC", 38.9072, -77.0369, 689_545),
    city("Nashville", "TN", 36.1627, -86.7816, 689_447),
    city("Oklahoma City", "OK", 35.4676, -97.5164, 681_054),
    city("El Paso", "TX", 31.7619, -106.4850, 678_815),
    city("Boston", "MA", 42.3601, -71.0589, 675_647),
    city("Portland", "OR", 45.5152, -122.6784, 652_503),
    city("Las Vegas", "NV", 36.1699, -115.1398, 641_903),
    city("Detroit", "MI", 42.3314, -83.0458, 639_111),
    city("Memphis", "TN", 35.1495, -90.0490, 633_104),
    city("Louisville", "KY", 38.2527, -85.7585, 633_045),
    city("Baltimore", "MD", 39.2904, -76.6122, 585_708),
    city("Milwaukee", "WI", 43.0389, -87.9065, 577_222),
    city("Albuquerque", "NM", 35.0844, -106.6504, 564_559),
    city("Tucson", "AZ", 32.2226, -110.9747, 542_629),
    city("Fresno", "CA", 36.7378, -119.7871, 542_107),
    city("Sacramento", "CA", 38.5816, -121.4944, 524_943),
    city("Kansas City", "MO", 39.0997, -94.5786, 508_090),
    city("Mesa", "AZ", 33.4152, -111.8315, 504_258),
    city("Atlanta", "GA", 33.7490, -84.3880, 498_715),
    city("Omaha", "NE", 41.2565, -95.9345, 486_051),
    city("Colorado Springs", "CO", 38.8339, -104.8214, 478_961),
    city("Raleigh", "NC", 35.7796, -78.6382, 467_665),
    city("Long Beach", "CA", 33.7701, -118.1937, 466_742),
    city("Virginia Beach", "VA", 36.8529, -75.9780, 459_470),
    city("Miami", "FL", 25.7617, -80.1918, 442_241),
    city("Oakland", "CA", 37.8044, -122.2712, 440_646),
    city("Minneapolis", "MN", 44.9778, -93.2650, 429_954),
    city("Tulsa", "OK", 36.1540, -95.9928, 413_066),
    city("Bakersfield", "CA", 35.3733, -119.0187, 403_455),
    city("Wichita", "KS", 37.6872, -97.3301, 397_532),
    city("Arlington", "TX", 32.7357, -97.1081, 394_266),
    city("Aurora", "CO", 39.7294, -104.8319, 386_261),
    city("Tampa", "FL", 27.9506, -82.4572, 384_959),
    city("New Orleans", "LA", 29.9511, -90.0715, 383_997),
    city("Cleveland", "OH", 41.4993, -81.6944, 372_624),
    city("Honolulu", "HI", 21.3069, -157.8583, 350_964),
    city("Anaheim", "CA", 33.8366, -117.9143, 346_824),
    city("Lexington", "KY", 38.0406, -84.5037, 322_570),
    city("Stockton", "CA", 37.9577, -121.2908, 320_804),
    city("Corpus Christi", "TX", 27.8006, -97.3964, 317_863),
    city("Henderson", "NV", 36.0395, -114.9817, 317_610),
    city("Riverside", "CA", 33.9806, -117.3755, 314_998),
    city("Newark", "NJ", 40.7357, -74.1724, 311_549),
    city("Saint Paul", "MN", 44.9537, -93.0900, 311_527),
    city("Santa Ana", "CA", 33.7455, -117.8677, 310_227),
    city("Cincinnati", "OH", 39.1031, -84.5120, 309_317),
    city("Irvine", "CA", 33.6846, -117.8265, 307_670),
    city("Orlando", "FL", 28.5383, -81.3792, 307_573),
    city("Pittsburgh", "PA", 40.4406, -79.9959, 302_971),
    city("St. Louis", "MO", 38.6270, -90.1994, 301_578),
    city("Greensboro", "NC", 36.0726, -79.7920, 299_035),
    city("Jersey City", "NJ", 40.7178, -74.0431, 292_449),
    city("Anchorage", "AK", 61.2181, -149.9003, 291_247),
    city("Lincoln", "NE", 40.8136, -96.7026, 291_082),
    city("Plano", "TX", 33.0198, -96.6989, 285_494),
    city("Durham", "NC", 35.9940, -78.8986, 283_506),
    city("Buffalo", "NY", 42.8864, -78.8784, 278_349),
    city("Chandler", "AZ", 33.3062, -111.8413, 275_987),
    city("Chula Vista", "CA", 32.6401, -117.0842, 275_487),
    city("Toledo", "OH", 41.6528, -83.5379, 270_871),
    city("Madison", "WI", 43.0731, -89.4012, 269_840),
    city("Gilbert", "AZ", 33.3528, -111.7890, 267_918),
    city("Reno", "NV", 39.5296, -119.8138, 264_165),
    city("Fort Wayne", "IN", 41.0793, -85.1394, 263_886),
    city("North Las Vegas", "NV", 36.1989, -115.1175, 262_527),
    city("St. Petersburg", "FL", 27.7676, -82.6403, 258_308),
    city("Lubbock", "TX", 33.5779, -101.8552, 257_141),
    city("Irving", "TX", 32.8140, -96.9489, 256_684),
    city("Laredo", "TX", 27.5306, -99.4803, 255_205),
    city("Winston-Salem", "NC", 36.0999, -80.2442, 249_545),
    city("Chesapeake", "VA", 36.7682, -76.2875, 249_422),
    city("Glendale", "AZ", 33.5387, -112.1860, 248_325),
    city("Garland", "TX", 32.9126, -96.6389, 246_018),
    city("Scottsdale", "AZ", 33.4942, -111.9261, 241_361),
    city("Norfolk", "VA", 36.8508, -76.2859, 238_005),
    city("Boise", "ID", 43.6150, -116.2023, 235_684),
    city("Fremont", "CA", 37.5485, -121.9886, 230_504),
    city("Spokane", "WA", 47.6588, -117.4260, 228_989),
    city("Santa Clarita", "CA", 34.3917, -118.5426, 228_673),
    city("Baton Rouge", "LA", 30.4515, -91.1871, 227_470),
    city("Richmond", "VA", 37.5407, -77.4360, 226_610),
    city("Tacoma", "WA", 47.2529, -122.4443, 219_346),
    city("Columbus", "GA", 32.4610, -84.9877, 206_922),
    city("Augusta", "GA", 33.4735, -82.0105, 202_081),
    city("Aurora", "IL", 41.7606, -88.3201, 180_542),
    city("Eugene", "OR", 44.0521, -123.0868, 176_654),
    city("Salem", "OR", 44.9429, -123.0351, 175_535),
    city("Joliet", "IL", 41.5250, -88.0817, 150_362),
    city("Charleston", "SC", 32.7765, -79.9311, 150_227),
    city("Columbia", "SC", 34.0007, -81.0348, 136_632),
    city("North Charleston", "SC", 32.8546, -79.9748, 114_852),
];

/// States hosting a data center, in data-center order.
pub const DATA_CENTER_STATES: [&str; 10] = ["CA", "WA", "OR", "IL", "GA", "VA", "TX", "FL", "NC", "SC"];

/// The `n` most populous cities of `state`, largest first.
pub fn largest_in_state(state: &str, n: usize) -> Vec<&'static City> {
    let mut v: Vec<&City> = CITIES.iter().filter(|c| c.state == state).collect();
    v.sort_by(|a, b| b.population.cmp(&a.population).then(a.name.cmp(b.name)));
    v.truncate(n);
    v
}

pub fn total_population() -> u64 {
    CITIES.iter().map(|c| c.population).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoPoint;

    #[test]
    fn table_is_sane() {
        for c in CITIES {
            assert!(c.population > 0, "{}", c.name);
            assert!(GeoPoint::new(c.lat, c.lon).is_valid(), "{}", c.name);
        }
        let mut keys: Vec<(&str, &str)> = CITIES.iter().map(|c| (c.name, c.state)).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), CITIES.len());
        assert!(CITIES.len() >= 100);
    }

    #[test]
    fn three_cities_per_data_center_state() {
        let names = |s| largest_in_state(s, 3).iter().map(|c| c.name).collect::<Vec<_>>();
        assert_eq!(names("CA"), ["Los Angeles", "San Diego", "San Jose"]);
        assert_eq!(names("WA"), ["Seattle", "Spokane", "Tacoma"]);
        assert_eq!(names("OR"), ["Portland", "Eugene", "Salem"]);
        assert_eq!(names("IL"), ["Chicago", "Aurora", "Joliet"]);
        assert_eq!(names("GA"), ["Atlanta", "Columbus", "Augusta"]);
        assert_eq!(names("VA"), ["Virginia Beach", "Chesapeake", "Norfolk"]);
        assert_eq!(names("TX"), ["Houston", "San Antonio", "Dallas"]);
        assert_eq!(names("FL"), ["Jacksonville", "Miami", "Tampa"]);
        assert_eq!(names("NC"), ["Charlotte", "Raleigh", "Greensboro"]);
        assert_eq!(names("SC"), ["Charleston", "Columbia", "North Charleston"]);
    }
}
