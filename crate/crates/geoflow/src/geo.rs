//! Spherical geometry primitives: great-circle distance, bounding-box
//! centroids and containment tests.
//!
//! All distances are computed on a sphere of radius [`EARTH_RADIUS_KM`]
//! (IUGG mean radius). The spherical approximation is within 0.5% of the
//! WGS84 ellipsoid, which is immaterial for the coarse thresholds this
//! pipeline applies (tens of kilometers). Boxes whose `west > east` are
//! interpreted as crossing the antimeridian.

use thiserror::Error;

/// IUGG mean Earth radius in kilometers.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Debug, Error, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    InvalidLatitude(f64),
    #[error("longitude {0} outside [-180, 180]")]
    InvalidLongitude(f64),
    #[error("bounding box south {south} > north {north}")]
    InvertedLatitudes { south: f64, north: f64 },
}

/// A point on the sphere in decimal degrees.
///
/// Construction validates ranges: latitude in [-90, 90], longitude in
/// [-180, 180]. Both `-180` and `+180` are accepted and treated as the
/// same meridian by containment tests.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        if !(-90.0..=90.0).contains(&lat) || lat.is_nan() {
            return Err(GeoError::InvalidLatitude(lat));
        }
        if !(-180.0..=180.0).contains(&lon) || lon.is_nan() {
            return Err(GeoError::InvalidLongitude(lon));
        }
        Ok(Self { lat, lon })
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

/// A latitude/longitude aligned box. `west > east` means the box crosses
/// the antimeridian (e.g. Fiji).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundingBox {
    south: f64,
    west: f64,
    north: f64,
    east: f64,
}

impl BoundingBox {
    pub fn new(south: f64, west: f64, north: f64, east: f64) -> Result<Self, GeoError> {
        for lat in [south, north] {
            if !(-90.0..=90.0).contains(&lat) || lat.is_nan() {
                return Err(GeoError::InvalidLatitude(lat));
            }
        }
        for lon in [west, east] {
            if !(-180.0..=180.0).contains(&lon) || lon.is_nan() {
                return Err(GeoError::InvalidLongitude(lon));
            }
        }
        if south > north {
            return Err(GeoError::InvertedLatitudes { south, north });
        }
        Ok(Self {
            south,
            west,
            north,
            east,
        })
    }

    pub fn south(&self) -> f64 {
        self.south
    }

    pub fn west(&self) -> f64 {
        self.west
    }

    pub fn north(&self) -> f64 {
        self.north
    }

    pub fn east(&self) -> f64 {
        self.east
    }

    pub fn crosses_antimeridian(&self) -> bool {
        self.west > self.east
    }

    /// Longitude intervals of the box in `[-180, 180]` space. A crossing
    /// box splits into two intervals that meet at the antimeridian.
    fn lon_segments(&self) -> [(f64, f64); 2] {
        if self.crosses_antimeridian() {
            [(self.west, 180.0), (-180.0, self.east)]
        } else {
            // the second segment is degenerate filler so callers can
            // iterate a fixed-size array
            [(self.west, self.east), (self.west, self.east)]
        }
    }
}

/// Great-circle distance in kilometers via the haversine formula.
///
/// Exactly symmetric (operands enter through absolute differences) and
/// exactly zero for identical inputs. Clamped at the antipodal maximum
/// `PI * EARTH_RADIUS_KM`.
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat_a = a.lat.to_radians();
    let lat_b = b.lat.to_radians();
    // abs() makes the two argument orders produce bit-identical operands
    let half_dlat = (lat_b - lat_a).abs() / 2.0;
    let half_dlon = (b.lon - a.lon).abs().to_radians() / 2.0;
    let h = half_dlat.sin().powi(2) + lat_a.cos() * lat_b.cos() * half_dlon.sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Midpoint of the latitude and longitude ranges of a box.
///
/// For antimeridian-crossing boxes the longitude midpoint is taken along
/// the shorter wrap and canonicalized to `[-180, 180)`.
pub fn centroid(b: &BoundingBox) -> GeoPoint {
    let lat = (b.south + b.north) / 2.0;
    let lon = if b.crosses_antimeridian() {
        let span = b.east - b.west + 360.0;
        normalize_lon(b.west + span / 2.0)
    } else {
        (b.west + b.east) / 2.0
    };
    GeoPoint { lat, lon }
}

/// Wrap a longitude into canonical `[-180, 180)` form.
fn normalize_lon(lon: f64) -> f64 {
    (lon + 180.0).rem_euclid(360.0) - 180.0
}

/// Something a box can contain: a point or another box.
#[derive(Debug, Clone, Copy)]
pub enum Region {
    Point(GeoPoint),
    Box(BoundingBox),
}

impl From<GeoPoint> for Region {
    fn from(p: GeoPoint) -> Self {
        Region::Point(p)
    }
}

impl From<BoundingBox> for Region {
    fn from(b: BoundingBox) -> Self {
        Region::Box(b)
    }
}

/// True iff `inner` lies entirely within `outer`, boundary inclusive,
/// with antimeridian wrap honored on both sides.
pub fn contains<R: Into<Region>>(outer: &BoundingBox, inner: R) -> bool {
    match inner.into() {
        Region::Point(p) => contains_point(outer, p),
        Region::Box(b) => contains_box(outer, &b),
    }
}

fn contains_point(outer: &BoundingBox, p: GeoPoint) -> bool {
    if p.lat < outer.south || p.lat > outer.north {
        return false;
    }
    lon_in_box(outer, p.lon)
}

fn lon_in_box(outer: &BoundingBox, lon: f64) -> bool {
    let segs = outer.lon_segments();
    let hit = |l: f64| segs.iter().any(|&(a, b)| a <= l && l <= b);
    // -180 and +180 name the same meridian; try the alias at the seam
    hit(lon) || (lon.abs() == 180.0 && hit(-lon))
}

fn contains_box(outer: &BoundingBox, inner: &BoundingBox) -> bool {
    if inner.south < outer.south || inner.north > outer.north {
        return false;
    }
    let outer_segs = outer.lon_segments();
    let n_inner = if inner.crosses_antimeridian() { 2 } else { 1 };
    inner.lon_segments()[..n_inner].iter().all(|&(a, b)| {
        let covered = outer_segs.iter().any(|&(oa, ob)| oa <= a && b <= ob);
        // a degenerate interval at the seam is the same meridian as its alias
        covered || (a == b && a.abs() == 180.0 && lon_in_box(outer, -a))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    fn bx(s: f64, w: f64, n: f64, e: f64) -> BoundingBox {
        BoundingBox::new(s, w, n, e).unwrap()
    }

    #[test]
    fn point_construction_validates_ranges() {
        assert!(GeoPoint::new(90.0, 180.0).is_ok());
        assert!(GeoPoint::new(-90.0, -180.0).is_ok());
        assert_eq!(
            GeoPoint::new(90.0001, 0.0),
            Err(GeoError::InvalidLatitude(90.0001))
        );
        assert_eq!(
            GeoPoint::new(0.0, -180.5),
            Err(GeoError::InvalidLongitude(-180.5))
        );
        assert!(GeoPoint::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn box_construction_validates() {
        assert!(BoundingBox::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(BoundingBox::new(0.0, 179.0, 1.0, -179.0).is_ok()); // crossing
        assert!(BoundingBox::new(5.0, 5.0, 5.0, 5.0).is_ok()); // point box
    }

    #[test]
    fn haversine_identical_points_is_zero() {
        let a = p(12.34, 56.78);
        assert_eq!(haversine_km(a, a), 0.0);
    }

    #[test]
    fn haversine_antipodal_is_pi_r() {
        let d = haversine_km(p(0.0, 0.0), p(0.0, 180.0));
        let expected = std::f64::consts::PI * EARTH_RADIUS_KM;
        assert!((d - expected).abs() < 1e-6, "{d} vs {expected}");
    }

    #[test]
    fn haversine_nyc_to_london() {
        // Independent oracle: spherical law of cosines evaluated at 50
        // digits, R = 6371.0088 km.
        let expected = 5570.229873656523;
        let d = haversine_km(p(40.7128, -74.0060), p(51.5074, -0.1278));
        assert!(
            ((d - expected) / expected).abs() < 1e-3,
            "{d} vs {expected}"
        );
    }

    #[test]
    fn haversine_equator_degree() {
        // one equatorial degree = PI * R / 180, oracle value at 50 digits
        let d = haversine_km(p(0.0, 0.0), p(0.0, 1.0));
        assert!((d - 111.19508023353291).abs() < 1e-9);
    }

    #[test]
    fn centroid_symmetric_box() {
        let c = centroid(&bx(0.0, 0.0, 2.0, 2.0));
        assert_eq!((c.lat(), c.lon()), (1.0, 1.0));
    }

    #[test]
    fn centroid_point_box() {
        let c = centroid(&bx(5.0, 5.0, 5.0, 5.0));
        assert_eq!((c.lat(), c.lon()), (5.0, 5.0));
    }

    #[test]
    fn centroid_antimeridian_box() {
        // Oracle: minimal-arc midpoint from west=179 going east across the
        // seam by half of the 2-degree span lands on the 180 meridian,
        // canonicalized to -180.
        let c = centroid(&bx(-1.0, 179.0, 1.0, -179.0));
        assert_eq!((c.lat(), c.lon()), (0.0, -180.0));
    }

    #[test]
    fn centroid_antimeridian_asymmetric() {
        // west=170, east=-176: span 14, midpoint 177
        let c = centroid(&bx(0.0, 170.0, 0.0, -176.0));
        assert_eq!(c.lon(), 177.0);
        // west=176, east=-170: span 14, midpoint 183 -> -177
        let c = centroid(&bx(0.0, 176.0, 0.0, -170.0));
        assert_eq!(c.lon(), -177.0);
    }

    #[test]
    fn contains_point_in_box() {
        let outer = bx(0.0, 0.0, 10.0, 10.0);
        assert!(contains(&outer, p(5.0, 5.0)));
        assert!(contains(&outer, p(0.0, 0.0))); // boundary counts
        assert!(contains(&outer, p(10.0, 10.0)));
        assert!(!contains(&outer, p(10.0001, 5.0)));
    }

    #[test]
    fn contains_nested_boxes() {
        let outer = bx(0.0, 0.0, 10.0, 10.0);
        let inner = bx(2.0, 2.0, 8.0, 8.0);
        assert!(contains(&outer, inner));
        assert!(!contains(&inner, outer));
    }

    #[test]
    fn partial_overlap_is_not_containment() {
        let outer = bx(0.0, 0.0, 10.0, 10.0);
        assert!(!contains(&outer, bx(5.0, 5.0, 15.0, 15.0)));
    }

    #[test]
    fn contains_is_reflexive() {
        let b = bx(-3.0, 4.0, 7.0, 9.0);
        assert!(contains(&b, b));
        let crossing = bx(-3.0, 170.0, 7.0, -160.0);
        assert!(contains(&crossing, crossing));
    }

    #[test]
    fn contains_across_antimeridian() {
        let outer = bx(-5.0, 170.0, 5.0, -170.0);
        assert!(contains(&outer, p(0.0, 180.0)));
        assert!(contains(&outer, p(0.0, -180.0)));
        assert!(contains(&outer, p(0.0, 175.0)));
        assert!(contains(&outer, p(0.0, -175.0)));
        assert!(!contains(&outer, p(0.0, 0.0)));
        // crossing inner inside crossing outer
        assert!(contains(&outer, bx(-1.0, 175.0, 1.0, -175.0)));
        // inner sticking out on the west side
        assert!(!contains(&outer, bx(-1.0, 165.0, 1.0, -175.0)));
    }

    #[test]
    fn wraparound_inner_inside_narrow_outer_is_rejected() {
        // Inner west > east spans nearly the whole globe the long way
        // around; its corners land inside the outer box but the box
        // itself does not.
        let outer = bx(0.0, 0.0, 10.0, 10.0);
        let inner = bx(2.0, 5.0, 8.0, 3.0);
        assert!(!contains(&outer, inner));
    }

    #[test]
    fn seam_aliases_are_contained() {
        // box ending exactly at +180 contains the -180 representation
        let outer = bx(-1.0, 179.0, 1.0, 180.0);
        assert!(contains(&outer, p(0.0, -180.0)));
        let outer = bx(-1.0, -180.0, 1.0, -179.0);
        assert!(contains(&outer, p(0.0, 180.0)));
    }

    fn arb_point() -> impl Strategy<Value = GeoPoint> {
        (-90.0..=90.0f64, -180.0..=180.0f64).prop_map(|(lat, lon)| p(lat, lon))
    }

    fn arb_plain_box() -> impl Strategy<Value = BoundingBox> {
        (arb_point(), arb_point()).prop_map(|(a, b)| {
            bx(
                a.lat().min(b.lat()),
                a.lon().min(b.lon()),
                a.lat().max(b.lat()),
                a.lon().max(b.lon()),
            )
        })
    }

    proptest! {
        #[test]
        fn haversine_symmetry_exact(a in arb_point(), b in arb_point()) {
            prop_assert_eq!(haversine_km(a, b), haversine_km(b, a));
        }

        #[test]
        fn haversine_identity(a in arb_point()) {
            prop_assert_eq!(haversine_km(a, a), 0.0);
        }

        #[test]
        fn haversine_range(a in arb_point(), b in arb_point()) {
            let d = haversine_km(a, b);
            prop_assert!(d >= 0.0);
            prop_assert!(d <= std::f64::consts::PI * EARTH_RADIUS_KM + 1e-9);
        }

        #[test]
        fn haversine_triangle_inequality(
            a in arb_point(),
            b in arb_point(),
            c in arb_point(),
        ) {
            let eps = 1e-6;
            prop_assert!(haversine_km(a, c) <= haversine_km(a, b) + haversine_km(b, c) + eps);
        }

        #[test]
        fn centroid_contained_in_plain_box(b in arb_plain_box()) {
            prop_assert!(contains(&b, centroid(&b)));
        }

        #[test]
        fn contains_transitive_on_nested(outer in arb_plain_box(), f1 in 0.0..0.5f64, f2 in 0.0..0.5f64) {
            // shrink outer twice to get a nested chain
            let shrink = |b: &BoundingBox, f: f64| {
                let dlat = (b.north() - b.south()) * f;
                let dlon = (b.east() - b.west()) * f;
                bx(b.south() + dlat, b.west() + dlon, b.north() - dlat, b.east() - dlon)
            };
            let mid = shrink(&outer, f1);
            let inner = shrink(&mid, f2);
            prop_assert!(contains(&outer, mid));
            prop_assert!(contains(&mid, inner));
            prop_assert!(contains(&outer, inner));
        }
    }
}
