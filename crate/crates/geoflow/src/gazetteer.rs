//! GeoNames gazetteer: dump parsing, a degree-grid spatial index, and the
//! two-pass radius-capped place matcher.
//!
//! Matching proceeds in two passes over the same gazetteer: first against
//! cities (feature class `P`) with population at or above the configured
//! minimum, then against every entry. A match must be strictly closer than
//! the radius cap (default 50 km), measured from the query point to the
//! entry's coordinates. Ties break toward the lowest geoname id so repeated
//! runs produce identical networks.

use std::collections::HashMap;
use std::io::BufRead;

use dashmap::DashMap;

use crate::geo::{haversine_km, GeoPoint, EARTH_RADIUS_KM};

/// The nine GeoNames feature classes this pipeline reports on.
pub const KNOWN_FEATURE_CLASSES: [char; 9] = ['A', 'H', 'L', 'P', 'R', 'S', 'T', 'U', 'V'];

/// One canonical GeoNames location.
#[derive(Debug, Clone)]
pub struct GazetteerEntry {
    pub geoname_id: u64,
    pub name: String,
    pub point: GeoPoint,
    /// `None` when the dump field is empty. Classes outside
    /// [`KNOWN_FEATURE_CLASSES`] are preserved and counted.
    pub feature_class: Option<char>,
    pub feature_code: String,
    pub country_code: String,
    pub population: u64,
}

/// Counters from [`parse_gazetteer`]. Malformed lines are skipped, never
/// fatal.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct GazetteerParseStats {
    pub lines: u64,
    pub entries: u64,
    pub skipped_malformed: u64,
    pub duplicate_ids: u64,
    pub unknown_class_entries: u64,
}

/// A loaded gazetteer: the entry arena plus an id lookup.
#[derive(Debug, Default)]
pub struct Gazetteer {
    entries: Vec<GazetteerEntry>,
    by_id: HashMap<u64, u32>,
    pub stats: GazetteerParseStats,
}

impl Gazetteer {
    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, idx: u32) -> &GazetteerEntry {
        &self.entries[idx as usize]
    }

    pub fn find_by_id(&self, geoname_id: u64) -> Option<&GazetteerEntry> {
        self.by_id.get(&geoname_id).map(|&i| self.get(i))
    }

    #[cfg(test)]
    pub fn from_entries(entries: Vec<GazetteerEntry>) -> Self {
        let by_id = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.geoname_id, i as u32))
            .collect();
        Gazetteer {
            entries,
            by_id,
            stats: GazetteerParseStats::default(),
        }
    }
}

/// Parse the GeoNames `allCountries` tab-separated dump.
///
/// Expects 19 fields per line; uses geonameid, name, latitude, longitude,
/// feature class, feature code, country code and population. Lines with a
/// wrong field count, non-numeric ids or coordinates, or out-of-range
/// coordinates are skipped and counted. An empty population field reads as
/// zero. Later duplicates of an already-seen geoname id are skipped.
pub fn parse_gazetteer<R: BufRead>(reader: R) -> std::io::Result<Gazetteer> {
    let mut gaz = Gazetteer::default();
    for line in reader.lines() {
        let line = line?;
        gaz.stats.lines += 1;
        if line.is_empty() {
            gaz.stats.skipped_malformed += 1;
            continue;
        }
        let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
        if fields.len() != 19 {
            gaz.stats.skipped_malformed += 1;
            continue;
        }
        let parsed = (|| {
            let geoname_id: u64 = fields[0].parse().ok()?;
            let lat: f64 = fields[4].parse().ok()?;
            let lon: f64 = fields[5].parse().ok()?;
            let point = GeoPoint::new(lat, lon).ok()?;
            Some((geoname_id, point))
        })();
        let Some((geoname_id, point)) = parsed else {
            gaz.stats.skipped_malformed += 1;
            continue;
        };
        if gaz.by_id.contains_key(&geoname_id) {
            gaz.stats.duplicate_ids += 1;
            continue;
        }
        let feature_class = fields[6].chars().next();
        if !matches!(feature_class, Some(c) if KNOWN_FEATURE_CLASSES.contains(&c)) {
            gaz.stats.unknown_class_entries += 1;
        }
        let entry = GazetteerEntry {
            geoname_id,
            name: fields[1].to_string(),
            point,
            feature_class,
            feature_code: fields[7].to_string(),
            country_code: fields[8].to_string(),
            population: fields[14].parse().unwrap_or(0),
        };
        gaz.by_id.insert(geoname_id, gaz.entries.len() as u32);
        gaz.entries.push(entry);
        gaz.stats.entries += 1;
    }
    Ok(gaz)
}

/// Degree-grid spatial index over a subset of a gazetteer's entries.
///
/// Cells hold arena indices; the index is immutable after construction and
/// safe for concurrent readers. Radius queries derive their cell range from
/// the query circle's latitude/longitude bounding box (latitude-dependent,
/// so high-latitude queries widen to as many longitude bands as the circle
/// actually spans) padded by one cell, which keeps the search exhaustive at
/// cell borders and across the poles.
#[derive(Debug)]
pub struct SpatialIndex {
    cell_size_deg: f64,
    lat_bands: i64,
    lon_bands: i64,
    cells: HashMap<(i64, i64), Vec<u32>>,
    len: usize,
}

pub const DEFAULT_CELL_SIZE_DEG: f64 = 1.0;

impl SpatialIndex {
    /// Index exactly the entries of `gaz` satisfying `pred`.
    pub fn build<F>(gaz: &Gazetteer, cell_size_deg: f64, pred: F) -> Self
    where
        F: Fn(&GazetteerEntry) -> bool,
    {
        assert!(cell_size_deg > 0.0, "cell size must be positive");
        let lat_bands = (180.0 / cell_size_deg).ceil() as i64;
        let lon_bands = (360.0 / cell_size_deg).ceil() as i64;
        let mut cells: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        let mut len = 0;
        for (i, entry) in gaz.entries().iter().enumerate() {
            if !pred(entry) {
                continue;
            }
            let key = cell_key(entry.point, cell_size_deg, lat_bands, lon_bands);
            cells.entry(key).or_default().push(i as u32);
            len += 1;
        }
        SpatialIndex {
            cell_size_deg,
            lat_bands,
            lon_bands,
            cells,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The indexed entry nearest to `p` at a distance strictly below
    /// `radius_km`, together with that distance. Ties break toward the
    /// lowest geoname id.
    pub fn nearest_within<'g>(
        &self,
        gaz: &'g Gazetteer,
        p: GeoPoint,
        radius_km: f64,
    ) -> Option<(&'g GazetteerEntry, f64)> {
        assert!(radius_km > 0.0, "radius must be positive");
        let mut best: Option<(u64, u32, f64)> = None;
        let mut visit = |idx: u32| {
            let entry = gaz.get(idx);
            let d = haversine_km(p, entry.point);
            if d >= radius_km {
                return;
            }
            let better = match best {
                None => true,
                Some((best_id, _, best_d)) => {
                    d < best_d || (d == best_d && entry.geoname_id < best_id)
                }
            };
            if better {
                best = Some((entry.geoname_id, idx, d));
            }
        };

        let angular = radius_km / EARTH_RADIUS_KM;
        let lat_delta_deg = angular.to_degrees();
        let row_lo = self.lat_band(p.lat() - lat_delta_deg) - 1;
        let row_hi = self.lat_band(p.lat() + lat_delta_deg) + 1;

        // Longitude half-width of the query circle's bounding box. When the
        // circle reaches a pole every longitude band qualifies.
        let all_lons = if p.lat().abs() + lat_delta_deg >= 90.0
            || angular >= std::f64::consts::FRAC_PI_2
        {
            true
        } else {
            let ratio = angular.sin() / p.lat().to_radians().cos();
            ratio >= 1.0
        };
        let (col_lo, col_hi) = if all_lons {
            (0, self.lon_bands - 1)
        } else {
            let ratio = angular.sin() / p.lat().to_radians().cos();
            let dlon_deg = ratio.asin().to_degrees();
            let lo = ((p.lon() - dlon_deg + 180.0) / self.cell_size_deg).floor() as i64 - 1;
            let hi = ((p.lon() + dlon_deg + 180.0) / self.cell_size_deg).floor() as i64 + 1;
            if hi - lo + 1 >= self.lon_bands {
                (0, self.lon_bands - 1)
            } else {
                (lo, hi)
            }
        };

        for row in row_lo.max(0)..=row_hi.min(self.lat_bands - 1) {
            for col in col_lo..=col_hi {
                let col = col.rem_euclid(self.lon_bands);
                if let Some(bucket) = self.cells.get(&(row, col)) {
                    for &idx in bucket {
                        visit(idx);
                    }
                }
            }
        }
        best.map(|(_, idx, d)| (gaz.get(idx), d))
    }

    fn lat_band(&self, lat: f64) -> i64 {
        let band = ((lat + 90.0) / self.cell_size_deg).floor() as i64;
        band.clamp(0, self.lat_bands - 1)
    }
}

fn cell_key(p: GeoPoint, cell: f64, lat_bands: i64, lon_bands: i64) -> (i64, i64) {
    let row = (((p.lat() + 90.0) / cell).floor() as i64).clamp(0, lat_bands - 1);
    let col = (((p.lon() + 180.0) / cell).floor() as i64).clamp(0, lon_bands - 1);
    (row, col)
}

/// City-pass predicate: populated places at or above the population floor.
pub fn city_pass_predicate(min_population: u64) -> impl Fn(&GazetteerEntry) -> bool {
    move |e| e.feature_class == Some('P') && e.population >= min_population
}

/// Which pass produced a match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchPass {
    MatchedCityPass,
    MatchedFullPass,
}

/// Outcome of matching one location against the gazetteer. A matched
/// outcome always carries an entry and a distance strictly below the
/// radius cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatchResult {
    Matched {
        pass: MatchPass,
        entry_idx: u32,
        distance_km: f64,
    },
    Unmatched,
}

impl MatchResult {
    pub fn is_matched(&self) -> bool {
        matches!(self, MatchResult::Matched { .. })
    }

    pub fn entry<'g>(&self, gaz: &'g Gazetteer) -> Option<&'g GazetteerEntry> {
        match self {
            MatchResult::Matched { entry_idx, .. } => Some(gaz.get(*entry_idx)),
            MatchResult::Unmatched => None,
        }
    }

    pub fn distance_km(&self) -> Option<f64> {
        match self {
            MatchResult::Matched { distance_km, .. } => Some(*distance_km),
            MatchResult::Unmatched => None,
        }
    }
}

/// Two-pass match: the city index wins whenever it has any entry within the
/// radius, regardless of whether the full index holds something nearer.
pub fn match_place(
    gaz: &Gazetteer,
    city_index: &SpatialIndex,
    full_index: &SpatialIndex,
    centroid: GeoPoint,
    radius_km: f64,
) -> MatchResult {
    if let Some((entry, d)) = city_index.nearest_within(gaz, centroid, radius_km) {
        return MatchResult::Matched {
            pass: MatchPass::MatchedCityPass,
            entry_idx: arena_index(gaz, entry),
            distance_km: d,
        };
    }
    if let Some((entry, d)) = full_index.nearest_within(gaz, centroid, radius_km) {
        return MatchResult::Matched {
            pass: MatchPass::MatchedFullPass,
            entry_idx: arena_index(gaz, entry),
            distance_km: d,
        };
    }
    MatchResult::Unmatched
}

fn arena_index(gaz: &Gazetteer, entry: &GazetteerEntry) -> u32 {
    // entries come straight out of the arena slice, so pointer arithmetic
    // recovers the index without another id lookup
    let base = gaz.entries().as_ptr() as usize;
    let offset = entry as *const GazetteerEntry as usize - base;
    (offset / std::mem::size_of::<GazetteerEntry>()) as u32
}

/// Gazetteer plus both pass indices and a per-place memo table.
///
/// Each unique place identifier is matched once; the memo map supports
/// concurrent readers with synchronized inserts, so per-user work can run
/// in parallel. Results are independent of insertion order.
pub struct PlaceMatcher {
    gazetteer: Gazetteer,
    city_index: SpatialIndex,
    full_index: SpatialIndex,
    radius_km: f64,
    memo: DashMap<String, MatchResult>,
}

impl PlaceMatcher {
    pub fn new(gazetteer: Gazetteer, min_city_population: u64, radius_km: f64) -> Self {
        let city_index = SpatialIndex::build(
            &gazetteer,
            DEFAULT_CELL_SIZE_DEG,
            city_pass_predicate(min_city_population),
        );
        let full_index = SpatialIndex::build(&gazetteer, DEFAULT_CELL_SIZE_DEG, |_| true);
        PlaceMatcher {
            gazetteer,
            city_index,
            full_index,
            radius_km,
            memo: DashMap::new(),
        }
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }

    pub fn city_index(&self) -> &SpatialIndex {
        &self.city_index
    }

    pub fn radius_km(&self) -> f64 {
        self.radius_km
    }

    /// Match a bare coordinate (no memo; points rarely repeat exactly).
    pub fn match_point(&self, p: GeoPoint) -> MatchResult {
        match_place(
            &self.gazetteer,
            &self.city_index,
            &self.full_index,
            p,
            self.radius_km,
        )
    }

    /// Match a tagged place by its bounding-box centroid, memoized on the
    /// place identifier.
    pub fn match_place_id(&self, place_id: &str, centroid: GeoPoint) -> MatchResult {
        if let Some(hit) = self.memo.get(place_id) {
            return *hit;
        }
        let result = self.match_point(centroid);
        self.memo.insert(place_id.to_string(), result);
        result
    }

    /// All memoized place matches, sorted by place id for deterministic
    /// reporting.
    pub fn place_match_snapshot(&self) -> Vec<(String, MatchResult)> {
        let mut rows: Vec<(String, MatchResult)> = self
            .memo
            .iter()
            .map(|kv| (kv.key().clone(), *kv.value()))
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        rows
    }
}
