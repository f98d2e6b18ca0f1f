//! Home location assignment from geo-tagged posts.
//!
//! Coordinates are treated as planar `(lat, lon)` pairs; containment uses the
//! even-odd ray-casting rule over every ring of a region, so holes and
//! multi-part regions need no special handling. Points exactly on a boundary
//! get whatever the ray-casting arithmetic yields.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::ids::{CityId, UserId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeoError {
    #[error("coordinates out of range: lat {lat}, lon {lon}")]
    InvalidCoordinates { lat: f64, lon: f64 },
    #[error("region {city}: ring {ring} has fewer than 3 distinct vertices")]
    DegenerateRing { city: CityId, ring: usize },
    #[error("region {0} has no rings")]
    EmptyRegion(CityId),
    #[error("region {city}: non-finite vertex in ring {ring}")]
    NonFiniteVertex { city: CityId, ring: usize },
    #[error("duplicate city id {0}")]
    DuplicateCity(CityId),
    #[error("min_posts must be at least 1")]
    InvalidThreshold,
}

/// One geo-tagged post.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPost {
    pub user: UserId,
    pub lat: f64,
    pub lon: f64,
}

impl GeoPost {
    pub fn new(user: UserId, lat: f64, lon: f64) -> Result<Self, GeoError> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(GeoError::InvalidCoordinates { lat, lon });
        }
        Ok(GeoPost { user, lat, lon })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub max_lat: f64,
    pub min_lon: f64,
    pub max_lon: f64,
}

impl BoundingBox {
    fn contains(&self, lat: f64, lon: f64) -> bool {
        lat >= self.min_lat && lat <= self.max_lat && lon >= self.min_lon && lon <= self.max_lon
    }
}

/// A city and its boundary rings. Every ring is closed (first vertex repeated
/// at the end).
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    city: CityId,
    rings: Vec<Vec<(f64, f64)>>,
    bbox: BoundingBox,
}

impl Region {
    /// Validates and closes the rings. Vertices are `(lat, lon)`.
    pub fn new(city: CityId, rings: Vec<Vec<(f64, f64)>>) -> Result<Self, GeoError> {
        if rings.is_empty() {
            return Err(GeoError::EmptyRegion(city));
        }
        let mut closed = Vec::with_capacity(rings.len());
        let mut bbox = BoundingBox {
            min_lat: f64::INFINITY,
            max_lat: f64::NEG_INFINITY,
            min_lon: f64::INFINITY,
            max_lon: f64::NEG_INFINITY,
        };
        for (ri, mut ring) in rings.into_iter().enumerate() {
            if ring.iter().any(|&(a, b)| !a.is_finite() || !b.is_finite()) {
                return Err(GeoError::NonFiniteVertex { city, ring: ri });
            }
            if ring.len() > 1 && ring.first() == ring.last() {
                ring.pop();
            }
            let mut distinct = ring.clone();
            distinct.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
            distinct.dedup();
            if distinct.len() < 3 {
                return Err(GeoError::DegenerateRing { city, ring: ri });
            }
            ring.push(ring[0]);
            for &(lat, lon) in &ring {
                bbox.min_lat = bbox.min_lat.min(lat);
                bbox.max_lat = bbox.max_lat.max(lat);
                bbox.min_lon = bbox.min_lon.min(lon);
                bbox.max_lon = bbox.max_lon.max(lon);
            }
            closed.push(ring);
        }
        Ok(Region {
            city,
            rings: closed,
            bbox,
        })
    }

    pub fn city(&self) -> &CityId {
        &self.city
    }

    pub fn rings(&self) -> &[Vec<(f64, f64)>] {
        &self.rings
    }

    pub fn bounding_box(&self) -> BoundingBox {
        self.bbox
    }

    /// Even-odd containment test over all rings.
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        if !self.bbox.contains(lat, lon) {
            return false;
        }
        let mut inside = false;
        for ring in &self.rings {
            for w in ring.windows(2) {
                let (ya, xa) = w[0];
                let (yb, xb) = w[1];
                if (ya > lat) != (yb > lat) {
                    let x_cross = xa + (lat - ya) * (xb - xa) / (yb - ya);
                    if lon < x_cross {
                        inside = !inside;
                    }
                }
            }
        }
        inside
    }
}

/// Regions ordered by city id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegionSet {
    regions: Vec<Region>,
}

impl RegionSet {
    pub fn new(mut regions: Vec<Region>) -> Result<Self, GeoError> {
        regions.sort_by(|a, b| a.city.cmp(&b.city));
        if let Some(w) = regions.windows(2).find(|w| w[0].city == w[1].city) {
            return Err(GeoError::DuplicateCity(w[0].city.clone()));
        }
        Ok(RegionSet { regions })
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Index of the first region (in city id order) containing the point.
    pub fn locate_index(&self, lat: f64, lon: f64) -> Option<usize> {
        self.regions.iter().position(|r| r.contains(lat, lon))
    }

    /// City whose polygon contains the point, if any.
    pub fn locate_point(&self, lat: f64, lon: f64) -> Option<&CityId> {
        self.locate_index(lat, lon).map(|i| &self.regions[i].city)
    }
}

/// Map from user to home city.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HomeLocationTable {
    homes: BTreeMap<UserId, CityId>,
}

impl HomeLocationTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the previous city if `user` was already present.
    pub fn insert(&mut self, user: UserId, city: CityId) -> Option<CityId> {
        self.homes.insert(user, city)
    }

    pub fn get(&self, user: UserId) -> Option<&CityId> {
        self.homes.get(&user)
    }

    pub fn len(&self) -> usize {
        self.homes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.homes.is_empty()
    }

    /// Entries in ascending user id order.
    pub fn iter(&self) -> impl Iterator<Item = (UserId, &CityId)> {
        self.homes.iter().map(|(&u, c)| (u, c))
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.homes.keys().copied()
    }
}

impl FromIterator<(UserId, CityId)> for HomeLocationTable {
    fn from_iter<T: IntoIterator<Item = (UserId, CityId)>>(iter: T) -> Self {
        HomeLocationTable {
            homes: iter.into_iter().collect(),
        }
    }
}

/// Assigns each user the city they post from most often, provided that city
/// has at least `min_posts` posts. Posts outside every region are ignored.
/// Ties go to the smallest city id.
pub fn assign_home_locations(
    posts: &[GeoPost],
    regions: &RegionSet,
    min_posts: usize,
) -> Result<HomeLocationTable, GeoError> {
    if min_posts == 0 {
        return Err(GeoError::InvalidThreshold);
    }
    let mut located: Vec<(UserId, usize)> = posts
        .iter()
        .filter_map(|p| regions.locate_index(p.lat, p.lon).map(|c| (p.user, c)))
        .collect();
    located.sort_unstable();

    let mut table = HomeLocationTable::new();
    let mut i = 0;
    while i < located.len() {
        let user = located[i].0;
        // (count, city index) of the best run so far; runs arrive in
        // ascending city order so a strict `>` keeps the smallest on ties.
        let mut best: Option<(usize, usize)> = None;
        while i < located.len() && located[i].0 == user {
            let city = located[i].1;
            let start = i;
            while i < located.len() && located[i] == (user, city) {
                i += 1;
            }
            let count = i - start;
            if best.is_none_or(|(c, _)| count > c) {
                best = Some((count, city));
            }
        }
        if let Some((count, city)) = best {
            if count >= min_posts {
                table.insert(user, regions.regions[city].city.clone());
            }
        }
    }
    Ok(table)
}
