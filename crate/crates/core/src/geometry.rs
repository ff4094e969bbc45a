//! Point clouds, the partition-of-unity center grid and fixed-radius queries.
//!
//! All containers are immutable once built. Points are stored flat
//! (row-major, `dim` coordinates per point) so the distance scans that
//! dominate subdomain construction stay cache friendly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{PumError, Result};

/// Tolerance below which two points are considered duplicates in fit paths.
pub const DISTINCT_TOL: f64 = 1e-14;

/// Point count from which [`NeighborSearch::for_set`] switches to buckets.
pub const BUCKET_THRESHOLD: usize = 10_000;

/// Euclidean distance between two coordinate slices of equal length.
#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A single point in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(PumError::Domain(
                "a point needs at least one coordinate".into(),
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(PumError::Domain(format!(
                "non-finite coordinate in {coords:?}"
            )));
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Ordered data sites with optional sampled values.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    values: Option<Vec<f64>>,
}

impl PointSet {
    /// Builds a set from flat row-major coordinates.
    pub fn new(dim: usize, coords: Vec<f64>, values: Option<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(PumError::Domain("dimension must be at least 1".into()));
        }
        if coords.len() % dim != 0 {
            return Err(PumError::Domain(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(PumError::Domain("non-finite coordinate".into()));
        }
        let n = coords.len() / dim;
        if let Some(v) = &values {
            if v.len() != n {
                return Err(PumError::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        Ok(Self {
            dim,
            coords,
            values,
        })
    }

    pub fn from_points(points: &[Vec<f64>], values: Option<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(PumError::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Self::new(dim, points.concat(), values)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    /// Values, or an error naming the missing data when the set is unlabeled.
    pub fn require_values(&self) -> Result<&[f64]> {
        self.values
            .as_deref()
            .ok_or_else(|| PumError::Domain("point set carries no values".into()))
    }

    /// Attaches values sampled from `f` at every point.
    pub fn with_function<F: Fn(&[f64]) -> f64>(mut self, f: F) -> Self {
        self.values = Some(self.iter().map(f).collect());
        self
    }

    pub fn with_values(mut self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(PumError::DimensionMismatch {
                expected: self.len(),
                found: values.len(),
            });
        }
        self.values = Some(values);
        Ok(self)
    }

    /// Copies the selected rows (and their values) into a new set.
    pub fn subset(&self, indices: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        let values = self
            .values
            .as_ref()
            .map(|v| indices.iter().map(|&i| v[i]).collect());
        PointSet {
            dim: self.dim,
            coords,
            values,
        }
    }

    /// Fails when two points lie closer than [`DISTINCT_TOL`].
    pub fn check_distinct(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            for j in i + 1..n {
                if distance(self.point(i), self.point(j)) <= DISTINCT_TOL {
                    return Err(PumError::Domain(format!("points {i} and {j} coincide")));
                }
            }
        }
        Ok(())
    }

    /// Reads one point per row: `dim` coordinates, optionally followed by a value.
    pub fn read_csv(path: &Path, dim: usize, has_header: bool) -> Result<Self> {
        let file = File::open(path).map_err(|source| PumError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .trim(csv::Trim::All)
            .from_reader(BufReader::new(file));
        let mut coords = Vec::new();
        let mut values = Vec::new();
        let mut with_values = None;
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|source| PumError::Csv {
                path: path.to_owned(),
                source,
            })?;
            let line = row + 1 + usize::from(has_header);
            let has_value = match record.len() {
                n if n == dim => false,
                n if n == dim + 1 => true,
                n => {
                    return Err(PumError::Parse {
                        path: path.to_owned(),
                        line,
                        message: format!("expected {dim} or {} columns, found {n}", dim + 1),
                    })
                }
            };
            if *with_values.get_or_insert(has_value) != has_value {
                return Err(PumError::Parse {
                    path: path.to_owned(),
                    line,
                    message: "inconsistent column count".into(),
                });
            }
            for (col, field) in record.iter().enumerate() {
                let x: f64 = field.parse().map_err(|_| PumError::Parse {
                    path: path.to_owned(),
                    line,
                    message: format!("column {}: not a number: {field:?}", col + 1),
                })?;
                if col < dim {
                    coords.push(x);
                } else {
                    values.push(x);
                }
            }
        }
        let values = with_values.unwrap_or(false).then_some(values);
        Self::new(dim, coords, values)
    }

    pub fn write_csv(&self, path: &Path, header: bool) -> Result<()> {
        let io_err = |source| PumError::Io {
            path: path.to_owned(),
            source,
        };
        let file = File::create(path).map_err(io_err)?;
        let mut out = BufWriter::new(file);
        if header {
            let mut names: Vec<String> = (1..=self.dim).map(|a| format!("x{a}")).collect();
            if self.values.is_some() {
                names.push("f".into());
            }
            writeln!(out, "{}", names.join(",")).map_err(io_err)?;
        }
        for (i, p) in self.iter().enumerate() {
            let mut fields: Vec<String> = p.iter().map(|c| format!("{c:?}")).collect();
            if let Some(v) = &self.values {
                fields.push(format!("{:?}", v[i]));
            }
            writeln!(out, "{}", fields.join(",")).map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }
}

/// Draws `n` i.i.d. uniform points in `[0,1]^d`. Same `(n, d, seed)`, same output.
pub fn generate_uniform_points(n: usize, d: usize, seed: u64) -> Result<PointSet> {
    if n == 0 || d == 0 {
        return Err(PumError::Domain(format!(
            "need n >= 1 and d >= 1, got n = {n}, d = {d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n * d).map(|_| rng.random::<f64>()).collect();
    PointSet::new(d, coords, None)
}

/// Cell-centered equispaced grid of partition-of-unity centers in `[0,1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterGrid {
    dim: usize,
    per_axis: usize,
    centers: Vec<Point>,
}

impl CenterGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Centers per axis, `g`.
    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    /// Total number of subdomains, `m = g^d`.
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }
}

/// Picks `g = round((n / 2^d)^(1/d))` (ties to even, at least 1) and lays out
/// `g^d` centers at `(2i - 1) / (2g)` along every axis.
pub fn build_center_grid(n: usize, d: usize) -> Result<CenterGrid> {
    if d == 0 {
        return Err(PumError::Domain("dimension must be at least 1".into()));
    }
    let cells_per_point = 2f64.powi(d as i32);
    if (n as f64) < cells_per_point {
        return Err(PumError::Domain(format!(
            "need at least 2^d = {cells_per_point} points for a center grid, got {n}"
        )));
    }
    let g = ((n as f64 / cells_per_point).powf(1.0 / d as f64))
        .round_ties_even()
        .max(1.0) as usize;
    let axis: Vec<f64> = (1..=g)
        .map(|i| (2 * i - 1) as f64 / (2 * g) as f64)
        .collect();
    let m = g.pow(d as u32);
    let mut centers = Vec::with_capacity(m);
    for k in 0..m {
        // first axis varies slowest
        let mut rem = k;
        let mut coords = vec![0.0; d];
        for a in (0..d).rev() {
            coords[a] = axis[rem % g];
            rem /= g;
        }
        centers.push(Point(coords));
    }
    Ok(CenterGrid {
        dim: d,
        per_axis: g,
        centers,
    })
}

/// Indices `i` with `||x_i - center|| <= radius`, ascending.
pub fn points_in_ball(set: &PointSet, center: &[f64], radius: f64) -> Vec<usize> {
    set.iter()
        .enumerate()
        .filter(|(_, p)| distance(p, center) <= radius)
        .map(|(i, _)| i)
        .collect()
}

/// Uniform bucket grid over the bounding box of a point set.
///
/// Answers the same ball queries as [`points_in_ball`], visiting only the
/// buckets overlapping the query's bounding box.
#[derive(Debug, Clone)]
pub struct BucketIndex {
    dim: usize,
    lower: Vec<f64>,
    cell: Vec<f64>,
    counts: Vec<usize>,
    buckets: Vec<Vec<usize>>,
}

impl BucketIndex {
    /// Aims for about four points per bucket.
    pub fn new(set: &PointSet) -> Self {
        let d = set.dim();
        let n = set.len().max(1);
        let mut lower = vec![f64::INFINITY; d];
        let mut upper = vec![f64::NEG_INFINITY; d];
        for p in set.iter() {
            for a in 0..d {
                lower[a] = lower[a].min(p[a]);
                upper[a] = upper[a].max(p[a]);
            }
        }
        if set.is_empty() {
            lower.fill(0.0);
            upper.fill(1.0);
        }
        let per_axis = ((n as f64 / 4.0).powf(1.0 / d as f64).floor() as usize).clamp(1, 1 << 12);
        let counts = vec![per_axis; d];
        let cell: Vec<f64> = (0..d)
            .map(|a| ((upper[a] - lower[a]) / per_axis as f64).max(f64::MIN_POSITIVE))
            .collect();
        let total = counts.iter().product();
        let mut index = Self {
            dim: d,
            lower,
            cell,
            counts,
            buckets: vec![Vec::new(); total],
        };
        for (i, p) in set.iter().enumerate() {
            let cell = index.cell_of(p);
            let flat = index.flatten(&cell);
            index.buckets[flat].push(i);
        }
        index
    }

    fn axis_cell(&self, a: usize, x: f64) -> usize {
        let c = ((x - self.lower[a]) / self.cell[a]).floor();
        c.clamp(0.0, (self.counts[a] - 1) as f64) as usize
    }

    fn cell_of(&self, p: &[f64]) -> Vec<usize> {
        (0..self.dim).map(|a| self.axis_cell(a, p[a])).collect()
    }

    fn flatten(&self, cell: &[usize]) -> usize {
        cell.iter()
            .zip(&self.counts)
            .fold(0, |acc, (&c, &n)| acc * n + c)
    }

    pub fn query_ball(&self, set: &PointSet, center: &[f64], radius: f64) -> Vec<usize> {
        let lo: Vec<usize> = (0..self.dim)
            .map(|a| self.axis_cell(a, center[a] - radius))
            .collect();
        let hi: Vec<usize> = (0..self.dim)
            .map(|a| self.axis_cell(a, center[a] + radius))
            .collect();
        let mut found = Vec::new();
        let mut cur = lo.clone();
        loop {
            for &i in &self.buckets[self.flatten(&cur)] {
                if distance(set.point(i), center) <= radius {
                    found.push(i);
                }
            }
            // odometer over the box of buckets
            let mut a = self.dim;
            loop {
                if a == 0 {
                    found.sort_unstable();
                    return found;
                }
                a -= 1;
                if cur[a] < hi[a] {
                    cur[a] += 1;
                    break;
                }
                cur[a] = lo[a];
            }
        }
    }
}

/// Ball-query strategy. Both variants return identical index lists.
#[derive(Debug, Clone)]
pub enum NeighborSearch {
    Scan,
    Buckets(BucketIndex),
}

impl NeighborSearch {
    pub fn for_set(set: &PointSet) -> Self {
        if set.len() >= BUCKET_THRESHOLD {
            NeighborSearch::Buckets(BucketIndex::new(set))
        } else {
            NeighborSearch::Scan
        }
    }

    pub fn query(&self, set: &PointSet, center: &[f64], radius: f64) -> Vec<usize> {
        match self {
            NeighborSearch::Scan => points_in_ball(set, center, radius),
            NeighborSearch::Buckets(index) => index.query_ball(set, center, radius),
        }
    }
}

/// A partition-of-unity ball and the training indices it holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Subdomain {
    center: Point,
    radius: f64,
    members: Vec<usize>,
    delta_min: f64,
}

impl Subdomain {
    /// Collects the members of the ball of `radius` around `center`.
    ///
    /// `radius` must lie in `[delta_min, 2 delta_min]`.
    pub fn new(set: &PointSet, center: Point, radius: f64, delta_min: f64) -> Result<Self> {
        let members = points_in_ball(set, center.coords(), radius);
        Self::with_members(center, radius, members, delta_min)
    }

    pub fn with_members(
        center: Point,
        radius: f64,
        members: Vec<usize>,
        delta_min: f64,
    ) -> Result<Self> {
        if !(delta_min > 0.0 && delta_min.is_finite()) {
            return Err(PumError::Domain(format!(
                "delta_min must be positive, got {delta_min}"
            )));
        }
        // relative slack for radii produced by box de-normalization
        let slack = 1e-12 * delta_min;
        if !(radius >= delta_min - slack && radius <= 2.0 * delta_min + slack) {
            return Err(PumError::Domain(format!(
                "radius {radius} outside [{delta_min}, {}]",
                2.0 * delta_min
            )));
        }
        Ok(Self {
            center,
            radius,
            members,
            delta_min,
        })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn delta_min(&self) -> f64 {
        self.delta_min
    }

    /// Same center and `delta_min`, membership recomputed for a new radius.
    pub fn resized(&self, set: &PointSet, radius: f64) -> Result<Self> {
        Self::new(set, self.center.clone(), radius, self.delta_min)
    }
}

/// Smallest admissible subdomain radius around `center`:
/// `max(1 / m^(1/d), distance to the n_min-th nearest point)`.
pub fn compute_delta_min(
    set: &PointSet,
    center: &[f64],
    m: usize,
    d: usize,
    n_min: usize,
) -> Result<f64> {
    if n_min == 0 {
        return Err(PumError::Domain("n_min must be at least 1".into()));
    }
    if m == 0 || d == 0 {
        return Err(PumError::Domain(format!("invalid m = {m}, d = {d}")));
    }
    if set.len() < n_min {
        return Err(PumError::InsufficientPoints {
            needed: n_min,
            found: set.len(),
        });
    }
    let mut dist2: Vec<f64> = set.iter().map(|p| squared_distance(p, center)).collect();
    let (_, kth, _) = dist2.select_nth_unstable_by(n_min - 1, f64::total_cmp);
    let covering = 1.0 / (m as f64).powf(1.0 / d as f64);
    Ok(covering.max(kth.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_point_in_unit_square() {
        let s = generate_uniform_points(1, 2, 0).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.point(0).iter().all(|c| (0.0..=1.0).contains(c)));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_uniform_points(1000, 2, 7).unwrap();
        let b = generate_uniform_points(1000, 2, 7).unwrap();
        assert_eq!(a.coords(), b.coords());
        let c = generate_uniform_points(1000, 2, 8).unwrap();
        assert_ne!(a.coords(), c.coords());
    }

    #[test]
    fn generation_mean_is_near_half() {
        let s = generate_uniform_points(10_000, 2, 3).unwrap();
        for a in 0..2 {
            let mean = s.iter().map(|p| p[a]).sum::<f64>() / s.len() as f64;
            assert!((0.47..=0.53).contains(&mean), "axis {a}: {mean}");
        }
    }

    #[test]
    fn generation_rejects_empty() {
        assert!(generate_uniform_points(0, 2, 0).is_err());
        assert!(generate_uniform_points(3, 0, 0).is_err());
    }

    #[test]
    fn center_grid_examples() {
        let g = build_center_grid(64, 2).unwrap();
        assert_eq!((g.per_axis(), g.len()), (4, 16));
        assert_eq!(g.centers()[0].coords(), &[0.125, 0.125]);

        let g = build_center_grid(4, 2).unwrap();
        assert_eq!((g.per_axis(), g.len()), (1, 1));
        assert_eq!(g.centers()[0].coords(), &[0.5, 0.5]);

        let g = build_center_grid(2000, 2).unwrap();
        assert_eq!((g.per_axis(), g.len()), (22, 484));

        assert!(matches!(build_center_grid(3, 2), Err(PumError::Domain(_))));
    }

    #[test]
    fn center_grid_ties_round_to_even() {
        // (n / 2)^(1/1) = 2.5 -> 2, 3.5 -> 4
        assert_eq!(build_center_grid(5, 1).unwrap().per_axis(), 2);
        assert_eq!(build_center_grid(7, 1).unwrap().per_axis(), 4);
    }

    #[test]
    fn center_grid_covers_unit_square() {
        let grid = build_center_grid(400, 2).unwrap();
        let g = grid.per_axis() as f64;
        let bound = 2f64.sqrt() / (2.0 * g);
        assert!(bound <= 1.0 / (grid.len() as f64).sqrt() + 1e-15);
        let probes = generate_uniform_points(10_000, 2, 11).unwrap();
        for x in probes.iter() {
            let nearest = grid
                .centers()
                .iter()
                .map(|c| distance(x, c.coords()))
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= bound + 1e-15);
        }
    }

    #[test]
    fn ball_contains_coincident_point() {
        let s = generate_uniform_points(30, 2, 1).unwrap();
        let c = s.point(17).to_vec();
        assert!(points_in_ball(&s, &c, 1e-9).contains(&17));
    }

    #[test]
    fn ball_of_diameter_radius_holds_everything() {
        let s = generate_uniform_points(50, 3, 1).unwrap();
        let all: Vec<usize> = (0..50).collect();
        assert_eq!(points_in_ball(&s, &[0.3, 0.9, 0.1], 3f64.sqrt()), all);
    }

    #[test]
    fn ball_matches_exhaustive_scan() {
        let s = generate_uniform_points(50, 2, 5).unwrap();
        let c = [0.4, 0.6];
        let mut expected = Vec::new();
        for i in 0..s.len() {
            let p = s.point(i);
            let d = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
            if d <= 0.3 {
                expected.push(i);
            }
        }
        assert!(!expected.is_empty());
        assert_eq!(points_in_ball(&s, &c, 0.3), expected);
    }

    #[test]
    fn delta_min_examples() {
        let s = generate_uniform_points(100, 2, 2).unwrap();
        assert!(compute_delta_min(&s, &[0.5, 0.5], 1, 2, 15).unwrap() >= 1.0);

        let c = s.point(3).to_vec();
        assert_eq!(compute_delta_min(&s, &c, 25, 2, 1).unwrap(), 0.2);

        let c = [0.37, 0.81];
        let mut d: Vec<f64> = s.iter().map(|p| distance(p, &c)).collect();
        d.sort_by(f64::total_cmp);
        let expected = d[14].max(0.2);
        assert_eq!(compute_delta_min(&s, &c, 25, 2, 15).unwrap(), expected);
        assert!(points_in_ball(&s, &c, expected).len() >= 15);

        assert!(matches!(
            compute_delta_min(&s, &c, 25, 2, 101),
            Err(PumError::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn csv_round_trip_with_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.csv");
        let s = generate_uniform_points(20, 2, 4)
            .unwrap()
            .with_function(|p| p[0] - 3.0 * p[1]);
        s.write_csv(&path, true).unwrap();
        assert_eq!(PointSet::read_csv(&path, 2, true).unwrap(), s);

        let bare = generate_uniform_points(5, 3, 4).unwrap();
        bare.write_csv(&path, false).unwrap();
        assert_eq!(PointSet::read_csv(&path, 3, false).unwrap(), bare);
        assert!(matches!(
            PointSet::read_csv(&path, 1, false),
            Err(PumError::Parse { .. })
        ));
    }

    #[test]
    fn duplicates_are_detected() {
        let s =
            PointSet::from_points(&[vec![0.1, 0.2], vec![0.5, 0.5], vec![0.1, 0.2]], None).unwrap();
        assert!(s.check_distinct().is_err());
    }

    proptest! {
        #[test]
        fn bucket_index_agrees_with_scan(
            seed in 0u64..1000,
            n in 1usize..400,
            cx in 0.0f64..1.0,
            cy in 0.0f64..1.0,
            r in 0.001f64..0.8,
        ) {
            let s = generate_uniform_points(n, 2, seed).unwrap();
            let idx = BucketIndex::new(&s);
            prop_assert_eq!(idx.query_ball(&s, &[cx, cy], r), points_in_ball(&s, &[cx, cy], r));
        }

        #[test]
        fn scan_agrees_with_brute_force(seed in 0u64..1000, n in 1usize..200, r in 0.01f64..1.0) {
            let s = generate_uniform_points(n, 3, seed).unwrap();
            let c = [0.5, 0.2, 0.7];
            let expected: Vec<usize> = (0..n)
                .filter(|&i| distance(s.point(i), &c) <= r)
                .collect();
            prop_assert_eq!(points_in_ball(&s, &c, r), expected);
        }

        #[test]
        fn delta_min_monotonicity(seed in 0u64..500, m in 1usize..60, n_min in 1usize..30) {
            let s = generate_uniform_points(60, 2, seed).unwrap();
            let c = [0.3, 0.55];
            let base = compute_delta_min(&s, &c, m, 2, n_min).unwrap();
            prop_assert!(compute_delta_min(&s, &c, m + 1, 2, n_min).unwrap() <= base);
            prop_assert!(compute_delta_min(&s, &c, m, 2, n_min + 1).unwrap() >= base);
        }
    }
}
