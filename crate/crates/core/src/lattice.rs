//! Lattice points on the truncated paraboloid.
//!
//! The base object is the set of integer points on x_d = x_1^2 + ... +
//! x_{d-1}^2 whose first d-1 coordinates are bounded by B = floor(n^(1/(d-1))).
//! Every box point lifts uniquely, so the set has exactly (2B+1)^(d-1)
//! elements and is stored flat in lexicographic order of (x_1,...,x_{d-1}).

use num_integer::Roots;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

pub type Coord = i64;

/// Cap on the number of generated points (memory guard).
const MAX_POINTS: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    dimension: usize,
    truncation: i64,
    n_parameter: u64,
    coords: Vec<Coord>,
}

/// Exact floor of n^(1/k).
pub fn integer_nth_root(n: u64, k: u32) -> u64 {
    assert!(k >= 1, "root order must be positive");
    n.nth_root(k)
}

/// Exact ceiling of n^(1/k).
pub fn integer_nth_root_ceil(n: u64, k: u32) -> u64 {
    let r = integer_nth_root(n, k);
    if r.checked_pow(k) == Some(n) {
        r
    } else {
        r + 1
    }
}

/// The truncation bound B = floor(n^(1/(d-1))).
pub fn truncation_bound(n: u64, d: usize) -> i64 {
    assert!(d >= 2);
    integer_nth_root(n, (d - 1) as u32) as i64
}

fn box_cardinality(d: usize, b: i64) -> Result<usize> {
    let side = 2u128 * b as u128 + 1;
    let mut count: u128 = 1;
    for _ in 0..d - 1 {
        count = count.saturating_mul(side);
        if count > MAX_POINTS {
            return Err(Error::size_limit(format!(
                "point set (2*{b}+1)^{} exceeds {MAX_POINTS} points",
                d - 1
            )));
        }
    }
    Ok(count as usize)
}

/// All integer points of the truncated paraboloid for the given n.
pub fn build_point_set(d: usize, n: u64) -> Result<PointSet> {
    if d < 2 {
        return Err(Error::domain(format!("dimension {d} < 2")));
    }
    if n < 1 {
        return Err(Error::domain("n must be at least 1"));
    }
    let b = truncation_bound(n, d);
    build_points(d, b, n)
}

/// Same construction parameterized by the box bound directly; records the
/// smallest n realizing that bound (B^(d-1)), or n = 0 for the degenerate
/// B = 0 box, which no n >= 1 produces.
pub fn build_point_set_with_bound(d: usize, b: i64) -> Result<PointSet> {
    if d < 2 {
        return Err(Error::domain(format!("dimension {d} < 2")));
    }
    if b < 0 {
        return Err(Error::domain(format!("truncation bound {b} < 0")));
    }
    let n = (b as u128).pow((d - 1) as u32);
    let n = u64::try_from(n)
        .map_err(|_| Error::size_limit(format!("B^{} overflows the n parameter", d - 1)))?;
    build_points(d, b, n)
}

fn build_points(d: usize, b: i64, n: u64) -> Result<PointSet> {
    let count = box_cardinality(d, b)?;
    let mut coords = Vec::with_capacity(count * d);
    let mut x = vec![-b; d - 1];
    loop {
        let mut lift: i64 = 0;
        for &xi in &x {
            lift += xi * xi;
        }
        coords.extend_from_slice(&x);
        coords.push(lift);
        // Advance the box counter in lexicographic order.
        let mut axis = d - 1;
        loop {
            if axis == 0 {
                debug_assert_eq!(coords.len(), count * d);
                return Ok(PointSet {
                    dimension: d,
                    truncation: b,
                    n_parameter: n,
                    coords,
                });
            }
            axis -= 1;
            if x[axis] < b {
                x[axis] += 1;
                for slot in x.iter_mut().skip(axis + 1) {
                    *slot = -b;
                }
                break;
            }
        }
    }
}

/// True iff the last coordinate equals the sum of squares of the others.
pub fn is_on_paraboloid(p: &[Coord]) -> bool {
    let d = p.len();
    if d < 2 {
        return false;
    }
    let mut sum: i128 = 0;
    for &xi in &p[..d - 1] {
        sum += (xi as i128) * (xi as i128);
    }
    sum == p[d - 1] as i128
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validation {
    pub valid: bool,
    pub diagnostic: Option<String>,
}

impl Validation {
    fn ok() -> Self {
        Validation {
            valid: true,
            diagnostic: None,
        }
    }

    fn fail(msg: String) -> Self {
        Validation {
            valid: false,
            diagnostic: Some(msg),
        }
    }
}

/// Check all structural invariants, reporting the first violation found.
pub fn validate_point_set(ps: &PointSet) -> Validation {
    let d = ps.dimension;
    let b = ps.truncation;
    if d < 2 {
        return Validation::fail(format!("dimension {d} < 2"));
    }
    if b < 0 {
        return Validation::fail(format!("truncation {b} < 0"));
    }
    if ps.n_parameter >= 1 && truncation_bound(ps.n_parameter, d) != b {
        return Validation::fail(format!(
            "truncation {b} is not floor({}^(1/{}))",
            ps.n_parameter,
            d - 1
        ));
    }
    let expected = match box_cardinality(d, b) {
        Ok(c) => c,
        Err(e) => return Validation::fail(e.to_string()),
    };
    if ps.len() != expected {
        return Validation::fail(format!(
            "cardinality {} differs from (2*{b}+1)^{} = {expected}",
            ps.len(),
            d - 1
        ));
    }
    for (i, p) in ps.iter().enumerate() {
        if p[..d - 1].iter().any(|&xi| xi.abs() > b) {
            return Validation::fail(format!("point {i} leaves the box bound {b}"));
        }
        if !is_on_paraboloid(p) {
            return Validation::fail(format!("point {i} is off the paraboloid"));
        }
    }
    let mut seen = HashSet::with_capacity(ps.len());
    for (i, p) in ps.iter().enumerate() {
        if !seen.insert(p) {
            return Validation::fail(format!("point {i} is a duplicate"));
        }
    }
    Validation::ok()
}

impl PointSet {
    /// Assemble a set from explicit points (testing, imports, subsets).
    pub fn from_points(
        dimension: usize,
        truncation: i64,
        n_parameter: u64,
        points: Vec<Vec<Coord>>,
    ) -> Result<PointSet> {
        if dimension < 2 {
            return Err(Error::domain(format!("dimension {dimension} < 2")));
        }
        let mut coords = Vec::with_capacity(points.len() * dimension);
        for p in &points {
            if p.len() != dimension {
                return Err(Error::domain(format!(
                    "point has {} coordinates, expected {dimension}",
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Ok(PointSet {
            dimension,
            truncation,
            n_parameter,
            coords,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn truncation(&self) -> i64 {
        self.truncation
    }

    pub fn n_parameter(&self) -> u64 {
        self.n_parameter
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[Coord] {
        &self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Coord]> + '_ {
        self.coords.chunks_exact(self.dimension)
    }

    /// Binary search; valid because construction order is lexicographic and
    /// subsets preserve it.
    pub fn contains(&self, p: &[Coord]) -> bool {
        if p.len() != self.dimension {
            return false;
        }
        let mut lo = 0usize;
        let mut hi = self.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.point(mid).cmp(p) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// New set holding the points at the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(indices.len() * self.dimension);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointSet {
            dimension: self.dimension,
            truncation: self.truncation,
            n_parameter: self.n_parameter,
            coords,
        }
    }

    /// Uniform sample of `size` distinct points, order-preserving.
    pub fn random_subset(&self, size: usize, rng: &mut SplitMix64) -> PointSet {
        let size = size.min(self.len());
        // Floyd's sampling: distinct indices with exactly `size` draws.
        let mut chosen: Vec<usize> = Vec::with_capacity(size);
        let n = self.len();
        for j in n - size..n {
            let t = rng.next_below((j + 1) as u64) as usize;
            if chosen.contains(&t) {
                chosen.push(j);
            } else {
                chosen.push(t);
            }
        }
        chosen.sort_unstable();
        self.subset(&chosen)
    }

    /// Line-oriented text form: header "d B n", then one point per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{} {} {}\n",
            self.dimension, self.truncation, self.n_parameter
        ));
        for p in self.iter() {
            let line: Vec<String> = p.iter().map(|c| c.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PointSet> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty point file"))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 {
            return Err(Error::parse(1, "header must be \"d B n\""));
        }
        let dimension: usize = head[0]
            .parse()
            .map_err(|e| Error::parse(1, format!("bad dimension: {e}")))?;
        if dimension < 2 {
            return Err(Error::parse(1, format!("dimension {dimension} < 2")));
        }
        let truncation: i64 = head[1]
            .parse()
            .map_err(|e| Error::parse(1, format!("bad truncation: {e}")))?;
        let n_parameter: u64 = head[2]
            .parse()
            .map_err(|e| Error::parse(1, format!("bad n: {e}")))?;
        let mut coords = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parsed = 0usize;
            for tok in line.split_whitespace() {
                let c: i64 = tok
                    .parse()
                    .map_err(|e| Error::parse(idx + 1, format!("bad coordinate {tok:?}: {e}")))?;
                coords.push(c);
                parsed += 1;
            }
            if parsed != dimension {
                return Err(Error::parse(
                    idx + 1,
                    format!("expected {dimension} coordinates, found {parsed}"),
                ));
            }
        }
        Ok(PointSet {
            dimension,
            truncation,
            n_parameter,
            coords,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nth_root_is_exact_floor() {
        assert_eq!(integer_nth_root(27, 3), 3);
        assert_eq!(integer_nth_root(26, 3), 2);
        assert_eq!(integer_nth_root(1, 5), 1);
        assert_eq!(integer_nth_root(u64::MAX, 2), 4_294_967_295);
        assert_eq!(integer_nth_root_ceil(27, 3), 3);
        assert_eq!(integer_nth_root_ceil(28, 3), 4);
    }

    #[test]
    fn cardinality_d4_n27() {
        let ps = build_point_set(4, 27).unwrap();
        assert_eq!(ps.truncation(), 3);
        assert_eq!(ps.len(), 343);
    }

    #[test]
    fn cardinality_by_bound() {
        assert_eq!(build_point_set_with_bound(4, 1).unwrap().len(), 27);
        assert_eq!(build_point_set_with_bound(6, 1).unwrap().len(), 243);
        assert_eq!(build_point_set_with_bound(3, 0).unwrap().len(), 1);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_point_set(1, 5).is_err());
        assert!(build_point_set(4, 0).is_err());
        assert!(build_point_set_with_bound(4, -1).is_err());
    }

    #[test]
    fn generated_sets_validate_and_are_sorted() {
        for d in 2..=5 {
            for b in 0..=3 {
                let ps = build_point_set_with_bound(d, b).unwrap();
                assert!(validate_point_set(&ps).valid, "d={d} B={b}");
                for i in 1..ps.len() {
                    assert!(ps.point(i - 1) < ps.point(i));
                }
            }
        }
    }

    #[test]
    fn validation_catches_defects() {
        let ps = build_point_set_with_bound(4, 1).unwrap();

        let mut bumped: Vec<Vec<i64>> = ps.iter().map(|p| p.to_vec()).collect();
        bumped[5][3] += 1;
        let broken = PointSet::from_points(4, 1, 1, bumped).unwrap();
        let v = validate_point_set(&broken);
        assert!(!v.valid);
        assert!(v.diagnostic.unwrap().contains("off the paraboloid"));

        let mut duped: Vec<Vec<i64>> = ps.iter().map(|p| p.to_vec()).collect();
        duped[3] = duped[4].clone();
        let broken = PointSet::from_points(4, 1, 1, duped).unwrap();
        let v = validate_point_set(&broken);
        assert!(!v.valid);
        assert!(v.diagnostic.unwrap().contains("duplicate"));

        let short = ps.subset(&[0, 1, 2]);
        assert!(!validate_point_set(&short).valid);
    }

    #[test]
    fn membership_binary_search() {
        let ps = build_point_set_with_bound(4, 2).unwrap();
        assert!(ps.contains(&[1, -2, 0, 5]));
        assert!(!ps.contains(&[1, -2, 0, 4]));
        assert!(!ps.contains(&[1, -2, 0]));
    }

    #[test]
    fn subsets_sample_distinct_points() {
        let ps = build_point_set_with_bound(4, 2).unwrap();
        let mut rng = SplitMix64::new(11);
        let sub = ps.random_subset(30, &mut rng);
        assert_eq!(sub.len(), 30);
        let uniq: HashSet<&[i64]> = sub.iter().collect();
        assert_eq!(uniq.len(), 30);
        for p in sub.iter() {
            assert!(ps.contains(p));
        }
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let ps = build_point_set_with_bound(5, 1).unwrap();
        let text = ps.to_text();
        let back = PointSet::from_text(&text).unwrap();
        assert_eq!(back, ps);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = PointSet::from_text("4 1 1\n0 0 0 0\n0 0 zero 0\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
