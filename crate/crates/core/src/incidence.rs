//! Exact incidence counting between point sets and hyperplane sets, plus the
//! pairwise co-occurrence maxima that certify K_{2,t}-freeness.
//!
//! Planes with moderate integer coefficients are evaluated through an i64
//! snapshot with i128 accumulation; anything else falls back to full
//! rational arithmetic. Both paths are exact.

use crate::error::{Error, Result};
use crate::hyperplanes::{Hyperplane, IntHyperplane};
use crate::lattice::{Coord, PointSet};
use crate::rational::Rat;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

enum Prepared<'a> {
    Int(IntHyperplane),
    Exact(&'a Hyperplane),
}

fn prepare(planes: &[Hyperplane]) -> Vec<Prepared<'_>> {
    planes
        .iter()
        .map(|h| match h.as_int() {
            Some(int) => Prepared::Int(int),
            None => Prepared::Exact(h),
        })
        .collect()
}

impl Prepared<'_> {
    fn contains(&self, p: &[Coord]) -> bool {
        match self {
            Prepared::Int(h) => h.contains(p),
            Prepared::Exact(h) => h.contains_lattice(p),
        }
    }
}

fn plane_count(ps: &PointSet, plane: &Prepared<'_>) -> u64 {
    let mut n = 0u64;
    for p in ps.iter() {
        n += u64::from(plane.contains(p));
    }
    n
}

/// Number of (point, plane) incidences, sequential path.
pub fn count_incidences_seq(ps: &PointSet, planes: &[Hyperplane]) -> u64 {
    prepare(planes)
        .iter()
        .map(|h| plane_count(ps, h))
        .sum()
}

/// Parallel over planes; integer sums merge commutatively, so the total is
/// independent of thread count.
#[cfg(feature = "parallel")]
pub fn count_incidences_par(ps: &PointSet, planes: &[Hyperplane]) -> u64 {
    prepare(planes)
        .par_iter()
        .map(|h| plane_count(ps, h))
        .sum()
}

pub fn count_incidences(ps: &PointSet, planes: &[Hyperplane]) -> u64 {
    #[cfg(feature = "parallel")]
    {
        count_incidences_par(ps, planes)
    }
    #[cfg(not(feature = "parallel"))]
    {
        count_incidences_seq(ps, planes)
    }
}

/// Incidences for rational point configurations (dual images and the like).
pub fn count_incidences_rational(points: &[Vec<Rat>], planes: &[Hyperplane]) -> u64 {
    let body = |h: &Hyperplane| -> u64 {
        points.iter().map(|p| u64::from(h.contains(p))).sum()
    };
    #[cfg(feature = "parallel")]
    {
        planes.par_iter().map(body).sum()
    }
    #[cfg(not(feature = "parallel"))]
    {
        planes.iter().map(body).sum()
    }
}

/// Per-plane sorted lists of incident point indices.
pub fn incidence_lists(ps: &PointSet, planes: &[Hyperplane]) -> Vec<Vec<u32>> {
    let prepared = prepare(planes);
    let body = |h: &Prepared<'_>| -> Vec<u32> {
        let mut list = Vec::new();
        for (i, p) in ps.iter().enumerate() {
            if h.contains(p) {
                list.push(i as u32);
            }
        }
        list
    };
    #[cfg(feature = "parallel")]
    {
        prepared.par_iter().map(body).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        prepared.iter().map(body).collect()
    }
}

fn transpose(lists: &[Vec<u32>], universe: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new(); universe];
    for (container, list) in lists.iter().enumerate() {
        for &item in list {
            out[item as usize].push(container as u32);
        }
    }
    out
}

/// Max over pairs of left vertices of their number of shared right
/// neighbors, with the lexicographically least witnessing pair. `left_adj`
/// and `right_adj` are the two directions of the same bipartite graph.
fn max_shared_neighbors(
    left_adj: &[Vec<u32>],
    right_adj: &[Vec<u32>],
) -> (u64, Option<(u32, u32)>) {
    let per_left = |l: usize| -> (u64, Option<(u32, u32)>) {
        let mut counts: std::collections::HashMap<u32, u64> = std::collections::HashMap::new();
        for &r in &left_adj[l] {
            for &l2 in &right_adj[r as usize] {
                if (l2 as usize) > l {
                    *counts.entry(l2).or_insert(0) += 1;
                }
            }
        }
        let mut best: (u64, Option<(u32, u32)>) = (0, None);
        for (&l2, &c) in &counts {
            if c > best.0 || (c == best.0 && best.1.map_or(true, |(_, w)| l2 < w)) {
                best = (c, Some((l as u32, l2)));
            }
        }
        best
    };
    let merge = |a: (u64, Option<(u32, u32)>), b: (u64, Option<(u32, u32)>)| {
        use std::cmp::Ordering;
        match a.0.cmp(&b.0) {
            Ordering::Greater => a,
            Ordering::Less => b,
            Ordering::Equal => match (a.1, b.1) {
                (Some(x), Some(y)) => {
                    if x <= y {
                        a
                    } else {
                        b
                    }
                }
                (Some(_), None) => a,
                _ => b,
            },
        }
    };
    #[cfg(feature = "parallel")]
    {
        (0..left_adj.len())
            .into_par_iter()
            .map(per_left)
            .reduce(|| (0, None), merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..left_adj.len()).map(per_left).fold((0, None), merge)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxCommonReport {
    /// Largest number of points shared by two distinct planes.
    pub t_max: u64,
    /// Indices into the plane list of one extremal pair.
    pub witness: Option<(usize, usize)>,
}

const INCIDENCE_LIST_GUARD: u128 = 1_000_000_000;
const COOCCURRENCE_GUARD: u128 = 10_000_000_000;

/// Shared-neighbor increments the co-occurrence pass will perform: each
/// right vertex of degree d charges C(d, 2) plane pairs.
fn shared_neighbor_work(right_adj: &[Vec<u32>]) -> u128 {
    right_adj
        .iter()
        .map(|l| {
            let d = l.len() as u128;
            d * d.saturating_sub(1) / 2
        })
        .sum()
}

fn guard_list_size(points: usize, planes: usize) -> Result<()> {
    if points as u128 * planes as u128 > INCIDENCE_LIST_GUARD {
        return Err(Error::size_limit(format!(
            "incidence lists over {points} points x {planes} planes exceed the {INCIDENCE_LIST_GUARD} cell guard"
        )));
    }
    Ok(())
}

fn guard_cooccurrence(work: u128, what: &str) -> Result<()> {
    if work > COOCCURRENCE_GUARD {
        return Err(Error::size_limit(format!(
            "{what} needs {work} co-occurrence steps, over the {COOCCURRENCE_GUARD} work guard"
        )));
    }
    Ok(())
}

/// Max over unordered plane pairs of |H ∩ H' ∩ P|, with a witnessing pair.
/// Certifies that the configuration has no K_{2, t_max + 1}.
pub fn max_common_points(ps: &PointSet, planes: &[Hyperplane]) -> Result<MaxCommonReport> {
    guard_list_size(ps.len(), planes.len())?;
    if planes.len() < 2 {
        return Ok(MaxCommonReport {
            t_max: 0,
            witness: None,
        });
    }
    let lists = incidence_lists(ps, planes);
    let by_point = transpose(&lists, ps.len());
    guard_cooccurrence(
        shared_neighbor_work(&by_point),
        "pairwise plane intersection",
    )?;
    let (t_max, witness) = max_shared_neighbors(&lists, &by_point);
    Ok(MaxCommonReport {
        t_max,
        witness: witness.map(|(a, b)| (a as usize, b as usize)),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCoverReport {
    /// Largest number of planes through two distinct points.
    pub max_planes: u64,
    /// Indices into the point set of one extremal pair.
    pub witness: Option<(usize, usize)>,
}

/// Max over unordered point pairs of the number of planes containing both
/// (the dual direction of `max_common_points`).
pub fn max_planes_through_point_pair(
    ps: &PointSet,
    planes: &[Hyperplane],
) -> Result<PairCoverReport> {
    guard_list_size(ps.len(), planes.len())?;
    if ps.len() < 2 {
        return Ok(PairCoverReport {
            max_planes: 0,
            witness: None,
        });
    }
    let lists = incidence_lists(ps, planes);
    let by_point = transpose(&lists, ps.len());
    guard_cooccurrence(shared_neighbor_work(&lists), "pairwise point cover")?;
    let (max_planes, witness) = max_shared_neighbors(&by_point, &lists);
    Ok(PairCoverReport {
        max_planes,
        witness: witness.map(|(a, b)| (a as usize, b as usize)),
    })
}
