//! Additive energy: exact sum-multiplicity tables, the quadruple-count
//! oracle, and a quadrature cross-check of the torus-integral identity.

use smallvec::SmallVec;
use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::lattice::{Coord, PointSet};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sum vector key; inline up to d = 8.
pub type SumVec = SmallVec<[Coord; 8]>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumEntry {
    pub sum: SumVec,
    /// Ordered pair count r(v).
    pub r: u64,
    /// Unordered pair count mu(v), diagonal pairs included.
    pub mu: u64,
}

/// All distinct pair sums of a point set with exact multiplicities, sorted
/// lexicographically by sum vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumMultiplicityTable {
    dimension: usize,
    entries: Vec<SumEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyMethod {
    Table,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyReport {
    pub energy: u128,
    pub point_count: usize,
    pub n_parameter: u64,
    pub method: EnergyMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureEstimate {
    pub estimate: f64,
    pub grid: u32,
    pub point_count: usize,
}

fn add_pair(map: &mut HashMap<SumVec, (u64, bool)>, a: &[Coord], b: &[Coord], diagonal: bool) {
    let sum: SumVec = a.iter().zip(b).map(|(x, y)| x + y).collect();
    let slot = map.entry(sum).or_insert((0, false));
    slot.0 += 1;
    slot.1 |= diagonal;
}

fn rows_to_map(ps: &PointSet, rows: std::ops::Range<usize>) -> HashMap<SumVec, (u64, bool)> {
    let mut map = HashMap::new();
    for i in rows {
        let a = ps.point(i);
        add_pair(&mut map, a, a, true);
        for j in i + 1..ps.len() {
            add_pair(&mut map, a, ps.point(j), false);
        }
    }
    map
}

fn finish_table(ps: &PointSet, map: HashMap<SumVec, (u64, bool)>) -> SumMultiplicityTable {
    let mut entries: Vec<SumEntry> = map
        .into_iter()
        .map(|(sum, (mu, diagonal))| SumEntry {
            sum,
            r: 2 * mu - u64::from(diagonal),
            mu,
        })
        .collect();
    entries.sort_unstable_by(|a, b| a.sum.cmp(&b.sum));
    SumMultiplicityTable {
        dimension: ps.dimension(),
        entries,
    }
}

/// Sequential pair enumeration.
pub fn sum_multiplicities_seq(ps: &PointSet) -> SumMultiplicityTable {
    finish_table(ps, rows_to_map(ps, 0..ps.len()))
}

/// Parallel pair enumeration; per-worker tables merge by addition, so the
/// result is independent of thread count.
#[cfg(feature = "parallel")]
pub fn sum_multiplicities_par(ps: &PointSet) -> SumMultiplicityTable {
    let chunks = crate::exec::chunk_bounds(ps.len(), crate::exec::default_chunks(ps.len()));
    let map = chunks
        .into_par_iter()
        .map(|(lo, hi)| rows_to_map(ps, lo..hi))
        .reduce(HashMap::new, |mut acc, part| {
            for (sum, (mu, diag)) in part {
                let slot = acc.entry(sum).or_insert((0, false));
                slot.0 += mu;
                slot.1 |= diag;
            }
            acc
        });
    finish_table(ps, map)
}

pub fn sum_multiplicities(ps: &PointSet) -> SumMultiplicityTable {
    #[cfg(feature = "parallel")]
    {
        sum_multiplicities_par(ps)
    }
    #[cfg(not(feature = "parallel"))]
    {
        sum_multiplicities_seq(ps)
    }
}

impl SumMultiplicityTable {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[SumEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, v: &[Coord]) -> Option<&SumEntry> {
        self.entries
            .binary_search_by(|e| e.sum.as_slice().cmp(v))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn total_ordered(&self) -> u128 {
        self.entries.iter().map(|e| e.r as u128).sum()
    }

    pub fn total_unordered(&self) -> u128 {
        self.entries.iter().map(|e| e.mu as u128).sum()
    }

    pub fn energy(&self) -> u128 {
        self.entries
            .iter()
            .map(|e| (e.r as u128) * (e.r as u128))
            .sum()
    }

    /// Text form: one line per sum, "v_1 ... v_d r mu", already sorted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            for c in &e.sum {
                out.push_str(&c.to_string());
                out.push(' ');
            }
            out.push_str(&format!("{} {}\n", e.r, e.mu));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<SumMultiplicityTable> {
        let mut entries = Vec::new();
        let mut dimension = 0usize;
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() < 4 {
                return Err(Error::parse(idx + 1, "expected v_1 ... v_d r mu"));
            }
            let d = toks.len() - 2;
            if dimension == 0 {
                dimension = d;
            } else if d != dimension {
                return Err(Error::parse(
                    idx + 1,
                    format!("expected {dimension} sum coordinates, found {d}"),
                ));
            }
            let mut sum = SumVec::new();
            for tok in &toks[..d] {
                sum.push(
                    tok.parse()
                        .map_err(|e| Error::parse(idx + 1, format!("bad coordinate: {e}")))?,
                );
            }
            let r: u64 = toks[d]
                .parse()
                .map_err(|e| Error::parse(idx + 1, format!("bad r: {e}")))?;
            let mu: u64 = toks[d + 1]
                .parse()
                .map_err(|e| Error::parse(idx + 1, format!("bad mu: {e}")))?;
            entries.push(SumEntry { sum, r, mu });
        }
        if entries.is_empty() {
            return Err(Error::parse(1, "empty sum table"));
        }
        Ok(SumMultiplicityTable {
            dimension,
            entries,
        })
    }
}

/// E(P) via the sum table: sum of r(v)^2.
pub fn additive_energy(ps: &PointSet) -> EnergyReport {
    EnergyReport {
        energy: sum_multiplicities(ps).energy(),
        point_count: ps.len(),
        n_parameter: ps.n_parameter(),
        method: EnergyMethod::Table,
    }
}

pub fn additive_energy_seq(ps: &PointSet) -> EnergyReport {
    EnergyReport {
        energy: sum_multiplicities_seq(ps).energy(),
        point_count: ps.len(),
        n_parameter: ps.n_parameter(),
        method: EnergyMethod::Table,
    }
}

const BRUTE_FORCE_CAP: usize = 200;

/// Quadruple-count oracle: enumerate (a,b,c) and test a+b-c for membership.
pub fn energy_brute_force(ps: &PointSet) -> Result<EnergyReport> {
    if ps.len() > BRUTE_FORCE_CAP {
        return Err(Error::size_limit(format!(
            "brute-force energy limited to {BRUTE_FORCE_CAP} points, got {}",
            ps.len()
        )));
    }
    let members: HashSet<&[Coord]> = ps.iter().collect();
    let d = ps.dimension();
    let mut energy: u128 = 0;
    let mut probe: SumVec = SmallVec::from_elem(0, d);
    for a in ps.iter() {
        for b in ps.iter() {
            for c in ps.iter() {
                for i in 0..d {
                    probe[i] = a[i] + b[i] - c[i];
                }
                if members.contains(probe.as_slice()) {
                    energy += 1;
                }
            }
        }
    }
    Ok(EnergyReport {
        energy,
        point_count: ps.len(),
        n_parameter: ps.n_parameter(),
        method: EnergyMethod::BruteForce,
    })
}

const QUADRATURE_POINT_CAP: usize = 50;
const QUADRATURE_GRID_CAP: u128 = 100_000_000;

/// Midpoint-rule approximation of the integral of |sum_p e(x.p)|^4 over the
/// unit torus. All grid phases are rationals with denominator 2*grid, so the
/// integrand is evaluated from a shared table of roots of unity.
///
/// Accumulation is per-slice along the first axis with an ordered fold, so
/// the value is identical for the sequential and parallel paths and for any
/// thread count.
pub fn quadrature_energy_estimate(ps: &PointSet, grid: u32) -> Result<QuadratureEstimate> {
    if ps.is_empty() {
        return Err(Error::domain("empty point set"));
    }
    if ps.len() > QUADRATURE_POINT_CAP {
        return Err(Error::size_limit(format!(
            "quadrature limited to {QUADRATURE_POINT_CAP} points, got {}",
            ps.len()
        )));
    }
    if grid < 1 {
        return Err(Error::domain("grid must be at least 1"));
    }
    let d = ps.dimension();
    let mut cells: u128 = 1;
    for _ in 0..d {
        cells = cells.saturating_mul(grid as u128);
        if cells > QUADRATURE_GRID_CAP {
            return Err(Error::size_limit(format!(
                "grid {grid}^{d} exceeds {QUADRATURE_GRID_CAP} cells"
            )));
        }
    }

    let order = 2 * grid as usize;
    let mut cos_table = Vec::with_capacity(order);
    let mut sin_table = Vec::with_capacity(order);
    for k in 0..order {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / (order as f64);
        cos_table.push(theta.cos());
        sin_table.push(theta.sin());
    }

    let slice_sum = |j0: u32| -> f64 {
        let mut acc = 0.0f64;
        let mut tail = vec![0u32; d - 1];
        loop {
            let mut re = 0.0f64;
            let mut im = 0.0f64;
            for p in ps.iter() {
                // Phase numerator sum_i (2 j_i + 1) p_i over denominator 2g.
                let mut k: i64 = (2 * j0 as i64 + 1) * p[0];
                for (t, &pi) in tail.iter().zip(&p[1..]) {
                    k += (2 * *t as i64 + 1) * pi;
                }
                let k = (k.rem_euclid(order as i64)) as usize;
                re += cos_table[k];
                im += sin_table[k];
            }
            let norm2 = re * re + im * im;
            acc += norm2 * norm2;

            let mut axis = d - 1;
            loop {
                if axis == 0 {
                    return acc;
                }
                axis -= 1;
                if tail[axis] + 1 < grid {
                    tail[axis] += 1;
                    for slot in tail.iter_mut().skip(axis + 1) {
                        *slot = 0;
                    }
                    break;
                }
            }
        }
    };

    #[cfg(feature = "parallel")]
    let slices: Vec<f64> = (0..grid).into_par_iter().map(slice_sum).collect();
    #[cfg(not(feature = "parallel"))]
    let slices: Vec<f64> = (0..grid).map(slice_sum).collect();

    let total: f64 = slices.iter().sum();
    Ok(QuadratureEstimate {
        estimate: total / cells as f64,
        grid,
        point_count: ps.len(),
    })
}
