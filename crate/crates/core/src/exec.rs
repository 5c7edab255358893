//! Deterministic work partitioning shared by the parallel code paths.
//!
//! Parallel reductions in this crate only merge results with commutative,
//! associative integer operations, or fold chunk results in a fixed order
//! after an ordered collect. Either way the partition itself is a pure
//! function of the input length, never of thread scheduling.

/// Split `0..len` into at most `chunks` contiguous ranges of near-equal size.
pub fn chunk_bounds(len: usize, chunks: usize) -> Vec<(usize, usize)> {
    if len == 0 {
        return Vec::new();
    }
    let chunks = chunks.clamp(1, len);
    let base = len / chunks;
    let extra = len % chunks;
    let mut out = Vec::with_capacity(chunks);
    let mut start = 0;
    for i in 0..chunks {
        let size = base + usize::from(i < extra);
        out.push((start, start + size));
        start += size;
    }
    out
}

/// Default chunk count for a workload of `len` items: enough to saturate the
/// pool while keeping per-chunk state (hash maps, bitsets) coarse.
pub fn default_chunks(len: usize) -> usize {
    #[cfg(feature = "parallel")]
    {
        (rayon::current_num_threads() * 4).clamp(1, len.max(1))
    }
    #[cfg(not(feature = "parallel"))]
    {
        1usize.max(len.min(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_cover_range_exactly() {
        for len in [0usize, 1, 2, 7, 100, 101] {
            for chunks in [1usize, 2, 3, 8, 200] {
                let b = chunk_bounds(len, chunks);
                let mut cursor = 0;
                for (s, e) in &b {
                    assert_eq!(*s, cursor);
                    assert!(e > s);
                    cursor = *e;
                }
                assert_eq!(cursor, len);
            }
        }
    }

    #[test]
    fn bounds_are_balanced() {
        let b = chunk_bounds(10, 3);
        let sizes: Vec<usize> = b.iter().map(|(s, e)| e - s).collect();
        assert_eq!(sizes, vec![4, 3, 3]);
    }
}
