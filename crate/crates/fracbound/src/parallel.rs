//! Thread-count-invariant parallel path execution.
//!
//! Each path index maps to its own RNG stream, results are collected in
//! index order and reduced sequentially, so the numbers are bit-identical
//! for any worker count.

use anyhow::Result;
use rayon::prelude::*;
use rayon::ThreadPoolBuilder;

/// Run `f(0..paths)` on `threads` workers (0 = rayon default) and return the
/// results in index order.
pub fn map_paths<T, F>(threads: usize, paths: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if threads == 1 {
        return Ok((0..paths).map(f).collect());
    }
    let pool = ThreadPoolBuilder::new().num_threads(threads).build()?;
    Ok(pool.install(|| (0..paths).into_par_iter().map(f).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fracbound_core::rng::PathRng;

    #[test]
    fn identical_across_thread_counts() {
        let job = |i: usize| {
            let mut rng = PathRng::stream(5, i as u64);
            (0..100).map(|_| rng.std_normal()).sum::<f64>()
        };
        let serial = map_paths(1, 64, job).unwrap();
        let quad = map_paths(4, 64, job).unwrap();
        let auto = map_paths(0, 64, job).unwrap();
        assert_eq!(serial, quad);
        assert_eq!(serial, auto);
    }
}
