//! Order-preserving data-parallel helpers.
//!
//! With the `parallel` feature these dispatch onto rayon; without it every
//! helper runs sequentially. Results never depend on the worker count: each
//! item is computed independently and outputs keep input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Number of workers to use when the caller passes `0`.
pub fn available_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Maps `f` over `items` on a pool of `workers` threads (`0` = all cores),
/// returning results in input order.
pub fn map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers != 1 && items.len() > 1 {
            let run = || items.par_iter().map(&f).collect();
            if workers == 0 {
                return run();
            }
            match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                Ok(pool) => return pool.install(run),
                Err(e) => log::warn!("falling back to sequential execution: {e}"),
            }
        }
    }
    let _ = workers;
    items.iter().map(f).collect()
}

/// Fills `data` in chunks of `chunk_len`, passing each chunk's index.
/// Uses the global pool when parallel.
pub fn fill_chunks<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
}

/// Sequential twin of [`fill_chunks`], kept callable under either feature
/// setting so benchmarks can compare both paths.
pub fn fill_chunks_sequential<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    F: Fn(usize, &mut [T]),
{
    data.chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_keeps_order_for_any_worker_count() {
        let items: Vec<u64> = (0..257).collect();
        let expected: Vec<u64> = items.iter().map(|x| x * x + 1).collect();
        for workers in [0, 1, 2, 8] {
            assert_eq!(map(&items, workers, |x| x * x + 1), expected);
        }
    }

    #[test]
    fn fill_chunks_matches_sequential() {
        let mut a = vec![0usize; 103];
        let mut b = vec![0usize; 103];
        fill_chunks(&mut a, 10, |i, c| c.iter_mut().enumerate().for_each(|(j, v)| *v = i * 10 + j));
        fill_chunks_sequential(&mut b, 10, |i, c| {
            c.iter_mut().enumerate().for_each(|(j, v)| *v = i * 10 + j)
        });
        assert_eq!(a, b);
        assert_eq!(a, (0..103).collect::<Vec<_>>());
    }
}
