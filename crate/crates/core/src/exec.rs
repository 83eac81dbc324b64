//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the [`Execution::Parallel`] mode
//! runs on the rayon global pool, or on a scoped pool sized by
//! [`with_jobs`]. Without the feature every mode runs sequentially. Results
//! always come back in input order, so callers stay deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `Parallel` only when the crate was built with rayon.
    pub fn effective(self) -> Execution {
        if cfg!(feature = "parallel") {
            self
        } else {
            Execution::Sequential
        }
    }
}

pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec.effective() {
        Execution::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel => unreachable!(),
    }
}

pub fn map_range<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec.effective() {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel => unreachable!(),
    }
}

/// Fill rows of a row-major buffer in place.
pub fn for_each_row<T, F>(exec: Execution, data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if row_len == 0 {
        return;
    }
    match exec.effective() {
        Execution::Sequential => data
            .chunks_mut(row_len)
            .enumerate()
            .for_each(|(i, row)| f(i, row)),
        #[cfg(feature = "parallel")]
        Execution::Parallel => data
            .par_chunks_mut(row_len)
            .enumerate()
            .for_each(|(i, row)| f(i, row)),
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel => unreachable!(),
    }
}

/// Run `f` with at most `jobs` worker threads. `jobs == 0` uses the global
/// pool; `jobs == 1` forces sequential execution.
pub fn with_jobs<R, F>(jobs: usize, f: F) -> R
where
    R: Send,
    F: FnOnce(Execution) -> R + Send,
{
    if jobs == 1 {
        return f(Execution::Sequential);
    }
    #[cfg(feature = "parallel")]
    {
        if jobs > 1 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                return pool.install(|| f(Execution::Parallel));
            }
        }
        f(Execution::Parallel)
    }
    #[cfg(not(feature = "parallel"))]
    {
        f(Execution::Sequential)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map(Execution::Sequential, &xs, |x| x * x);
        let b = map(Execution::Parallel, &xs, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(map_range(Execution::Parallel, 5, |i| i), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn rows_filled_in_place() {
        let mut buf = vec![0usize; 12];
        for_each_row(Execution::Parallel, &mut buf, 4, |i, row| row.fill(i));
        assert_eq!(buf, vec![0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]);
        assert_eq!(with_jobs(1, |e| e), Execution::Sequential);
    }
}
