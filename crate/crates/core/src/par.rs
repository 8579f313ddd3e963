//! Data-parallel helpers. Without the `parallel` feature everything runs on
//! the calling thread and [`Exec::Parallel`] degrades to sequential.

/// How to spread independent work items.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Rayon's global pool, or a dedicated pool of the given size.
    #[default]
    Parallel,
    Threads(usize),
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self != Exec::Sequential
    }
}

/// `sum_{k < n} f(k)`; the result does not depend on the schedule.
pub fn sum_range<F>(n: u64, exec: Exec, f: F) -> u64
where
    F: Fn(u64) -> u64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match exec {
            Exec::Sequential => {}
            Exec::Parallel => return (0..n).into_par_iter().map(&f).sum(),
            Exec::Threads(t) => {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
                    return pool.install(|| (0..n).into_par_iter().map(&f).sum());
                }
            }
        }
    }
    let _ = exec;
    (0..n).map(f).sum()
}

/// Order-preserving map over a slice.
pub fn map_vec<T, R, F>(items: &[T], exec: Exec, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if exec.is_parallel() {
            return items.par_iter().map(&f).collect();
        }
    }
    let _ = exec;
    items.iter().map(f).collect()
}
