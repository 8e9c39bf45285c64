//! Replica execution: rayon worker pool or plain loop.

use crate::rng::derive_key;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// `threads = None` uses rayon's default pool size.
    #[default]
    Parallel,
    Threads(usize),
}

impl Execution {
    /// `0` means the default pool.
    pub fn from_threads(threads: usize) -> Self {
        match threads {
            0 => Execution::Parallel,
            1 => Execution::Sequential,
            t => Execution::Threads(t),
        }
    }

    pub fn is_parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Seed of replica `index` under a base seed.
pub fn replica_seed(base: u64, index: u64) -> u64 {
    derive_key(base, index)
}

/// `f(0..count)` collected in index order. Without the `parallel` feature every mode runs sequentially.
pub fn map_replicas<T, F>(exec: Execution, count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match exec {
            Execution::Sequential => (0..count).map(f).collect(),
            Execution::Parallel => (0..count).into_par_iter().map(f).collect(),
            Execution::Threads(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
                Err(_) => (0..count).map(f).collect(),
            },
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = exec;
        (0..count).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_independent_of_execution() {
        let f = |i: u64| replica_seed(7, i) % 1000;
        let a = map_replicas(Execution::Sequential, 100, f);
        let b = map_replicas(Execution::Threads(3), 100, f);
        let c = map_replicas(Execution::Parallel, 100, f);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn thread_count_mapping() {
        assert_eq!(Execution::from_threads(0), Execution::Parallel);
        assert_eq!(Execution::from_threads(1), Execution::Sequential);
        assert_eq!(Execution::from_threads(4), Execution::Threads(4));
    }
}
