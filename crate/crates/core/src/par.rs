//! Data-parallel maps with an ordered, sequential fallback.
//!
//! Results are always collected in index order, and every reduction over them
//! happens afterwards on a single thread, so outputs are bitwise identical for
//! either execution mode and any thread count.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// `(0..len).map(f)` collected in order.
pub fn map_range<T, F>(len: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// `items.iter().map(f)` collected in order.
pub fn map_slice<S, T, F>(items: &[S], exec: Execution, f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_range(items.len(), exec, |k| f(&items[k]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_bitwise() {
        let f = |k: usize| (k as f64).sqrt().sin() / (1.0 + k as f64);
        let seq = map_range(1000, Execution::Sequential, f);
        let par = map_range(1000, Execution::Parallel, f);
        let sum = |v: &[f64]| v.iter().fold(0.0, |a, b| a + b);
        assert_eq!(sum(&seq).to_bits(), sum(&par).to_bits());
        assert_eq!(seq, par);
    }
}
