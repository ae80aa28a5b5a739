//! Node-evaluation strategy used by the integrators.

use alloc::vec::Vec;

/// Evaluates `f(0..n)` and returns the results in index order.
///
/// Implementations may run the calls concurrently, but the returned vector
/// must be ordered by index so that every reduction downstream happens in a
/// fixed order.
pub trait Executor: Sync {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every evaluation on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
