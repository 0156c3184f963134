//! Thin switch between rayon and sequential execution.
//!
//! Element order and per-element arithmetic are identical in both modes, so
//! results do not depend on the feature or the thread count.

#[cfg(feature = "parallel")]
pub fn map_indexed<R: Send, F: Sync + Send + Fn(usize) -> R>(n: usize, f: F) -> Vec<R> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<R, F: Fn(usize) -> R>(n: usize, f: F) -> Vec<R> {
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_slice<T: Sync, R: Send, F: Sync + Send + Fn(&T) -> R>(items: &[T], f: F) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_slice<T, R, F: Fn(&T) -> R>(items: &[T], f: F) -> Vec<R> {
    items.iter().map(f).collect()
}
