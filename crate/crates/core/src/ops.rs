//! Arithmetic operation counter.
//!
//! Every kernel routine adds its multiply-add count to a thread-local tally.
//! Complexity tests read the tally around a call with [`measure`].

use std::cell::Cell;

thread_local! {
    static COUNT: Cell<u64> = const { Cell::new(0) };
}

#[inline]
pub fn add(n: u64) {
    COUNT.with(|c| c.set(c.get().wrapping_add(n)));
}

pub fn current() -> u64 {
    COUNT.with(|c| c.get())
}

/// Runs `f` and returns its result with the number of counted operations.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let start = current();
    let out = f();
    (out, current() - start)
}

/// Least-squares slope of log(y) against log(x).
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}
