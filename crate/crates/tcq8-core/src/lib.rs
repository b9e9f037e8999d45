//! Certified computation of the topological complexity of S^3/Q_8.
//!
//! The library builds three families of finite chain complexes — the CW
//! model of the quaternionic space forms S^{4n+3}/H_m, the bar-resolution
//! skeleton of BQ_8, and the twisted product S^3 x_ad P^m(Q_8) — computes
//! their (co)homology over Z and F_2, certifies the mod-2 cohomology ring
//! relations and the zero-divisor lower bounds, and settles the decisive
//! degree-six coboundary equation over GF(2). The end result is a
//! machine-checkable certificate that TC(S^3/Q_8) = 6.

pub mod bar;
pub mod certificate;
pub mod complex;
pub mod error;
pub mod gf2;
pub mod group;
pub mod pipeline;
pub mod ring;
pub mod space_form;
pub mod twisted;

pub use error::{Error, Result};

/// Initializes the global worker pool from the `TCQ8_THREADS` environment
/// variable. A missing or invalid value leaves the default pool size. Without
/// the `parallel` feature this is a no-op: everything runs sequentially.
pub fn init_workers_from_env() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(v) = std::env::var("TCQ8_THREADS") {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n > 0 {
                    // Ignore failure: the pool can only be set once.
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                }
            }
        }
    }
}
