//! Benchmark inputs shared by the criterion targets.

use dclab_core::Parameters;

/// A parameter point with two cycles in the first annulus.
pub fn two_cycle_point() -> Parameters {
    Parameters::new(-8.83e-5, 0.05, 9.0e-4, 0.0, 0.05)
}

pub const ARC: &str = "l1=e;l2=e^2;l3=-e+3/2*e^2;l4=-2*e;l5=e^2";
