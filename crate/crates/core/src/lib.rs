//! Bifurcation laboratory for quadratic perturbations of the Lotka-Volterra
//! double center `z' = iz - z²`.

pub mod bautin;
pub mod curvegeom;
pub mod error;
pub mod flowsim;
pub mod melnikov;
pub mod pathint;
pub mod ratcalc;
pub mod sweep;

pub use bautin::{ArcClass, ArcGerm, DivisorComponent, ProjectivePair};
pub use curvegeom::Parameters;
pub use error::{Error, Result};
pub use flowsim::{Census, CensusOptions};
pub use melnikov::{BifurcationPair, Center, NORMALIZATION_VERSION};
