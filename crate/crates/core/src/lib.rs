//! Generalized Calogero–Moser spaces as matrix data.
//!
//! Points are quadruples `(A, B, v, w)` with `[A, B] − vw = τ·I`, or the
//! augmented pairs `(Â, B̂)` built from them. The modules cover the level set
//! and its gauge action ([`variety`]), the arrow normal form of `Â`
//! ([`canonical`]), local coordinates ([`chart`]), the `SL₂(ℂ)` action and
//! its induced vector fields ([`sl2flows`]), and flow composition
//! ([`flowcalc`]).

pub mod canonical;
pub mod chart;
pub mod error;
pub mod flowcalc;
pub mod linalg;
pub mod sl2flows;
pub mod variety;

pub use chart::{ChartPoint, Decomposition};
pub use error::{Error, Result};
pub use linalg::{CMat, C64, DEFAULT_TOL};
pub use sl2flows::{ChartTangent, GeneratorKind, SL2Element, SL2Generator, TraceCoords};
pub use variety::{AugmentedPair, Fingerprint, GaugeElement, Representation};
