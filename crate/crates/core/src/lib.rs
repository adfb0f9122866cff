//! Two-dimensional link-level simulation of free-space optical (FSO) links
//! assisted by an intelligent reflecting surface (IRS).
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: placements, the angle convention and path lengths.
//! * [`beam`]: Gaussian and plane-wave sources.
//! * [`wave`]: the scalar Huygens scattering engine (unit cells as point
//!   scatterers with cylindrical spreading).
//! * [`phase`]: phase-shift designs, mirror tilts, quantisation and delay
//!   dispersion.
//! * [`geometric`]: the ray/beam-envelope approximation used to cross-check
//!   the wave engine.
//! * [`channel`]: attenuation, log-normal turbulence, pointing jitter and
//!   the composite channel coefficient.
//! * [`link`]: SNR, Monte-Carlo outage for IRS and relay links, power
//!   scaling sweeps and curve comparisons.
//! * [`exec`]: sequential/parallel execution and seeded substreams.
//!
//! # Angle convention
//!
//! Angles are measured from the IRS surface normal. With the normal along
//! `+y`, a reflection angle is positive toward `+x`, while an incidence angle
//! is positive when the transmitter sits on the `-x` side. Specular
//! reflection is therefore `theta_i == theta_r`.

pub mod beam;
pub mod channel;
pub mod exec;
pub mod geometric;
pub mod geometry;
pub mod link;
pub mod phase;
pub mod wave;

mod error;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
