//! Nonlinear Floquet states, averaged effective models and localization
//! dynamics of a two-mode system driven by a two-frequency
//! (harmonic-mixing) signal.

pub mod bessel;
pub mod drive;
pub mod dynamics;
pub mod effective;
pub mod floquet;
