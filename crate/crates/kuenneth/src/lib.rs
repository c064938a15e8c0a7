//! Exact computational homological algebra for graded ring spectra:
//! Koszul-complex Tor tables over graded coefficient rings, dual Steenrod
//! algebra conjugation, Dyer-Lashof action tables on smash-product homotopy,
//! chain-map lifting against free resolutions, and realizability obstructions
//! for regular ideals.

pub mod algebra;
pub mod chart;
pub mod comparison;
pub mod descriptor;
pub mod fp;
pub mod koszul;
pub mod parse;
pub mod pipeline;
pub mod resolution;
pub mod steenrod;
