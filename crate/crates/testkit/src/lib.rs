//! Independent oracle implementations and synthetic data generators used
//! by the test suites.
//!
//! Everything here re-derives expected values from first principles
//! (recursive flood fill, quadruple-loop convolution, brute-force n-gram
//! counting) and deliberately shares no algorithmic code with the library
//! under test; only the public data types are reused.

pub mod corpus;
pub mod masks;
pub mod text;
pub mod vision;
