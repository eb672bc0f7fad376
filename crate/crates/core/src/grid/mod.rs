//! Dyadic cubes, cell grids and piecewise-constant functions on them.

mod aligned;
mod cube;
mod function;
mod mgf;
mod prefix;

pub use aligned::AlignedBox;
pub use cube::{enumerate_subcubes, DyadicCube};
pub use function::{Grid, GridFunction, SignTag};
pub use mgf::{read_mgf, write_mgf};
pub use prefix::{box_average, PrefixTable};
