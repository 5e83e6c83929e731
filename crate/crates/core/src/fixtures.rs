//! The bundled IMP specs.

use crate::specfmt::parse_os;
use crate::terms::OSAlgebra;

pub const IMP: &str = include_str!("../fixtures/imp.osa");
pub const IMP_REAL: &str = include_str!("../fixtures/imp_real.osa");

pub fn imp() -> OSAlgebra {
    parse_os(IMP).expect("bundled IMP spec parses")
}

pub fn imp_real() -> OSAlgebra {
    parse_os(IMP_REAL).expect("bundled IMP_REAL spec parses")
}
