//! Shared fixtures for the benchmarks.

use rkpairs_core::builders::{
    build_dc_euler_with, build_ex_euler_with, build_ex_midpoint_with, DcConfig, EmbeddedMethod,
    NodeFamily, VerifyMode,
};
use rkpairs_core::integer;

/// Euler extrapolation, midpoint extrapolation (when `p` is even) and
/// Chebyshev DC with `theta = 0`, all of order `p`, built without
/// re-verification.
pub fn methods_of_order(p: u32) -> Vec<EmbeddedMethod> {
    let mut out = vec![build_ex_euler_with(p, VerifyMode::Never).expect("ex-euler")];
    if p % 2 == 0 {
        out.push(build_ex_midpoint_with(p, VerifyMode::Never).expect("ex-midpoint"));
    }
    let dc = DcConfig::new(p, integer(0), NodeFamily::ChebyshevLobatto);
    out.push(build_dc_euler_with(&dc, VerifyMode::Never).expect("dc"));
    out
}
