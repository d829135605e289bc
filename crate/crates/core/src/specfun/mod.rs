//! Scalar special functions: spherical Bessel functions, gamma at half-integers,
//! Legendre polynomials, hypergeometric series and Wigner symbols.

mod bessel;
mod gamma;
mod hyper;
mod legendre;
mod wigner;

pub use bessel::{sbf, sbf_asymptotic, Order};
pub use gamma::{
    gamma_half_exact, log_gamma_half, recip_gamma, recip_gamma_half, HalfGamma,
};
pub use hyper::{hyp2f1, hyp2f1_at_one_exact, hyp2f1_complement, hyp3f2, Hyper2F1Params, Z_SWITCH};
pub use legendre::{legendre_coefficients, legendre_p};
pub use wigner::{wigner3j, wigner3j_zero, wigner6j, SignedSqrt, WignerTriple};
