//! Monomial bookkeeping for the normal form: enumeration of resonances,
//! small divisors, the homological generator and diophantine constants.

mod diophantine;
mod generator;
mod monomial;

pub use diophantine::{
    bracket, certify_q, compute_gamma_sqrt2, find_q_vector, DiophantineCertificate, Witness,
    LATTICE_RADIUS,
};
pub use generator::{
    normal_form_generator, wave_cubic_part, Generator, Polynomial, MAX_GENERATOR_P,
};
pub use monomial::{
    candidate_count, enumerate_monomials, min_divisor, monomial_coefficient, Filters, Monomial,
    MonomialClass, MomentumRule, ResonanceFilter, Selector, CANDIDATE_LIMIT,
};
