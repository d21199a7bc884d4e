//! gl(2) web and foam Khovanov homology at desk scale: cube-of-resolutions
//! complexes for tangled webs, elementary-movie chain maps with explicit
//! sign constants, movie-move verification, and the decategorified skein
//! layer (Jones-Wenzl projectors, annular positivity, linear complexes).

pub mod complex;
pub mod foam;
pub mod matrix;
pub mod ring;
pub mod statespace;
pub mod web;

pub use complex::{
    chain_map_degree_ok, gaussian_eliminate, homology, is_chain_map, poincare_polynomial,
    ChainMap, ComplexError, GradedComplex, GradedGenerator, HomologyTable, Reduction,
};
pub use matrix::{smith_normal_form, IntMat, Snf, SparseMatrix};
pub use ring::{Coeff, CoefficientRing, LaurentPoly, Poincare};
