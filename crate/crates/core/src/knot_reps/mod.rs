//! Knot groups with peripheral data, numeric SU(2) representations, their
//! images in the pillowcase, slices of the representation variety and
//! representations of spliced groups.
//!
//! Conventions: words are signed 1-based generator indices; SU(2) is the
//! unit quaternions with maximal torus on the `i`-axis; the meridian image
//! is `cos α + i sin α` and the longitude image `cos β + i sin β`.

pub mod group;
pub mod image;
pub mod slice;
pub mod solver;
pub mod splice;
pub mod su2;

pub use group::{knot_group, splice_presentation, tietze_simplify, GroupError, KnotGroup, KnotSpec, Presentation, SplicePresentation, Word};
pub use image::{alexander_endpoint_angles, alexander_polynomial, sample_image_curve, ImageArc, ImageCurve, ImageNote, ImageOptions};
pub use slice::{solve_rep_on_slice, SliceRep};
pub use solver::{eval_word, RepAssignment};
pub use splice::{find_splice_rep, SpliceOptions, SpliceRep};
pub use su2::Su2;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KnotError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("no intersection of the image curves: {0}")]
    NoIntersection(String),
}
