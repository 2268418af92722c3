//! Words in the letters `e0`, `e1`, composition indices, and truncated
//! noncommutative power series over them.
//!
//! The two combinatorial products live here: the shuffle product on words
//! and the quasi-shuffle (stuffle) product on composition indices, each with
//! an independently enumerated oracle in its tests. [`NcSeries`] is the
//! sparse series type that everything group-like (adjoint series, Ihara
//! composition, the harmonic composition action) is computed in.

mod random;
mod series;
mod word;

pub use random::{random_grouplike, random_primitive, random_series, random_word};
pub use series::{
    ihara, ihara_inverse, stabilize, Coeff, E0Limit, LimitError, NcSeries, ValuationProfile,
};
pub use word::{shuffle_words, stuffle_compositions, CompositionIndex, Letter, Word};
