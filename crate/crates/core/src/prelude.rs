//! Items nearly every module needs. `Float` supplies the f64 math methods when
//! `std` is absent from the build.

pub(crate) use alloc::vec;
pub(crate) use alloc::vec::Vec;
#[allow(unused_imports)]
pub(crate) use num_traits::Float;
