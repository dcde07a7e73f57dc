//! Poset representations of groups.

pub mod aut;
pub mod cayley;
pub mod extensions;
pub mod certificate;
pub mod freegroup;
pub mod group;
pub mod perm;
pub mod poset;
pub mod repro;
pub mod search;
pub mod smallcanc;
