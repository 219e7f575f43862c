//! Block–cut trees and triconnected components.

mod blocks;
mod spqr;

pub use blocks::{biconnected_components, cut_vertices, Block, BlockCutTree};
pub use spqr::{
    reassemble, triconnected_components, Component, ComponentKind, Neighborhood,
    TriconnectedDecomposition,
};
