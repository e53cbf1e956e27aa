//! Analytical constructions: nearest-neighbour TTNOs on arbitrary trees and
//! bond-dimension counts for long-range interactions on Cayley trees.

pub mod cayley;
pub mod nn;

pub use cayley::{
    all_to_all_bound, brute_force_all_to_all, brute_force_root_bond, cayley_shell_count, cayley_site_count,
    cayley_tree, fixed_range_bond_bound, long_range_hamiltonian, pair_count_identity, printed_all_to_all_bound,
    printed_fixed_range_bound, printed_site_count, CayleySpec,
};
pub use nn::{nn_ttno, nn_ttno_with, NnForm, NnInteraction};
