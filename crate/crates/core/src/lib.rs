pub mod bench;
pub mod cli;
pub mod closed_form;
pub mod dense;
pub mod diagram;
pub mod error;
pub mod hamiltonian;
pub mod io;
pub mod operator;
pub mod oqs;
pub mod rank;
pub mod tree;
pub mod ttno;
