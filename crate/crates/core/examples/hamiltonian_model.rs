//! Hamiltonians as sums of product terms, with a dense reference matrix.
use num_complex::Complex64;
use ttno::hamiltonian::{Hamiltonian, ProductTerm};
use ttno::operator::OperatorRegistry;
use ttno::tree::{SiteId, TreeTopology};

fn main() -> ttno::error::Result<()> {
    let tree = TreeTopology::new(0u32, [(0u32, 1u32), (1, 2)])?;
    let j = Complex64::new(-1.0, 0.0);
    let h = Hamiltonian::new(
        tree.clone(),
        vec![
            ProductTerm::from_labels(j, &tree, [(0u32, "Z"), (1, "Z")])?,
            ProductTerm::from_labels(j, &tree, [(1u32, "Z"), (2, "Z")])?,
            ProductTerm::from_labels(Complex64::new(0.5, 0.0), &tree, [(1u32, "X")])?,
        ],
    )?;
    for t in h.terms() {
        println!("{t}");
    }
    println!("coefficients folded onto the first site:");
    for t in h.folded_terms() {
        println!("  {t}");
    }
    let order = [SiteId(0), SiteId(1), SiteId(2)];
    let dense = h.to_dense(&order, &OperatorRegistry::default(), 4096)?;
    println!(
        "dense {}x{}, diagonal {:?}",
        dense.nrows(),
        dense.ncols(),
        dense.diagonal().iter().map(|z| z.re).collect::<Vec<_>>()
    );
    Ok(())
}
