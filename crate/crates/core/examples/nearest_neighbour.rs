//! Closed-form TTNO for nearest-neighbour couplings, with and without a field.
use ttno::closed_form::{nn_ttno, NnInteraction};
use ttno::dense::max_abs_diff;
use ttno::operator::OperatorRegistry;
use ttno::tree::TreeTopology;

fn main() -> ttno::error::Result<()> {
    let tree = TreeTopology::new(0u32, [(0u32, 1u32), (0, 2), (0, 3), (1, 4), (1, 5), (3, 6)])?;
    let reg = OperatorRegistry::default();
    let order = tree.preorder();
    for field in [None, Some("X")] {
        let inter = NnInteraction::uniform(&tree, "Z", field)?;
        let ttno = nn_ttno(&tree, &inter, &reg)?;
        let h = inter.to_hamiltonian(&tree)?;
        let diff = max_abs_diff(&ttno.contract_to_dense(&order, 4096)?, &h.to_dense(&order, &reg, 4096)?);
        println!(
            "field {field:?}: bonds {:?}, {} terms, diff {diff:e}",
            ttno.bond_dimensions().values().collect::<Vec<_>>(),
            h.len()
        );
    }
    Ok(())
}
