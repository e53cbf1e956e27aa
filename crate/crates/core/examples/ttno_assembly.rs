//! Reading TTNO tensors off a state diagram, contracting them back and saving a dump.
use ttno::dense::max_abs_diff;
use ttno::diagram::{DiagramOptions, StateDiagram};
use ttno::hamiltonian::random_hamiltonian;
use ttno::operator::OperatorRegistry;
use ttno::tree::TreeTopology;
use ttno::ttno::{ttno_from_diagram, Ttno};

fn main() -> ttno::error::Result<()> {
    let tree = TreeTopology::new(0u32, [(0u32, 1u32), (0, 2), (2, 3), (2, 4), (4, 5)])?;
    let h = random_hamiltonian(&tree, 12, &["X", "Y", "Z"], 3, 17)?;
    let reg = OperatorRegistry::default();
    let ttno = ttno_from_diagram(&StateDiagram::from_hamiltonian(&h, DiagramOptions::default())?, &reg)?;
    for (s, t) in ttno.tensors() {
        println!("site {s}: shape {:?}, {} of {} slices non-zero", t.shape(), t.nonzero_slices(), t.slice_count());
    }
    println!("elements {} (non-zero {})", ttno.element_count(), ttno.nonzero_element_count());

    let order = tree.preorder();
    let diff = max_abs_diff(&ttno.contract_to_dense(&order, 4096)?, &h.to_dense(&order, &reg, 4096)?);
    println!("max |contracted - dense| = {diff:e}");

    let mut dump = Vec::new();
    ttno.write_dump(&mut dump)?;
    let back = Ttno::read_dump(dump.as_slice())?;
    assert!(back.tensors().iter().all(|(s, t)| t.data() == ttno.tensors()[s].data()));
    println!("dump: {} bytes, round trip exact", dump.len());
    Ok(())
}
