//! Bond dimensions from the diagram against the operator Schmidt rank on every edge.
use ttno::diagram::{DiagramOptions, StateDiagram};
use ttno::hamiltonian::random_hamiltonian;
use ttno::io;
use ttno::operator::OperatorRegistry;
use ttno::rank::{optimal_bond_dims, BondReport};

fn main() -> ttno::error::Result<()> {
    let tree = io::read_tree(concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy_tree.json"))?;
    let reg = OperatorRegistry::default();
    for seed in 1..=5u64 {
        let h = random_hamiltonian(&tree, 30, &["X", "Y", "Z"], usize::MAX, seed)?;
        let d = StateDiagram::from_hamiltonian(&h, DiagramOptions::default())?;
        let report = BondReport::new(&d, &optimal_bond_dims(&h, &reg, 4096)?)?;
        let cells: Vec<String> = report.bonds.iter().map(|(e, (a, o))| format!("{e}:{a}/{o}")).collect();
        println!("seed {seed}: excess {} [{}]", report.excess(), cells.join(" "));
    }
    Ok(())
}
