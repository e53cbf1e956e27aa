//! The state diagram of the toy Hamiltonian: subtree reuse versus one path per term.
use ttno::diagram::{DiagramOptions, StateDiagram};
use ttno::io;
use ttno::operator::OperatorRegistry;

fn main() -> ttno::error::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let tree = io::read_tree(format!("{dir}/toy_tree.json"))?;
    let h = io::read_hamiltonian(format!("{dir}/toy_hamiltonian.json"), &tree, &mut OperatorRegistry::default())?;

    let d = StateDiagram::from_hamiltonian(&h, DiagramOptions::default())?;
    let naive = StateDiagram::from_hamiltonian(&h, DiagramOptions::naive())?;
    println!("edge   reuse naive");
    for (e, n) in naive.bond_dimensions() {
        println!("{e:<6} {:>5} {n:>5}", d.bond_dimensions()[&e]);
    }
    println!("single paths:");
    for t in d.enumerate_single_paths()? {
        println!("  {t}");
    }
    let leaf_rooted = StateDiagram::from_hamiltonian(&h.rerooted(6u32)?, DiagramOptions::default())?;
    println!("rooted at leaf 6: {:?}", leaf_rooted.bond_dimensions().values().collect::<Vec<_>>());
    print!("{}", d.dump());
    Ok(())
}
