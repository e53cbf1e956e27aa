//! Spin chain with bosonic baths on chain, fork and star trees.
use ttno::diagram::{DiagramOptions, StateDiagram};
use ttno::operator::OperatorRegistry;
use ttno::oqs::{self, OqsSpec, Topology};
use ttno::ttno::ttno_from_diagram;

fn main() -> ttno::error::Result<()> {
    let spec = OqsSpec::new(4, 3)?;
    let reg = OperatorRegistry::default();
    for kind in Topology::ALL {
        let h = oqs::oqs_hamiltonian(&spec, kind)?;
        let d = StateDiagram::from_hamiltonian(&h, DiagramOptions::default())?;
        let bonds = d.bond_dimensions();
        let ttno = ttno_from_diagram(&d, &reg)?;
        println!(
            "{kind}: spin 1 {:?}, boson (1,0) {:?}, elements {}",
            oqs::site_profile(&spec, kind, &bonds, spec.spin(1)),
            oqs::site_profile(&spec, kind, &bonds, spec.boson(1, 0)),
            ttno.element_count()
        );
        if kind == Topology::Chain {
            let fx = oqs::mpo_fixtures(&spec);
            let spin = oqs::regauge(&fx.spin, &oqs::exchange_gauge(&spec, 5), &oqs::exchange_gauge(&spec, 6));
            let m = oqs::match_up_to_permutation(
                &oqs::chain_site_matrix(&ttno, spec.spin(1))?,
                &spin.dense(2, &reg)?,
                1e-12,
            );
            println!("  spin tensor equals the textbook MPO matrix up to permutation: {:?}", m);
        }
    }
    Ok(())
}
