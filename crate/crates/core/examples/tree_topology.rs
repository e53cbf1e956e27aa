//! Trees: construction, re-rooting, traversal and JSON.
use ttno::io;
use ttno::tree::{SiteId, TreeTopology};

fn main() -> ttno::error::Result<()> {
    let tree = TreeTopology::new(1u32, [(1u32, 2u32), (2, 3), (2, 4), (1, 5), (5, 6), (5, 7), (7, 8)])?;
    println!("sites {}, depth {}, leaves {:?}", tree.len(), tree.depth(), tree.leaves());
    println!("preorder {:?}", tree.preorder());
    println!("children of 2: {:?}", tree.children(SiteId(2))?);
    println!("distance 3 -> 8: {}", tree.distance(SiteId(3), SiteId(8))?);

    let at6 = tree.reroot(6u32)?;
    println!("rooted at 6: parent of 5 is {:?}, depth {}", at6.parent(SiteId(5))?, at6.depth());

    let qudit = tree.with_phys_dim(8u32, 3)?;
    let json = io::tree_to_json(&qudit);
    println!("{json}");
    assert_eq!(io::parse_tree(&json)?, qudit);
    Ok(())
}
