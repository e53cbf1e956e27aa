//! Root-bond bounds for range-limited interactions on Cayley trees.
use ttno::closed_form::{self as cf, CayleySpec};

fn main() -> ttno::error::Result<()> {
    println!("degree depth range bound brute");
    for degree in 2..=4 {
        for depth in 1..=3 {
            let spec = CayleySpec::new(degree, depth)?;
            for range in 1..2 * depth {
                let bound = cf::fixed_range_bond_bound(spec, range)?;
                let brute = cf::brute_force_root_bond(spec, range)?;
                println!("{degree:>6} {depth:>5} {range:>5} {bound:>5} {brute:>5}");
            }
            println!(
                "{degree:>6} {depth:>5}   all {:>5} {:>5}",
                cf::all_to_all_bound(spec),
                cf::brute_force_all_to_all(spec)?
            );
        }
    }
    Ok(())
}
