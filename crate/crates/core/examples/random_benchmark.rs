//! Seeded random-Hamiltonian study: r_diff per term count, CSV on stdout.
use ttno::bench::{run_bench, summarize, write_summary_csv, BenchConfig};
use ttno::io;

fn main() -> ttno::error::Result<()> {
    let tree = io::read_tree(concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy_tree.json"))?;
    let cfg = BenchConfig::new(vec![5, 10, 20, 30], 50, 2024);
    let samples = run_bench(&tree, &cfg)?;
    write_summary_csv(std::io::stdout().lock(), &summarize(&samples)?)?;
    let worst = samples.iter().map(|s| s.record.report.excess()).max().unwrap_or(0);
    eprintln!("{} samples, largest total excess {worst}", samples.len());
    Ok(())
}
