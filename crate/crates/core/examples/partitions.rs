//! Building, parsing and validating block partitions.

use bbpl::partition::PartitionSpec;
use bbpl::synth::{gen_ba, gen_grid};
use bbpl::BlockPartition;

fn main() -> bbpl::Result<()> {
    let grid = gen_grid(7, 5);
    for spec in ["grid:2x2", "grid:3x1", "index:4", "whole"] {
        let p: PartitionSpec = spec.parse()?;
        let part = p.build(&grid, Some((7, 5)))?;
        let sizes: Vec<_> = part
            .blocks()
            .iter()
            .map(|b| (b.vertices().len(), b.edges().len()))
            .collect();
        println!("{spec:<9} -> {} blocks, (|V_i|, |E_i|) = {sizes:?}", part.num_blocks());
    }

    let ba = gen_ba(30, 2, 9)?;
    let part = BlockPartition::index(&ba, 3)?;
    println!("BA(30, 2) index:3 violations: {:?}", part.validate(&ba));

    let bad = BlockPartition::from_vertex_blocks(&ba, vec![(0..10).collect(), (5..30).collect()]);
    println!("overlapping vertex blocks rejected: {}", bad.unwrap_err());
    Ok(())
}
