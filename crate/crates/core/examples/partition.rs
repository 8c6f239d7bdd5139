//! Partition of sample vectors by the least order of their own orbit, and
//! its invariance when the exponent changes.
//!
//! cargo run -p misometry --example partition

use misometry::classify::{check_partition_independence, coprime_minimality_check, partition_samples};
use misometry::fixtures::{bayart_shift, jordan};
use misometry::operators::SampleConfig;

fn main() -> misometry::error::Result<()> {
    let cfg = SampleConfig { samples: 2000, ..SampleConfig::default() };
    let t = jordan();
    let at2 = partition_samples(&t, 3, 2.0, &cfg, 12)?;
    let at4 = partition_samples(&t, 5, 4.0, &cfg, 12)?;
    for part in [&at2, &at4] {
        let levels: Vec<(usize, usize)> = part.levels.iter().map(|l| (l.nu, l.count)).collect();
        println!("p = {}: levels {levels:?}, near cliff {:?}", part.p, part.near_cliff);
    }
    let rep = check_partition_independence(&at2, &at4)?;
    println!("level map {:?}, identical membership: {}", rep.mapping, rep.holds());
    println!("minimality: {:?}", coprime_minimality_check(&at2));

    let shift = bayart_shift(2.0, 2.0, 256)?;
    let part = partition_samples(&shift, 2, 2.0, &SampleConfig { samples: 100, ..cfg }, 20)?;
    println!("shift levels {:?}", part.nus());
    Ok(())
}
