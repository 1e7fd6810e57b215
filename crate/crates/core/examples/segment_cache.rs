//! Persisting sieve segments and reusing them on a second pass.

use std::time::Instant;

use mlab::cache::SegmentCache;
use mlab::sieve::SegmentedSieve;

fn main() -> mlab::Result<()> {
    let dir = std::env::temp_dir().join(format!("mlab-cache-example-{}", std::process::id()));
    let n_max = 2_000_000;
    let mut columns = Vec::new();
    for pass in ["cold", "warm"] {
        let sieve = SegmentedSieve::new(n_max, 1 << 18)?.with_cache(SegmentCache::new(&dir)?);
        let t = Instant::now();
        columns.push(sieve.mobius_table()?);
        println!("{pass} pass: {:.3}s", t.elapsed().as_secs_f64());
    }
    assert_eq!(columns[0], columns[1]);
    let files = std::fs::read_dir(&dir)?.count();
    println!("{files} segment files in {}", dir.display());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
