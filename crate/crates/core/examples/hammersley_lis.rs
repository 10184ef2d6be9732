//! Longest increasing chains through Poisson points: `L(N) / sqrt(N) -> 2`.

use irw_fluct::hammersley::{lis_count, PoissonField};

fn main() -> irw_fluct::Result<()> {
    for side in [100.0, 300.0, 1000.0] {
        let f = PoissonField::new(1, 0.0, side, side)?;
        let l = lis_count(f.points());
        let n = f.len() as f64;
        println!("N = {n:>8}: L = {l:>5}, L / sqrt(N) = {:.4}", l as f64 / n.sqrt());
    }
    Ok(())
}
