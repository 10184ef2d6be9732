//! Second-order fluctuations of Hammersley's process from the BDJ start.

use irw_fluct::hammersley::{second_order_replicate, second_order_summary, TightnessSetup};

fn main() -> irw_fluct::Result<()> {
    let setup = TightnessSetup::bdj(1.0, 1.0);
    let sol = setup.solve()?;
    for n in [50u64, 100, 200] {
        let rows = (0..100)
            .map(|r| second_order_replicate(&setup, &sol, n, 3, r))
            .collect::<irw_fluct::Result<Vec<_>>>()?;
        let s = second_order_summary(n, &rows, 3);
        println!(
            "n = {n}: mean {:+.3}, sd / n^(1/3) = {:.4}, q99 |Y| / (n^(1/3) ln n) = {:.4}",
            s.mean, s.sd_over_cbrt, s.abs_normalized_quantiles[2]
        );
    }
    Ok(())
}
