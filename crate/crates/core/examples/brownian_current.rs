use irw_fluct::stats::Ensemble;
use irw_fluct::walks::{brownian_halfwidth, simulate_brownian_current};
use irw_fluct::{CovKernel, RngStream};

/// Net current of Brownian particles from a dense Poisson field.
fn main() -> irw_fluct::Result<()> {
    let (lambda, grid) = (100.0, vec![1.0, 2.0]);
    let w = brownian_halfwidth(2.0);
    let mut ens = Ensemble::new(grid.clone(), vec![0.0]);
    for r in 0..3000 {
        let mut rng = RngStream::derive(4, &[r]);
        let y = simulate_brownian_current(lambda, 0.0, &grid, w, &mut rng)?;
        ens.accumulate_series(r, &[y])?;
    }
    let k = CovKernel::Brownian { lambda };
    let cmp = ens.summarize(1, 1.0).compare(|_, s, t| k.cov(s, t));
    cmp.write_csv(std::io::stdout())?;
    Ok(())
}
