//! Current across the characteristic in Poisson equilibrium: the variance of
//! `n^{-1/4} Y_n(t)` against the fractional Brownian kernel.

use irw_fluct::stats::Ensemble;
use irw_fluct::walks::{simulate_replicate, InitialSpec, SimConfig};
use irw_fluct::{CovKernel, JumpKernel, OccupationLaw, Profile};

fn main() -> irw_fluct::Result<()> {
    let kernel = JumpKernel::nearest_neighbor(0.7)?;
    let kappa2 = kernel.kappa2();
    let cfg = SimConfig::new(
        400,
        vec![0.5, 1.0, 2.0],
        vec![0.0],
        kernel,
        Profile::flat(1.0, 1.0)?,
        InitialSpec::Random {
            law: OccupationLaw::Poisson,
        },
    );
    cfg.validate()?;
    let mut ens = Ensemble::new(cfg.time_grid.clone(), cfg.base_points.clone());
    for r in 0..1500 {
        let path = simulate_replicate(&cfg, 42, r)?;
        ens.accumulate_series(r, &path.current)?;
    }
    let summary = ens.summarize(cfg.n, (cfg.n as f64).powf(-0.25));
    print!("{}", summary.text_table());
    let limit = CovKernel::Equilibrium { rho: 1.0, kappa2 };
    let cmp = summary.compare(|_, s, t| limit.cov(s, t));
    cmp.write_csv(std::io::stdout())?;
    println!("max |z| = {:.3}", cmp.max_abs_z);
    Ok(())
}
