//! Currents at two macroscopically separated base points are asymptotically
//! independent.

use irw_fluct::stats::{independence_test, Ensemble};
use irw_fluct::walks::{simulate_replicate, InitialSpec, SimConfig};
use irw_fluct::{JumpKernel, OccupationLaw, Profile};

fn main() -> irw_fluct::Result<()> {
    let cfg = SimConfig::new(
        400,
        vec![0.5, 1.0],
        vec![0.0, 1.0],
        JumpKernel::nearest_neighbor(0.7)?,
        Profile::flat(1.0, 1.0)?,
        InitialSpec::Random {
            law: OccupationLaw::Poisson,
        },
    );
    let mut ens = Ensemble::new(cfg.time_grid.clone(), cfg.base_points.clone());
    for r in 0..1000 {
        ens.accumulate_series(r, &simulate_replicate(&cfg, 8, r)?.current)?;
    }
    let rep = independence_test(&ens)?;
    for p in &rep.pairs {
        println!("s = {}, t = {}: corr {:+.4} +- {:.4}", p.s, p.t, p.corr, p.se);
    }
    println!("max |z| = {:.3}", rep.max_abs_z);
    Ok(())
}
