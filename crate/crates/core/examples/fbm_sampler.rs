//! Exact Gaussian draws of the limit process on a grid.

use irw_fluct::limits::GaussianSampler;
use irw_fluct::{CovKernel, RngStream};

fn main() -> irw_fluct::Result<()> {
    let k = CovKernel::Equilibrium { rho: 1.0, kappa2: 1.0 };
    let times = [0.0, 0.5, 1.0, 2.0, 4.0];
    let sampler = GaussianSampler::new(&k, &times)?;
    let mut rng = RngStream::new(9);
    let r = 50_000;
    let mut sq = vec![0.0; times.len()];
    for _ in 0..r {
        let z = sampler.sample(&mut rng);
        assert_eq!(z[0], 0.0);
        for (a, v) in sq.iter_mut().zip(&z) {
            *a += v * v;
        }
    }
    for (t, s) in times.iter().zip(&sq) {
        println!("t = {t}: Var Z = {:.4}, kernel {:.4}", s / r as f64, k.cov(*t, *t));
    }
    // index 1/4 self-similarity: Var Z(4) / Var Z(1) = 2
    println!("ratio {:.4}", sq[4] / sq[2]);
    Ok(())
}
