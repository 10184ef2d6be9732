//! Closed-form covariance kernels, checked against quadrature, and the
//! `(s, t, K)` table.

use irw_fluct::limits::{cross_integrals, cross_integrals_by_quadrature, sigma_squares};
use irw_fluct::CovKernel;

fn main() -> irw_fluct::Result<()> {
    for (s, t) in [(0.1, 1.0), (1.0, 1.0), (0.5, 4.0)] {
        let a = cross_integrals(s, t)?;
        let q = cross_integrals_by_quadrature(s, t)?;
        println!(
            "s = {s}, t = {t}: |diff| = {:.1e} {:.1e} {:.1e}",
            (a.full - q.full).abs(),
            (a.half - q.half).abs(),
            (a.cross - q.cross).abs()
        );
    }

    let (theta, times) = ([1.0, -0.5, 2.0], [0.5, 1.0, 3.0]);
    let sq = sigma_squares(&theta, &times, 1.0, 0.7, 1.0)?;
    let k = CovKernel::General {
        rho: 1.0,
        v: 0.7,
        kappa2: 1.0,
    };
    let direct: f64 = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| theta[i] * theta[j] * k.cov(times[i], times[j]))
        .sum();
    println!(
        "sigma1^2 = {:.8}, sigma2^2 = {:.8}, total {:.8} vs quadratic form {:.8}",
        sq.left,
        sq.right,
        sq.total(),
        direct
    );

    let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    for kern in [
        k,
        CovKernel::Equilibrium { rho: 1.0, kappa2: 1.0 },
        CovKernel::DeterministicIc { rho: 1.0, kappa2: 1.0 },
        CovKernel::Brownian { lambda: 1.0 },
    ] {
        let (min, trace) = kern.gram_spectrum(&grid);
        println!("{kern:?}: min eigenvalue {min:.3e} (trace {trace:.3}), psd {}", kern.is_psd_on(&grid));
    }
    k.write_table(&[0.5, 1.0, 2.0], std::io::stdout())?;
    Ok(())
}
