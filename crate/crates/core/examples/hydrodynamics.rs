//! Heights follow the transport solution `u0(x - bt)`; the error shrinks with
//! `n` and fluctuations around the transported initial height are of order
//! `n^{1/4}`.

use irw_fluct::profiles::{HeightForm, VarianceForm};
use irw_fluct::stats::{hydro_error, transported_fluctuation_check};
use irw_fluct::walks::{simulate_replicate, InitialSpec, SimConfig};
use irw_fluct::{JumpKernel, OccupationLaw, Profile};

fn main() -> irw_fluct::Result<()> {
    let profile = Profile::new(
        HeightForm::Smoothstep {
            base: 0.5,
            height: 1.0,
            from: 0.0,
            to: 1.0,
        },
        VarianceForm::EqualToDensity,
    )?;
    let kernel = JumpKernel::nearest_neighbor(0.7)?;
    let b = kernel.drift();
    let (x, t) = (0.9, 1.0);
    let ns = [100u64, 400, 1600];
    let mut errs = Vec::new();
    for &n in &ns {
        let mut cfg = SimConfig::new(
            n,
            vec![t],
            vec![],
            kernel.clone(),
            profile.clone(),
            InitialSpec::Random {
                law: OccupationLaw::Poisson,
            },
        );
        cfg.height_points = vec![x];
        let (mut hs, mut fs, mut err) = (Vec::new(), Vec::new(), 0.0);
        let r = 300;
        for rep in 0..r {
            let p = simulate_replicate(&cfg, 2, rep)?;
            err += (p.heights[0][0] as f64 / n as f64 - profile.u0(x - b * t)).abs();
            hs.push(p.heights[0][0]);
            fs.push(p.feet[0][0]);
        }
        errs.push(err / r as f64);
        let st = transported_fluctuation_check(&hs, &fs, n);
        println!("n = {n}: mean |error| {:.5}, residual sd {:.5}", err / r as f64, st.sd);
    }
    let nf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    println!("error slope {:.3}", hydro_error(&nf, &errs)?.slope);
    Ok(())
}
