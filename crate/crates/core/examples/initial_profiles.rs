//! Macroscopic profiles and the occupation laws that realize them.

use irw_fluct::profiles::{gen_deterministic_ic, gen_random_ic, HeightForm, VarianceForm};
use irw_fluct::{OccupationLaw, Profile, RngStream, SiteRange};

fn main() -> irw_fluct::Result<()> {
    let n = 200;
    let window = SiteRange::new(-2 * n as i64, 2 * n as i64);
    let bump = Profile::new(
        HeightForm::Smoothstep {
            base: 0.5,
            height: 1.0,
            from: 0.0,
            to: 1.0,
        },
        VarianceForm::EqualToDensity,
    )?;
    let rng = RngStream::new(1);
    let ic = gen_random_ic(&bump, n, window, OccupationLaw::Poisson, &rng)?;
    println!("smoothstep, Poisson occupations, n = {n}");
    for y in [-1.0, 0.0, 0.5, 1.0, 1.5] {
        let site = (y * n as f64) as i64;
        println!(
            "  y = {y:5.2}: sigma0 / n = {:8.4}   u0 = {:8.4}",
            ic.sigma0(site)? as f64 / n as f64,
            bump.u0(y)
        );
    }

    // three families at the same density, different variances
    for (law, factor) in [
        (OccupationLaw::BinomialThinned, 0.5),
        (OccupationLaw::Poisson, 1.0),
        (OccupationLaw::PoissonMixture, 2.0),
    ] {
        let p = Profile::flat(1.0, factor)?;
        let ic = gen_random_ic(&p, n, window, law, &rng)?;
        let xs: Vec<f64> = ic.occupations().map(|(_, c)| c as f64).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
        println!("{:>16}: mean {m:.3}, variance {v:.3} (target {factor})", law.name());
    }

    let det = gen_deterministic_ic(&Profile::flat(1.0, 0.0)?, n, SiteRange::new(-5, 5));
    let mut out = Vec::new();
    det.write_csv(&mut out)?;
    print!("deterministic staircase:\n{}", String::from_utf8_lossy(&out));
    Ok(())
}
