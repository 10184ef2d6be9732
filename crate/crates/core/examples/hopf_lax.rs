//! Hopf-Lax solutions, shocks and the quadratic-minimum constant.

use irw_fluct::hammersley::{check_quadratic_minimum, hopf_lax, write_hopf_lax_csv, Bdj, FnInitial};

fn main() -> irw_fluct::Result<()> {
    let t = 1.0;
    let mut sols = Vec::new();
    for i in 1..=5 {
        let x = i as f64 * 0.5;
        let sol = hopf_lax(&Bdj, x, t)?;
        let e = check_quadratic_minimum(&Bdj, &sol, 0.25, 100);
        println!("bdj x = {x}: u = {:.6} (x^2/4t = {:.6}), c1 = {:.4}", sol.u, x * x / 4.0, e.c1);
        sols.push(sol);
    }
    // slope drops from 2 to 1/2 at the origin: two minimizers at x = 2.5
    let kink = FnInitial {
        f: |y: f64| if y < 0.0 { 2.0 * y } else { 0.5 * y },
        lipschitz: 2.0,
    };
    for x in [2.0, 2.5, 3.0] {
        let sol = hopf_lax(&kink, x, t)?;
        println!("kink x = {x}: u = {:.6}, shock {}, minimizers {:?}", sol.u, sol.shock, sol.minimizers);
        sols.push(sol);
    }
    write_hopf_lax_csv(&sols, std::io::stdout())?;
    Ok(())
}
