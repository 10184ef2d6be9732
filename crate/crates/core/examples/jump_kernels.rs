//! Jump kernel moments, the large-deviation rate function, and the window
//! radius it implies.

use irw_fluct::JumpKernel;

fn main() -> irw_fluct::Result<()> {
    let kernels = [
        ("nearest neighbour 0.7", JumpKernel::nearest_neighbor(0.7)?),
        ("symmetric", JumpKernel::nearest_neighbor(0.5)?),
        ("skewed", JumpKernel::new([(-2, 0.1), (1, 0.6), (3, 0.3)])?),
    ];
    for (name, k) in &kernels {
        let rate = k.rate_function();
        let b = k.drift();
        println!("{name}: b = {b:.3}, kappa2 = {:.3}", k.kappa2());
        for dz in [0.1, 0.5, 1.0] {
            println!("  I(b + {dz}) = {:.5}   I(b - {dz}) = {:.5}", rate.eval(b + dz), rate.eval(b - dz));
        }
        let (n, t) = (1600, 2.0);
        let w = k.recommended_radius(n, t);
        println!(
            "  n = {n}, T = {t}: radius {w}, truncation bound {:.2e}",
            k.truncation_bias_bound(n, t, w)
        );
    }
    Ok(())
}
