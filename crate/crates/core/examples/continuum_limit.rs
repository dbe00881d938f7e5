//! Scaled Pareto depth `n^{-1/d} h_n(x)` approaching `c_d F(x)^{1/d}`.

use paretoir::asymptotics::{
    continuum_comparison, evaluation_grid, mean_scaled_depth, AxisDensity, SeparableDensity,
};

fn main() -> paretoir::Result<()> {
    let uniform = SeparableDensity::uniform(2);
    let at = [vec![1.0, 1.0], vec![0.5, 0.5], vec![0.25, 1.0]];
    let mean = mean_scaled_depth(&uniform, 100_000, &at, 10, 0)?;
    println!("uniform d=2, n=1e5, 10 runs: h(1,1) ~ {:.4}", mean[0]);
    println!("  ratio at (0.5,0.5) {:.4} (limit 0.5)", mean[1] / mean[0]);
    println!("  ratio at (0.25,1)  {:.4} (limit 0.5)", mean[2] / mean[0]);

    for (name, f) in [
        ("uniform d=2", uniform.clone()),
        ("exp(2) d=2", SeparableDensity::iid(AxisDensity::TruncatedExponential { rate: 2.0 }, 2)?),
    ] {
        let table = continuum_comparison(&f, &[1_000, 10_000, 100_000], &evaluation_grid(2), 5, 1)?;
        println!("{name}: c_hat {:.4}", table.c_hat);
        for r in &table.rows {
            println!("  n={:<7} max rel err {:.4}", r.n, r.max_relative_error);
        }
    }
    Ok(())
}
