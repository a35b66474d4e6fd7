//! Corner patterns in a random set: the count integral, the pattern finder,
//! the martingale lower bound and the dichotomy driver.

use trilinear_lab::patterns::{
    count_integral, dichotomy_run, lower_bound_check, pattern_search, write_dichotomy_csv,
    BitmapSet, DichotomyThresholds,
};
use trilinear_lab::rng;

fn main() -> trilinear_lab::Result<()> {
    let n = 32;
    let mut r = rng::stream(7, &[8]);
    let e = BitmapSet::random(n, 0.2, &mut r)?;
    let f = e.indicator();
    println!("density {:.4}", e.density());
    println!("count integral {:.6}", count_integral(&f, 2 * n)?);
    match pattern_search(&e, 0.25)? {
        Some(t) => println!(
            "pattern at (x, y) = ({}, {}), t = {}: cells {:?}",
            t.x,
            t.y,
            t.t,
            t.cells(n)
        ),
        None => println!("no pattern with t >= 1/4"),
    }
    let lb = lower_bound_check(&f, 2, 3)?;
    println!(
        "lower bound: lhs {:.6} >= rhs {:.6}: {}",
        lb.lhs, lb.rhs, lb.ok
    );
    let run = dichotomy_run(&f, 1, 2, 4, &DichotomyThresholds::default())?;
    write_dichotomy_csv(&run, std::io::stdout())?;
    println!(
        "truncated {}, energy {:.4e} <= {:.4e}",
        run.truncated,
        run.energy_sum,
        4.0 * run.energy_constant * run.norm_sq
    );
    let mut pbm = Vec::new();
    e.write_pbm(&mut pbm)?;
    println!(
        "PBM header: {}",
        String::from_utf8_lossy(&pbm[..8])
            .lines()
            .next()
            .unwrap_or("")
    );
    Ok(())
}
