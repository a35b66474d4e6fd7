//! Random convex tree, the telescoping identity on it, tree selection and
//! the fiberwise Calderon-Zygmund decomposition.

use trilinear_lab::paraproduct::{
    fiber_cz, random_convex_tree, telescoping_residual, tree_leaves, tree_select, DyadicGeometry,
    FormParams, FormQuadrature,
};
use trilinear_lab::{rng, GridFunction2D, Spectrum2D};

fn smooth(n: usize, seed: u64) -> GridFunction2D {
    let mut r = rng::stream(seed, &[5]);
    let mut s = Spectrum2D::zeros(n).unwrap();
    for a in -2i64..=2 {
        for b in -2i64..=2 {
            s.set(
                a,
                b,
                rng::complex_normal(&mut r) / (1.0 + (a * a + b * b) as f64),
            );
        }
    }
    s.inverse()
}

fn main() -> trilinear_lab::Result<()> {
    let n = 16;
    let geo = DyadicGeometry::default();
    let mut r = rng::stream(5, &[6]);
    let tree = random_convex_tree(geo, 0, 2, 0.3, &mut r)?;
    println!(
        "tree: {} rectangles, {} leaves",
        tree.len(),
        tree_leaves(&tree)?.len()
    );

    let fs: Vec<GridFunction2D> = (0..4).map(|j| smooth(n, j)).collect();
    let refs = [&fs[0], &fs[1], &fs[2], &fs[3]];
    let quad = FormQuadrature::default();
    for k in [1, 2, 4] {
        let rep = telescoping_residual(&tree, refs, &FormParams::default(), &quad.refined(k))?;
        println!(
            "quadrature x{k}: residual {:.3e}, relative {:.3e}",
            rep.residual, rep.relative
        );
    }

    let q0 = geo.all_rectangles(-2, 0)?;
    let pos: Vec<GridFunction2D> = fs.iter().take(3).map(|f| f.abs()).collect();
    let classes = tree_select(&q0, &geo, [&pos[0], &pos[1], &pos[2]])?;
    println!(
        "tree_select: {} trees from {} rectangles",
        classes.len(),
        q0.len()
    );

    let cz = fiber_cz(&pos[0], 1.5 * pos[0].norm_lp(1.0), 2.0)?;
    let count: usize = cz.intervals.iter().map(|row| row.len()).sum();
    println!(
        "fiber CZ: {count} intervals, union measure {:.4}, sup |g| off = {:.4}",
        cz.union_measure, cz.g_sup_off
    );
    Ok(())
}
