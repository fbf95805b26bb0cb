//! Box-counting on calibration sets and on sampled construction points.
//!
//! cargo run --release --example dimension

use betaprod::cantor::{construct, ConstructionSpec};
use betaprod::dimension::{box_count, cantor_dust, geometric_scales, theoretical_dim, uniform_points, FitWindow};

fn main() -> betaprod::Result<()> {
    let uniform = box_count(&uniform_points(10_000, 2, 1), &geometric_scales(2.0, 2, 7), 0.0, FitWindow { coarse: 0, fine: 1 })?;
    println!("uniform square: {:.3}", uniform.estimate);
    let dust = box_count(&cantor_dust(200_000, 20, 2), &geometric_scales(3.0, 1, 7), 0.0, FitWindow::default())?;
    println!("Cantor dust x [0,1): {:.3} (expected {:.3})", dust.estimate, 1.0 + 2f64.ln() / 3f64.ln());

    let run = construct(&ConstructionSpec::reference(8, 10_000, 1))?;
    let est = box_count(&run.points, &geometric_scales(2.0, 4, 12), 2f64.powi(-50), FitWindow::default())?;
    println!("construction: slope {:.3} (theory {:.3})", est.estimate, theoretical_dim(&[1.0, 0.5]));
    print!("{}", est.to_csv());
    Ok(())
}
