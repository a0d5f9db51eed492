//! Compare the closed-form diagonal information with the full matrix built
//! by enumerating every pair, and the variance formula with x' M^-1 x.

use pairdesign::measures::{depth_to_pair_design, info_diagonal};
use pairdesign::model::{difference_vector, enumerate_orbit};
use pairdesign::optimality::variance_function;
use pairdesign::oracle::{brute_force_info, dense_inverse, Lu};
use pairdesign::{d_optimal_design, ModelSpec};

fn main() -> pairdesign::Result<()> {
    for k in 3..=6 {
        let spec = ModelSpec::new(k)?;
        let design = d_optimal_design(k)?.design;
        let m = brute_force_info(&depth_to_pair_design(&design)?, &spec)?;
        let h = info_diagonal(&design)?;
        let (ld, _) = Lu::new(&m)?.log_abs_det();

        let inv = dense_inverse(&m)?;
        let mut worst = 0.0f64;
        for d in 0..=k {
            let v = variance_function(d, &design)?;
            for pair in enumerate_orbit(&spec, d)? {
                let x = difference_vector(&pair, &spec)?;
                worst = worst.max((inv.quadratic_form(&x) - v).abs());
            }
        }
        println!(
            "K = {k}: p = {:>2}, off-diagonal {:.1e}, diagonal {:?} vs h {:?}, log det {ld:.9}, variance error {worst:.1e}",
            spec.p(),
            m.max_off_diagonal(),
            distinct(&m.diagonal_values()),
            h.as_array(),
        );
    }
    Ok(())
}

fn distinct(values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &v in values {
        if !out.iter().any(|u| (u - v).abs() < 1e-12) {
            out.push(v);
        }
    }
    out
}
