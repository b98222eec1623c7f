use anyhow::{bail, Result};
use lmfrail::region::{boundary_param, classify_boundary, p_coeffs, positive_axis_min, q_coeffs, Contact};
use lmfrail::{membership, LmmParams};

use crate::Status;

#[derive(Debug, clap::Args)]
#[group(required = true, multiple = false)]
pub struct Args {
    /// Membership test for `λ2,λ3,λ4`.
    #[arg(long, allow_hyphen_values = true, value_parser = triple)]
    pub lambda: Option<LmmParams>,
    /// Boundary point with double root `y` and the given `λ2`, as `y,λ2`.
    #[arg(long, allow_hyphen_values = true, value_parser = pair)]
    pub boundary: Option<(f64, f64)>,
}

fn numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("'{v}' is not a number")))
        .collect()
}

fn triple(s: &str) -> Result<LmmParams, String> {
    match numbers(s)?[..] {
        [a, b, c] => Ok(LmmParams::new(a, b, c)),
        _ => Err(format!("expected three comma-separated numbers, got '{s}'")),
    }
}

fn pair(s: &str) -> Result<(f64, f64), String> {
    match numbers(s)?[..] {
        [a, b] => Ok((a, b)),
        _ => Err(format!("expected two comma-separated numbers, got '{s}'")),
    }
}

pub fn run(args: Args) -> Result<Status> {
    if let Some(l) = args.lambda {
        if !l.is_finite() {
            bail!("λ must be finite");
        }
        println!("member: {}", membership(&l));
        let q = positive_axis_min(&q_coeffs(&l).ascending());
        let p = positive_axis_min(&p_coeffs(&l).ascending());
        println!("min q on y > 0: {}", q.value);
        println!("min p on y > 0: {}", p.value);
        if let Ok(bp) = classify_boundary(&l) {
            let n = bp.normal;
            match bp.contact {
                Contact::DoubleRoot { y_star } => println!("boundary: double root of q at y = {y_star}"),
                Contact::Face => println!("boundary: face λ4 = 0"),
                Contact::Edge { y_star } => println!("boundary: edge λ4 = 0 with double root at y = {y_star}"),
            }
            println!("outward normal: ({}, {}, {})", -n[0], -n[1], -n[2]);
        }
    }
    if let Some((y, l2)) = args.boundary {
        let b = boundary_param(y, l2)?;
        let l = b.lambda;
        println!("lambda: ({}, {}, {})", l.lambda2, l.lambda3, l.lambda4);
        println!("valid: {}", b.valid);
    }
    Ok(Status::Converged)
}
