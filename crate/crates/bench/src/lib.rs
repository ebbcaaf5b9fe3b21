//! Fixtures shared by the benchmarks.

use stochascope_core::operators::{build_random_ensemble, build_space_varying_blur, BlurSpec, EnsembleKind};
use stochascope_core::solvers::synth::{make_signal, measure, SignalKind};
use stochascope_core::{ForwardOperator, Problem, RegularizerSpec};

pub fn gaussian(n: usize, d: usize) -> ForwardOperator {
    build_random_ensemble(EnsembleKind::Gaussian { mean: 0.0, var: 1.0 }, n, d, 0).unwrap()
}

pub fn blur(side: usize) -> ForwardOperator {
    build_space_varying_blur(&BlurSpec { d1: side, d2: side, r_min: 1.0, r_max: 3.0 }).unwrap()
}

/// TV deblurring of the phantom on a `side × side` image.
pub fn deblur_problem(side: usize) -> Problem {
    let op = blur(side);
    let d = side * side;
    let x = make_signal(SignalKind::Phantom { d1: side, d2: side }, d, 0).unwrap();
    let (b, _) = measure(op.matrix(), &x, Some(3.0), 1).unwrap();
    Problem::new(op, b, Some(x), RegularizerSpec::tv(side, side, 3e-5)).unwrap()
}
