//! Central-difference check of the perceptron's analytic gradients.

use hrlmi::neural::Mlp;
use hrlmi::rng::rng_from_seed;
use rand::Rng as _;

pub const STEP: f64 = 1e-5;
pub const MAX_RELATIVE_ERROR: f64 = 1e-4;
/// Denominator floor. A central difference carries roundoff of about
/// `eps * |loss| / STEP`, roughly 2e-11 here, so gradients below the floor
/// are held to an absolute error of `MAX_RELATIVE_ERROR * FLOOR` instead.
pub const FLOOR: f64 = 1e-6;

/// (input, output) of the master, sub-policy, flat and oracle networks.
pub const SHAPES: [(usize, usize); 4] = [(3, 6), (89, 13), (92, 13), (2, 2)];

pub fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / (a.abs() + n.abs()).max(FLOOR)
}

/// Largest relative error over all parameters for a random network, input and
/// linear read-out `sum_k c_k y_k`.
pub fn max_relative_error(input: usize, output: usize, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let mut net = Mlp::new(input, 32, output, &mut rng);
    let x: Vec<f64> = (0..input).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let c: Vec<f64> = (0..output).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let loss = |net: &Mlp| net.forward(&x).unwrap().iter().zip(&c).map(|(y, w)| y * w).sum::<f64>();

    let pass = net.forward_pass(&x).unwrap();
    let mut grads = vec![0.0; net.params().len()];
    net.backward(&x, &pass, &c, &mut grads).unwrap();

    let mut worst: f64 = 0.0;
    for (i, &analytic) in grads.iter().enumerate() {
        let orig = net.params()[i];
        net.params_mut()[i] = orig + STEP;
        let up = loss(&net);
        net.params_mut()[i] = orig - STEP;
        let down = loss(&net);
        net.params_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * STEP);
        worst = worst.max(relative_error(analytic, numeric));
    }
    worst
}
