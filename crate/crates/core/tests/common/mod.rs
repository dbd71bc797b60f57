#![allow(dead_code)]

use it2fgp::goalmem::LinearFn;
use it2fgp::lpsolve::{assemble_fgp, FgpModel};
use it2fgp::nlpcore::VariableBox;
use it2fgp::sigmodel::{CrispFn, Signomial, Term};
use it2fgp::{It2Number, Trapezoid};
use rand::Rng;

pub fn random_signomial<R: Rng>(rng: &mut R) -> (CrispFn, Vec<f64>) {
    let n = rng.gen_range(1..=4);
    let menu = [0.0, 0.5, 1.0, 2.0, 2.0 / 3.0, -0.5, 1.5, 3.0];
    let terms = (0..rng.gen_range(1..=5))
        .map(|_| Term {
            coeff: rng.gen_range(-5.0..5.0),
            exponents: (0..n)
                .map(|_| if rng.gen_bool(0.2) { rng.gen_range(-1.0..3.0) } else { menu[rng.gen_range(0..menu.len())] })
                .collect(),
        })
        .collect();
    let x = (0..n).map(|_| rng.gen_range(0.2..3.0)).collect();
    (Signomial { terms }, x)
}

pub fn central_difference(f: &CrispFn, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|l| {
            let h = 1e-6 * (1.0 + x[l].abs());
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[l] += h;
            down[l] -= h;
            (f.eval(&up).unwrap() - f.eval(&down).unwrap()) / (2.0 * h)
        })
        .collect()
}

/// Small goal LP with random linear goals over a random box.
pub fn random_fgp<R: Rng>(rng: &mut R) -> FgpModel {
    let n = rng.gen_range(1..=3);
    let surplus = rng.gen_bool(0.3);
    let k = if surplus { rng.gen_range(1..=2) } else { rng.gen_range(1..=3) };
    let lower: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let upper = lower.iter().map(|l| l + rng.gen_range(0.1..2.0)).collect();
    let goals: Vec<LinearFn> = (0..k)
        .map(|_| LinearFn::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(), rng.gen_range(-0.5..1.5)).unwrap())
        .collect();
    assemble_fgp(&goals, &VariableBox::new(lower, upper), surplus).unwrap()
}

pub fn random_it2<R: Rng>(rng: &mut R, heights: Option<[f64; 4]>) -> It2Number {
    let h = heights.unwrap_or_else(|| std::array::from_fn(|_| rng.gen_range(0.5..=1.0)));
    let trap = |rng: &mut R, h: [f64; 2]| {
        let mut a: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-50.0..50.0));
        a.sort_by(f64::total_cmp);
        Trapezoid::new(a, h).unwrap()
    };
    let upper = trap(rng, [h[0], h[1]]);
    let lower = trap(rng, [h[2], h[3]]);
    It2Number::new(upper, lower).unwrap()
}

pub fn random_heights<R: Rng>(rng: &mut R) -> [f64; 4] {
    std::array::from_fn(|_| rng.gen_range(0.5..=1.0))
}
