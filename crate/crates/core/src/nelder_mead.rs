//! Derivative-free simplex minimization (Nelder-Mead) for small dimensions.

/// Outcome of [`minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Largest vertex distance from the best vertex at exit.
    pub diameter: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    /// Initial simplex edge along each axis.
    pub initial_step: f64,
    /// Stop when the simplex diameter drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self { initial_step: 0.1, tolerance: 1e-10, max_iterations: 10_000 }
    }
}

/// Minimizes `f` from `start`. Non-finite values are treated as `+∞`,
/// which is how callers encode box constraints.
pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, start: &[f64], opts: Options) -> Minimum {
    let dim = start.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let diameter = |s: &[Vec<f64>]| {
        s[1..]
            .iter()
            .map(|v| v.iter().zip(&s[0]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(0.0_f64, f64::max)
    };

    let mut iterations = 0;
    loop {
        // Order vertices by value.
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diam = diameter(&simplex);
        if diam < opts.tolerance || iterations >= opts.max_iterations {
            return Minimum {
                x: simplex[0].clone(),
                value: values[0],
                iterations,
                diameter: diam,
                converged: diam < opts.tolerance,
            };
        }
        iterations += 1;

        let worst = dim;
        let centroid: Vec<f64> =
            (0..dim).map(|j| simplex[..worst].iter().map(|v| v[j]).sum::<f64>() / dim as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[worst]).map(|(c, w)| c + t * (c - w)).collect()
        };

        let xr = along(1.0);
        let fr = eval(&xr);
        if fr < values[0] {
            let xe = along(2.0);
            let fe = eval(&xe);
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[worst - 1] {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[worst] {
            let x = along(0.5);
            let v = eval(&x);
            (x, v)
        } else {
            let x = along(-0.5);
            let v = eval(&x);
            (x, v)
        };
        if fc < values[worst].min(fr) || (fc <= values[worst] && fr >= values[worst]) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        // Shrink towards the best vertex.
        for i in 1..=dim {
            let shrunk: Vec<f64> = simplex[i].iter().zip(&simplex[0]).map(|(v, b)| b + 0.5 * (v - b)).collect();
            values[i] = eval(&shrunk);
            simplex[i] = shrunk;
        }
    }
}
