//! Box-constrained Nelder-Mead for low-dimensional, possibly piecewise-constant objectives.

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop once the simplex diameter falls below this.
    pub tol: f64,
    /// Initial simplex edge per coordinate.
    pub step: Vec<f64>,
    /// Stop as soon as a value at or below this is seen.
    pub stop_below: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

fn clamp(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, l), h) in x.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(*l, *h);
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .map(|(p, _)| p.iter().zip(best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

/// Minimise `f` over the box [lo, hi]; points are projected onto the box before evaluation.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], lo: &[f64], hi: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let d = x0.len();
    let mut evals = 0usize;
    let mut best_seen: Option<Minimum> = None;
    let mut eval = |x: &mut Vec<f64>, evals: &mut usize, best: &mut Option<Minimum>| -> f64 {
        clamp(x, lo, hi);
        let v = f(x);
        *evals += 1;
        if best.as_ref().map_or(true, |b| v < b.value) {
            *best = Some(Minimum { x: x.clone(), value: v, evals: *evals, converged: false });
        }
        v
    };
    let hit = |v: f64| opts.stop_below.is_some_and(|t| v <= t);

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let mut p0 = x0.to_vec();
    let v0 = eval(&mut p0, &mut evals, &mut best_seen);
    simplex.push((p0, v0));
    for k in 0..d {
        if hit(simplex.iter().map(|s| s.1).fold(f64::INFINITY, f64::min)) {
            break;
        }
        let mut p = x0.to_vec();
        let step = opts.step.get(k).copied().unwrap_or(0.1);
        p[k] += if p[k] + step > hi[k] { -step } else { step };
        let v = eval(&mut p, &mut evals, &mut best_seen);
        simplex.push((p, v));
    }
    let finish = |best: Option<Minimum>, evals: usize, converged: bool| {
        let mut m = best.expect("at least one evaluation");
        m.evals = evals;
        m.converged = converged;
        m
    };
    if simplex.len() < d + 1 || hit(simplex.iter().map(|s| s.1).fold(f64::INFINITY, f64::min)) {
        return finish(best_seen, evals, true);
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if hit(simplex[0].1) || diameter(&simplex) < opts.tol {
            return finish(best_seen, evals, true);
        }
        if evals >= opts.max_evals {
            return finish(best_seen, evals, false);
        }
        let centroid: Vec<f64> = (0..d).map(|k| simplex[..d].iter().map(|s| s.0[k]).sum::<f64>() / d as f64).collect();
        let worst = simplex[d].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };

        let mut xr = along(1.0);
        let fr = eval(&mut xr, &mut evals, &mut best_seen);
        if fr < simplex[0].1 {
            let mut xe = along(2.0);
            let fe = eval(&mut xe, &mut evals, &mut best_seen);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
            continue;
        }
        let (mut xc, outside) = if fr < worst.1 { (along(0.5), true) } else { (along(-0.5), false) };
        let fc = eval(&mut xc, &mut evals, &mut best_seen);
        if (outside && fc <= fr) || (!outside && fc < worst.1) {
            simplex[d] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for s in simplex.iter_mut().skip(1) {
            let mut p: Vec<f64> = best.iter().zip(&s.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
            let v = eval(&mut p, &mut evals, &mut best_seen);
            *s = (p, v);
        }
    }
}
