//! Quadrature and difference stencils shared by the solver and the energy checks.

/// Composite Simpson rule on uniformly spaced samples with spacing `h`.
///
/// An odd number of intervals is handled with Simpson's 3/8 rule on the last
/// three intervals, so the rule stays fourth order for any count ≥ 3.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        2 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let (even_part, tail) = if n.is_multiple_of(2) { (n, 0) } else { (n - 3, 3) };
            let mut s = 0.0;
            if even_part > 0 {
                s = values[0] + values[even_part];
                for (i, v) in values.iter().enumerate().take(even_part).skip(1) {
                    s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
                }
                s *= h / 3.0;
            }
            if tail == 3 {
                let v = &values[n - 3..];
                s += 3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
            }
            s
        }
    }
}

/// Trapezoid rule on (possibly non-uniform) abscissae.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(times.len(), values.len());
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Second-order first derivative on a uniform grid: central in the interior,
/// three-point one-sided at both ends.
pub fn gradient(values: &[f64], h: f64, out: &mut [f64]) {
    let n = values.len() - 1;
    debug_assert!(n >= 2 && out.len() == values.len());
    let inv2h = 0.5 / h;
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) * inv2h;
    for i in 1..n {
        out[i] = (values[i + 1] - values[i - 1]) * inv2h;
    }
    out[n] = (3.0 * values[n] - 4.0 * values[n - 1] + values[n - 2]) * inv2h;
}

/// Derivative at the middle point of three non-uniformly spaced samples.
pub fn three_point_derivative(t: [f64; 3], f: [f64; 3]) -> f64 {
    let h0 = t[1] - t[0];
    let h1 = t[2] - t[1];
    (-h1 / (h0 * (h0 + h1))) * f[0] + ((h1 - h0) / (h0 * h1)) * f[1] + (h0 / (h1 * (h0 + h1))) * f[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn samples(n: usize, f: impl Fn(f64) -> f64) -> (Vec<f64>, f64) {
        let h = 1.0 / n as f64;
        ((0..=n).map(|i| f(i as f64 * h)).collect(), h)
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        for n in [2, 3, 4, 5, 8, 9] {
            let (v, h) = samples(n, |x| 4.0 * x * x * x - x + 2.0);
            assert_abs_diff_eq!(simpson(&v, h), 2.5, epsilon = 1e-13);
        }
    }

    #[test]
    fn simpson_on_sine_squared() {
        let (v, h) = samples(64, |x| (std::f64::consts::PI * x).sin().powi(2));
        assert_abs_diff_eq!(simpson(&v, h), 0.5, epsilon = 1e-12);
        let (v, h) = samples(65, |x| (std::f64::consts::PI * x).sin().powi(4));
        assert_abs_diff_eq!(simpson(&v, h), 0.375, epsilon = 1e-7);
    }

    #[test]
    fn trapezoid_nonuniform() {
        let t = [0.0, 0.5, 2.0];
        assert_abs_diff_eq!(trapezoid(&t, &[1.0, 1.0, 1.0]), 2.0);
        assert_abs_diff_eq!(trapezoid(&t, &t), 2.0);
    }

    #[test]
    fn gradient_exact_on_quadratics() {
        let (v, h) = samples(10, |x| 3.0 * x * x - 2.0 * x);
        let mut g = vec![0.0; v.len()];
        gradient(&v, h, &mut g);
        for (i, gi) in g.iter().enumerate() {
            assert_abs_diff_eq!(*gi, 6.0 * i as f64 * h - 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn nonuniform_derivative_exact_on_quadratics() {
        let f = |t: f64| t * t + 3.0 * t;
        let t = [0.1, 0.3, 0.35];
        let d = three_point_derivative(t, [f(t[0]), f(t[1]), f(t[2])]);
        assert_abs_diff_eq!(d, 2.0 * 0.3 + 3.0, epsilon = 1e-12);
    }
}
