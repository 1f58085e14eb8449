//! Composite Gauss-Legendre quadrature for closed-form comparisons.

/// 16-point Gauss-Legendre nodes (positive half) and weights on [-1, 1].
const GL16_X: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL16_W: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

/// ∫_a^b f(x) dx by 16-point Gauss-Legendre on each of `panels` equal panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels > 0);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + h * (k as f64 + 0.5);
        let half = 0.5 * h;
        let mut acc = 0.0;
        for j in 0..8 {
            acc += GL16_W[j] * (f(mid + half * GL16_X[j]) + f(mid - half * GL16_X[j]));
        }
        total += acc * half;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        // degree 31 is exact for 16-point GL
        let v = gauss_legendre(|x| x.powi(9) + 3.0 * x * x, 0.0, 2.0, 1);
        let exact = 2f64.powi(10) / 10.0 + 2f64.powi(3);
        assert!((v - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn integrates_exp() {
        let v = gauss_legendre(f64::exp, 0.0, 1.0, 4);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }
}
