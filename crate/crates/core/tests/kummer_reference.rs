use lzquench::special::kummer_m;
use num_complex::Complex;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

// (a, b, z, M(a, b, z)) computed with mpmath.hyp1f1 at 30 digits
const CASES: [((f64, f64), (f64, f64), (f64, f64), (f64, f64)); 6] = [
    ((0.0, -0.5), (0.0, -0.8), (0.0, -6.0), (0.55263672372686454, 0.73312519757965699)),
    ((0.0, -1.3), (0.0, -2.0), (0.0, -25.0), (-0.39229949149395358, 0.72755109412135412)),
    ((0.0, -0.02), (0.0, -0.04), (0.0, -29.5), (0.26983316410455392, 0.50832441108623983)),
    ((1.0, -0.7), (1.0, -1.2), (0.0, -14.0), (1.2931051667829122, -0.15478807038472886)),
    ((0.0, -2.5), (0.0, -3.0), (0.0, -80.0), (-0.8931291742166924, -0.21438674566717295)),
    ((0.0, -0.3), (0.0, -0.5), (0.0, -400.0), (-0.77944094519265999, 0.010462729830287135)),
];

#[test]
fn matches_high_precision_reference() {
    for &(a, b, z, m) in &CASES {
        let got = kummer_m(c(a.0, a.1), c(b.0, b.1), c(z.0, z.1)).unwrap();
        let want = c(m.0, m.1);
        let tol = if z.1.abs() <= 30.0 { 1e-10 } else { 1e-6 };
        let rel = (got - want).norm() / want.norm();
        assert!(rel < tol, "z={z:?}: got {got}, want {want}, rel {rel:e}");
    }
}
