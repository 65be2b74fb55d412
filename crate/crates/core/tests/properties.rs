//! Randomized properties of the public API, each checked against an
//! independent computation.

use proptest::prelude::*;
use radtail::analysis::{linear_tail_coefficient, nonlinear_tail_coefficient};
use radtail::config::{ModelConfig, PresetName, RunConfig};
use radtail::freewave::FreeWave;
use radtail::numerics::*;
use radtail::profiles::Profile;

fn dd(x: f64) -> DoubleDouble {
    DoubleDouble::from_f64(x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn double_double_round_trips(a in -1e6f64..1e6, b in 1e-3f64..1e6) {
        let (x, y) = (dd(a) / dd(3.0), dd(b));
        let back = (x + y) - y;
        prop_assert!((back - x).abs().to_f64() <= 1e-30 * (x.abs().to_f64() + y.to_f64()));
        let q = (x * y) / y;
        prop_assert!((q - x).abs().to_f64() <= 1e-30 * x.abs().to_f64().max(1e-300));
        let s = y.sqrt();
        prop_assert!((s * s - y).abs().to_f64() <= 1e-30 * y.to_f64());
    }

    #[test]
    fn factorial_identities(x in -6.0f64..12.0, k in 1u32..8, n in 0u32..15) {
        let f: f64 = falling_factorial(x, k);
        let g: f64 = x * falling_factorial(x - 1.0, k - 1);
        prop_assert!((f - g).abs() <= 1e-12 * (1.0 + g.abs()));
        let r: f64 = rising_factorial(x, k);
        let s: f64 = falling_factorial(x + (k - 1) as f64, k);
        prop_assert!((r - s).abs() <= 1e-12 * (1.0 + s.abs()));
        let sum: f64 = (0..=n).map(|j| binomial::<f64>(n, j)).sum();
        prop_assert_eq!(sum, 2f64.powi(n as i32));
        // (2n+1)!! = (2n+1)! / (2^n n!)
        let odd: f64 = double_factorial(2 * n as i64 + 1).unwrap();
        let expect = factorial::<f64>(2 * n + 1) / (2f64.powi(n as i32) * factorial::<f64>(n));
        prop_assert!((odd - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn legendre_symmetry_and_bounds(l in 0u32..20, mu in -1.0f64..=1.0) {
        let p: f64 = legendre_p(l, mu);
        let q: f64 = legendre_p(l, -mu);
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((p - sign * q).abs() < 1e-13);
        prop_assert!(p.abs() <= 1.0 + 1e-13);
        prop_assert!((legendre_p::<f64>(l, 1.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly(
        n in 1usize..24,
        coeffs in prop::collection::vec(-2.0f64..2.0, 1..48),
        a in -3.0f64..0.0,
        w in 0.1f64..4.0,
    ) {
        let deg = (2 * n - 1).min(coeffs.len() - 1);
        let c = &coeffs[..=deg];
        let b = a + w;
        let rule: QuadratureRule<DoubleDouble> = gauss_legendre(n);
        let got = rule.integrate(dd(a), dd(b), |x| c.iter().rev().fold(DoubleDouble::zero(), |acc, ci| acc * x + dd(*ci)));
        let prim = |x: DoubleDouble| {
            c.iter().enumerate().rev().fold(DoubleDouble::zero(), |acc, (k, ci)| acc * x + dd(*ci) / dd((k + 1) as f64)) * x
        };
        let exact = prim(dd(b)) - prim(dd(a));
        let scale: f64 = c.iter().map(|x| x.abs()).sum::<f64>() * w * (1.0 + a.abs().max(b.abs())).powi(deg as i32);
        prop_assert!((got - exact).abs().to_f64() <= 1e-28 * scale, "n={} deg={}", n, deg);
    }

    #[test]
    fn moment_matches_beta_function(m in 2u32..40, u0 in -2.0f64..2.0, w in 0.5f64..5.0) {
        let p = Profile::<DoubleDouble>::new(dd(u0), dd(u0 + w), m, DoubleDouble::one()).unwrap();
        let rel = ((p.moment_a() - p.moment_a_closed_form()) / p.moment_a_closed_form()).abs().to_f64();
        prop_assert!(rel < 1e-26, "{rel:e}");
    }

    #[test]
    fn free_wave_solves_the_radial_wave_equation(l in 0u32..4, t in 0.5f64..5.0, r in 0.3f64..4.0) {
        // fourth-order differences of an extended-precision evaluation
        let w = FreeWave::new(Profile::<DoubleDouble>::normalized(dd(0.0), dd(2.0), 12, DoubleDouble::one()).unwrap(), l).unwrap();
        let h = 1e-3;
        let f = |tt: f64, rr: f64| w.eval(dd(tt), dd(rr)).unwrap().to_f64();
        let d2 = |g: &dyn Fn(f64) -> f64, x: f64| {
            (-g(x + 2.0 * h) + 16.0 * g(x + h) - 30.0 * g(x) + 16.0 * g(x - h) - g(x - 2.0 * h)) / (12.0 * h * h)
        };
        let d1 = |g: &dyn Fn(f64) -> f64, x: f64| (-g(x + 2.0 * h) + 8.0 * g(x + h) - 8.0 * g(x - h) + g(x - 2.0 * h)) / (12.0 * h);
        let ftt = d2(&|x| f(x, r), t);
        let frr = d2(&|x| f(t, x), r);
        let fr = d1(&|x| f(t, x), r);
        let d = (2 * l + 3) as f64;
        let resid = ftt - frr - (d - 1.0) / r * fr;
        let scale = ftt.abs() + frr.abs() + ((d - 1.0) / r * fr).abs() + 1e-3;
        prop_assert!(resid.abs() <= 1e-6 * scale, "residual {resid:e} scale {scale:e}");
    }

    #[test]
    fn tail_coefficients_vanish_exactly_where_predicted(l in 0u32..6, a in 3u32..13, p in 2u32..6) {
        let c = linear_tail_coefficient(l, a as f64);
        let anomalous = a % 2 == 1 && a <= 2 * l + 1;
        prop_assert_eq!(c == 0.0, anomalous);
        if !anomalous {
            prop_assert!(c < 0.0 || l >= 1);
        }
        let ct = nonlinear_tail_coefficient(l, p);
        prop_assert_eq!(ct == 0.0, p == 2 && l >= 1);
    }

    #[test]
    fn run_config_round_trips(l in 0u32..3, alpha in 2.5f64..9.0, lambda in -1.0f64..1.0, t_final in 1.0f64..500.0) {
        let mut model = ModelConfig::from_preset(PresetName::Linear);
        model.l = Some(l);
        model.alpha = Some(alpha);
        model.lambda = Some(lambda);
        let text = format!(
            "{}\n[evolve]\nt_final = {t_final:?}\nobservation_radii = [2.5, 5.0]\n",
            toml_section("model", &model)
        );
        let cfg = RunConfig::parse(&text).unwrap();
        let again = RunConfig::parse(&cfg.to_toml()).unwrap();
        prop_assert_eq!(&cfg, &again);
        prop_assert_eq!(cfg.to_toml(), again.to_toml());
    }
}

fn toml_section<S: serde::Serialize>(name: &str, value: &S) -> String {
    #[derive(serde::Serialize)]
    struct Wrap<'a, S> {
        #[serde(flatten)]
        inner: std::collections::BTreeMap<&'a str, &'a S>,
    }
    let mut m = std::collections::BTreeMap::new();
    m.insert(name, value);
    toml::to_string(&Wrap { inner: m }).unwrap()
}
