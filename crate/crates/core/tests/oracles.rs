//! First-order Duhamel iterates against late-time limits worked out by hand.

use radtail::analysis::linear_tail_coefficient;
use radtail::freewave::FreeWave;
use radtail::models::{preset, Preset};
use radtail::numerics::DoubleDouble as D;
use radtail::numerics::Real;
use radtail::perturb::{iterate_linear, iterate_nonlinear, DuhamelOptions, Stage};
use radtail::profiles::Profile;

fn wave(l: u32, u1: f64, m: u32) -> FreeWave<f64> {
    FreeWave::new(Profile::normalized(0.0, u1, m, 1.0).unwrap(), l).unwrap()
}

fn opts() -> DuhamelOptions {
    DuhamelOptions { quad_n: 32, ..DuhamelOptions::for_precision::<f64>() }
}

#[test]
fn linear_l0_alpha3_approaches_minus_four() {
    let lambda = 0.1;
    let model = preset(Preset::Linear { l: 0, alpha: 3.0, lambda }).unwrap();
    let w = wave(0, 2.0, 8);
    let a = w.profile().moment_a();
    let pts = [(200.0, 1.0), (400.0, 1.0), (800.0, 1.0)];
    let v = iterate_linear(&model, &w, 1, &pts, &opts()).unwrap().values;
    let scaled: Vec<f64> = pts.iter().zip(&v).map(|((t, _), x)| t.powi(3) * x / (lambda * a)).collect();
    println!("{scaled:?}");
    // corrections fall off like 1/t
    let extrapolated = 2.0 * scaled[2] - scaled[1];
    assert!((extrapolated + 4.0).abs() < 4e-3, "{scaled:?}");
    assert_eq!(linear_tail_coefficient(0, 3.0), -4.0);
}

#[test]
fn linear_l1_alpha3_has_no_first_order_tail() {
    let w = wave(1, 2.0, 8);
    let anom = preset(Preset::Linear { l: 1, alpha: 3.0, lambda: 0.1 }).unwrap();
    let generic = preset(Preset::Linear { l: 1, alpha: 4.0, lambda: 0.1 }).unwrap();
    let pts = [(100.0, 1.0), (400.0, 1.0)];
    let va = iterate_linear(&anom, &w, 1, &pts, &opts()).unwrap().values;
    let vg = iterate_linear(&generic, &w, 1, &pts, &opts()).unwrap().values;
    let ra: Vec<f64> = pts.iter().zip(&va).map(|((t, _), x)| t.powi(5) * x).collect();
    let rg: Vec<f64> = pts.iter().zip(&vg).map(|((t, _), x)| t.powi(6) * x).collect();
    println!("{ra:?} {rg:?}");
    // what is left is rounding, many orders below the generic tail
    assert!(ra.iter().all(|x| x.abs() < 1e-9 * rg[1].abs()), "{ra:?} {rg:?}");
}

#[test]
fn cubic_l0_first_iterate_matches_hand_limit() {
    // box phi = phi^3 in three dimensions: t^2 phi_3 -> 2 eps^3 Atilde(0, 3)
    let eps = 0.05;
    let model = preset(Preset::Power { l: 0, p: 3, epsilon: eps }).unwrap();
    let w = wave(0, 2.0, 8);
    let at3 = w.profile().moment_atilde(0, 3).unwrap();
    let pts = [(200.0, 1.0), (400.0, 1.0), (800.0, 1.0)];
    let v = iterate_nonlinear(&model, &w, Stage::First, &pts, &opts()).unwrap().values;
    let scaled: Vec<f64> = pts.iter().zip(&v).map(|((t, _), x)| t * t * x / (eps.powi(3) * at3)).collect();
    println!("{scaled:?}");
    let extrapolated = 2.0 * scaled[2] - scaled[1];
    assert!((extrapolated - 2.0).abs() < 4e-3, "{scaled:?}");
}

#[test]
fn quadratic_l1_first_iterate_has_no_t3_tail() {
    let model = preset(Preset::QuadraticAnomalous { l: 1, epsilon: 0.05 }).unwrap();
    let w = wave(1, 4.0, 32);
    let pts = [(100.0, 1.0), (400.0, 1.0)];
    let v = iterate_nonlinear(&model, &w, Stage::First, &pts, &opts()).unwrap().values;
    let r: Vec<f64> = pts.iter().zip(&v).map(|((t, _), x)| t.powi(3) * x).collect();
    println!("{r:?}");
    // a generic quadratic tail would make t^3 phi of order eps^2 int a^2 ~ 1e-3
    assert!(r.iter().all(|x| x.abs() < 1e-12), "{r:?}");
}

#[test]
fn quadratic_l1_second_iterate_approaches_moment() {
    let eps = 0.05;
    let model = preset(Preset::QuadraticAnomalous { l: 1, epsilon: eps }).unwrap();
    let w = FreeWave::new(Profile::<D>::normalized(D::zero(), D::from_f64(4.0), 32, D::one()).unwrap(), 1).unwrap();
    let c = w.profile().moment_c_anom(1).unwrap().to_f64();
    let pts = [(D::from_f64(200.0), D::one()), (D::from_f64(400.0), D::one())];
    let o = DuhamelOptions { quad_n: 16, check: false, ..DuhamelOptions::for_precision::<D>() };
    let v = iterate_nonlinear(&model, &w, Stage::Second, &pts, &o).unwrap().values;
    let scaled: Vec<f64> =
        pts.iter().zip(&v).map(|((t, _), x)| t.to_f64().powi(4) * x.to_f64() / (eps.powi(3) * c)).collect();
    println!("{scaled:?}");
    let extrapolated = 2.0 * scaled[1] - scaled[0];
    assert!((extrapolated - 1.0).abs() < 0.02, "{scaled:?}");
}
