use super::*;
use crate::grid::StripGrid;
use crate::minimize::{discrete_soliton, minimize, MinimizeConfig};

fn strip(d: f64, l: f64, nx: usize, ny: usize) -> Grid {
    Grid::Strip(StripGrid::new(d, l, nx, ny).unwrap())
}

#[test]
fn smoothstep_is_c2_and_odd() {
    for s in [-0.9, -0.3, 0.2, 0.7] {
        assert_eq!(smoothstep(-s), -smoothstep(s));
    }
    let h = 1e-5;
    // Matching value, slope and curvature at s = 1 from the inside.
    assert_eq!(smoothstep(1.0), 1.0);
    let d1 = (smoothstep(1.0) - smoothstep(1.0 - h)) / h;
    assert!(d1.abs() < 1e-8);
    let d2 = (smoothstep(1.0) - 2.0 * smoothstep(1.0 - h) + smoothstep(1.0 - 2.0 * h)) / (h * h);
    assert!(d2.abs() < 1e-3);
    assert!((0..100).all(|k| smoothstep(-1.0 + 0.02 * (k + 1) as f64) > smoothstep(-1.0 + 0.02 * k as f64)));
}

#[test]
fn endpoints_have_unit_modulus_and_centre_values() {
    let g = strip(1.0, 20.0, 161, 9);
    let (m, p) = make_endpoints(4.0, &g).unwrap();
    for f in [&m, &p] {
        assert!(f.values().iter().all(|v| (v[0].hypot(v[1]) - 1.0).abs() < 1e-15));
        assert!(f.is_clamp_exact());
    }
    let StripGrid { nx, ny, .. } = match g {
        Grid::Strip(s) => s,
        _ => unreachable!(),
    };
    for j in 0..ny {
        assert_eq!(p.at((nx - 1) / 2, j, 0), [1.0, 0.0]);
        assert_eq!(m.at((nx - 1) / 2, j, 0), [-1.0, 0.0]);
    }
    assert!(make_endpoints(0.5, &g).is_err());
}

#[test]
fn endpoint_energy_decays_like_one_over_n() {
    let d = 1.0;
    let g = strip(d, 64.0, 2049, 5);
    let mut prev = f64::INFINITY;
    for n in [4.0, 8.0, 16.0, 32.0, 64.0] {
        let e = energy(&make_endpoints(n, &g).unwrap().1).total;
        assert!(e < prev);
        prev = e;
        // Oracle: 1D midpoint quadrature of (chi'(x/n)/n)^2 / 2 over the line, times 2d.
        let t = PhaseTemplate::new(n).unwrap();
        let k = 200_000;
        let oracle: f64 = (0..k)
            .map(|i| {
                let x = -n + 2.0 * n * (i as f64 + 0.5) / k as f64;
                0.5 * t.chi_prime(x).powi(2) * 2.0 * n / k as f64
            })
            .sum::<f64>()
            * 2.0
            * d;
        assert!((oracle / (2.0 * d * t.line_energy()) - 1.0).abs() < 1e-8);
        assert!((e / oracle - 1.0).abs() < 1e-2, "n = {n}: {e} vs {oracle}");
        assert!(e * n < 8.0 * d);
    }
}

#[test]
fn select_n_takes_the_smallest_admissible() {
    let g = strip(3.0, 30.0, 241, 9);
    let c = select_n(&g, 5.32).unwrap();
    assert_eq!(c.n, 4);
    let c = select_n(&g, 3.0).unwrap();
    assert_eq!(c.n, 8);
    assert!(select_n(&g, 0.1).is_err());
}

#[test]
fn even_translation() {
    let g = strip(1.0, 4.0, 3, 5);
    let f = Field2::from_fn(g, |p| [p[1], 0.5 * p[1]]);
    let up = shifted_even(&f, 2).unwrap();
    // Rows now hold original rows 2, 1, 0, 1, 2 (reflection at the lower edge).
    let col: Vec<f64> = (0..5).map(|j| up.at(1, j, 0)[0]).collect();
    assert_eq!(col, vec![0.0, -0.5, -1.0, -0.5, 0.0]);
    let back = shifted_even(&f, -2).unwrap();
    let col: Vec<f64> = (0..5).map(|j| back.at(1, j, 0)[0]).collect();
    assert_eq!(col, vec![0.0, 0.5, 1.0, 0.5, 0.0]);
}

#[test]
fn reparametrization_equalizes_arc_length() {
    let g = strip(1.0, 4.0, 9, 3);
    let a = Field2::constant(g, [0.0, 0.0]);
    let b = Field2::constant(g, [1.0, 0.0]);
    let mut images = linear_path(&a, &b, 5).unwrap().images;
    // Bunch the interior images near the start.
    for (k, img) in images.iter_mut().enumerate().skip(1).take(3) {
        *img = a.axpy(0.01 * k as f64, &b.axpy(-1.0, &a));
        let v = img.values().to_vec();
        *img = Field2::new(g, v, None).unwrap();
    }
    let p = PathState::new(images).unwrap();
    assert!(p.arc_residual > 0.1);
    let q = p.reparametrized(5).unwrap();
    assert!(q.arc_residual < 1e-12, "{}", q.arc_residual);
    assert_eq!(q.images[0], p.images[0]);
    assert_eq!(q.images[4], p.images[4]);
}

#[test]
fn soliton_path_below_threshold() {
    let g = strip(1.5, 12.0, 97, 9);
    let us = discrete_soliton(g, 1e-10).unwrap().field;
    let e_s = energy(&us).total;
    let ex = explicit_path(Regime::Soliton, &us, &ExplicitOptions::default()).unwrap();
    let p = &ex.path;
    assert_eq!(p.barrier_index, ex.centre_index);
    assert!((p.barrier - e_s).abs() < 1e-12 * e_s);
    // The ends of the linear segment lie strictly below the soliton.
    let t1 = ex.centre_index + DEFAULT_SUB_IMAGES;
    assert!(p.energies[t1] < e_s && p.energies[2 * ex.centre_index - t1] < e_s);
    let (minus, plus) = make_endpoints(ex.n as f64, &g).unwrap();
    assert_eq!(p.images[0].values(), minus.values());
    assert_eq!(p.images[p.len() - 1].values(), plus.values());
    let z = mean_zero_crossing(p).unwrap();
    assert!(z.ok);
    assert_eq!(z.index, ex.centre_index);
}

#[test]
fn vortex_path_stays_within_budget() {
    let g = strip(3.0, 12.0, 97, 17);
    let cfg = MinimizeConfig { tol_residual: 1e-8, ..MinimizeConfig::default() };
    let ud = minimize(&cfg, g).unwrap().field;
    let e_d = energy(&ud).total;
    let ex = explicit_path(Regime::Vortex, &ud, &ExplicitOptions::default()).unwrap();
    assert!(ex.path.barrier <= e_d * (1.0 + DEFAULT_DELTA));
    assert!(ex.path.images.iter().all(|f| f.is_clamp_exact()));
    assert!(mean_zero_crossing(&ex.path).unwrap().ok);
}

#[test]
fn string_barrier_is_monotone_and_endpoints_fixed() {
    let g = strip(1.5, 12.0, 97, 9);
    let us = discrete_soliton(g, 1e-10).unwrap().field;
    let ex = explicit_path(Regime::Soliton, &us, &ExplicitOptions::default()).unwrap();
    let start = ex.path.reparametrized(13).unwrap();
    let ends = (start.images[0].clone(), start.images[12].clone());
    let opts = StringOptions { iters: 60, ..StringOptions::default() };
    let (p, rep) = string_method(start, SymmetryClass::PhaseImprintOnly, &opts).unwrap();
    assert!(rep.barrier_history.windows(2).all(|w| w[1] <= w[0] + REPARAM_ALLOWANCE));
    assert_eq!(p.images[0], ends.0);
    assert_eq!(p.images[12], ends.1);
    for img in &p.images[1..12] {
        assert!(crate::symmetry_residual(img, SymmetryClass::PhaseImprintOnly).unwrap() <= 1e-12);
    }
    let e_s = energy(&us).total;
    assert!(p.barrier >= e_s * 0.98);
}

#[test]
fn climbing_image_finds_the_soliton() {
    let g = strip(1.5, 12.0, 97, 9);
    let us = discrete_soliton(g, 1e-11).unwrap().field;
    let ex = explicit_path(Regime::Soliton, &us, &ExplicitOptions::default()).unwrap();
    let path = ex.path.reparametrized(13).unwrap();
    let (saddle, rep) = climbing_image(&path, SymmetryClass::PhaseImprintOnly, &ClimbOptions::default()).unwrap();
    assert!(rep.residual <= 1e-6);
    assert_eq!(rep.negative_directions, 1);
    assert!(rep.ritz[0] < 0.0 && rep.ritz[1] > 0.0);
    assert!(saddle.sup_distance(&us) < 1e-4, "{}", saddle.sup_distance(&us));
}

#[test]
fn bounds_examples() {
    let b = barrier_bounds(3.0, Dimension::Two, Some(5.3));
    assert_eq!(b.upper, Some(5.3));
    assert!(b.lower.unwrap() >= 1.0 / 16.0);
    let b = barrier_bounds(1.0, Dimension::Two, None);
    assert!((b.upper.unwrap() - 4.0 * SQRT_2 / 3.0).abs() < 1e-15);
    assert_eq!(b.lower, Some(5.0 * SQRT_2 / 48.0));
    let b = barrier_bounds(3.0, Dimension::ThreeRadial, None);
    assert!((b.upper.unwrap() - 2.0 * SQRT_2 * PI * 9.0 / 3.0).abs() < 1e-12);
    assert!(!b.upper_attained);
    assert!((b.thresholds.cylinder - SQRT_2 * 1.8411837813).abs() < 1e-8);
}
