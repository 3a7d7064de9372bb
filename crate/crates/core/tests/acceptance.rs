//! Acceptance criteria. Each test writes one `criterion N: PASS|FAIL` line to
//! stderr (bypassing the test harness capture) and then asserts.

use gl_lab::diagnostics::{nodal_domains_dims, sign_pattern_check, SignPattern};
use gl_lab::energy::{energy, residual_sup, second_variation, Functional};
use gl_lab::io::{decode_field, encode_field};
use gl_lab::lab::{decay_fit, mountain_pass, run_config, sweep, PassSpec, SweepSpec, Task};
use gl_lab::minimize::{
    discrete_soliton, finite_cylinder_profiles, minimize, minimize_substrip, ring_candidate, Init, MinimizeConfig,
    RingOptions,
};
use gl_lab::mountain::{explicit_path, string_method, ExplicitOptions, Regime, StringOptions, REPARAM_ALLOWANCE};
use gl_lab::spectral::{
    bessel_j, bessel_prime_zero, disk_neumann_eigs, lambda_d1, legendre_check, pencil_eigs, pencil_eigs_with_weight,
    soliton_weight, stability_eigs, subspace_angle, DiskClass, PencilVariant,
};
use gl_lab::{
    project_symmetry, symmetry_residual, AxiGrid, Field2, Grid, SectorGrid3, StripGrid, SymmetryClass,
    SOLITON_LINE_ENERGY, STRIP_THRESHOLD,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

struct Criterion {
    name: &'static str,
    checks: Vec<(bool, String)>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Self { name, checks: Vec::new() }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.checks.push((ok, detail));
    }

    /// `|value - target| <= tol * |target|`.
    fn relative(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        let err = (value - target).abs() / target.abs();
        self.check(err <= tol, format!("{label} {value:.6} vs {target:.6} (rel. err {err:.1e}, tol {tol:.0e})"));
    }

    fn absolute(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        let err = (value - target).abs();
        self.check(err <= tol, format!("{label} {value:.6} vs {target:.6} (abs. err {err:.1e}, tol {tol:.0e})"));
    }

    fn finish(self) {
        let ok = self.checks.iter().all(|c| c.0);
        let details: Vec<String> =
            self.checks.iter().map(|(ok, d)| format!("{}{d}", if *ok { "" } else { "[failed] " })).collect();
        let line =
            format!("\ncriterion {}: {} | {}\n", self.name, if ok { "PASS" } else { "FAIL" }, details.join("; "));
        std::io::stderr().write_all(line.as_bytes()).unwrap();
        assert!(ok, "{line}");
    }
}

fn strip(d: f64, l: f64, nx: usize, ny: usize) -> Grid {
    Grid::Strip(StripGrid::new(d, l, nx, ny).unwrap())
}

fn sampled_soliton(grid: Grid) -> Field2 {
    Field2::from_fn(grid, |p| [0.0, (p[0] / SQRT_2).tanh()])
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

#[test]
fn criterion_01_soliton_closed_forms() {
    let mut c = Criterion::new("1 (soliton closed forms)");
    let l = 30.0;
    let points = 1_000_000;
    let h = 2.0 * l / points as f64;
    let oracle: f64 = (0..points)
        .map(|i| {
            let x = -l + (i as f64 + 0.5) * h;
            let t = (x / SQRT_2).tanh();
            0.5 * (sech(x / SQRT_2).powi(2) / SQRT_2).powi(2) + 0.25 * (1.0 - t * t).powi(2)
        })
        .sum::<f64>()
        * h;
    c.relative("quadrature line energy", oracle, SOLITON_LINE_ENERGY, 1e-9);
    for d in [1.0, 3.0] {
        let e = energy(&sampled_soliton(strip(d, l, 1025, 65))).total;
        c.relative(&format!("energy per unit width at d={d}"), e / (2.0 * d), oracle, 5e-3);
        if d == 1.0 {
            c.relative("energy at d=1", e, 4.0 * SQRT_2 / 3.0, 5e-3);
        }
    }
    let res: Vec<f64> =
        [257, 513, 1025, 2049].iter().map(|&nx| residual_sup(&sampled_soliton(strip(1.0, l, nx, 9)))).collect();
    let slopes: Vec<f64> = res.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let min_slope = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    c.check(min_slope >= 1.9, format!("residual Richardson slopes {slopes:.3?} >= 1.9"));
    c.finish();
}

#[test]
fn criterion_02_second_variations() {
    let mut c = Criterion::new("2 (second variations at u_s)");
    for d in [1.5, STRIP_THRESHOLD, 3.0] {
        let g = strip(d, 30.0, 1025, 65);
        let us = sampled_soliton(g);
        let a = |p: [f64; 3]| sech(p[0] / SQRT_2);
        let amp = Field2::direction(g, (0..g.len()).map(|n| [a(g.position(n)), 0.0]).collect()).unwrap();
        let tr = Field2::direction(
            g,
            (0..g.len()).map(|n| g.position(n)).map(|p| [a(p) * (PI * p[1] / (2.0 * d)).sin(), 0.0]).collect(),
        )
        .unwrap();
        c.relative(&format!("d={d:.4} (A,0)"), second_variation(&us, &amp).unwrap(), -2.0 * SQRT_2 * d, 1e-2);
        let q = second_variation(&us, &tr).unwrap();
        let exact = d * SQRT_2 * (PI * PI / (2.0 * d * d) - 1.0);
        if d == STRIP_THRESHOLD {
            c.absolute("threshold (A sin,0)", q, 0.0, 2e-2);
        } else {
            c.relative(&format!("d={d:.4} (A sin,0)"), q, exact, 1e-2);
        }
    }
    c.finish();
}

#[test]
fn criterion_03_critical_width() {
    let mut c = Criterion::new("3 (critical width)");
    let spec = SweepSpec {
        d_values: SweepSpec::range(1.8, 2.6, 0.1).unwrap(),
        tasks: vec![Task::Minimize, Task::Stability],
        nodes_per_unit: 8.0,
        ..SweepSpec::default()
    };
    let rep = sweep(&spec).unwrap();
    match rep.d_c {
        Some(d_c) => c.relative("bisected d_c", d_c, STRIP_THRESHOLD, 2e-2),
        None => c.check(false, "no stability crossing found".into()),
    }
    let coarse: Vec<f64> = rep.rows.iter().filter(|r| !r.refinement).filter_map(|r| r.lambda_min).collect();
    c.check(coarse.windows(2).all(|w| w[1] < w[0]), "lambda_min decreasing in d".into());
    match (rep.departure_d, rep.d_c) {
        (Some(dep), Some(d_c)) => {
            c.check((dep - d_c).abs() <= 0.1, format!("minimizer departs at d={dep}, within one step of d_c"))
        }
        _ => c.check(false, "no departure of the imparity minimizer".into()),
    }
    c.finish();
}

#[test]
fn criterion_04_solitonic_vortex() {
    let mut c = Criterion::new("4 (solitonic vortex at d=3)");
    let g = strip(3.0, 30.0, 1025, 65);
    for seed in [1i8, -1] {
        let m = minimize(&MinimizeConfig { init: Init::VortexSeed(seed), ..Default::default() }, g).unwrap();
        let diag = m.report.diagnostics.as_ref().unwrap();
        let f = &m.field;
        let ok = sign_pattern_check(f, SignPattern::UVSign).unwrap().ok;
        // The conjugate branch mirrors the pattern.
        let pattern =
            if seed > 0 { ok } else { sign_pattern_check(&f.conjugate_branch(), SignPattern::UVSign).unwrap().ok };
        c.check(m.report.converged, format!("seed {seed}: converged, residual {:.1e}", m.report.residual));
        c.check(pattern, format!("seed {seed}: UVSign pattern"));
        let (hx, hy) = (g.hx(), 6.0 / 64.0);
        let origin = diag.zeros.len() == 1 && diag.zeros[0].x.abs() < hx && diag.zeros[0].y.abs() < hy;
        c.check(origin, format!("seed {seed}: zeros {:?}", diag.zeros.iter().map(|z| (z.x, z.y)).collect::<Vec<_>>()));
        c.check(diag.windings == vec![seed as i64], format!("seed {seed}: winding {:?}", diag.windings));
        let sup = (0..g.len())
            .filter(|&n| !g.is_clamped(n))
            .map(|n| f.values()[n][0].hypot(f.values()[n][1]))
            .fold(0.0, f64::max);
        c.check(sup < 1.0, format!("seed {seed}: sup |u| off the clamp {sup:.12}"));
        if seed > 0 {
            let e_s = energy(&discrete_soliton(g, 1e-8).unwrap().field).total;
            let e_d = m.report.energy.total;
            c.check(e_d < e_s, format!("energy u_d {e_d:.6} < u_s {e_s:.6}"));
        }
    }
    c.finish();
}

#[test]
fn criterion_05_threshold_spectrum() {
    let mut c = Criterion::new("5 (spectrum at threshold)");
    let g = StripGrid::new(STRIP_THRESHOLD, 30.0, 1025, 65).unwrap();
    let w = soliton_weight(&Grid::Strip(g));
    let r = pencil_eigs_with_weight(g, &w, PencilVariant::Mu, 4, "sech^2").unwrap();
    let check = legendre_check(&r.eigenvalues, 1e-2);
    c.check(
        check.ok,
        format!("eigenvalues {:.5?} vs [0, 1, 1, 3], max dev {:.1e}", r.eigenvalues, check.max_deviation),
    );
    c.check(check.multiplicities == vec![1, 2, 1], format!("multiplicities {:?}", check.multiplicities));
    c.finish();
}

#[test]
fn criterion_06_spectrum_above_threshold() {
    let mut c = Criterion::new("6 (spectrum at d=3)");
    let g = StripGrid::new(3.0, 30.0, 1025, 65).unwrap();
    let u = minimize(&MinimizeConfig::default(), Grid::Strip(g)).unwrap().field;
    let mu = pencil_eigs(&u, PencilVariant::Mu, 4).unwrap();
    let e = &mu.eigenvalues;
    let width = (e[1] - 1.0).abs().max((e[2] - 1.0).abs());
    c.check(width <= 5e-3, format!("mu_2 {:.6}, mu_3 {:.6}: distance from 1 {width:.1e} <= 5e-3", e[1], e[2]));
    c.check(e[3] > 1.0, format!("mu_4 - 1 = {:.4} > 0", e[3] - 1.0));
    let weights: Vec<f64> = Grid::Strip(g)
        .stencil()
        .weights
        .iter()
        .zip(u.values())
        .map(|(q, v)| q * (1.0 - v[0] * v[0] - v[1] * v[1]).max(0.0))
        .collect();
    let angle = subspace_angle(&mu.eigenfields[1..3], &[u.component(0), u.component(1)], &weights);
    c.check(angle <= 1e-3, format!("angle to span(U_d, V_d) {angle:.1e} <= 1e-3"));
    let t = pencil_eigs(&u, PencilVariant::Tmu, 3).unwrap().eigenvalues;
    c.check(t[1] < 1.0, format!("sibling mu~_2 {:.6} < 1", t[1]));
    c.absolute("sibling mu~_3", t[2], 1.0, 1e-2);
    let ry = lambda_d1(&u).unwrap().rayleigh_dy_u.unwrap();
    c.check(ry < 1.0, format!("Rayleigh quotient of dU/dy {ry:.6} < 1"));
    c.finish();
}

#[test]
fn criterion_07_mountain_pass() {
    let mut c = Criterion::new("7 (2D mountain pass)");
    for d in [1.5, 3.0] {
        let r = mountain_pass(&PassSpec { d, ..PassSpec::default() }).unwrap();
        let rep = &r.report;
        if d < STRIP_THRESHOLD {
            c.relative("d=1.5 barrier vs energy(u_s)", rep.barrier, rep.soliton_energy, 2e-2);
            let grid = rep.grid;
            let us = discrete_soliton(grid, 1e-9).unwrap().field;
            match &r.saddle {
                Some(s) => {
                    let dist = s.sup_distance(&us);
                    c.check(dist < 1e-3, format!("saddle to u_s sup distance {dist:.1e}"));
                }
                None => c.check(false, format!("no saddle: {:?}", rep.saddle_error)),
            }
        } else {
            c.relative("d=3 barrier vs energy(u_d)", rep.barrier, rep.vortex_energy.unwrap(), 3e-2);
        }
        let lower = [1.0 / 16.0, 5.0 * SQRT_2 * d / 48.0];
        c.check(
            lower.iter().all(|&b| rep.barrier >= b),
            format!("d={d}: barrier {:.4} >= 1/16 and >= 5 sqrt2 d/48 = {:.4}", rep.barrier, lower[1]),
        );
    }
    c.finish();
}

#[test]
fn criterion_08_substrip_ordering() {
    let mut c = Criterion::new("8 (substrip ordering at d=5)");
    let g = StripGrid::new(5.0, 30.0, 1025, 129).unwrap();
    let sub = minimize_substrip(2, g, 1e-8).unwrap();
    let ud = minimize(&MinimizeConfig { tol_residual: 1e-8, ..Default::default() }, Grid::Strip(g)).unwrap();
    let (e_sub, e_d) = (energy(&sub.field).total, ud.report.energy.total);
    c.check(e_sub > e_d, format!("energy(u_d,2) {e_sub:.6} > energy(u_d) {e_d:.6}"));
    let tiled = 2.0 * energy(&sub.flat).total;
    c.relative("tiling: 2 x energy of the d/2 vortex", tiled, e_sub, 1e-4);
    c.check(sub.tiling_gap <= 1e-4, format!("nodewise tiling gap {:.1e}", sub.tiling_gap));
    c.finish();
}

/// Second variation at the sampled soliton along the `ell = 1` disk mode times
/// `sech(x / sqrt 2)`, normalized to unit mean square over the cross-section.
fn disk_mode_variation(d: f64) -> f64 {
    let j = bessel_prime_zero(1).unwrap();
    let norm = (PI * 0.5 * (1.0 - 1.0 / (j * j)) * bessel_j(1, j).powi(2)).sqrt();
    let g = Grid::Sector(SectorGrid3::new(d, 30.0, 1, 401, 33, 17).unwrap());
    let us = sampled_soliton(g);
    let w: Vec<[f64; 2]> = (0..g.len())
        .map(|n| {
            let p = g.position(n);
            let (rho, th) = (p[1].hypot(p[2]), p[2].atan2(p[1]));
            [bessel_j(1, j * rho / d) * th.cos() / norm * sech(p[0] / SQRT_2), 0.0]
        })
        .collect();
    second_variation(&us, &Field2::direction(g, w).unwrap()).unwrap()
}

#[test]
fn criterion_09_cylinder_thresholds() {
    let mut c = Criterion::new("9 (3D thresholds via the cross-section)");
    let (j0, j1) = (bessel_prime_zero(0).unwrap(), bessel_prime_zero(1).unwrap());
    let ell = disk_neumann_eigs(1, DiskClass::Ell(1), 400).unwrap();
    c.relative("disk ell=1 eigenvalue vs (j'_11)^2", ell.eigenvalues[0], j1 * j1, 1e-2);
    let rad = disk_neumann_eigs(2, DiskClass::Radial, 400).unwrap();
    c.relative("disk radial eigenvalue vs (j'_01)^2", rad.eigenvalues[1], j0 * j0, 1e-2);
    let d = 3.0;
    let q = disk_mode_variation(d);
    c.relative("3D second variation at d=3 vs d^2 (2 j'^2/d^2 - 1)", q, d * d * (2.0 * j1 * j1 / (d * d) - 1.0), 1e-2);
    c.finish();
}

#[test]
fn criterion_10_finite_cylinder() {
    let mut c = Criterion::new("10 (finite cylinder)");
    let d = 3.0;
    let limit = 2.0 * SQRT_2 * PI * d * d / 3.0;
    let profiles: Vec<_> =
        [5.0, 10.0, 20.0, 40.0].iter().map(|&r| finite_cylinder_profiles(r, d, 2001).unwrap()).collect();
    let q: Vec<f64> = profiles.iter().map(|p| p.q_r).collect();
    c.check(
        q.windows(2).all(|w| w[1] < w[0]),
        format!("q_R {:?} strictly decreasing", q.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>()),
    );
    let e: Vec<f64> = profiles.iter().map(|p| p.soliton_energy).collect();
    // Consecutive differences fall below double precision once q_R is tiny.
    c.check(e.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), format!("soliton energies {e:.8?} non-increasing"));
    c.relative("soliton energy at R=40 vs 2 sqrt2 pi d^2/3", e[3], limit, 1e-2);
    for p in &profiles {
        let bound = PI.powi(3) * d * d / (4.0 * p.r * p.r);
        c.check(
            p.phase_energy <= bound,
            format!("R={}: phase energy {:.5} <= pi^3 d^2/(4R^2) = {bound:.5}", p.r, p.phase_energy),
        );
    }
    c.finish();
}

#[test]
fn criterion_11_ring_candidate() {
    let mut c = Criterion::new("11 (axisymmetric ring candidate)");
    let (_, six) = ring_candidate(AxiGrid::new(6.0, 40.0, 321, 25).unwrap(), &RingOptions::default()).unwrap();
    c.check(six.sign_change, "d=6: U changes sign on x=0".into());
    c.check(six.hat_uv_sign, "d=6: hatUVSign pattern".into());
    c.check(
        six.strictly_between,
        format!("d=6: energy {:.5} in ({:.5}, {:.5})", six.energy, six.minimal_energy, six.soliton_energy),
    );
    c.check(six.converged, format!("d=6: critical point residual {:.1e}", six.residual));
    let (_, three) = ring_candidate(AxiGrid::new(3.0, 40.0, 321, 25).unwrap(), &RingOptions::default()).unwrap();
    c.check(three.collapsed, format!("d=3: collapses onto u_s,R (sup distance {:.1e})", three.soliton_distance));
    c.finish();
}

#[test]
fn criterion_12_decay() {
    let mut c = Criterion::new("12 (decay at d=3)");
    let g = strip(3.0, 30.0, 481, 49);
    let ud = minimize(&MinimizeConfig { tol_residual: 1e-10, ..Default::default() }, g).unwrap().field;
    let us = discrete_soliton(g, 1e-10).unwrap().field;
    let fit = decay_fit(&ud, &us).unwrap();
    c.check(
        fit.polynomial_test.len() == 6 && fit.polynomial_test.iter().all(|&b| b),
        format!("(1+x)^k decay for k=1..6: {:?}", fit.polynomial_test),
    );
    c.check(fit.slope < 0.0, format!("log-slope {:.4} < 0 on {:?}", fit.slope, fit.window));
    c.finish();
}

fn fd_order(exact: f64, fd: impl Fn(f64) -> f64) -> f64 {
    ((fd(0.05) - exact).abs() / (fd(0.025) - exact).abs()).log2()
}

#[test]
fn criterion_13_property_suites() {
    let mut c = Criterion::new("13 (property suites)");
    let grids = [
        strip(1.3, 6.0, 21, 9),
        Grid::Axi(AxiGrid::new(2.0, 5.0, 21, 6).unwrap()),
        Grid::Sector(SectorGrid3::new(1.0, 4.0, 1, 13, 4, 4).unwrap()),
    ];
    let (mut grad_order, mut hess_order, mut idem, mut round_trip) = (f64::INFINITY, f64::INFINITY, 0.0f64, true);
    for (gi, &g) in grids.iter().enumerate() {
        let f = Functional::new(g);
        let mut rng = ChaCha8Rng::seed_from_u64(gi as u64);
        let mut sample = || [rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2)];
        let u = Field2::new(g, (0..g.len()).map(|_| sample()).collect(), None).unwrap();
        let w: Vec<[f64; 2]> = (0..g.len()).map(|n| if g.is_clamped(n) { [0.0; 2] } else { sample() }).collect();
        let fixed: Vec<bool> = (0..g.len()).map(|n| g.is_clamped(n)).collect();
        let uv = u.values();
        let dot = |a: &[[f64; 2]], b: &[[f64; 2]]| a.iter().zip(b).map(|(x, y)| x[0] * y[0] + x[1] * y[1]).sum::<f64>();
        let mut gr = vec![[0.0; 2]; g.len()];
        f.gradient(uv, &fixed, &mut gr);
        let scaled = |e: f64| w.iter().map(|v| [e * v[0], e * v[1]]).collect::<Vec<_>>();
        grad_order = grad_order.min(fd_order(dot(&gr, &w), |e| {
            (f.energy_difference(uv, &scaled(e)) - f.energy_difference(uv, &scaled(-e))) / (2.0 * e)
        }));
        let dir = |e: f64| {
            let s: Vec<[f64; 2]> = uv.iter().zip(&w).map(|(a, b)| [a[0] + e * b[0], a[1] + e * b[1]]).collect();
            let mut gg = vec![[0.0; 2]; g.len()];
            f.gradient(&s, &fixed, &mut gg);
            dot(&gg, &w)
        };
        hess_order = hess_order.min(fd_order(f.second_variation(uv, &w), |e| (dir(e) - dir(-e)) / (2.0 * e)));
        let classes: &[SymmetryClass] = match gi {
            0 => &[SymmetryClass::PhaseImprintOnly, SymmetryClass::Imparity, SymmetryClass::Substrip(2)],
            1 => &[SymmetryClass::Radial3D],
            _ => &[SymmetryClass::Sector3D(1)],
        };
        for &s in classes {
            let p = project_symmetry(&u, s).unwrap();
            idem = idem.max(project_symmetry(&p, s).unwrap().sup_distance(&p)).max(symmetry_residual(&p, s).unwrap());
        }
        let tagged = u.clone().with_tag(Some(*classes.last().unwrap()));
        let bytes = encode_field(&tagged);
        round_trip &= decode_field(&bytes).map(|(b, n)| b == tagged && n == bytes.len()).unwrap_or(false);
    }
    c.check(grad_order >= 1.9, format!("gradient FD order {grad_order:.3} >= 1.9"));
    c.check(hess_order >= 1.9, format!("second-variation FD order {hess_order:.3} >= 1.9"));
    c.check(idem <= 1e-15, format!("projection idempotency defect {idem:.1e}"));
    c.check(round_trip, "field file round trip".into());

    let g = StripGrid::new(2.5, 16.0, 161, 21).unwrap();
    let us = sampled_soliton(Grid::Strip(g));
    let mut courant = true;
    for r in [
        pencil_eigs_with_weight(g, &soliton_weight(&Grid::Strip(g)), PencilVariant::Mu, 5, "sech^2").unwrap(),
        stability_eigs(&us, SymmetryClass::PhaseImprintOnly, 5).unwrap(),
        stability_eigs(&us, SymmetryClass::Imparity, 5).unwrap(),
    ] {
        courant &= r.nodal_counts.iter().enumerate().all(|(k, &n)| n <= k + 1);
        if r.nodal_counts.is_empty() || r.eigenfields.iter().any(|phi| nodal_domains_dims(phi, r.dims).is_err()) {
            courant = false;
        }
    }
    c.check(courant, "Courant nodal bounds".into());

    let sg = strip(1.5, 12.0, 97, 9);
    let ex = explicit_path(Regime::Soliton, &discrete_soliton(sg, 1e-9).unwrap().field, &ExplicitOptions::default())
        .unwrap();
    let (_, rep) = string_method(
        ex.path.reparametrized(13).unwrap(),
        SymmetryClass::PhaseImprintOnly,
        &StringOptions { iters: 60, ..StringOptions::default() },
    )
    .unwrap();
    c.check(
        rep.barrier_history.windows(2).all(|w| w[1] <= w[0] + REPARAM_ALLOWANCE),
        format!("string barrier monotone over {} iterations", rep.barrier_history.len()),
    );

    let dir = tempfile::tempdir().unwrap();
    let outputs: Vec<Vec<u8>> = (0..2)
        .map(|k| {
            let out = dir.path().join(format!("u{k}.glf"));
            let cfg = dir.path().join(format!("run{k}.cfg"));
            std::fs::write(
                &cfg,
                format!("task = minimize\nd = 3\nL = 14\nnx = 113\nny = 25\nout = {}\n", out.display()),
            )
            .unwrap();
            run_config(&cfg).unwrap();
            std::fs::read(out).unwrap()
        })
        .collect();
    c.check(outputs[0] == outputs[1], "two runs of one config give byte-identical fields".into());
    c.finish();
}
