//! Invariants checked on randomized inputs.

use gl_lab::diagnostics::{nodal_domains_dims, nodal_domains_in_class};
use gl_lab::energy::Functional;
use gl_lab::io::{decode_field, encode_field};
use gl_lab::lab::run_config;
use gl_lab::minimize::discrete_soliton;
use gl_lab::mountain::{explicit_path, string_method, ExplicitOptions, Regime, StringOptions, REPARAM_ALLOWANCE};
use gl_lab::spectral::{pencil_eigs_with_weight, soliton_weight, stability_eigs, PencilVariant};
use gl_lab::{project_symmetry, AxiGrid, Field2, Grid, SectorGrid3, StripGrid, SymmetryClass};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::SQRT_2;

fn grid_strategy() -> impl Strategy<Value = Grid> {
    prop_oneof![
        (0.5f64..3.0, 2usize..8, 1usize..6)
            .prop_map(|(d, a, b)| { Grid::Strip(StripGrid::new(d, 4.0 * d + 1.0, 2 * a + 1, 4 * b + 1).unwrap()) }),
        (0.5f64..3.0, 2usize..8, 3usize..7)
            .prop_map(|(d, a, nr)| { Grid::Axi(AxiGrid::new(d, 3.0, 2 * a + 1, nr).unwrap()) }),
        (0.5f64..2.0, 1u32..3, 2usize..5, 2usize..4, 2usize..5).prop_map(|(d, ell, a, nrho, nt)| {
            Grid::Sector(SectorGrid3::new(d, 4.0 * d, ell, 2 * a + 1, nrho, nt).unwrap())
        }),
    ]
}

fn random_values(n: usize, seed: u64, scale: f64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [scale * rng.gen_range(-1.0..1.0), scale * rng.gen_range(-1.0..1.0)]).collect()
}

/// Random direction vanishing on clamped nodes.
fn free_direction(grid: &Grid, seed: u64) -> Vec<[f64; 2]> {
    let mut w = random_values(grid.len(), seed, 1.0);
    for (n, v) in w.iter_mut().enumerate() {
        if grid.is_clamped(n) {
            *v = [0.0; 2];
        }
    }
    w
}

fn classes_for(grid: &Grid) -> Vec<SymmetryClass> {
    match grid {
        Grid::Strip(g) => {
            let mut v = vec![SymmetryClass::PhaseImprintOnly, SymmetryClass::Imparity];
            for k in [2, 4] {
                if (g.ny - 1) % (2 * k as usize) == 0 {
                    v.push(SymmetryClass::Substrip(k));
                }
            }
            v
        }
        Grid::Axi(_) => vec![SymmetryClass::PhaseImprintOnly, SymmetryClass::Radial3D],
        Grid::Sector(g) => vec![SymmetryClass::PhaseImprintOnly, SymmetryClass::Sector3D(g.ell)],
    }
}

/// Observed order of a central difference error from steps `e` and `e / 2`.
fn observed_order(exact: f64, fd: impl Fn(f64) -> f64, e: f64) -> f64 {
    let (a, b) = ((fd(e) - exact).abs(), (fd(e / 2.0) - exact).abs());
    (a / b).log2()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradient_matches_energy_differences(grid in grid_strategy(), seed in any::<u64>()) {
        let f = Functional::new(grid);
        let u = Field2::new(grid, random_values(grid.len(), seed, 1.2), None).unwrap().into_values();
        let w = free_direction(&grid, seed ^ 0x5a5a);
        let fixed: Vec<bool> = (0..grid.len()).map(|n| grid.is_clamped(n)).collect();
        let mut g = vec![[0.0; 2]; grid.len()];
        f.gradient(&u, &fixed, &mut g);
        let exact: f64 = g.iter().zip(&w).map(|(a, b)| a[0] * b[0] + a[1] * b[1]).sum();
        let fd = |e: f64| {
            let plus: Vec<[f64; 2]> = w.iter().map(|v| [e * v[0], e * v[1]]).collect();
            let minus: Vec<[f64; 2]> = w.iter().map(|v| [-e * v[0], -e * v[1]]).collect();
            (f.energy_difference(&u, &plus) - f.energy_difference(&u, &minus)) / (2.0 * e)
        };
        let order = observed_order(exact, fd, 0.05);
        prop_assert!(order >= 1.9, "order {order}");
    }

    #[test]
    fn second_variation_matches_gradient_differences(grid in grid_strategy(), seed in any::<u64>()) {
        let f = Functional::new(grid);
        let u = Field2::new(grid, random_values(grid.len(), seed, 1.2), None).unwrap().into_values();
        let w = free_direction(&grid, seed ^ 0xa5a5);
        let fixed: Vec<bool> = (0..grid.len()).map(|n| grid.is_clamped(n)).collect();
        let exact = f.second_variation(&u, &w);
        let dir = |e: f64| {
            let shifted: Vec<[f64; 2]> = u.iter().zip(&w).map(|(a, b)| [a[0] + e * b[0], a[1] + e * b[1]]).collect();
            let mut g = vec![[0.0; 2]; grid.len()];
            f.gradient(&shifted, &fixed, &mut g);
            g.iter().zip(&w).map(|(a, b)| a[0] * b[0] + a[1] * b[1]).sum::<f64>()
        };
        let fd = |e: f64| (dir(e) - dir(-e)) / (2.0 * e);
        let order = observed_order(exact, fd, 0.05);
        prop_assert!(order >= 1.9, "order {order}");
    }

    #[test]
    fn projections_are_idempotent(grid in grid_strategy(), seed in any::<u64>()) {
        let u = Field2::new(grid, random_values(grid.len(), seed, 1.0), None).unwrap();
        for s in classes_for(&grid) {
            let p = project_symmetry(&u, s).unwrap();
            let pp = project_symmetry(&p, s).unwrap();
            prop_assert!(pp.sup_distance(&p) <= 1e-15, "{s}: {}", pp.sup_distance(&p));
            prop_assert!(gl_lab::symmetry_residual(&p, s).unwrap() <= 1e-15);
        }
    }

    #[test]
    fn field_encoding_round_trips(grid in grid_strategy(), seed in any::<u64>(), tagged in any::<bool>()) {
        let tag = if tagged { classes_for(&grid).last().copied() } else { None };
        let u = Field2::new(grid, random_values(grid.len(), seed, 3.0), tag).unwrap();
        let bytes = encode_field(&u);
        let (back, used) = decode_field(&bytes).unwrap();
        prop_assert_eq!(used, bytes.len());
        // Sector files always carry their fold count.
        let expected = match grid {
            Grid::Sector(g) => u.clone().with_tag(Some(SymmetryClass::Sector3D(g.ell))),
            _ => u.clone(),
        };
        prop_assert_eq!(&back, &expected);
        prop_assert_eq!(encode_field(&back), bytes);
    }
}

/// Courant: the `k`-th eigenfield (from 0) has at most `k + 1` nodal domains.
fn courant(values: &[f64], counts: impl Iterator<Item = usize>) {
    for (k, count) in counts.enumerate() {
        assert!(count <= k + 1, "eigenfield {k} (value {}) has {count} nodal domains", values[k]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn eigenfields_obey_courant(d in 1.2f64..3.5) {
        let g = StripGrid::new(d, 16.0, 161, 21).unwrap();
        let w = soliton_weight(&Grid::Strip(g));
        for variant in [PencilVariant::Mu, PencilVariant::Tmu] {
            let r = pencil_eigs_with_weight(g, &w, variant, 5, "sech^2").unwrap();
            courant(&r.eigenvalues, r.eigenfields.iter().map(|phi| nodal_domains_dims(phi, r.dims).unwrap()));
            courant(&r.eigenvalues, r.nodal_counts.iter().copied());
        }
        let us = Field2::from_fn(Grid::Strip(g), |p| [0.0, (p[0] / SQRT_2).tanh()]);
        for s in [SymmetryClass::PhaseImprintOnly, SymmetryClass::Imparity] {
            let r = stability_eigs(&us, s, 5).unwrap();
            let grid = *us.grid();
            courant(&r.eigenvalues, r.eigenfields.iter().map(|phi| nodal_domains_in_class(&grid, phi, s).unwrap()));
            courant(&r.eigenvalues, r.nodal_counts.iter().copied());
        }
    }

    #[test]
    fn string_barrier_never_increases(d in 1.0f64..2.0, images in 7usize..15) {
        let g = Grid::Strip(StripGrid::new(d, 10.0, 81, 9).unwrap());
        let us = discrete_soliton(g, 1e-9).unwrap().field;
        let ex = explicit_path(Regime::Soliton, &us, &ExplicitOptions::default()).unwrap();
        let start = ex.path.reparametrized(images).unwrap();
        let opts = StringOptions { iters: 40, ..StringOptions::default() };
        let (_, rep) = string_method(start, SymmetryClass::PhaseImprintOnly, &opts).unwrap();
        prop_assert!(rep.barrier_history.windows(2).all(|w| w[1] <= w[0] + REPARAM_ALLOWANCE), "{:?}", rep.barrier_history);
    }
}

#[test]
fn config_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("u{run}.glf"));
        let cfg = dir.path().join(format!("run{run}.cfg"));
        let text = format!("task = minimize\nd = 3\nL = 14\nnx = 113\nny = 25\nout = {}\n", out.display());
        std::fs::write(&cfg, text).unwrap();
        run_config(&cfg).unwrap();
        outputs.push(std::fs::read(out).unwrap());
    }
    assert!(!outputs[0].is_empty());
    assert_eq!(outputs[0], outputs[1]);
}
