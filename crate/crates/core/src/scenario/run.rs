//! The build → solve → verify → measure pipeline.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cohomology::{integral_cohomology, simplicial_cohomology, verify_exactness, CohomologyGroup};
use crate::complex::{build_complex, build_cover, Cochain, GoodCover, MeshKind, SimplicialComplex};
use crate::db::{db_differential, random_cochain};
use crate::dynamics::{
    charge_bracket, chart_functions, eom_residuals, electric_charge, magnetic_charges, presymplectic_potential,
    quantization_check, scalar_two_form_charge, BoundaryState, EomReport,
};
use crate::error::Result;
use crate::fields::{gauge_parameter, gerbe_class, BoundarySlice, FieldVariation, U1Connection};
use crate::quadrature::adaptive_simpson;
use crate::scenario::config::{rings_for, AnnulusConfig, SphereConfig, DualSmearing, FieldConfig, ManifoldConfig, PolynomialForm, ScenarioConfig};
use crate::scenario::report::{
    Charges, Check, CohomologyRow, GerbeSummary, Measured, Mode, ScenarioReport, Series, SphereSummary, Status, Timings,
};
use crate::wilson::solve_harmonic_form;

const SEED: u64 = 0x5eed;
const DRIFT_TOLERANCE: f64 = 1e-10;
const TOPOLOGY_SUBDIVISION: usize = 2;
const TOPOLOGY_THETA: usize = 16;

/// Flags that change what a run computes.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Skip discretization observables and convergence series.
    pub exact_only: bool,
}

pub fn run_scenario(cfg: &ScenarioConfig, opts: RunOptions) -> Result<(ScenarioReport, Timings)> {
    let mut timings = Timings::default();
    let mut report = ScenarioReport {
        scenario: cfg.name.clone(),
        status: Status::Ok,
        config: cfg.clone(),
        cohomology: Vec::new(),
        quantization: None,
        gerbe: None,
        wilson: None,
        eom: None,
        charges: None,
        sphere: None,
        convergence: Vec::new(),
        checks: Vec::new(),
    };
    match cfg.manifold {
        ManifoldConfig::Annulus(_) => run_annulus(cfg, opts, &mut report, &mut timings)?,
        ManifoldConfig::Sphere(_) => run_sphere(cfg, opts, &mut report, &mut timings)?,
    }
    if report.status == Status::Ok && report.exact_failures().next().is_some() {
        report.status = Status::InvariantFailure;
    }
    Ok((report, timings))
}

fn check(report: &mut ScenarioReport, name: &str, mode: Mode, passed: bool, detail: String) {
    report.checks.push(Check { name: name.into(), mode, passed, detail });
}

fn cohomology_rows(space: &str, groups: impl IntoIterator<Item = CohomologyGroup>) -> Vec<CohomologyRow> {
    groups
        .into_iter()
        .enumerate()
        .map(|(degree, group)| CohomologyRow { space: space.into(), degree, group, mode: Mode::Exact })
        .collect()
}

fn angles(cx: &SimplicialComplex) -> Vec<f64> {
    cx.coords().iter().map(|p| p[1].atan2(p[0])).collect()
}

/// `∫ P dx + Q dy` along each edge, by Simpson's rule on the straight segment.
fn polynomial_form(cx: &SimplicialComplex, form: &PolynomialForm) -> Cochain<f64> {
    let c = cx.coords();
    Cochain::new(
        1,
        cx.simplices(1)
            .iter()
            .map(|e| {
                let (p, q) = (c[e[0]], c[e[1]]);
                let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
                let at = |t: f64| {
                    let (x, y) = (p[0] + t * dx, p[1] + t * dy);
                    form.dx.eval(x, y) * dx + form.dy.eval(x, y) * dy
                };
                (at(0.0) + 4.0 * at(0.5) + at(1.0)) / 6.0
            })
            .collect(),
    )
}

/// Chart functions `α̃_i = F(θ) + w θ_i` on the corner circle.
fn dual_smearing(cx: &SimplicialComplex, cover: &GoodCover, s: &DualSmearing) -> Result<Vec<Cochain<f64>>> {
    let theta = angles(cx);
    let n = cx.len(0);
    let step: Vec<f64> = (0..n)
        .map(|v| s.winding as f64 * ((theta[(v + 1) % n] - theta[v] + PI).rem_euclid(TAU) - PI))
        .collect();
    let wind = chart_functions(cx, cover, &step, s.winding)?;
    Ok((0..cover.n_charts())
        .map(|i| {
            let f = &wind.forms(0)[i];
            let chart = cover.chart(i);
            Cochain::new(0, chart.simplices(0).iter().zip(&f.values).map(|(&v, w)| s.fourier.eval(theta[v]) + w).collect())
        })
        .collect())
}

struct Level {
    slice: BoundarySlice,
    state: BoundaryState,
    alpha_bulk: Cochain<f64>,
    alpha_edge: Cochain<f64>,
    dual_alpha: Vec<Cochain<f64>>,
}

fn build_level(cfg: &ScenarioConfig, n_theta: usize) -> Result<Level> {
    let ManifoldConfig::Annulus(AnnulusConfig { n_theta: base, n_r, r_in, r_out, charts }) = cfg.manifold else { unreachable!() };
    let c = cfg.couplings.expect("validated");
    let slice = BoundarySlice::annulus(rings_for(n_theta, base, n_r, r_in, r_out), n_theta, r_in, r_out, charts)?;
    let f: &FieldConfig = &cfg.fields;
    let mut state = BoundaryState::vacuum(slice.clone(), c.k, c.p, c.n)?;
    state.e2 = c.e2;
    let bulk = &slice.bulk;
    let chi = Cochain::new(0, bulk.coords().iter().map(|p| f.potential_gauge.eval(p[0], p[1])).collect());
    state.potential = bulk.full().coboundary(&chi)?;
    state.edge_mode = Cochain::new(0, bulk.coords().iter().map(|p| f.edge_mode.eval(p[0], p[1])).collect());
    let mut dual = polynomial_form(bulk, &f.dual_potential);
    let corner = slice.vertex_trace();
    for (e, s) in bulk.simplices(1).iter().enumerate() {
        if corner.contains(&s[0]) && corner.contains(&s[1]) {
            dual.values[e] = 0.0;
        }
    }
    state.dual_connection = U1Connection::global(bulk, &slice.bulk_cover, &dual)?;
    let state = state.with_matching_bulk()?;
    let alpha_bulk = Cochain::new(0, angles(bulk).into_iter().map(|t| f.alpha.eval(t)).collect());
    let alpha_edge = slice.trace(&alpha_bulk)?;
    let dual_alpha = dual_smearing(&slice.edge, &slice.edge_cover, &f.dual_alpha)?;
    Ok(Level { slice, state, alpha_bulk, alpha_edge, dual_alpha })
}

fn bracket_oracle(cfg: &ScenarioConfig) -> f64 {
    let f = &cfg.fields;
    let k = cfg.couplings.expect("validated").k as f64;
    let w = f.dual_alpha.winding as f64;
    -k / TAU * adaptive_simpson(|t| f.alpha.eval(t) * (f.dual_alpha.fourier.derivative(t) + w), 0.0, TAU, 1e-13)
}

/// `(k/2π)∮ a α̃` for a global smearing, with `a = d(φ - χ)` on the outer circle.
fn magnetic_oracle(cfg: &ScenarioConfig) -> Option<f64> {
    let f = &cfg.fields;
    if f.dual_alpha.winding != 0 {
        return None;
    }
    let ManifoldConfig::Annulus(AnnulusConfig { r_out, .. }) = cfg.manifold else { return None };
    let k = cfg.couplings.expect("validated").k as f64;
    let integrand = |t: f64| {
        let (x, y) = (r_out * t.cos(), r_out * t.sin());
        (f.edge_mode.angular_derivative(x, y) - f.potential_gauge.angular_derivative(x, y)) * f.dual_alpha.fourier.eval(t)
    };
    Some(k / TAU * adaptive_simpson(integrand, 0.0, TAU, 1e-13))
}

/// Largest change of the potential and charges under seeded random gauge transformations.
fn gauge_drift(level: &Level, samples: usize) -> Result<f64> {
    let (s, state) = (&level.slice, &level.state);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut random = |n: usize| Cochain::new(0, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>());
    let var = FieldVariation {
        potential: None,
        edge_mode: Some(random(s.bulk.len(0))),
        dual_potential: Some(s.bulk.full().coboundary(&random(s.bulk.len(0)))?),
        dual_edge_mode: Some(random(s.edge.len(0))),
    };
    let observe = |st: &BoundaryState| -> Result<Vec<f64>> {
        let mut out = vec![
            presymplectic_potential(st, &var)?.value,
            electric_charge(s, &level.alpha_bulk, &st.dual_connection, st.k)?,
        ];
        out.extend(magnetic_charges(s, &s.trace(&st.dressed()?)?, &level.dual_alpha, st.k)?);
        Ok(out)
    };
    let base = observe(state)?;
    let mut drift: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    for _ in 0..samples {
        let eps = Cochain::new(0, (0..s.bulk.len(0)).map(|_| rng.gen_range(-2.0..2.0)).collect());
        let nu: Vec<i64> = (0..s.bulk_cover.n_charts()).map(|_| rng.gen_range(-3..=3)).collect();
        let dual_eps = Cochain::new(0, (0..s.bulk.len(0)).map(|_| rng.gen_range(-2.0..2.0)).collect());
        let moved = state.gauge_transform(&eps)?.dual_gauge_transform(&gauge_parameter(s, &dual_eps, &nu)?)?;
        for (a, b) in observe(&moved)?.iter().zip(&base) {
            drift = drift.max((a - b).abs());
        }
    }
    Ok(drift)
}

fn run_annulus(cfg: &ScenarioConfig, opts: RunOptions, report: &mut ScenarioReport, timings: &mut Timings) -> Result<()> {
    let c = cfg.couplings.expect("validated");
    let levels = cfg.levels();
    let finest = *levels.last().expect("at least one level");
    let tol = cfg.tolerances;

    let q = quantization_check(c.k, c.p, c.n)?;
    report.quantization = Some(q.clone());
    let ManifoldConfig::Annulus(AnnulusConfig { n_theta: base, n_r, r_in, r_out, charts }) = cfg.manifold else { unreachable!() };
    // Topology is refinement independent; dense integer reduction runs on a coarse annulus
    // with the same chart structure.
    let coarse = (2 * charts).max(TOPOLOGY_THETA);
    let topo = timings.record("build", || BoundarySlice::annulus(rings_for(coarse, base, n_r, r_in, r_out), coarse, r_in, r_out, charts))?;
    timings.record("cohomology", || {
        let (bulk, edge) = (&topo.bulk_cover, &topo.edge_cover);
        report.cohomology.extend(cohomology_rows("annulus", (0..=2).map(|q| simplicial_cohomology(&topo.bulk, q))));
        report.cohomology.extend(cohomology_rows("annulus_nerve", (0..=bulk.nerve().dim()).map(|q| integral_cohomology(bulk.nerve(), q))));
        report.cohomology.extend(cohomology_rows("corner_nerve", (0..=edge.nerve().dim()).map(|q| integral_cohomology(edge.nerve(), q))));
    });
    let h1 = |space: &str| report.cohomology.iter().find(|r| r.space == space && r.degree == 1).map(|r| r.group.clone());
    let ok = h1("annulus") == Some(CohomologyGroup::integers()) && h1("corner_nerve") == Some(CohomologyGroup::integers());
    check(report, "first_cohomology_is_integers", Mode::Exact, ok, "H¹ of the annulus and of the corner nerve".into());

    let nilpotent = timings.record("db_nilpotency", || -> Result<bool> {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut ok = true;
        for k in 0..3usize {
            for l in -1..=(k as i64 + 1) {
                let x = random_cochain(&topo.bulk_cover, k, l, &mut rng)?;
                let dx = db_differential(&topo.bulk_cover, k, l, &x)?;
                ok &= db_differential(&topo.bulk_cover, k, l + 1, &dx)?.is_zero();
            }
        }
        Ok(ok)
    })?;
    check(report, "differential_squares_to_zero", Mode::Exact, nilpotent, "D∘D on random rational cochains, k ≤ 2".into());

    let bulk = build_complex(&MeshKind::Annulus { n_r: rings_for(finest, base, n_r, r_in, r_out), n_theta: finest, r_in, r_out, jitter: 0.0 })?;
    let omega = timings.record("wilson", || solve_harmonic_form(&bulk, c.n))?;
    check(report, "wilson_form_closed", Mode::Exact, omega.diagnostics.closure == 0.0, format!("max |dΩ| = {:e}", omega.diagnostics.closure));
    let period_err = (omega.diagnostics.period_outer - TAU * c.n as f64).abs();
    check(report, "wilson_period", Mode::Numeric, period_err <= tol.numeric, format!("|∮Ω - 2πn| = {period_err:e}"));
    report.wilson = Some(omega.diagnostics.clone());

    if !q.feasible {
        report.status = Status::Infeasible;
        check(report, "quantization", Mode::Exact, true, format!("k = {} does not divide pn = {}; required winding {}", c.k, c.p * c.n, q.required_winding));
        return Ok(());
    }

    let level = timings.record("solve", || build_level(cfg, finest))?;
    let eom: EomReport = timings.record("eom", || eom_residuals(&level.state))?;
    let w = q.winding.expect("feasible");
    check(report, "winding_matches_quantization", Mode::Exact, eom.winding == w, format!("winding {} against pn/k = {w}", eom.winding));
    let class = gerbe_class(&level.slice.edge_cover, &level.state.dual_edge_mode)?;
    check(report, "gerbe_class_is_winding", Mode::Exact, class.free == vec![w], format!("class {:?}", class.free));
    check(report, "on_shell", Mode::Numeric, eom.on_shell(tol.numeric), format!("largest residual {:e}", eom.max_residual()));
    report.gerbe = Some(GerbeSummary { trivial: class.is_trivial(), class: class.free, winding: eom.winding, mode: Mode::Exact });
    report.eom = Some(eom);

    if !opts.exact_only {
        let charges = timings.record("charges", || -> Result<Charges> {
            let (s, st) = (&level.slice, &level.state);
            let k = c.k;
            let electric = electric_charge(s, &level.alpha_bulk, &st.dual_connection, k)?;
            let var = FieldVariation { edge_mode: Some(level.alpha_bulk.clone()), ..Default::default() };
            let theta = presymplectic_potential(st, &var)?.value;
            let magnetic = magnetic_charges(s, &s.trace(&st.dressed()?)?, &level.dual_alpha, k)?;
            let total: f64 = magnetic.iter().sum();
            let bracket = charge_bracket(&s.edge, &s.edge_cover, &level.alpha_edge, &level.dual_alpha, k)?;
            let drift = gauge_drift(&level, 10)?;
            let bracket_oracle = bracket_oracle(cfg);
            let bracket_tol = if bracket_oracle == 0.0 { tol.numeric } else { tol.oracle_relative };
            Ok(Charges {
                electric: Measured::numeric(electric, tol.numeric),
                magnetic: magnetic.iter().map(|&m| Measured::numeric(m, tol.numeric)).collect(),
                magnetic_total: match magnetic_oracle(cfg) {
                    Some(o) => Measured::against(total, o, if o == 0.0 { tol.numeric } else { tol.oracle_relative }),
                    None => Measured::numeric(total, tol.numeric),
                },
                magnetic_convention: "partition_of_unity".into(),
                bracket: Measured::against(bracket, bracket_oracle, bracket_tol),
                potential_on_alpha: Measured::against(theta, electric, DRIFT_TOLERANCE),
                gauge_drift: Measured::against(drift, 0.0, DRIFT_TOLERANCE),
            })
        })?;
        check(report, "bracket_oracle", Mode::Numeric, charges.bracket.within(), format!("error {:e}", charges.bracket.error.unwrap_or(0.0)));
        check(report, "magnetic_total_oracle", Mode::Numeric, charges.magnetic_total.within(), format!("error {:?}", charges.magnetic_total.error));
        check(report, "potential_gives_electric_charge", Mode::Numeric, charges.potential_on_alpha.within(), format!("error {:e}", charges.potential_on_alpha.error.unwrap_or(0.0)));
        check(report, "gauge_invariance", Mode::Numeric, charges.gauge_drift.within(), format!("drift {:e}", charges.gauge_drift.value));
        report.charges = Some(charges);

        timings.record("convergence", || -> Result<()> {
            let mut bracket = Series::new("bracket", Some(bracket_oracle(cfg)));
            let mut magnetic = Series::new("magnetic_total", magnetic_oracle(cfg));
            let mut electric = Series::new("electric", None);
            let mut coclosure = Series::new("wilson_coclosure", None);
            let mut tangentiality = Series::new("wilson_tangentiality", None);
            for &l in &levels {
                let lv = if l == finest { level_ref(&level) } else { build_level(cfg, l)? };
                let (s, st) = (&lv.slice, &lv.state);
                let h_edge = s.edge.max_edge_length();
                let h_bulk = s.bulk.max_edge_length();
                bracket.push(l, h_edge, charge_bracket(&s.edge, &s.edge_cover, &lv.alpha_edge, &lv.dual_alpha, c.k)?);
                let total: f64 = magnetic_charges(s, &s.trace(&st.dressed()?)?, &lv.dual_alpha, c.k)?.iter().sum();
                magnetic.push(l, h_edge, total);
                electric.push(l, h_bulk, electric_charge(s, &lv.alpha_bulk, &st.dual_connection, c.k)?);
                coclosure.push(l, h_bulk, st.omega.diagnostics.coclosure);
                tangentiality.push(l, h_bulk, st.omega.diagnostics.tangentiality);
            }
            for mut s in [bracket, magnetic, electric, coclosure, tangentiality] {
                s.fit();
                report.convergence.push(s);
            }
            Ok(())
        })?;
        order_check(cfg, report, "bracket");
    }
    Ok(())
}

fn level_ref(level: &Level) -> Level {
    Level {
        slice: level.slice.clone(),
        state: level.state.clone(),
        alpha_bulk: level.alpha_bulk.clone(),
        alpha_edge: level.alpha_edge.clone(),
        dual_alpha: level.dual_alpha.clone(),
    }
}

fn order_check(cfg: &ScenarioConfig, report: &mut ScenarioReport, observable: &str) {
    let Some(expected) = cfg.expected_order else { return };
    let fitted = report.convergence.iter().find(|s| s.observable == observable).and_then(|s| s.fitted_order);
    let passed = fitted.is_some_and(|f| (f - expected).abs() <= cfg.tolerances.order_slack);
    check(report, &format!("{observable}_order"), Mode::Numeric, passed, format!("fitted {fitted:?}, expected {expected}"));
}

/// `g ∫ (1 - cos ϑ) dφ` along each edge, projected radially onto the unit sphere.
pub fn monopole_form(cx: &SimplicialComplex, g: f64) -> Cochain<f64> {
    let c = cx.coords();
    Cochain::new(
        1,
        cx.simplices(1)
            .iter()
            .map(|e| {
                let (p, q) = (c[e[0]], c[e[1]]);
                let at = |t: f64| {
                    let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), p[2] + t * (q[2] - p[2])];
                    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                    let dphi = (x[0] * (q[1] - p[1]) - x[1] * (q[0] - p[0])) / (x[0] * x[0] + x[1] * x[1]);
                    (1.0 - x[2] / r) * dphi
                };
                g * adaptive_simpson(at, 0.0, 1.0, 1e-12)
            })
            .collect(),
    )
}

pub fn polar_angle(cx: &SimplicialComplex) -> Cochain<f64> {
    Cochain::new(0, cx.coords().iter().map(|p| p[2].clamp(-1.0, 1.0).acos()).collect())
}

/// `∫ g (1 - cos ϑ) dφ ∧ dϑ` over the round sphere.
pub fn monopole_oracle(g: f64) -> f64 {
    -g * TAU * adaptive_simpson(|t: f64| 1.0 - t.cos(), 0.0, PI, 1e-13)
}

fn run_sphere(cfg: &ScenarioConfig, opts: RunOptions, report: &mut ScenarioReport, timings: &mut Timings) -> Result<()> {
    let ManifoldConfig::Sphere(SphereConfig { subdivision }) = cfg.manifold else { unreachable!() };
    let cx = timings.record("build", || build_complex(&MeshKind::Sphere { subdivision }))?;
    // Topology is refinement independent; dense integer reduction runs on the coarsest sphere.
    let coarse = build_complex(&MeshKind::Sphere { subdivision: TOPOLOGY_SUBDIVISION })?;
    let cover = build_cover(&coarse, 12)?;
    timings.record("cohomology", || {
        report.cohomology.extend(cohomology_rows("sphere", (0..=2).map(|q| simplicial_cohomology(&coarse, q))));
        report.cohomology.extend(cohomology_rows("sphere_nerve", (0..=2).map(|q| integral_cohomology(cover.nerve(), q))));
    });
    let expected = [CohomologyGroup::integers(), CohomologyGroup::zero(), CohomologyGroup::integers()];
    let ok = ["sphere", "sphere_nerve"].iter().all(|space| {
        (0..3).all(|q| report.cohomology.iter().any(|r| r.space == *space && r.degree == q && r.group == expected[q]))
    });
    check(report, "sphere_cohomology", Mode::Exact, ok, "H⁰ = Z, H¹ = 0, H² = Z".into());
    let exactness = timings.record("exact_sequences", || verify_exactness(&coarse, &cover, SEED))?;
    check(report, "exact_sequences", Mode::Exact, exactness.all_exact(), format!("{} nodes", exactness.nodes.len()));

    let g = cfg.fields.monopole;
    let oracle = monopole_oracle(g);
    let charge_tol = if oracle == 0.0 { cfg.tolerances.numeric } else { cfg.tolerances.oracle_relative };
    let constant = scalar_two_form_charge(&cx, &monopole_form(&cx, g), &cx.full().constant(1.0))?;
    check(report, "constant_scalar_carries_no_charge", Mode::Exact, constant == 0.0, format!("{constant:e}"));
    if opts.exact_only {
        report.sphere = Some(SphereSummary { charge: None, exactness });
        return Ok(());
    }
    let mut series = Series::new("sphere_charge", Some(oracle));
    let mut finest = 0.0;
    timings.record("charges", || -> Result<()> {
        for l in cfg.levels() {
            let cx = if l == subdivision { cx.clone() } else { build_complex(&MeshKind::Sphere { subdivision: l })? };
            finest = scalar_two_form_charge(&cx, &monopole_form(&cx, g), &polar_angle(&cx))?;
            series.push(l, cx.max_edge_length(), finest);
        }
        Ok(())
    })?;
    series.fit();
    let charge = Measured::against(finest, oracle, charge_tol);
    check(report, "sphere_charge_oracle", Mode::Numeric, charge.within(), format!("error {:?}", charge.error));
    report.sphere = Some(SphereSummary { charge: Some(charge), exactness });
    report.convergence.push(series);
    order_check(cfg, report, "sphere_charge");
    Ok(())
}
