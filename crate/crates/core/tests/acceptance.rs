//! Acceptance run: one PASS/FAIL line per criterion, details indented below.
//!
//! The process exits 0 even when a criterion fails so the failure is reported
//! rather than aborting the workspace suite. Set `APA_ACCEPTANCE_STRICT=1` to
//! exit 1 on any FAIL.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use apa::analytic::{self, q_closed_initial, rho_c, rho_c_cutoff, squeeze_series, tau_grid, QGrid};
use apa::fock::{evolve_free, fidelity, squeezed_coherent, squeezed_cutoff, FockSpace};
use apa::oracle::{BlockOracle, OracleOptions};
use apa::params::{derive, from_reduced, DerivedParams, PhysicalConfig};
use apa::validation::{validate, ValidationOptions, ValidationReport};
use num_complex::Complex64;

const ALPHA_SQ: f64 = 0.01;
const LATTICE: [f64; 5] = [0.0, 5.0, 10.0, 15.0, 20.0];
const CURVE_STEPS: usize = 400;
const ORACLE_STEPS: usize = 17;

const CLOSED_FORM_TOL: f64 = 1e-10;
const LINEAR_ORACLE_ABS_TOL: f64 = 1e-8;
const ORACLE_REL_TOL: f64 = 1e-6;
const Q_INITIAL_TOL: f64 = 1e-10;
const Q_CLOSED_TOL: f64 = 1e-7;
const DIAG_REL_TOL: f64 = 1e-6;
const FIDELITY_TOL: f64 = 1e-8;
const MU_NU_TOL: f64 = 1e-12;
const HEISENBERG_TOL: f64 = 1e-8;
const TRACE_TOL: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-10;
const EIGEN_FLOOR: f64 = 1e-10;
const PURITY_TOL: f64 = 1e-8;
const Q_NORM_TOL: f64 = 1e-3;
const PERIOD_TOL: f64 = 1e-12;
const DELTA_C_TOL: f64 = 1e-10;
const DOUBLING_TOL: f64 = 1e-8;
const DUAL_ROUTE_TOL: f64 = 1e-10;
// sign tests compare against ±ROUNDING; the closed forms vanish exactly at
// τ = 0 and at multiples of π and evaluate to ~1e-16 of either sign there
const ROUNDING: f64 = 1e-12;

// oracle curve values at ω_sw = 20 ω_R, τ = π/2, frozen from an independent
// dense-exponential run
const PINNED_S_Q: f64 = -2.313_008_310_940_523e-1;
const PINNED_S_P: f64 = 2.295_412_267_342_986;
const PINNED_REL_TOL: f64 = 1e-9;

type Outcome = Result<Vec<String>, Vec<String>>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

/// Expensive results used by more than one criterion.
struct Shared {
    report: ValidationReport,
    q_initial: QGrid,
    q_half_pi: QGrid,
}

struct Check {
    lines: Vec<String>,
    ok: bool,
}

impl Check {
    fn new() -> Self {
        Check {
            lines: Vec::new(),
            ok: true,
        }
    }

    fn expect(&mut self, ok: bool, line: String) {
        self.ok &= ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, line: String) {
        self.lines.push(format!("    {line}"));
    }

    fn done(self) -> Outcome {
        if self.ok {
            Ok(self.lines)
        } else {
            Err(self.lines)
        }
    }
}

fn reference(omega_sw: f64) -> DerivedParams {
    derive(&PhysicalConfig::reference(omega_sw)).expect("reference config")
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn curve_taus() -> Vec<f64> {
    tau_grid(4.0 * PI, CURVE_STEPS).unwrap()
}

fn linear_regime() -> Outcome {
    let mut c = Check::new();
    let p = reference(0.0);
    let taus = curve_taus();
    let s = squeeze_series(&p, ALPHA_SQ, &taus);
    let k = 4.0 * p.beta * p.beta * ALPHA_SQ;
    let dq = max_of(
        s.tau
            .iter()
            .zip(&s.s_q)
            .map(|(t, q)| (q - k * (1.0 - t.cos()).powi(2)).abs()),
    );
    let dp = max_of(s.tau.iter().zip(&s.s_p).map(|(t, v)| (v - k * t.sin().powi(2)).abs()));
    c.expect(
        dq <= CLOSED_FORM_TOL && dp <= CLOSED_FORM_TOL,
        format!("S_q, S_p vs 4β²|α|²(1−cosτ)², 4β²|α|²sin²τ on {CURVE_STEPS} τ: max |Δ| = {dq:.3e}, {dp:.3e} (tol {CLOSED_FORM_TOL:e})"),
    );
    let min_q = s.s_q.iter().copied().fold(f64::INFINITY, f64::min);
    let min_p = s.s_p.iter().copied().fold(f64::INFINITY, f64::min);
    c.expect(
        min_q >= -ROUNDING && min_p >= -ROUNDING,
        format!("min S_q = {min_q:.3e}, min S_p = {min_p:.3e} (≥ 0 to {ROUNDING:e})"),
    );

    let oracle = BlockOracle::new(&p, ALPHA_SQ, OracleOptions::default()).unwrap();
    let m = oracle.moment_series(&taus).unwrap();
    let d = max_of(m.iter().zip(s.s_q.iter().zip(&s.s_p)).map(|(m, (q, v))| {
        let (oq, op) = m.squeezing();
        (oq - q).abs().max((op - v).abs())
    }));
    c.expect(
        d <= LINEAR_ORACLE_ABS_TOL,
        format!("oracle vs closed form on {CURVE_STEPS} τ: max |Δ| = {d:.3e} (tol {LINEAR_ORACLE_ABS_TOL:e})"),
    );
    c.done()
}

fn distance_to_multiple_of_pi(t: f64) -> f64 {
    let r = t.rem_euclid(PI);
    r.min(PI - r)
}

fn scattering_regime(report: &ValidationReport) -> Outcome {
    let mut c = Check::new();
    let taus = curve_taus();
    let step = taus[1] - taus[0];
    for w in [5.0, 10.0, 15.0, 20.0] {
        let s = squeeze_series(&reference(w), ALPHA_SQ, &taus);
        let min_q = s.s_q.iter().copied().fold(f64::INFINITY, f64::min);
        c.expect(
            min_q >= -ROUNDING,
            format!("ω_sw = {w}: min S_q = {min_q:.3e} (≥ 0 to {ROUNDING:e})"),
        );
        if w > 10.0 {
            let max_p = s.s_p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            c.expect(
                max_p <= ROUNDING,
                format!("ω_sw = {w}: max S_p = {max_p:.3e} (≤ 0 to {ROUNDING:e})"),
            );
            // S_p returns to zero at every multiple of π, where the squeeze
            // phase e^{−2iτ} is back to 1; strictness is tested one grid step
            // away from those points
            let (strict, worst) = s
                .tau
                .iter()
                .zip(&s.s_p)
                .filter(|(t, _)| distance_to_multiple_of_pi(**t) > step)
                .fold((0usize, f64::NEG_INFINITY), |(n, m), (_, v)| (n + 1, m.max(*v)));
            c.expect(
                worst < 0.0,
                format!("ω_sw = {w}: max S_p over {strict} τ away from multiples of π = {worst:.3e} (< 0)"),
            );
        }
    }

    let oracle = BlockOracle::new(&reference(20.0), ALPHA_SQ, OracleOptions::default()).unwrap();
    let (oq, op) = oracle.moments(FRAC_PI_2).unwrap().squeezing();
    let rq = (oq - PINNED_S_Q).abs() / PINNED_S_Q.abs();
    let rp = (op - PINNED_S_P).abs() / PINNED_S_P.abs();
    c.expect(
        rq <= PINNED_REL_TOL && rp <= PINNED_REL_TOL,
        format!("pinned oracle curve ω_sw = 20, τ = π/2: S_q = {oq:.12e}, S_p = {op:.12e} (rel {rq:.1e}, {rp:.1e})"),
    );

    for w in [5.0, 10.0, 15.0, 20.0] {
        let entries: Vec<_> = report
            .entries
            .iter()
            .filter(|e| e.omega_sw_over_omega_r == w && matches!(e.report.quantity.as_str(), "s_q" | "s_p"))
            .collect();
        let worst = max_of(entries.iter().map(|e| e.report.rel_residual));
        let converged = entries.iter().all(|e| e.report.converged);
        c.expect(
            converged && worst <= ORACLE_REL_TOL,
            format!(
                "ω_sw = {w}: closed form vs oracle on {} points: max rel = {worst:.3e} (tol {ORACLE_REL_TOL:e}), converged = {converged}",
                entries.len()
            ),
        );
        // the same oracle values against the closed forms on the ν < 0 root
        let flipped = reference(w).negative_root();
        let other = max_of(entries.iter().map(|e| {
            let (q, p) = analytic::squeezing_closed(&flipped, ALPHA_SQ, e.tau.unwrap_or(0.0));
            let v = if e.report.quantity == "s_q" { q } else { p };
            (v - e.report.oracle).abs() / v.abs().max(1e-3)
        }));
        c.note(format!(
            "ω_sw = {w}: with ν → −ν the same comparison gives max rel = {other:.3e}"
        ));
    }
    c.done()
}

fn q_function_checks(shared: &Shared) -> Outcome {
    let mut c = Check::new();
    let q0 = &shared.q_initial;
    let d = max_of(
        q0.values
            .iter()
            .enumerate()
            .map(|(k, v)| (v - q_closed_initial(q0.grid.gamma(k))).abs()),
    );
    c.expect(
        d <= Q_INITIAL_TOL,
        format!(
            "τ = 0: max |Q − e^(−|γ|²)/π| over {} points = {d:.3e} (tol {Q_INITIAL_TOL:e})",
            q0.grid.len()
        ),
    );

    let q = &shared.q_half_pi;
    let (vr, vi) = q.second_moments();
    c.expect(
        vi < vr,
        format!("τ = π/2, ω_sw = 20: variance along γ_I = {vi:.6e}, along γ_R = {vr:.6e} (γ_I < γ_R)"),
    );
    let r = q.closed_form_residual.unwrap_or(f64::INFINITY);
    c.expect(
        r <= Q_CLOSED_TOL,
        format!(
            "τ = π/2: closed form vs numeric overlaps over {} points: max |Δ| = {r:.3e} (tol {Q_CLOSED_TOL:e})",
            q.grid.len()
        ),
    );
    c.done()
}

fn diagonalization(report: &ValidationReport) -> Outcome {
    let mut c = Check::new();
    for w in LATTICE {
        for quantity in [
            "pair_coefficient",
            "linear_coefficient",
            "number_coefficient",
            "kerr_coefficient",
        ] {
            let Some(e) = report
                .entries
                .iter()
                .find(|e| e.omega_sw_over_omega_r == w && e.report.quantity == quantity)
            else {
                c.expect(false, format!("ω_sw = {w}: {quantity} missing from the report"));
                continue;
            };
            let r = &e.report;
            c.expect(
                r.converged && r.rel_residual <= DIAG_REL_TOL,
                format!(
                    "ω_sw = {w}: {quantity}: expected {:.6e}, transformed matrix gives {:.6e}, rel {:.3e} (cutoff {}, doubling Δ {:.1e})",
                    r.analytic, r.oracle, r.rel_residual, r.cutoff, r.convergence_delta
                ),
            );
        }
    }
    c.done()
}

fn rotation_identity() -> Outcome {
    let mut c = Check::new();
    let betas = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::from_polar(1.5, PI / 4.0),
        Complex64::new(-2.0, 0.0),
        Complex64::new(0.0, 3.0),
        Complex64::from_polar(3.0, 2.0 * PI / 3.0),
    ];
    let xis = [0.0, 0.1, 0.25, 0.5];
    let angles = [0.0, PI / 7.0, FRAC_PI_2, PI, 2.0 * PI];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &b in &betas {
        for &x in &xis {
            let xi = Complex64::new(x, 0.0);
            let space = FockSpace::new(squeezed_cutoff(b, xi)).unwrap();
            let psi = squeezed_coherent(space, b, xi).unwrap();
            for &wt in &angles {
                let rotated = squeezed_coherent(
                    space,
                    b * Complex64::from_polar(1.0, -wt),
                    xi * Complex64::from_polar(1.0, -2.0 * wt),
                )
                .unwrap();
                let f = fidelity(&evolve_free(&psi, wt), &rotated).unwrap();
                worst = worst.max(1.0 - f);
                count += 1;
            }
        }
    }
    c.expect(
        worst <= FIDELITY_TOL,
        format!("{count} (β, ξ, ωt) points, |β| ≤ 3, ξ ≤ 0.5: max 1 − fidelity = {worst:.3e} (tol {FIDELITY_TOL:e})"),
    );
    c.done()
}

fn properties(shared: &Shared) -> Outcome {
    let report = &shared.report;
    let mut c = Check::new();
    let mut worst: f64 = 0.0;
    for k in -10..=400 {
        let w = 0.1 * k as f64;
        let p = from_reduced(1.0, 1.0, w, 1.0, 0.0).unwrap();
        worst = worst.max((p.mu * p.mu - p.nu * p.nu - 1.0).abs());
    }
    c.expect(
        worst <= MU_NU_TOL,
        format!("|μ² − ν² − 1| over ω_sw ∈ [−1, 40]: {worst:.3e} (tol {MU_NU_TOL:e})"),
    );

    let taus = curve_taus();
    let series: Vec<_> = LATTICE
        .iter()
        .map(|&w| squeeze_series(&reference(w), ALPHA_SQ, &taus))
        .collect();
    let h = series.iter().map(|s| s.heisenberg_min()).fold(f64::INFINITY, f64::min);
    c.expect(
        h >= 1.0 - HEISENBERG_TOL,
        format!("min (S_q + 1)(S_p + 1) over the lattice = {h:.12} (≥ 1 − {HEISENBERG_TOL:e})"),
    );

    let mut period: f64 = 0.0;
    for w in LATTICE {
        let p = reference(w);
        for &t in &taus {
            let (q0, p0) = analytic::squeezing_closed(&p, ALPHA_SQ, t);
            let (q1, p1) = analytic::squeezing_closed(&p, ALPHA_SQ, t + 2.0 * PI);
            let scale = q0.abs().max(p0.abs()).max(1.0);
            period = period.max((q1 - q0).abs().max((p1 - p0).abs()) / scale);
        }
    }
    c.expect(
        period <= PERIOD_TOL,
        format!("closed forms at τ + 2π vs τ: max rel |Δ| = {period:.3e} (tol {PERIOD_TOL:e})"),
    );

    let p = reference(20.0);
    let space = FockSpace::new(rho_c_cutoff(&p, ALPHA_SQ)).unwrap();
    for tau in [0.0, FRAC_PI_2, PI] {
        let state = rho_c(&p, ALPHA_SQ, tau, space).unwrap();
        let rho = &state.rho;
        let trace = (rho.trace() - 1.0).abs();
        let herm = rho.hermiticity_residual();
        let min_eig = rho.eigenvalues().unwrap().into_iter().fold(f64::INFINITY, f64::min);
        let purity = rho.purity();
        c.expect(
            trace <= TRACE_TOL && herm <= HERMITIAN_TOL && min_eig >= -EIGEN_FLOOR && purity <= 1.0 + PURITY_TOL,
            format!(
                "ρ_c at ω_sw = 20, τ = {tau:.4}, dim {}: |tr − 1| = {trace:.1e}, hermiticity {herm:.1e}, min eigenvalue {min_eig:.1e}, purity {purity:.6}",
                space.dim()
            ),
        );
        let shifted = rho_c(&p.with_delta_c(3.0), ALPHA_SQ, tau, space).unwrap();
        let d = (shifted.rho.matrix() - rho.matrix()).norm_max();
        c.expect(
            d <= DELTA_C_TOL,
            format!("ρ_c at τ = {tau:.4}: max |Δρ| between δ_c and δ_c + 3 = {d:.3e}"),
        );
    }

    for q in [&shared.q_initial, &shared.q_half_pi] {
        let (min, sum) = (q.min_value(), q.riemann_sum());
        c.expect(
            min >= 0.0 && (sum - 1.0).abs() <= Q_NORM_TOL,
            format!(
                "Q at τ = {:.4} on {}: min = {min:.3e}, Σ QΔ² = {sum:.8} (tol {Q_NORM_TOL:e})",
                q.tau, q.grid
            ),
        );
    }

    let tensor = max_of(
        report
            .entries
            .iter()
            .filter(|e| e.report.quantity == "delta_c_trace_distance")
            .map(|e| e.report.oracle),
    );
    c.expect(
        tensor <= DELTA_C_TOL,
        format!("full tensor ρ_c, δ_c = 0 vs 3: max trace distance = {tensor:.3e}"),
    );

    let delta = max_of(report.entries.iter().map(|e| e.report.convergence_delta));
    let unconverged = report.unconverged().count();
    c.expect(
        delta < DOUBLING_TOL && unconverged == 0 && report.truncation_failures.is_empty(),
        format!(
            "cutoff doubling over {} reported scalars: max Δ = {delta:.3e} (tol {DOUBLING_TOL:e}), {unconverged} unconverged, {} truncation failures",
            report.entries.len(),
            report.truncation_failures.len()
        ),
    );
    c.done()
}

fn dual_route() -> Outcome {
    let mut c = Check::new();
    let taus = curve_taus();
    for w in LATTICE {
        let s = squeeze_series(&reference(w), ALPHA_SQ, &taus);
        c.expect(
            !s.discrepancy && s.max_dual_route_residual <= DUAL_ROUTE_TOL,
            format!(
                "ω_sw = {w}: closed form vs moment route on {CURVE_STEPS} τ ∈ [0, 4π]: max |Δ| = {:.3e} (tol {DUAL_ROUTE_TOL:e})",
                s.max_dual_route_residual
            ),
        );
    }
    c.done()
}

fn main() {
    let start = Instant::now();
    let taus = tau_grid(2.0 * PI, ORACLE_STEPS).unwrap();
    let report = validate(
        &PhysicalConfig::reference(20.0),
        &ValidationOptions::new(LATTICE.to_vec(), taus),
    )
    .expect("validation run");
    let p = reference(20.0);
    let q_initial = analytic::q_function(&p, ALPHA_SQ, 0.0, "-5:5:101".parse().unwrap()).unwrap();
    let q_half_pi = analytic::q_function(&p, ALPHA_SQ, FRAC_PI_2, "-8:8:161".parse().unwrap()).unwrap();
    println!(
        "validation lattice omega_sw = {LATTICE:?}, {ORACLE_STEPS} tau on [0, 2pi]: {} entries; Q grids at tau = 0, pi/2 ({:.1} s)",
        report.entries.len(),
        start.elapsed().as_secs_f64()
    );
    let shared = Shared {
        report,
        q_initial,
        q_half_pi,
    };

    let criteria: [Criterion; 7] = [
        ("linear regime squeezing, omega_sw = 0", Box::new(linear_regime)),
        (
            "squeezing signs and oracle curves, omega_sw = 5..20",
            Box::new(|| scattering_regime(&shared.report)),
        ),
        (
            "Q function at tau = 0 and pi/2",
            Box::new(|| q_function_checks(&shared)),
        ),
        (
            "diagonalization chain residuals",
            Box::new(|| diagonalization(&shared.report)),
        ),
        ("free rotation of squeezed coherent states", Box::new(rotation_identity)),
        ("property suite", Box::new(|| properties(&shared))),
        ("closed form vs moment-assembled squeezing", Box::new(dual_route)),
    ];

    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let elapsed = t.elapsed().as_secs_f64();
        let (ok, lines) = match outcome {
            Ok(lines) => (true, lines),
            Err(lines) => (false, lines),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {} {}: {name} ({elapsed:.1} s)",
            k + 1,
            if ok { "PASS" } else { "FAIL" }
        );
        for l in lines {
            println!("    {l}");
        }
    }
    println!(
        "acceptance: {} of {} criteria pass ({:.1} s)",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 && std::env::var_os("APA_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
