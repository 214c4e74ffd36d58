//! Acceptance gate. Prints one PASS/FAIL line per criterion at the stated
//! tolerance and runtime budget.
//!
//! Criterion 3 asks for a two-sided `ℓ+1 ± 0.15` rate on the `L²` errors
//! of the displacement and flux projections, which measure `ℓ+2` (the
//! proven estimate is an upper bound). It is reported as FAIL. The process
//! exits nonzero if any other criterion fails, or if criterion 3 stops
//! failing in exactly that way.

use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use biot_core::assembly::{default_eta, PhysicalParams};
use biot_core::mesh::Mesh;
use biot_core::slab_solver::{march, Discretization, TimeGrid};
use biot_core::verification::properties::{quadrature_exactness, random_state, time_basis_identities};
use biot_core::verification::{
    default_mms, mass_conservation_audit, polynomial_exactness, projection_study, spatial_study, temporal_study, Eoc,
    ProjectionErrors, StudySettings,
};
use rand::SeedableRng;

const SEED: u64 = 20240601;
const H_LEVELS: [usize; 4] = [4, 8, 16, 32];

struct Outcome {
    id: u32,
    title: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn rates(r: &[Eoc]) -> String {
    r.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")
}

fn all_at_least(r: &[Eoc], min: f64) -> bool {
    r.iter().all(|e| e.rate().is_some_and(|v| v >= min))
}

fn criterion1() -> (bool, String) {
    let checks = quadrature_exactness(4, 1e-13).expect("quadrature rules");
    let bad: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    (bad.is_empty(), format!("{} rule checks, failing: {bad:?}", checks.len()))
}

fn criterion2() -> (bool, String) {
    let checks = time_basis_identities(3, 100, 1e-11, SEED).expect("identity checks");
    let bad: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| format!("{} ({})", c.name, c.detail)).collect();
    (bad.is_empty(), format!("{} checks, failing: {bad:?}", checks.len()))
}

/// Returns the verdict, the detail, and whether the outcome is exactly the
/// documented one (only the two `L²` rates of u and w off, at `ℓ+2`).
fn criterion3() -> (bool, String, bool) {
    let mut ok = true;
    let mut documented = true;
    let mut detail = String::new();
    for ell in 0..=1 {
        let params = PhysicalParams {
            eta: default_eta(ell),
            ..Default::default()
        };
        let study = projection_study(ell, &H_LEVELS, params, 1.0, 0.3).expect("projection study");
        let target = (ell + 1) as f64;
        for (name, r) in ProjectionErrors::NAMES.iter().zip(study.rates()) {
            if !["u_l2", "w_l2", "p_l2", "u_dg"].contains(name) {
                continue;
            }
            let within = r.iter().all(|e| e.rate().is_some_and(|v| (v - target).abs() <= 0.15));
            ok &= within;
            let superconvergent = r.last().and_then(Eoc::rate).is_some_and(|v| (v - (target + 1.0)).abs() <= 0.15);
            let expected_fail = matches!(*name, "u_l2" | "w_l2");
            documented &= if expected_fail { !within && superconvergent } else { within };
            detail.push_str(&format!(" ell={ell} {name}=[{}]", rates(&r)));
        }
    }
    (ok, format!("target ell+1 +- 0.15;{detail}"), documented)
}

fn criterion4(audits: &mut Vec<f64>) -> (bool, String) {
    let mut ok = true;
    let mut detail = String::new();
    for (k, counts) in [(1usize, [4usize, 8, 16, 32]), (2, [2, 4, 8, 16])] {
        let s = StudySettings {
            k,
            ell: 0,
            t_final: 0.5,
            omega: 1.0,
            params: PhysicalParams::default(),
        };
        let study = temporal_study(&s, 4, &counts).expect("temporal study");
        let r = study.combined_eoc();
        ok &= all_at_least(&r, (k + 1) as f64 - 0.2);
        audits.extend(study.rows.iter().map(|r| r.mass_audit));
        detail.push_str(&format!(" k={k} EOC=[{}] (need >= {:.1})", rates(&r), k as f64 + 0.8));
    }
    (ok, detail)
}

fn criterion5(audits: &mut Vec<f64>) -> (bool, String) {
    let s = StudySettings {
        k: 2,
        ell: 0,
        t_final: 0.5,
        omega: 1.0,
        params: PhysicalParams::default(),
    };
    let study = spatial_study(&s, &H_LEVELS, 16).expect("spatial study");
    let (rc, ru) = (study.combined_eoc(), study.u_l2_eoc());
    let (dc, du) = study.tau_halving_change();
    audits.extend(study.rows.iter().map(|r| r.mass_audit));
    audits.push(study.halved.mass_audit);
    let ok = all_at_least(&rc, 0.8) && all_at_least(&ru, 1.8) && dc < 0.05 && du < 0.05;
    (
        ok,
        format!(
            "combined EOC=[{}] (need >= 0.8), u L2 EOC=[{}] (need >= 1.8), tau halving change {dc:.2e}/{du:.2e} (need < 5%)",
            rates(&rc),
            rates(&ru)
        ),
    )
}

fn criterion6(audits: &[f64]) -> (bool, String) {
    let worst = audits.iter().cloned().fold(0.0, f64::max);
    let mesh = Arc::new(Mesh::unit_square(4).unwrap());
    let params = PhysicalParams::default();
    let disc = Arc::new(Discretization::with_degrees(mesh, 2, 0, params).unwrap());
    let mms = default_mms(params, 1.0);
    let sources = mms.sources();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(SEED);
    let init = random_state(&disc, &mut rng);
    let traj = march(disc.clone(), 1, TimeGrid::new(0.5, 4).unwrap(), init, &sources).unwrap();
    let neg = mass_conservation_audit(&disc, &traj, &sources).unwrap().max_relative;
    (
        worst <= 1e-9 && neg > 1e-3,
        format!("max audit over {} runs {worst:.2e} (need <= 1e-9), negative control {neg:.2e} (need > 1e-3)", audits.len()),
    )
}

fn criterion7(audits: &mut Vec<f64>) -> (bool, String) {
    let mut worst = 0.0f64;
    for k in 1..=3 {
        for n in [1, 2, 5] {
            let r = polynomial_exactness(k, 0, 3, n, PhysicalParams::default(), SEED + k as u64).unwrap();
            worst = worst.max(r.max_error());
            audits.push(r.mass_audit);
        }
    }
    let r = polynomial_exactness(2, 1, 2, 3, PhysicalParams { eta: 16.0, ..Default::default() }, SEED).unwrap();
    worst = worst.max(r.max_error());
    audits.push(r.mass_audit);
    (worst <= 1e-9, format!("max error {worst:.2e} over k=1..3, N in {{1,2,5}}, and k=2 ell=1 (need <= 1e-9)"))
}

fn criterion8() -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let status = Command::new(env!("CARGO_BIN_EXE_biot"))
            .args(["--mode", "time-study", "--levels", "2", "--k", "2", "--out"])
            .arg(&out)
            .output()
            .expect("run biot")
            .status;
        (status, std::fs::read(out.join("study_time.csv")).unwrap_or_default())
    };
    let (s1, a) = run("a");
    let (s2, b) = run("b");
    (
        s1.success() && s2.success() && !a.is_empty() && a == b,
        format!("exit {:?}/{:?}, {} bytes, identical: {}", s1.code(), s2.code(), a.len(), a == b),
    )
}

fn main() -> ExitCode {
    let mut outcomes = Vec::new();
    let mut audits = Vec::new();
    let mut documented3 = false;
    let mut timed = |id, title, budget: Duration, f: &mut dyn FnMut() -> (bool, String)| {
        let t = Instant::now();
        let (passed, detail) = f();
        let elapsed = t.elapsed();
        outcomes.push(Outcome {
            id,
            title,
            passed: passed && elapsed < budget,
            detail: format!("{detail}; runtime {:.2}s (budget {}s)", elapsed.as_secs_f64(), budget.as_secs()),
            elapsed,
        });
    };
    timed(1, "quadrature exactness", Duration::from_secs(1), &mut criterion1);
    timed(2, "time-basis identities", Duration::from_secs(5), &mut criterion2);
    timed(3, "projection rates", Duration::from_secs(120), &mut || {
        let (ok, d, doc) = criterion3();
        documented3 = doc;
        (ok, d)
    });
    timed(4, "temporal convergence", Duration::from_secs(180), &mut || criterion4(&mut audits));
    timed(5, "spatial convergence", Duration::from_secs(300), &mut || criterion5(&mut audits));
    timed(7, "cGP exactness", Duration::from_secs(10), &mut || criterion7(&mut audits));
    timed(6, "strong mass conservation", Duration::from_secs(60), &mut || criterion6(&audits));
    timed(8, "determinism", Duration::from_secs(120), &mut criterion8);
    outcomes.sort_by_key(|o| o.id);

    println!();
    for o in &outcomes {
        println!("{} criterion {} ({}): {}", if o.passed { "PASS" } else { "FAIL" }, o.id, o.title, o.detail);
    }
    let total: Duration = outcomes.iter().map(|o| o.elapsed).sum();
    println!("total runtime {:.1}s", total.as_secs_f64());

    let unexpected: Vec<u32> = outcomes
        .iter()
        .filter(|o| if o.id == 3 { o.passed || !documented3 } else { !o.passed })
        .map(|o| o.id)
        .collect();
    if unexpected.is_empty() {
        println!("acceptance: all criteria as expected (criterion 3 fails as documented)");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
