//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

use std::time::{Duration, Instant};

use phasefront_core::analysis::{
    front_position, run_cell_with_trajectory, state_distance, CompareConfig,
};
use phasefront_core::pde_sim::{init_from_profile, init_random, run, step, SimParams};
use phasefront_core::potential::diagnostics;
use phasefront_core::profile::{
    decay_rates, residual_3_15, solve_profile, speed_for_forcing, Conservation, DecayKind,
    ProfileError,
};
use phasefront_core::tensor_reduction::{
    check_a1, check_a2, displacement_gradient, jump_w, reduce, stress_from_displacement_gradient,
    ElasticSystem, ElasticityTensor, SymMatrix, RESIDUAL_TOL,
};
use phasefront_core::{DoubleWell, ModelKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn tanh_error(p: &phasefront_core::WaveProfile) -> f64 {
    p.xi
        .iter()
        .zip(&p.v)
        .filter(|(x, _)| x.abs() <= 10.0)
        .map(|(&x, &v)| (v - (x / 2f64.sqrt()).tanh()).abs())
        .fold(0.0, f64::max)
}

fn c1_profile_oracle() -> Outcome {
    let w = DoubleWell::quartic();
    let start = Instant::now();
    let p = solve_profile(&w, 10.0, 1e-3, Conservation::Nonconserved).unwrap();
    let elapsed = start.elapsed();
    let err = tanh_error(&p);
    Outcome {
        id: 1,
        title: "analytic profile oracle",
        pass: err <= 1e-6 && elapsed < Duration::from_secs(1),
        detail: format!("max|v - tanh(xi/sqrt2)| = {err:.3e} (tol 1e-6), {elapsed:.2?} (limit 1 s)"),
    }
}

fn c2_ode_residual() -> Outcome {
    let w = DoubleWell::quartic();
    let r1 = residual_3_15(&solve_profile(&w, 10.0, 1e-3, Conservation::Nonconserved).unwrap(), &w);
    let r2 = residual_3_15(&solve_profile(&w, 10.0, 5e-4, Conservation::Nonconserved).unwrap(), &w);
    let ratio = r1 / r2;
    Outcome {
        id: 2,
        title: "first-integral residual",
        pass: r1 <= 1e-8 && ratio >= 12.0,
        detail: format!("residual {r1:.3e} at dx=1e-3 (tol 1e-8), {r2:.3e} at dx=5e-4, ratio {ratio:.1} (need >= 12)"),
    }
}

fn standard_config() -> CompareConfig {
    CompareConfig::standard(DoubleWell::quartic())
}

fn c3_and_c5(cfg: &CompareConfig) -> (Outcome, Outcome) {
    let start = Instant::now();
    let (mod02, _) = run_cell_with_trajectory(cfg, ModelKind::ModifiedAC, 0.2).unwrap();
    let elapsed = start.elapsed();
    let s = mod02.s_measured.unwrap_or(f64::NAN);
    let rel = ((s + 0.2) / 0.2).abs();
    let c3 = Outcome {
        id: 3,
        title: "speed law",
        pass: rel <= 0.02 && elapsed < Duration::from_secs(60),
        detail: format!("s = {s:.6} vs -0.2, rel err {rel:.2e} (tol 2e-2), {elapsed:.1?} (limit 60 s)"),
    };

    let (cls02, _) = run_cell_with_trajectory(cfg, ModelKind::ClassicAC, 0.2).unwrap();
    let (mod0, tm) = run_cell_with_trajectory(cfg, ModelKind::ModifiedAC, 0.0).unwrap();
    let (cls0, tc) = run_cell_with_trajectory(cfg, ModelKind::ClassicAC, 0.0).unwrap();
    let drift_rel = ((cls02.tail_drift - 0.2) / 0.2).abs();
    let shape = state_distance(&tm.last, &tc.last);
    let pass = drift_rel <= 0.05
        && mod02.tail_drift == 0.0
        && mod02.front_exists
        && mod0.front_exists
        && cls0.front_exists
        && shape.linf <= 1e-3;
    let c5 = Outcome {
        id: 5,
        title: "classic vs modified Allen-Cahn contrast",
        pass,
        detail: format!(
            "mu=0.2: classic drift {:.6} (0.2 +- 5%), modified drift {:e}, modified front {}; \
             mu=0: stationary fronts {}/{}, shape linf {:.2e} (tol 1e-3)",
            cls02.tail_drift,
            mod02.tail_drift,
            mod02.front_exists,
            mod0.front_exists,
            cls0.front_exists,
            shape.linf
        ),
    };
    (c3, c5)
}

fn c4_standing_wave(cfg: &CompareConfig) -> Outcome {
    let w = &cfg.well;
    let p = solve_profile(w, cfg.profile_half_width, cfg.profile_dx, Conservation::Conserved).unwrap();
    let setup = cfg.ch;
    let params = SimParams::new(ModelKind::ModifiedCH, 0.0, setup.l, setup.dx);
    let state = init_from_profile(&p, w, &params).unwrap();
    let traj = run(&state, 10.0, setup.snapshot_every).unwrap();
    let x0 = front_position(&state, w.v_star).unwrap();
    let scale = state.mass_scale();
    let m0 = state.mass();
    let (mut disp, mut mass_drift) = (0.0_f64, 0.0_f64);
    for k in 0..traj.frames.len() {
        let s = traj.state(k);
        disp = disp.max((front_position(&s, w.v_star).unwrap() - x0).abs());
        mass_drift = mass_drift.max((s.mass() - m0).abs());
    }
    let rel = mass_drift / scale;
    Outcome {
        id: 4,
        title: "standing wave (modified Cahn-Hilliard)",
        pass: disp <= setup.dx && rel <= 1e-12,
        detail: format!(
            "max front displacement {disp:.2e} (tol dx = {}), mass drift {rel:.2e} relative to sum|v| (tol 1e-12), {} steps",
            setup.dx, traj.steps
        ),
    }
}

fn c6_decay() -> Outcome {
    let q = DoubleWell::quartic();
    let pq = solve_profile(&q, 20.0, 1e-3, Conservation::Nonconserved).unwrap();
    let (qp, qm) = decay_rates(&pq, &q).unwrap();
    let s = DoubleWell::sextic_m1_2();
    let ps = solve_profile(&s, 100.0, 1e-3, Conservation::Nonconserved).unwrap();
    let (sp, sm) = decay_rates(&ps, &s).unwrap();
    let sqrt2 = 2f64.sqrt();
    let sqrt32 = 32f64.sqrt();
    let pass = qp.kind == DecayKind::Exponential
        && qm.kind == DecayKind::Exponential
        && ((qp.value - sqrt2) / sqrt2).abs() <= 0.05
        && ((qm.value - sqrt2) / sqrt2).abs() <= 0.05
        && sp.kind == DecayKind::Algebraic
        && (sp.value - 1.0).abs() <= 0.10
        && sm.kind == DecayKind::Exponential
        && ((sm.value - sqrt32) / sqrt32).abs() <= 0.05;
    Outcome {
        id: 6,
        title: "decay dichotomy",
        pass,
        detail: format!(
            "quartic rates {:.4}/{:.4} (sqrt2 +- 5%); sextic plus exponent {:.4} (1 +- 10%), minus rate {:.4} (sqrt32 = {sqrt32:.4} +- 5%)",
            qp.value, qm.value, sp.value, sm.value
        ),
    }
}

fn c7_gate() -> Outcome {
    let w = DoubleWell::tilted_quartic(0.1).unwrap();
    let gap = diagnostics(&w, 0.0).gap;
    let mut rejected = 0;
    for model in [Conservation::Nonconserved, Conservation::Conserved] {
        if matches!(speed_for_forcing(0.0, &w, model), Err(ProfileError::UnequalWells { .. })) {
            rejected += 1;
        }
        if matches!(solve_profile(&w, 10.0, 1e-3, model), Err(ProfileError::UnequalWells { .. })) {
            rejected += 1;
        }
    }
    Outcome {
        id: 7,
        title: "existence gate",
        pass: rejected == 4,
        detail: format!("tilted quartic gap {gap:.4}; {rejected}/4 speed/profile calls rejected with UnequalWells"),
    }
}

fn c8_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut a1_max, mut a2_max, mut identity_max, mut jump_max) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=3);
        let d = ElasticityTensor::isotropic(n, rng.gen_range(0.2..2.0), rng.gen_range(0.0..2.0));
        let mut e1 = vec![0.0; n];
        e1[0] = rng.gen_range(-2.0..2.0);
        let mut e0 = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let x = rng.gen_range(-1.0..1.0);
                e0[i * n + j] = x;
                e0[j * n + i] = x;
            }
        }
        let system = ElasticSystem::new(d, SymMatrix::from_row_major(n, e0).unwrap(), SymMatrix::diag(&e1)).unwrap();
        a1_max = check_a1(&system).iter().fold(a1_max, |m, r| m.max(r.abs()));
        a2_max = a2_max.max(check_a2(&system).abs());
        let c = reduce(&system).unwrap();
        let t11 = rng.gen_range(-2.0..2.0);
        let v = rng.gen_range(-2.0..2.0);
        let w = displacement_gradient(&system, t11, v).unwrap();
        let full = stress_from_displacement_gradient(&system, w, v).contract(&system.eps1);
        identity_max = identity_max.max((full - (c.alpha * t11 + c.beta)).abs());
        let (vm, vp) = (rng.gen_range(-2.0..0.0), rng.gen_range(0.0..2.0));
        let diff = displacement_gradient(&system, t11, vp).unwrap()
            - displacement_gradient(&system, t11, vm).unwrap();
        jump_max = jump_max.max((jump_w(&system, vm, vp).unwrap() - diff).abs());
    }
    Outcome {
        id: 8,
        title: "reduction identities",
        pass: a1_max <= RESIDUAL_TOL && a2_max <= RESIDUAL_TOL && identity_max <= 1e-12 && jump_max <= 1e-14,
        detail: format!(
            "1000 systems: max A1 {a1_max:.1e}, max A2 {a2_max:.1e}, reduced vs full {identity_max:.1e} (tol 1e-12), jump mismatch {jump_max:.1e} (rounding)"
        ),
    }
}

fn c9_dissipation() -> Outcome {
    let w = DoubleWell::quartic();
    let mut worst_rise = f64::NEG_INFINITY;
    for model in ModelKind::ALL {
        for seed in 0..10 {
            let params = SimParams::new(model, 0.2, 2.0, 0.1);
            let mut s = init_random(&w, &params, seed, 0.4).unwrap();
            let mut e = s.energy();
            for _ in 0..500 {
                s.dt = 0.5 * s.stability_bound();
                s = step(&s).unwrap();
                let e1 = s.energy();
                worst_rise = worst_rise.max(e1 - e);
                e = e1;
            }
        }
    }
    let mut worst_mass = 0.0_f64;
    let mut steps = 0;
    for model in [ModelKind::ModifiedCH, ModelKind::ClassicCH] {
        let params = SimParams::new(model, 0.0, 2.0, 0.1);
        let s = init_random(&w, &params, 99, 0.4).unwrap();
        let m0 = s.mass();
        let t_end = 100_000.0 * s.dt;
        let traj = run(&s, t_end, 1000.0 * s.dt).unwrap();
        steps = traj.steps;
        for k in 0..traj.frames.len() {
            let drift = (traj.state(k).mass() - m0).abs() / (1e-12 * m0.abs() + 1e-14);
            worst_mass = worst_mass.max(drift);
        }
    }
    Outcome {
        id: 9,
        title: "dissipation and conservation",
        pass: worst_rise <= 1e-8 && worst_mass <= 1.0,
        detail: format!(
            "largest per-step energy change {worst_rise:.2e} over 4 models x 10 seeds x 500 steps (tol +1e-8); \
             CH mass drift {worst_mass:.2e} of allowance 1e-12|m0|+1e-14 over {steps} steps"
        ),
    }
}

fn main() {
    let cfg = standard_config();
    let mut outcomes = vec![c1_profile_oracle(), c2_ode_residual()];
    let (c3, c5) = c3_and_c5(&cfg);
    outcomes.push(c3);
    outcomes.push(c4_standing_wave(&cfg));
    outcomes.push(c5);
    outcomes.push(c6_decay());
    outcomes.push(c7_gate());
    outcomes.push(c8_reduction());
    outcomes.push(c9_dissipation());

    for o in &outcomes {
        println!(
            "criterion {} {}: {}: {}",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.title,
            o.detail
        );
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
