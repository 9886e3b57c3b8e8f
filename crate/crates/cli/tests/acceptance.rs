//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use bcmac::channel::{
    bc_rates_dpc, bc_sinr, mac_rates, mac_sinr, BeamformingSolution, ChannelSet, CovarianceSet, LinearConstraint, Side,
    SinrScheme, SinrTargets, Stream,
};
use bcmac::duality::{mac_to_bc_capacity, mac_to_bc_sinr};
use bcmac::hermitian::{cmatrix_from_real, CMatrix, CVector, HermitianMatrix};
use bcmac::mac::{kkt_residual_wsr, solve_wsr_mac, wsr_gradient, SolverSettings};
use bcmac::oracle::{
    brute_power_balance, brute_sinr_balance, brute_wsr_mac, finite_diff_gradient, sum_power_iwf, GridSpec,
};
use bcmac::orchestrator::{
    balance_sinr_multi, eval_g_wsr, maximize_g_pow, sinr_ratios, solve_nonlinear_constraint, OuterSettings,
    QuadraticBall,
};
use bcmac::Complex;
use bcmac_cli::run::{run_region, RegionPoint};
use bcmac_cli::ScenarioConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn crand(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix<f64> {
    CMatrix::from_fn(r, c, |_, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn rrand(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix<f64> {
    CMatrix::from_fn(r, c, |_, _| Complex::new(rng.gen_range(-1.0..1.0), 0.0))
}

fn rand_psd(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix<f64> {
    let g = crand(rng, n, n);
    HermitianMatrix::from_hermitian_part(&g * g.adjoint())
}

fn rand_pd(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix<f64> {
    rand_psd(rng, n).add(&HermitianMatrix::identity(n).scale(0.1))
}

fn real_pd(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix<f64> {
    let g = rrand(rng, n, n);
    HermitianMatrix::from_hermitian_part(&g * g.adjoint()).add(&HermitianMatrix::identity(n).scale(0.2))
}

fn rotated_order(k: usize, r: usize) -> Vec<usize> {
    let mut o: Vec<usize> = (0..k).collect();
    o.rotate_left(r % k);
    o
}

fn miso_bf(ch: &ChannelSet<f64>, q: &[f64]) -> BeamformingSolution<f64> {
    let streams = ch
        .encoding_order()
        .iter()
        .map(|&user| Stream {
            user,
            u: CVector::from_fn(ch.nt(), |i, _| Complex::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)),
            v: CVector::from_element(1, Complex::new(1.0, 0.0)),
            p: 0.0,
            q: q[user],
        })
        .collect();
    BeamformingSolution::new(ch, streams).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn real(rows: &[[f64; 2]]) -> CMatrix<f64> {
    cmatrix_from_real(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn per_antenna(p: &[f64]) -> Vec<LinearConstraint<f64>> {
    p.iter().enumerate().map(|(j, &b)| LinearConstraint::per_antenna(p.len(), j, b).unwrap()).collect()
}

fn workspace_root() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR")).parent().unwrap().parent().unwrap()
}

fn load_config(name: &str) -> ScenarioConfig {
    ScenarioConfig::load(&workspace_root().join("configs").join(name)).unwrap()
}

// 1: MAC -> BC capacity transform keeps every rate and the constraint.
fn duality_equality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst_gap, mut worst_excess) = (0.0f64, f64::NEG_INFINITY);
    for case in 0..200 {
        let k = 1 + case % 3;
        let nt = 1 + (case / 3) % 3;
        let nr = 1 + (case / 9) % 3;
        let sig: Vec<f64> = (0..k).map(|_| rng.gen_range(0.3..2.0)).collect();
        let ch = ChannelSet::new((0..k).map(|_| crand(&mut rng, nr, nt)).collect(), sig)
            .unwrap()
            .with_encoding_order(rotated_order(k, case / 27))
            .unwrap();
        let a = rand_pd(&mut rng, nt);
        let budget = rng.gen_range(0.5..20.0);
        let raw = CovarianceSet::new(Side::Mac, (0..k).map(|_| rand_psd(&mut rng, nr)).collect()).unwrap();
        let mac = raw.scaled(budget / raw.weighted_trace(ch.noise_powers()));
        let bc = mac_to_bc_capacity(&ch, &mac, &a).map_err(|e| format!("case {case}: {e}"))?;
        let r_mac = mac_rates(&ch, &mac, &a).unwrap();
        let r_bc = bc_rates_dpc(&ch, &bc).unwrap();
        for (x, y) in r_mac.iter().zip(&r_bc) {
            worst_gap = worst_gap.max((x - y).abs());
        }
        worst_excess = worst_excess.max(bc.total().inner(&a) - budget);
    }
    check(
        worst_gap <= 1e-7 && worst_excess <= 1e-8,
        format!("200 instances, max rate gap {worst_gap:.2e} nats, max tr(QA) - P {worst_excess:.2e}"),
    )
}

// 2: SINR-preserving transform and the weighted power identity.
fn sinr_transform() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut worst_sinr, mut worst_power) = (0.0f64, 0.0f64);
    for case in 0..200 {
        let k = 1 + case % 3;
        let nt = 1 + (case / 3) % 4;
        let sig: Vec<f64> = (0..k).map(|_| rng.gen_range(0.3..2.0)).collect();
        let ch = ChannelSet::new((0..k).map(|_| crand(&mut rng, 1, nt)).collect(), sig)
            .unwrap()
            .with_encoding_order(rotated_order(k, case / 12))
            .unwrap();
        let a = rand_pd(&mut rng, nt);
        let q: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..3.0)).collect();
        let out = mac_to_bc_sinr(&ch, &miso_bf(&ch, &q), &a).map_err(|e| format!("case {case}: {e}"))?;
        let up = mac_sinr(&ch, &out, &a).unwrap();
        let down = bc_sinr(&ch, &out, SinrScheme::Dpc).unwrap();
        for (x, y) in up.iter().zip(&down) {
            worst_sinr = worst_sinr.max((x - y).abs());
        }
        worst_power = worst_power.max((out.bc_weighted_power(&a) - out.mac_weighted_power(&ch)).abs());
    }
    check(
        worst_sinr <= 1e-8 && worst_power <= 1e-8,
        format!("200 instances, max SINR gap {worst_sinr:.2e}, max power identity error {worst_power:.2e}"),
    )
}

// 3: with A = I and unit noise, solver + transform reproduce sum-power iterative water-filling.
fn conventional_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let k = 2 + case % 2;
        let nt = k + (case / 2) % 2;
        let ch = ChannelSet::with_unit_noise((0..k).map(|_| crand(&mut rng, 1, nt)).collect()).unwrap();
        let budget = rng.gen_range(1.0..20.0);
        let id = HermitianMatrix::identity(nt);
        let w = vec![1.0; k];
        let sol = solve_wsr_mac(&ch, &id, budget, &w, &SolverSettings::default()).map_err(|e| e.to_string())?;
        let bc = mac_to_bc_capacity(&ch, &sol.cov, &id).map_err(|e| e.to_string())?;
        let ours = bc_rates_dpc(&ch, &bc).unwrap();
        let iwf = sum_power_iwf(&ch, budget, 3000).map_err(|e| e.to_string())?;
        let theirs = mac_rates(&ch, &iwf, &id).unwrap();
        for (x, y) in ours.iter().zip(&theirs) {
            worst = worst.max((x - y).abs());
        }
    }
    check(worst <= 1e-6, format!("50 instances, max per-user rate gap {worst:.2e} nats"))
}

// 4: inner solver against the grid oracle, KKT residual and gradient check.
fn inner_solver() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let set = SolverSettings { tol: 1e-9, ..SolverSettings::default() };
    let grid = GridSpec::new(11, 12, 2.0).unwrap();
    let (mut worst_gap, mut worst_kkt, mut worst_grad) = (0.0f64, 0.0f64, 0.0f64);
    let mut below = 0.0f64;
    for case in 0..20 {
        let sig = vec![rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5)];
        let mut w = [rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)];
        if case % 2 == 1 {
            w.swap(0, 1);
        }
        let order = if w[0] >= w[1] { vec![0, 1] } else { vec![1, 0] };
        let ch = ChannelSet::new(vec![rrand(&mut rng, 2, 2), rrand(&mut rng, 2, 2)], sig)
            .unwrap()
            .with_encoding_order(order)
            .unwrap();
        let a = real_pd(&mut rng, 2);
        let budget = rng.gen_range(1.0..10.0);
        let sol = solve_wsr_mac(&ch, &a, budget, &w, &set).map_err(|e| e.to_string())?;
        let brute = brute_wsr_mac(&ch, &a, budget, &w, &grid).map_err(|e| e.to_string())?;
        worst_gap = worst_gap.max((sol.objective - brute).abs());
        below = below.max(brute - sol.objective);
        worst_kkt = worst_kkt.max(kkt_residual_wsr(&ch, &a, budget, &w, &sol.cov).unwrap());

        let q: Vec<HermitianMatrix<f64>> = (0..2).map(|_| rand_pd(&mut rng, 2)).collect();
        let cov = CovarianceSet::new(Side::Mac, q.clone()).unwrap();
        let g = wsr_gradient(&ch, &a, &w, &cov).unwrap();
        for u in 0..2 {
            let f = |x: &HermitianMatrix<f64>| {
                let mut qs = q.clone();
                qs[u] = x.clone();
                let r = mac_rates(&ch, &CovarianceSet::new(Side::Mac, qs).unwrap(), &a).unwrap();
                w[0] * r[0] + w[1] * r[1]
            };
            let fd = finite_diff_gradient(f, &q[u], 1e-5).unwrap();
            worst_grad = worst_grad.max(fd.sub(&g[u]).norm_fro() / g[u].norm_fro());
        }
    }
    check(
        worst_gap <= 1e-3 && worst_kkt <= 10.0 * set.tol && worst_grad <= 1e-5,
        format!(
            "20 instances, max |solver - grid| {worst_gap:.2e} nats (grid above solver by at most {below:.1e}), \
             max KKT residual {worst_kkt:.2e}, max gradient error {worst_grad:.2e} relative"
        ),
    )
}

fn support(points: &[RegionPoint], w: [f64; 2]) -> f64 {
    points.iter().map(|p| w[0] * p.rates_bits[0] + w[1] * p.rates_bits[1]).fold(f64::NEG_INFINITY, f64::max)
}

// 5: per-antenna and mixed regions inside the sum-power region; redundant constraint gets no weight.
fn outer_loop_regions() -> Outcome {
    let sum = run_region(&load_config("sum_power_10.toml")).map_err(|e| e.to_string())?;
    let pa = run_region(&load_config("per_antenna_5.toml")).map_err(|e| e.to_string())?;
    let mixed = run_region(&load_config("mixed_8_5.toml")).map_err(|e| e.to_string())?;
    if sum.points.len() != 21 || pa.points.len() != 21 || mixed.points.len() != 21 {
        return Err("expected 21 swept weights per region".into());
    }
    let mut worst = f64::NEG_INFINITY;
    for p in &sum.points {
        let w = p.weights;
        let s = support(&sum.points, w);
        let a = support(&pa.points, w);
        let m = support(&mixed.points, w);
        worst = worst.max(a - s).max(m - s).max(m - a);
    }

    let mut cfg = load_config("per_antenna_5.toml");
    cfg.constraints.push(bcmac_cli::config::ConstraintSpec::SumPower { budget: 11.0 });
    cfg.sweep.resolution = 4;
    cfg.sweep.heuristic_sum_power = None;
    let red = run_region(&cfg).map_err(|e| e.to_string())?;
    let lam = red.points.iter().map(|p| p.lambda[2]).fold(0.0f64, f64::max);
    check(
        worst <= 1e-4 && lam < 1e-3,
        format!("21 weights, max support excess {worst:.2e} bits, redundant sum-power weight {lam:.2e}"),
    )
}

// 6: subgradient inequality and scale invariance of g.
fn subgradient() -> Outcome {
    let ch =
        ChannelSet::with_unit_noise(vec![real(&[[1.0, 0.0], [0.2, 0.6]]), real(&[[0.5, 0.0], [0.2, 1.0]])]).unwrap();
    let cons = per_antenna(&[5.0, 5.0]);
    let set = OuterSettings::default();
    let w = [1.0, 1.0];
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut worst, mut worst_simplex, mut worst_scale) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    for _ in 0..100 {
        let x: f64 = rng.gen_range(0.01..0.99);
        let y: f64 = rng.gen_range(0.01..0.99);
        let (l, l2) = ([x, 1.0 - x], [y, 1.0 - y]);
        let e = eval_g_wsr(&ch, &cons, &l, &w, &set).map_err(|e| e.to_string())?;
        let e2 = eval_g_wsr(&ch, &cons, &l2, &w, &set).map_err(|e| e.to_string())?;
        // the same points at the scale where they are the Lagrange multipliers
        let nu: Vec<f64> = l.iter().map(|v| v * e.multiplier).collect();
        let nu2: Vec<f64> = l2.iter().map(|v| v * e2.multiplier).collect();
        let lin: f64 = (0..2).map(|i| e.subgradient[i] * (nu2[i] - nu[i])).sum();
        worst = worst.min(e2.g - e.g - lin);
        let lin_simplex: f64 = (0..2).map(|i| e.subgradient[i] * (l2[i] - l[i])).sum();
        worst_simplex = worst_simplex.min(e2.g - e.g - lin_simplex);
        let doubled = eval_g_wsr(&ch, &cons, &[2.0 * l[0], 2.0 * l[1]], &w, &set).map_err(|e| e.to_string())?;
        worst_scale = worst_scale.max((doubled.g - e.g).abs());
    }
    check(
        worst >= -1e-5 && worst_scale <= 1e-6,
        format!(
            "100 pairs, min margin {worst:.2e} with multipliers at Lagrange scale \
             (unit-simplex scale margin {worst_simplex:.2e}), max |g(l) - g(2l)| {worst_scale:.2e}"
        ),
    )
}

// 7: cutting planes for a quadratic constraint.
fn cutting_plane() -> Outcome {
    let ch =
        ChannelSet::with_unit_noise(vec![real(&[[2.0, 0.0], [0.5, 0.6]]), real(&[[0.3, 0.2], [0.0, 1.5]])]).unwrap();
    let a = vec![HermitianMatrix::from_diagonal(&[1.0, 0.0]), HermitianMatrix::from_diagonal(&[0.0, 1.0])];
    let ball = QuadraticBall::new(a.clone(), 100.0).unwrap();
    let sol = solve_nonlinear_constraint(&ch, &ball, &[1.0, 1.0], 1e-2, &OuterSettings::default())
        .map_err(|e| e.to_string())?;
    let total = sol.q_bc.total();
    let p: Vec<f64> = a.iter().map(|m| total.inner(m)).collect();
    let dev = (p[0] * p[0] + p[1] * p[1] - 100.0).abs();
    let monotone = sol.rate_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let cuts = sol.rate_trace.len();
    check(
        monotone && dev <= 1e-3 * 100.0 && cuts <= 30,
        format!("{cuts} cuts, rate trace nonincreasing: {monotone}, |sum p^2 - 100| = {dev:.2e}"),
    )
}

// 8: SINR balancing with per-antenna constraints.
fn sinr_balancing() -> Outcome {
    let ch = ChannelSet::with_unit_noise(vec![real(&[[1.0, 0.0]]), real(&[[0.4, 0.0]])]).unwrap();
    let cons = per_antenna(&[5.0, 5.0]);
    let targets = SinrTargets::uniform(2, 1.0).unwrap();
    let sol = balance_sinr_multi(&ch, &cons, &targets, &OuterSettings::default()).map_err(|e| e.to_string())?;
    let trace = sol.trace.accepted_values();
    let monotone = trace.windows(2).all(|w| w[1] <= w[0]);
    let ratios = sinr_ratios(&ch, &sol.bf_bc, &targets).unwrap();
    let spread = ratios.iter().fold(0.0f64, |m, r| m.max((r - ratios[0]).abs()));
    let feasible = sol.values.iter().zip(&cons).all(|(t, c)| *t <= c.budget() * (1.0 + 1e-12));
    let oracle =
        brute_sinr_balance(&ch, &cons, &targets, &GridSpec::new(41, 20, 2.0).unwrap()).map_err(|e| e.to_string())?;
    let gap = (sol.alpha - oracle).abs();
    check(
        monotone && spread <= 1e-4 && feasible && gap <= 1e-3,
        format!(
            "alpha {:.6} vs grid {oracle:.6}, {} outer steps, trace nonincreasing: {monotone}, ratio spread {spread:.1e}, \
             antenna powers {:.4}/{:.4}",
            sol.alpha,
            trace.len(),
            sol.values[0],
            sol.values[1]
        ),
    )
}

// 9: power balancing against the beam-grid oracle, plus complementarity.
fn power_balancing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let (mut worst_gap, mut worst_comp) = (0.0f64, 0.0f64);
    let grid = GridSpec::new(41, 20, 2.0).unwrap();
    for case in 0..20 {
        let ch = ChannelSet::new(
            vec![rrand(&mut rng, 1, 2), rrand(&mut rng, 1, 2)],
            vec![rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5)],
        )
        .unwrap()
        .with_encoding_order(rotated_order(2, case))
        .unwrap();
        let cons = per_antenna(&[rng.gen_range(2.0..10.0), rng.gen_range(2.0..10.0)]);
        let targets = SinrTargets::new(vec![rng.gen_range(0.3..2.0), rng.gen_range(0.3..2.0)]).unwrap();
        let sol =
            maximize_g_pow(&ch, &cons, &targets, &OuterSettings::default()).map_err(|e| format!("case {case}: {e}"))?;
        let oracle = brute_power_balance(&ch, &cons, &targets, &grid).map_err(|e| e.to_string())?;
        worst_gap = worst_gap.max((sol.alpha - oracle).abs());
        for ((l, t), c) in sol.lambda.as_slice().iter().zip(&sol.values).zip(&cons) {
            worst_comp = worst_comp.max((l * (t - sol.alpha * c.budget())).abs());
        }
    }
    check(
        worst_gap <= 1e-3 && worst_comp <= 1e-5,
        format!("20 instances, max |alpha - grid| {worst_gap:.2e}, max complementarity {worst_comp:.2e}"),
    )
}

// 10: identical CSV across two runs of the region subcommand.
fn determinism() -> Outcome {
    let cfg = workspace_root().join("configs").join("mixed_8_5.toml");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut outputs = Vec::new();
    for d in &dirs {
        let status = Command::new(env!("CARGO_BIN_EXE_bcmac"))
            .args(["region", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(d.path())
            .args(["--seed", "7"])
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("region exited with {}", status.status));
        }
        outputs.push(std::fs::read(d.path().join("mixed_8_5.csv")).map_err(|e| e.to_string())?);
    }
    check(
        outputs[0] == outputs[1] && !outputs[0].is_empty(),
        format!("two runs, {} CSV bytes each, identical: {}", outputs[0].len(), outputs[0] == outputs[1]),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("duality equality", duality_equality),
        ("SINR transform", sinr_transform),
        ("conventional-duality reduction", conventional_reduction),
        ("inner solver optimality", inner_solver),
        ("outer loop regions", outer_loop_regions),
        ("subgradient correctness", subgradient),
        ("nonlinear cutting plane", cutting_plane),
        ("SINR balancing", sinr_balancing),
        ("power balancing", power_balancing),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = f();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("PASS criterion {:>2} ({name}): {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {:>2} ({name}): {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
