//! Acceptance criteria, one verdict line each. Runs without the libtest
//! harness so every line is printed; the process fails if any criterion does.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};

use predift::bounds::{log_derivative_sup_with, LogDerivativeSup, Route, TAU_FD_STEP};
use predift::diff::{self, Algorithm, DiffState, GainConfig};
use predift::experiment::{certify_config, ExperimentConfig};
use predift::sim::{
    default_tau_max, eps_mismatch, euler_simulate, settling_time, tau_oracle, OracleRun, SimConfig, Trace,
    DEFAULT_DTAU,
};
use predift::Exec;
use predift_acceptance::{load_bundled, Criterion};

const BAND: f64 = 1e-2;

struct Setup {
    cfg: ExperimentConfig,
    signal: predift::SignalSpec,
    gc: GainConfig,
}

fn setup(name: &str) -> Setup {
    let cfg = load_bundled(name);
    let signal = cfg.signal_spec().unwrap();
    let gc = cfg.gain_config().unwrap();
    Setup { cfg, signal, gc }
}

impl Setup {
    fn run(&self, alg: Algorithm, ic: DiffState) -> predift::Result<Trace> {
        euler_simulate(alg, &self.signal, &self.gc, &self.cfg.sim_config(ic))
    }

    fn run_with(&self, alg: Algorithm, sc: &SimConfig) -> predift::Result<Trace> {
        euler_simulate(alg, &self.signal, &self.gc, sc)
    }

    fn tc(&self) -> f64 {
        self.cfg.tbg.tc
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| format!("{x:.4}"))
}

fn settle(res: &predift::Result<Trace>) -> (Option<f64>, String) {
    match res {
        Ok(tr) => {
            let ts = settling_time(tr);
            (ts, fmt_opt(ts))
        }
        Err(predift::Error::Diverged { at, .. }) => (None, format!("diverged at t = {at:.4}")),
        Err(e) => (None, format!("error: {e}")),
    }
}

fn example1_reproduction() -> Criterion {
    let mut c = Criterion::new(1, "Example 1: settling < Tc and post-deadline |e1| <= 1e-2");
    let s = setup("example1.cfg");
    let start = Instant::now();
    for &ic in &s.cfg.ics {
        let res = s.run(Algorithm::Predefined, ic);
        let (ts, shown) = settle(&res);
        c.check(ts.is_some_and(|t| t < s.tc()), format!("ic {}: settling {shown}, required < {}", ic.z0, s.tc()));
        if let Ok(tr) = &res {
            let post = tr.max_errors(s.cfg.tbg.deadline(), s.cfg.horizon).0;
            c.check(post <= BAND, format!("ic {}: max |e1| on [Tc, 3] = {post:.3e} <= {BAND}", ic.z0));
        }
    }
    let wall = start.elapsed().as_secs_f64();
    c.check(wall < 5.0, format!("wall time {wall:.3} s < 5 s"));
    c
}

fn example2_reproduction() -> Criterion {
    let mut c = Criterion::new(
        2,
        "Example 2: ours < Tc, fixed-time baseline < 0.5 s, smaller slack for ours at ic 1e4",
    );
    let s = setup("example2.cfg");
    let mut last = (None, None);
    for &ic in &s.cfg.ics {
        let (ours, ours_s) = settle(&s.run(Algorithm::Predefined, ic));
        c.check(ours.is_some_and(|t| t < s.tc()), format!("predefined ic {}: settling {ours_s}, required < {}", ic.z0, s.tc()));
        let (base, base_s) = settle(&s.run(Algorithm::Seeber, ic));
        c.check(base.is_some_and(|t| t < 0.5), format!("seeber ic {}: settling {base_s}, required < 0.5", ic.z0));
        last = (ours, base);
    }
    let slack = |t: Option<f64>| t.map(|t| s.tc() - t);
    let (so, sb) = (slack(last.0), slack(last.1));
    c.check(
        matches!((so, sb), (Some(a), Some(b)) if a < b),
        format!("ic 1e4: slack ours {} < slack baseline {}", fmt_opt(so), fmt_opt(sb)),
    );
    // Where the baseline's explicit Euler run stops diverging.
    let ic = *s.cfg.ics.last().unwrap();
    for dt in [1e-4, 5e-5] {
        let sc = SimConfig {
            dt,
            ..s.cfg.sim_config(ic)
        };
        let (_, shown) = settle(&s.run_with(Algorithm::Seeber, &sc));
        c.note(format!("seeber ic {} at dt = {dt:e}: settling {shown}", ic.z0));
    }
    c
}

fn example3_reproduction() -> Criterion {
    let mut c = Criterion::new(3, "Example 3: settling < Tc for every ic");
    let s = setup("example3.cfg");
    for &ic in &s.cfg.ics {
        let (ts, shown) = settle(&s.run(Algorithm::Predefined, ic));
        c.check(ts.is_some_and(|t| t < s.tc()), format!("ic {}: settling {shown}, required < {}", ic.z0, s.tc()));
    }
    c
}

fn sup(s: &Setup, route: Route) -> LogDerivativeSup {
    let tau_max = default_tau_max(&s.cfg.tbg, s.cfg.dt).unwrap();
    log_derivative_sup_with(s.gc.transformed(), tau_max, s.cfg.grid, route, Exec::default()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn bound_analytics() -> Criterion {
    let mut c = Criterion::new(4, "bound analytics: grid sup of (1/Lt)|dLt/dtau| matches the closed forms");
    let routes = [
        (Route::Chain, 1e-6, "analytic"),
        (Route::Central { step: TAU_FD_STEP }, 1e-4, "finite difference"),
    ];

    let s1 = setup("example1.cfg");
    let (alpha, tc) = (s1.cfg.tbg.alpha, s1.cfg.tbg.tc);
    // alpha (Tc exp(-alpha tau) + 2) is decreasing; its maximum is at tau = 0.
    let closed1 = alpha * (tc + 2.0);
    for (route, tol, label) in routes {
        let got = sup(&s1, route);
        c.check(
            rel(got.sup, closed1) <= tol,
            format!(
                "example 1 ({label}): sup {:.10} vs {closed1:.10} at tau = 0, rel err {:.2e} <= {tol:e}",
                got.sup,
                rel(got.sup, closed1)
            ),
        );
    }

    let s3 = setup("example3.cfg");
    let alpha = s3.cfg.tbg.alpha;
    let beta = s3.cfg.beta.unwrap();
    let closed3 = 2.0 * alpha / (-beta + (beta * (2.0 + beta)).sqrt());
    let tau3 = (1.0 + (beta / (2.0 + beta)).sqrt()).ln();
    for (route, tol, label) in routes {
        let got = sup(&s3, route);
        c.check(
            rel(got.sup, closed3) <= tol,
            format!(
                "example 3 ({label}): sup {:.10} at tau = {:.4} vs {closed3:.10} at tau = {tau3:.4}, rel err {:.2e} <= {tol:e}",
                got.sup,
                got.argmax,
                rel(got.sup, closed3)
            ),
        );
    }
    let split = sup(&s3, Route::Split);
    c.note(format!(
        "example 3 split bound |L'/L|/kappa + 2 alpha peaks at {:.10} at tau = {:.4} (alpha tau = {:.4})",
        split.sup,
        split.argmax,
        alpha * split.argmax
    ));
    c.note(format!(
        "example 3 true log-derivative peaks at 2 alpha = {:.4}, below script M = {:.4}",
        2.0 * alpha,
        s3.cfg.script_m
    ));
    c
}

/// `max |eps_fine - eps_coarse|` at the coarse run's sample points.
fn oracle_gap(coarse: &OracleRun, fine: &OracleRun) -> f64 {
    coarse
        .samples
        .iter()
        .filter_map(|o| {
            let (f1, f2) = fine.eps_at(o.tau)?;
            Some((o.eps1 - f1).abs().max((o.eps2 - f2).abs()))
        })
        .fold(0.0, f64::max)
}

fn oracle_equivalence() -> Criterion {
    let mut c = Criterion::new(5, "transformed-time oracle matches the t-domain run (sup 1e-2, settling 2%)");
    let s = setup("example1.cfg");
    let ic = s.cfg.ics[0];
    let tr = s.run(Algorithm::Predefined, ic).unwrap();
    let tau_max = default_tau_max(&s.cfg.tbg, s.cfg.dt).unwrap();
    let run = tau_oracle(&s.signal, &s.gc, ic, tau_max, DEFAULT_DTAU).unwrap();
    let m = eps_mismatch(&tr, &run, &s.gc).unwrap();
    c.check(
        m.sup <= 1e-2,
        format!(
            "sup |eps_t - eps_oracle| = {:.4} (eps1 {:.4}, eps2 {:.4}) at t = {:.4} over {} samples <= 1e-2",
            m.sup, m.sup_eps1, m.sup_eps2, m.at, m.compared
        ),
    );
    let measured = settling_time(&tr);
    let predicted = run
        .settling_tau
        .map(|tau| s.cfg.tbg.tc * (1.0 - (-s.cfg.tbg.alpha * tau).exp()));
    let ok = matches!((measured, predicted), (Some(a), Some(b)) if rel(a - s.cfg.tbg.t0, b) <= 0.02);
    c.check(
        ok,
        format!(
            "settling {} vs Tc (1 - exp(-alpha T_tau)) = {} (T_tau = {}), within 2%",
            fmt_opt(measured),
            fmt_opt(predicted),
            fmt_opt(run.settling_tau)
        ),
    );
    c.check(run.delta_violations == 0, format!("|delta| <= Lt at every oracle step ({} violations)", run.delta_violations));

    let fine = tau_oracle(&s.signal, &s.gc, ic, tau_max, 1e-5).unwrap();
    let t_err = eps_mismatch(&tr, &fine, &s.gc).unwrap();
    c.note(format!(
        "against an oracle at dtau = 1e-5: t-domain run off by {:.4}, oracle at dtau = 1e-3 off by {:.4}",
        t_err.sup,
        oracle_gap(&run, &fine)
    ));
    for dtau in [5e-4, 1e-4] {
        let r = tau_oracle(&s.signal, &s.gc, ic, tau_max, dtau).unwrap();
        c.note(format!("sup mismatch with oracle at dtau = {dtau:e}: {:.4}", eps_mismatch(&tr, &r, &s.gc).unwrap().sup));
    }
    c
}

fn gain_cap() -> Criterion {
    let mut c = Criterion::new(6, "gain cap 10: predefined still settles, linear observer only reaches a neighbourhood");
    let s = setup("example1_capped.cfg");
    let deadline = s.cfg.tbg.deadline();
    let ic = s.cfg.ics[0];
    let (ts, shown) = settle(&s.run(Algorithm::Predefined, ic));
    c.check(ts.is_some_and(|t| t < s.tc()), format!("predefined ic {}: settling {shown}, required < {}", ic.z0, s.tc()));
    let residuals: Vec<f64> = s
        .cfg
        .ics
        .iter()
        .map(|&ic| {
            s.run(Algorithm::Holloway, ic)
                .ok()
                .and_then(|tr| tr.at(deadline).map(|r| r.e1.abs()))
                .unwrap_or(f64::NAN)
        })
        .collect();
    let last = *residuals.last().unwrap();
    c.check(last > BAND, format!("holloway ic 1e4: |e1(Tc)| = {last:.4e} > {BAND}"));
    c.check(
        residuals.windows(2).all(|w| w[1] > w[0]),
        format!(
            "holloway |e1(Tc)| increasing over ics: {}",
            residuals.iter().map(|r| format!("{r:.4e}")).collect::<Vec<_>>().join(", ")
        ),
    );
    c
}

fn invariant_suite() -> Criterion {
    let mut c = Criterion::new(7, "invariants: exact trajectories, odd symmetry, TBG round trip, step halving");
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let s = setup("example1.cfg");
    let gc = &s.gc;
    let deadline = s.cfg.tbg.deadline();

    for alg in Algorithm::ALL {
        let mut bad = 0;
        for _ in 0..1000 {
            let st = DiffState::new(rng.gen_range(-1e3..1e3), rng.gen_range(-1e3..1e3));
            let t_end = if alg.needs_cap_past_deadline() { deadline - 1e-6 } else { 3.0 };
            let t = rng.gen_range(s.cfg.tbg.t0..t_end);
            let (d0, d1) = diff::rhs(alg, st, st.z0, t, gc).unwrap();
            if d0 != st.z1 || d1 != 0.0 {
                bad += 1;
            }
        }
        c.check(bad == 0, format!("{alg}: w = 0 gives z0' = z1, z1' = 0 on 1000 random states ({bad} failures)"));
    }

    let ws: Vec<f64> = (-30..=30).map(|k| 10f64.powf(k as f64 / 10.0)).collect();
    let lp = gc.levant;
    let k3 = gc.seeber.k3;
    let times = [0.0, 0.5, 0.99, 1.5];
    let mut bad = 0;
    for &w in &ws {
        let pairs = [
            (diff::phi1(w, 1.3, 0.7, &lp).unwrap(), diff::phi1(-w, 1.3, 0.7, &lp).unwrap()),
            (diff::phi2(w, 1.3, 0.7, &lp).unwrap(), diff::phi2(-w, 1.3, 0.7, &lp).unwrap()),
            (diff::nu1(w, k3), diff::nu1(-w, k3)),
            (diff::nu2(w, k3), diff::nu2(-w, k3)),
        ];
        bad += pairs.iter().filter(|(a, b)| *a != -*b).count();
        for t in times {
            bad += usize::from(diff::h1(w, t, gc).unwrap() != -diff::h1(-w, t, gc).unwrap());
            bad += usize::from(diff::h2(w, t, gc).unwrap() != -diff::h2(-w, t, gc).unwrap());
        }
    }
    c.check(bad == 0, format!("phi1, phi2, nu1, nu2, h1, h2 odd in w on {} grid points ({bad} failures)", ws.len()));

    let mut worst = 0.0f64;
    for name in ["example1.cfg", "example2.cfg"] {
        let tbg = load_bundled(name).tbg;
        let t_last = tbg.deadline() - s.cfg.dt;
        for k in 0..=10_000 {
            let t = tbg.t0 + (t_last - tbg.t0) * k as f64 / 10_000.0;
            worst = worst.max((tbg.inverse(tbg.forward(t).unwrap()).unwrap() - t).abs());
            let tau = tbg.forward(t_last).unwrap() * k as f64 / 10_000.0;
            worst = worst.max((tbg.forward(tbg.inverse(tau).unwrap()).unwrap() - tau).abs());
        }
    }
    c.check(worst <= 1e-9, format!("TBG round trip max error {worst:.2e} <= 1e-9"));

    let s2 = setup("example2.cfg");
    let ic = DiffState::new(100.0, 100.0);
    let sc = s2.cfg.sim_config(ic);
    let (a, _) = settle(&s2.run_with(Algorithm::Predefined, &sc));
    let (b, _) = settle(&s2.run_with(Algorithm::Predefined, &SimConfig { dt: sc.dt / 2.0, ..sc }));
    let ok = matches!((a, b), (Some(a), Some(b)) if rel(b, a) < 0.02);
    c.check(
        ok,
        format!(
            "example 2 ic 100: settling {} at dt = {:e}, {} at dt / 2, change < 2%",
            fmt_opt(a),
            sc.dt,
            fmt_opt(b)
        ),
    );
    c
}

fn validation_gate() -> Criterion {
    let mut c = Criterion::new(8, "validation gate: bundled signals certify, beta = 0.5 with beta = 2 constants does not");
    for name in ["example1.cfg", "example2.cfg", "example3.cfg"] {
        let r = certify_config(&load_bundled(name), Exec::default()).unwrap();
        c.check(r.is_certified(), format!("{name}: {} violations", r.total_violations()));
    }
    let r = certify_config(&load_bundled("example3_beta05.cfg"), Exec::default()).unwrap();
    c.check(
        !r.is_certified() && !r.violations.is_empty(),
        format!(
            "example3_beta05.cfg: {} violations (max |y''|/L = {:.3}, sup (1/L)|dL/dt| = {:.3} vs M = {})",
            r.total_violations(),
            r.max_yddot_ratio,
            r.sup_log_derivative,
            r.m
        ),
    );
    c
}

fn main() -> ExitCode {
    let criteria: [fn() -> Criterion; 8] = [
        example1_reproduction,
        example2_reproduction,
        example3_reproduction,
        bound_analytics,
        oracle_equivalence,
        gain_cap,
        invariant_suite,
        validation_gate,
    ];
    println!();
    println!("acceptance criteria");
    let mut failed = Vec::new();
    for f in criteria {
        let c = f();
        print!("{}", c.render());
        if !c.passed() {
            failed.push(c.id);
        }
    }
    println!();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!(
            "acceptance: {} of {} criteria passed; failed: {:?}",
            criteria.len() - failed.len(),
            criteria.len(),
            failed
        );
        ExitCode::FAILURE
    }
}
