use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use thermolang::hjb::*;
use thermolang::objective::double_well;
use thermolang::simulate::{run, PolicySpec, SimConfig};
use thermolang::truncexp::TemperatureRange;

fn base() -> HjbParams {
    HjbParams {
        rho: 1.25,
        lambda: 0.3125,
        range: TemperatureRange::new(1e-4, 500.0).unwrap(),
        x_min: -8.0,
        x_max: 4.0,
        step: 1e-3,
        n_inits: 20,
        init_seed: 7,
        blowup_threshold: 1e8,
    }
}

fn main() {
    let obj = double_well();
    let paper_init = (-0.2853, 1.1575);

    println!("== survival and profile at three steps on [-8, 4] ==");
    for step in [1e-3, 5e-4, 2.5e-4] {
        let p = HjbParams { step, ..base() };
        match integrate(&obj, &p, paper_init) {
            Ok(s) => println!(
                "step {step}: ok; v(4)={:.3} vx(4)={:.3} vxx(4)={:.3e} h(4)={:.5} temp(-3)={:.2} temp(0)={:.2} temp(-2)={:.2} temp(3.75)={:.4}",
                s.v.last().unwrap(), s.vx.last().unwrap(), s.vxx.last().unwrap(),
                s.eval_h(4.0), s.temperature(-3.0), s.temperature(0.0), s.temperature(-2.0), s.temperature(3.75)
            ),
            Err(e) => println!("step {step}: {e}"),
        }
    }

    println!("== richardson ratios (steps 2e-3 / 1e-3 / 5e-4) at probes ==");
    let s_a = integrate(&obj, &HjbParams { step: 2e-3, ..base() }, paper_init).unwrap();
    let s_b = integrate(&obj, &HjbParams { step: 1e-3, ..base() }, paper_init).unwrap();
    let s_c = integrate(&obj, &HjbParams { step: 5e-4, ..base() }, paper_init).unwrap();
    for x in [-6.0, -3.0, -1.0, 1.0, 2.5, 3.0, 3.5, 3.9] {
        let e1 = (s_a.eval_v(x) - s_b.eval_v(x)).abs();
        let e2 = (s_b.eval_v(x) - s_c.eval_v(x)).abs();
        println!("x={x}: |v_2h-v_h|={e1:.3e} |v_h-v_h/2|={e2:.3e} ratio={:.2}", e1 / e2);
    }

    println!("== 20 seeded random inits on [-8, 4] ==");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let inits: Vec<(f64, f64)> = (0..20)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            (a, b)
        })
        .collect();
    let mut survivors = 0;
    for (i, &init) in inits.iter().enumerate() {
        match integrate(&obj, &base(), init) {
            Ok(_) => {
                survivors += 1;
                println!("init {i} ({:.4}, {:.4}): survives", init.0, init.1);
            }
            Err(HjbError::Blowup { x, .. }) => {
                println!("init {i} ({:.4}, {:.4}): blowup at x = {x:.3}", init.0, init.1)
            }
            Err(e) => println!("init {i}: {e}"),
        }
    }
    println!("survivors: {survivors}/20");

    println!("== pilot-scored solve (random inits) ==");
    let pilot = SimConfig {
        eta: 0.125,
        n_steps: 200,
        n_reps: 50,
        x0: -3.0,
        seed: 1234,
        objective: "double-well".to_string(),
        policy: PolicySpec::StateDependent,
        replica_gamma: None,
    };
    match solve(&obj, &base(), &pilot, None) {
        Ok(s) => println!(
            "chosen init ({:.4}, {:.4}), pilot score {:.4}",
            s.init.0, s.init.1, s.pilot_score
        ),
        Err(e) => println!("solve failed: {e}"),
    }

    println!("== paper-init solve + full four-algorithm comparison ==");
    let sol = solve(&obj, &base(), &pilot, Some(paper_init)).unwrap();
    println!("paper init pilot score {:.4}", sol.pilot_score);
    let mk = |policy, eta, gamma: Option<f64>, seed| SimConfig {
        eta,
        n_steps: 500,
        n_reps: 500,
        x0: -3.0,
        seed,
        objective: "double-well".to_string(),
        policy,
        replica_gamma: gamma,
    };
    let runs = [
        ("constant", mk(PolicySpec::Constant { beta: 0.48828125 }, 0.5, None, 101)),
        ("power-law", mk(PolicySpec::PowerLaw { d: 31.25, b: 0.9 }, 0.5, None, 202)),
        ("replica-exchange", mk(PolicySpec::ReplicaExchange, 0.5, Some(250.0), 303)),
        ("state-dependent", mk(PolicySpec::StateDependent, 0.125, None, 404)),
    ];
    for (name, cfg) in &runs {
        let out = run(cfg, &obj, Some(&sol)).unwrap();
        let first_below =
            |thr: f64| out.stats.iter().find(|s| s.mean_f < thr).map(|s| s.k);
        let max_early = out.stats.iter().take(99).map(|s| s.mean_f).fold(f64::MIN, f64::max);
        let at = |k: usize| out.stats[k - 1].mean_f;
        println!(
            "{name:>16}: first<2 = {:?}, first<1 = {:?}, mean[100] = {:.3}, mean[500] = {:.4}, max(k<100) = {:.1}, excluded = {}",
            first_below(2.0), first_below(1.0), at(100), at(500), max_early, out.excluded
        );
    }
}
