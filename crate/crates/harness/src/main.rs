use std::path::PathBuf;
use std::process::ExitCode;

use boltz_sldg::config::{parse_switch, RunConfig, SchemeSpec, TestKind};
use boltz_sldg::experiments::{run_ap_decay, run_convergence};
use boltz_sldg::output::{real, write_ap_series, write_convergence, write_json, write_run};
use boltz_sldg::run::run_simulation;
use boltz_sldg::tableau_report::analyze_tableau;
use boltz_sldg::HarnessError;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "boltz-sldg", version, about = "AP-SLDG solver for the 1D2V Boltzmann equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write snapshots, diagnostics and a summary.
    Run(Overrides),
    /// Self-convergence study in the number of cells.
    Convergence {
        #[command(flatten)]
        o: Overrides,
        /// Comma-separated successive doublings.
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
        nx_list: Vec<usize>,
    },
    /// Relaxation toward equilibrium for several schemes and epsilons.
    ApTest {
        #[command(flatten)]
        o: Overrides,
        #[arg(long, value_delimiter = ',', default_value = "ARS443,DP2A242")]
        schemes: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-4,1e-6")]
        eps_list: Vec<f64>,
    },
    /// Classification, order, recursion and positivity report for a tableau.
    AnalyzeTableau {
        /// Builtin name (FBEuler, DP2A242, ARS443) or a tableau file.
        name: String,
        /// Print only the JSON report.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Clone)]
struct Overrides {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    test: Option<TestKind>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    /// A number, or "mixing" for the tanh profile.
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    t_final: Option<f64>,
    /// on or off
    #[arg(long)]
    limiter: Option<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl Overrides {
    fn resolve(&self, default_test: TestKind) -> Result<RunConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", p.display())))?;
                RunConfig::from_ini_with(&text, self.test)?
            }
            None => RunConfig::preset(self.test.unwrap_or(default_test)),
        };
        let bad = |m: String| HarnessError::Config(m);
        if let Some(s) = &self.scheme {
            cfg.scheme = SchemeSpec::parse(s);
        }
        if let Some(n) = self.nx {
            cfg.n_cells = n;
        }
        if let Some(k) = self.k {
            cfg.degree = k;
        }
        if let Some(c) = self.cfl {
            cfg.cfl = c;
            cfg.dt = None;
        }
        if let Some(e) = &self.epsilon {
            cfg.set("problem.epsilon", e).map_err(bad)?;
        }
        if let Some(t) = self.t_final {
            cfg.t_final = t;
        }
        if let Some(l) = &self.limiter {
            cfg.limiter.enabled = parse_switch(l).map_err(bad)?;
        }
        if let Some(d) = &self.output_dir {
            cfg.output_dir = Some(d.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn output_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn init_threads() -> Result<(), HarnessError> {
    if let Ok(v) = std::env::var("BOLTZ_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| HarnessError::Config(format!("BOLTZ_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    init_threads()?;
    match cli.command {
        Command::Run(o) => {
            let cfg = o.resolve(TestKind::Accuracy)?;
            let r = run_simulation(&cfg)?;
            let dir = output_dir(&cfg);
            write_run(&dir, &cfg, &r)?;
            let last = r.records.last().expect("initial record");
            println!(
                "{} steps to t = {}, mass drift {:.3e}, min f {:.3e}, ap_error {:.3e}; output in {}",
                r.steps,
                r.t,
                last.mass_drift,
                r.min_f(),
                last.ap_error,
                dir.display()
            );
            r.into_result().map(|_| ())
        }
        Command::Convergence { o, nx_list } => {
            let cfg = o.resolve(TestKind::Accuracy)?;
            let table = run_convergence(&cfg, &nx_list)?;
            let dir = output_dir(&cfg);
            write_convergence(&dir.join("convergence.csv"), &table)?;
            write_json(&dir.join("convergence.json"), &table)?;
            println!(
                "{} k={} cfl={} eps={}",
                table.scheme, table.degree, table.cfl, table.epsilon
            );
            println!("{:>5} {:>12} {:>7} {:>12} {:>7}", "N_x", "e1", "order", "e2", "order");
            for r in &table.rows {
                let o = |x: Option<f64>| x.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
                println!(
                    "{:>5} {:>12.3e} {:>7} {:>12.3e} {:>7}",
                    r.n_x,
                    r.e1,
                    o(r.order1),
                    r.e2,
                    o(r.order2)
                );
            }
            Ok(())
        }
        Command::ApTest { o, schemes, eps_list } => {
            let cfg = o.resolve(TestKind::Ap)?;
            let schemes: Vec<SchemeSpec> = schemes.iter().map(|s| SchemeSpec::parse(s)).collect();
            let series = run_ap_decay(&cfg, &schemes, &eps_list)?;
            let dir = output_dir(&cfg);
            write_ap_series(&dir.join("ap_error.csv"), &series)?;
            write_json(&dir.join("summary.json"), &series)?;
            for s in &series {
                let d = s
                    .euler_differences
                    .map(|d| format!("e_rho {} e_u1 {} e_T {}", real(d[0]), real(d[1]), real(d[2])))
                    .unwrap_or_else(|| "run failed".into());
                println!(
                    "{} eps={:e}: ap_error first step {:.3e}, final {:.3e}; {d}",
                    s.scheme,
                    s.epsilon,
                    s.after_first_step(),
                    s.final_value()
                );
            }
            if series.iter().all(|s| s.completed) {
                Ok(())
            } else {
                let failed: Vec<String> = series
                    .iter()
                    .filter(|s| !s.completed)
                    .map(|s| format!("{} eps={:e}", s.scheme, s.epsilon))
                    .collect();
                Err(HarnessError::Incomplete(format!(
                    "runs did not reach t_final: {}",
                    failed.join(", ")
                )))
            }
        }
        Command::AnalyzeTableau { name, json } => {
            let r = analyze_tableau(&name)?;
            if !json {
                print!("{}", r.text);
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&r.json).expect("report serializes")
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

