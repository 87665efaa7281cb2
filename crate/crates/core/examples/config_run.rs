//! Drives the command-line front end from a generated configuration:
//! validate, simulate into a run directory, then audit the snapshots.

use bfh::cli;
use bfh::io::SimConfig;

fn main() {
    let dir = std::env::temp_dir().join(format!("bfh_config_run_{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let mut c = SimConfig::default();
    c.grid.dims = vec![24, 24];
    c.step.t_end = 0.05;
    c.output.ledger_every = 5;
    c.output.snapshot_every = 25;
    let conf = dir.join("run.conf");
    std::fs::write(&conf, c.to_text()).expect("write config");
    println!("--- configuration\n{}", c.to_text());

    let (conf, out) = (conf.to_str().unwrap(), dir.join("out"));
    let out = out.to_str().unwrap();
    for argv in [
        vec!["bfh", "validate", "--config", conf],
        vec!["bfh", "simulate", "--config", conf, "--out", out],
        vec!["bfh", "audit", "--out", out],
    ] {
        println!("--- {}", argv[1..].join(" "));
        let code = cli::run(argv);
        println!("exit {code}");
        if code != cli::EXIT_OK {
            break;
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
}
