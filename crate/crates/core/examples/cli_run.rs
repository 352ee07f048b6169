//! Drives the batch front end in-process: writes a config for a random
//! instance, runs `simulate` on it and lists the produced files.

use std::fs;

fn main() {
    let dir = std::env::temp_dir().join("adelim-cli-run");
    fs::create_dir_all(&dir).expect("temp dir");
    let config = dir.join("config.json");
    fs::write(
        &config,
        r#"{
  "instance": { "random": { "p": 2, "q": 3, "eps": 0.1, "eps_prime": 0.2, "seed": 3 } },
  "method": "sylvester",
  "order": 4,
  "time_window": { "t_max": 200.0, "n_points": 400 }
}
"#,
    )
    .expect("write config");
    let out = dir.join("out");
    let code = adelim::cli::main_with_args([
        "adelim".as_ref(),
        "simulate".as_ref(),
        "--config".as_ref(),
        config.as_os_str(),
        "--out".as_ref(),
        out.as_os_str(),
    ]);
    println!("exit code {code}");
    for entry in fs::read_dir(&out).expect("output dir").flatten() {
        println!("  {}", entry.path().display());
    }
}
