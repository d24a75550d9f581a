//! Driving the command-line front end in-process from a config file plus
//! `--key=value` overrides.

use tunnelcld::cli::run;

fn main() -> std::io::Result<()> {
    let dir = std::env::temp_dir().join("tunnelcld-example");
    std::fs::create_dir_all(&dir)?;
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# asymmetric barrier\npreset = e\nkappa = 20\ne_min = -0.5\ne_max = 1.5\ne_points = 81\n")?;

    let code = run(vec![
        "tunnelcld".into(),
        "semiclassical".into(),
        format!("--config={}", cfg.display()),
        format!("--out={}", dir.display()),
        "--e_points=41".into(),
    ]);
    println!("exit code {code}");
    let csv = std::fs::read_to_string(dir.join("semiclassical.csv"))?;
    for line in csv.lines().take(5) {
        println!("{line}");
    }
    let excluded = std::fs::read_to_string(dir.join("semiclassical_excluded.csv"))?;
    println!("excluded rows: {}", excluded.lines().count() - 1);

    // an unknown key is a configuration error
    println!("bad key exit code {}", run(vec!["tunnelcld".into(), "transmit".into(), "--kapa=3".into()]));
    Ok(())
}
