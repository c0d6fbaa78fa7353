use std::path::Path;
use std::process::{Command, Output};

fn coevo(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coevo"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn scaffold_then_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let scaffold = coevo(&["scaffold", "consensus-2"], dir.path());
    assert_eq!(scaffold.status.code(), Some(0));
    std::fs::write(dir.path().join("c2.conf"), stdout(&scaffold)).unwrap();

    let run = coevo(&["run", "c2.conf", "--out", "results"], dir.path());
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let csv = std::fs::read_to_string(dir.path().join("results/consensus-2.csv")).unwrap();
    assert!(csv.starts_with("t,mass,r_min,r_max,diameter,eta_min,eta_max,sup_bound,inf_bound\n"));
    let summary = std::fs::read_to_string(dir.path().join("results/consensus-2.summary.txt")).unwrap();
    let diameter: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("final_diameter = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(diameter < 1e-3);
    assert!(stdout(&run).contains("PASS"));
}

#[test]
fn preset_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = coevo(&["preset", "mass-check", "--out", out], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let read = |d: &str| std::fs::read(dir.path().join(d).join("mass-check.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    let summary = std::fs::read_to_string(dir.path().join("a/mass-check.summary.txt")).unwrap();
    let drift: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("max_mass_drift = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(drift <= 1e-10);
}

#[test]
fn parse_errors_exit_with_two_and_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.conf"), "graph.n = 2\n# step\nintegrator.dt = 0\nwhat = 1\n").unwrap();
    let o = coevo(&["run", "bad.conf"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 3: integrator.dt must be > 0"), "{err}");
    assert!(err.contains("line 4: unknown key 'what'"), "{err}");

    let o = coevo(&["preset", "no-such-preset"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn blow_up_exits_with_three_and_keeps_partial_rows() {
    let dir = tempfile::tempdir().unwrap();
    let text = "graph.n = 2\nflux.kind = product-mean\nvelocity.kind = static\nvelocity.kernel = quadratic\n\
                init.kind = explicit\ninit.values = 2, -1\nomega.value = 5000\neta0.value = 5000\n\
                integrator.dt = 0.01\nintegrator.t_end = 50\noutput.name = runaway\n";
    std::fs::write(dir.path().join("runaway.conf"), text).unwrap();
    let o = coevo(&["run", "runaway.conf"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let partial = std::fs::read_to_string(dir.path().join("runaway.partial.csv")).unwrap();
    assert!(partial.lines().count() > 2);
}

#[test]
fn broken_edge_target_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let text = "graph.n = 3\nomega.kind = ones\nomega.value = 1\nomega.star = 5\n\
                init.kind = explicit\ninit.values = 1, 0.5, 0\nintegrator.t_end = 0.1\n";
    std::fs::write(dir.path().join("star.conf"), text).unwrap();
    let o = coevo(&["verify", "star.conf"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn verify_prints_a_table_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let scaffold = coevo(&["scaffold", "dissipation"], dir.path());
    std::fs::write(dir.path().join("d.conf"), stdout(&scaffold)).unwrap();
    let o = coevo(&["verify", "d.conf"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = stdout(&o);
    assert!(table.lines().next().unwrap().starts_with("check"));
    assert!(table.contains("dissipation inequality"));
    assert!(!dir.path().join("dissipation.csv").exists());
}

#[test]
fn list_names_every_preset() {
    let dir = tempfile::tempdir().unwrap();
    let o = coevo(&["list"], dir.path());
    let names: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(names.len(), 10);
    assert!(names.iter().any(|n| n == "picard"));
}
