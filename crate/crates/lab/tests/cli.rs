use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stability-lab"))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("stability-lab-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn first_line(p: PathBuf) -> String {
    std::fs::read_to_string(&p)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn zoh_writes_pole_sweep() {
    let out = scratch("zoh");
    let st = bin()
        .args(["zoh", "--points", "50", "--out-dir"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    assert_eq!(
        first_line(out.join("zoh_poles.csv")),
        "ts_s,max_pole_magnitude,stable_flag"
    );
    assert!(String::from_utf8_lossy(&st.stdout).contains("stable Ts intervals"));
}

#[test]
fn simulate_then_modes_round_trip() {
    let out = scratch("sim");
    let scenario =
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/smib_scr3.5.toml");
    let st = bin()
        .args(["simulate", "--horizon", "4", "--out-dir"])
        .arg(&out)
        .arg(&scenario)
        .output()
        .unwrap();
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    assert!(String::from_utf8_lossy(&st.stdout).starts_with("verdict: "));
    let trace = out.join("smib_scr3.5.csv");
    assert!(first_line(trace.clone()).starts_with("time_s,"));

    let st = bin()
        .args(["modes", "--out-dir"])
        .arg(&out)
        .arg(&trace)
        .output()
        .unwrap();
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    assert!(first_line(out.join("modes.csv")).starts_with("frequency_hz,dr_percent,amplitude"));
}

#[test]
fn bode_writes_one_file_per_delay() {
    let out = scratch("bode");
    let st = bin()
        .args(["bode", "--td", "0,0.1", "--out-dir"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    assert_eq!(
        first_line(out.join("bode_td_0.csv")),
        "omega_rad_s,magnitude_db,phase_deg"
    );
    assert_eq!(
        first_line(out.join("bode_td_0.1.csv")),
        "omega_rad_s,magnitude_db,phase_deg"
    );
    assert_eq!(
        first_line(out.join("crossovers.csv")),
        "td_s,kind,omega_rad_s,margin"
    );
}

#[test]
fn bad_input_fails_cleanly() {
    let st = bin()
        .args(["simulate", "/nonexistent/scenario.toml"])
        .output()
        .unwrap();
    assert!(!st.status.success());
}
