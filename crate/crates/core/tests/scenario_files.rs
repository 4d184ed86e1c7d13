use std::path::PathBuf;

use saasched::instance::{parse_instance, ScenarioSet};
use saasched::scenarios::{
    accuracy_cost_curve, curve_to_csv, load_scenarios, write_scenarios, CurveConfig, CurveSolver,
    Noise, ScenarioError,
};

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn files_stack_in_argument_order() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(&dir, "a.csv", "slot,s1,s2\n1,1,2\n2,3,4\n");
    let b = write(&dir, "b.csv", "slot,s1\n1,9\n2,8\n");
    let set = load_scenarios(&[a, b], 2).unwrap();
    assert_eq!(set.count(), 3);
    assert_eq!(set.scenario(0), [1.0, 3.0]);
    assert_eq!(set.scenario(1), [2.0, 4.0]);
    assert_eq!(set.scenario(2), [9.0, 8.0]);
}

#[test]
fn written_scenarios_read_back() {
    let set = ScenarioSet::new(vec![vec![1.5, -2.0, 3.25], vec![0.1, 0.2, 0.3]]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "s.csv", &write_scenarios(&set));
    assert_eq!(load_scenarios(&[p], 3).unwrap(), set);
}

#[test]
fn malformed_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let short = write(&dir, "short.csv", "slot,s1\n1,1\n");
    assert!(matches!(
        load_scenarios(&[short], 2),
        Err(ScenarioError::Length {
            expected: 2,
            found: 1,
            ..
        })
    ));
    let header = write(&dir, "header.csv", "t,s1\n1,1\n2,2\n");
    assert!(matches!(
        load_scenarios(&[header], 2),
        Err(ScenarioError::Format { .. })
    ));
    let order = write(&dir, "order.csv", "slot,s1\n2,1\n1,2\n");
    assert!(matches!(
        load_scenarios(&[order], 2),
        Err(ScenarioError::Format { .. })
    ));
    let text = write(&dir, "text.csv", "slot,s1\n1,x\n2,2\n");
    assert!(matches!(
        load_scenarios(&[text], 2),
        Err(ScenarioError::Format { .. })
    ));
    let missing = dir.path().join("missing.csv");
    assert!(matches!(
        load_scenarios(&[missing], 2),
        Err(ScenarioError::Io { .. })
    ));
}

#[test]
fn curve_on_ti1() {
    let mut doc = String::from(
        "horizon 8 4 8\nrooms 1 1\nbattery b1 2 1 4 1\n\
         activity a1 onceoff 2 1 0 2 50 10\nstarts a1 1 2 3 4 5 6 7\npenalized a1 5 6 7\n",
    );
    for t in 1..=8 {
        doc.push_str(&format!("price {t} 100\n"));
    }
    let instance = parse_instance(&doc).unwrap();
    let base = [10.0, 12.0, 9.0, 11.0, 13.0, 8.0, 10.0, 14.0];
    let config = CurveConfig {
        k: 3,
        seed: 5,
        noise: Noise::Multiplicative,
        solver: CurveSolver::Exact { budget: 1e6 },
    };
    let points = accuracy_cost_curve(&instance, &base, &[0.0, 0.2], &config).unwrap();
    assert_eq!(points.len(), 2);
    assert_eq!(points[0].mase, Some(0.0));
    assert!(points[1].mase.unwrap() > 0.0);
    assert!(points[1].cost >= points[0].cost - 1e-9);

    let csv = curve_to_csv(&points);
    assert!(csv.starts_with("sigma,mase,cost\n0,0,"));
    assert_eq!(csv.lines().count(), 3);

    let flat = accuracy_cost_curve(&instance, &[10.0; 8], &[0.0], &config).unwrap();
    assert_eq!(flat[0].mase, None);
    assert!(curve_to_csv(&flat).contains(",NA,"));
}
