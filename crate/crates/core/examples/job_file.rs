//! Builds a job file in code, round-trips it through JSON and runs it into a
//! temporary directory, the same path the `occucert` binary takes.

use occucert::cases;
use occucert::certify::{CertificateSpec, Theorem};
use occucert::config::{parse_config, JobConfig, ProblemSpec, Task};
use occucert::job::{render_text, run, RunOptions};
use occucert::sdp::InteriorPoint;
use occucert::simulate::SimConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("occucert-job-example");
    let job = JobConfig {
        name: Some("example2-quick".into()),
        problem: ProblemSpec::of(&cases::example2()),
        tasks: vec![
            Task::Verify(CertificateSpec::new(
                Theorem::DissipativeUpper,
                8,
                vec![0.5],
                vec![],
            )),
            Task::Simulate(SimConfig::new(2e-3, 5_000, 3)),
        ],
        output_dir: dir.clone(),
    };
    let text = job.to_json();
    assert_eq!(parse_config(&text)?, job);

    // A broken copy reports where the problem is.
    let broken = text.replace("\"horizon\": 5.0", "\"horizon\": -5.0");
    if let Err(e) = parse_config(&broken) {
        println!("{e}\n");
    }

    let report = run(&job, &RunOptions::default(), &InteriorPoint::default())?;
    print!("{}", render_text(&report));
    println!("\nartifacts in {}", dir.display());
    Ok(())
}
