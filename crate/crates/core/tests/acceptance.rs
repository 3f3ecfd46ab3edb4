//! The eleven acceptance criteria at their pinned tolerances and runtime
//! limits. Run with `cargo test -p hichom-core --test acceptance -- --nocapture`
//! to see one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use hichom_core::io::commands::selftest;
use hichom_core::selftest::{
    bounds, elastic_convergence, elastic_study, electrostatic_convergence, electrostatic_study, form_agreement,
    laminate_oracle, manufactured_convergence, splitting_identity, symmetry_ellipticity, trivial_limit, uniform_bounds,
    CriterionOutcome,
};
use hichom_core::{Command, RunConfig, SolverConfig};

struct Verdict {
    outcome: CriterionOutcome,
    elapsed: Duration,
    limit: Option<Duration>,
}

impl Verdict {
    fn passed(&self) -> bool {
        self.outcome.passed && self.limit.is_none_or(|l| self.elapsed < l)
    }

    fn line(&self) -> String {
        let limit = self.limit.map_or("none".to_string(), |l| format!("{} s", l.as_secs()));
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        format!(
            "[{tag}] criterion {:>2} {:<42} {:>8.2} s (limit {limit}) {}",
            self.outcome.id,
            self.outcome.name,
            self.elapsed.as_secs_f64(),
            serde_json::Value::Object(self.outcome.metrics.clone())
        )
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed())
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

#[test]
fn acceptance_criteria() {
    let solver = SolverConfig::default();
    let mut verdicts = Vec::new();
    let mut push = |outcome: CriterionOutcome, elapsed: Duration, limit: Option<Duration>| {
        let v = Verdict { outcome, elapsed, limit };
        println!("{}", v.line());
        verdicts.push(v);
    };

    let (o, t) = timed(|| trivial_limit(&solver).unwrap());
    push(o, t, secs(5));
    let (o, t) = timed(|| laminate_oracle(&solver).unwrap());
    push(o, t, secs(5));
    let (o, t) = timed(|| bounds(&solver).unwrap());
    push(o, t, secs(10));
    let (o, t) = timed(|| form_agreement(&solver).unwrap());
    push(o, t, None);
    let (o, t) = timed(|| symmetry_ellipticity(&solver).unwrap());
    push(o, t, None);
    let (o, t) = timed(|| manufactured_convergence(&solver).unwrap());
    push(o, t, secs(30));

    let (electro, t_electro) = timed(|| electrostatic_study(&solver).unwrap());
    push(electrostatic_convergence(&electro), t_electro, secs(120));
    let (elastic, t_elastic) = timed(|| elastic_study(&solver).unwrap());
    push(elastic_convergence(&elastic), t_elastic, secs(300));
    push(uniform_bounds(&elastic), t_elastic, None);
    push(splitting_identity(&[&electro, &elastic]), t_electro + t_elastic, None);

    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::defaults(Command::Selftest);
    cfg.output_dir = dir.path().to_path_buf();
    let ((first, a), t) = timed(|| selftest(&cfg).unwrap());
    let (_, b) = selftest(&cfg).unwrap();
    let mut o = first.last().cloned().unwrap();
    o.metrics.insert("consecutiveRunsIdentical".into(), (a == b).into());
    o.passed &= a == b;
    push(o, t, None);

    let failed: Vec<u8> = verdicts.iter().filter(|v| !v.passed()).map(|v| v.outcome.id).collect();
    assert_eq!(verdicts.len(), 11);
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
