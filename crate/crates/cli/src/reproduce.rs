use serde::Serialize;
use stability_cert::CertificateStatus;

use crate::commands::{analyze, certify, design, simulate, Overrides};
use crate::output::Artifact;
use crate::scenario::{benchmark_scenario, Scenario, BENCHMARK_SCENARIO};
use crate::CliError;

/// One compared quantity of the benchmark reproduction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub quantity: String,
    pub reference: String,
    pub computed: String,
    pub criterion: String,
    pub pass: bool,
}

fn close(quantity: &str, reference: f64, computed: f64, tol: f64) -> SummaryRow {
    SummaryRow {
        quantity: quantity.into(),
        reference: format!("{reference}"),
        computed: format!("{computed:.6}"),
        criterion: format!("|diff| <= {tol:e}"),
        pass: (computed - reference).abs() <= tol,
    }
}

fn table(rows: &[SummaryRow]) -> String {
    let head = ["quantity", "reference", "computed", "criterion", "result"];
    let cells: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            [
                r.quantity.clone(),
                r.reference.clone(),
                r.computed.clone(),
                r.criterion.clone(),
                if r.pass { "PASS" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..5)
        .map(|i| cells.iter().map(|c| c[i].chars().count()).chain([head[i].len()]).max().unwrap_or(0))
        .collect();
    let line = |c: &[String]| {
        let padded: Vec<String> =
            c.iter().zip(&widths).map(|(s, w)| format!("{s}{}", " ".repeat(w - s.chars().count()))).collect();
        format!("{}\n", padded.join("  ").trim_end())
    };
    let mut out = line(&head.map(String::from));
    out.push_str(&line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>()));
    for c in &cells {
        out.push_str(&line(c));
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    out.push_str(&format!("\n{passed} of {} rows within tolerance\n", rows.len()));
    out
}

/// Runs the bundled benchmark end to end and compares against its reference values.
pub fn reproduce(ov: &Overrides) -> Result<(Vec<SummaryRow>, Vec<Artifact>), CliError> {
    let sc = benchmark_scenario();
    let mut artifacts = vec![Artifact::new("scenario.json", BENCHMARK_SCENARIO)];
    let mut rows = Vec::new();

    let (an, files) = analyze(&sc, ov)?;
    artifacts.extend(files.into_iter().map(|a| a.nested("analyze")));
    rows.push(close("R(J1)", 0.305, an.clusters[0].robustness.unwrap_or(f64::NAN), 0.005));
    rows.push(close("R(J2)", 3.62, an.clusters[1].robustness.unwrap_or(f64::NAN), 0.01));

    let (de, files) = design(&sc, ov)?;
    artifacts.extend(files.into_iter().map(|a| a.nested("design")));
    let c1 = &de.clusters[0];
    rows.push(close("R(J1 + Delta1)", 0.332, c1.target_robustness.unwrap_or(f64::NAN), 0.005));
    let slot = |row, col| c1.slots.iter().find(|s| (s.row, s.col) == (row, col));
    let (k1, k2) = (slot(1, 2), slot(3, 1));
    rows.push(close("k1 = u/beta at entry (1,2)", 1.0, k1.map_or(f64::NAN, |s| s.ratio), 1e-6));
    rows.push(close("k2 = u/beta at entry (3,1)", 1.0, k2.map_or(f64::NAN, |s| s.ratio), 1e-6));
    let ratio = match (k1, k2) {
        (Some(a), Some(b)) => b.beta.max(a.beta) / b.beta.min(a.beta),
        _ => f64::NAN,
    };
    rows.push(close("frequency ratio", std::f64::consts::SQRT_2, ratio, 1e-6));
    let entries = de.schedule.entries.len();
    rows.push(SummaryRow {
        quantity: "vibrated edges".into(),
        reference: "4".into(),
        computed: entries.to_string(),
        criterion: "equal".into(),
        pass: entries == 4,
    });

    let controlled_sc = Scenario { schedule: Some(de.schedule.clone()), delta: None, ..sc.clone() };
    let (on, files) = simulate(&controlled_sc, ov)?;
    artifacts.extend(files.into_iter().map(|a| a.nested("controlled")));
    rows.push(SummaryRow {
        quantity: "controlled final sync error [rad]".into(),
        reference: "< 0.01".into(),
        computed: format!("{:.6}", on.final_error),
        criterion: "below 0.01".into(),
        pass: on.final_error < 0.01,
    });
    let (off, files) = simulate(&sc, &Overrides { uncontrolled: true, ..*ov })?;
    artifacts.extend(files.into_iter().map(|a| a.nested("uncontrolled")));
    rows.push(SummaryRow {
        quantity: "uncontrolled min/initial sync error".into(),
        reference: ">= 0.5".into(),
        computed: format!("{:.6}", off.min_error / off.initial_error),
        criterion: "never below half".into(),
        pass: off.min_error >= 0.5 * off.initial_error,
    });

    let (cert, files) = certify(&controlled_sc, ov)?;
    artifacts.extend(files.into_iter().map(|a| a.nested("certify")));
    let status = serde_json::to_value(&cert.status).map_err(|e| CliError::Compute(e.to_string()))?;
    rows.push(SummaryRow {
        quantity: "certificate status".into(),
        reference: "empirically_stable_uncertified".into(),
        computed: status.as_str().map_or_else(|| status.to_string(), String::from),
        criterion: "equal".into(),
        pass: cert.status == CertificateStatus::EmpiricallyStableUncertified,
    });
    for row in &cert.sweep {
        rows.push(SummaryRow {
            quantity: format!("sweep epsilon {}", row.epsilon),
            reference: "recorded".into(),
            computed: if row.stable { "stable" } else { "not stable" }.into(),
            criterion: "informational".into(),
            pass: true,
        });
    }
    rows.push(SummaryRow {
        quantity: "sweep monotone in epsilon".into(),
        reference: "true or deviations listed".into(),
        computed: if cert.sweep_monotone { "true".into() } else { cert.sweep_deviations.join("; ") },
        criterion: "reported".into(),
        pass: cert.sweep_monotone || !cert.sweep_deviations.is_empty(),
    });

    artifacts.push(Artifact::json("summary.json", &rows)?);
    artifacts.push(Artifact::new("summary.txt", table(&rows)));
    Ok((rows, artifacts))
}
