//! End-to-end pipeline writing every figure table plus a summary of
//! extracted figures of merit against their measured targets.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::analysis::fit_fss;
use crate::error::{Error, Result};
use crate::experiment::{analyze, channel_map, delay_scan, rabi_map, simulate, simulate_hom_pair, Metric};
use crate::scenario::{Experiment, Scenario};
use crate::sim::rng::{substream, SCAN};
use crate::visibility::{visibility_eq2, visibility_map, write_line_cut, Eq2Inputs, GammaRule};

/// Lifetimes of the two published line cuts, s.
pub const LINE_CUT_T1: [f64; 2] = [170e-12, 175e-12];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub name: String,
    pub extracted: f64,
    pub uncertainty: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub seed: u64,
    pub scenario_hash: String,
    pub entries: Vec<SummaryEntry>,
}

impl Summary {
    fn push(&mut self, name: &str, m: Metric, target: f64, tolerance: f64) {
        self.entries.push(SummaryEntry {
            name: name.to_string(),
            extracted: m.value,
            uncertainty: m.uncertainty,
            target,
            tolerance,
            pass: (m.value - target).abs() <= tolerance,
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Writes `# seed`, `# scenario_hash` and `# scenario` lines, then the body.
pub fn write_with_provenance<F>(path: &Path, scenario: &Scenario, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# seed: {}", scenario.seed)?;
    writeln!(w, "# scenario_hash: {}", scenario.hash())?;
    writeln!(w, "# scenario: {}", scenario.canonical_json())?;
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn with_experiment(base: &Scenario, e: Experiment) -> Scenario {
    Scenario {
        experiment: e,
        ..base.clone()
    }
}

/// Analyzer-angle scan of the exciton line: 36 angles over π, Gaussian
/// energy noise of `noise` eV.
pub fn synthetic_fss_scan(fss: f64, noise: f64, seed: u64) -> Result<Vec<(f64, f64)>> {
    let dist = Normal::new(0.0, noise).map_err(|_| Error::domain("noise", "must be non-negative"))?;
    let mut rng = substream(seed, SCAN, u64::MAX);
    let phase = rng.random::<f64>() * PI;
    let n = 36;
    Ok((0..n)
        .map(|k| {
            let theta = PI * k as f64 / n as f64;
            (theta, 0.5 * fss * (2.0 * (theta - phase)).cos() + dist.sample(&mut rng))
        })
        .collect())
}

/// Runs every experiment of `base` into `out` and returns the summary.
pub fn reproduce(base: &Scenario, out: &Path) -> Result<Summary> {
    base.validate()?;
    std::fs::create_dir_all(out)?;
    let mut summary = Summary {
        seed: base.seed,
        scenario_hash: base.hash(),
        entries: Vec::new(),
    };

    let s = with_experiment(base, Experiment::RabiMap);
    let map = rabi_map(&s)?;
    write_with_provenance(&out.join("fig2a_rabi_map.tsv"), &s, |w| map.write_table(w))?;

    let s = with_experiment(base, Experiment::DelayScan);
    let scan = delay_scan(&s)?;
    write_with_provenance(&out.join("fig2b_delay_scan.tsv"), &s, |w| scan.write_table(w))?;
    if let Some(r) = scan.rows.iter().min_by(|a, b| (a.delay - 6e-12).abs().total_cmp(&(b.delay - 6e-12).abs())) {
        summary.push("stim_ratio", Metric { value: r.ratio, uncertainty: r.ratio_uncertainty }, 2.0, 0.05);
    }

    let mut g2 = [0.0; 2];
    for (k, (file, e, target)) in [
        ("fig3a_hbt_h", Experiment::HbtH, 0.028),
        ("fig3b_hbt_v", Experiment::HbtV, 0.022),
    ]
    .into_iter()
    .enumerate()
    {
        let s = with_experiment(base, e);
        let report = analyze(e, &s, &channel_map(&simulate(&s)?), None, 0.0)?;
        let h = &report.histograms["coincidences"];
        write_with_provenance(&out.join(format!("{file}.tsv")), &s, |w| h.write_table(w))?;
        let m = report.metrics["g2"];
        g2[k] = m.value.clamp(0.0, 0.99);
        summary.push(&format!("g2_{}", &e.name()[4..]), m, target, 0.004);
    }

    let s = with_experiment(base, Experiment::HbtCombined);
    let report = analyze(s.experiment, &s, &channel_map(&simulate(&s)?), None, 0.0)?;
    let h = &report.histograms["coincidences"];
    write_with_provenance(&out.join("fig3c_hbt_combined.tsv"), &s, |w| h.write_table(w))?;

    for (file, e, g, target) in [
        ("fig3d_hom_h", Experiment::HomCoH, g2[0], Some(0.937)),
        ("fig3e_hom_v", Experiment::HomCoV, g2[1], Some(0.888)),
        ("fig3f_hom_hv", Experiment::HomHv, 0.5 * (g2[0] + g2[1]), None),
    ] {
        let s = with_experiment(base, e);
        let (co, cross) = simulate_hom_pair(&s)?;
        let report = analyze(e, &s, &channel_map(&co), Some(&channel_map(&cross)), g)?;
        let (hco, hcr) = (&report.histograms["coincidences"], &report.histograms["reference"]);
        write_with_provenance(&out.join(format!("{file}_co.tsv")), &s, |w| hco.write_table(w))?;
        write_with_provenance(&out.join(format!("{file}_cross.tsv")), &s, |w| hcr.write_table(w))?;
        let tag = &file[6..];
        match target {
            Some(t) => summary.push(&format!("v_{tag}_corrected"), report.metrics["v_corrected"], t, 0.03),
            None => summary.push(&format!("v_{tag}_raw"), report.metrics["v_raw"], 0.28, 0.04),
        }
    }

    let s = with_experiment(base, Experiment::Lifetime);
    let report = analyze(s.experiment, &s, &channel_map(&simulate(&s)?), None, 0.0)?;
    let h = &report.histograms["decay"];
    write_with_provenance(&out.join("lifetime.tsv"), &s, |w| h.write_table(w))?;
    let t1 = report.metrics["t1"];
    summary.push("t1_ps", Metric { value: t1.value * 1e12, uncertainty: t1.uncertainty * 1e12 }, base.qd.t1_x * 1e12, 4.0);

    let fss_scan = synthetic_fss_scan(base.qd.fss, 0.1e-6, base.seed)?;
    let fit = fit_fss(&fss_scan)?;
    write_with_provenance(&out.join("fss_scan.tsv"), base, |w| {
        writeln!(w, "angle_rad\tenergy_ueV")?;
        for (a, e) in &fss_scan {
            writeln!(w, "{a:.6}\t{:.6}", e * 1e6)?;
        }
        Ok(())
    })?;
    summary.push(
        "fss_ueV",
        Metric { value: fit.value * 1e6, uncertainty: fit.uncertainty * 1e6 },
        base.qd.fss * 1e6,
        0.3,
    );

    let grid = &base.visibility_map;
    let vmap = visibility_map(&grid.t1_axis(), &grid.fss_axis(), grid.sigma, GammaRule::Radiative)?;
    write_with_provenance(&out.join("fig4a_visibility_map.tsv"), base, |w| vmap.write_table(w))?;
    for t1 in LINE_CUT_T1 {
        let cut = vmap.line_cut(t1)?;
        let name = format!("fig4b_line_cut_{:.0}ps.tsv", t1 * 1e12);
        write_with_provenance(&out.join(name), base, |w| write_line_cut(w, t1, &cut))?;
    }
    let v = visibility_eq2(&Eq2Inputs::new(LINE_CUT_T1[0], base.qd.delta_nu(), grid.sigma))?;
    summary.push("v_hv_limit_170ps", Metric { value: v, uncertainty: 0.0 }, 0.25, 0.03);

    std::fs::write(out.join("summary.json"), summary.to_json())?;
    Ok(summary)
}
