//! CSV artifact writers: `#`-prefixed metadata lines (always including the
//! full parameter echo), a single header line, then data rows.
//!
//! Floats are written with the shortest round-trip formatting, so identical
//! inputs produce byte-identical files.

use std::io::{self, Write};

use crate::dynamics::AttractorKind;
use crate::equilibria::Equilibrium;
use crate::model::{Params, RateAxis, State};
use crate::ode::Trajectory;
use crate::stability::StabilityReport;
use crate::sweep::{LleCell, StabilityMap, Sweep1d, SweepEntry};

/// An in-memory CSV document.
#[derive(Clone, Debug)]
pub struct CsvDoc {
    meta: Vec<String>,
    header: String,
    rows: Vec<String>,
}

impl CsvDoc {
    pub fn new(title: &str, p: &Params, header: &str) -> CsvDoc {
        CsvDoc {
            meta: vec![format!("# {title}"), format!("# params: {}", p.echo())],
            header: header.to_string(),
            rows: Vec::new(),
        }
    }

    pub fn push_meta(&mut self, line: impl AsRef<str>) {
        self.meta.push(format!("# {}", line.as_ref()));
    }

    pub fn push_row(&mut self, fields: &[String]) {
        self.rows.push(fields.join(","));
    }

    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        for m in &self.meta {
            writeln!(w, "{m}")?;
        }
        writeln!(w, "{}", self.header)?;
        for r in &self.rows {
            writeln!(w, "{r}")?;
        }
        Ok(())
    }
}

impl std::fmt::Display for CsvDoc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("vec write cannot fail");
        f.write_str(&String::from_utf8(buf).expect("csv content is utf-8"))
    }
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// `name,x1,x2,ys1,y1,y2,zs,z,feasible,residual`
pub fn equilibria_csv(p: &Params, eqs: &[Equilibrium]) -> CsvDoc {
    let mut doc = CsvDoc::new(
        "equilibria",
        p,
        "name,x1,x2,ys1,y1,y2,zs,z,feasible,residual",
    );
    for e in eqs {
        let s = e.state.to_array();
        let mut fields = vec![e.name.to_string()];
        fields.extend(s.iter().map(|v| fmt_f64(*v)));
        fields.push(e.feasible.to_string());
        fields.push(fmt_f64(e.residual));
        doc.push_row(&fields);
    }
    doc
}

/// `name,re1..re7,im1..im7,classification`
pub fn stability_reports_csv(p: &Params, reports: &[StabilityReport]) -> CsvDoc {
    let header = {
        let mut h = String::from("name");
        for i in 1..=7 {
            h.push_str(&format!(",re{i}"));
        }
        for i in 1..=7 {
            h.push_str(&format!(",im{i}"));
        }
        h.push_str(",classification");
        h
    };
    let mut doc = CsvDoc::new("stability reports", p, &header);
    for r in reports {
        let mut fields = vec![r.name.to_string()];
        fields.extend(r.eigenvalues.iter().map(|l| fmt_f64(l.re)));
        fields.extend(r.eigenvalues.iter().map(|l| fmt_f64(l.im)));
        fields.push(r.classification.to_string());
        doc.push_row(&fields);
    }
    doc
}

/// `t,x1,x2,ys1,y1,y2,zs,z`
pub fn trajectory_csv(p: &Params, traj: &Trajectory) -> CsvDoc {
    let mut doc = CsvDoc::new("trajectory", p, "t,x1,x2,ys1,y1,y2,zs,z");
    doc.push_meta(format!(
        "steps: accepted={} rejected={}",
        traj.accepted_steps, traj.rejected_steps
    ));
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut fields = vec![fmt_f64(*t)];
        fields.extend(s.to_array().iter().map(|v| fmt_f64(*v)));
        doc.push_row(&fields);
    }
    doc
}

/// `label,alpha,alpha_s` sample points along analytic curves.
pub fn curves_csv(p: &Params, points: &[(String, f64, f64)]) -> CsvDoc {
    let mut doc = CsvDoc::new("bifurcation curves", p, "label,alpha,alpha_s");
    for (label, alpha, alpha_s) in points {
        doc.push_row(&[label.clone(), fmt_f64(*alpha), fmt_f64(*alpha_s)]);
    }
    doc
}

/// `alpha|alpha_s,equilibrium,norm,stable,po_max,po_min`
pub fn sweep1d_csv(p: &Params, sweep: &Sweep1d) -> CsvDoc {
    let axis_name = match sweep.axis {
        RateAxis::Alpha => "alpha",
        RateAxis::AlphaS => "alpha_s",
    };
    let header = format!("{axis_name},equilibrium,norm,stable,po_max,po_min");
    let mut doc = CsvDoc::new("1-d bifurcation sweep", p, &header);
    for c in &sweep.crossings {
        let label = c
            .curve
            .map(|l| l.to_string())
            .unwrap_or_else(|| "unlabelled".into());
        let eq = c.eq.map(|e| format!(" eq={e}")).unwrap_or_default();
        let kind = if c.omega.is_some() {
            "hopf"
        } else {
            "zero-eigenvalue"
        };
        doc.push_meta(format!(
            "crossing: {axis_name}={} {kind} curve={label}{eq}",
            fmt_f64(c.rate)
        ));
    }
    for row in &sweep.rows {
        let fields = match &row.entry {
            SweepEntry::Equilibrium { name, norm, stable } => vec![
                fmt_f64(row.rate),
                name.to_string(),
                fmt_f64(*norm),
                stable.to_string(),
                String::new(),
                String::new(),
            ],
            SweepEntry::Orbit {
                bucket,
                mean_norm,
                po_max,
                po_min,
            } => vec![
                fmt_f64(row.rate),
                bucket.to_string(),
                fmt_f64(*mean_norm),
                "true".into(),
                fmt_opt(*po_max),
                fmt_opt(*po_min),
            ],
        };
        doc.push_row(&fields);
    }
    doc
}

/// `alpha,alpha_s,attractor,probability`
pub fn stability_map_csv(p: &Params, map: &StabilityMap) -> CsvDoc {
    let mut doc = CsvDoc::new("stability map", p, "alpha,alpha_s,attractor,probability");
    doc.push_meta(format!(
        "grid: alpha [{}, {}] x{} ; alpha_s [{}, {}] x{}",
        fmt_f64(map.grid.alpha.from),
        fmt_f64(map.grid.alpha.to),
        map.grid.alpha.count,
        fmt_f64(map.grid.alpha_s.from),
        fmt_f64(map.grid.alpha_s.to),
        map.grid.alpha_s.count,
    ));
    for cell in &map.cells {
        for (bucket, _, prob) in cell.distribution.iter() {
            doc.push_row(&[
                fmt_f64(cell.alpha),
                fmt_f64(cell.alpha_s),
                bucket.to_string(),
                fmt_f64(prob),
            ]);
        }
    }
    doc
}

/// `alpha,alpha_s,zs0,z0,kind,target,final_residual,po_max,po_min,period,lle`
pub fn basin_runs_csv(p: &Params, map: &StabilityMap) -> CsvDoc {
    let mut doc = CsvDoc::new(
        "per-run attractor classification",
        p,
        "alpha,alpha_s,zs0,z0,kind,target,final_residual,po_max,po_min,period,lle",
    );
    for cell in &map.cells {
        for run in &cell.runs {
            let kind = match run.class.kind {
                AttractorKind::Equilibrium => "equilibrium",
                AttractorKind::Periodic => "periodic",
                AttractorKind::ChaoticCandidate => "chaotic-candidate",
                AttractorKind::Unresolved => "unresolved",
            };
            doc.push_row(&[
                fmt_f64(cell.alpha),
                fmt_f64(cell.alpha_s),
                fmt_f64(run.zs0),
                fmt_f64(run.z0),
                kind.to_string(),
                run.class.target.map(|t| t.to_string()).unwrap_or_default(),
                fmt_opt(run.class.metrics.final_residual),
                fmt_opt(run.class.metrics.po_max),
                fmt_opt(run.class.metrics.po_min),
                fmt_opt(run.class.metrics.period),
                fmt_opt(run.class.metrics.lle),
            ]);
        }
    }
    doc
}

/// `alpha,alpha_s,lle,converged`
pub fn lle_map_csv(p: &Params, s0: &State, cells: &[LleCell]) -> CsvDoc {
    let mut doc = CsvDoc::new(
        "largest-Lyapunov-exponent map",
        p,
        "alpha,alpha_s,lle,converged",
    );
    doc.push_meta(format!("initial state: {s0}"));
    for c in cells {
        doc.push_row(&[
            fmt_f64(c.alpha),
            fmt_f64(c.alpha_s),
            fmt_opt(c.lle),
            c.converged.to_string(),
        ]);
    }
    doc
}
