//! Result serialization: CSV with a mandatory header row and deterministic
//! row-major / times-ascending ordering, or JSON mirroring the scenario
//! schema (complex numbers as [re, im] pairs) with the scenario echoed so
//! outputs can be re-ingested.

use crate::runner::{EntropyResult, EvolveResult, PathintResult, ProbResult, SchmidtResult};
use crate::scenario::{Grid, Scenario};

pub enum Rendered {
    Prob(ProbResult),
    Entropy(EntropyResult),
    Schmidt(SchmidtResult),
    Evolve(EvolveResult),
    Pathint(PathintResult),
}

impl Rendered {
    pub fn command_name(&self) -> &'static str {
        match self {
            Rendered::Prob(_) => "prob",
            Rendered::Entropy(_) => "entropy",
            Rendered::Schmidt(_) => "schmidt",
            Rendered::Evolve(_) => "evolve",
            Rendered::Pathint(_) => "pathint",
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            Rendered::Prob(r) => format!("quantity,value\np,{}\n", r.p),
            Rendered::Entropy(r) => format!("quantity,value\nentropy,{}\n", r.entropy),
            Rendered::Schmidt(r) => {
                let mut out = String::from("record,i,j,re,im\n");
                for (i, s) in r.singulars.iter().enumerate() {
                    out.push_str(&format!("singular,{i},,{s},\n"));
                }
                push_grid_rows(&mut out, "u", &r.u);
                push_grid_rows(&mut out, "v", &r.v);
                out
            }
            Rendered::Evolve(r) => {
                let mut out = String::from("record,t,i,j,re,im\n");
                for snap in &r.snapshots {
                    for (i, row) in snap.matrix.iter().enumerate() {
                        for (j, z) in row.iter().enumerate() {
                            out.push_str(&format!("R,{},{i},{j},{},{}\n", snap.t, z[0], z[1]));
                        }
                    }
                    out.push_str(&format!("entropy,{},,,{},\n", snap.t, snap.entropy));
                    for (i, p) in snap.probabilities.iter().enumerate() {
                        out.push_str(&format!("p,{},{i},,{p},\n", snap.t));
                    }
                }
                out
            }
            Rendered::Pathint(r) => {
                let mut out = String::from("record,i,j,re,im\n");
                push_grid_rows(&mut out, "kernel", &r.kernel);
                push_grid_rows(&mut out, "R", &r.relational);
                out.push_str(&format!("entropy,,,{},\n", r.entropy));
                push_grid_rows(&mut out, "rho", &r.rho);
                for (i, p) in r.probabilities.iter().enumerate() {
                    out.push_str(&format!("p,{i},,{p},\n"));
                }
                out
            }
        }
    }

    pub fn to_json(&self, scenario: &Scenario) -> String {
        let results = match self {
            Rendered::Prob(r) => serde_json::to_value(r),
            Rendered::Entropy(r) => serde_json::to_value(r),
            Rendered::Schmidt(r) => serde_json::to_value(r),
            Rendered::Evolve(r) => serde_json::to_value(r),
            Rendered::Pathint(r) => serde_json::to_value(r),
        }
        .expect("results serialize");
        let doc = serde_json::json!({
            "command": self.command_name(),
            "scenario": scenario,
            "results": results,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
        text.push('\n');
        text
    }
}

fn push_grid_rows(out: &mut String, record: &str, grid: &Grid) {
    for (i, row) in grid.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            out.push_str(&format!("{record},{i},{j},{},{}\n", z[0], z[1]));
        }
    }
}
