use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::benchmark::Benchmark;
use crate::category::Category;
use crate::render::VerdictStatus;

use super::ratings::{resolutions, RatingRecord, Resolution};
use super::sample::GenerationSample;
use super::stats::{aggregate_pass_at_k, pass_at_k, wilcoxon_one_sided, EvalCounts, Pooling};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub category: Category,
    pub benchmark: Benchmark,
    pub counts: EvalCounts,
    /// Creative samples whose raters disagree and await adjudication.
    pub pending: u64,
    /// Creative samples with fewer than two judgments.
    pub open: u64,
    pub mean_nodes: Option<f64>,
    pub pass1_std: Option<f64>,
    pub pass1_wf: Option<f64>,
    pub pass3_std: Option<f64>,
    pub pass3_wf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub k: u64,
    /// Pooled over benchmarks, denominator n.
    pub standard: Option<f64>,
    /// Pooled over benchmarks, denominator w.
    pub conditioned: Option<f64>,
    /// Mean of per-benchmark values, denominator n.
    pub standard_mean: Option<f64>,
    /// Mean of per-benchmark values, denominator w.
    pub conditioned_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    pub category: Category,
    pub totals: EvalCounts,
    pub pending: u64,
    pub open: u64,
    pub mean_nodes: Option<f64>,
    pub scores: Vec<Score>,
}

/// Rich versus base node counts over per-benchmark means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityTest {
    pub a: Category,
    pub b: Category,
    pub pairs: usize,
    pub w_plus: Option<f64>,
    pub p_value: Option<f64>,
    pub exact: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub run_id: String,
    pub samples: usize,
    pub categories: Vec<CategoryReport>,
    pub cells: Vec<CellReport>,
    pub complexity: Vec<ComplexityTest>,
}

/// Final correctness of a sample: the oracle for specific benchmarks, the
/// merged human ratings for creative ones.
pub fn sample_correct(sample: &GenerationSample, resolution: Option<Resolution>) -> bool {
    if !sample.is_well_formed() {
        return false;
    }
    if sample.benchmark.is_specific() {
        sample.verdict.as_ref().is_some_and(|v| v.status == VerdictStatus::Pass)
    } else {
        resolution == Some(Resolution::Pass)
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn cell_pass(counts: &EvalCounts, k: u64, conditioned: bool) -> Option<f64> {
    pass_at_k(counts.denominator(conditioned), counts.c, k).ok()
}

/// A pure fold over sample records and ratings.
pub fn compute_report(
    run_id: &str,
    categories: &[Category],
    benchmarks: &[Benchmark],
    ks: &[u64],
    samples: &[GenerationSample],
    ratings: &[RatingRecord],
) -> EvalReport {
    let res = resolutions(ratings);
    let mut by_cell: BTreeMap<(Category, Benchmark), Vec<&GenerationSample>> = BTreeMap::new();
    for s in samples {
        by_cell.entry((s.category, s.benchmark)).or_default().push(s);
    }
    let mut cells = Vec::new();
    let mut categories_out = Vec::new();
    let mut cell_means: BTreeMap<Category, BTreeMap<Benchmark, f64>> = BTreeMap::new();
    for &cat in categories {
        let mut cat_cells = Vec::new();
        let mut cat_nodes = Vec::new();
        for &bench in benchmarks {
            let group = by_cell.get(&(cat, bench)).map(Vec::as_slice).unwrap_or(&[]);
            let mut counts = EvalCounts::default();
            let (mut pending, mut open) = (0, 0);
            let mut nodes = Vec::new();
            for s in group {
                let r = res.get(&s.id).copied();
                counts.n += 1;
                if s.is_well_formed() {
                    counts.w += 1;
                    if let Some(nc) = s.node_count {
                        nodes.push(nc as f64);
                    }
                    if !bench.is_specific() {
                        match r.unwrap_or(Resolution::Open) {
                            Resolution::Pending => pending += 1,
                            Resolution::Open => open += 1,
                            _ => {}
                        }
                    }
                }
                if sample_correct(s, r) {
                    counts.c += 1;
                }
            }
            let mean_nodes = mean(&nodes);
            if let Some(m) = mean_nodes {
                cell_means.entry(cat).or_default().insert(bench, m);
            }
            cat_nodes.extend(nodes);
            cat_cells.push(counts);
            cells.push(CellReport {
                category: cat,
                benchmark: bench,
                counts,
                pending,
                open,
                mean_nodes,
                pass1_std: cell_pass(&counts, 1, false),
                pass1_wf: cell_pass(&counts, 1, true),
                pass3_std: cell_pass(&counts, 3, false),
                pass3_wf: cell_pass(&counts, 3, true),
            });
        }
        let scores = ks
            .iter()
            .map(|&k| Score {
                k,
                standard: aggregate_pass_at_k(&cat_cells, k, false, Pooling::Pooled).ok(),
                conditioned: aggregate_pass_at_k(&cat_cells, k, true, Pooling::Pooled).ok(),
                standard_mean: aggregate_pass_at_k(&cat_cells, k, false, Pooling::MeanOfBenchmarks).ok(),
                conditioned_mean: aggregate_pass_at_k(&cat_cells, k, true, Pooling::MeanOfBenchmarks).ok(),
            })
            .collect();
        let cat_report_cells = &cells[cells.len() - benchmarks.len()..];
        categories_out.push(CategoryReport {
            category: cat,
            totals: cat_cells.iter().copied().sum(),
            pending: cat_report_cells.iter().map(|c| c.pending).sum(),
            open: cat_report_cells.iter().map(|c| c.open).sum(),
            mean_nodes: mean(&cat_nodes),
            scores,
        });
    }
    let complexity = categories
        .iter()
        .filter(|c| c.is_rich() && categories.contains(&c.base()))
        .map(|&a| complexity_test(a, a.base(), benchmarks, &cell_means))
        .collect();
    EvalReport {
        run_id: run_id.to_string(),
        samples: samples.len(),
        categories: categories_out,
        cells,
        complexity,
    }
}

fn complexity_test(
    a: Category,
    b: Category,
    benchmarks: &[Benchmark],
    means: &BTreeMap<Category, BTreeMap<Benchmark, f64>>,
) -> ComplexityTest {
    let empty = BTreeMap::new();
    let (ma, mb) = (means.get(&a).unwrap_or(&empty), means.get(&b).unwrap_or(&empty));
    let (xs, ys): (Vec<f64>, Vec<f64>) = benchmarks
        .iter()
        .filter_map(|bench| Some((*ma.get(bench)?, *mb.get(bench)?)))
        .unzip();
    let mut t = ComplexityTest {
        a,
        b,
        pairs: xs.len(),
        w_plus: None,
        p_value: None,
        exact: None,
        error: None,
    };
    match wilcoxon_one_sided(&xs, &ys) {
        Ok(r) => {
            t.w_plus = Some(r.w_plus);
            t.p_value = Some(r.p_value);
            t.exact = Some(r.exact);
        }
        Err(e) => t.error = Some(e.code().to_string()),
    }
    t
}

fn opt(v: Option<f64>, places: usize) -> String {
    v.map(|x| format!("{x:.places$}")).unwrap_or_default()
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("category,benchmark,n,w,c,mean_nodes,pass1_std,pass1_wf,pass3_std,pass3_wf\n");
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                c.category,
                c.benchmark,
                c.counts.n,
                c.counts.w,
                c.counts.c,
                opt(c.mean_nodes, 3),
                opt(c.pass1_std, 6),
                opt(c.pass1_wf, 6),
                opt(c.pass3_std, 6),
                opt(c.pass3_wf, 6),
            );
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let dash = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
        let mut s = format!("# Report for {}\n\n{} samples.\n\n## Categories\n\n", self.run_id, self.samples);
        s.push_str("| category | n | w | c | pending | mean nodes | k | pass@k | pass@k (wf) | mean pass@k | mean pass@k (wf) |\n");
        s.push_str("|---|---|---|---|---|---|---|---|---|---|---|\n");
        for c in &self.categories {
            for sc in &c.scores {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                    c.category,
                    c.totals.n,
                    c.totals.w,
                    c.totals.c,
                    c.pending,
                    dash(c.mean_nodes),
                    sc.k,
                    dash(sc.standard),
                    dash(sc.conditioned),
                    dash(sc.standard_mean),
                    dash(sc.conditioned_mean),
                );
            }
        }
        s.push_str("\n## Benchmarks\n\n| category | benchmark | n | w | c | mean nodes | pass@1 | pass@1 (wf) | pass@3 | pass@3 (wf) |\n");
        s.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
        for c in &self.cells {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                c.category,
                c.benchmark,
                c.counts.n,
                c.counts.w,
                c.counts.c,
                dash(c.mean_nodes),
                dash(c.pass1_std),
                dash(c.pass1_wf),
                dash(c.pass3_std),
                dash(c.pass3_wf),
            );
        }
        if !self.complexity.is_empty() {
            s.push_str("\n## Node-count complexity (one-sided signed-rank, A > B)\n\n| A | B | pairs | W+ | p |\n|---|---|---|---|---|\n");
            for t in &self.complexity {
                let p = match (&t.error, t.p_value) {
                    (Some(e), _) => e.clone(),
                    (None, p) => opt(p, 4),
                };
                let _ = writeln!(s, "| {} | {} | {} | {} | {} |", t.a, t.b, t.pairs, dash(t.w_plus), p);
            }
        }
        s
    }

    pub fn cell(&self, category: Category, benchmark: Benchmark) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.category == category && c.benchmark == benchmark)
    }

    pub fn category(&self, category: Category) -> Option<&CategoryReport> {
        self.categories.iter().find(|c| c.category == category)
    }
}
