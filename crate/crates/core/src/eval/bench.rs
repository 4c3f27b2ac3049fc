//! Throughput and accuracy sweeps.

use std::fmt::Write as _;
use std::hint::black_box;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::{accuracy_at_k, GroundTruth};
use crate::inverted::{build_plain_index, index_overhead_report, Budget, PartitionedInvertedIndex};
use crate::ivf::{Ell, Exhaustive, IvfIndex, SubAlgorithm};
use crate::topk::TopKResult;
use crate::vector::{HybridVector, VectorDataset};

pub const CSV_HEADER: &str = "system,k,ell_fraction,accuracy,qps,frac_evaluated,repeats";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    IvfExhaustive,
    IvfInverted,
    LinscanBudgeted,
}

impl System {
    pub fn name(self) -> &'static str {
        match self {
            System::IvfExhaustive => "ivf-exhaustive",
            System::IvfInverted => "ivf-inverted",
            System::LinscanBudgeted => "linscan-budgeted",
        }
    }
}

impl std::fmt::Display for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ivf-exhaustive" => Ok(System::IvfExhaustive),
            "ivf-inverted" => Ok(System::IvfInverted),
            "linscan-budgeted" => Ok(System::LinscanBudgeted),
            other => Err(Error::invalid(format!("unknown system '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub k: usize,
    pub ells: Vec<Ell>,
    /// Sweep for budgeted LinScan; empty selects [`default_budgets`] with
    /// as many points as `ells`.
    pub budgets: Vec<Budget>,
    pub repeats: usize,
    pub threads: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            k: 10,
            ells: vec![Ell::Fraction(0.01), Ell::Fraction(0.02), Ell::Fraction(0.05), Ell::Fraction(0.1)],
            budgets: Vec::new(),
            repeats: 1,
            threads: 1,
        }
    }
}

/// `points` budgets growing tenfold from 10µs, the last one unlimited.
pub fn default_budgets(points: usize) -> Vec<Budget> {
    (0..points)
        .map(|j| {
            if j + 1 == points {
                Budget::Unlimited
            } else {
                Budget::Time(Duration::from_micros(10u64.saturating_pow(j as u32 + 1)))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub system: System,
    pub k: usize,
    pub ell: Option<usize>,
    pub ell_fraction: Option<f64>,
    pub budget: Option<Budget>,
    pub accuracy: f64,
    pub qps: f64,
    /// Mean fraction of qualified documents that were scored.
    pub frac_evaluated: f64,
    pub repeats: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IndexSizes {
    pub documents: u64,
    pub partitions: u64,
    pub centroid_floats: u64,
    pub posting_entries: u64,
    pub skip_integers: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub sizes: IndexSizes,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let ell = r.ell_fraction.map(|f| f.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{:.3},{:.6},{}",
                r.system.name(),
                r.k,
                ell,
                r.accuracy,
                r.qps,
                r.frac_evaluated,
                r.repeats
            );
        }
        out
    }
}

/// Indexes a bench run may use. Missing inverted indexes are built on
/// demand from the IVF index.
#[derive(Debug, Clone, Copy)]
pub struct BenchContext<'a> {
    pub ivf: &'a IvfIndex,
    pub inverted: Option<&'a PartitionedInvertedIndex>,
    pub plain: Option<&'a PartitionedInvertedIndex>,
}

struct Outcome {
    top: TopKResult,
    evaluated_qualified: usize,
}

enum Runner<'a> {
    Ivf { ivf: &'a IvfIndex, sub: &'a dyn SubAlgorithmSync, ell: usize, inverted: bool },
    Linscan { plain: &'a PartitionedInvertedIndex, budget: Budget },
}

/// [`SubAlgorithm`] usable from worker threads.
trait SubAlgorithmSync: SubAlgorithm + Sync {}
impl<T: SubAlgorithm + Sync> SubAlgorithmSync for T {}

impl Runner<'_> {
    fn run(&self, q: &HybridVector, k: usize) -> Result<TopKResult> {
        Ok(self.run_counted(q, k, None)?.top)
    }

    fn run_counted(&self, q: &HybridVector, k: usize, qualified: Option<&[bool]>) -> Result<Outcome> {
        match self {
            Runner::Ivf { ivf, sub, ell, inverted } => {
                let r = ivf.retrieve_hybrid(q, k, *ell, *sub)?;
                let evaluated_qualified = match qualified {
                    None => 0,
                    Some(_) if *inverted => r.docs_evaluated,
                    Some(mask) => r
                        .partitions
                        .iter()
                        .flat_map(|&p| ivf.members(p as usize))
                        .filter(|&&id| mask[id as usize])
                        .count(),
                };
                Ok(Outcome { top: r.top, evaluated_qualified })
            }
            Runner::Linscan { plain, budget } => {
                let r = plain.linscan_budgeted(&q.sparse, k, *budget);
                Ok(Outcome { top: r.top, evaluated_qualified: r.stats.docs_evaluated })
            }
        }
    }
}

fn run_all(runner: &Runner<'_>, queries: &VectorDataset, k: usize, threads: usize) -> Result<Vec<TopKResult>> {
    if threads <= 1 {
        queries.iter().map(|q| runner.run(q, k)).collect()
    } else {
        queries.vectors().par_iter().map(|q| runner.run(q, k)).collect()
    }
}

fn fraction(evaluated: usize, qualified: usize) -> f64 {
    if qualified == 0 {
        0.0
    } else {
        evaluated as f64 / qualified as f64
    }
}

/// One row per system and sweep point: ℓ values for the IVF systems,
/// budgets for LinScan. QPS is wall-clock over `repeats` passes of all
/// queries, one query at a time per worker.
pub fn bench(
    ctx: BenchContext<'_>,
    queries: &VectorDataset,
    truth: &GroundTruth,
    systems: &[System],
    config: &BenchConfig,
) -> Result<BenchReport> {
    if truth.len() != queries.len() {
        return Err(Error::invalid(format!(
            "ground truth has {} queries, query set has {}",
            truth.len(),
            queries.len()
        )));
    }
    if config.repeats == 0 || config.k == 0 {
        return Err(Error::invalid("k and repeats must be at least 1"));
    }
    let needs_sparse = systems.iter().any(|s| *s != System::IvfExhaustive);
    if needs_sparse && !queries.is_sparse_only() {
        return Err(Error::invalid("inverted-index systems need sparse-only queries"));
    }
    let ivf = ctx.ivf;
    let owned_plain;
    let plain = match ctx.plain {
        Some(p) => Some(p),
        None if ivf.dataset().is_sparse_only() => {
            owned_plain = build_plain_index(ivf.dataset())?;
            Some(&owned_plain)
        }
        None => None,
    };
    let owned_inverted;
    let inverted = match (ctx.inverted, systems.contains(&System::IvfInverted)) {
        (Some(i), _) => Some(i),
        (None, true) => {
            owned_inverted = crate::inverted::build_partitioned_index(ivf.dataset(), ivf.partitions(), true)?;
            Some(&owned_inverted)
        }
        (None, false) => None,
    };
    // With a dense part every document takes part in the inner product.
    let masks: Vec<Vec<bool>> = match plain {
        Some(plain) => queries.iter().map(|q| plain.qualified_mask(&q.sparse)).collect(),
        None => vec![vec![true; ivf.len()]; queries.len()],
    };
    let qualified: Vec<usize> = masks.iter().map(|m| m.iter().filter(|&&b| b).count()).collect();
    let budgets = if config.budgets.is_empty() { default_budgets(config.ells.len()) } else { config.budgets.clone() };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;

    let count = ivf.len();
    let mut rows = Vec::new();
    for &system in systems {
        match system {
            System::IvfExhaustive | System::IvfInverted => {
                for &ell in &config.ells {
                    let ell_abs = ell.resolve(count)?;
                    let runner = match system {
                        System::IvfExhaustive => Runner::Ivf { ivf, sub: &Exhaustive, ell: ell_abs, inverted: false },
                        _ => Runner::Ivf {
                            ivf,
                            sub: inverted.expect("built above"),
                            ell: ell_abs,
                            inverted: true,
                        },
                    };
                    let mut acc = 0.0;
                    let mut frac = 0.0;
                    for (i, q) in queries.iter().enumerate() {
                        let o = runner.run_counted(q, config.k, Some(&masks[i]))?;
                        acc += accuracy_at_k(&o.top, &truth.results[i], config.k);
                        frac += fraction(o.evaluated_qualified, qualified[i]);
                    }
                    let start = Instant::now();
                    for _ in 0..config.repeats {
                        black_box(pool.install(|| run_all(&runner, queries, config.k, config.threads))?);
                    }
                    let elapsed = start.elapsed().as_secs_f64();
                    let n = queries.len().max(1) as f64;
                    rows.push(BenchRow {
                        system,
                        k: config.k,
                        ell: Some(ell_abs),
                        ell_fraction: Some(ell_abs as f64 / count as f64),
                        budget: None,
                        accuracy: acc / n,
                        qps: n * config.repeats as f64 / elapsed.max(f64::MIN_POSITIVE),
                        frac_evaluated: frac / n,
                        repeats: config.repeats,
                    });
                }
            }
            System::LinscanBudgeted => {
                for &budget in &budgets {
                    let plain = plain.ok_or_else(|| Error::invalid("linscan needs a sparse-only dataset"))?;
                    let runner = Runner::Linscan { plain, budget };
                    let mut acc = 0.0;
                    let mut frac = 0.0;
                    let mut elapsed = 0.0;
                    for _ in 0..config.repeats {
                        let start = Instant::now();
                        let out: Vec<Outcome> = pool.install(|| {
                            if config.threads <= 1 {
                                queries.iter().map(|q| runner.run_counted(q, config.k, None)).collect::<Result<Vec<_>>>()
                            } else {
                                queries
                                    .vectors()
                                    .par_iter()
                                    .map(|q| runner.run_counted(q, config.k, None))
                                    .collect::<Result<Vec<_>>>()
                            }
                        })?;
                        elapsed += start.elapsed().as_secs_f64();
                        for (i, o) in out.iter().enumerate() {
                            acc += accuracy_at_k(&o.top, &truth.results[i], config.k);
                            frac += fraction(o.evaluated_qualified, qualified[i]);
                        }
                    }
                    let n = queries.len().max(1) as f64;
                    let runs = n * config.repeats as f64;
                    rows.push(BenchRow {
                        system,
                        k: config.k,
                        ell: None,
                        ell_fraction: None,
                        budget: Some(budget),
                        accuracy: acc / runs,
                        qps: runs / elapsed.max(f64::MIN_POSITIVE),
                        frac_evaluated: frac / runs,
                        repeats: config.repeats,
                    });
                }
            }
        }
    }
    let mut sizes = IndexSizes {
        documents: count as u64,
        partitions: ivf.num_partitions() as u64,
        centroid_floats: (ivf.model().num_partitions() * ivf.model().width()) as u64,
        ..Default::default()
    };
    if let Some(inv) = inverted {
        let report = index_overhead_report(inv, Some(ivf));
        sizes.posting_entries = report.posting_entries;
        sizes.skip_integers = report.skip_integers;
    }
    Ok(BenchReport { rows, sizes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::synthetic::{gen_synthetic_sparse, SparseSyntheticSpec};
    use crate::ivf::{build_ivf, IvfConfig};
    use crate::sketch::{Transform, TransformKind};
    use std::sync::Arc;

    fn fixture() -> (IvfIndex, VectorDataset, GroundTruth) {
        let spec = SparseSyntheticSpec { docs: 600, queries: 15, dim: 2000, ..Default::default() };
        let (d, q) = gen_synthetic_sparse(&spec).unwrap();
        let t = Transform::build(TransformKind::WeakSinnamon, 2000, 64, 1, 1, true).unwrap();
        let ivf = build_ivf(Arc::new(d), t, &IvfConfig::default()).unwrap();
        let truth = GroundTruth::compute(ivf.dataset(), &q, 10).unwrap();
        (ivf, q, truth)
    }

    #[test]
    fn system_names_round_trip() {
        for s in [System::IvfExhaustive, System::IvfInverted, System::LinscanBudgeted] {
            assert_eq!(s.name().parse::<System>().unwrap(), s);
        }
        assert!("faiss".parse::<System>().is_err());
        let b = default_budgets(4);
        assert_eq!(b[0], Budget::Time(Duration::from_micros(10)));
        assert_eq!(b[3], Budget::Unlimited);
    }

    #[test]
    fn rows_and_determinism() {
        let (ivf, q, truth) = fixture();
        let systems = [System::IvfExhaustive, System::IvfInverted, System::LinscanBudgeted];
        let ctx = || BenchContext { ivf: &ivf, inverted: None, plain: None };
        let one = bench(ctx(), &q, &truth, &systems, &BenchConfig::default()).unwrap();
        assert_eq!(one.rows.len(), 12);
        let csv = one.to_csv();
        assert_eq!(csv.lines().count(), 13);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        let two = bench(ctx(), &q, &truth, &systems, &BenchConfig { repeats: 2, ..Default::default() }).unwrap();
        for (a, b) in one.rows.iter().zip(&two.rows) {
            if a.system != System::LinscanBudgeted || a.budget == Some(Budget::Unlimited) {
                assert_eq!(a.accuracy, b.accuracy);
            }
            assert!((0.0..=1.0).contains(&a.accuracy));
        }
        let last = one.rows.iter().rfind(|r| r.system == System::LinscanBudgeted).unwrap();
        assert_eq!(last.accuracy, 1.0);
        assert!(csv.lines().skip(9).all(|l| l.split(',').nth(2) == Some("")));
        for sys in [System::IvfExhaustive, System::IvfInverted] {
            let rows: Vec<&BenchRow> = one.rows.iter().filter(|r| r.system == sys).collect();
            for (a, b) in rows.iter().zip(rows.iter().skip(4)) {
                assert_eq!(a.accuracy, b.accuracy);
            }
        }
        assert!(one.sizes.skip_integers > 0);
    }

    #[test]
    fn full_sweep_endpoint_is_exact() {
        let (ivf, q, truth) = fixture();
        let cfg = BenchConfig { ells: vec![Ell::Absolute(1), Ell::Fraction(1.0)], ..Default::default() };
        let r = bench(BenchContext { ivf: &ivf, inverted: None, plain: None }, &q, &truth, &[System::IvfInverted], &cfg).unwrap();
        assert_eq!(r.rows[1].accuracy, 1.0);
        assert!(r.rows[0].accuracy <= r.rows[1].accuracy);
        assert!((r.rows[1].frac_evaluated - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_truth() {
        let (ivf, q, mut truth) = fixture();
        truth.results.pop();
        let ctx = BenchContext { ivf: &ivf, inverted: None, plain: None };
        assert!(bench(ctx, &q, &truth, &[System::IvfExhaustive], &BenchConfig::default()).is_err());
    }
}
