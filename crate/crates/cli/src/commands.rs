use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mvcode::analysis::{self, emit_figure_data, figure_csv, Figure, FigureRanges, Fraction, Memory, StorageMode};
use mvcode::chain::{assemble_result, oracle_chain_multiply, partition, random_chain, BlockChain, PartitionScheme};
use mvcode::decoding::{decode_grid, EvaluationGrid};
use mvcode::encoding::{encode_task, worker_compute, SchemeKind};
use mvcode::field::{FieldMatrix, PrimeField, MERSENNE_31};
use mvcode::placement::{plan_dedicated, plan_shared, GridConvention, StoragePlan};
use mvcode::sim::{runs_csv, summarize, summary_csv, sweep, LatencyModel};
use mvcode::Error as CodeError;

use crate::config::Config;
use crate::values::{symmetric_fraction, Convention, FractionList, IntList, Latency, MemoryList};
use crate::{AnalyzeArgs, ChainArgs, CommonArgs, RoundtripArgs, SimulateArgs, OUT_DIR_ENV};

/// A correctness or decodability failure, as opposed to bad input.
#[derive(Debug)]
pub struct Failure(pub String);

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failure {}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Failure>().is_some() {
        return 1;
    }
    match err.downcast_ref::<CodeError>() {
        Some(
            CodeError::NeverDecodable { .. }
            | CodeError::DecodeMismatch
            | CodeError::SingularSystem { .. }
            | CodeError::ZeroInverse,
        ) => 1,
        _ => 2,
    }
}

const ANALYZE_KEYS: &[&str] = &["figure", "table", "m", "p", "n", "out-dir"];
const CHAIN_KEYS: &[&str] = &["scheme", "parts", "dims", "modulus", "seed", "grid-convention", "out-dir"];
const ROUNDTRIP_KEYS: &[&str] = &["matrix", "dump-dir"];
const SIMULATE_KEYS: &[&str] = &["memory", "workers", "fractions", "latency", "seeds"];

fn out_dir(cfg: &Config, common: &CommonArgs) -> Result<Option<PathBuf>> {
    Ok(cfg.pick(common.out_dir.clone(), "out-dir")?.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)))
}

fn write_output(dir: Option<&Path>, name: &str, body: &str) -> Result<()> {
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let cfg = Config::load(args.common.config.as_deref(), ANALYZE_KEYS)?;
    let figure = cfg.pick(args.figure, "figure")?;
    let table = if figure.is_some() && args.table.is_none() { None } else { cfg.pick(args.table, "table")? };
    let which: Vec<Figure> = match (figure, table) {
        (Some(_), Some(_)) => bail!("choose either --figure or --table"),
        (Some(2), None) => vec![Figure::Fig2],
        (Some(3), None) => vec![Figure::Fig3],
        (Some(4), None) => vec![Figure::Fig4],
        (None, Some(1)) => vec![Figure::Table1],
        (None, None) => vec![Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Table1],
        (Some(f), None) => bail!("no figure {f} (available: 2, 3, 4)"),
        (None, Some(t)) => bail!("no table {t} (available: 1)"),
    };
    let ms = cfg.pick(args.m.clone(), "m")?;
    let ps = cfg.pick(args.p.clone(), "p")?;
    let ns = cfg.pick(args.n.clone(), "n")?;
    let dir = out_dir(&cfg, &args.common)?;
    for fig in which {
        let (default_p, default_n): (Vec<u64>, Vec<u64>) = match fig {
            Figure::Fig2 => ((2..=50).collect(), vec![]),
            Figure::Fig3 => ((2..=50).collect(), vec![5]),
            Figure::Fig4 => (vec![5], (1..=50).collect()),
            Figure::Table1 => (vec![2, 5, 10, 50], vec![5, 50]),
        };
        let ranges = FigureRanges {
            ms: ms.as_ref().map_or(vec![5, 10], IntList::usizes),
            ps: ps.as_ref().map_or(default_p, |l| l.0.clone()),
            ns: if fig == Figure::Fig2 { vec![] } else { ns.as_ref().map_or(default_n, |l| l.0.clone()) },
        };
        let rows = emit_figure_data(fig, &ranges)?;
        let name = match fig {
            Figure::Fig2 => "fig2.csv",
            Figure::Fig3 => "fig3.csv",
            Figure::Fig4 => "fig4.csv",
            Figure::Table1 => "table1.csv",
        };
        write_output(dir.as_deref(), name, &figure_csv(&rows))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------

struct ChainSetup {
    kinds: Vec<SchemeKind>,
    parts: Vec<usize>,
    dims: Option<Vec<usize>>,
    field: PrimeField,
    seed: u64,
    convention: GridConvention,
}

fn chain_setup(cfg: &Config, args: &ChainArgs) -> Result<ChainSetup> {
    let scheme_text = cfg.pick(args.scheme.clone(), "scheme")?.ok_or_else(|| anyhow!("--scheme is required"))?;
    let kinds = scheme_text
        .split(',')
        .map(|s| s.trim().parse::<SchemeKind>())
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let parts = cfg.pick(args.parts.clone(), "parts")?.ok_or_else(|| anyhow!("--parts is required"))?.usizes();
    let dims = cfg.pick(args.dims.clone(), "dims")?.map(|d| d.usizes());
    let field = PrimeField::new(cfg.or(args.modulus, "modulus", MERSENNE_31)?)?;
    let seed = cfg.or(args.seed, "seed", 0)?;
    let convention = cfg.or(args.grid_convention, "grid-convention", Convention::Minus)?.into();
    Ok(ChainSetup { kinds, parts, dims, field, seed, convention })
}

impl ChainSetup {
    fn scheme(&self) -> Result<PartitionScheme> {
        let dims = self.dims.clone().unwrap_or_else(|| self.parts.iter().map(|p| 2 * p).collect());
        Ok(PartitionScheme::new(dims, self.parts.clone())?)
    }
}

fn load_fixtures(paths: &[PathBuf], field: &PrimeField) -> Result<Vec<FieldMatrix>> {
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            FieldMatrix::from_text(&text, field).with_context(|| format!("parsing {}", p.display()))
        })
        .collect()
}

fn fmt_list<T: fmt::Display>(v: &[T]) -> String {
    let items: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("[{}]", items.join(", "))
}

pub fn roundtrip(args: &RoundtripArgs) -> Result<()> {
    let known: Vec<&str> = CHAIN_KEYS.iter().chain(ROUNDTRIP_KEYS).copied().collect();
    let cfg = Config::load(args.common.config.as_deref(), &known)?;
    let setup = chain_setup(&cfg, &args.chain)?;
    let [kind] = setup.kinds[..] else { bail!("roundtrip takes a single scheme") };
    let fixture_paths: Vec<PathBuf> = if args.matrices.is_empty() {
        cfg.pick(None::<String>, "matrix")?
            .map(|s| s.split(',').map(|p| PathBuf::from(p.trim())).collect())
            .unwrap_or_default()
    } else {
        args.matrices.clone()
    };
    let field = setup.field;
    let chain: BlockChain = if fixture_paths.is_empty() {
        let scheme = setup.scheme()?;
        random_chain(&scheme, &field, &mut ChaCha8Rng::seed_from_u64(setup.seed))
    } else {
        let matrices = load_fixtures(&fixture_paths, &field)?;
        partition(&matrices, &setup.parts)?
    };
    let scheme = chain.scheme().clone();

    let plan = plan_shared(kind, &scheme, 1, setup.seed, setup.convention, &field)?;
    let grid = EvaluationGrid::new(kind, &scheme, plan.assignments()[0].axis_points.clone())?;
    let dump = cfg.pick(args.dump_dir.clone(), "dump-dir")?;
    if let Some(dir) = &dump {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut evaluations = HashMap::new();
    for (k, point) in grid.points().into_iter().enumerate() {
        let task = encode_task(&chain, kind, &point, &field)?;
        if let Some(dir) = &dump {
            fs::write(dir.join(format!("task_{k:05}.txt")), task.to_text())?;
        }
        evaluations.insert(point, worker_compute(&task, &field)?);
    }
    let decoded = assemble_result(&decode_grid(&grid, &evaluations, &scheme, &field)?)?;
    let expected = oracle_chain_multiply(&chain.reassemble(), &field)?;
    if let Some(dir) = &dump {
        fs::write(dir.join("product.txt"), decoded.to_text())?;
    }

    let formula = match kind {
        SchemeKind::Mv1 => analysis::mv1_metrics(&scheme, &StorageMode::Shared)?,
        SchemeKind::Mv2 => analysis::mv2_metrics(&scheme, &StorageMode::Shared)?,
    };
    let uv = analysis::uv_metrics(&scheme);
    let used = grid.trimmed_points().len();
    let pass = decoded == expected;
    let mut report = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(report, "scheme {kind}, parts {}, dims {}", fmt_list(scheme.parts()), fmt_list(scheme.dims()));
    let _ = writeln!(report, "modulus {}, seed {}", field.modulus(), setup.seed);
    let _ = writeln!(report, "grid axes {}, evaluations computed {}", fmt_list(plan.axis_sizes()), evaluations.len());
    let _ = writeln!(report, "R_th achieved {used}, formula {}, univariate {}", formula.recovery_threshold, uv.recovery_threshold);
    let storage: Vec<String> = formula.storage_thresholds.iter().map(ToString::to_string).collect();
    let _ = writeln!(report, "S_th achieved {}, formula [{}]", fmt_list(&plan.storage_thresholds()), storage.join(", "));
    let _ = writeln!(report, "{}", if pass { "PASS" } else { "FAIL" });
    write_output(out_dir(&cfg, &args.common)?.as_deref(), "roundtrip.txt", &report)?;
    if !pass {
        return Err(Failure("decoded product differs from direct multiplication".into()).into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------

fn plan_id(kind: SchemeKind, memory: Memory, workers: usize) -> String {
    format!("{kind}-{}-n{workers}", memory.as_str())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let known: Vec<&str> = CHAIN_KEYS.iter().chain(SIMULATE_KEYS).copied().collect();
    let cfg = Config::load(args.common.config.as_deref(), &known)?;
    let setup = chain_setup(&cfg, &args.chain)?;
    let scheme = setup.scheme()?;
    let memories = cfg.or(args.memory.clone(), "memory", MemoryList(vec![Memory::Shared]))?.0;
    let workers = cfg.or(args.workers.clone(), "workers", IntList(vec![4]))?.usizes();
    let fractions: Option<FractionList> = cfg.pick(args.fractions.clone(), "fractions")?;
    let model: LatencyModel = cfg.or(args.latency, "latency", Latency(LatencyModel::default()))?.0;
    let seeds = cfg.or(args.seeds.clone(), "seeds", IntList((0..20).collect()))?.0;
    if workers.contains(&0) {
        bail!("worker counts must be positive");
    }

    let field = setup.field;
    let mut plans: Vec<(String, StoragePlan)> = Vec::new();
    for &kind in &setup.kinds {
        let vars = kind.num_variables(scheme.m());
        for &memory in &memories {
            for &n in &workers {
                let plan = match memory {
                    Memory::Shared => plan_shared(kind, &scheme, n, setup.seed, setup.convention, &field)?,
                    Memory::Dedicated => {
                        let s: Vec<Fraction> = match &fractions {
                            Some(FractionList(v)) if v.len() == 1 => vec![v[0]; vars],
                            Some(FractionList(v)) => v.clone(),
                            None => vec![
                                symmetric_fraction(n as u64, vars).ok_or_else(|| anyhow!(
                                    "N = {n} has no rational {vars}-th root; pass --fractions explicitly"
                                ))?;
                                vars
                            ],
                        };
                        plan_dedicated(kind, &scheme, n, &s, setup.seed, &field)?
                    }
                };
                plans.push((plan_id(kind, memory, n), plan));
            }
        }
    }

    let records = sweep(&plans, &model, &seeds, &field)?;
    let dir = out_dir(&cfg, &args.common)?;
    write_output(dir.as_deref(), "runs.csv", &runs_csv(&records))?;
    write_output(dir.as_deref(), "summary.csv", &summary_csv(&summarize(&records)))?;
    let failed: Vec<String> = records
        .iter()
        .filter(|r| r.recovery_time.is_none())
        .map(|r| format!("{} seed {}", r.plan_id, r.seed))
        .collect();
    if !failed.is_empty() {
        return Err(Failure(format!("never decodable: {}", failed.join(", "))).into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Failure("x".into()).into()), 1);
        assert_eq!(exit_code(&CodeError::NeverDecodable { collected: 1, rank: 0, needed: 2 }.into()), 1);
        assert_eq!(exit_code(&CodeError::DecodeMismatch.into()), 1);
        assert_eq!(exit_code(&CodeError::InfeasiblePlan { product: "1/2".into() }.into()), 2);
        assert_eq!(exit_code(&anyhow!("bad flag")), 2);
    }
}
