//! Command-line surface. Every subcommand reads JSON documents, writes one
//! JSON report to standard output, and exits 0 on success/pass, 1 on a
//! report-level failure (e.g. a verification mismatch), 2 on usage errors.

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cosetdec::bourgain::BourgainSystem;
use cosetdec::config::RunConfig;
use cosetdec::corpus;
use cosetdec::decompose::{decompose, verify_decomposition};
use cosetdec::freiman::bogolyubov_chang;
use cosetdec::freiman::concentration_system;
use cosetdec::group::Group;
use cosetdec::io::{
    decomposition_from_json, decomposition_to_json, function_from_json, function_to_json,
    set_from_json, system_from_json, system_to_json, DecompositionJson, FunctionJson, SetJson,
};
use cosetdec::lca::{build_finite_model, next_prime, norm_quadrature, FrequencySpec};
use cosetdec::refine::refine_system;
use cosetdec::spectral::{
    additive_energy, additive_energy_fourier, algebra_norm, is_dissociated, riesz_product, spec,
    DEFAULT_DISSOCIATION_CAP,
};

#[derive(Parser)]
#[command(
    name = "cosetdec",
    version,
    about = "Decompose integer-valued functions of small algebra norm on finite abelian groups \
             into signed sums of coset indicators, with testable intermediates."
)]
struct Cli {
    /// JSON configuration file merged into the defaults; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discrete Fourier transform of a function document (inverse with --inverse).
    Dft {
        input: PathBuf,
        #[arg(long)]
        inverse: bool,
    },
    /// Algebra norm (l1 norm of the transform) of a function document.
    Anorm { input: PathBuf },
    /// Large spectrum at threshold rho, as character coordinates.
    Spec {
        input: PathBuf,
        #[arg(long)]
        rho: f64,
    },
    /// Additive energy of an element set, by counting and by the Fourier identity.
    Energy { input: PathBuf },
    /// Riesz product over a dissociated set, with its invariant violations.
    Riesz {
        input: PathBuf,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Build a Bohr-cut system from {"orders", "gammas", "kappas"}.
    Bohr { input: PathBuf },
    /// Search [1/2,1] for a regular dilate of a system document.
    Regularize { input: PathBuf },
    /// Check the system axioms, covering and entropy bounds; exit 1 on failure.
    Axioms { input: PathBuf },
    /// Iteratively refine a system until the smoothing of f is uniformly close.
    Refine {
        input: PathBuf,
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        m: Option<f64>,
    },
    /// Dense-path structure for a set: spectrum, dissociated cover, Bohr system.
    Freiman { input: PathBuf },
    /// System on which the smoothing of f^2 stays large.
    Concentrate {
        input: PathBuf,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        m_cap: Option<usize>,
        #[arg(long)]
        budget: Option<u128>,
    },
    /// Decompose an integer-valued function into signed coset indicators.
    Decompose {
        input: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        m_cap: Option<usize>,
        #[arg(long)]
        budget: Option<u128>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-sum a decomposition against the function; exit 1 with a witness on mismatch.
    Verify {
        input: PathBuf,
        #[arg(long)]
        decomposition: PathBuf,
    },
    /// Finite model of a trigonometric measure on H x Z^d at a prime modulus.
    LcaModel {
        input: PathBuf,
        #[arg(long)]
        modulus: Option<u64>,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Emit seeded random instances as JSON documents.
    Corpus {
        #[arg(long, value_enum)]
        kind: CorpusKind,
        /// Comma-separated cyclic orders, e.g. "2,8".
        #[arg(long, default_value = "64")]
        orders: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusKind {
    /// Uniform complex-valued functions.
    Function,
    /// Signed sums of at most three coset indicators (with witnesses).
    CosetSum,
    /// Bohr-cut systems with at most three characters.
    Bohr,
    /// Random element subsets.
    Set,
}

fn read_to_string(path: &PathBuf) -> Result<String, String> {
    if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("reading standard input: {e}"))?;
        Ok(buf)
    } else {
        fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, String> {
    serde_json::from_str(&read_to_string(path)?)
        .map_err(|e| format!("parsing {}: {e}", path.display()))
}

fn read_function(path: &PathBuf) -> Result<cosetdec::group::GroupFunction, String> {
    let doc: FunctionJson = read_json(path)?;
    function_from_json(&doc).map_err(|e| e.to_string())
}

fn read_system(path: &PathBuf) -> Result<BourgainSystem, String> {
    let doc: Value = read_json(path)?;
    system_from_json(&doc).map_err(|e| e.to_string())
}

fn read_set(path: &PathBuf) -> Result<(Group, Vec<usize>), String> {
    let doc: SetJson = read_json(path)?;
    set_from_json(&doc).map_err(|e| e.to_string())
}

fn emit(value: &Value) {
    println!("{}", serde_json::to_string(value).expect("serializable report"));
}

fn coords_of(g: &Group, xs: &[usize]) -> Vec<Vec<usize>> {
    xs.iter().map(|&x| g.coords(x)).collect()
}

fn load_config(cli: &Cli) -> Result<RunConfig, String> {
    match &cli.config {
        None => Ok(RunConfig::default()),
        Some(path) => read_json(path),
    }
}

/// Ok(0/1) is a rendered report with its exit status; Err is a usage error.
fn run(cli: &Cli) -> Result<u8, String> {
    let mut cfg = load_config(cli)?;
    match &cli.command {
        Command::Dft { input, inverse } => {
            let f = read_function(input)?;
            let out = if *inverse {
                f.idft().map_err(|e| e.to_string())?
            } else {
                f.dft().map_err(|e| e.to_string())?
            };
            emit(&serde_json::to_value(function_to_json(&out)).unwrap());
            Ok(0)
        }
        Command::Anorm { input } => {
            let f = read_function(input)?;
            let a = algebra_norm(&f).map_err(|e| e.to_string())?;
            emit(&json!({ "a_norm": a }));
            Ok(0)
        }
        Command::Spec { input, rho } => {
            let f = read_function(input)?;
            let s = spec(&f, *rho).map_err(|e| e.to_string())?;
            emit(&json!({
                "rho": s.rho,
                "base_norm": s.base_norm,
                "members": coords_of(f.group(), &s.members),
            }));
            Ok(0)
        }
        Command::Energy { input } => {
            let (g, a) = read_set(input)?;
            let count = additive_energy(&g, &a).map_err(|e| e.to_string())?;
            let fourier = additive_energy_fourier(&g, &a).map_err(|e| e.to_string())?;
            emit(&json!({ "energy": count, "fourier": fourier, "set_size": a.len() }));
            Ok(0)
        }
        Command::Riesz { input, cap } => {
            let (g, a) = read_set(input)?;
            let cap = cap.unwrap_or(DEFAULT_DISSOCIATION_CAP);
            let verdict = is_dissociated(&g, &a, cap).map_err(|e| e.to_string())?;
            if !verdict.dissociated {
                emit(&json!({
                    "dissociated": false,
                    "witness": verdict.witness,
                }));
                return Ok(1);
            }
            let rp = riesz_product(&g, &a, cap).map_err(|e| e.to_string())?;
            let violation = rp.max_violation(&g, cap).map_err(|e| e.to_string())?;
            let pass = violation <= cfg.psd_tol.max(cfg.float_eq);
            emit(&json!({
                "dissociated": true,
                "base": coords_of(&g, &rp.base),
                "max_violation": violation,
                "pass": pass,
            }));
            Ok(if pass { 0 } else { 1 })
        }
        Command::Bohr { input } => {
            let doc: Value = read_json(input)?;
            let orders: Vec<usize> = serde_json::from_value(doc["orders"].clone())
                .map_err(|e| format!("orders: {e}"))?;
            let g = Group::new(orders).map_err(|e| e.to_string())?;
            let gamma_coords: Vec<Vec<usize>> = serde_json::from_value(doc["gammas"].clone())
                .map_err(|e| format!("gammas: {e}"))?;
            let kappas: Vec<f64> = serde_json::from_value(doc["kappas"].clone())
                .map_err(|e| format!("kappas: {e}"))?;
            let gammas: Vec<usize> = gamma_coords.iter().map(|c| g.index(c)).collect();
            let s = BourgainSystem::bohr_system(&g, &gammas, &kappas).map_err(|e| e.to_string())?;
            emit(&system_to_json(&s).map_err(|e| e.to_string())?);
            Ok(0)
        }
        Command::Regularize { input } => {
            let s = read_system(input)?;
            let (reg, rep) = s.regularize().map_err(|e| e.to_string())?;
            emit(&json!({
                "lambda": rep.lambda,
                "max_ratio_violation": rep.max_ratio_violation,
                "kappas_tested": rep.kappas_tested,
                "system": system_to_json(&reg).map_err(|e| e.to_string())?,
            }));
            Ok(0)
        }
        Command::Axioms { input } => {
            let s = read_system(input)?;
            let report = s.check_axioms();
            let pass = report.pass;
            emit(&serde_json::to_value(&report).unwrap());
            Ok(if pass { 0 } else { 1 })
        }
        Command::Refine {
            input,
            system,
            epsilon,
            m,
        } => {
            let f = read_function(input)?;
            let s = read_system(system)?;
            let a = algebra_norm(&f).map_err(|e| e.to_string())?;
            let m = m.unwrap_or_else(|| a.ceil().max(1.0));
            if let Some(e) = epsilon {
                cfg.epsilon = Some(*e);
            }
            let eps = cfg.epsilon_for(m);
            let (out, cert) = refine_system(&f, &s, eps, m).map_err(|e| e.to_string())?;
            let pass = cert.pass;
            emit(&json!({
                "system": system_to_json(&out).map_err(|e| e.to_string())?,
                "certificate": serde_json::to_value(&cert).unwrap(),
            }));
            Ok(if pass { 0 } else { 1 })
        }
        Command::Freiman { input } => {
            let (g, a) = read_set(input)?;
            let out = bogolyubov_chang(&g, &a).map_err(|e| e.to_string())?;
            let pass = out.pass;
            emit(&json!({
                "report": serde_json::to_value(&out).unwrap(),
                "system": system_to_json(&out.system).map_err(|e| e.to_string())?,
            }));
            Ok(if pass { 0 } else { 1 })
        }
        Command::Concentrate {
            input,
            m,
            m_cap,
            budget,
        } => {
            let f = read_function(input)?;
            if let Some(c) = m_cap {
                cfg.m_cap = *c;
            }
            if let Some(b) = budget {
                cfg.budget = *b;
            }
            let a = algebra_norm(&f).map_err(|e| e.to_string())?;
            let m = m.unwrap_or_else(|| a.ceil().max(1.0));
            let (s, report) =
                concentration_system(&f, m, cfg.m_cap, cfg.budget).map_err(|e| e.to_string())?;
            emit(&json!({
                "system": system_to_json(&s).map_err(|e| e.to_string())?,
                "report": serde_json::to_value(&report).unwrap(),
            }));
            Ok(0)
        }
        Command::Decompose {
            input,
            epsilon,
            m_cap,
            budget,
            seed,
        } => {
            let f = read_function(input)?;
            if let Some(e) = epsilon {
                cfg.epsilon = Some(*e);
            }
            if let Some(c) = m_cap {
                cfg.m_cap = *c;
            }
            if let Some(b) = budget {
                cfg.budget = *b;
            }
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            let d = decompose(&f, &cfg).map_err(|e| e.to_string())?;
            let exact = d.certificate.exact;
            let doc = decomposition_to_json(f.group(), &d).map_err(|e| e.to_string())?;
            emit(&serde_json::to_value(&doc).unwrap());
            Ok(if exact { 0 } else { 1 })
        }
        Command::Verify {
            input,
            decomposition,
        } => {
            let f = read_function(input)?;
            let doc: DecompositionJson = read_json(decomposition)?;
            let (_, d) = decomposition_from_json(&doc).map_err(|e| e.to_string())?;
            let report = verify_decomposition(&f, &d);
            let exact = report.exact;
            emit(&serde_json::to_value(&report).unwrap());
            Ok(if exact { 0 } else { 1 })
        }
        Command::LcaModel {
            input,
            modulus,
            resolution,
        } => {
            let spec: FrequencySpec = read_json(input)?;
            let n = next_prime(modulus.unwrap_or(10_000));
            let res = resolution.unwrap_or(1 << 14);
            let built = build_finite_model(&spec, n).map_err(|e| e.to_string())?;
            let quad = norm_quadrature(&spec, res).map_err(|e| e.to_string())?;
            emit(&json!({
                "n": built.n,
                "norm_estimate": built.norm_estimate,
                "quadrature": quad.value,
                "quadrature_error_bound": quad.error_bound,
                "resolution": quad.resolution,
                "difference": (built.norm_estimate - quad.value).abs(),
            }));
            Ok(0)
        }
        Command::Corpus {
            kind,
            orders,
            count,
            seed,
        } => {
            let orders: Vec<usize> = orders
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|e| format!("orders: {e}")))
                .collect::<Result<_, _>>()?;
            let g = Group::new(orders).map_err(|e| e.to_string())?;
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            let mut rng = corpus::seeded_rng(cfg.seed);
            let mut docs = Vec::with_capacity(*count);
            for _ in 0..*count {
                docs.push(match kind {
                    CorpusKind::Function => {
                        let f = corpus::random_function(&g, &mut rng);
                        serde_json::to_value(function_to_json(&f)).unwrap()
                    }
                    CorpusKind::CosetSum => {
                        let (f, pieces) = corpus::random_coset_sum(&g, &mut rng, 3);
                        json!({
                            "function": function_to_json(&f),
                            "pieces": pieces.iter().map(|p| json!({
                                "sign": p.sign,
                                "rep": g.coords(p.rep),
                                "generators": coords_of(&g, p.subgroup.generators()),
                            })).collect::<Vec<_>>(),
                        })
                    }
                    CorpusKind::Bohr => {
                        let s = corpus::random_bohr_system(&g, &mut rng, 3);
                        system_to_json(&s).map_err(|e| e.to_string())?
                    }
                    CorpusKind::Set => {
                        let a = corpus::random_subset(&g, &mut rng, g.size());
                        json!({
                            "orders": g.orders(),
                            "elements": coords_of(&g, &a),
                        })
                    }
                });
            }
            emit(&Value::Array(docs));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
