mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mhkit_core::certificates::{
    eval_cat_gluing, eval_cat_gluing_eps_indep, eval_correlation_blowup, eval_dim_power2, eval_history_state,
    eval_mi_bound, CertificateKind,
};
use mhkit_core::circuit::{account_with_budget, check_relations, mh_decompose, parse_circuit};
use mhkit_core::codes::{
    cat_history_spectrum, code_422, code_513, disentangle_product_check, distance_bruteforce, distance_sandwich_check,
    groundspace, infectiousness_check, robustness_params, CodeSpace, LocalHamiltonian,
};
use mhkit_core::compile::{
    build_exact_gadget, build_threshold_gadget, clifford_to_fanout, compile_tc0, teleport_parallelize, Tc0Spec,
};
use mhkit_core::entropy::{build_family, mutual_info_dense, mutual_info_stabilizer, StateFamily};
use mhkit_core::lightcone::{blowup, find_disjoint_pair, DoubleCone, LightconeIndex};
use mhkit_core::simulate::{dense_run, estimate_local_observable_a1cq, BranchState, StateVector, DENSE_CAP};
use mhkit_core::suites::{run_suite, DEFAULT_SEED, SUITES};
use mhkit_core::{LayeredCircuit, MhError, PauliString, Region, StabilizerTableau};

use output::{object, render, Format};

#[derive(Parser)]
#[command(name = "mhkit", version, about = "Analysis, simulation, certification and compilation of magic-hierarchy circuits")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Backward / forward light cones, blowup and disjoint double-cone pairs.
    Lightcone(LightconeArgs),
    /// Complexity accounting and block decomposition.
    Account(AccountArgs),
    /// Simulate a circuit on |0…0⟩, or estimate a local observable of a Clifford-then-shallow state.
    Sim(SimArgs),
    /// Mutual information of family states or circuit outputs.
    Mi(MiArgs),
    /// Evaluate a lower-bound certificate.
    Certify(CertifyArgs),
    /// Teleportation, fanout and gadget compilers.
    Compile(CompileArgs),
    /// Code distances, containment checks and Hamiltonian groundspaces.
    Codes(CodesArgs),
    /// Run a seeded acceptance suite ("all" runs every suite).
    Suite(SuiteArgs),
}

#[derive(Args)]
struct LightconeArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// Comma-separated qubits; ranges like 2-5 are allowed.
    #[arg(long)]
    region: Option<String>,
    /// Also search for a pair with disjoint double cones.
    #[arg(long, value_enum)]
    pair: Option<PairMode>,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum PairMode {
    BackOfForward,
    ForwardOfBack,
}

#[derive(Args)]
struct AccountArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// Largest depth of a constant-depth block.
    #[arg(long, default_value_t = 1)]
    budget: usize,
    /// Include the block decomposition and violated relations.
    #[arg(long)]
    check: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Backend {
    Auto,
    Dense,
    Tableau,
    Branch,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long, value_enum, default_value_t = Backend::Auto)]
    backend: Backend,
    /// Pauli string over all qubits whose expectation is reported.
    #[arg(long)]
    pauli: Option<String>,
    /// Largest number of amplitudes listed.
    #[arg(long, default_value_t = 64)]
    top: usize,
    /// Constant-depth circuit applied after the Clifford `--circuit`; switches to the light-cone estimator.
    #[arg(long)]
    qnc0: Option<PathBuf>,
    /// Region of the local observable (estimator mode).
    #[arg(long)]
    region: Option<String>,
    /// Pauli string on the region (estimator mode).
    #[arg(long)]
    observable: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum FamilyName {
    BiasedCat,
    WState,
    CatHistory,
}

#[derive(Args)]
struct MiArgs {
    #[arg(long, value_enum)]
    family: Option<FamilyName>,
    /// One or more comma-separated γ values for biased_cat.
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Circuit whose output on |0…0⟩ is analyzed.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Comma-separated stabilizer generators, e.g. XX,ZZ.
    #[arg(long)]
    stabilizers: Option<String>,
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    kind: String,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum CompileMode {
    Teleport,
    Fanout,
    Exact,
    Threshold,
    Tc0,
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long, value_enum)]
    mode: CompileMode,
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Layers per teleportation stage.
    #[arg(long, default_value_t = 1)]
    stage: usize,
    /// Gadget fan-in.
    #[arg(long)]
    m: Option<usize>,
    /// k for exact gadgets, t for threshold gadgets.
    #[arg(long)]
    param: Option<usize>,
    /// Restore all ancillas to |0⟩.
    #[arg(long)]
    clean: bool,
    /// Threshold-circuit description.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Where to write the emitted circuit (.mhq).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum CodeAction {
    Distance,
    Sandwich,
    Infectiousness,
    Groundspace,
    Robustness,
    Disentangle,
    History,
}

#[derive(Args)]
struct CodesArgs {
    #[arg(long, value_enum)]
    action: CodeAction,
    /// Named code: 422 or 513.
    #[arg(long)]
    code: Option<String>,
    /// Comma-separated stabilizer generators.
    #[arg(long)]
    stabilizers: Option<String>,
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    #[arg(long)]
    circuit: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    ell: usize,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    region: Option<String>,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long)]
    name: String,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

enum Failure {
    Core(MhError),
    Io(String),
    SuiteFailed(Value),
}

impl From<MhError> for Failure {
    fn from(e: MhError) -> Self {
        Failure::Core(e)
    }
}

type Out = Result<Value, Failure>;

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_circuit(path: &Path) -> Result<LayeredCircuit, Failure> {
    Ok(parse_circuit(&read(path)?)?)
}

fn need<T>(name: &str, v: Option<T>) -> Result<T, MhError> {
    v.ok_or_else(|| MhError::invalid(format!("missing --{name}")))
}

fn stabilizers(text: &str) -> Result<StabilizerTableau, MhError> {
    let gens: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    StabilizerTableau::from_strs(&gens)
}

fn lightcone(a: &LightconeArgs) -> Out {
    let c = load_circuit(&a.circuit)?;
    let n = c.n();
    let mut v = object(vec![("n", json!(n)), ("depth", json!(c.depth())), ("blowup", json!(blowup(&c)))]);
    if let Some(r) = &a.region {
        let s = Region::parse(r, n)?;
        let idx = LightconeIndex::new(&c);
        v["region"] = to_value(&s);
        v["back"] = to_value(&idx.back_of(&s));
        v["forward"] = to_value(&idx.forward_of(&s));
    }
    if let Some(mode) = a.pair {
        let mode = match mode {
            PairMode::BackOfForward => DoubleCone::BackOfForward,
            PairMode::ForwardOfBack => DoubleCone::ForwardOfBack,
        };
        v["pair"] = to_value(&find_disjoint_pair(&c, &Region::full(n), mode)?);
    }
    Ok(v)
}

fn account_cmd(a: &AccountArgs) -> Out {
    let c = load_circuit(&a.circuit)?;
    let r = account_with_budget(&c, a.budget)?;
    if !a.check {
        return Ok(to_value(&r));
    }
    let d = mh_decompose(&c, a.budget)?;
    Ok(json!({ "report": r, "decomposition": d, "violations": check_relations(&r) }))
}

fn amplitudes(psi: &StateVector, top: usize) -> Value {
    let n = psi.n();
    let rows: Vec<Value> = psi
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 1e-24)
        .take(top)
        .map(|(i, a)| {
            let bits: String = (0..n).map(|q| if i >> q & 1 == 1 { '1' } else { '0' }).collect();
            json!({ "index": i, "bits": bits, "re": a.re, "im": a.im, "probability": a.norm_sqr() })
        })
        .collect();
    Value::Array(rows)
}

fn sim(a: &SimArgs) -> Out {
    let c = load_circuit(&a.circuit)?;
    let n = c.n();
    if let Some(q) = &a.qnc0 {
        let q = load_circuit(q)?;
        let s = Region::parse(&need("region", a.region.clone())?, n)?;
        let p: PauliString = need("observable", a.observable.clone())?.parse()?;
        if p.n() != s.len() {
            return Err(MhError::Dimension(format!("observable on {} qubits, region has {}", p.n(), s.len())).into());
        }
        return Ok(to_value(&estimate_local_observable_a1cq(&c, &q, &p.to_dense()?, &s)?));
    }
    let pauli: Option<PauliString> = a.pauli.as_deref().map(str::parse).transpose()?;
    if let Some(p) = &pauli {
        if p.n() != n {
            return Err(MhError::Dimension(format!("Pauli on {} qubits, circuit on {n}", p.n())).into());
        }
    }
    let backend = match a.backend {
        Backend::Auto if c.is_clifford() && !c.has_measurement() => Backend::Tableau,
        Backend::Auto if n <= DENSE_CAP => Backend::Dense,
        Backend::Auto => Backend::Branch,
        b => b,
    };
    let mut v = object(vec![("n", json!(n))]);
    match backend {
        Backend::Tableau => {
            let t = StabilizerTableau::from_circuit(&c)?;
            v["backend"] = json!("tableau");
            v["stabilizers"] = json!(t.generators().iter().map(|g| g.to_string()).collect::<Vec<_>>());
            if let Some(p) = &pauli {
                let e = match t.contains(p) {
                    Some(true) => 1.0,
                    Some(false) => -1.0,
                    None => 0.0,
                };
                v["expectation"] = json!(e);
            }
        }
        Backend::Dense | Backend::Branch => {
            let psi = if backend == Backend::Dense {
                dense_run(&c, &StateVector::zeros(n)?)?
            } else {
                let mut b = BranchState::zeros(n);
                b.run(&c)?;
                b.to_statevector()?
            };
            v["backend"] = json!(if backend == Backend::Dense { "dense" } else { "branch" });
            v["amplitudes"] = amplitudes(&psi, a.top);
            if let Some(p) = &pauli {
                v["expectation"] = json!(psi.expectation_pauli(p)?);
            }
        }
        Backend::Auto => unreachable!(),
    }
    Ok(v)
}

fn mi(a: &MiArgs) -> Out {
    if let Some(f) = a.family {
        let n = need("n", a.n)?;
        let gammas: Vec<Option<f64>> = match f {
            FamilyName::BiasedCat if a.gamma.is_empty() => return Err(MhError::invalid("biased_cat needs --gamma").into()),
            FamilyName::BiasedCat => a.gamma.iter().map(|&g| Some(g)).collect(),
            _ => vec![None],
        };
        let mut rows = Vec::new();
        for g in gammas {
            let fam = match f {
                FamilyName::BiasedCat => StateFamily::BiasedCat { gamma: g.unwrap_or(0.0) },
                FamilyName::WState => StateFamily::WState,
                FamilyName::CatHistory => StateFamily::CatHistory,
            };
            let total = fam.qubits(n);
            let (ra, rb) = (Region::parse(&a.a, total)?, Region::parse(&a.b, total)?);
            let psi = build_family(&fam, n)?;
            let v = mutual_info_dense(&psi, &ra, &rb)?;
            rows.push(json!({
                "family": fam.name(),
                "n": n,
                "gamma": g,
                "a": ra,
                "b": rb,
                "value": v.value,
                "analytic": fam.analytic_mi(n, &ra, &rb)?,
            }));
        }
        return Ok(if rows.len() == 1 { rows.remove(0) } else { json!({ "rows": rows }) });
    }
    let t = match (&a.stabilizers, &a.circuit) {
        (Some(s), _) => Some(stabilizers(s)?),
        (None, Some(p)) => {
            let c = load_circuit(p)?;
            if c.is_clifford() && !c.has_measurement() {
                Some(StabilizerTableau::from_circuit(&c)?)
            } else {
                let (ra, rb) = (Region::parse(&a.a, c.n())?, Region::parse(&a.b, c.n())?);
                let psi = dense_run(&c, &StateVector::zeros(c.n())?)?;
                let v = mutual_info_dense(&psi, &ra, &rb)?;
                return Ok(json!({ "route": "dense", "a": ra, "b": rb, "value": v.value }));
            }
        }
        (None, None) => return Err(MhError::invalid("give --family, --circuit or --stabilizers").into()),
    };
    let t = t.expect("set above");
    let (ra, rb) = (Region::parse(&a.a, t.n())?, Region::parse(&a.b, t.n())?);
    let v = mutual_info_stabilizer(&t, &ra, &rb)?;
    Ok(json!({ "route": "stabilizer", "a": ra, "b": rb, "value": v.value, "exact_integer": v.exact_integer }))
}

fn certify(a: &CertifyArgs) -> Out {
    let cert = match CertificateKind::parse(&a.kind)? {
        CertificateKind::MiBound => eval_mi_bound(
            need("alpha", a.alpha)?,
            need("beta", a.beta)?,
            need("s", a.s)?,
            need("eps", a.eps)?,
            need("a", a.a)?,
            need("n", a.n)?,
        )?,
        CertificateKind::CatGluing => {
            eval_cat_gluing(need("alpha", a.alpha)?, need("beta", a.beta)?, need("eps", a.eps)?, need("n", a.n)?)?
        }
        CertificateKind::CatGluingEpsIndep => eval_cat_gluing_eps_indep(
            need("alpha", a.alpha)?,
            need("beta", a.beta)?,
            need("eps", a.eps)?,
            need("n", a.n)?,
        )?,
        CertificateKind::DimPower2 => eval_dim_power2(
            need("ell", a.ell)?,
            need("m", a.m)?,
            need("gap", a.gap)?,
            need("d", a.d)?,
            need("dim", a.dim)?,
            need("n", a.n)?,
        )?,
        CertificateKind::CorrelationBlowup => eval_correlation_blowup(
            need("d", a.d)?,
            need("t", a.t)?,
            need("ell", a.ell)?,
            need("n", a.n)?,
            need("gamma", a.gamma)?,
            need("delta", a.delta)?,
        )?,
        CertificateKind::HistoryState => eval_history_state(need("n", a.n)?, need("gap", a.gap)?)?,
    };
    Ok(to_value(&cert))
}

fn write_out(path: &Option<PathBuf>, c: &LayeredCircuit, v: &mut Value) -> Result<(), Failure> {
    if let Some(p) = path {
        fs::write(p, c.to_mhq()).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
        v["circuit_file"] = json!(p.display().to_string());
    }
    Ok(())
}

fn compile(a: &CompileArgs) -> Out {
    let circuit = || -> Result<LayeredCircuit, Failure> { load_circuit(&need("circuit", a.circuit.clone())?) };
    match a.mode {
        CompileMode::Teleport => {
            let c = circuit()?;
            let (p, map) = teleport_parallelize(&c, a.stage)?;
            let rows: Vec<String> = (0..map.matrix.rows())
                .map(|r| (0..map.matrix.cols()).map(|k| if map.matrix.get(r, k) { '1' } else { '0' }).collect())
                .collect();
            let mut v = json!({
                "n": c.n(),
                "stages": map.stages,
                "layers_per_stage": map.layers_per_stage,
                "total_qubits": p.n,
                "measured": p.total_measured(),
                "quantum_depth": p.quantum_depth(),
                "output": p.output,
                "correction_rows": rows,
            });
            write_out(&a.out, &p.rounds[0].block, &mut v)?;
            Ok(v)
        }
        CompileMode::Fanout => {
            let c = circuit()?;
            let comp = clifford_to_fanout(&c)?;
            let mut v = to_value(&comp);
            write_out(&a.out, &comp.circuit, &mut v)?;
            Ok(v)
        }
        CompileMode::Exact | CompileMode::Threshold => {
            let (m, k) = (need("m", a.m)?, need("param", a.param)?);
            let r = match a.mode {
                CompileMode::Exact => build_exact_gadget(m, k, a.clean)?,
                _ => build_threshold_gadget(m, k, a.clean)?,
            };
            let mut v = to_value(&r);
            write_out(&a.out, &r.circuit, &mut v)?;
            Ok(v)
        }
        CompileMode::Tc0 => {
            let spec = Tc0Spec::parse(&read(&need("spec", a.spec.clone())?)?)?;
            let comp = compile_tc0(&spec, a.clean)?;
            let mut v = to_value(&comp);
            write_out(&a.out, &comp.circuit, &mut v)?;
            Ok(v)
        }
    }
}

fn code_space(a: &CodesArgs) -> Result<CodeSpace, Failure> {
    if let Some(name) = &a.code {
        let t = match name.as_str() {
            "422" => code_422(),
            "513" => code_513(),
            other => return Err(MhError::invalid(format!("unknown code '{other}' (422 or 513)")).into()),
        };
        return Ok(CodeSpace::from_stabilizer(&t)?);
    }
    if let Some(s) = &a.stabilizers {
        return Ok(CodeSpace::from_stabilizer(&stabilizers(s)?)?);
    }
    if let Some(h) = &a.hamiltonian {
        return Ok(groundspace(&LocalHamiltonian::parse(&read(h)?)?)?.code);
    }
    Err(MhError::invalid("give --code, --stabilizers or --hamiltonian").into())
}

fn hamiltonian(a: &CodesArgs) -> Result<LocalHamiltonian, Failure> {
    Ok(LocalHamiltonian::parse(&read(&need("hamiltonian", a.hamiltonian.clone())?)?)?)
}

fn codes(a: &CodesArgs) -> Out {
    match a.action {
        CodeAction::Distance => {
            let code = code_space(a)?;
            let d = distance_bruteforce(&code)?;
            Ok(json!({ "n": code.n(), "dim": code.dim(), "distance": d, "provenance": code.provenance() }))
        }
        CodeAction::Sandwich => {
            let code = code_space(a)?;
            let u = load_circuit(&need("circuit", a.circuit.clone())?)?;
            Ok(to_value(&distance_sandwich_check(&code, &u)?))
        }
        CodeAction::Infectiousness => {
            let phi = stabilizers(&need("stabilizers", a.stabilizers.clone())?)?;
            let u = load_circuit(&need("circuit", a.circuit.clone())?)?;
            Ok(to_value(&infectiousness_check(&phi, &u, a.ell)?))
        }
        CodeAction::Groundspace => {
            let h = hamiltonian(a)?;
            let g = groundspace(&h)?;
            Ok(json!({ "hamiltonian": h.summary(), "groundspace": g }))
        }
        CodeAction::Robustness => {
            let h = hamiltonian(a)?;
            Ok(to_value(&robustness_params(&h, need("eps", a.eps)?)?))
        }
        CodeAction::Disentangle => {
            let h = hamiltonian(a)?;
            let m = Region::parse(&need("region", a.region.clone())?, h.n())?;
            Ok(to_value(&disentangle_product_check(&h, &m)?))
        }
        CodeAction::History => Ok(to_value(&cat_history_spectrum(need("n", a.n)?)?)),
    }
}

fn suite(a: &SuiteArgs) -> Out {
    let names: Vec<&str> =
        if a.name == "all" { SUITES.iter().map(|(s, _)| *s).collect() } else { vec![a.name.as_str()] };
    let mut reports = Vec::new();
    for name in names {
        reports.push(run_suite(name, a.trials, a.seed)?);
    }
    let all = reports.iter().all(|r| r.passed);
    let v = if reports.len() == 1 { to_value(&reports[0]) } else { json!({ "rows": reports, "passed": all }) };
    if all {
        Ok(v)
    } else {
        Err(Failure::SuiteFailed(v))
    }
}

fn configure_threads() {
    if let Some(k) = std::env::var("MHKIT_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|&k| k > 0) {
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
}

fn emit(cli: &Cli, v: Value) -> Result<(), String> {
    let text = render(v, cli.format);
    match &cli.output {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    let result = match &cli.command {
        Command::Lightcone(a) => lightcone(a),
        Command::Account(a) => account_cmd(a),
        Command::Sim(a) => sim(a),
        Command::Mi(a) => mi(a),
        Command::Certify(a) => certify(a),
        Command::Compile(a) => compile(a),
        Command::Codes(a) => codes(a),
        Command::Suite(a) => suite(a),
    };
    let (value, code) = match result {
        Ok(v) => (Some(v), 0),
        Err(Failure::SuiteFailed(v)) => (Some(v), 1),
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            (None, if e.is_feasibility() { 3 } else { 2 })
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            (None, 2)
        }
    };
    if let Some(v) = value {
        if let Err(msg) = emit(&cli, v) {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code)
}
