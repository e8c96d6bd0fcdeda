use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use forge_core::bench::{
    estimate_resources, family_code, fit_subthreshold, fit_threshold, lfr_from_counts, plot_sweep_svg, read_sweep_csv,
    run_memory_sweep, write_json, write_sweep_csv, FamilyModel, FitPoint, Idling, SweepConfig,
};
use forge_core::circuit::{add_noise, memory_experiment, Circuit, MemoryBasis};
use forge_core::codes::{builtin_lp_code, hgp, repetition_code, select_classical_code, CssCode};
use forge_core::decode::{
    build_decoding_graph, logical_failure, BpConfig, BpVariant, DecodingGraph, OsdConfig, WindowConfig, WindowedDecoder,
};
use forge_core::motion::{plan_1d, rearrangement_time_bound, validate_schedule, MotionParams};
use forge_core::sim::{read_b8, sample};
use forge_core::surgery::{
    ancilla_patch, merged_patch, per_cycle_lfr, teleportation_experiment, GeneratorFamily, LogicalOperator, MergedCode,
    PauliType, TeleportConfig, TeleportInput,
};

#[derive(Parser)]
#[command(name = "forge", version, about = "qLDPC memory, surgery and benchmarking tools")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build or check CSS codes.
    #[command(subcommand)]
    Code(CodeCmd),
    /// Generate a noisy memory-experiment circuit.
    Circuit(CircuitArgs),
    /// Sample detector and observable outcomes.
    Sim(SimArgs),
    /// Decode sampled detectors with windowed BP+OSD.
    Decode(DecodeArgs),
    /// Atom rearrangement plans and timing.
    #[command(subcommand)]
    Motion(MotionCmd),
    /// Lattice surgery between a qLDPC block and a surface patch.
    #[command(subcommand)]
    Surgery(SurgeryCmd),
    /// Sweeps, fits and resource estimates.
    #[command(subcommand)]
    Bench(BenchCmd),
}

#[derive(Subcommand)]
enum CodeCmd {
    /// Hypergraph product of a random biregular code with itself.
    Hgp {
        #[arg(long)]
        n_bits: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        bit_deg: usize,
        #[arg(long, default_value_t = 4)]
        check_deg: usize,
        #[arg(long, default_value_t = 100)]
        candidates: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hypergraph product of two repetition codes.
    Rep {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in lifted-product code by block length.
    Lp {
        #[arg(long)]
        builtin: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a code file: commutation, k and logical operators.
    Validate { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Basis {
    Z,
    X,
}

impl From<Basis> for MemoryBasis {
    fn from(b: Basis) -> Self {
        match b {
            Basis::Z => MemoryBasis::Z,
            Basis::X => MemoryBasis::X,
        }
    }
}

#[derive(Args)]
struct CircuitArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long, default_value_t = 3)]
    rounds: usize,
    #[arg(long, value_enum, default_value = "z")]
    basis: Basis,
    /// Gate error rate.
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    /// Idle error rate.
    #[arg(long, default_value_t = 0.0)]
    p_idle: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShotFormat {
    B8,
    #[value(name = "01")]
    Text,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long, default_value_t = 1000)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Detector rows.
    #[arg(long)]
    out: PathBuf,
    /// Observable rows; defaults to the detector path with `.obs` appended.
    #[arg(long)]
    obs_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "b8")]
    format: ShotFormat,
}

#[derive(Args)]
struct DecodeArgs {
    /// Decoding graph JSON.
    #[arg(long, conflicts_with = "circuit")]
    graph: Option<PathBuf>,
    /// Build the decoding graph from this circuit instead.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Write the decoding graph here and continue.
    #[arg(long)]
    export_graph: Option<PathBuf>,
    /// Detector rows (b8).
    #[arg(long)]
    dets: Option<PathBuf>,
    /// Observable rows (b8) for counting failures.
    #[arg(long)]
    obs: Option<PathBuf>,
    /// BP settings, `R=<ratio>,s=<scale>[,iters=<n>][,product]`.
    #[arg(long, default_value = "R=5,s=0.9")]
    bp: String,
    #[arg(long, default_value_t = 10)]
    osd: usize,
    /// Cycles per window.
    #[arg(long, default_value_t = 3)]
    window: usize,
    /// Residual prior ratio.
    #[arg(long, default_value_t = 5.0)]
    pr: f64,
    /// Base error rate for the residual prior.
    #[arg(long, default_value_t = 1e-3)]
    p: f64,
    /// Noisy cycles for the per-cycle rate; default from the detector rounds.
    #[arg(long)]
    cycles: Option<usize>,
    /// Predicted observable rows (b8).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum MotionCmd {
    /// Plan a 1D sort. The permutation file lists each atom's final rank.
    Plan {
        #[arg(long)]
        perm: PathBuf,
        /// Trap count, default ceil(3N/2).
        #[arg(long)]
        traps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rearrangement time bound for a line of L atoms.
    Time {
        #[arg(long = "L")]
        l: f64,
        #[arg(long, default_value = "paper")]
        preset: String,
    },
}

#[derive(Subcommand)]
enum SurgeryCmd {
    /// Ancilla patch and X̄X̄ merged code for one logical of code A.
    Build {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// X logical of A.
        #[arg(long, default_value_t = 0)]
        logical: usize,
        /// Ancilla column the merge attaches to.
        #[arg(long, default_value_t = 0)]
        column: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check commutation and the interface-product identity of a merged code.
    Verify { file: PathBuf },
    /// Noisy teleportation from a surface patch into a qLDPC block.
    Teleport {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 10_000)]
        shots: usize,
        /// qLDPC code JSON; default is the distance-3 repetition product.
        #[arg(long)]
        qldpc: Option<PathBuf>,
        /// Surface patch JSON; default is the distance-3 repetition product.
        #[arg(long)]
        surface: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        logical: usize,
        /// Rounds per merge and split, default the surface distance.
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, default_value = "zero")]
        input: String,
        #[arg(long)]
        noisy_zz: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Critical,
    Subthreshold,
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Memory sweep over code sizes and gate error rates.
    Sweep {
        #[arg(long, default_value = "hgp")]
        family: String,
        /// Comma-separated block lengths.
        #[arg(long)]
        sizes: String,
        /// `lo:hi:count` (log-spaced) or a comma-separated list.
        #[arg(long)]
        p: String,
        #[arg(long)]
        cycles: Option<usize>,
        /// off, paper, or a ratio p_i/p_g.
        #[arg(long, default_value = "off")]
        idling: String,
        #[arg(long, default_value_t = 1_000)]
        min_shots: usize,
        #[arg(long, default_value_t = 100_000)]
        max_shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// SVG plot of LFR against p.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Fit a sweep table.
    Fit {
        #[arg(long, value_enum)]
        model: ModelArg,
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Qubits needed for k logicals at a target LFR.
    Resources {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        lfr: f64,
        #[arg(long)]
        p: f64,
    },
}

fn main() -> Result<()> {
    let r = run(Cli::parse());
    if let Err(e) = &r {
        // Closed downstream pipe, e.g. `| head`.
        if e.chain().any(|c| c.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)) {
            return Ok(());
        }
    }
    r
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Code(c) => code_cmd(c),
        Cmd::Circuit(a) => circuit_cmd(a),
        Cmd::Sim(a) => sim_cmd(a),
        Cmd::Decode(a) => decode_cmd(a),
        Cmd::Motion(c) => motion_cmd(c),
        Cmd::Surgery(c) => surgery_cmd(c),
        Cmd::Bench(c) => bench_cmd(c),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json(v: &Value, path: Option<&Path>) -> Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    Ok(())
}

fn read_json(path: &Path) -> Result<Value> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(serde_json::from_reader(BufReader::new(f))?)
}

fn read_code(path: &Path) -> Result<CssCode> {
    CssCode::from_json(&read_json(path)?).with_context(|| format!("parsing code {}", path.display()))
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Circuit::parse(&text).with_context(|| format!("parsing circuit {}", path.display()))
}

fn code_cmd(c: CodeCmd) -> Result<()> {
    let (code, out) = match c {
        CodeCmd::Hgp { n_bits, seed, bit_deg, check_deg, candidates, out } => {
            let cl = select_classical_code(n_bits, bit_deg, check_deg, candidates, seed)?;
            let mut code = hgp(&cl, &cl)?;
            code.meta.insert("seed".into(), seed.into());
            if let Some(g) = cl.girth {
                code.meta.insert("girth".into(), g.into());
            }
            (code, out)
        }
        CodeCmd::Rep { d, out } => {
            let r = repetition_code(d)?;
            (hgp(&r, &r)?, out)
        }
        CodeCmd::Lp { builtin, out } => {
            let code = builtin_lp_code(builtin).ok_or_else(|| anyhow!("built-in sizes are 544, 714, 1020, 1428"))?;
            (code, out)
        }
        CodeCmd::Validate { file } => {
            let code = read_code(&file)?;
            let problems = code.validate();
            emit_json(
                &json!({"family": code.family, "n": code.n, "k": code.k, "d_upper": code.d_upper, "ok": problems.is_empty(), "problems": problems}),
                None,
            )?;
            if !problems.is_empty() {
                bail!("{} problem(s) in {}", problems.len(), file.display());
            }
            return Ok(());
        }
    };
    eprintln!("[[{}, {}, {}]]", code.n, code.k, code.d_upper.map_or("?".into(), |d| d.to_string()));
    emit_json(&code.to_json(), out.as_deref())
}

fn circuit_cmd(a: CircuitArgs) -> Result<()> {
    let code = read_code(&a.code)?;
    let c = add_noise(&memory_experiment(&code, a.rounds, a.basis.into())?, a.p, a.p_idle)?;
    eprintln!("{} qubits, {} detectors, {} observables", c.n_qubits(), c.num_detectors(), c.num_observables());
    output(a.out.as_deref())?.write_all(c.to_text().as_bytes())?;
    Ok(())
}

fn sim_cmd(a: SimArgs) -> Result<()> {
    let c = read_circuit(&a.circuit)?;
    let batch = sample(&c, a.shots, a.seed);
    let obs_path = a.obs_out.unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".obs");
        p.into()
    });
    for (m, path) in [(&batch.detectors, &a.out), (&batch.observables, &obs_path)] {
        let w = output(Some(path))?;
        match a.format {
            ShotFormat::B8 => batch.write_b8(m, w)?,
            ShotFormat::Text => batch.write_01(m, w)?,
        }
    }
    let fired: usize = batch.detector_counts().iter().sum();
    eprintln!("{} shots, {} detectors, {fired} detection events", a.shots, batch.detectors.cols());
    Ok(())
}

fn parse_bp(spec: &str) -> Result<BpConfig> {
    let mut cfg = BpConfig::hgp_default();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part.split_once('=') {
            Some(("R", v)) => cfg.ratio = v.parse()?,
            Some(("s", v)) => cfg.scale = v.parse()?,
            Some(("iters", v)) => cfg.max_iters = Some(v.parse()?),
            None if part == "product" => cfg.variant = BpVariant::ProductSum,
            None if part == "minsum" => cfg.variant = BpVariant::MinSum,
            _ => bail!("unknown BP setting {part:?}"),
        }
    }
    cfg.validate().map_err(|e| anyhow!(e))?;
    Ok(cfg)
}

fn decode_cmd(a: DecodeArgs) -> Result<()> {
    let g = match (&a.graph, &a.circuit) {
        (Some(p), _) => DecodingGraph::from_json(&read_json(p)?)?,
        (None, Some(p)) => build_decoding_graph(&read_circuit(p)?),
        (None, None) => bail!("one of --graph or --circuit is required"),
    };
    if let Some(p) = &a.export_graph {
        emit_json(&g.to_json(), Some(p))?;
    }
    let Some(dets) = &a.dets else {
        eprintln!("{} detectors, {} fault classes", g.n_detectors, g.n_columns());
        return Ok(());
    };
    let wc = WindowConfig { window: a.window, residual_prior_ratio: a.pr, ..WindowConfig::hgp(a.p) };
    let dec = WindowedDecoder::new(&g, wc, parse_bp(&a.bp)?, OsdConfig { order: a.osd })?;
    let syndromes = read_b8(File::open(dets)?, g.n_detectors)?;
    let preds = dec.decode_batch(&syndromes)?;
    if let Some(out) = &a.out {
        let mut w = output(Some(out))?;
        for s in 0..preds.rows() {
            let row = preds.row(s);
            let bytes: Vec<u8> = (0..g.n_observables.div_ceil(8)).map(|b| (row[b / 8] >> (8 * (b % 8))) as u8).collect();
            w.write_all(&bytes)?;
        }
    }
    let mut report = json!({"shots": preds.rows(), "detectors": g.n_detectors, "fault_classes": g.n_columns()});
    if let Some(obs) = &a.obs {
        let truth = read_b8(File::open(obs)?, g.n_observables)?;
        let failures = logical_failure(&preds, &truth)?;
        report["failures"] = failures.into();
        // The last detector round is the final data readout.
        let m = a.cycles.unwrap_or_else(|| g.max_round().saturating_sub(1).max(1));
        {
            let e = lfr_from_counts(failures, preds.rows(), m)?;
            report["p_L"] = e.p_l.into();
            report["lfr"] = e.lfr.into();
            report["sigma"] = e.sigma_lfr.into();
            report["cycles"] = m.into();
        }
    }
    emit_json(&report, None)
}

fn read_perm(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(&text)?);
    }
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().with_context(|| format!("bad rank {s:?}")))
        .collect()
}

fn preset(name: &str) -> Result<MotionParams> {
    match name {
        "paper" | "default" => Ok(MotionParams::paper()),
        _ => bail!("unknown preset {name:?}"),
    }
}

fn motion_cmd(c: MotionCmd) -> Result<()> {
    match c {
        MotionCmd::Plan { perm, traps, out } => {
            let order = read_perm(&perm)?;
            let n = order.len();
            let m = traps.unwrap_or((3 * n).div_ceil(2));
            let positions: Vec<usize> = (0..n).collect();
            let s = plan_1d(&order, &positions, m)?;
            if let Some(v) = validate_schedule(&s) {
                bail!("planner produced an invalid schedule: {v:?}");
            }
            let p = MotionParams::paper();
            let (t, mv) = s.duration_us(&p);
            eprintln!("{n} atoms, {} layers, {} levels, {:.1} us transfer + {:.1} us movement", s.layers.len(), s.levels, t, mv);
            emit_json(&s.to_json(&p), out.as_deref())
        }
        MotionCmd::Time { l, preset: name } => {
            let p = preset(&name)?;
            let (t, m) = rearrangement_time_bound(l, &p);
            emit_json(&json!({"L": l, "transfer_us": t, "movement_us": m, "total_us": t + m}), None)
        }
    }
}

fn surgery_cmd(c: SurgeryCmd) -> Result<()> {
    match c {
        SurgeryCmd::Build { a, b, logical, column, out } => {
            let (ca, cb) = (read_code(&a)?, read_code(&b)?);
            if logical >= ca.k || cb.k == 0 {
                bail!("logical {logical} out of range (k_A = {}, k_B = {})", ca.k, cb.k);
            }
            let x_a = LogicalOperator::from_vector(PauliType::X, &ca.logicals_x.row_vector(logical));
            let z_b = LogicalOperator::from_vector(PauliType::Z, &cb.logicals_z.row_vector(0));
            let patch = ancilla_patch(&ca, &cb, &x_a, &z_b)?;
            let merged = merged_patch(&ca, &patch, column)?;
            eprintln!(
                "ancilla patch [[{}, {}]] ({}x{}), merged code on {} qubits",
                patch.code.n,
                patch.code.k,
                patch.m_a(),
                patch.m_b(),
                merged.n()
            );
            emit_json(&serde_json::to_value(&merged)?, out.as_deref())
        }
        SurgeryCmd::Verify { file } => {
            let merged: MergedCode = serde_json::from_value(read_json(&file)?)?;
            let commutes = merged.commutes();
            let identity = merged.interface_identity_holds();
            let families: Value = [
                GeneratorFamily::Interface,
                GeneratorFamily::CodeBoundary,
                GeneratorFamily::AncillaBoundary,
                GeneratorFamily::AncillaRemaining,
                GeneratorFamily::CodeRemaining,
                GeneratorFamily::AncillaSameType,
            ]
            .iter()
            .map(|f| (format!("{f:?}"), merged.family_count(*f).into()))
            .collect::<serde_json::Map<_, _>>()
            .into();
            emit_json(&json!({"n": merged.n(), "commutes": commutes, "interface_identity": identity, "families": families}), None)?;
            if !(commutes && identity) {
                bail!("merged code check failed");
            }
            Ok(())
        }
        SurgeryCmd::Teleport { p, shots, qldpc, surface, logical, rounds, input, noisy_zz, seed } => {
            let rep = || -> Result<CssCode> {
                let r = repetition_code(3)?;
                Ok(hgp(&r, &r)?)
            };
            let q = qldpc.as_deref().map(read_code).transpose()?.map_or_else(rep, Ok)?;
            let s = surface.as_deref().map(read_code).transpose()?.map_or_else(rep, Ok)?;
            let input = match input.as_str() {
                "zero" | "0" => TeleportInput::Zero,
                "plus" | "+" => TeleportInput::Plus,
                other => bail!("input must be zero or plus, got {other:?}"),
            };
            let d = s.d_upper.unwrap_or(3);
            let cfg = TeleportConfig { input, noisy_zz, ..TeleportConfig::new(rounds.unwrap_or(d), p) };
            let e = teleportation_experiment(&q, &s, logical, &cfg)?;
            let g = build_decoding_graph(&e.circuit);
            let dec = WindowedDecoder::new(&g, WindowConfig::hgp(p), BpConfig::hgp_default(), OsdConfig::default())?;
            let batch = sample(&e.circuit, shots, seed);
            let failures = logical_failure(&dec.decode_batch(&batch.detectors)?, &batch.observables)?;
            let est = lfr_from_counts(failures, shots, e.noisy_cycles)?;
            emit_json(
                &json!({
                    "p": p, "shots": shots, "failures": failures, "p_L": est.p_l,
                    "noisy_cycles": e.noisy_cycles, "lfr": per_cycle_lfr(est.p_l, e.noisy_cycles), "sigma": est.sigma_lfr,
                }),
                None,
            )
        }
    }
}

fn parse_ps(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if let [lo, hi, count] = parts[..] {
        let (lo, hi, count): (f64, f64, usize) = (lo.parse()?, hi.parse()?, count.parse()?);
        if !(lo > 0.0 && hi >= lo && count >= 1) {
            bail!("bad range {spec:?}");
        }
        if count == 1 {
            return Ok(vec![lo]);
        }
        let r = (hi / lo).ln() / (count - 1) as f64;
        return Ok((0..count).map(|i| lo * (r * i as f64).exp()).collect());
    }
    spec.split(',').map(|s| s.trim().parse::<f64>().with_context(|| format!("bad p {s:?}"))).collect()
}

fn bench_cmd(c: BenchCmd) -> Result<()> {
    match c {
        BenchCmd::Sweep { family, sizes, p, cycles, idling, min_shots, max_shots, seed, out, plot } => {
            let sizes: Vec<usize> = sizes.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>()?;
            let codes: Vec<CssCode> = sizes.iter().map(|&n| family_code(&family, n, seed)).collect::<Result<_, _>>()?;
            let idling = match idling.as_str() {
                "off" => Idling::Off,
                "paper" => Idling::Paper,
                r => Idling::Ratio(r.parse().with_context(|| format!("idling must be off, paper or a ratio, got {r:?}"))?),
            };
            let cfg = SweepConfig { cycles, idling, min_shots, max_shots, seed, ..SweepConfig::default() };
            let rows = run_memory_sweep(&codes, &parse_ps(&p)?, &cfg)?;
            write_sweep_csv(&rows, output(out.as_deref())?)?;
            if let Some(path) = plot {
                plot_sweep_svg(&rows, &path)?;
            }
            Ok(())
        }
        BenchCmd::Fit { model, data, out } => {
            let rows = read_sweep_csv(File::open(&data).with_context(|| format!("opening {}", data.display()))?)?;
            let pts: Vec<FitPoint> = rows.iter().map(FitPoint::from).collect();
            let fit = match model {
                ModelArg::Critical => fit_threshold(&pts)?,
                ModelArg::Subthreshold => fit_subthreshold(&pts)?,
            };
            for w in &fit.warnings {
                eprintln!("warning: {w}");
            }
            write_json(&fit, output(out.as_deref())?)?;
            Ok(())
        }
        BenchCmd::Resources { k, lfr, p } => {
            let est = estimate_resources(k, lfr, p, &[FamilyModel::hgp_paper(), FamilyModel::lp_paper()], &MotionParams::paper())?;
            write_json(&est, io::stdout().lock())?;
            Ok(())
        }
    }
}
