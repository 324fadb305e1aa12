use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tfhe_proc::field::FieldElement;
use tfhe_proc::processor::cost::program_cycles;
use tfhe_proc::processor::cost::{compare, reference_reports, report, reports_to_csv, CostReport, ExecConfig};
use tfhe_proc::processor::{decode_program, encode_program, execute, Instruction, ObjectStore, StoredObject};
use tfhe_proc::selftest::{run_all, SelftestOptions};
use tfhe_proc::tfhe::{
    build_lut, decode_slot, lwe_decrypt, BootstrapKey, KeySet, KeySwitchKey, LweSecretKey, Sampler, TfheParams,
};

mod formats;
mod program;

use formats::*;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_VERIFY: u8 = 3;

/// Raised for bad arguments that clap cannot catch on its own.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// A check ran and failed (self-test, decryption outside the message space).
#[derive(Debug)]
struct VerifyError(String);

impl std::fmt::Display for VerifyError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for VerifyError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser)]
#[command(
    name = "tfhe-proc",
    version,
    about = "TFHE processor emulator: keys, encrypted programs, cost model"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Inspect parameter sets.
    #[command(subcommand)]
    Params(ParamsCmd),
    /// Generate secret, bootstrapping and key-switching keys.
    Keygen {
        #[arg(long, default_value = "standard")]
        params: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the plaintext modulus.
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt a message under the secret key in a key directory.
    Encrypt {
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        message: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decrypt a ciphertext file and print the message.
    Decrypt {
        #[arg(long)]
        keys: PathBuf,
        ciphertext: PathBuf,
    },
    /// Assemble a text program into the binary instruction stream.
    Asm {
        program: PathBuf,
        #[arg(long, default_value = "standard")]
        params: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Disassemble a binary instruction stream.
    Disasm {
        program: PathBuf,
        #[arg(long, default_value = "standard")]
        params: String,
    },
    /// Execute a program against an object store described by a manifest.
    Run(RunArgs),
    /// Time bootstraps on this machine.
    Bench {
        /// Key directory; without it keys are generated from --params.
        #[arg(long)]
        keys: Option<PathBuf>,
        #[arg(long, default_value = "standard")]
        params: String,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate the hardware cost model.
    Estimate(EstimateArgs),
    /// Run the built-in correctness suites.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, hide = true)]
        corrupt_twiddle: Option<usize>,
    },
}

#[derive(Subcommand)]
enum ParamsCmd {
    /// List presets.
    List,
    /// Show a preset or a parameter file with derived constants.
    Show {
        name: String,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    program: PathBuf,
    #[arg(long)]
    keys: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    /// Program is a binary instruction stream rather than text.
    #[arg(long)]
    binary: bool,
    #[arg(long)]
    out_dir: PathBuf,
    /// Datapath throughput used for the cycle estimate.
    #[arg(long, default_value_t = 32)]
    throughput: usize,
    #[arg(long, default_value_t = 325.0)]
    freq_mhz: f64,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, default_value = "standard")]
    params: String,
    #[arg(long, default_value_t = 32)]
    throughput: usize,
    #[arg(long, default_value_t = 325.0)]
    freq_mhz: f64,
    /// Fix the PBS batch instead of deriving it from memory bandwidth.
    #[arg(long)]
    batch: Option<u64>,
    #[arg(long)]
    mem_bw_gbs: Option<f64>,
    #[arg(long, conflicts_with = "json")]
    csv: bool,
    #[arg(long)]
    json: bool,
    /// Report every reference configuration instead.
    #[arg(long)]
    reference: bool,
}

fn resolve_params(name: &str, p: Option<u64>) -> Result<TfheParams> {
    let params = match TfheParams::preset(name) {
        Some(params) => params,
        None if Path::new(name).is_file() => read_json::<TfheParams>(Path::new(name))?,
        None => {
            return Err(usage(format!(
                "unknown parameter set `{name}` (presets: {})",
                TfheParams::preset_names().join(", ")
            )))
        }
    };
    let params = match p {
        Some(p) => params.with_plaintext_modulus(p),
        None => params,
    };
    params.validate().map_err(|e| usage(e.to_string()))?;
    Ok(params)
}

fn load_secret(dir: &Path) -> Result<(TfheParams, LweSecretKey)> {
    let (params, lwe, _) = read_json::<SecretKeyFile>(&dir.join(SECRET_FILE))?.keys()?;
    Ok((params, lwe))
}

fn load_bsk(dir: &Path) -> Result<(TfheParams, BootstrapKey)> {
    let f = read_json::<BootstrapKeyFile>(&dir.join(BSK_FILE))?;
    Ok((f.params.clone(), f.key()?))
}

fn load_ksk(path: &Path) -> Result<KeySwitchKey> {
    read_json::<KeySwitchKeyFile>(path)?.key()
}

fn load_keyset(dir: &Path) -> Result<KeySet> {
    let (params, lwe, glwe) = read_json::<SecretKeyFile>(&dir.join(SECRET_FILE))?.keys()?;
    let (_, bsk) = load_bsk(dir)?;
    let ksk = load_ksk(&dir.join(KSK_FILE))?;
    Ok(KeySet {
        params,
        lwe,
        glwe,
        bsk,
        ksk,
    })
}

fn decrypt_checked(ct: &tfhe_proc::tfhe::LweCiphertext, key: &LweSecretKey, params: &TfheParams) -> Result<u64> {
    let phase = lwe_decrypt(ct, key)?;
    let slot = decode_slot(phase, params);
    if slot >= params.plaintext_modulus {
        return Err(VerifyError(format!(
            "decoded slot {slot} lies in the padding half (p = {})",
            params.plaintext_modulus
        ))
        .into());
    }
    Ok(slot)
}

fn cmd_params(cmd: ParamsCmd) -> Result<()> {
    match cmd {
        ParamsCmd::List => {
            println!(
                "{:<10} {:>5} {:>6} {:>2} {:>9} {:>9} {:>3}",
                "name", "n", "N", "k", "pbs(b,l)", "ks(b,l)", "p"
            );
            for name in TfheParams::preset_names() {
                let p = TfheParams::preset(name).expect("listed preset");
                println!(
                    "{:<10} {:>5} {:>6} {:>2} {:>9} {:>9} {:>3}",
                    p.name,
                    p.lwe_dim,
                    p.poly_size,
                    p.glwe_dim,
                    format!("2^{},{}", p.pbs_decomp.log_beta, p.pbs_decomp.ell),
                    format!("2^{},{}", p.ks_decomp.log_beta, p.ks_decomp.ell),
                    p.plaintext_modulus
                );
            }
        }
        ParamsCmd::Show { name, p, json } => {
            let params = resolve_params(&name, p)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&params)?);
            } else {
                println!("name             {}", params.name);
                println!("lwe_dim (n)      {}", params.lwe_dim);
                println!("poly_size (N)    {}", params.poly_size);
                println!("glwe_dim (k)     {}", params.glwe_dim);
                println!(
                    "pbs decomp       beta=2^{} l={}",
                    params.pbs_decomp.log_beta, params.pbs_decomp.ell
                );
                println!(
                    "ks decomp        beta=2^{} l={}",
                    params.ks_decomp.log_beta, params.ks_decomp.ell
                );
                println!("plaintext p      {}", params.plaintext_modulus);
                println!("sigma            {:e}", params.sigma);
                println!("glwe_sigma       {:e}", params.glwe_sigma);
                println!("delta            {}", params.delta());
                println!("e_max            {}", params.e_max());
            }
        }
    }
    Ok(())
}

fn cmd_keygen(params: &str, seed: u64, p: Option<u64>, out: &Path) -> Result<()> {
    let params = resolve_params(params, p)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let t = Instant::now();
    let keys = KeySet::generate(&params, seed)?;
    write_json(
        &out.join(SECRET_FILE),
        &SecretKeyFile::new(&params, seed, &keys.lwe, &keys.glwe),
    )?;
    write_json(&out.join(BSK_FILE), &BootstrapKeyFile::new(&params, &keys.bsk))?;
    write_json(&out.join(KSK_FILE), &KeySwitchKeyFile::new(&params, &keys.ksk))?;
    eprintln!(
        "keys for `{}` written to {} in {:.2?}",
        params.name,
        out.display(),
        t.elapsed()
    );
    Ok(())
}

fn cmd_encrypt(keys: &Path, message: u64, seed: u64, out: &Path) -> Result<()> {
    let (params, lwe) = load_secret(keys)?;
    if message >= params.plaintext_modulus {
        return Err(usage(format!(
            "message {message} not below p = {}",
            params.plaintext_modulus
        )));
    }
    let ct = tfhe_proc::tfhe::encrypt_message(message, &lwe, &params, &mut Sampler::new(seed))?;
    write_json(out, &CiphertextFile::new(&params, &ct))
}

fn cmd_decrypt(keys: &Path, ct: &Path) -> Result<()> {
    let (params, lwe) = load_secret(keys)?;
    let ct = read_ciphertext(ct)?;
    ensure!(
        ct.dim() == lwe.len(),
        "ciphertext dimension {} does not match key length {}",
        ct.dim(),
        lwe.len()
    );
    println!("{}", decrypt_checked(&ct, &lwe, &params)?);
    Ok(())
}

fn read_program(path: &Path, binary: bool, poly_size: usize) -> Result<Vec<Instruction>> {
    if binary {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(decode_program(&bytes, poly_size)?)
    } else {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        program::parse_program(&text).with_context(|| format!("in {}", path.display()))
    }
}

fn cmd_asm(path: &Path, params: &str, out: &Path) -> Result<()> {
    let params = resolve_params(params, None)?;
    let prog = read_program(path, false, params.poly_size)?;
    let bytes = encode_program(&prog, params.poly_size)?;
    fs::write(out, &bytes).with_context(|| format!("writing {}", out.display()))?;
    eprintln!("{} instructions, {} bytes", prog.len(), bytes.len());
    Ok(())
}

fn cmd_disasm(path: &Path, params: &str) -> Result<()> {
    let params = resolve_params(params, None)?;
    for ins in read_program(path, true, params.poly_size)? {
        println!("{}", program::format_instruction(&ins));
    }
    Ok(())
}

fn parse_addr(s: &str) -> Result<u64> {
    program::parse_u64(s).with_context(|| format!("bad address `{s}`"))
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let (params, bsk) = load_bsk(&args.keys)?;
    let manifest: Manifest = read_json(&args.manifest)?;
    ensure!(
        manifest.format_version == FORMAT_VERSION,
        "unsupported manifest format_version {}",
        manifest.format_version
    );
    let base = args.manifest.parent().unwrap_or(Path::new("."));

    let mut store = ObjectStore::with_bootstrap_key(Arc::new(bsk));
    let mut default_ksk: Option<Arc<KeySwitchKey>> = None;
    for (addr, entry) in &manifest.objects {
        let addr = parse_addr(addr)?;
        let obj = match entry {
            ManifestEntry::Lwe(path) => StoredObject::Lwe(read_ciphertext(&resolve(base, path))?),
            ManifestEntry::Lut(table) => StoredObject::Lut(build_lut(table, &params)?),
            ManifestEntry::Ksk(Some(path)) => StoredObject::KeySwitchKey(Arc::new(load_ksk(&resolve(base, path))?)),
            ManifestEntry::Ksk(None) => {
                if default_ksk.is_none() {
                    default_ksk = Some(Arc::new(load_ksk(&args.keys.join(KSK_FILE))?));
                }
                StoredObject::KeySwitchKey(default_ksk.clone().expect("loaded above"))
            }
            ManifestEntry::Scalar(s) => StoredObject::Scalar(FieldElement::new(program::parse_imm(s)?)),
        };
        store.insert(addr, obj);
    }

    let prog = read_program(&args.program, args.binary, params.poly_size)?;
    let cfg = ExecConfig::new(args.throughput, args.freq_mhz * 1e6);
    let cycles = program_cycles(&prog, &params, &cfg)?;
    let t = Instant::now();
    execute(&prog, &mut store)?;
    let wall = t.elapsed();

    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    for out in &manifest.outputs {
        let addr = parse_addr(out)?;
        let ct = store.lwe(addr)?;
        write_json(
            &args.out_dir.join(format!("{addr:#x}.json")),
            &CiphertextFile::new(&params, ct),
        )?;
    }
    println!(
        "{} instructions, {} modelled cycles ({:.3} ms at T={}, {} MHz), {:.2?} emulated",
        prog.len(),
        cycles,
        cycles as f64 / cfg.freq_hz * 1e3,
        args.throughput,
        args.freq_mhz,
        wall
    );
    Ok(())
}

#[derive(Serialize)]
struct BenchResult {
    params: String,
    trials: u64,
    mean_ms: f64,
    std_ms: f64,
    min_ms: f64,
    max_ms: f64,
}

fn cmd_bench(keys: Option<&Path>, params: &str, trials: u64, seed: u64, json: bool) -> Result<()> {
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let keys = match keys {
        Some(dir) => load_keyset(dir)?,
        None => KeySet::generate(&resolve_params(params, None)?, seed)?,
    };
    let p = keys.params.plaintext_modulus;
    let lut = keys.lut(&(0..p).collect::<Vec<_>>())?;
    let mut sampler = Sampler::new(seed ^ 0xbe9c);
    let mut times = Vec::with_capacity(trials as usize);
    for i in 0..trials {
        let m = i % p;
        let ct = keys.encrypt(m, &mut sampler)?;
        let t = Instant::now();
        let out = keys.bootstrap(&ct, &lut)?;
        times.push(t.elapsed().as_secs_f64() * 1e3);
        let got = decrypt_checked(&out, &keys.lwe, &keys.params)?;
        if got != m {
            return Err(VerifyError(format!("bootstrap of {m} decrypted to {got}")).into());
        }
    }
    let mean = times.iter().sum::<f64>() / trials as f64;
    let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (trials.max(2) - 1) as f64;
    let r = BenchResult {
        params: keys.params.name.clone(),
        trials,
        mean_ms: mean,
        std_ms: if trials > 1 { var.sqrt() } else { 0.0 },
        min_ms: times.iter().cloned().fold(f64::INFINITY, f64::min),
        max_ms: times.iter().cloned().fold(0.0, f64::max),
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&r)?);
    } else {
        println!(
            "{}: {} bootstraps (PBS + KS), {:.2} ± {:.2} ms (min {:.2}, max {:.2})",
            r.params, r.trials, r.mean_ms, r.std_ms, r.min_ms, r.max_ms
        );
    }
    Ok(())
}

fn print_report(r: &CostReport) {
    let rows: [(&str, String); 17] = [
        (
            "params",
            format!("{} (n={}, N={}, k={})", r.params, r.n, r.poly_size, r.glwe_dim),
        ),
        ("throughput", r.throughput.to_string()),
        ("freq", format!("{} MHz", r.freq_hz / 1e6)),
        ("ntt interval", format!("{} cycles", r.ntt_interval_cycles)),
        ("ntt latency", format!("{} cycles", r.ntt_latency_cycles)),
        ("ntts/ms", format!("{:.1}", r.ntts_per_ms)),
        ("pbs interval", format!("{} cycles", r.pbs_interval_cycles)),
        ("pbs/s", format!("{:.1}", r.pbs_per_s)),
        ("batch", r.batch.to_string()),
        (
            "latency",
            format!("{:.3} ms (+{} fill cycles)", r.latency_ms, r.fill_cycles),
        ),
        ("ks lanes", r.ks_lanes.to_string()),
        ("ks cycles", r.ks_cycles.to_string()),
        ("muladd cycles", r.muladd_cycles.to_string()),
        ("ext bandwidth", format!("{:.3} Mb/s", r.ext_bw_bits_per_s / 1e6)),
        (
            "int bw pbs/ks",
            format!(
                "{:.1} / {:.1} GB/s",
                r.int_bw_pbs_bytes_per_s / 1e9,
                r.int_bw_ks_bytes_per_s / 1e9
            ),
        ),
        ("int bw total", format!("{:.1} GB/s", r.int_bw_total_bytes_per_s / 1e9)),
        (
            "dfr-normalised",
            format!("{:.1} pbs/s (2^{})", r.dfr_normalized_pbs_per_s, r.dfr_exponent),
        ),
    ];
    for (k, v) in rows {
        println!("{k:<15} {v}");
    }
    for c in compare(r) {
        println!(
            "  vs reference {:<18} model {:>12.3}  reported {:>12.3}  ({:+.2}%)",
            c.metric,
            c.model,
            c.reference,
            c.rel_delta * 100.0
        );
    }
}

fn cmd_estimate(a: &EstimateArgs) -> Result<()> {
    let reports = if a.reference {
        reference_reports()?
    } else {
        let params = resolve_params(&a.params, None)?;
        if !(a.freq_mhz > 0.0) {
            return Err(usage(format!("--freq-mhz must be positive, got {}", a.freq_mhz)));
        }
        let mut cfg = ExecConfig::new(a.throughput, a.freq_mhz * 1e6);
        if let Some(b) = a.batch {
            if b == 0 {
                return Err(usage("--batch must be at least 1"));
            }
            cfg = cfg.with_batch(b);
        }
        if let Some(bw) = a.mem_bw_gbs {
            if !(bw > 0.0) {
                return Err(usage(format!("--mem-bw-gbs must be positive, got {bw}")));
            }
            cfg = cfg.with_mem_bw(bw * 1e9);
        }
        vec![report(&params, &cfg).map_err(|e| usage(e.to_string()))?]
    };
    if a.csv {
        reports_to_csv(&reports, std::io::stdout().lock())?;
    } else if a.json {
        let out: Vec<_> = reports
            .iter()
            .map(|r| serde_json::json!({ "report": r, "comparisons": compare(r) }))
            .collect();
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        for (i, r) in reports.iter().enumerate() {
            if i > 0 {
                println!();
            }
            print_report(r);
        }
    }
    Ok(())
}

fn cmd_selftest(seed: u64, corrupt_twiddle: Option<usize>) -> Result<()> {
    let results = run_all(&SelftestOptions { seed, corrupt_twiddle });
    let mut failed = Vec::new();
    for r in &results {
        println!(
            "{} {:<20} {:>8} cases {:>4} failures [{:.2?}] {}",
            if r.passed() { "ok  " } else { "FAIL" },
            r.name,
            r.cases,
            r.failures,
            r.elapsed,
            r.detail
        );
        if !r.passed() {
            failed.push(r.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(VerifyError(format!("failed suites: {}", failed.join(", "))).into())
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Params(c) => cmd_params(c),
        Cmd::Keygen { params, seed, p, out } => cmd_keygen(&params, seed, p, &out),
        Cmd::Encrypt {
            keys,
            message,
            seed,
            out,
        } => cmd_encrypt(&keys, message, seed, &out),
        Cmd::Decrypt { keys, ciphertext } => cmd_decrypt(&keys, &ciphertext),
        Cmd::Asm { program, params, out } => cmd_asm(&program, &params, &out),
        Cmd::Disasm { program, params } => cmd_disasm(&program, &params),
        Cmd::Run(a) => cmd_run(&a),
        Cmd::Bench {
            keys,
            params,
            trials,
            seed,
            json,
        } => cmd_bench(keys.as_deref(), &params, trials, seed, json),
        Cmd::Estimate(a) => cmd_estimate(&a),
        Cmd::Selftest { seed, corrupt_twiddle } => cmd_selftest(seed, corrupt_twiddle),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<UsageError>()) {
        return EXIT_USAGE;
    }
    if err.chain().any(|e| e.is::<VerifyError>()) {
        return EXIT_VERIFY;
    }
    if err.chain().any(|e| {
        matches!(
            e.downcast_ref::<tfhe_proc::Error>(),
            Some(tfhe_proc::Error::PaddingOverflow { .. })
        )
    }) {
        return EXIT_VERIFY;
    }
    EXIT_DATA
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&usage("x")), EXIT_USAGE);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), EXIT_DATA);
        assert_eq!(
            exit_code(&anyhow::Error::from(VerifyError("v".into())).context("outer")),
            EXIT_VERIFY
        );
        let pad = tfhe_proc::Error::PaddingOverflow { slot: 20, slots: 16 };
        assert_eq!(exit_code(&anyhow::Error::from(pad)), EXIT_VERIFY);
    }

    #[test]
    fn params_resolution() {
        assert_eq!(resolve_params("toy", None).unwrap().poly_size, 256);
        assert_eq!(resolve_params("standard", Some(8)).unwrap().plaintext_modulus, 8);
        assert!(resolve_params("nope", None).is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn bench_rejects_zero_trials() {
        let e = cmd_bench(None, "toy", 0, 0, false).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_USAGE);
    }
}
