//! Command-line interface: state construction, inspection, depth
//! certification, trade-off sweeps, and the closed-form reproduction harness.
//!
//! Exit codes: 0 success, 1 usage error, 2 state-invariant violation,
//! 3 infeasible request. Reports go to stdout, diagnostics to stderr.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use collvar::error::Error;
use collvar::moments::local_variances;
use collvar::observables::{helmert_frame, CollectiveOperator, SignVector};
use collvar::oracle::popoviciu_sampler;
use collvar::quantifiers::{
    f_convex_roof, f_pure, f_qfi_ratio, f_support, thickness, OptConfig, QuantBracket,
};
use collvar::spectral::{enumerate_diagonal_lines, spectral_support, LocalObservable};
use collvar::statefile::{read_state, write_state, StateData};
use collvar::states::{
    depolarized_ghz, gaussian_grid_state, ghz_like, ghz_mix, line_state, sample_haar,
    sample_k_separable, sample_product,
};
use collvar::witnesses::{bound_k, bound_k_thick, certify, k_for_f, k_of_zeta, zeta_for_f};

#[derive(Parser)]
#[command(
    name = "collvar",
    version,
    about = "Collective-variance entanglement quantifiers and depth witnesses"
)]
struct Cli {
    /// Seed for every randomized computation.
    #[arg(long, global = true, env = "COLLVAR_SEED", default_value_t = 0)]
    seed: u64,

    /// Normalization tolerance when loading state files.
    #[arg(long, global = true, env = "COLLVAR_TOL_NORM", default_value_t = 1e-9)]
    tol_norm: f64,

    /// Relative eigenvalue threshold below which spectra count as zero.
    #[arg(long, global = true, env = "COLLVAR_TOL_EIG", default_value_t = 1e-12)]
    tol_eig: f64,

    /// Optimizer restarts (0 = per-operation default).
    #[arg(long, global = true, env = "COLLVAR_RESTARTS", default_value_t = 0)]
    restarts: usize,

    /// Worker-thread cap for the optimizers (0 = all cores). Output is
    /// identical regardless of the setting.
    #[arg(long, global = true, env = "COLLVAR_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print norm checks, variances, quantifier values, thickness, and
    /// support size of a state file.
    Describe {
        file: PathBuf,
        /// Probability threshold defining the spectral support.
        #[arg(long, default_value_t = 1e-6)]
        support_threshold: f64,
        /// Also run the convex-roof search (slow for high-rank states).
        #[arg(long)]
        roof: bool,
    },
    /// Certify an entanglement-depth lower bound from certified quantifier
    /// lower bounds.
    Certify {
        file: PathBuf,
        /// Thickness hypothesis; refused if the state's measured thickness
        /// falls below it.
        #[arg(long)]
        zeta: Option<f64>,
    },
    /// Evaluate trade-off curves or bound tables over a grid and write CSV.
    Sweep {
        #[arg(long, value_enum)]
        mode: SweepMode,
        #[arg(long)]
        n: usize,
        /// Grid as start:stop:count (inclusive); defaults depend on mode.
        #[arg(long)]
        grid: Option<String>,
        /// Quantifier level for the level-set modes.
        #[arg(long)]
        f: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-derive the closed-form results at desk scale and report pass/fail.
    Reproduce {
        #[arg(long, value_enum)]
        target: ReproduceTarget,
    },
    /// Construct a state and write it to a file.
    Sample {
        #[arg(long, value_enum)]
        kind: SampleKindArg,
        #[arg(long)]
        n: Option<usize>,
        /// Local dimension (evenly spaced integer spectrum unless d = 2,
        /// which uses the qubit spectrum -1, 1).
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Explicit comma-separated spectrum overriding --d.
        #[arg(long)]
        spectrum: Option<String>,
        /// Block-size limit for k-separable sampling.
        #[arg(long)]
        k: Option<usize>,
        /// Mixing parameter for the noisy families.
        #[arg(long)]
        eps: Option<f64>,
        /// Relative phase for the GHZ-like constructor.
        #[arg(long, default_value_t = 0.0)]
        phase: f64,
        /// Grid points per axis for the Gaussian constructor.
        #[arg(long)]
        points: Option<usize>,
        /// Grid spacing for the Gaussian constructor.
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        #[arg(long)]
        sum_width: Option<f64>,
        #[arg(long)]
        diff_width: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepMode {
    #[value(name = "k_of_zeta")]
    KOfZeta,
    #[value(name = "zeta_of_k")]
    ZetaOfK,
    #[value(name = "zeta_for_f")]
    ZetaForF,
    #[value(name = "k_for_f")]
    KForF,
    #[value(name = "bound_table")]
    BoundTable,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReproduceTarget {
    #[value(name = "appendixD")]
    NoisyFamilies,
    #[value(name = "ghz_saturation")]
    GhzSaturation,
    #[value(name = "popoviciu")]
    Popoviciu,
    #[value(name = "tradeoff")]
    Tradeoff,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SampleKindArg {
    Ghz,
    Haar,
    Product,
    Ksep,
    Gaussian,
    Depolarized,
    GhzMix,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Parse(_) | Error::InvariantViolation(_) | Error::NotHermitian(_) => 2,
            Error::InfeasibleLevel(_) => 3,
            _ => 1,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: err.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if cli.threads > 0 {
        // Best effort: the pool may already exist when embedded in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let opt_cfg = OptConfig {
        seed: cli.seed,
        restarts: cli.restarts,
        ..OptConfig::default()
    };
    match cli.command {
        Command::Describe {
            file,
            support_threshold,
            roof,
        } => cmd_describe(&file, support_threshold, roof, cli.tol_norm, cli.tol_eig, &opt_cfg),
        Command::Certify { file, zeta } => {
            cmd_certify(&file, zeta, cli.tol_norm, cli.tol_eig, &opt_cfg)
        }
        Command::Sweep {
            mode,
            n,
            grid,
            f,
            out,
        } => cmd_sweep(mode, n, grid.as_deref(), f, &out),
        Command::Reproduce { target } => cmd_reproduce(target, cli.seed, &opt_cfg, cli.tol_eig),
        Command::Sample {
            kind,
            n,
            d,
            spectrum,
            k,
            eps,
            phase,
            points,
            spacing,
            sum_width,
            diff_width,
            out,
        } => cmd_sample(SampleArgs {
            kind,
            n,
            d,
            spectrum,
            k,
            eps,
            phase,
            points,
            spacing,
            sum_width,
            diff_width,
            out,
            seed: cli.seed,
        }),
    }
}

fn load(path: &Path, norm_tol: f64) -> Result<StateData, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: 1,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    Ok(read_state(&text, norm_tol)?)
}

fn render_bracket(label: &str, bracket: &QuantBracket) -> String {
    if bracket.certified_exact {
        format!("{label}: {} (certified exact)", bracket.estimate)
    } else {
        format!(
            "{label}: estimate {} in certified bracket [{}, {}]",
            bracket.estimate, bracket.lower, bracket.upper
        )
    }
}

fn cmd_describe(
    file: &Path,
    support_threshold: f64,
    roof: bool,
    tol_norm: f64,
    tol_eig: f64,
    opt_cfg: &OptConfig,
) -> Result<(), Failure> {
    let data = load(file, tol_norm)?;
    let n = data.party_count();
    let obs = data.obs().clone();
    let signs = SignVector::uniform(n);
    let frame = helmert_frame(n);

    println!("kind: {}", data.kind_name());
    println!("parties (n): {n}");
    println!("local dimension (d): {}", obs.dim());

    match data {
        StateData::Pure(state) => {
            let norm: f64 = state.probabilities().iter().sum();
            println!(
                "norm check: |sum - 1| = {:.3e} (tol {tol_norm:.1e})",
                (norm - 1.0).abs()
            );
            let locals = local_variances(&state);
            println!(
                "per-party variance: [{}]",
                locals
                    .iter()
                    .map(|v| format!("{v}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            let coll = CollectiveOperator::collective(&obs, &signs)?;
            let coll_var = collvar::moments::variance(&state, &coll)?;
            println!("collective variance: {coll_var}");
            let f = f_pure(&state, &signs);
            println!("f_pure: {f}");
            if f > n as f64 {
                println!("verdict: entanglement witnessed (F > n)");
            } else {
                println!("verdict: no entanglement witnessed (F <= n)");
            }
            let report = thickness(&state, &frame);
            match report.zeta_hat {
                Some(z) => println!("thickness zeta_hat: {z}"),
                None => println!("thickness zeta_hat: undefined (no collective spread)"),
            }
            let support = spectral_support(&state, support_threshold);
            println!(
                "support size: {} (threshold {support_threshold:.1e})",
                support.len()
            );
        }
        StateData::Density(rho) => {
            describe_density(&rho, &signs, &frame, roof, tol_eig, opt_cfg)?;
        }
        StateData::Ensemble(ensemble) => {
            println!("ensemble members: {}", ensemble.members().len());
            let rho = ensemble.to_density();
            describe_density(&rho, &signs, &frame, roof, tol_eig, opt_cfg)?;
        }
    }
    Ok(())
}

fn describe_density(
    rho: &collvar::states::DensityState,
    signs: &SignVector,
    frame: &collvar::observables::OrthoFrame,
    roof: bool,
    tol_eig: f64,
    opt_cfg: &OptConfig,
) -> Result<(), Failure> {
    let trace: f64 = rho.diagonal_probabilities().iter().sum();
    println!("trace check: |Tr - 1| = {:.3e}", (trace - 1.0).abs());
    let locals = local_variances(rho);
    println!(
        "per-party variance: [{}]",
        locals
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let coll = CollectiveOperator::collective(rho.obs(), signs)?;
    println!(
        "collective variance: {}",
        collvar::moments::variance(rho, &coll)?
    );
    let fr = f_qfi_ratio(rho, signs, None, tol_eig)?;
    println!("{}", render_bracket("f_qfi_ratio", &fr));
    let fs = f_support(rho, signs, opt_cfg, tol_eig)?;
    println!("{}", render_bracket("f_support", &fs));
    if roof {
        let fcr = f_convex_roof(rho, signs, opt_cfg, tol_eig)?;
        println!("{}", render_bracket("f_convex_roof", &fcr));
    }
    let n = rho.party_count();
    let best_certified = certified_lower_bound(&fr, &fs);
    if best_certified > n as f64 {
        println!("verdict: entanglement witnessed (certified F > n)");
    } else {
        println!("verdict: no entanglement witnessed at certified level (F <= n)");
    }
    let report = thickness(rho, frame);
    match report.zeta_hat {
        Some(z) => println!("thickness zeta_hat: {z}"),
        None => println!("thickness zeta_hat: undefined (no collective spread)"),
    }
    println!("support size (rank): {}", rho.rank(tol_eig)?);
    Ok(())
}

/// Best lower bound the sound-witness policy allows: the exact Fisher ratio,
/// improved by the support extension only when its bracket is certified.
fn certified_lower_bound(fr: &QuantBracket, fs: &QuantBracket) -> f64 {
    let mut best = fr.estimate;
    if fs.certified_exact && fs.estimate > best {
        best = fs.estimate;
    }
    best
}

fn cmd_certify(
    file: &Path,
    zeta: Option<f64>,
    tol_norm: f64,
    tol_eig: f64,
    opt_cfg: &OptConfig,
) -> Result<(), Failure> {
    let data = load(file, tol_norm)?;
    let n = data.party_count();
    let signs = SignVector::uniform(n);
    let frame = helmert_frame(n);

    let (f_lower, method, zeta_hat) = match &data {
        StateData::Pure(state) => {
            let f = f_pure(state, &signs);
            let report = thickness(state, &frame);
            (f, "pure state (exact)", report.zeta_hat)
        }
        StateData::Density(rho) => {
            let (best, method, report) = density_certificate(rho, &signs, &frame, tol_eig, opt_cfg)?;
            (best, method, report)
        }
        StateData::Ensemble(ensemble) => {
            let rho = ensemble.to_density();
            let (best, method, report) =
                density_certificate(&rho, &signs, &frame, tol_eig, opt_cfg)?;
            (best, method, report)
        }
    };

    if let Some(z) = zeta {
        if z < 0.0 {
            return Err(Failure::usage(format!(
                "--zeta must be non-negative, got {z}"
            )));
        }
        if let Some(measured) = zeta_hat {
            if measured < z - 1e-9 {
                return Err(Failure::infeasible(format!(
                    "thickness hypothesis zeta = {z} does not hold for this state: \
                     measured zeta_hat = {measured}; refusing to certify under an \
                     unsupported assumption"
                )));
            }
        }
    }

    println!("parties (n): {n}");
    println!("certified F lower bound: {f_lower} (method: {method})");
    match zeta_hat {
        Some(z) => println!("measured thickness zeta_hat: {z}"),
        None => println!("measured thickness zeta_hat: undefined"),
    }
    let verdict = certify(f_lower, n, zeta)?;
    match zeta {
        Some(z) => println!("bound table (thickness-adjusted floor form, zeta = {z}):"),
        None => println!("bound table (floor form):"),
    }
    for k in 1..=n {
        let bound = match zeta {
            None => bound_k(n, k)?.0,
            Some(z) => bound_k_thick(n, k, z)?.0,
        };
        let status = if f_lower > bound { "VIOLATED" } else { "respected" };
        println!("  k={k}: bound {bound}  {status}");
    }
    println!("entanglement depth >= {}", verdict.depth_lower_bound);
    Ok(())
}

fn density_certificate(
    rho: &collvar::states::DensityState,
    signs: &SignVector,
    frame: &collvar::observables::OrthoFrame,
    tol_eig: f64,
    opt_cfg: &OptConfig,
) -> Result<(f64, &'static str, Option<f64>), Failure> {
    let fr = f_qfi_ratio(rho, signs, None, tol_eig)?;
    let fs = f_support(rho, signs, opt_cfg, tol_eig)?;
    let report = thickness(rho, frame);
    let best = certified_lower_bound(&fr, &fs);
    let method = if fs.certified_exact && fs.estimate > fr.estimate {
        "support-normalized extension (certified)"
    } else {
        "Fisher ratio (exact)"
    };
    Ok((best, method, report.zeta_hat))
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure::usage(format!(
            "grid must be start:stop:count, got '{spec}'"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| Failure::usage(format!("bad grid start '{}'", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| Failure::usage(format!("bad grid stop '{}'", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Failure::usage(format!("bad grid count '{}'", parts[2])))?;
    if count < 1 {
        return Err(Failure::usage("grid count must be at least 1"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect())
}

fn fmt_csv_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_sweep(
    mode: SweepMode,
    n: usize,
    grid: Option<&str>,
    f: Option<f64>,
    out: &Path,
) -> Result<(), Failure> {
    if n < 1 {
        return Err(Failure::usage("--n must be at least 1"));
    }
    let mut csv = String::new();
    match mode {
        SweepMode::BoundTable => {
            csv.push_str("k,floor_bound,linear_bound\n");
            for k in 1..=n {
                let (floor, linear) = bound_k(n, k)?;
                let _ = writeln!(csv, "{k},{},{}", floor as u64, linear as u64);
            }
        }
        SweepMode::KOfZeta => {
            let zetas = parse_grid(grid.unwrap_or("0:1:11"))?;
            csv.push_str("zeta,k,feasible\n");
            for zeta in zetas {
                match k_of_zeta(n, zeta) {
                    Ok(k) => {
                        let _ = writeln!(csv, "{},{},true", fmt_csv_real(zeta), fmt_csv_real(k));
                    }
                    Err(_) => {
                        let _ = writeln!(csv, "{},,false", fmt_csv_real(zeta));
                    }
                }
            }
        }
        SweepMode::ZetaOfK => {
            let default = format!("1:{n}:{n}");
            let ks = parse_grid(grid.unwrap_or(&default))?;
            csv.push_str("k,zeta,feasible\n");
            for k in ks {
                match collvar::witnesses::zeta_of_k(n, k) {
                    Ok(z) => {
                        let _ = writeln!(csv, "{},{},true", fmt_csv_real(k), fmt_csv_real(z));
                    }
                    Err(_) => {
                        let _ = writeln!(csv, "{},,false", fmt_csv_real(k));
                    }
                }
            }
        }
        SweepMode::ZetaForF => {
            let level = f.ok_or_else(|| Failure::usage("mode zeta_for_f needs --f"))?;
            let default = format!("1:{n}:{n}");
            let ks = parse_grid(grid.unwrap_or(&default))?;
            csv.push_str("k,zeta,feasible\n");
            for k in ks {
                match zeta_for_f(n, k, level) {
                    Ok(z) => {
                        let _ = writeln!(csv, "{},{},true", fmt_csv_real(k), fmt_csv_real(z));
                    }
                    Err(_) => {
                        let _ = writeln!(csv, "{},,false", fmt_csv_real(k));
                    }
                }
            }
        }
        SweepMode::KForF => {
            let level = f.ok_or_else(|| Failure::usage("mode k_for_f needs --f"))?;
            let zetas = parse_grid(grid.unwrap_or("0:1:11"))?;
            csv.push_str("zeta,k,feasible\n");
            for zeta in zetas {
                match k_for_f(n, zeta, level) {
                    Ok(k) => {
                        let _ = writeln!(csv, "{},{},true", fmt_csv_real(zeta), fmt_csv_real(k));
                    }
                    Err(_) => {
                        let _ = writeln!(csv, "{},,false", fmt_csv_real(zeta));
                    }
                }
            }
        }
    }
    std::fs::write(out, csv)?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

struct ReproRow {
    case: String,
    computed: f64,
    expected: f64,
    tol: f64,
}

impl ReproRow {
    fn passes(&self) -> bool {
        (self.computed - self.expected).abs() <= self.tol
    }
}

fn print_report(rows: &[ReproRow]) {
    println!(
        "{:<46} {:>24} {:>24} {:>10} {:>6}",
        "case", "computed", "expected", "abs_err", "status"
    );
    let mut max_err = 0.0f64;
    let mut passed = 0usize;
    for row in rows {
        let err = (row.computed - row.expected).abs();
        if err > max_err {
            max_err = err;
        }
        let status = if row.passes() { "PASS" } else { "FAIL" };
        if row.passes() {
            passed += 1;
        }
        println!(
            "{:<46} {:>24.16e} {:>24.16e} {:>10.3e} {:>6}",
            row.case, row.computed, row.expected, err, status
        );
    }
    println!(
        "summary: {passed}/{} rows pass, max abs error {max_err:.3e}",
        rows.len()
    );
}

fn noisy_family_rows(
    seed: u64,
    opt_cfg: &OptConfig,
    tol_eig: f64,
) -> Result<Vec<ReproRow>, Failure> {
    let mut rows = Vec::new();
    for n in 2..=5usize {
        let signs = SignVector::uniform(n);
        for tenth in 0..=9usize {
            let eps = tenth as f64 / 10.0;
            let expected = (1.0 - eps) * (1.0 - eps)
                / ((1.0 - eps) + eps / 2f64.powi(n as i32 - 1))
                * (n * n) as f64;
            let rho = depolarized_ghz(n, eps)?;
            let fr = f_qfi_ratio(&rho, &signs, None, tol_eig)?;
            rows.push(ReproRow {
                case: format!("depolarized n={n} eps={eps:.1} f_qfi_ratio"),
                computed: fr.estimate,
                expected,
                tol: 1e-9,
            });
            let fs = f_support(&rho, &signs, opt_cfg, tol_eig)?;
            rows.push(ReproRow {
                case: format!("depolarized n={n} eps={eps:.1} f_support"),
                computed: fs.estimate,
                expected,
                tol: 1e-9,
            });
        }
    }
    for n in [2usize, 4] {
        let signs = SignVector::uniform(n);
        for eps in [0.25, 0.5] {
            let expected = (1.0 - eps) * (n * n) as f64;
            let rho = ghz_mix(n, eps)?;
            let fr = f_qfi_ratio(&rho, &signs, None, tol_eig)?;
            rows.push(ReproRow {
                case: format!("ghz_mix n={n} eps={eps} f_qfi_ratio"),
                computed: fr.estimate,
                expected,
                tol: 1e-6,
            });
            let fs = f_support(&rho, &signs, opt_cfg, tol_eig)?;
            rows.push(ReproRow {
                case: format!("ghz_mix n={n} eps={eps} f_support"),
                computed: fs.estimate,
                expected,
                tol: 1e-6,
            });
            let cfg = OptConfig {
                seed,
                ..opt_cfg.clone()
            };
            let fcr = f_convex_roof(&rho, &signs, &cfg, tol_eig)?;
            rows.push(ReproRow {
                case: format!("ghz_mix n={n} eps={eps} f_convex_roof"),
                computed: fcr.estimate,
                expected,
                tol: 1e-6,
            });
        }
    }
    Ok(rows)
}

fn ghz_saturation_rows() -> Result<Vec<ReproRow>, Failure> {
    let mut rows = Vec::new();
    let qubit = LocalObservable::qubit();
    for n in 2..=6usize {
        let state = ghz_like(&qubit, n, 0.0)?;
        rows.push(ReproRow {
            case: format!("ghz d=2 n={n} f_pure"),
            computed: f_pure(&state, &SignVector::uniform(n)),
            expected: (n * n) as f64,
            tol: 1e-9,
        });
    }
    let qutrit = LocalObservable::evenly_spaced(3, 1.0)?;
    for n in [2usize, 3] {
        let lines = enumerate_diagonal_lines(&qutrit, n)?;
        let main = lines
            .iter()
            .find(|l| l.offset_key.iter().all(|&x| x == 0.0))
            .expect("main diagonal always exists");
        let coeffs = vec![Complex64::ONE; main.point_count()];
        let state = line_state(&qutrit, main, &coeffs)?;
        rows.push(ReproRow {
            case: format!("diagonal d=3 n={n} f_pure"),
            computed: f_pure(&state, &SignVector::uniform(n)),
            expected: (n * n) as f64,
            tol: 1e-9,
        });
    }
    Ok(rows)
}

fn popoviciu_rows(seed: u64) -> Result<Vec<ReproRow>, Failure> {
    let mut rows = Vec::new();
    let worst = popoviciu_sampler(0.0, 1.0, 10_000, seed)?;
    // report the exceedance over the ceiling, which must be zero
    rows.push(ReproRow {
        case: "popoviciu sampled exceedance over ceiling".into(),
        computed: (worst - 0.25).max(0.0),
        expected: 0.0,
        tol: 1e-12,
    });
    let weights = [0.5, 0.5];
    let values = [0.0, 1.0];
    let mean: f64 = weights.iter().zip(&values).map(|(w, v)| w * v).sum();
    let second: f64 = weights.iter().zip(&values).map(|(w, v)| w * v * v).sum();
    rows.push(ReproRow {
        case: "popoviciu two-point equality case".into(),
        computed: second - mean * mean,
        expected: 0.25,
        tol: 1e-12,
    });
    Ok(rows)
}

fn tradeoff_rows() -> Result<Vec<ReproRow>, Failure> {
    let mut rows = Vec::new();
    for n in [5usize, 10, 50] {
        rows.push(ReproRow {
            case: format!("k_of_zeta n={n} endpoint zeta=0"),
            computed: k_of_zeta(n, 0.0)?,
            expected: n as f64,
            tol: 0.0,
        });
        rows.push(ReproRow {
            case: format!("k_of_zeta n={n} endpoint zeta=1"),
            computed: k_of_zeta(n, 1.0)?,
            expected: 1.0,
            tol: 0.0,
        });
        let mut violations = 0usize;
        let mut prev = f64::INFINITY;
        for i in 0..=100 {
            let k = k_of_zeta(n, i as f64 / 100.0)?;
            if k >= prev {
                violations += 1;
            }
            prev = k;
        }
        rows.push(ReproRow {
            case: format!("k_of_zeta n={n} monotonicity violations"),
            computed: violations as f64,
            expected: 0.0,
            tol: 0.0,
        });
    }
    let n = 10;
    for k in [2.0f64, 3.0, 5.0, 8.0] {
        let level = 15.0;
        let zeta = zeta_for_f(n, k, level)?;
        let back = k_for_f(n, zeta, level)?;
        rows.push(ReproRow {
            case: format!("level-set round trip n={n} k={k} f={level}"),
            computed: back,
            expected: k,
            tol: 1e-12,
        });
    }
    Ok(rows)
}

fn cmd_reproduce(
    target: ReproduceTarget,
    seed: u64,
    opt_cfg: &OptConfig,
    tol_eig: f64,
) -> Result<(), Failure> {
    let rows = match target {
        ReproduceTarget::NoisyFamilies => noisy_family_rows(seed, opt_cfg, tol_eig)?,
        ReproduceTarget::GhzSaturation => ghz_saturation_rows()?,
        ReproduceTarget::Popoviciu => popoviciu_rows(seed)?,
        ReproduceTarget::Tradeoff => tradeoff_rows()?,
    };
    print_report(&rows);
    Ok(())
}

struct SampleArgs {
    kind: SampleKindArg,
    n: Option<usize>,
    d: usize,
    spectrum: Option<String>,
    k: Option<usize>,
    eps: Option<f64>,
    phase: f64,
    points: Option<usize>,
    spacing: f64,
    sum_width: Option<f64>,
    diff_width: Option<f64>,
    out: PathBuf,
    seed: u64,
}

fn observable_from_args(d: usize, spectrum: Option<&str>) -> Result<LocalObservable, Failure> {
    if let Some(spec) = spectrum {
        let values: Vec<f64> = spec
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Failure::usage(format!("bad spectrum entry '{s}'")))
            })
            .collect::<Result<_, _>>()?;
        return Ok(LocalObservable::new(&values)?);
    }
    if d == 2 {
        Ok(LocalObservable::qubit())
    } else {
        Ok(LocalObservable::evenly_spaced(d, 1.0)?)
    }
}

fn cmd_sample(args: SampleArgs) -> Result<(), Failure> {
    let need_n = || args.n.ok_or_else(|| Failure::usage("this kind needs --n"));
    let data = match args.kind {
        SampleKindArg::Ghz => {
            let obs = observable_from_args(args.d, args.spectrum.as_deref())?;
            StateData::Pure(ghz_like(&obs, need_n()?, args.phase)?)
        }
        SampleKindArg::Haar => {
            let obs = observable_from_args(args.d, args.spectrum.as_deref())?;
            StateData::Pure(sample_haar(&obs, need_n()?, args.seed)?)
        }
        SampleKindArg::Product => {
            let obs = observable_from_args(args.d, args.spectrum.as_deref())?;
            StateData::Pure(sample_product(&obs, need_n()?, args.seed)?)
        }
        SampleKindArg::Ksep => {
            let obs = observable_from_args(args.d, args.spectrum.as_deref())?;
            let n = need_n()?;
            let k = args.k.ok_or_else(|| Failure::usage("kind ksep needs --k"))?;
            let (state, parts) = sample_k_separable(&obs, n, k, args.seed)?;
            let sidecar = args.out.with_extension("partition.json");
            let parts_json = format!(
                "{{\"seed\": {}, \"k\": {k}, \"parts\": [{}]}}\n",
                args.seed,
                parts
                    .iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            std::fs::write(&sidecar, parts_json)?;
            eprintln!("wrote {}", sidecar.display());
            StateData::Pure(state)
        }
        SampleKindArg::Gaussian => {
            let points = args
                .points
                .ok_or_else(|| Failure::usage("kind gaussian needs --points"))?;
            let sum_width = args
                .sum_width
                .ok_or_else(|| Failure::usage("kind gaussian needs --sum-width"))?;
            let diff_width = args
                .diff_width
                .ok_or_else(|| Failure::usage("kind gaussian needs --diff-width"))?;
            let obs = LocalObservable::evenly_spaced(points, args.spacing)?;
            StateData::Pure(gaussian_grid_state(&obs, sum_width, diff_width)?)
        }
        SampleKindArg::Depolarized => {
            let eps = args
                .eps
                .ok_or_else(|| Failure::usage("kind depolarized needs --eps"))?;
            StateData::Density(depolarized_ghz(need_n()?, eps)?)
        }
        SampleKindArg::GhzMix => {
            let eps = args
                .eps
                .ok_or_else(|| Failure::usage("kind ghz-mix needs --eps"))?;
            StateData::Density(ghz_mix(need_n()?, eps)?)
        }
    };
    std::fs::write(&args.out, write_state(&data))?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}
