//! Command-line front end: evaluate deformed numbers and tables, compute
//! distribution tables and moment reports, emit JSON/CSV, and run the
//! identity audit.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rpq::audit::{run_audit, Suite};
use rpq::combinatorics::{stirling_table, StirlingKind, StirlingTable};
use rpq::distributions::{
    binomial_classical_factorial_moment, binomial_factorial_moment, binomial_mean, binomial_pmf,
    binomial_product_moment, binomial_variance, classical_falling_moment_of_pmf,
    deformed_falling_moment, deformed_power_moment, euler_classical_factorial_moment,
    euler_factorial_moment, euler_pmf, hypergeometric_pmf,
    inverse_polya_classical_factorial_moment, inverse_polya_factorial_moment, inverse_polya_pmf,
    polya_classical_factorial_moment, polya_factorial_moment, polya_pmf, product_moment_bracket,
    sample, BinomialParams, EulerParams, InversePolyaParams, Method, MomentReport, PmfTable,
    PolyaParams,
};
use rpq::special_functions::{exp_big_e, exp_small_e};
use rpq::DeformationSpec;

#[derive(Parser)]
#[command(
    name = "rpq",
    version,
    about = "Deformed numbers, combinatorics and discrete distributions with a built-in identity audit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    ArikCoon,
    Quesne,
    JagannathanSrinivasa,
    ChakrabartyJagannathan,
    GeneralizedQuesne,
    MultiParameter,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Direct,
    Recursive,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Direct => Method::Direct,
            MethodArg::Recursive => Method::Recursive,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Binomial,
    Euler,
    Polya,
    InversePolya,
    Hypergeometric,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableKindArg {
    First,
    Second,
}

/// Deformation selection shared by every subcommand.
#[derive(Args)]
struct DeformationArgs {
    /// Deformation kind.
    #[arg(long, value_enum)]
    kind: KindArg,
    /// First deformation parameter (two-parameter kinds).
    #[arg(short = 'p', long)]
    p: Option<f64>,
    /// Second deformation parameter.
    #[arg(short = 'q', long)]
    q: Option<f64>,
    /// Exponent parameter of the multi-parameter kind.
    #[arg(long)]
    mu: Option<f64>,
    /// Exponent parameter of the multi-parameter kind.
    #[arg(long)]
    nu: Option<f64>,
    /// Scale factor of the multi-parameter kind.
    #[arg(long, default_value_t = 1.0)]
    g: f64,
}

impl DeformationArgs {
    fn build(&self) -> Result<DeformationSpec, CliError> {
        let need_q = || {
            self.q
                .ok_or_else(|| CliError::usage("this kind requires -q"))
        };
        let need_p = || {
            self.p
                .ok_or_else(|| CliError::usage("this kind requires -p"))
        };
        let spec = match self.kind {
            KindArg::ArikCoon => DeformationSpec::arik_coon(need_q()?),
            KindArg::Quesne => DeformationSpec::quesne(need_q()?),
            KindArg::JagannathanSrinivasa => {
                DeformationSpec::jagannathan_srinivasa(need_p()?, need_q()?)
            }
            KindArg::ChakrabartyJagannathan => {
                DeformationSpec::chakrabarty_jagannathan(need_p()?, need_q()?)
            }
            KindArg::GeneralizedQuesne => DeformationSpec::generalized_quesne(need_p()?, need_q()?),
            KindArg::MultiParameter => DeformationSpec::multi_parameter(
                need_p()?,
                need_q()?,
                self.mu.ok_or_else(|| CliError::usage("this kind requires --mu"))?,
                self.nu.ok_or_else(|| CliError::usage("this kind requires --nu"))?,
                self.g,
            ),
        };
        spec.map_err(CliError::from)
    }
}

/// Family parameters shared by `pmf`, `moments` and `sample`.
#[derive(Args)]
struct FamilyArgs {
    /// Distribution family.
    #[arg(value_enum)]
    family: FamilyArg,
    /// Number of trials / target white draws.
    #[arg(long)]
    n: Option<u32>,
    /// Success weight of the binomial family.
    #[arg(long)]
    p0: Option<f64>,
    /// Rate of the Euler family.
    #[arg(long)]
    theta: Option<f64>,
    /// Rescaled white-box weight of the urn families.
    #[arg(short = 'm', long)]
    m: Option<f64>,
    /// Rescaled black-box weight of the urn families.
    #[arg(short = 'u', long)]
    u: Option<f64>,
    /// Per-draw reinforcement of the urn families.
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    x_step: i32,
    /// Cumulative tail tolerance for truncated supports.
    #[arg(long, default_value_t = 1e-9)]
    tail_tol: f64,
}

enum FamilySpec {
    Binomial(BinomialParams),
    Euler(EulerParams),
    Polya(PolyaParams),
    InversePolya(InversePolyaParams),
    Hypergeometric { n: u32, m: f64, u: f64 },
}

impl FamilyArgs {
    fn build(&self) -> Result<FamilySpec, CliError> {
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| CliError::usage(&format!("this family requires --{name}")))
        };
        let need_n = || self.n.ok_or_else(|| CliError::usage("this family requires --n"));
        Ok(match self.family {
            FamilyArg::Binomial => FamilySpec::Binomial(BinomialParams::new(
                need_n()?,
                need("p0", self.p0)?,
            )?),
            FamilyArg::Euler => FamilySpec::Euler(EulerParams::new(
                need("theta", self.theta)?,
                self.tail_tol,
            )?),
            FamilyArg::Polya => FamilySpec::Polya(PolyaParams::new(
                need_n()?,
                need("m", self.m)?,
                need("u", self.u)?,
                self.x_step,
            )?),
            FamilyArg::InversePolya => FamilySpec::InversePolya(InversePolyaParams::new(
                need_n()?,
                need("m", self.m)?,
                need("u", self.u)?,
                self.x_step,
                self.tail_tol,
            )?),
            FamilyArg::Hypergeometric => FamilySpec::Hypergeometric {
                n: need_n()?,
                m: need("m", self.m)?,
                u: need("u", self.u)?,
            },
        })
    }

    fn pmf(&self, d: &DeformationSpec, method: Method) -> Result<PmfTable, CliError> {
        Ok(match self.build()? {
            FamilySpec::Binomial(p) => binomial_pmf(d, &p, method)?,
            FamilySpec::Euler(p) => euler_pmf(d, &p, method)?,
            FamilySpec::Polya(p) => polya_pmf(d, &p, method)?,
            FamilySpec::InversePolya(p) => inverse_polya_pmf(d, &p, method)?,
            FamilySpec::Hypergeometric { n, m, u } => hypergeometric_pmf(d, n, m, u)?,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the deformed number [x].
    Number {
        #[command(flatten)]
        deformation: DeformationArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Evaluate the deformed factorial [n]!.
    Factorial {
        #[command(flatten)]
        deformation: DeformationArgs,
        #[arg(long)]
        n: u32,
    },
    /// Evaluate the deformed binomial coefficient [x; k].
    Binom {
        #[command(flatten)]
        deformation: DeformationArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        k: u32,
    },
    /// Probability table of a distribution family.
    Pmf {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        deformation: DeformationArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Closed-form moments of a family against their brute-force oracles.
    Moments {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        deformation: DeformationArgs,
        /// Highest deformed factorial-moment order to report.
        #[arg(long, default_value_t = 2)]
        j_max: u32,
        /// Free integer exponent of the classical-moment conversions.
        #[arg(long, default_value_t = 0)]
        tau: i64,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Triangular table of noncentral Stirling numbers.
    Stirling {
        #[command(flatten)]
        deformation: DeformationArgs,
        #[arg(long, value_enum, default_value_t = TableKindArg::First)]
        table_kind: TableKindArg,
        /// Noncentral offset.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        j: i64,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Evaluate both deformed exponentials and their reciprocity residual.
    Exp {
        #[command(flatten)]
        deformation: DeformationArgs,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_terms: usize,
    },
    /// Seeded inverse-CDF samples from a family.
    Sample {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        deformation: DeformationArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Run the identity audit; exits 1 if any asserted identity fails.
    Verify {
        /// Suite to run (`all` or one of the audit groups).
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
}

struct CliError {
    message: String,
    exit: u8,
}

impl CliError {
    fn usage(message: &str) -> CliError {
        CliError { message: message.into(), exit: 2 }
    }
}

impl From<rpq::Error> for CliError {
    fn from(e: rpq::Error) -> CliError {
        CliError { message: e.to_string(), exit: 2 }
    }
}

#[derive(Serialize)]
struct LabeledMoment {
    quantity: String,
    #[serde(flatten)]
    report: MomentReport,
}

impl LabeledMoment {
    fn new(quantity: &str, order: u32, closed: f64, brute: f64) -> LabeledMoment {
        LabeledMoment { quantity: quantity.into(), report: MomentReport::new(order, closed, brute) }
    }
}

/// Kebab-case name of a serde-tagged enum value.
fn json_name<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap().trim_matches('"').to_string()
}

fn render_pmf(pmf: &PmfTable, format: FormatArg) -> String {
    match format {
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(pmf).expect("serializable table");
            s.push('\n');
            s
        }
        FormatArg::Csv => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "# family={} deformation={} params={} method={} residual={} truncated={}",
                json_name(&pmf.family),
                serde_json::to_string(&pmf.deformation).unwrap(),
                serde_json::to_string(&pmf.params).unwrap(),
                json_name(&pmf.method),
                pmf.normalization_residual,
                pmf.truncated
            );
            out.push_str("k,p_k\n");
            for (k, p) in pmf.support.iter().zip(&pmf.probs) {
                let _ = writeln!(out, "{k},{p}");
            }
            out
        }
        FormatArg::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "family={} residual={:.3e} truncated={} method={}",
                json_name(&pmf.family),
                pmf.normalization_residual,
                pmf.truncated,
                json_name(&pmf.method)
            );
            for (k, p) in pmf.support.iter().zip(&pmf.probs) {
                let _ = writeln!(out, "{k:>4}  {p}");
            }
            out
        }
    }
}

fn render_moments(rows: &[LabeledMoment], format: FormatArg) -> String {
    match format {
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(rows).expect("serializable rows");
            s.push('\n');
            s
        }
        FormatArg::Csv => {
            let mut out = String::from("quantity,order,closed_form,brute_force,abs_err,rel_err\n");
            for r in rows {
                let m = &r.report;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.quantity, m.order, m.closed_form, m.brute_force, m.abs_err, m.rel_err
                );
            }
            out
        }
        FormatArg::Text => {
            let mut out = String::new();
            for r in rows {
                let m = &r.report;
                let _ = writeln!(
                    out,
                    "{:<28} order={} closed={} brute={} abs_err={:.3e}",
                    r.quantity, m.order, m.closed_form, m.brute_force, m.abs_err
                );
            }
            out
        }
    }
}

fn render_stirling(table: &StirlingTable, format: FormatArg) -> String {
    match format {
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(table).expect("serializable table");
            s.push('\n');
            s
        }
        FormatArg::Csv => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "# kind={:?} j={} n_max={} deformation={}",
                table.kind,
                table.j_offset,
                table.n_max,
                serde_json::to_string(&table.deformation).unwrap()
            );
            out.push_str("n,k,value\n");
            for (n, row) in table.entries.iter().enumerate() {
                for (k, v) in row.iter().enumerate() {
                    let _ = writeln!(out, "{n},{k},{v}");
                }
            }
            out
        }
        FormatArg::Text => {
            let mut out = String::new();
            for (n, row) in table.entries.iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "n={n:<2} {}", cells.join("  "));
            }
            out
        }
    }
}

fn moments_rows(
    family: &FamilyArgs,
    d: &DeformationSpec,
    j_max: u32,
    tau: i64,
) -> Result<Vec<LabeledMoment>, CliError> {
    let mut rows = Vec::new();
    match family.build()? {
        FamilySpec::Binomial(p) => {
            let pmf = binomial_pmf(d, &p, Method::Direct)?;
            for j in 1..=j_max {
                rows.push(LabeledMoment::new(
                    "deformed-factorial-moment",
                    j,
                    binomial_factorial_moment(d, &p, j),
                    deformed_falling_moment(&pmf, d, j),
                ));
            }
            let mean = deformed_falling_moment(&pmf, d, 1);
            rows.push(LabeledMoment::new("mean", 1, binomial_mean(d, &p), mean));
            rows.push(LabeledMoment::new(
                "variance",
                2,
                binomial_variance(d, &p),
                deformed_power_moment(&pmf, d, 2) - mean * mean,
            ));
            for r in 1..=j_max.min(p.n) {
                rows.push(LabeledMoment::new(
                    "product-moment",
                    r,
                    binomial_product_moment(d, &p, r),
                    product_moment_bracket(&pmf, d, r),
                ));
            }
            for i in 1..=j_max.min(p.n) {
                rows.push(LabeledMoment::new(
                    "classical-factorial-moment",
                    i,
                    binomial_classical_factorial_moment(d, &p, i, tau)?,
                    classical_falling_moment_of_pmf(&pmf, i),
                ));
            }
        }
        FamilySpec::Euler(p) => {
            let pmf = euler_pmf(d, &p, Method::Direct)?;
            for j in 1..=j_max {
                rows.push(LabeledMoment::new(
                    "deformed-factorial-moment",
                    j,
                    euler_factorial_moment(d, &p, j)?,
                    deformed_falling_moment(&pmf, d, j),
                ));
            }
            for i in 1..=j_max {
                rows.push(LabeledMoment::new(
                    "classical-factorial-moment",
                    i,
                    euler_classical_factorial_moment(d, &p, i, tau, 18)?,
                    classical_falling_moment_of_pmf(&pmf, i),
                ));
            }
        }
        FamilySpec::Polya(p) => {
            let pmf = polya_pmf(d, &p, Method::Direct)?;
            let dp = d.base_change(p.x_step);
            for j in 1..=j_max.min(p.n) {
                rows.push(LabeledMoment::new(
                    "deformed-factorial-moment",
                    j,
                    polya_factorial_moment(d, &p, j)?,
                    deformed_falling_moment(&pmf, &dp, j),
                ));
            }
            for i in 1..=j_max.min(p.n) {
                rows.push(LabeledMoment::new(
                    "classical-factorial-moment",
                    i,
                    polya_classical_factorial_moment(d, &p, i, tau)?,
                    classical_falling_moment_of_pmf(&pmf, i),
                ));
            }
        }
        FamilySpec::InversePolya(p) => {
            let pmf = inverse_polya_pmf(d, &p, Method::Direct)?;
            let dp = d.base_change(p.x_step);
            for j in 1..=j_max {
                rows.push(LabeledMoment::new(
                    "deformed-factorial-moment",
                    j,
                    inverse_polya_factorial_moment(d, &p, j)?,
                    deformed_falling_moment(&pmf, &dp, j),
                ));
            }
            for i in 1..=j_max.min(p.n) {
                rows.push(LabeledMoment::new(
                    "classical-factorial-moment",
                    i,
                    inverse_polya_classical_factorial_moment(d, &p, i, tau)?,
                    classical_falling_moment_of_pmf(&pmf, i),
                ));
            }
        }
        FamilySpec::Hypergeometric { n, m, u } => {
            let p = PolyaParams::new(n, m, u, -1)?;
            let pmf = hypergeometric_pmf(d, n, m, u)?;
            for j in 1..=j_max.min(n) {
                rows.push(LabeledMoment::new(
                    "deformed-factorial-moment",
                    j,
                    polya_factorial_moment(d, &p, j)?,
                    deformed_falling_moment(&pmf, d, j),
                ));
            }
            for i in 1..=j_max.min(n) {
                rows.push(LabeledMoment::new(
                    "classical-factorial-moment",
                    i,
                    polya_classical_factorial_moment(d, &p, i, tau)?,
                    classical_falling_moment_of_pmf(&pmf, i),
                ));
            }
        }
    }
    Ok(rows)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Number { deformation, x } => {
            let d = deformation.build()?;
            println!("{}", d.number(x));
        }
        Command::Factorial { deformation, n } => {
            let d = deformation.build()?;
            println!("{}", d.factorial(n));
        }
        Command::Binom { deformation, x, k } => {
            let d = deformation.build()?;
            println!("{}", d.binomial_coefficient(x, k));
        }
        Command::Pmf { family, deformation, method, format } => {
            let d = deformation.build()?;
            let pmf = family.pmf(&d, method.into())?;
            print!("{}", render_pmf(&pmf, format));
        }
        Command::Moments { family, deformation, j_max, tau, format } => {
            let d = deformation.build()?;
            let rows = moments_rows(&family, &d, j_max, tau)?;
            print!("{}", render_moments(&rows, format));
        }
        Command::Stirling { deformation, table_kind, j, n_max, format } => {
            let d = deformation.build()?;
            let kind = match table_kind {
                TableKindArg::First => StirlingKind::First,
                TableKindArg::Second => StirlingKind::Second,
            };
            let table = stirling_table(&d, kind, j, n_max)?;
            print!("{}", render_stirling(&table, format));
        }
        Command::Exp { deformation, z, tol, max_terms } => {
            let d = deformation.build()?;
            let big = exp_big_e(&d, z, tol, max_terms)?;
            let small = exp_small_e(&d, z, tol, max_terms)?;
            let big_neg = exp_big_e(&d, -z, tol, max_terms)?;
            println!("E(z)={big}");
            println!("e(z)={small}");
            println!("E(-z)*e(z)-1={}", big_neg * small - 1.0);
        }
        Command::Sample { family, deformation, seed, count, format } => {
            let d = deformation.build()?;
            let pmf = family.pmf(&d, Method::Direct)?;
            let values = sample(&pmf, seed, count)?;
            match format {
                FormatArg::Json => println!("{}", serde_json::to_string(&values).unwrap()),
                FormatArg::Csv => {
                    println!("i,value");
                    for (i, v) in values.iter().enumerate() {
                        println!("{i},{v}");
                    }
                }
                FormatArg::Text => {
                    for v in &values {
                        println!("{v}");
                    }
                }
            }
        }
        Command::Verify { suite, format } => {
            let suites: Vec<Suite> = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                match Suite::from_name(&suite) {
                    Some(s) => vec![s],
                    None => {
                        return Err(CliError::usage(&format!(
                            "unknown suite '{suite}' (expected 'all' or one of {})",
                            Suite::ALL.map(|s| s.name()).join(", ")
                        )))
                    }
                }
            };
            let report = run_audit(&suites);
            match format {
                FormatArg::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
                FormatArg::Csv => {
                    println!("status,id,kind,point,max_residual,tolerance");
                    for e in &report.entries {
                        println!(
                            "{},{},{},\"{}\",{},{}",
                            json_name(&e.status), e.id, e.kind, e.point, e.max_residual, e.tolerance
                        );
                    }
                }
                FormatArg::Text => print!("{}", report.render_text()),
            }
            if !report.passed() {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit)
        }
    }
}
