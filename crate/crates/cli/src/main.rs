use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gfsbox::analysis::analyze_with;
use gfsbox::bcn::{output_bcns_from_decimals, parse_bcn_lines, sbox_to_bcns};
use gfsbox::coeff::{big_sbox_probe_concurrent, parse_coeff_file, CoeffSource, Constructed};
use gfsbox::generator::{candidate_stats_with, search_with, Mode, Sampling, SearchConfig};
use gfsbox::{
    bcns_to_sbox, coeffs_from_sbox, generate, sbox_from_coeffs, Bcn, Exec, GfPolynomial, Order,
    Role, SBox, Verdict,
};
use num_bigint::BigUint;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "gfsbox",
    version,
    about = "Build, encode, check and analyze n-bit S-boxes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Data output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Write data here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Disable data-parallel evaluation.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Input {
    /// Input file; standard input when absent or `-`.
    #[arg(short, long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct Planes {
    #[command(flatten)]
    input: Input,

    /// Output-plane decimals, highest plane first, instead of a BCN file.
    decimals: Vec<String>,

    /// Width for positional decimals.
    #[arg(short, long)]
    n: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// S-box to its output (and optionally input) bit-planes.
    Encode {
        #[command(flatten)]
        input: Input,
        /// Also emit the input planes.
        #[arg(long)]
        inputs: bool,
    },
    /// Output bit-planes back to an S-box.
    Decode(Planes),
    /// S-box from a coefficient file, or probe a 32/64-bit generator file.
    FromCoeffs {
        #[command(flatten)]
        input: Input,
        /// Reading order, overriding the file header.
        #[arg(long)]
        order: Option<Order>,
        /// Indices to evaluate for generator files.
        #[arg(long, value_delimiter = ',')]
        probe: Vec<u64>,
    },
    /// S-box to a coefficient file.
    ToCoeffs {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = Order::HighestFirst)]
        order: Order,
        /// Write the body as a polynomial rather than a number list.
        #[arg(long)]
        poly: bool,
    },
    /// Run one tuple of output planes through the balance and bijectivity gates.
    Generate(Planes),
    /// Seeded search for proper S-boxes assembled from random planes.
    Search {
        #[arg(short, long)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Boxes to emit; unlimited in exhaustive mode by default.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value = "random")]
        mode: Mode,
        #[arg(long, default_value = "balanced")]
        sampling: Sampling,
        /// Also require every plane polynomial to be irreducible.
        #[arg(long)]
        require_irreducible: bool,
        /// Stop after examining this many candidates.
        #[arg(long)]
        max_candidates: Option<u64>,
        /// Print verdict counts instead of boxes.
        #[arg(long)]
        stats: bool,
        /// Candidates tallied by `--stats`.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
    /// Nonlinearity, differential uniformity, balance and fixed points.
    Analyze {
        #[command(flatten)]
        input: Input,
        /// Permit boxes wider than 12 bits.
        #[arg(long)]
        allow_large: bool,
    },
    /// Exit 1 unless the S-box is a permutation.
    Check {
        #[command(flatten)]
        input: Input,
    },
    /// Monic/rank/reducibility of a polynomial.
    ClassifyPoly {
        #[command(flatten)]
        input: Input,
        /// `p=<m>; <terms>` or `p=<m>; [c0, c1, ...]`.
        polynomial: Option<String>,
        /// Context degree; defaults to the polynomial's degree.
        #[arg(short, long)]
        q: Option<usize>,
    },
}

/// Exit 2: bad flags, unreadable or malformed input.
struct Usage(String);

impl From<gfsbox::Error> for Usage {
    fn from(e: gfsbox::Error) -> Self {
        Usage(e.to_string())
    }
}

/// Data to print, plus a domain failure (exit 1) when set.
struct Report {
    data: String,
    failure: Option<String>,
}

impl Report {
    fn ok(data: String) -> Self {
        Self {
            data,
            failure: None,
        }
    }
}

struct Ctx {
    format: Format,
    exec: Exec,
}

impl Ctx {
    fn json(&self) -> bool {
        self.format == Format::Json
    }

    fn emit(&self, text: String, value: Value) -> String {
        if self.json() {
            format!("{value}\n")
        } else {
            text
        }
    }
}

fn read_input(input: &Input) -> Result<String, Usage> {
    match input.input.as_deref() {
        None => read_stdin(),
        Some(p) if p == Path::new("-") => read_stdin(),
        Some(p) => {
            fs::read_to_string(p).map_err(|e| Usage(format!("cannot read {}: {e}", p.display())))
        }
    }
}

fn read_stdin() -> Result<String, Usage> {
    let mut text = String::new();
    io::stdin()
        .read_to_string(&mut text)
        .map_err(|e| Usage(format!("cannot read standard input: {e}")))?;
    Ok(text)
}

/// Text form, or the JSON object `{"n": .., "entries": [..]}`.
fn read_sbox(input: &Input) -> Result<SBox, Usage> {
    let text = read_input(input)?;
    if text.trim_start().starts_with('{') {
        serde_json::from_str(&text).map_err(|e| Usage(format!("bad S-box JSON: {e}")))
    } else {
        Ok(text.parse()?)
    }
}

fn read_planes(planes: &Planes) -> Result<Vec<Bcn>, Usage> {
    if !planes.decimals.is_empty() {
        let n = planes
            .n
            .ok_or_else(|| Usage("positional decimals need --n".into()))?;
        let values = planes
            .decimals
            .iter()
            .map(|d| {
                d.parse::<BigUint>()
                    .map_err(|e| Usage(format!("bad decimal `{d}`: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(output_bcns_from_decimals(n, &values)?);
    }
    let all = parse_bcn_lines(&read_input(&planes.input)?)?;
    let outputs: Vec<Bcn> = all
        .into_iter()
        .filter(|b| b.role() == Role::Output)
        .collect();
    if let Some(n) = planes.n {
        if let Some(b) = outputs.iter().find(|b| b.width() != n) {
            return Err(Usage(format!("--n {n} but file has n={}", b.width())));
        }
    }
    Ok(outputs)
}

fn sbox_value(s: &SBox) -> Value {
    json!({ "n": s.bits(), "entries": s.entries() })
}

fn bcn_line(b: &Bcn) -> String {
    format!(
        "n={} plane={} role={} dec={} bits={}  # BP(x) = {}\n",
        b.width(),
        b.plane(),
        b.role(),
        b.to_decimal(),
        b.to_bit_string(),
        b.to_polynomial()
    )
}

fn bcn_value(b: &Bcn) -> Value {
    json!({
        "plane": b.plane(),
        "role": b.role().to_string(),
        "decimal": b.to_decimal().to_string(),
        "bits": b.to_bit_string(),
        "polynomial": b.to_polynomial().to_string(),
    })
}

fn encode(ctx: &Ctx, input: &Input, with_inputs: bool) -> Result<Report, Usage> {
    let sbox = read_sbox(input)?;
    let (inputs, outputs) = sbox_to_bcns(&sbox);
    let mut planes = outputs;
    if with_inputs {
        planes.extend(inputs);
    }
    let text: String = planes.iter().map(bcn_line).collect();
    let value = json!({
        "n": sbox.bits(),
        "planes": planes.iter().map(bcn_value).collect::<Vec<_>>(),
    });
    Ok(Report::ok(ctx.emit(text, value)))
}

fn decode(ctx: &Ctx, planes: &Planes) -> Result<Report, Usage> {
    let sbox = bcns_to_sbox(&read_planes(planes)?)?;
    if !sbox.is_proper() {
        eprintln!("warning: decoded table is not a permutation");
    }
    Ok(Report::ok(ctx.emit(sbox.to_text(), sbox_value(&sbox))))
}

fn from_coeffs(
    ctx: &Ctx,
    input: &Input,
    order: Option<Order>,
    probe: &[u64],
) -> Result<Report, Usage> {
    match parse_coeff_file(&read_input(input)?)? {
        CoeffSource::Table {
            poly,
            order: header,
        } => {
            let Constructed { sbox, proper } = sbox_from_coeffs(&poly, order.unwrap_or(header));
            if !proper {
                eprintln!("warning: coefficients are not a permutation of 0..2^n");
            }
            Ok(Report::ok(ctx.emit(sbox.to_text(), sbox_value(&sbox))))
        }
        CoeffSource::Generated { width, generator } => {
            if probe.is_empty() {
                return Err(Usage("generator files need --probe <indices>".into()));
            }
            let report =
                big_sbox_probe_concurrent(|i| generator.eval(width, i), width, probe, ctx.exec)?;
            let mut text = format!(
                "n={width} gen={generator} bijective={}\n",
                generator.is_bijective()
            );
            for (i, v) in &report.samples {
                let _ = writeln!(text, "{i} {v}");
            }
            for (a, b, v) in &report.duplicates {
                let _ = writeln!(text, "# duplicate: S({a}) = S({b}) = {v}");
            }
            let value = json!({
                "n": width,
                "generator": generator.to_string(),
                "bijective": generator.is_bijective(),
                "samples": report.samples,
                "duplicates": report.duplicates,
            });
            Ok(Report {
                data: ctx.emit(text, value),
                failure: report
                    .has_duplicates()
                    .then(|| "probed values collide".to_string()),
            })
        }
    }
}

fn to_coeffs(ctx: &Ctx, input: &Input, order: Order, as_poly: bool) -> Result<Report, Usage> {
    let sbox = read_sbox(input)?;
    let coeffs = coeffs_from_sbox(&sbox, order);
    let polynomial = coeffs.to_polynomial();
    let text = if as_poly {
        format!(
            "n={} order={order}\n{}\n",
            sbox.bits(),
            polynomial.to_text()
        )
    } else {
        coeffs.to_text(order)
    };
    let value = json!({
        "n": sbox.bits(),
        "order": order.to_string(),
        "coeffs": coeffs.listed(order),
        "polynomial": polynomial.to_text(),
    });
    Ok(Report::ok(ctx.emit(text, value)))
}

fn generate_cmd(ctx: &Ctx, planes: &Planes) -> Result<Report, Usage> {
    let report = generate(&read_planes(planes)?)?;
    let flags: Vec<String> = report.balanced.iter().map(bool::to_string).collect();
    let mut text = format!("verdict={}\nbalanced={}\n", report.verdict, flags.join(","));
    if let Some(proper) = report.proper {
        let _ = writeln!(text, "proper={proper}");
    }
    if report.verdict == Verdict::Accepted {
        if let Some(s) = &report.assembled {
            text.push_str(&s.to_text());
        }
    }
    let value = json!({
        "verdict": report.verdict,
        "balanced": report.balanced,
        "proper": report.proper,
        "sbox": report.assembled.as_ref().map(sbox_value),
    });
    Ok(Report {
        data: ctx.emit(text, value),
        failure: (report.verdict != Verdict::Accepted)
            .then(|| format!("candidate {}", report.verdict)),
    })
}

#[allow(clippy::too_many_arguments)]
fn search_cmd(
    ctx: &Ctx,
    n: u32,
    seed: u64,
    count: Option<usize>,
    mode: Mode,
    sampling: Sampling,
    require_irreducible: bool,
    max_candidates: Option<u64>,
    stats: bool,
    trials: u64,
) -> Result<Report, Usage> {
    let mut config = match mode {
        Mode::Random => SearchConfig::random(n, seed, count.unwrap_or(1)),
        Mode::Exhaustive => SearchConfig::exhaustive(n),
    };
    if let Some(c) = count {
        config.count = c;
    }
    config.seed = seed;
    config.sampling = sampling;
    config.require_irreducible = require_irreducible;
    config.max_candidates = max_candidates;
    config.validate()?;

    if stats {
        let s = candidate_stats_with(&config, trials, ctx.exec)?;
        let value = serde_json::to_value(s).map_err(|e| Usage(e.to_string()))?;
        return Ok(Report::ok(ctx.emit(s.to_text(), value)));
    }
    if mode == Mode::Random && max_candidates.is_none() && require_irreducible {
        // balanced planes have even weight, so x + 1 divides every one
        return Err(Usage(
            "--require-irreducible in random mode needs --max-candidates".into(),
        ));
    }
    let mut stream = search_with(&config, ctx.exec)?;
    let mut text = String::new();
    let mut found = Vec::new();
    for f in stream.by_ref() {
        let _ = writeln!(text, "# candidate={}", f.index);
        text.push_str(&f.sbox.to_text());
        found.push(json!({ "candidate": f.index, "sbox": sbox_value(&f.sbox) }));
    }
    eprintln!(
        "examined {} candidates, emitted {}",
        stream.examined(),
        found.len()
    );
    let value = json!({ "examined": stream.examined(), "found": found });
    Ok(Report::ok(ctx.emit(text, value)))
}

fn analyze_cmd(ctx: &Ctx, input: &Input, allow_large: bool) -> Result<Report, Usage> {
    let report = analyze_with(&read_sbox(input)?, allow_large, ctx.exec)?;
    let value = serde_json::to_value(&report).map_err(|e| Usage(e.to_string()))?;
    Ok(Report::ok(ctx.emit(report.to_text(), value)))
}

fn check(ctx: &Ctx, input: &Input) -> Result<Report, Usage> {
    let sbox = read_sbox(input)?;
    let mut seen = vec![None; sbox.len()];
    let mut collision = None;
    for (x, &y) in sbox.entries().iter().enumerate() {
        match seen[y as usize] {
            Some(first) => {
                collision = Some((first, x, y));
                break;
            }
            None => seen[y as usize] = Some(x),
        }
    }
    let proper = collision.is_none();
    let value = json!({ "n": sbox.bits(), "proper": proper });
    Ok(Report {
        data: ctx.emit(format!("n={}\nproper={proper}\n", sbox.bits()), value),
        failure: collision.map(|(a, b, y)| format!("not a permutation: S({a}) = S({b}) = {y}")),
    })
}

fn classify(
    ctx: &Ctx,
    input: &Input,
    polynomial: Option<&str>,
    q: Option<usize>,
) -> Result<Report, Usage> {
    let text = match polynomial {
        Some(p) => p.to_owned(),
        None => read_input(input)?,
    };
    let poly: GfPolynomial = text.trim().parse()?;
    let degree = poly
        .degree()
        .ok_or_else(|| Usage("the zero polynomial has no class".into()))?;
    let class = poly.classify(q.unwrap_or(degree));
    let out = format!(
        "polynomial={}\nmodulus={}\ndegree={degree}\nmonic={}\nrank={}\nreducibility={}\n",
        poly,
        poly.modulus(),
        class.monic,
        class.rank,
        class.reducibility
    );
    let value = json!({
        "polynomial": poly.to_string(),
        "modulus": poly.modulus(),
        "degree": degree,
        "monic": class.monic,
        "rank": class.rank,
        "reducibility": class.reducibility,
    });
    Ok(Report::ok(ctx.emit(out, value)))
}

fn dispatch(ctx: &Ctx, command: &Command) -> Result<Report, Usage> {
    match command {
        Command::Encode { input, inputs } => encode(ctx, input, *inputs),
        Command::Decode(planes) => decode(ctx, planes),
        Command::FromCoeffs {
            input,
            order,
            probe,
        } => from_coeffs(ctx, input, *order, probe),
        Command::ToCoeffs { input, order, poly } => to_coeffs(ctx, input, *order, *poly),
        Command::Generate(planes) => generate_cmd(ctx, planes),
        Command::Search {
            n,
            seed,
            count,
            mode,
            sampling,
            require_irreducible,
            max_candidates,
            stats,
            trials,
        } => search_cmd(
            ctx,
            *n,
            *seed,
            *count,
            *mode,
            *sampling,
            *require_irreducible,
            *max_candidates,
            *stats,
            *trials,
        ),
        Command::Analyze { input, allow_large } => analyze_cmd(ctx, input, *allow_large),
        Command::Check { input } => check(ctx, input),
        Command::ClassifyPoly {
            input,
            polynomial,
            q,
        } => classify(ctx, input, polynomial.as_deref(), *q),
    }
}

fn write_output(path: Option<&Path>, data: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, data),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(data.as_bytes())?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        format: cli.format,
        exec: if cli.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        },
    };
    let report = match dispatch(&ctx, &cli.command) {
        Ok(r) => r,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = write_output(cli.output.as_deref(), &report.data) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(2);
    }
    match report.failure {
        Some(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    }
}
