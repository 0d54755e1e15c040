//! Command-line front end: classify, transfer, verify, enumerate, analyze,
//! oracle. All reports are line-oriented plain text and every command is
//! deterministic: identical inputs and flags produce byte-identical output.
//!
//! Exit codes:
//!   0  every executed check passed or was explicitly inapplicable
//!   2  parse error (presentation or structure file)
//!   3  truncation bound too small to see any relation
//!   4  transfer failed its own SI self-certification
//!   5  verify found a violation (first witness printed)
//!   6  oracle disagrees with the main pipeline (hard inconsistency)
//!   7  analyze: reduced-table check failed
//!   8  analyze: truncated-table or decomposition precondition failed
//!   9  analyze: generation or strong-criterion check failed
//!  10  analyze: decompose/glue round trip is not the identity

use bikoszul::ainfty::{check_mi, check_si, check_unitality, AInftyStructure};
use bikoszul::format;
use bikoszul::generation;
use bikoszul::koszul::{self, DegreeDistribution};
use bikoszul::oracle::brute_force_tor;
use bikoszul::presentation::{parse_presentation, Presentation, PresentationError};
use bikoszul::transfer;
use clap::{Parser, Subcommand};
use std::process::exit;
use std::rc::Rc;

const EXIT_CODES: &str = "Exit codes:
  0   every executed check passed or was explicitly inapplicable
  2   parse error (presentation or structure file)
  3   truncation bound below the largest relation degree
  4   transfer failed its own SI self-certification
  5   verify found a violation (first witness printed)
  6   oracle disagrees with the main pipeline (hard inconsistency)
  7   analyze: reduced-table check failed
  8   analyze: truncated-table or decomposition precondition failed
  9   analyze: generation or strong-criterion check failed
  10  analyze: decompose/glue round trip is not the identity";

#[derive(Parser)]
#[command(
    name = "bikoszul",
    about = "Exact A-infinity Ext-algebra toolkit",
    version,
    after_help = EXIT_CODES
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tor degree table and Koszul-type classification of a presentation
    Classify {
        file: String,
        /// Override the presentation's truncation bound
        #[arg(long)]
        maxdeg: Option<i64>,
    },
    /// Brute-force Tor table, cross-checked against the main pipeline
    Oracle {
        file: String,
        #[arg(long)]
        maxdeg: Option<i64>,
    },
    /// Transfer the minimal A-infinity structure and certify it
    Transfer {
        file: String,
        #[arg(long)]
        maxdeg: Option<i64>,
        /// Largest multiplication arity to compute (default: maxdeg)
        #[arg(long)]
        nmax: Option<usize>,
        /// Output path for the structure file (default: stdout)
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Verify the Stasheff identities of a structure file (and the morphism
    /// identities of an optional endomorphism file)
    Verify {
        file: String,
        /// Morphism file interpreted as an endomorphism of the structure
        #[arg(long)]
        morphism: Option<String>,
        /// Check SI(n)/MI(n) for n up to this bound (default: max internal degree)
        #[arg(long)]
        nmax: Option<usize>,
        /// Treat the structure as a truncation with this internal-degree bound
        #[arg(long)]
        maxdeg: Option<i64>,
    },
    /// Admissible arities, solution lists and the admissibility table
    Enumerate {
        #[arg(long)]
        d: Option<i64>,
        /// Print the symbolic solution lists for generic d >= 5
        #[arg(long)]
        symbolic: bool,
    },
    /// Reduced/truncated classification, generation and strong-criterion
    /// analysis, and the decompose/glue round trip
    Analyze {
        file: String,
        /// The distribution parameter; inferred from E^2 when omitted
        #[arg(long)]
        d: Option<i64>,
        #[arg(long)]
        pmax: Option<i64>,
        #[arg(long)]
        kmax: Option<i64>,
        #[arg(long)]
        maxdeg: Option<i64>,
    },
}

fn main() {
    // die quietly when the output pipe closes (e.g. piping into head)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Classify { file, maxdeg } => cmd_classify(&file, maxdeg),
        Command::Oracle { file, maxdeg } => cmd_oracle(&file, maxdeg),
        Command::Transfer { file, maxdeg, nmax, output } => {
            cmd_transfer(&file, maxdeg, nmax, output.as_deref())
        }
        Command::Verify { file, morphism, nmax, maxdeg } => {
            cmd_verify(&file, morphism.as_deref(), nmax, maxdeg)
        }
        Command::Enumerate { d, symbolic } => cmd_enumerate(d, symbolic),
        Command::Analyze { file, d, pmax, kmax, maxdeg } => {
            cmd_analyze(&file, d, pmax, kmax, maxdeg)
        }
    }
}

fn load_presentation(path: &str, maxdeg: Option<i64>) -> Rc<Presentation> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {path}: {e}");
            exit(2);
        }
    };
    let pres = match parse_presentation(&text) {
        Ok(p) => p,
        Err(PresentationError::MaxdegTooSmall { maxdeg, needed }) => {
            eprintln!("error: maxdeg {maxdeg} is below the largest relation degree {needed}");
            exit(3);
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit(2);
        }
    };
    let pres = match maxdeg {
        None => pres,
        Some(d) => match Presentation::new(pres.field, pres.gens.clone(), pres.relations.clone(), d)
        {
            Ok(p) => p,
            Err(PresentationError::MaxdegTooSmall { maxdeg, needed }) => {
                eprintln!("error: maxdeg {maxdeg} is below the largest relation degree {needed}");
                exit(3);
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit(2);
            }
        },
    };
    Rc::new(pres)
}

fn print_tor_table(dist: &DegreeDistribution) {
    for (p, row) in dist.rows() {
        let cells: Vec<String> = row.iter().map(|(q, d)| format!("q={q}:{d}")).collect();
        println!("tor p={p} : {}", cells.join(" "));
    }
}

fn cmd_classify(file: &str, maxdeg: Option<i64>) {
    let pres = load_presentation(file, maxdeg);
    let no_relations = pres.relations.is_empty();
    let dist = match transfer::tor_dimensions(Rc::clone(&pres)) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            exit(2);
        }
    };
    print_tor_table(&dist);
    let verdict = koszul::classify(&dist, no_relations);
    println!("classification: {verdict}");
}

fn cmd_oracle(file: &str, maxdeg: Option<i64>) {
    let pres = load_presentation(file, maxdeg);
    let dist = match brute_force_tor(&pres) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            exit(2);
        }
    };
    print_tor_table(&dist);
    if pres.relations.is_empty() {
        println!("note: no relations, the resolution terminates at p=1");
    }
    let main = match transfer::tor_dimensions(Rc::clone(&pres)) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            exit(2);
        }
    };
    if main != dist {
        eprintln!("error: brute-force table disagrees with the main pipeline (hard inconsistency)");
        exit(6);
    }
    println!("oracle: agrees with the main pipeline in every bidegree");
}

fn cmd_transfer(file: &str, maxdeg: Option<i64>, nmax: Option<usize>, output: Option<&str>) {
    let pres = load_presentation(file, maxdeg);
    let n_max = nmax.unwrap_or(pres.maxdeg as usize).max(2);
    let t = match transfer::transfer_presentation(Rc::clone(&pres), n_max) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            exit(2);
        }
    };
    // self-certification: every checkable SI(n) and strict unitality
    let mut summary = Vec::new();
    let mut failed = false;
    for n in 1..=(n_max + 1) {
        let r = check_si(&t.structure, n);
        if !r.is_pass() {
            failed = true;
        }
        summary.push(format!("# {r}"));
    }
    let u = check_unitality(&t.structure);
    if !u.is_pass() {
        failed = true;
    }
    summary.push(format!("# {u}"));
    if failed {
        for line in &summary {
            eprintln!("{line}");
        }
        eprintln!("error: transfer failed its own SI certification (sign-convention guard)");
        exit(4);
    }
    let mut text = format::write_structure(&t.structure);
    text.push_str("# SI certification summary\n");
    for line in &summary {
        text.push_str(line);
        text.push('\n');
    }
    match output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {path}: {e}");
                exit(2);
            }
            println!("wrote {path}");
        }
        None => print!("{text}"),
    }
}

fn load_structure(path: &str, maxdeg: Option<i64>) -> AInftyStructure {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {path}: {e}");
            exit(2);
        }
    };
    match format::read_structure(&text, maxdeg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            exit(2);
        }
    }
}

fn cmd_verify(file: &str, morphism: Option<&str>, nmax: Option<usize>, maxdeg: Option<i64>) {
    let s = load_structure(file, maxdeg);
    let max_q = s.basis.iter().map(|(_, q)| *q).max().unwrap_or(1);
    let n_max = nmax.unwrap_or(max_q.max(3) as usize);
    let mut first_violation: Option<String> = None;
    let mut unknown = 0usize;
    for n in 1..=n_max {
        let r = check_si(&s, n);
        println!("{r}");
        unknown += r.unknown.len();
        if !r.is_pass() && first_violation.is_none() {
            let v = &r.violations[0];
            first_violation = Some(format!(
                "{} violated on tuple [{}]",
                r.name,
                v.tuple.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
            ));
        }
    }
    if unknown > 0 {
        println!("warning: {unknown} tuples beyond the truncation bound were left undecided");
    }
    if let Some(mpath) = morphism {
        let text = match std::fs::read_to_string(mpath) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {mpath}: {e}");
                exit(2);
            }
        };
        let f = match format::morphism_between(&s, &s, &text) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("error: {e}");
                exit(2);
            }
        };
        for n in 1..=n_max {
            let r = check_mi(&f, n);
            println!("{r}");
            if !r.is_pass() && first_violation.is_none() {
                let v = &r.violations[0];
                first_violation = Some(format!(
                    "{} violated on tuple [{}]",
                    r.name,
                    v.tuple.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
                ));
            }
        }
    }
    if let Some(w) = first_violation {
        eprintln!("error: {w}");
        exit(5);
    }
}

fn cmd_enumerate(d: Option<i64>, symbolic: bool) {
    if symbolic {
        let lists = koszul::enumerate_arities_symbolic();
        for (i, list) in lists.iter().enumerate() {
            let cells: Vec<String> =
                list.iter().map(|(k, b, a)| format!("({k},{b},{a})")).collect();
            println!("(S{}): {}", i + 1, cells.join(" "));
        }
        return;
    }
    let Some(d) = d else {
        eprintln!("error: pass --d D or --symbolic");
        exit(2);
    };
    if d < 2 {
        eprintln!("error: d must be >= 2");
        exit(2);
    }
    let (arities, solutions) = koszul::enumerate_arities(d);
    let cells: Vec<String> = arities.iter().map(|a| a.to_string()).collect();
    println!("arity set (d={d}): {{{}}}", cells.join(", "));
    for case in 1..=3usize {
        let cells: Vec<String> = solutions
            .iter()
            .filter(|s| s.case == case)
            .map(|s| format!("({},{},{})", s.k, s.beta, s.arity))
            .collect();
        println!("case {case} solutions (k,beta,l): {}", cells.join(" "));
    }
    let table = koszul::admissible_components(d);
    for row in &table.rows {
        println!("{row}");
    }
}

fn cmd_analyze(
    file: &str,
    d_flag: Option<i64>,
    pmax: Option<i64>,
    kmax: Option<i64>,
    maxdeg: Option<i64>,
) {
    let s = load_structure(file, maxdeg);
    let max_p = s.basis.iter().map(|(p, _)| *p).max().unwrap_or(0);
    let p_max = pmax.unwrap_or(max_p);
    let d = d_flag.or_else(|| koszul::infer_d(&s));
    let Some(d) = d else {
        println!("reduced: yes (vacuous); truncated: n/a (no delta_d profile)");
        let gen = generation::check_generated_by_e1(&s, p_max);
        print!("{gen}");
        exit(if gen.pass { 0 } else { 9 });
    };
    println!("d: {d}");

    // reduced
    let reduced = match koszul::is_reduced(&s, d) {
        Ok(r) => r,
        Err(koszul::KoszulError::ComponentClassUndefined { .. }) => {
            println!("reduced: yes (vacuous); truncated: n/a (no delta_d profile)");
            let gen = generation::check_generated_by_e1(&s, p_max);
            print!("{gen}");
            exit(if gen.pass { 0 } else { 9 });
        }
    };
    println!("reduced: {}", if reduced.is_pass() { "yes" } else { "no" });
    if !reduced.is_pass() {
        for v in reduced.violations.iter().take(3) {
            println!(
                "  off-table entry on tuple [{}]",
                v.tuple.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
            );
        }
        exit(7);
    }

    // truncated + round trip
    let truncated = if d >= 3 {
        match koszul::is_truncated(&s, d) {
            Ok(r) => r.is_pass(),
            Err(_) => false,
        }
    } else {
        false
    };
    println!("truncated: {}", if truncated { "yes" } else { "no" });

    // balanced [m2,m3]-generation
    match generation::check_m2m3_generation(&s, d) {
        Ok(r) => {
            println!(
                "[m2,m3]-finitely generated by E^1..E^3: {} (up to p={p_max})",
                if r.pass { "pass" } else { "fail" }
            );
            if !r.pass {
                print!("{r}");
                exit(9);
            }
        }
        Err(e) => {
            println!("[m2,m3]-generation: inapplicable ({e})");
        }
    }

    // strong criterion
    let bound = s.truncation.unwrap_or_else(|| s.basis.iter().map(|(_, q)| *q).max().unwrap_or(0));
    let k_limit = ((bound - d - 1) / (2 * d)).max(0);
    let k_max = kmax.unwrap_or(k_limit).min(k_limit);
    if k_max >= 1 {
        match generation::check_strong_criterion(&s, d, k_max) {
            Ok(r) => {
                println!(
                    "strongly: {} (subspace criterion, up to k={k_max})",
                    if r.pass { "yes" } else { "no" }
                );
                if !r.pass {
                    print!("{r}");
                    exit(9);
                }
            }
            Err(e) => {
                println!("strongly: unknown ({e})");
            }
        }
    } else {
        println!("strongly: yes (vacuous, no k within truncation)");
    }

    if truncated && d >= 4 {
        let round_trip = (|| -> Result<bool, String> {
            let (f, g) = generation::decompose_truncated(&s, d).map_err(|e| e.to_string())?;
            let _ = (&f, &g);
            let (e, md, md1) = generation::decompose_tables(&s, d).map_err(|e| e.to_string())?;
            let glued = generation::glue_singles(&e, &md, &md1, d).map_err(|e| e.to_string())?;
            Ok(glued == s)
        })();
        match round_trip {
            Ok(true) => println!("roundtrip: identical"),
            Ok(false) => {
                println!("roundtrip: MISMATCH");
                exit(10);
            }
            Err(e) => {
                println!("roundtrip: failed ({e})");
                exit(8);
            }
        }
    }
}
