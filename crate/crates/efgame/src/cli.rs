//! Command-line front end. Every command returns its whole output and exit
//! code so the binary stays a thin wrapper and tests can call [`run`].
//!
//! Exit codes: 0 for a positive verdict (WIN, PASS, EQUAL) or plain output,
//! 1 for a negative one (LOSE, FAIL, DIFFERENT), 2 for errors and
//! inconclusive runs, 3 when a translation's precondition does not hold.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::game::{
    all_moves, play_ef_game, play_single_round_game, single_round_oracle, sweep, CopyDuplicator,
    Duplicator, ExhaustiveSingleRoundDuplicator, ExhaustiveSingleRoundSpoiler, GameError,
    GamePosition, GameTranscript, MinimaxDuplicator, MinimaxSpoiler, Oracle, RandomSpoiler, Side,
    SingleRoundDuplicator, SingleRoundSpoiler, Spoiler, TypeDuplicator, DEFAULT_BUDGET,
};
use crate::logic::{free_vars, literals, parse_formula, quantifier_depth, Formula};
use crate::presburger::{check_conditions, check_level, Bounds, CheckMode, CheckReport, Witness};
use crate::presburger::{check_semilinear, compute_spectrum};
use crate::presburger::{relevant_moves, translate_strategy_plus, SparseSetup};
use crate::presburger::{generate_q, PresburgerError};
use crate::ramsey::{
    translate_strategy_bcefo, translate_strategy_monadic, ArbContext, ContextSpec, MonadicContext,
    RamseyError,
};
use crate::representation::{
    apply_interpretation, canonical_cuts, eliminate_quantifiers, interpretation_phi,
    interpretation_phi_prime, parse_dense, parse_rep, print_dense, print_region, print_rep,
    qe_normalize, rep_structure, RepresentationError,
};
use crate::structure::{parse_structure, OrderedStructure, Point, Signature};

#[derive(Parser, Debug, Clone)]
#[command(name = "efgame", version, about = "Ehrenfeucht-Fraisse games, strategies and dense-order representations")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Node budget for searches.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SpoilerKind {
    Minimax,
    Random,
    Exhaustive,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum DuplicatorKind {
    Minimax,
    Copy,
    Type,
    Exhaustive,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Plus,
    Monadic,
    Bcefo,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Encode,
    Decode,
    Roundtrip,
    Qe,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Decide whether the duplicator wins the r-round game.
    Oracle {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, short)]
        r: usize,
        /// Also print a winning first move (spoiler) or winning answers
        /// to every first move (duplicator).
        #[arg(long)]
        strategy: bool,
    },
    /// Play one r-round game between two agents.
    Play {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, short)]
        r: usize,
        #[arg(long, value_enum, default_value_t = SpoilerKind::Minimax)]
        spoiler: SpoilerKind,
        #[arg(long, value_enum, default_value_t = DuplicatorKind::Minimax)]
        duplicator: DuplicatorKind,
    },
    /// Play the game where the spoiler commits all r picks at once.
    SingleRound {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, short)]
        r: usize,
        #[arg(long, value_enum, default_value_t = SpoilerKind::Exhaustive)]
        spoiler: SpoilerKind,
        #[arg(long, value_enum, default_value_t = DuplicatorKind::Exhaustive)]
        duplicator: DuplicatorKind,
    },
    /// Check the congruence and comparison conditions for explicit bounds.
    CheckC {
        #[arg(long)]
        m: BigInt,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        c: BigInt,
        #[arg(long)]
        g: BigRational,
        /// Fixed points on the A side.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Vec<BigRational>,
        /// Their images on the B side.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b: Vec<BigRational>,
        /// Sparse prefix shared by both sides.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        p: Vec<BigInt>,
        #[arg(long)]
        sampled: bool,
        #[arg(long, default_value_t = 10_000)]
        pairs: u64,
    },
    /// Check the level-k conditions on a file of integers: anchors first,
    /// then the sparse prefix.
    CheckW {
        points: PathBuf,
        #[arg(long, short)]
        k: usize,
        /// How many leading values are anchors; defaults to k.
        #[arg(long)]
        anchors: Option<usize>,
        #[arg(long, conflicts_with = "sampled")]
        exhaustive: bool,
        #[arg(long)]
        sampled: bool,
        #[arg(long, default_value_t = 10_000)]
        pairs: u64,
    },
    /// Print the anchor values q_0, q_1, ...
    GenQ {
        #[arg(long, default_value_t = 4)]
        count: usize,
    },
    /// Print the least sparse sequence of level k above p0.
    GenP {
        #[arg(long, short)]
        k: usize,
        #[arg(long, default_value_t = BigInt::from(0), allow_hyphen_values = true)]
        p0: BigInt,
        #[arg(long, default_value_t = 3)]
        count: usize,
    },
    /// Spectrum of a sentence over < and + with its periodicity check.
    Spectrum {
        formula: PathBuf,
        #[arg(long, default_value_t = 64)]
        nmax: usize,
    },
    /// Build a translated strategy and run it against the exhaustive spoiler.
    Translate {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, short)]
        k: usize,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Context as JSON; monadic contexts use `{lo, hi, predicates}`.
        #[arg(long)]
        context: Option<PathBuf>,
        /// Context window when no context file is given.
        #[arg(long, value_parser = parse_window, default_value = "0..30")]
        window: (i64, i64),
    },
    /// Encode, decode or round-trip a dense-order database.
    Rep {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Direction::Roundtrip)]
        direction: Direction,
    },
    /// Quantifier elimination of an order formula into grid cells.
    Qe {
        formula: PathBuf,
        /// Free variables in coordinate order; defaults to sorted names.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        /// Cut points; defaults to the formula's literals.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        cuts: Vec<Point>,
    },
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected LO..HI")?;
    let lo: i64 = lo.trim().parse().map_err(|_| format!("bad bound {lo:?}"))?;
    let hi: i64 = hi.trim().parse().map_err(|_| format!("bad bound {hi:?}"))?;
    if lo > hi {
        return Err("empty window".into());
    }
    Ok((lo, hi))
}

/// Output and exit code of one command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub output: String,
    pub code: i32,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error(transparent)]
    Structure(#[from] crate::structure::StructureError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Logic(#[from] crate::logic::LogicError),
    #[error(transparent)]
    Presburger(#[from] PresburgerError),
    #[error(transparent)]
    Ramsey(#[from] RamseyError),
    #[error(transparent)]
    Representation(#[from] RepresentationError),
}

/// Runs one command; errors become exit code 2.
pub fn run(cfg: &RunConfig) -> Report {
    match execute(cfg) {
        Ok(r) => r,
        Err(e) => {
            let output = match cfg.format {
                Format::Text => format!("error: {e}\n"),
                Format::Json => pretty(&json!({ "error": e.to_string() })),
            };
            Report { output, code: 2 }
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    let io = |e: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    };
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io)
    }
}

fn structure(path: &Path) -> Result<OrderedStructure, CliError> {
    Ok(parse_structure(&read(path)?)?)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::A => "A",
        Side::B => "B",
    }
}

fn transcript_text(t: &GameTranscript, out: &mut String) {
    for r in &t.rounds {
        let _ = writeln!(
            out,
            "round {}: spoiler {} {} / duplicator {} {}",
            r.round,
            side_name(r.side),
            r.spoiler,
            side_name(r.side.other()),
            r.duplicator
        );
    }
    if let Some(f) = &t.forfeit {
        let _ = writeln!(out, "forfeit in round {} by {:?}: {}", f.round, f.player, f.reason);
    }
}

fn transcript_json(t: &GameTranscript) -> Value {
    serde_json::from_str(&t.to_json()).expect("transcript json")
}

fn verdict(won: bool) -> (&'static str, i32) {
    if won {
        ("WIN", 0)
    } else {
        ("LOSE", 1)
    }
}

fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    let oracle = Oracle {
        budget: cfg.budget,
        strict: false,
    };
    let text = cfg.format == Format::Text;
    match &cfg.command {
        Command::Oracle { a, b, r, strategy } => {
            let (sa, sb) = (structure(a)?, structure(b)?);
            let won = oracle.duplicator_wins(&sa, &sb, *r)?;
            let (word, code) = verdict(won);
            let pos = GamePosition {
                a: &sa,
                b: &sb,
                chosen_a: &[],
                chosen_b: &[],
                sides: &[],
                rounds_left: *r,
            };
            let mut lines = Vec::new();
            if *strategy && *r > 0 {
                if won {
                    for side in [Side::A, Side::B] {
                        let pts = oracle
                            .moves(pos.structure(side), *r)
                            .ok_or(GameError::NotEnumerable(side))?;
                        for x in pts {
                            if let Some(y) = oracle.winning_answer(&pos, side, &x)? {
                                lines.push((side, x, y));
                            }
                        }
                    }
                } else if let Some((side, x)) = oracle.winning_spoiler_move(&pos)? {
                    lines.push((side, x.clone(), x));
                }
            }
            let output = if text {
                let mut out = format!("{word}\n");
                for (side, x, y) in &lines {
                    if won {
                        let _ = writeln!(out, "answer {} {} -> {}", side_name(*side), x, y);
                    } else {
                        let _ = writeln!(out, "spoiler opens with {} {}", side_name(*side), x);
                    }
                }
                out
            } else {
                let moves: Vec<Value> = lines
                    .iter()
                    .map(|(s, x, y)| {
                        if won {
                            json!({"side": side_name(*s), "pick": x.to_string(), "answer": y.to_string()})
                        } else {
                            json!({"side": side_name(*s), "pick": x.to_string()})
                        }
                    })
                    .collect();
                pretty(&json!({"verdict": word, "rounds": r, "strategy": moves}))
            };
            Ok(Report { output, code })
        }
        Command::Play {
            a,
            b,
            r,
            spoiler,
            duplicator,
        } => {
            let (sa, sb) = (structure(a)?, structure(b)?);
            let mut sp: Box<dyn Spoiler> = match spoiler {
                SpoilerKind::Minimax | SpoilerKind::Exhaustive => Box::new(MinimaxSpoiler { oracle }),
                SpoilerKind::Random => {
                    let mut s = RandomSpoiler::new(cfg.seed);
                    s.oracle = oracle;
                    Box::new(s)
                }
            };
            let mut du: Box<dyn Duplicator> = match duplicator {
                DuplicatorKind::Minimax | DuplicatorKind::Exhaustive => Box::new(MinimaxDuplicator { oracle }),
                DuplicatorKind::Copy => Box::new(CopyDuplicator),
                DuplicatorKind::Type => Box::new(TypeDuplicator { budget: cfg.budget }),
            };
            let t = play_ef_game(&sa, &sb, *r, sp.as_mut(), du.as_mut())?;
            Ok(game_report(&t, text))
        }
        Command::SingleRound {
            a,
            b,
            r,
            spoiler,
            duplicator,
        } => {
            let (sa, sb) = (structure(a)?, structure(b)?);
            let mut sp: Box<dyn SingleRoundSpoiler> = match spoiler {
                SpoilerKind::Random => Box::new(RandomSpoiler::new(cfg.seed)),
                _ => Box::new(ExhaustiveSingleRoundSpoiler),
            };
            let mut du: Box<dyn SingleRoundDuplicator> = match duplicator {
                DuplicatorKind::Copy => Box::new(CopyDuplicator),
                _ => Box::new(ExhaustiveSingleRoundDuplicator),
            };
            let t = play_single_round_game(&sa, &sb, *r, sp.as_mut(), du.as_mut())?;
            Ok(game_report(&t, text))
        }
        Command::CheckC {
            m,
            l,
            c,
            g,
            a,
            b,
            p,
            sampled,
            pairs,
        } => {
            if a.len() != b.len() {
                return Err(CliError::Usage("--a and --b need the same length".into()));
            }
            let bounds = Bounds {
                m: m.clone(),
                l: *l,
                c: c.clone(),
                g: g.clone(),
            };
            let fixed: Vec<(BigRational, BigRational)> = a.iter().cloned().zip(b.iter().cloned()).collect();
            let mode = check_mode(*sampled, *pairs, cfg);
            let rep = check_conditions(p, &fixed, &bounds, mode)?;
            Ok(check_report(&rep, text))
        }
        Command::CheckW {
            points,
            k,
            anchors,
            exhaustive: _,
            sampled,
            pairs,
        } => {
            if *k == 0 {
                return Err(CliError::Usage("k must be at least 1".into()));
            }
            let values = read(points)?
                .split_whitespace()
                .map(|w| w.parse::<BigInt>().map_err(|_| CliError::Usage(format!("bad integer {w:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let n = anchors.unwrap_or(*k);
            if values.len() < n {
                return Err(CliError::Usage(format!("need at least {n} anchor values")));
            }
            let mode = check_mode(*sampled, *pairs, cfg);
            let rep = check_level(&values[n..], &values[..n], *k, mode)?;
            Ok(check_report(&rep, text))
        }
        Command::GenQ { count } => {
            let q = generate_q(*count)?;
            let output = if text {
                q.iter().enumerate().map(|(i, v)| format!("q{i} = {v}\n")).collect()
            } else {
                pretty(&json!(q.iter().map(|v| v.to_string()).collect::<Vec<_>>()))
            };
            Ok(Report { output, code: 0 })
        }
        Command::GenP { k, p0, count } => {
            let setup = SparseSetup::least_above(*k, p0.clone(), *count)?;
            let output = if text {
                setup.p.iter().map(|v| format!("{v}\n")).collect()
            } else {
                pretty(&json!(setup.p.iter().map(|v| v.to_string()).collect::<Vec<_>>()))
            };
            Ok(Report { output, code: 0 })
        }
        Command::Spectrum { formula, nmax } => {
            let f = parse_formula(read(formula)?.trim(), &Signature::new().with_plus())?;
            spectrum_report(&f, *nmax, text)
        }
        Command::Translate {
            a,
            b,
            k,
            mode,
            context,
            window,
        } => {
            let (sa, sb) = (structure(a)?, structure(b)?);
            let ctx_text = match context {
                Some(p) => Some(read(p)?),
                None => None,
            };
            translate(&sa, &sb, *k, *mode, ctx_text.as_deref(), *window, cfg)
        }
        Command::Rep { file, direction } => rep_command(&read(file)?, *direction, text),
        Command::Qe { formula, vars, cuts } => {
            let f = parse_formula(read(formula)?.trim(), &Signature::new())?;
            let vars: Vec<String> = if vars.is_empty() {
                free_vars(&f).into_iter().collect()
            } else {
                vars.clone()
            };
            let cuts = if cuts.is_empty() { literals(&f) } else { cuts.clone() };
            let qf = eliminate_quantifiers(&f, &cuts)?;
            let region = qe_normalize(&f, &vars, &cuts)?;
            let output = if text {
                format!(
                    "variables {}\nquantifier-free {qf}\n{}",
                    vars.join(" "),
                    print_region(&region)
                )
            } else {
                pretty(&json!({
                    "variables": vars,
                    "quantifier_free": qf.to_string(),
                    "region": print_region(&region),
                }))
            };
            Ok(Report { output, code: 0 })
        }
    }
}

fn check_mode(sampled: bool, pairs: u64, cfg: &RunConfig) -> CheckMode {
    if sampled {
        CheckMode::Sampled {
            pairs,
            seed: cfg.seed,
        }
    } else {
        CheckMode::Exhaustive { budget: cfg.budget }
    }
}

fn game_report(t: &GameTranscript, text: bool) -> Report {
    let (word, code) = verdict(t.duplicator_won);
    let output = if text {
        let mut out = String::new();
        transcript_text(t, &mut out);
        let _ = writeln!(out, "{word}");
        out
    } else {
        pretty(&json!({"verdict": word, "transcript": transcript_json(t)}))
    };
    Report { output, code }
}

fn witness_text(w: &Witness) -> String {
    match w {
        Witness::Congruence { a, b } => format!("congruence: {a} and {b} are not congruent"),
        Witness::NotCorrespondence { a, b } => format!("correspondence: the pair {a} -> {b} is not allowed"),
        Witness::Order {
            s1,
            s2,
            terms_a,
            terms_b,
            delta_a,
            delta_b,
        } => format!(
            "order: ({s1}) - ({s2}) is {delta_a} over t = {} but {delta_b} over t = {}",
            join(terms_a),
            join(terms_b)
        ),
    }
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn check_report(r: &CheckReport, text: bool) -> Report {
    let word = if r.holds { "PASS" } else { "FAIL" };
    let code = if r.holds { 0 } else { 1 };
    let witness = r.witness.as_ref().map(witness_text);
    let output = if text {
        let mut out = format!(
            "{word}\nchecked {} comparisons ({})\n",
            r.checked,
            if r.exhaustive { "exhaustive" } else { "sampled" }
        );
        if let Some(w) = &witness {
            let _ = writeln!(out, "witness {w}");
        }
        out
    } else {
        pretty(&json!({
            "verdict": word,
            "checked": r.checked,
            "exhaustive": r.exhaustive,
            "witness": witness,
        }))
    };
    Report { output, code }
}

fn spectrum_report(f: &Formula, nmax: usize, text: bool) -> Result<Report, CliError> {
    let cert = compute_spectrum(f, nmax)?;
    let bits: String = cert.spectrum.iter().map(|&b| if b { '1' } else { '0' }).collect();
    let (word, code, note) = match check_semilinear(&cert) {
        Ok(true) => ("PASS", 0, None),
        Ok(false) => ("FAIL", 1, None),
        Err(PresburgerError::InsufficientNmax { nmax, needed }) => (
            "INSUFFICIENT",
            2,
            Some(format!("insufficient Nmax: {nmax} does not show a repeated period, need more than {needed}")),
        ),
        Err(e) => return Err(e.into()),
    };
    let output = if text {
        let mut out = format!(
            "quantifier depth {}, level {}\nspectrum N=1..{nmax}: {bits}\n",
            quantifier_depth(f),
            cert.k
        );
        match cert.empirical {
            Some((n0, p)) => {
                let _ = writeln!(out, "empirical preperiod {n0} period {p}");
            }
            None => out.push_str("empirical period not observed\n"),
        }
        let _ = writeln!(out, "bounds: preperiod <= {} period divides {}", cert.threshold, cert.period);
        if let Some(n) = &note {
            let _ = writeln!(out, "{n}");
        }
        let _ = writeln!(out, "{word}");
        out
    } else {
        pretty(&json!({
            "verdict": word,
            "spectrum": bits,
            "level": cert.k,
            "empirical": cert.empirical.map(|(n0, p)| json!({"preperiod": n0, "period": p})),
            "threshold": cert.threshold.to_string(),
            "period_bound": cert.period.to_string(),
            "note": note,
        }))
    };
    Ok(Report { output, code })
}

/// Spoiler drawing uniformly from a move generator; used for the sample
/// play printed after a successful sweep.
struct GeneratorSpoiler<G> {
    moves: G,
    rng: ChaCha8Rng,
}

impl<G: FnMut(&GamePosition) -> Result<Vec<(Side, Point)>, GameError>> Spoiler for GeneratorSpoiler<G> {
    fn pick(&mut self, pos: &GamePosition) -> Result<(Side, Point), String> {
        let ms = (self.moves)(pos).map_err(|e| e.to_string())?;
        ms.choose(&mut self.rng).cloned().ok_or_else(|| "no moves".to_string())
    }
}

fn precondition(msg: String, text: bool) -> Report {
    let output = if text {
        format!("PRECONDITION {msg}\n")
    } else {
        pretty(&json!({"verdict": "PRECONDITION", "reason": msg}))
    };
    Report { output, code: 3 }
}

fn sweep_report(
    plays: u64,
    loss: Option<GameTranscript>,
    sample: Option<GameTranscript>,
    header: String,
    text: bool,
) -> Report {
    let won = loss.is_none();
    let (word, code) = if won { ("WIN", 0) } else { ("LOSS", 1) };
    let shown = loss.or(sample);
    let output = if text {
        let mut out = header;
        let _ = writeln!(out, "spoiler lines played {plays}");
        if let Some(t) = &shown {
            out.push_str(if won { "sample play\n" } else { "lost play\n" });
            transcript_text(t, &mut out);
        }
        let _ = writeln!(out, "{word}");
        out
    } else {
        pretty(&json!({
            "verdict": word,
            "summary": header.trim_end(),
            "plays": plays,
            "transcript": shown.as_ref().map(transcript_json),
        }))
    };
    Report { output, code }
}

fn translate(
    a: &OrderedStructure,
    b: &OrderedStructure,
    k: usize,
    mode: Mode,
    ctx_text: Option<&str>,
    window: (i64, i64),
    cfg: &RunConfig,
) -> Result<Report, CliError> {
    let text = cfg.format == Format::Text;
    if k == 0 {
        return Err(CliError::Usage("k must be at least 1".into()));
    }
    match mode {
        Mode::Plus => {
            if k > 1 {
                return Err(CliError::Usage(
                    "the plus sweep is only tractable for k = 1; the level-2 window exceeds 10^20".into(),
                ));
            }
            let need = crate::structure::active_domain(a)
                .len()
                .max(crate::structure::active_domain(b).len());
            let mut len = need.max(1) + 1;
            let t = loop {
                let setup = SparseSetup::least_above(k, 0.into(), len)?;
                match translate_strategy_plus(a, b, k, &setup) {
                    Ok(t) => break t,
                    Err(PresburgerError::Precondition(m)) if m.contains("too short") && len < 12 => len += 1,
                    Err(PresburgerError::Precondition(m)) => return Ok(precondition(m, text)),
                    Err(e) => return Err(e.into()),
                }
            };
            let mut du = t.duplicator.clone();
            let mut moves = relevant_moves(t.duplicator.clone(), t.spoiler_window.clone());
            let rep = sweep(&t.a, &t.b, k, &mut du, &mut moves, cfg.budget)?;
            let sample = if rep.loss.is_none() {
                let mut sp = GeneratorSpoiler {
                    moves: relevant_moves(t.duplicator.clone(), t.spoiler_window.clone()),
                    rng: ChaCha8Rng::seed_from_u64(cfg.seed),
                };
                Some(play_ef_game(&t.a, &t.b, k, &mut sp, &mut t.duplicator.clone())?)
            } else {
                None
            };
            let header = format!("sparse prefix {}\nspoiler window {}\n", join(&t.duplicator.start.p), t.spoiler_window);
            Ok(sweep_report(rep.plays, rep.loss, sample, header, text))
        }
        Mode::Monadic => {
            let ctx = match ctx_text {
                Some(s) => {
                    let spec: ContextSpec = serde_json::from_str(s)
                        .map_err(|e| CliError::Usage(format!("bad context: {e}")))?;
                    MonadicContext::from_spec(&spec)?
                }
                None => MonadicContext::new(window.0, window.1),
            };
            let t = match translate_strategy_monadic(a, b, k, &ctx) {
                Ok(t) => t,
                Err(RamseyError::Precondition(m)) => return Ok(precondition(m, text)),
                Err(e) => return Err(e.into()),
            };
            let mut du = t.duplicator.clone();
            let rep = sweep(&t.a, &t.b, k, &mut du, &mut all_moves(Oracle::default()), cfg.budget)?;
            let sample = if rep.loss.is_none() {
                let mut sp = GeneratorSpoiler {
                    moves: all_moves(Oracle::default()),
                    rng: ChaCha8Rng::seed_from_u64(cfg.seed),
                };
                Some(play_ef_game(&t.a, &t.b, k, &mut sp, &mut t.duplicator.clone())?)
            } else {
                None
            };
            let header = format!("special positions {}\n", join(&t.positions.points));
            Ok(sweep_report(rep.plays, rep.loss, sample, header, text))
        }
        Mode::Bcefo => {
            let ctx = match ctx_text {
                Some(s) => match serde_json::from_str::<ContextSpec>(s) {
                    Ok(spec) => ArbContext::from(&MonadicContext::from_spec(&spec)?),
                    Err(_) => serde_json::from_str::<ArbContext>(s)
                        .map_err(|e| CliError::Usage(format!("bad context: {e}")))?,
                },
                None => ArbContext::new(window.0, window.1),
            };
            let t = match translate_strategy_bcefo(a, b, k, &ctx) {
                Ok(t) => t,
                Err(RamseyError::Precondition(m)) => return Ok(precondition(m, text)),
                Err(e) => return Err(e.into()),
            };
            let mut du = t.duplicator.clone();
            let tr = play_single_round_game(&t.a, &t.b, k, &mut ExhaustiveSingleRoundSpoiler, &mut du)?;
            let cross = single_round_oracle(&t.a, &t.b, k)?;
            let header = format!(
                "special positions {}\nvirtual moves {}\noracle on the game structures {}\n",
                join(&t.positions.points),
                t.r,
                if cross { "WIN" } else { "LOSE" }
            );
            let loss = (!tr.duplicator_won).then(|| tr.clone());
            Ok(sweep_report(1, loss, Some(tr), header, text))
        }
    }
}

fn rep_command(input: &str, direction: Direction, text: bool) -> Result<Report, CliError> {
    let plain = |output: String| Report { output, code: 0 };
    match direction {
        Direction::Encode => {
            let a = parse_dense(input)?;
            let rep = rep_structure(&a)?;
            Ok(plain(if text {
                print_rep(&rep)
            } else {
                pretty(&json!({"cuts": join(&rep.cuts()), "structure": print_rep(&rep)}))
            }))
        }
        Direction::Decode => {
            let rep = parse_rep(input)?;
            let phi = interpretation_phi(&rep.source)?;
            let a = apply_interpretation(&phi, &rep.to_dense()?)?;
            Ok(plain(if text {
                print_dense(&a)
            } else {
                pretty(&json!({"structure": print_dense(&a)}))
            }))
        }
        Direction::Roundtrip => {
            let a = parse_dense(input)?;
            let rep = rep_structure(&a)?;
            let back = apply_interpretation(&interpretation_phi(&a.signature)?, &rep.to_dense()?)?;
            let fwd = apply_interpretation(&interpretation_phi_prime(&a.signature)?, &a)?;
            let decode_ok = back.same_as(&a);
            let encode_ok = fwd.same_as(&rep.to_dense()?);
            let equal = decode_ok && encode_ok;
            let word = if equal { "EQUAL" } else { "DIFFERENT" };
            let output = if text {
                format!(
                    "cut set {}\ndecode of the encoding {}\nencoding defined in the structure {}\n{word}\n",
                    join(&rep.cuts()),
                    if decode_ok { "matches" } else { "differs" },
                    if encode_ok { "matches" } else { "differs" },
                )
            } else {
                pretty(&json!({
                    "verdict": word,
                    "cuts": join(&rep.cuts()),
                    "decode": decode_ok,
                    "encode": encode_ok,
                }))
            };
            Ok(Report {
                output,
                code: if equal { 0 } else { 1 },
            })
        }
        Direction::Qe => {
            let a = parse_dense(input)?;
            let mut out = format!("canonical cuts {}\n", join(&canonical_cuts(&a)));
            for (name, _) in &a.signature.relations {
                let _ = writeln!(out, "relation {name}");
                out.push_str(&print_region(&a.relation(name).expect("declared")));
            }
            Ok(plain(if text { out } else { pretty(&json!({"normal_form": out})) }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(name: &str, body: &str) -> String {
        let dir = std::env::temp_dir().join(format!("efgame-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p.display().to_string()
    }

    fn go(args: &[&str]) -> Report {
        let cfg = RunConfig::try_parse_from(std::iter::once("efgame").chain(args.iter().copied())).unwrap();
        run(&cfg)
    }

    const TWO: &str = "efgame-structure 1\nuniverse points 0 1\n";
    const THREE: &str = "efgame-structure 1\nuniverse points 0 1 2\n";

    #[test]
    fn oracle_verdicts_and_codes() {
        let (a, b) = (file("two", TWO), file("three", THREE));
        let same = go(&["oracle", &a, &a, "-r", "3"]);
        assert_eq!((same.output.as_str(), same.code), ("WIN\n", 0));
        let diff = go(&["oracle", &a, &b, "-r", "2", "--strategy"]);
        assert_eq!(diff.code, 1);
        assert!(diff.output.starts_with("LOSE\nspoiler opens with"));
        let bad = go(&["oracle", &file("bad", "junk\n"), &a, "-r", "1"]);
        assert_eq!(bad.code, 2);
        assert!(bad.output.starts_with("error:"));
    }

    #[test]
    fn games_print_transcripts() {
        let (a, b) = (file("two", TWO), file("three", THREE));
        let r = go(&["play", &a, &b, "-r", "2"]);
        assert_eq!(r.code, 1);
        assert_eq!(r.output.lines().filter(|l| l.starts_with("round")).count(), 2);
        let r = go(&["single-round", &a, &b, "-r", "2", "--format", "json"]);
        let v: Value = serde_json::from_str(&r.output).unwrap();
        assert_eq!(v["verdict"], "WIN");
        assert_eq!(r.code, 0);
    }

    #[test]
    fn level_checks() {
        let good = file("w1", "0 4 196 9412\n");
        assert_eq!(go(&["check-w", &good, "-k", "1"]).code, 0);
        let parity = go(&["check-w", &file("w2", "0 4 196 9413\n"), "-k", "1"]);
        assert_eq!(parity.code, 1);
        assert!(parity.output.contains("witness congruence"));
        assert_eq!(go(&["check-w", &good, "-k", "0"]).code, 2);
        let base = ["check-c", "--m", "2", "--l", "2", "--c", "2", "--g", "1/2", "--p", "0,4,196"];
        let pinned = go(&[&base[..], &["--a", "0", "--b", "0"]].concat());
        assert_eq!(pinned.code, 0, "{}", pinned.output);
        let loose = go(&base);
        assert_eq!(loose.code, 1);
        assert!(loose.output.contains("witness order"));
    }

    #[test]
    fn generators() {
        assert_eq!(go(&["gen-q", "--count", "2"]).output, "q0 = 0\nq1 = 8\n");
        assert_eq!(go(&["gen-p", "-k", "1", "--count", "3"]).output, "4\n196\n9412\n");
    }

    #[test]
    fn spectra() {
        let odd = file("odd", "(E x (E y (and (A z (or (< z y) (= z y))) (+ x x y))))\n");
        let r = go(&["spectrum", &odd, "--nmax", "16"]);
        assert_eq!(r.code, 0);
        assert!(r.output.contains("0101010101010101"));
        assert!(r.output.contains("period 2"));
        let deep = file(
            "deep",
            "(E m (and (A y (or (< y m) (= y m))) (E x (and (+ x x m) (E z (+ z z x))))))\n",
        );
        let r = go(&["spectrum", &deep, "--nmax", "8"]);
        assert_eq!(r.code, 2);
        assert!(r.output.contains("insufficient Nmax"));
    }

    #[test]
    fn translations() {
        let r2 = file("r2", "efgame-structure 1\nrelation R 1\nuniverse points 0 3 5\ntuples R\n0\n3\nend\n");
        let r3 = file("r3", "efgame-structure 1\nrelation R 1\nuniverse points 0 3 5\ntuples R\n0\n3\n5\nend\n");
        let r2b = file("r2b", "efgame-structure 1\nrelation R 1\nuniverse points 1 9\ntuples R\n1\n9\nend\n");
        let ok = go(&["translate", &r2, &r2b, "-k", "1", "--mode", "plus"]);
        assert_eq!(ok.code, 0, "{}", ok.output);
        assert!(ok.output.ends_with("WIN\n"));
        let pre = go(&["translate", &r2, &r3, "-k", "1", "--mode", "plus"]);
        assert_eq!(pre.code, 3);
        assert!(pre.output.starts_with("PRECONDITION"));
        let m = go(&["translate", &r2, &r2b, "-k", "2", "--mode", "monadic", "--window", "0..12"]);
        assert_eq!(m.code, 0, "{}", m.output);
        let ctx = file("ctx", r#"{"lo":0,"hi":30,"predicates":{"P":[7]}}"#);
        let m = go(&["translate", &r2, &r2, "-k", "1", "--mode", "bcefo", "--context", &ctx]);
        assert_eq!(m.code, 0, "{}", m.output);
    }

    #[test]
    fn representations() {
        let d = file("dense", "efgame-dense 1\nrelation R 2\nconstant c 2\ndefine R x y : (and (< x y) (< y 5))\n");
        let r = go(&["rep", &d, "--direction", "roundtrip"]);
        assert_eq!(r.code, 0);
        assert!(r.output.ends_with("EQUAL\n"));
        let enc = go(&["rep", &d, "--direction", "encode"]).output;
        let dec = go(&["rep", &file("enc", &enc), "--direction", "decode"]);
        assert!(dec.output.contains("cuts 2 5"));
        let missing: String = enc
            .lines()
            .filter(|l| *l != "relation R.t4.u00 2")
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(go(&["rep", &file("miss", &missing), "--direction", "decode"]).code, 2);
        let q = go(&["qe", &file("q", "(E y (and (< x y) (< y 5)))\n")]);
        assert!(q.output.contains("quantifier-free (and (< x 5))"));
        assert!(q.output.ends_with("cuts 5\ncell 0 : 0\n"));
    }

    #[test]
    fn same_seed_same_output() {
        let (a, b) = (file("two", TWO), file("three", THREE));
        let args = ["play", &a, &b, "-r", "2", "--spoiler", "random", "--seed", "7", "--format", "json"];
        assert_eq!(go(&args), go(&args));
    }
}
