use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use ovalforge::classify::{self, classify_spreads, oval_census, oval_stabilizer, screen_fan_candidates};
use ovalforge::collineation::set_maps;
use ovalforge::fans::fan_from_flock;
use ovalforge::flocks::{herd_from_clan, named_clan, QClan};
use ovalforge::magic::{magic_apply, magic_equivalent, MagicElement};
use ovalforge::ovals::{named_opoly, Convention, Family, OPoly, Oval};
use ovalforge::projspace::P2;
use ovalforge::serial::{
    field_for, from_json, to_json, ClanRecord, FanRecord, FlockRecord, HerdRecord, OPolyRecord, OvalRecord,
    SpreadRecord, StabilizerRecord,
};
use ovalforge::titsgq::{check_spread, enumerate_spreads, fan_from_spread, nucleus_swap_spread, spread_from_fan};
use ovalforge::{Error, Fe, Field};

mod reproduce;

#[derive(Parser, Debug)]
#[command(name = "ovalforge", version, about = "Ovals, fans, Tits quadrangle spreads and flocks over GF(2^h)")]
pub struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Worker threads.
    #[arg(long, global = true, env = "OVALFORGE_JOBS")]
    jobs: Option<usize>,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Checkpoint file for resumable jobs.
    #[arg(long, global = true)]
    resume: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct FieldArgs {
    #[arg(long)]
    q: usize,
    /// Irreducible modulus as an integer bit pattern.
    #[arg(long)]
    modulus: Option<u32>,
}

impl FieldArgs {
    fn field(&self) -> Result<&'static Field, Error> {
        if ![2, 4, 8, 16, 32, 64].contains(&self.q) {
            return Err(Error::Unsupported(format!("q = {} (expected 2, 4, 8, 16, 32 or 64)", self.q)));
        }
        field_for(self.q, self.modulus)
    }
}

#[derive(Args, Debug, Clone)]
struct PolyArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Polynomial such as `x^6 + x^4 + x^2` or `x^(1/2)`.
    #[arg(long, conflicts_with = "family")]
    poly: Option<String>,
    /// Named family: conic, regular, pointed, subiaco1, subiaco2, adelaide, translation(k).
    #[arg(long)]
    family: Option<String>,
    /// `d` puts the extra point at (0,0,1), `o` at (0,1,0).
    #[arg(long, default_value = "d")]
    convention: String,
    /// Use the inverse permutation of the polynomial.
    #[arg(long)]
    inverse: bool,
}

impl PolyArgs {
    fn opoly(&self) -> Result<OPoly, Error> {
        let field = self.field.field()?;
        let f = match (&self.poly, &self.family) {
            (Some(p), None) => OPoly::parse(field, p)?,
            (None, Some(name)) => named_opoly(field, name.parse::<Family>()?)?,
            _ => return Err(Error::Invalid("give exactly one of --poly and --family".into())),
        };
        if self.inverse {
            f.inverse()
        } else {
            Ok(f)
        }
    }

    fn convention(&self) -> Result<Convention, Error> {
        match self.convention.as_str() {
            "d" | "D" => Ok(Convention::D),
            "o" | "O" => Ok(Convention::O),
            c => Err(Error::Parse(format!("unknown convention {c:?}"))),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Field tables and element arithmetic.
    Field {
        #[command(subcommand)]
        cmd: FieldCmd,
    },
    /// O-polynomials and ovals.
    Oval {
        #[command(subcommand)]
        cmd: OvalCmd,
    },
    /// The magic action of PGammaL(2,q).
    Magic {
        #[command(subcommand)]
        cmd: MagicCmd,
    },
    /// Generalized fans.
    Fan {
        #[command(subcommand)]
        cmd: FanCmd,
    },
    /// Spreads of T2(D(f)).
    Spread {
        #[command(subcommand)]
        cmd: SpreadCmd,
    },
    /// q-clans, flocks and herds.
    Clan {
        #[command(subcommand)]
        cmd: ClanCmd,
    },
    /// Stabilizer of an oval or hyperoval and its point orbits.
    Stabilizer {
        #[command(flatten)]
        poly: PolyArgs,
        /// Use the hyperoval (oval plus nucleus).
        #[arg(long)]
        hyperoval: bool,
    },
    /// Oval census, fan screening and spread classification.
    Classify {
        #[arg(long)]
        q: usize,
        /// Stop after the census (`census`) or the screening (`screen`).
        #[arg(long, default_value = "spreads")]
        stage: String,
    },
    /// Run a manifest of checks and print a pass/fail table.
    Reproduce {
        /// Manifest file; defaults to the built-in desk manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Built-in manifest: `desk` or `full`.
        #[arg(long, default_value = "desk")]
        suite: String,
    },
}

#[derive(Subcommand, Debug)]
enum FieldCmd {
    /// Order, modulus, generator and trace-one element.
    Info(FieldArgs),
    /// `a * b`, `a / b`, `sqrt a` and `tr a` for integers a, b.
    Calc {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        a: u32,
        #[arg(long)]
        b: Option<u32>,
    },
}

#[derive(Subcommand, Debug)]
enum OvalCmd {
    /// Whether the polynomial is an o-polynomial.
    Verify(PolyArgs),
    /// Points and nucleus of the oval.
    Points(PolyArgs),
    /// Replace a point of the oval by its nucleus.
    Swap {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        point: String,
    },
    /// `f` with `D(f)` equivalent to the oval and the point sent to (0,0,1).
    DForm {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        point: String,
    },
    /// Inverse o-polynomial.
    Inverse(PolyArgs),
}

#[derive(Subcommand, Debug)]
enum MagicCmd {
    /// Image of `f` under `psi = (a,b,c,d,gamma)`.
    Apply {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        psi: String,
    },
    /// Sampled check of the action law and o-permutation preservation.
    Check {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Search for `psi` and `lambda` with `psi f = lambda g`.
    Equivalent {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        to: String,
    },
}

#[derive(Subcommand, Debug)]
enum FanCmd {
    /// Fan of a flock of the quadratic cone, from a named clan.
    FromClan {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        family: String,
    },
    /// Check a fan record.
    Verify {
        #[arg(long)]
        input: PathBuf,
    },
    /// The spread of a fan record.
    ToSpread {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum SpreadCmd {
    /// Check a spread record.
    Verify {
        #[arg(long)]
        input: PathBuf,
    },
    /// The fan cut out by a spread record.
    Slice {
        #[arg(long)]
        input: PathBuf,
    },
    /// Transport a spread record to the nucleus-swapped quadrangle.
    Swap {
        #[arg(long)]
        input: PathBuf,
    },
    /// Spreads of T2(D(f)) through (0,0,1).
    Enumerate {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        limit: Option<usize>,
        /// Print only counts and classes.
        #[arg(long)]
        summary: bool,
    },
}

#[derive(Subcommand, Debug)]
enum ClanCmd {
    /// Check a clan, its flock and its herd.
    Verify(ClanArgs),
    ToFlock(ClanArgs),
    ToHerd(ClanArgs),
    /// The swapped flock on the cone of the inverse automorphism.
    Swap(ClanArgs),
    /// Normalize the swapped flock.
    Normalize(ClanArgs),
}

#[derive(Args, Debug, Clone)]
struct ClanArgs {
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    modulus: Option<u32>,
    /// classical, linear, subiaco or adelaide.
    #[arg(long, conflicts_with = "input")]
    family: Option<String>,
    /// Clan record.
    #[arg(long)]
    input: Option<PathBuf>,
}

impl ClanArgs {
    fn clan(&self) -> Result<QClan, Error> {
        match (&self.family, &self.input) {
            (Some(name), None) => {
                let q = self.q.ok_or_else(|| Error::Invalid("--family needs --q".into()))?;
                named_clan(FieldArgs { q, modulus: self.modulus }.field()?, name)
            }
            (None, Some(path)) => from_json::<ClanRecord>(&std::fs::read_to_string(path)?)?.to_clan(),
            _ => Err(Error::Invalid("give exactly one of --family and --input".into())),
        }
    }
}

/// Result of a subcommand: the JSON value and whether it reports a failed
/// validation.
pub struct Outcome {
    pub value: Value,
    pub valid: bool,
}

fn ok(value: Value) -> Result<Outcome, Error> {
    Ok(Outcome { value, valid: true })
}

fn checked(value: Value, valid: bool) -> Result<Outcome, Error> {
    Ok(Outcome { value, valid })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn parse_ints(s: &str, n: usize) -> Result<Vec<u32>, Error> {
    let v: Vec<u32> = s
        .trim_matches(|c| c == '(' || c == ')' || c == '[' || c == ']')
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad integer in {s:?}"))))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(Error::Parse(format!("expected {n} comma-separated integers, got {s:?}")));
    }
    Ok(v)
}

fn parse_point(field: &Field, s: &str) -> Result<P2, Error> {
    let v = parse_ints(s, 3)?;
    let raw = [field.elem(v[0])?, field.elem(v[1])?, field.elem(v[2])?];
    P2::normalize(field, raw)
}

fn read_record<T: for<'de> serde::Deserialize<'de>>(path: &PathBuf) -> Result<T, Error> {
    from_json(&std::fs::read_to_string(path)?)
}

fn herd_summary(c: &QClan) -> Value {
    match herd_from_clan(c, c.kappa()) {
        Err(e) => json!({ "valid": false, "error": e.to_string() }),
        Ok(h) => {
            let members_ok = h.check().is_ok();
            let distinct = h.polynomial_sets().map(|(hs, _)| hs).unwrap_or_default();
            let text = if distinct.len() == 1 && Oval::o_form(&distinct[0]).is_ok_and(|o| o.is_conic()) {
                "q+1 copies of conic".to_string()
            } else {
                format!("{} distinct o-polynomials", distinct.len())
            };
            json!({ "valid": members_ok, "description": text })
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.cmd {
        Cmd::Field { cmd } => match cmd {
            FieldCmd::Info(a) => {
                let f = a.field()?;
                ok(json!({
                    "q": f.q(),
                    "h": f.h(),
                    "modulus": f.modulus(),
                    "generator": f.generator().0,
                    "least_trace_one": ovalforge::ovals::least_trace_one(f).0,
                }))
            }
            FieldCmd::Calc { field, a, b } => {
                let f = field.field()?;
                let a = f.elem(*a)?;
                let mut v = json!({ "a": a.0, "sqrt": f.sqrt(a).0, "trace": f.trace(a) });
                if !a.is_zero() {
                    v["inverse"] = json!(f.inv(a).0);
                }
                if let Some(b) = b {
                    let b = f.elem(*b)?;
                    v["b"] = json!(b.0);
                    v["sum"] = json!((a + b).0);
                    v["product"] = json!(f.mul(a, b).0);
                    if !b.is_zero() {
                        v["quotient"] = json!(f.div(a, b).0);
                    }
                }
                ok(v)
            }
        },
        Cmd::Oval { cmd } => match cmd {
            OvalCmd::Verify(p) => {
                let f = p.opoly()?;
                let conv = p.convention()?;
                match f.check_opolynomial() {
                    Ok(()) => ok(json!({ "valid": true, "record": to_value(&OPolyRecord::new(&f, conv)) })),
                    Err(d) => {
                        checked(json!({ "valid": false, "defect": to_value(&d), "reason": d.to_string() }), false)
                    }
                }
            }
            OvalCmd::Points(p) => {
                let oval = Oval::from_opoly(&p.opoly()?, p.convention()?)?;
                ok(json!({ "is_conic": oval.is_conic(), "oval": to_value(&OvalRecord::new(&oval)) }))
            }
            OvalCmd::Swap { poly, point } => {
                let oval = Oval::from_opoly(&poly.opoly()?, poly.convention()?)?;
                let p = parse_point(oval.field(), point)?;
                let swapped = oval.swap_nucleus(&p)?;
                ok(json!({ "is_conic": swapped.is_conic(), "oval": to_value(&OvalRecord::new(&swapped)) }))
            }
            OvalCmd::DForm { poly, point } => {
                let oval = Oval::from_opoly(&poly.opoly()?, poly.convention()?)?;
                let p = parse_point(oval.field(), point)?;
                let (f, _) = oval.d_form_at(&p)?;
                ok(json!({ "expr": f.expr(), "record": to_value(&OPolyRecord::new(&f, Convention::D)) }))
            }
            OvalCmd::Inverse(p) => {
                let f = p.opoly()?.inverse()?;
                ok(json!({ "expr": f.expr(), "record": to_value(&OPolyRecord::new(&f, p.convention()?)) }))
            }
        },
        Cmd::Magic { cmd } => match cmd {
            MagicCmd::Apply { poly, psi } => {
                let f = poly.opoly()?;
                let field = f.field();
                let v = parse_ints(psi, 5)?;
                let m = MagicElement::new(
                    field,
                    field.elem(v[0])?,
                    field.elem(v[1])?,
                    field.elem(v[2])?,
                    field.elem(v[3])?,
                    v[4],
                )?;
                let img = magic_apply(&m, &f)?;
                ok(
                    json!({ "psi": to_value(&m), "expr": img.expr(), "coeffs": img.coeffs().iter().map(|c| c.0).collect::<Vec<_>>() }),
                )
            }
            MagicCmd::Check { poly, samples } => {
                let f = poly.opoly()?;
                let field = f.field();
                let mut rng = ChaCha8Rng::seed_from_u64(cli.run.seed);
                let mut random_psi = || loop {
                    let [a, b, c, d] = [0; 4].map(|_| Fe(rng.gen_range(0..field.q()) as u8));
                    if let Ok(m) = MagicElement::new(field, a, b, c, d, rng.gen_range(0..field.h())) {
                        return m;
                    }
                };
                let mut failures = Vec::new();
                for _ in 0..*samples {
                    let (p1, p2) = (random_psi(), random_psi());
                    let img = magic_apply(&p1, &f)?;
                    let law = magic_apply(&p2, &img)? == magic_apply(&p2.compose(field, &p1), &f)?;
                    if !img.is_opermutation() || !law {
                        failures.push(json!({ "psi": to_value(&p1), "then": to_value(&p2) }));
                    }
                }
                let valid = failures.is_empty();
                checked(
                    json!({ "samples": samples, "seed": cli.run.seed, "failures": failures.len(), "examples": failures }),
                    valid,
                )
            }
            MagicCmd::Equivalent { poly, to } => {
                let f = poly.opoly()?;
                let g = OPoly::parse(f.field(), to)?;
                match magic_equivalent(&f, &g) {
                    Some((psi, lambda)) => ok(json!({ "equivalent": true, "psi": to_value(&psi), "lambda": lambda.0 })),
                    None => ok(json!({ "equivalent": false })),
                }
            }
        },
        Cmd::Fan { cmd } => match cmd {
            FanCmd::FromClan { field, family } => {
                let c = named_clan(field.field()?, family)?;
                let fl = c.to_flock();
                let (a, b) = fl.outer();
                let fan = fan_from_flock(&a, &b, c.field().h() - 1)?;
                ok(to_value(&FanRecord::new(&fan)))
            }
            FanCmd::Verify { input } => {
                let fan = read_record::<FanRecord>(input)?.to_fan()?;
                match fan.check() {
                    Ok(()) => ok(json!({ "valid": true })),
                    Err(d) => checked(json!({ "valid": false, "defect": to_value(&d) }), false),
                }
            }
            FanCmd::ToSpread { input } => {
                let fan = read_record::<FanRecord>(input)?.to_fan()?;
                let (t, s) = spread_from_fan(&fan)?;
                ok(to_value(&SpreadRecord::new(&t, &s)?))
            }
        },
        Cmd::Spread { cmd } => match cmd {
            SpreadCmd::Verify { input } => {
                let (t, s) = read_record::<SpreadRecord>(input)?.decode()?;
                match check_spread(&t, &s.lines) {
                    Ok(()) => ok(json!({ "valid": true, "lines": s.len() })),
                    Err(d) => checked(json!({ "valid": false, "defect": to_value(&d) }), false),
                }
            }
            SpreadCmd::Slice { input } => {
                let (t, s) = read_record::<SpreadRecord>(input)?.decode()?;
                ok(to_value(&FanRecord::new(&fan_from_spread(&t, &s)?)))
            }
            SpreadCmd::Swap { input } => {
                let (t, s) = read_record::<SpreadRecord>(input)?.decode()?;
                let p = *s.type_b().first().ok_or_else(|| Error::Invalid("spread has no type (b) line".into()))?;
                let (t2, s2) = nucleus_swap_spread(&t, &s, &p)?;
                let valid = check_spread(&t2, &s2.lines).is_ok();
                checked(
                    json!({ "valid": valid, "oval": to_value(&OvalRecord::new(t2.oval())), "lines": s2.lines }),
                    valid,
                )
            }
            SpreadCmd::Enumerate { poly, limit, summary } => {
                let f = poly.opoly()?;
                let t = ovalforge::titsgq::TitsGQ::new(Oval::d_form(&f)?);
                let top = P2::from_coords([Fe::ZERO, Fe::ZERO, Fe::ONE]);
                let spreads = enumerate_spreads(&t, &top, *limit)?;
                if *summary {
                    let classes = ovalforge::titsgq::spread_classes(&t, &spreads)?;
                    let mut sizes: Vec<usize> = classes.iter().map(Vec::len).collect();
                    sizes.sort();
                    ok(
                        json!({ "q": f.field().q(), "f": f.expr(), "spreads": spreads.len(), "classes": classes.len(), "class_sizes": sizes }),
                    )
                } else {
                    let records = spreads.iter().map(|s| SpreadRecord::new(&t, s)).collect::<Result<Vec<_>, _>>()?;
                    ok(json!({ "q": f.field().q(), "f": f.expr(), "spreads": records.len(), "records": records }))
                }
            }
        },
        Cmd::Clan { cmd } => match cmd {
            ClanCmd::Verify(a) => {
                let c = a.clan()?;
                let clan_ok = c.is_valid();
                let flock_ok = c.to_flock().is_valid();
                let herd = herd_summary(&c);
                let valid = clan_ok && flock_ok && herd["valid"] == json!(true);
                let mut v =
                    json!({ "valid": valid, "clan": clan_ok, "flock": flock_ok, "herd": herd["description"].clone() });
                if let Err(d) = c.check() {
                    v["defect"] = to_value(&d);
                }
                checked(v, valid)
            }
            ClanCmd::ToFlock(a) => ok(to_value(&FlockRecord::new(&a.clan()?.to_flock()))),
            ClanCmd::ToHerd(a) => {
                let c = a.clan()?;
                ok(to_value(&HerdRecord::new(&herd_from_clan(&c, c.kappa())?)))
            }
            ClanCmd::Swap(a) => {
                let sw = a.clan()?.to_flock().swap();
                let valid = sw.is_valid();
                checked(json!({ "valid": valid, "flock": to_value(&FlockRecord::new(&sw)) }), valid)
            }
            ClanCmd::Normalize(a) => {
                let n = a.clan()?.to_flock().swap().normalize()?;
                let (f, g) = n.flock.outer();
                ok(json!({
                    "flock": to_value(&FlockRecord::new(&n.flock)),
                    "reindex": n.reindex.iter().map(|t| t.0).collect::<Vec<_>>(),
                    "shift": n.shift.map(|c| c.0),
                    "f": f.expr(),
                    "g": g.expr(),
                }))
            }
        },
        Cmd::Stabilizer { poly, hyperoval } => {
            let f = poly.opoly()?;
            let oval = Oval::from_opoly(&f, poly.convention()?)?;
            let id = format!("{}({})", if *hyperoval { "H" } else { "O" }, f.expr());
            if *hyperoval {
                let hyp = oval.hyperoval();
                let field = oval.field();
                let g = ovalforge::collineation::Group {
                    elements: set_maps(field, hyp.points(), hyp.points(), None, false)?,
                };
                let orbits = g.orbits(field, hyp.points());
                ok(to_value(&StabilizerRecord::new(&id, &g, &orbits)))
            } else {
                let (g, orbits) = oval_stabilizer(&oval)?;
                ok(to_value(&StabilizerRecord::new(&id, &g, &orbits)))
            }
        }
        Cmd::Classify { q, stage } => match stage.as_str() {
            "census" => {
                let c = oval_census(*q)?;
                let distinct = classify::census_classes_distinct(&c)?;
                checked(json!({ "census": to_value(&c.report), "distinct": distinct }), distinct)
            }
            "screen" => {
                let c = oval_census(*q)?;
                ok(json!({ "census": to_value(&c.report), "screen": to_value(&screen_fan_candidates(&c)?) }))
            }
            "spreads" => {
                let r = classify_spreads(*q, cli.run.resume.as_deref())?;
                let valid = r.conflicts.is_empty();
                checked(to_value(&r), valid)
            }
            s => Err(Error::Parse(format!("unknown stage {s:?}"))),
        },
        Cmd::Reproduce { manifest, suite } => {
            let m = match manifest {
                Some(p) => read_record(p)?,
                None => reproduce::builtin(suite)?,
            };
            let table = reproduce::run_manifest(&m, &cli.run);
            let valid = table.iter().all(|r| r.pass);
            checked(
                json!({ "items": to_value(&table), "passed": table.iter().filter(|r| r.pass).count(), "total": table.len() }),
                valid,
            )
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) => 1,
        _ => 2,
    }
}

fn emit(run: &RunArgs, v: &Value) -> Result<(), Error> {
    let text = to_json(v);
    match &run.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
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
    if let Some(n) = cli.run.jobs {
        if n == 0 {
            eprintln!("--jobs must be at least 1");
            return ExitCode::from(2);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli.run, &out.value) {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if out.valid { 0 } else { 1 })
        }
        Err(e) => {
            let _ = emit(&cli.run, &json!({ "error": e.to_string() }));
            eprintln!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
