//! The `symkit` command-line tool.

use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use symkit::classifier::{
    check_evidence, classify_group, compactness_criterion, discreteness, orbit, ClassBudget, GroupDescriptor, Label,
    ProbeResult,
};
use symkit::local::{breakpoints, decompose_local, is_local};
use symkit::metrics::{
    classify_metric, factor_fn_omega, net_flow, norm, refine_metric, Budgeted, GeneralizedMetric, MetricBudget,
    MetricCase, NormCertificate,
};
use symkit::partitions::Partition;
use symkit::perm::{parse_perm, PermJson, Permutation, Point};
use symkit::trees::{
    branch_limit, build_e_tree, build_s, build_tree, verify_conjugation, AllInjective, ETreeVariant, TreeMode,
};
use symkit::witnesses::{
    commutator_solve, even_shift_witness, factor_through, p_equiv_witness, q_equiv_witness, realized_pattern,
    sfinite_class, three_cycle_extract,
};
use symkit::{Rational, Tri};

#[derive(Parser)]
#[command(name = "symkit", version, about = "Permutations of ℕ, generalized metrics and closed-group classification")]
struct Cli {
    /// Window `{0, …, n-1}` for pointwise checks.
    #[arg(long, global = true, default_value_t = 1000)]
    window: usize,
    /// Orbit or ball-size budget.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a group descriptor into C_1, C_Q, C_P or C_S.
    Classify {
        descriptor: String,
        #[arg(long, default_value_t = 16)]
        gamma_max: usize,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// The orbit of a point under the pointwise stabilizer of `Γ`.
    Orbit {
        descriptor: String,
        /// Comma-separated points of `Γ`.
        #[arg(long, default_value = "")]
        gamma: String,
        #[arg(long)]
        alpha: Point,
    },
    /// Whether some finite pointwise stabilizer is trivial.
    Discrete { descriptor: String },
    /// Whether the group is closed with finite orbits.
    Compact { descriptor: String },
    #[command(subcommand)]
    Perm(PermCmd),
    #[command(subcommand)]
    Metric(MetricCmd),
    #[command(subcommand)]
    Local(LocalCmd),
    #[command(subcommand)]
    Witness(WitnessCmd),
    #[command(subcommand)]
    Tree(TreeCmd),
}

#[derive(Subcommand)]
enum PermCmd {
    /// Images of the window points, or of the listed points.
    Eval {
        perm: String,
        #[arg(long, value_delimiter = ',')]
        points: Vec<Point>,
    },
    /// Two-sided consistency on the window.
    Verify { perm: String },
    /// Random finite-support permutations, reproducible from `--seed`.
    Random {
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Support lies in `[0, support)`.
        #[arg(long, default_value_t = 16)]
        support: usize,
    },
}

#[derive(Subcommand)]
enum MetricCmd {
    /// Detect the ball-size case of a metric.
    Classify {
        metric: String,
        #[arg(long, value_delimiter = ',')]
        radius: Vec<i64>,
        #[arg(long)]
        centers: Option<usize>,
    },
    /// Distance in the refinement of a metric by a set of permutations.
    Refine {
        metric: String,
        /// A refining permutation; repeat for more.
        #[arg(long = "u", required = true)]
        us: Vec<String>,
        #[arg(long)]
        a: Point,
        #[arg(long)]
        b: Point,
        /// Search threshold; distances below it are exact.
        #[arg(long, default_value_t = 8)]
        radius: i64,
    },
    /// Norm bounds of a permutation.
    Norm { metric: String, perm: String },
    /// Net flow of a bounded permutation of ℤ across cuts.
    Flow {
        perm: String,
        #[arg(long, default_value_t = -8)]
        from: i64,
        #[arg(long, default_value_t = 8)]
        to: i64,
    },
    /// Factor a bounded permutation of ω into two interval-preserving ones.
    Factor { perm: String },
}

#[derive(Subcommand)]
enum LocalCmd {
    /// Factor into two local permutations.
    Decompose {
        perm: String,
        #[arg(long, default_value_t = 16)]
        count: usize,
    },
    /// The least breakpoint sequence.
    Breakpoints {
        perm: String,
        #[arg(long, default_value_t = 16)]
        count: usize,
    },
    /// Look for invariant initial segments within the window.
    Check { perm: String },
}

#[derive(Subcommand)]
enum WitnessCmd {
    /// Conjugators showing `S_(A) ≈ S_(B)` for partitions with unbounded finite blocks.
    PEquiv {
        a: String,
        b: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Factor this element of `S_(B)` through the witness.
        #[arg(long)]
        factor: Option<String>,
    },
    /// Conjugators of `S_(A₀)` onto the two matchings of a bounded partition.
    QEquiv {
        a: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long)]
        factor: Option<String>,
    },
    /// The shift by two along the singleton blocks of a partition.
    EvenShift {
        a: String,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Realize a bit pattern as a commutator with the block shift.
    Commutator {
        /// Bits such as `01101`.
        pattern: String,
        #[arg(long, default_value_t = 0)]
        lo: i64,
    },
    /// A 3-cycle from `g` and `s`.
    ThreeCycle { g: String, s: String },
    /// Class of the finite group generated by finite-support permutations.
    Sfinite { gens: Vec<String> },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Inf,
    Unbounded,
    Binary,
}

#[derive(Args)]
struct TreeArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Inf)]
    mode: ModeArg,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long, default_value = "full")]
    oracle: String,
    /// Branching numbers for the unbounded mode.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
}

#[derive(Subcommand)]
enum TreeCmd {
    /// Build a stabilizer tree and dump it.
    Build(TreeArgs),
    /// The limit of one branch.
    Branch {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, value_delimiter = ',')]
        choice: Vec<usize>,
    },
    /// The permutation `s` of an E-tree over all injective tuples.
    S {
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Fixed breakpoints; compositions when omitted.
        #[arg(long, value_delimiter = ',')]
        breaks: Vec<usize>,
    },
    /// Check `α_i g s = α_{iπ} g` for an interval-preserving `π`.
    Verify {
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long)]
        pi: String,
    },
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct CliError(String);

fn err(e: impl std::fmt::Display) -> CliError {
    CliError(e.to_string())
}

enum Outcome {
    Definite,
    Unknown,
}

struct Ctx {
    window: usize,
    budget: Option<usize>,
    json: bool,
    seed: u64,
}

impl Ctx {
    fn emit(&self, value: Value, text: String) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
        } else {
            println!("{text}");
        }
    }
}

fn tri_outcome(t: Tri) -> Outcome {
    match t {
        Tri::Unknown => Outcome::Unknown,
        _ => Outcome::Definite,
    }
}

fn perm(src: &str) -> Result<Permutation, CliError> {
    parse_perm(src).map_err(err)
}

fn descriptor(src: &str) -> Result<GroupDescriptor, CliError> {
    GroupDescriptor::parse(src).map_err(err)
}

fn partition(src: &str) -> Result<Partition, CliError> {
    Partition::parse(src).map_err(err)
}

fn metric(src: &str) -> Result<GeneralizedMetric, CliError> {
    GeneralizedMetric::parse(src).map_err(err)
}

fn points(src: &str) -> Result<Vec<Point>, CliError> {
    src.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError(format!("bad point `{s}`"))))
        .collect()
}

fn images(p: &Permutation, n: usize) -> Result<Vec<Point>, CliError> {
    (0..n).map(|x| p.apply(x).map_err(err)).collect()
}

/// Text form of a permutation, multiplied out when it has finite support.
fn show(p: &Permutation) -> String {
    p.to_finite().map_or_else(|_| p.to_text(), |f| f.to_text())
}

/// Whether `p · q` agrees with `f` on `[0, n)`.
fn product_agrees(p: &Permutation, q: &Permutation, f: &Permutation, n: usize) -> Result<bool, CliError> {
    let pq = p.then(q);
    for x in 0..n {
        if pq.apply(x).map_err(err)? != f.apply(x).map_err(err)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn class_budget(ctx: &Ctx, gamma_max: usize, samples: usize) -> ClassBudget {
    ClassBudget {
        gamma_max,
        samples,
        orbit_budget: ctx.budget.unwrap_or(ClassBudget::default().orbit_budget),
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let ctx = Ctx {
        window: cli.window,
        budget: cli.budget,
        json: cli.json,
        seed: cli.seed,
    };
    match cli.cmd {
        Cmd::Classify {
            descriptor: src,
            gamma_max,
            samples,
        } => {
            let g = descriptor(&src)?;
            let l = classify_group(&g, &class_budget(&ctx, gamma_max, samples));
            let checked = check_evidence(&g, &l);
            let mut v = l.to_json();
            v["evidence_check"] = json!(checked.as_ref().map(|_| "passed").unwrap_or_else(|e| e.as_str()));
            let qual = l.evidence.qualification.as_deref().map(|q| format!(" ({q})")).unwrap_or_default();
            ctx.emit(
                v,
                format!(
                    "{}{qual}\nλ: {}\nΓ: {:?}\n{}",
                    l.label.as_str(),
                    serde_json::to_value(l.lambda_case).expect("serializable").as_str().unwrap_or(""),
                    l.evidence.gamma,
                    l.evidence.note
                ),
            );
            checked.map_err(|e| CliError(format!("evidence check failed: {e}")))?;
            Ok(if l.label == Label::Unknown {
                Outcome::Unknown
            } else {
                Outcome::Definite
            })
        }
        Cmd::Orbit {
            descriptor: src,
            gamma,
            alpha,
        } => {
            let g = descriptor(&src)?;
            let r = orbit(&g, &points(&gamma)?, alpha, ctx.budget.unwrap_or(4096)).map_err(err)?;
            let text = match &r.result {
                ProbeResult::FullOrbit(p) => {
                    let s: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                    format!("{{{}}}", s.join(", "))
                }
                ProbeResult::AtLeast(n) => format!("at least {n} points"),
            };
            ctx.emit(json!(r), text);
            Ok(Outcome::Definite)
        }
        Cmd::Discrete { descriptor: src } => {
            let r = discreteness(&descriptor(&src)?, &class_budget(&ctx, 16, 64));
            ctx.emit(json!(r), format!("{:?}: {}", r.answer, r.reason));
            Ok(tri_outcome(r.answer))
        }
        Cmd::Compact { descriptor: src } => {
            let r = compactness_criterion(&descriptor(&src)?, &class_budget(&ctx, 16, 64));
            ctx.emit(json!(r), format!("{:?}: {}", r.answer, r.reason));
            Ok(tri_outcome(r.answer))
        }
        Cmd::Perm(c) => run_perm(&ctx, c),
        Cmd::Metric(c) => run_metric(&ctx, c),
        Cmd::Local(c) => run_local(&ctx, c),
        Cmd::Witness(c) => run_witness(&ctx, c),
        Cmd::Tree(c) => run_tree(&ctx, c),
    }
}

fn run_perm(ctx: &Ctx, c: PermCmd) -> Result<Outcome, CliError> {
    match c {
        PermCmd::Eval { perm: src, points } => {
            let p = perm(&src)?;
            let pts: Vec<Point> = if points.is_empty() {
                (0..ctx.window).collect()
            } else {
                points
            };
            let ims: Vec<Point> = pts.iter().map(|&x| p.apply(x).map_err(err)).collect::<Result<_, _>>()?;
            let text: Vec<String> = pts.iter().zip(&ims).map(|(x, y)| format!("{x} -> {y}")).collect();
            ctx.emit(json!({"perm": PermJson::from_perm(&p).map_err(err)?, "points": pts, "images": ims}), text.join("\n"));
        }
        PermCmd::Verify { perm: src } => {
            let r = perm(&src)?.verify_window(ctx.window);
            let failure = r.failure.as_ref().map(|f| json!({"point": f.point, "reason": f.reason}));
            let text = match &r.failure {
                None => format!("passed on [0, {})", r.window),
                Some(f) => format!("failed at {}: {}", f.point, f.reason),
            };
            ctx.emit(json!({"window": r.window, "passed": r.passed, "failure": failure}), text);
        }
        PermCmd::Random { count, support } => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let mut out = Vec::new();
            for _ in 0..count {
                let mut imgs: Vec<Point> = (0..support).collect();
                for i in (1..imgs.len()).rev() {
                    imgs.swap(i, rng.gen_range(0..=i));
                }
                out.push(Permutation::from_images(&imgs).map_err(err)?.to_text());
            }
            ctx.emit(json!(out), out.join("\n"));
        }
    }
    Ok(Outcome::Definite)
}

fn run_metric(ctx: &Ctx, c: MetricCmd) -> Result<Outcome, CliError> {
    match c {
        MetricCmd::Classify {
            metric: src,
            radius,
            centers,
        } => {
            let d = metric(&src)?;
            let def = MetricBudget::default();
            let b = MetricBudget {
                radii: if radius.is_empty() { def.radii } else { radius },
                centers: centers.unwrap_or(def.centers),
                cap: ctx.budget.unwrap_or(def.cap),
            };
            let r = classify_metric(&d, &b);
            ctx.emit(json!(r), format!("{:?}: {}", r.case, r.note));
            Ok(if r.case == MetricCase::Unknown {
                Outcome::Unknown
            } else {
                Outcome::Definite
            })
        }
        MetricCmd::Refine {
            metric: src,
            us,
            a,
            b,
            radius,
        } => {
            let us: Vec<Permutation> = us.iter().map(|s| perm(s)).collect::<Result<_, _>>()?;
            let d = refine_metric(&metric(&src)?, &us).map_err(err)?;
            let r = d.dist_budgeted(a, b, Rational::from_integer(radius)).map_err(err)?;
            let text = match &r {
                Budgeted::Exact(v) => format!("d'({a}, {b}) = {v}"),
                Budgeted::AtLeast(v) => format!("d'({a}, {b}) >= {v}"),
            };
            ctx.emit(json!({"metric": d.name(), "a": a, "b": b, "distance": r}), text);
            Ok(match r {
                Budgeted::Exact(_) => Outcome::Definite,
                Budgeted::AtLeast(_) => Outcome::Unknown,
            })
        }
        MetricCmd::Norm { metric: src, perm: p } => {
            let r = norm(&perm(&p)?, &metric(&src)?, ctx.window);
            let unknown = r.certificate == NormCertificate::Unknown;
            let cert = match &r.certificate {
                NormCertificate::CertifiedFinite(b) => format!("certified finite, at most {b}"),
                NormCertificate::CertifiedInfinite(w) => format!("certified infinite by {} witness pairs", w.len()),
                NormCertificate::Unknown => "unknown".to_string(),
            };
            ctx.emit(json!(r), format!("lower bound {}; {cert}\n{}", r.lower_bound, r.note));
            Ok(if unknown { Outcome::Unknown } else { Outcome::Definite })
        }
        MetricCmd::Flow { perm: p, from, to } => {
            let r = net_flow(&perm(&p)?, from..=to).map_err(err)?;
            let text = match r.common_value {
                Some(v) => format!("net flow {v}"),
                None => format!("cuts disagree: {:?}", r.per_cut),
            };
            ctx.emit(json!(r), text);
            Ok(Outcome::Definite)
        }
        MetricCmd::Factor { perm: p } => {
            let f = perm(&p)?;
            let r = factor_fn_omega(&f).map_err(err)?;
            let ok = product_agrees(&r.b1, &r.b2, &f, ctx.window)?;
            ctx.emit(
                json!({"step": r.step, "b1": show(&r.b1), "b2": show(&r.b2), "window": ctx.window, "product_agrees": ok}),
                format!("step {}\nb1 = {}\nb2 = {}\nb1·b2 = f on [0, {}): {ok}", r.step, show(&r.b1), show(&r.b2), ctx.window),
            );
            if ok {
                Ok(Outcome::Definite)
            } else {
                Err(CliError("factor product differs from the input".into()))
            }
        }
    }
}

fn run_local(ctx: &Ctx, c: LocalCmd) -> Result<Outcome, CliError> {
    match c {
        LocalCmd::Decompose { perm: p, count } => {
            let f = perm(&p)?;
            let (g, h, bp) = decompose_local(&f, count).map_err(err)?;
            let a = bp.prefix(count).map_err(err)?;
            let ok = product_agrees(&g, &h, &f, ctx.window)?;
            let g_text = if f.support_bound().is_some() { show(&g) } else { format!("{:?}", images(&g, ctx.window.min(64))?) };
            let h_text = if f.support_bound().is_some() { show(&h) } else { format!("{:?}", images(&h, ctx.window.min(64))?) };
            ctx.emit(
                json!({"breakpoints": a, "g": g_text, "h": h_text, "window": ctx.window, "product_agrees": ok}),
                format!("breakpoints {a:?}\ng = {g_text}\nh = {h_text}\ng·h = f on [0, {}): {ok}", ctx.window),
            );
            if ok {
                Ok(Outcome::Definite)
            } else {
                Err(CliError("factor product differs from the input".into()))
            }
        }
        LocalCmd::Breakpoints { perm: p, count } => {
            let a = breakpoints(&perm(&p)?, count).map_err(err)?;
            ctx.emit(json!(a), format!("{a:?}"));
            Ok(Outcome::Definite)
        }
        LocalCmd::Check { perm: p } => {
            let r = is_local(&perm(&p)?, ctx.window);
            let qual = if r.at_budget { " (at budget)" } else { "" };
            ctx.emit(json!(r), format!("{:?}{qual}: {}", r.answer, r.note));
            Ok(tri_outcome(r.answer))
        }
    }
}

fn run_witness(ctx: &Ctx, c: WitnessCmd) -> Result<Outcome, CliError> {
    match c {
        WitnessCmd::PEquiv { a, b, depth, factor } => {
            let w = p_equiv_witness(&partition(&a)?, &partition(&b)?, depth).map_err(err)?;
            let packed = json!({"f": w.packing_f, "g": w.packing_g});
            let mut v = json!({"f": w.f.to_text(), "g": w.g.to_text(), "depth": depth, "packing": packed});
            let mut text = format!("f = {}\ng = {}", w.f.to_text(), w.g.to_text());
            if let Some(h) = factor {
                let h = perm(&h)?;
                let fac = factor_through(&h, &w, ctx.window).map_err(err)?;
                let ok = product_agrees(&fac.p, &fac.q, &h, ctx.window)?;
                v["factorization"] = json!({
                    "p": show(&fac.p), "q": show(&fac.q),
                    "p_certified": fac.p_certified, "q_certified": fac.q_certified,
                    "product_agrees": ok,
                });
                text += &format!(
                    "\np = {}\nq = {}\np·q = h on [0, {}): {ok}; fpf⁻¹ ∈ S_(A): {:?}; gqg⁻¹ ∈ S_(A): {:?}",
                    show(&fac.p),
                    show(&fac.q),
                    ctx.window,
                    fac.p_certified,
                    fac.q_certified
                );
            }
            ctx.emit(v, text);
            Ok(Outcome::Definite)
        }
        WitnessCmd::QEquiv { a, depth, factor } => {
            let w = q_equiv_witness(&partition(&a)?, depth).map_err(err)?;
            let mut v = json!({"f": w.f.to_text(), "g": w.g.to_text(), "bound": w.bound,
                               "red": w.red.name(), "green": w.green.name()});
            let mut text = format!("f = {}\ng = {}", w.f.to_text(), w.g.to_text());
            if let Some(h) = factor {
                let fs = w.factorize(&perm(&h)?, ctx.window).map_err(err)?;
                let list: Vec<Value> = fs
                    .iter()
                    .map(|q| json!({"perm": show(&q.perm), "color": q.color.label(), "certified": q.certified}))
                    .collect();
                for q in &fs {
                    text += &format!("\n{} {} certified={}", q.color.label(), show(&q.perm), q.certified);
                }
                v["factors"] = json!(list);
            }
            ctx.emit(v, text);
            Ok(Outcome::Definite)
        }
        WitnessCmd::EvenShift { a, depth } => {
            let w = even_shift_witness(&partition(&a)?).map_err(err)?;
            let alphas: Vec<Point> = (0..depth as i64).map(|i| w.alpha(i)).collect::<Result<_, _>>().map_err(err)?;
            ctx.emit(
                json!({"f": w.f.to_text(), "alphas": alphas}),
                format!("f = {}\nα_0.. = {alphas:?}", w.f.to_text()),
            );
            Ok(Outcome::Definite)
        }
        WitnessCmd::Commutator { pattern, lo } => {
            let bits: Vec<bool> = pattern
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(CliError(format!("bad bit `{c}`"))),
                })
                .collect::<Result<_, _>>()?;
            let sol = commutator_solve(&bits, lo, (lo - 1, false)).map_err(err)?;
            let c = sol.realize();
            let got = realized_pattern(&c, lo, lo + bits.len() as i64).map_err(err)?;
            let ok = got == bits;
            ctx.emit(
                json!({"solution": sol, "f": sol.f_perm().to_text(), "commutator": c.to_text(), "realized": got, "matches": ok}),
                format!("f = {}\n[h, f] realizes {pattern}: {ok}", sol.f_perm().to_text()),
            );
            if ok {
                Ok(Outcome::Definite)
            } else {
                Err(CliError("realized pattern differs from the target".into()))
            }
        }
        WitnessCmd::ThreeCycle { g, s } => {
            let c = three_cycle_extract(&perm(&g)?, &perm(&s)?).map_err(err)?;
            let t = show(&c);
            ctx.emit(json!({"three_cycle": t}), t);
            Ok(Outcome::Definite)
        }
        WitnessCmd::Sfinite { gens } => {
            let gens: Vec<Permutation> = gens.iter().map(|s| perm(s)).collect::<Result<_, _>>()?;
            let r = sfinite_class(&gens).map_err(err)?;
            ctx.emit(json!(r), format!("{:?} (order {})", r.class, r.order));
            Ok(Outcome::Definite)
        }
    }
}

fn tree_of(t: &TreeArgs) -> Result<symkit::trees::TreeState, CliError> {
    let mode = match t.mode {
        ModeArg::Inf => TreeMode::InfOrbits,
        ModeArg::Unbounded => TreeMode::UnboundedOrbits { n: t.n.clone() },
        ModeArg::Binary => TreeMode::BinaryOrbits,
    };
    build_tree(descriptor(&t.oracle)?.oracle(), mode, t.depth).map_err(err)
}

fn e_tree(depth: usize, breaks: &[usize]) -> Result<symkit::trees::ETree, CliError> {
    let variant = if breaks.is_empty() {
        ETreeVariant::Compositions
    } else {
        ETreeVariant::Breakpoints { n: breaks.to_vec() }
    };
    build_e_tree(&AllInjective, variant, depth).map_err(err)
}

fn run_tree(ctx: &Ctx, c: TreeCmd) -> Result<Outcome, CliError> {
    match c {
        TreeCmd::Build(t) => {
            let tree = tree_of(&t)?;
            let check = tree.check_invariants().map_err(err)?;
            let s = tree.summary().map_err(err)?;
            let text = format!(
                "α = {:?}\n|K_j| = {:?}\nΓ sizes = {:?}\n{} left factors and {} sibling pairs checked",
                s.alphas,
                s.k_sizes,
                s.gammas.iter().map(Vec::len).collect::<Vec<_>>(),
                check.left_factors,
                check.sibling_pairs
            );
            ctx.emit(json!({"tree": s, "check": check}), text);
        }
        TreeCmd::Branch { tree: t, choice } => {
            let tree = Arc::new(tree_of(&t)?);
            let g = branch_limit(&tree, &choice).map_err(err)?;
            let n = tree.alphas.len();
            let ims: Vec<Point> = tree.alphas.iter().map(|&a| g.apply(a).map_err(err)).collect::<Result<_, _>>()?;
            let last = tree.gammas.last().cloned().unwrap_or_default();
            let fixed: Vec<(Point, Point)> =
                last.iter().map(|&x| g.apply(x).map(|y| (x, y)).map_err(err)).collect::<Result<_, _>>()?;
            ctx.emit(
                json!({"choice": choice, "alpha_images": ims, "gamma_images": fixed}),
                format!("α_i g for i < {n}: {ims:?}\nimages on Γ_{}: {fixed:?}", tree.depth),
            );
        }
        TreeCmd::S { depth, breaks } => {
            let t = e_tree(depth, &breaks)?;
            let s = build_s(&t).map_err(err)?;
            ctx.emit(
                json!({"level_sizes": t.level_sizes(), "jumps": t.jumps, "s": s.to_text()}),
                format!("|E_r| = {:?}\ns = {}", t.level_sizes(), s.to_text()),
            );
        }
        TreeCmd::Verify { depth, pi } => {
            let t = e_tree(depth, &[])?;
            let s = build_s(&t).map_err(err)?;
            let r = verify_conjugation(&t, &s, &AllInjective, &perm(&pi)?, depth).map_err(err)?;
            ctx.emit(json!(r), format!("passed: {} ({} points, breaks {:?})", r.passed, r.checked, r.breaks));
            if !r.passed {
                return Err(CliError(format!("conjugation fails at {:?}", r.failures)));
            }
        }
    }
    Ok(Outcome::Definite)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Definite) => ExitCode::SUCCESS,
        Ok(Outcome::Unknown) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
