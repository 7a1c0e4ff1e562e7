//! Command-line driver: configuration ingestion, deterministic report
//! emission. Every command is a pure function of its configuration; repeated
//! runs are diff-identical.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::dieudonne::{
    self, hdg_of_kr, hodge_polygon, is_max_kr, kr_type, newton_polygon, pr_polygon, sample_fv,
    validate_fv, DatumRepr, FVDatum, Kind, PELDatum,
};
use crate::zipclass::{self, FactorPoset, ZipView};
use crate::zipify::{assemble_zip, hilbert_partial_hasse, mu_ordinary_hasse};

/// Run configuration, versioned. Unknown fields are rejected.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub format: String,
    pub pel: PELDatum,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_count")]
    pub count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
}

fn default_seed() -> u64 {
    0
}
fn default_count() -> u64 {
    100
}

#[derive(Parser)]
#[command(
    name = "zipstrat",
    about = "Exact-arithmetic F-zips, splitting structures, and Ekedahl-Oort stratification at desk scale"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Path to a zipstrat/1 JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured sample count.
    #[arg(long)]
    count: Option<u64>,
    /// Output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample data and run the full invariant suite.
    Verify(ConfigArgs),
    /// Sample one datum and emit its JSON.
    Sample(ConfigArgs),
    /// Classify a datum file into its Ekedahl-Oort type.
    Classify {
        /// Path to a zipstrat/1 datum JSON (as produced by `sample`).
        #[arg(long)]
        datum: PathBuf,
        /// Also dump the graded zip (bases and maps per block).
        #[arg(long, default_value_t = false)]
        dump_zip: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// DOT export of the EO poset of a configured factor.
    EoPoset {
        #[arg(long)]
        config: PathBuf,
        /// Factor index.
        #[arg(long, default_value_t = 0)]
        factor: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hilbert KR/EKOR tables (CSV; DOT of the KR poset with --dot).
    HilbertEkor {
        /// Ramification indices, comma separated.
        #[arg(long, value_delimiter = ',')]
        e: Vec<usize>,
        /// Residue degrees, comma separated (same length as --e).
        #[arg(long, value_delimiter = ',')]
        f: Vec<usize>,
        #[arg(long, default_value_t = false)]
        dot: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// μ-admissible set of a GL_n-shaped block at Iwahori and special level.
    Adm {
        /// Dominant coweight, comma separated (e.g. 1,0).
        #[arg(long, value_delimiter = ',')]
        mu: Vec<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive per-stratum point counts for GL_n of type (n, d).
    PointCount {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Prime powers, comma separated.
        #[arg(long, value_delimiter = ',')]
        q: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Newton / Hodge / PR polygons of sampled data, as CSV.
    Polygons(ConfigArgs),
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        None => {
            print!("{}", text);
            Ok(())
        }
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string()),
    }
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig, String> {
    let raw = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("reading {}: {}", args.config.display(), e))?;
    let mut cfg: RunConfig = serde_json::from_str(&raw).map_err(|e| e.to_string())?;
    if cfg.format != dieudonne::FORMAT_TAG {
        return Err(format!("unsupported config format {:?}", cfg.format));
    }
    cfg.pel.validate().map_err(|e| e.to_string())?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(c) = args.count {
        cfg.count = c;
    }
    Ok(cfg)
}

/// Runs every invariant on one sampled datum; returns failed check names.
pub fn verify_sample(pel: &PELDatum, seed: u64, precision: Option<usize>) -> Vec<String> {
    let mut failures: Vec<String> = Vec::new();
    let datum = match sample_fv(pel, seed) {
        Ok(d) => d,
        Err(e) => {
            failures.push(format!("sample: {}", e));
            return failures;
        }
    };
    let report = validate_fv(&datum);
    if !report.is_empty() {
        failures.push(format!("fv-invariants: {:?}", report));
        return failures;
    }
    let zip = match assemble_zip(&datum) {
        Ok(z) => z,
        Err(e) => {
            failures.push(format!("zip-exactness: {}", e));
            return failures;
        }
    };
    for (i, fac) in zip.factors.iter().enumerate() {
        let pf = &pel.factors[i];
        // rank pattern: dim Ker V^l = d^l and dim C^l = d^l
        for blk in &fac.blocks {
            let dl = pf.sig(blk.j, blk.l);
            if blk.d.dim() != dl {
                failures.push(format!(
                    "rank-pattern: factor {} (j={}, l={}): dim Ker V = {} != {}",
                    i, blk.j, blk.l, blk.d.dim(), dl
                ));
            }
            if blk.c.dim() != dl {
                failures.push(format!(
                    "rank-pattern: factor {} (j={}, l={}): dim C = {} != {}",
                    i, blk.j, blk.l, blk.c.dim(), dl
                ));
            }
        }
        // polygon chain
        let hdg = hodge_polygon(&datum, i);
        let pr = pr_polygon(pel, i);
        match newton_polygon(&datum, i, precision) {
            Ok(newt) => {
                if !newt.leq(&hdg).unwrap_or(false) {
                    failures.push(format!("polygon-chain: factor {}: Newt > Hdg", i));
                }
                if newt.endpoint() != hdg.endpoint() {
                    failures.push(format!("polygon-chain: factor {}: endpoint mismatch", i));
                }
                if newt.check_convex().is_err() {
                    failures.push(format!("polygon-chain: factor {}: Newton not convex", i));
                }
            }
            Err(e) => failures.push(format!("polygon-chain: factor {}: {}", i, e)),
        }
        if !hdg.leq(&pr).unwrap_or(false) {
            failures.push(format!("polygon-chain: factor {}: Hdg > PR", i));
        }
        if is_max_kr(&datum, i) && hdg != pr {
            failures.push(format!("polygon-chain: factor {}: Hdg != PR on maximal KR", i));
        }
        // cross-path: hodge_polygon equals hdg_of_kr of the KR type
        let krs = kr_type(&datum, i);
        let h = pel.factors[i].block_rank();
        let vals: Vec<Vec<usize>> = krs.iter().map(|t| t.valuations(h)).collect();
        match hdg_of_kr(&vals, h) {
            Ok(p2) if p2 == hdg => {}
            other => {
                failures.push(format!("kr-vs-hodge: factor {}: {:?}", i, other.err()));
            }
        }
        // transported pairing isotropy where defined (kind C)
        if fac.kind == Kind::C {
            for blk in &fac.blocks {
                if let Some(p) = &blk.pairing {
                    for sub in [&blk.c, &blk.d] {
                        for a in sub.basis_vectors() {
                            for b in sub.basis_vectors() {
                                let pb = p.apply(&b);
                                let mut acc = 0u32;
                                for (x, y) in a.iter().zip(pb.iter()) {
                                    acc = zip.field.add(acc, zip.field.mul(*x, *y));
                                }
                                if acc != 0 {
                                    failures.push(format!(
                                        "pairing-isotropy: factor {} (j={}, l={})",
                                        i, blk.j, blk.l
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        // classification and Hasse consistency
        let sigs = zipclass::factor_sigs(pf);
        let fp = FactorPoset::build(fac.kind, fac.d, &sigs);
        let view = ZipView::of_factor(&zip, i);
        let widx = match zipclass::zip_type(&view, &fp) {
            Ok(w) => w,
            Err(e) => {
                failures.push(format!("classify: factor {}: {}", i, e));
                continue;
            }
        };
        if fac.kind == Kind::C {
            let mu = mu_ordinary_hasse(&zip, i).expect("kind C");
            let maximal = fp.length(widx) == fp.max_length();
            if !mu.zero != maximal {
                failures.push(format!(
                    "hasse-vs-eo: factor {}: mu-ordinary {} vs EO length {}",
                    i, !mu.zero, fp.length(widx)
                ));
            }
            if pf.is_hilbert() {
                let hasse = hilbert_partial_hasse(&zip, i).expect("hilbert");
                let ffac = &datum.factors[i];
                for j in 0..pf.f {
                    for l in 1..=pf.e {
                        let want_zero = if l >= 2 {
                            let host = &ffac.blocks[j].host;
                            let moved =
                                host.eps_power_image(ffac.blocks[j].splitting.step(l), 1);
                            ffac.blocks[j].splitting.step(l - 2).contains(&moved)
                        } else {
                            let blk = &fac.blocks[j * pf.e];
                            blk.c == blk.d
                        };
                        if hasse[j][l - 1].zero != want_zero {
                            failures.push(format!(
                                "hasse-consistency: factor {} (j={}, l={})",
                                i, j, l
                            ));
                        }
                    }
                }
                // μ-ordinary ⇔ maximal KR with maximal reduced data
                let krmax = is_max_kr(&datum, i);
                let wrap_nonzero = (0..pf.f).all(|j| !hasse[j][0].zero);
                if !mu.zero != (krmax && wrap_nonzero) {
                    failures.push(format!(
                        "hasse-vs-ekor: factor {}: mu {} kr-max {} reduced-max {}",
                        i, !mu.zero, krmax, wrap_nonzero
                    ));
                }
            }
        }
    }
    // wire round trip
    let repr = datum.to_repr();
    let text = serde_json::to_string(&repr).expect("serialize");
    match serde_json::from_str::<DatumRepr>(&text)
        .map_err(|e| e.to_string())
        .and_then(|r| FVDatum::from_repr(&r).map_err(|e| e.to_string()))
    {
        Ok(back) => {
            if !validate_fv(&back).is_empty() {
                failures.push("wire-roundtrip: reloaded datum fails validation".into());
            }
        }
        Err(e) => failures.push(format!("wire-roundtrip: {}", e)),
    }
    failures
}

#[derive(Serialize)]
pub struct VerifyReport {
    pub format: String,
    pub seed: u64,
    pub count: u64,
    pub passed: u64,
    pub failed: Vec<VerifyFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Serialize)]
pub struct VerifyFailure {
    pub seed: u64,
    pub checks: Vec<String>,
}

/// The verify suite over `count` seeded samples.
pub fn run_verify(pel: &PELDatum, seed: u64, count: u64, precision: Option<usize>) -> VerifyReport {
    let mut failed = Vec::new();
    let mut passed = 0u64;
    for k in 0..count {
        let sample_seed = seed.wrapping_add(k);
        let failures = verify_sample(pel, sample_seed, precision);
        if failures.is_empty() {
            passed += 1;
        } else {
            failed.push(VerifyFailure { seed: sample_seed, checks: failures });
        }
    }
    VerifyReport {
        format: dieudonne::FORMAT_TAG.to_string(),
        seed,
        count,
        passed,
        failed,
        warning: if count == 0 { Some("count = 0: vacuous pass".into()) } else { None },
    }
}

fn cmd_verify(args: &ConfigArgs) -> Result<i32, String> {
    let cfg = load_config(args)?;
    let report = run_verify(&cfg.pel, cfg.seed, cfg.count, cfg.precision);
    let ok = report.failed.is_empty();
    emit(&args.out, &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()))?;
    Ok(if ok { 0 } else { 1 })
}

fn cmd_sample(args: &ConfigArgs) -> Result<i32, String> {
    let cfg = load_config(args)?;
    let datum = sample_fv(&cfg.pel, cfg.seed).map_err(|e| e.to_string())?;
    let repr = datum.to_repr();
    emit(&args.out, &format!("{}\n", serde_json::to_string_pretty(&repr).unwrap()))?;
    Ok(0)
}

fn cmd_classify(datum_path: &PathBuf, dump_zip: bool, out: &Option<PathBuf>) -> Result<i32, String> {
    let raw = std::fs::read_to_string(datum_path).map_err(|e| e.to_string())?;
    let repr: DatumRepr = serde_json::from_str(&raw).map_err(|e| e.to_string())?;
    let datum = FVDatum::from_repr(&repr).map_err(|e| e.to_string())?;
    let report = validate_fv(&datum);
    if !report.is_empty() {
        let msg = serde_json::json!({
            "format": dieudonne::FORMAT_TAG,
            "error": "invariant violation",
            "violations": report.iter().map(|v| format!("{:?}", v)).collect::<Vec<_>>(),
        });
        emit(out, &format!("{}\n", serde_json::to_string_pretty(&msg).unwrap()))?;
        return Ok(1);
    }
    let zip = match assemble_zip(&datum) {
        Ok(z) => z,
        Err(e) => {
            let msg = serde_json::json!({
                "format": dieudonne::FORMAT_TAG,
                "error": "structure violation",
                "violations": [e.to_string()],
            });
            emit(out, &format!("{}\n", serde_json::to_string_pretty(&msg).unwrap()))?;
            return Ok(1);
        }
    };
    let mut factors = Vec::new();
    for (i, fac) in zip.factors.iter().enumerate() {
        let sigs = zipclass::factor_sigs(&datum.pel.factors[i]);
        let fp = FactorPoset::build(fac.kind, fac.d, &sigs);
        let view = ZipView::of_factor(&zip, i);
        let widx = zipclass::zip_type(&view, &fp).map_err(|e| e.to_string())?;
        let word: Vec<String> = fp
            .poset
            .reduced_word(fp.element(widx))
            .into_iter()
            .map(|(b, k)| format!("s{}_{}", b, k))
            .collect();
        let mu = if fac.kind == Kind::C {
            Some(!mu_ordinary_hasse(&zip, i).expect("kind C").zero)
        } else {
            None
        };
        factors.push(serde_json::json!({
            "factor": i,
            "word": word,
            "length": fp.length(widx),
            "maximal": fp.length(widx) == fp.max_length(),
            "subsets": fp.subset_of[widx],
            "g_canonical": fac.g_canonical,
            "mu_ordinary": mu,
        }));
    }
    let mut msg = serde_json::json!({ "format": dieudonne::FORMAT_TAG, "factors": factors });
    if dump_zip {
        let dump: Vec<serde_json::Value> = zip
            .factors
            .iter()
            .map(|fac| {
                let blocks: Vec<serde_json::Value> = fac
                    .blocks
                    .iter()
                    .map(|blk| {
                        serde_json::json!({
                            "j": blk.j,
                            "l": blk.l,
                            "dim": blk.dim,
                            "section": blk.section.repr(),
                            "c": blk.c.basis().repr(),
                            "d": blk.d.basis().repr(),
                            "f_out": blk.f_out.repr(),
                            "v_out": blk.v_out.repr(),
                        })
                    })
                    .collect();
                serde_json::json!({
                    "blocks": blocks,
                    "g": fac.g.iter().map(|g| g.repr()).collect::<Vec<_>>(),
                    "g_canonical": fac.g_canonical,
                })
            })
            .collect();
        msg["zip"] = serde_json::json!(dump);
    }
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&msg).unwrap()))?;
    Ok(0)
}

fn cmd_eo_poset(config: &PathBuf, factor: usize, out: &Option<PathBuf>) -> Result<i32, String> {
    let raw = std::fs::read_to_string(config).map_err(|e| e.to_string())?;
    let cfg: RunConfig = serde_json::from_str(&raw).map_err(|e| e.to_string())?;
    cfg.pel.validate().map_err(|e| e.to_string())?;
    if factor >= cfg.pel.factors.len() {
        return Err(format!("factor {} out of range", factor));
    }
    let pf = &cfg.pel.factors[factor];
    let sigs = zipclass::factor_sigs(pf);
    let fp = FactorPoset::build(pf.kind, pf.d, &sigs);
    emit(out, &fp.poset.dot_export())?;
    Ok(0)
}

fn cmd_hilbert_ekor(
    e: &[usize],
    f: &[usize],
    dot: bool,
    out: &Option<PathBuf>,
) -> Result<i32, String> {
    if e.len() != f.len() || e.is_empty() {
        return Err("--e and --f must be nonempty lists of equal length".into());
    }
    let table = crate::affine::hilbert_ekor(e, f);
    if dot {
        emit(out, &table.kr_dot())?;
    } else {
        let mut text = table.to_csv();
        text.push_str(&format!(
            "# total_ekor,{}\n# eo_count,{}\n",
            table.total_ekor, table.eo_count
        ));
        emit(out, &text)?;
    }
    Ok(0)
}

fn cmd_adm(mu: &[i64], out: &Option<PathBuf>) -> Result<i32, String> {
    if mu.is_empty() {
        return Err("--mu must be nonempty".into());
    }
    let ctx = crate::affine::AffineCtx::new(mu.len());
    let adm = crate::affine::adm(&ctx, mu);
    let classes = adm.special_level_classes();
    let maximal_classes: Vec<&Vec<i64>> = classes
        .iter()
        .filter(|lam| {
            classes.iter().all(|o| *o == **lam || !crate::affine::dominance_leq(lam, o))
        })
        .collect();
    let msg = serde_json::json!({
        "format": dieudonne::FORMAT_TAG,
        "mu": crate::affine::dominant(mu),
        "iwahori_size": adm.elements.len(),
        "lengths": adm.lengths,
        "elements": adm.elements.iter().map(|x| serde_json::json!({
            "translation": x.lambda,
            "perm": x.w,
        })).collect::<Vec<_>>(),
        "special_classes": classes,
        "special_unique_maximal": maximal_classes.len() == 1,
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&msg).unwrap()))?;
    Ok(0)
}

fn cmd_point_count(n: usize, d: usize, qs: &[u64], out: &Option<PathBuf>) -> Result<i32, String> {
    if d == 0 || d >= n {
        return Err("need 0 < d < n".into());
    }
    let fp = FactorPoset::gl(n, d);
    let mut text = String::from("q,w,length,count\n");
    let mut rows: BTreeMap<(u64, usize), u64> = BTreeMap::new();
    for &q in qs {
        let (p, m) = factor_prime_power(q).ok_or(format!("{} is not a prime power", q))?;
        let field = crate::ffalg::make_field(p, m).map_err(|e| e.to_string())?;
        let counts = if m == 1 && n <= 4 {
            zipclass::fast::point_count_fast(&field, n, d, &fp)
        } else {
            zipclass::point_count(&field, n, d, &fp)
        };
        let total: u64 = counts.iter().sum();
        if total != zipclass::gl_order(q, n) {
            return Err(format!("q={}: counts do not partition the group", q));
        }
        for (w, &c) in counts.iter().enumerate() {
            rows.insert((q, w), c);
        }
    }
    for ((q, w), c) in rows {
        text.push_str(&format!("{},{},{},{}\n", q, w, fp.length(w), c));
    }
    emit(out, &text)?;
    Ok(0)
}

pub fn factor_prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q {
        if q % p == 0 {
            let mut m = 0u32;
            let mut rest = q;
            while rest % p == 0 {
                rest /= p;
                m += 1;
            }
            return if rest == 1 { Some((p, m)) } else { None };
        }
        p += 1;
    }
    Some((q, 1))
}

fn cmd_polygons(args: &ConfigArgs) -> Result<i32, String> {
    let cfg = load_config(args)?;
    let mut text = String::from("seed,factor,polygon,s,y\n");
    for k in 0..cfg.count.max(1) {
        let seed = cfg.seed.wrapping_add(k);
        let datum = sample_fv(&cfg.pel, seed).map_err(|e| e.to_string())?;
        for i in 0..cfg.pel.factors.len() {
            let hdg = hodge_polygon(&datum, i);
            let pr = pr_polygon(&cfg.pel, i);
            let newt = newton_polygon(&datum, i, cfg.precision).map_err(|e| e.to_string())?;
            for (name, poly) in [("newton", &newt), ("hodge", &hdg), ("pr", &pr)] {
                for (s, y) in poly.y.iter().enumerate() {
                    let ytxt = if *y.denom() == 1 {
                        format!("{}", y.numer())
                    } else {
                        format!("{}/{}", y.numer(), y.denom())
                    };
                    text.push_str(&format!("{},{},{},{},{}\n", seed, i, name, s, ytxt));
                }
            }
        }
    }
    emit(&args.out, &text)?;
    Ok(0)
}

/// Entry point; returns the process exit code (0 ok, 1 invariant failure,
/// 2 usage or parse error).
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.cmd {
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Sample(args) => cmd_sample(args),
        Cmd::Classify { datum, dump_zip, out } => cmd_classify(datum, *dump_zip, out),
        Cmd::EoPoset { config, factor, out } => cmd_eo_poset(config, *factor, out),
        Cmd::HilbertEkor { e, f, dot, out } => cmd_hilbert_ekor(e, f, *dot, out),
        Cmd::Adm { mu, out } => cmd_adm(mu, out),
        Cmd::PointCount { n, d, q, out } => cmd_point_count(*n, *d, q, out),
        Cmd::Polygons(args) => cmd_polygons(args),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(std::io::stderr(), "error: {}", msg);
            2
        }
    }
}
