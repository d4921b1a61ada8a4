//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! to stdout, bypassing the test harness capture, and the test fails if any
//! criterion fails.

mod common;

use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{
    brute_force_cyk, brute_force_junctions, random_ct, random_model, random_rna, random_structure, table,
    ExpectedJunction,
};
use csminer::cmscan::{build_cm, cyk_align, scan_genome, AlignConfig, BuildConfig, CovarianceModel, ScanConfig};
use csminer::features::extract_features;
use csminer::forest::synthetic::{shuffle_labels, synthetic_examples};
use csminer::forest::{load_dataset, oob_accuracy, train_forest, ForestConfig, LabeledExample};
use csminer::junction::{find_three_way_junctions, junctions_in_ct, JunctionFamily};
use csminer::pipeline::{format_text_report, run_scan_pipeline, write_ct_dir, PipelineConfig};
use csminer::seqio::{parse_fasta, reverse_complement, Alphabet, NucleotideSequence, Strand};
use csminer::structio::{parse_ct, parse_stockholm, write_ct};
use csminer::thermo::ThermoParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BIN: &str = env!("CARGO_BIN_EXE_csminer");
const GENOME_LEN: usize = 10_000;
const EMBED_AT: usize = 4000;

type Outcome = Result<String, String>;

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn check(cond: bool, what: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what)
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let out = Command::new(BIN)
        .args(["features", "--ct", &data("1e8o.ct")])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    check(out.status.success(), format!("exit {:?}", out.status.code()))?;
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let want = [
        ("J12", 0),
        ("J23", 4),
        ("J13", 0),
        ("Min(J12,J23,J13)", 0),
        ("Med(J12,J23,J13)", 0),
        ("Max(J12,J23,J13)", 4),
        ("Min(J23,J13)", 0),
        ("Min(J12,J13)", 0),
        ("Min(J12,J23)", 0),
        ("A(J12)", 0),
        ("A(J23)", 1),
        ("A(J13)", 0),
    ];
    for (name, v) in want {
        let got = text
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{name}\t")))
            .ok_or(format!("{name} missing"))?;
        check(got == v.to_string(), format!("{name} = {got}, expected {v}"))?;
    }
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("12 integer features exact, {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let ct = parse_ct(&std::fs::read_to_string(data("1e8o.ct")).unwrap()).map_err(|e| e.to_string())?;
    let js = junctions_in_ct(&ct).junctions;
    check(js.len() == 1, format!("{} junctions", js.len()))?;
    let f = extract_features(&js[0], &ThermoParams::default());
    check(
        f.dg_h1h2 < 0.0 && f.dg_h2h3 > 0.0 && f.dg_h1h3 < 0.0,
        format!("signs wrong: {} {} {}", f.dg_h1h2, f.dg_h2h3, f.dg_h1h3),
    )?;
    Ok(format!(
        "H1H2 {:.2}, H2H3 {:.2}, H1H3 {:.2}",
        f.dg_h1h2, f.dg_h2h3, f.dg_h1h3
    ))
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut total = 0;
    for k in 0..500 {
        let len = rng.gen_range(1..=200);
        let db = random_structure(&mut rng, len);
        let res = random_rna(&mut rng, len);
        let got: Vec<ExpectedJunction> = find_three_way_junctions(&table(&db), &res)
            .into_iter()
            .map(|j| ExpectedJunction {
                coords: j.coords(),
                loops: (j.j12.len(), j.j23.len(), j.j31.len()),
                family: j.family,
            })
            .collect();
        let want = brute_force_junctions(&db);
        check(got == want, format!("structure {k} differs: {db}"))?;
        total += want.len();
    }
    let toy = "((..((...))..((...))..))";
    let js = find_three_way_junctions(&table(toy), &vec![b'A'; toy.len()]);
    check(js.len() == 1, format!("toy gives {} junctions", js.len()))?;
    let loops = (js[0].j12.len(), js[0].j23.len(), js[0].j31.len());
    check(
        loops == (2, 2, 2) && js[0].family == JunctionFamily::B,
        format!("toy gives {loops:?} {:?}", js[0].family),
    )?;
    within(t.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "500 structures, {total} junctions agree; toy (2,2,2) B; {:.2?}",
        t.elapsed()
    ))
}

fn prior_stats(s: &[LabeledExample]) -> (f64, f64) {
    let mut c = [0f64; 4];
    for e in s {
        c[e.label.index()] += 1.0;
    }
    let n = s.len() as f64;
    let sum_sq = c.iter().map(|x| (x / n) * (x / n)).sum();
    let majority = c.iter().cloned().fold(0.0, f64::max) / n;
    (sum_sq, majority)
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let cfg = ForestConfig::default();
    let clean = synthetic_examples(200, 0.0, 42);
    let a = train_forest(&clean, &cfg).map_err(|e| e.to_string())?;
    let b = train_forest(&clean, &cfg).map_err(|e| e.to_string())?;
    check(
        a.to_json().unwrap() == b.to_json().unwrap(),
        "two runs gave different models".into(),
    )?;
    let clean_acc = oob_accuracy(&a, &clean).map_err(|e| e.to_string())?;
    check(clean_acc >= 0.9, format!("clean OOB {clean_acc:.3}"))?;

    let noisy = synthetic_examples(200, 0.1, 42);
    let noisy_acc = oob_accuracy(&train_forest(&noisy, &cfg).unwrap(), &noisy).unwrap();
    let (_, majority) = prior_stats(&noisy);
    check(
        noisy_acc - majority >= 0.15,
        format!("noisy OOB {noisy_acc:.3} vs majority {majority:.3}"),
    )?;

    let shuffled = shuffle_labels(&noisy, 7);
    let shuffled_acc = oob_accuracy(&train_forest(&shuffled, &cfg).unwrap(), &shuffled).unwrap();
    let (sum_sq, _) = prior_stats(&shuffled);
    check(
        (shuffled_acc - sum_sq).abs() <= 0.1,
        format!("shuffled OOB {shuffled_acc:.3} vs prior {sum_sq:.3}"),
    )?;
    within(t.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "identical models; clean {clean_acc:.3}; noisy {noisy_acc:.3} (majority {majority:.3}); shuffled {shuffled_acc:.3} (prior {sum_sq:.3}); {:.2?}",
        t.elapsed()
    ))
}

fn family_model() -> (CovarianceModel, Vec<u8>) {
    let aln = parse_stockholm(&std::fs::read_to_string(data("2j01_family.sto")).unwrap()).unwrap();
    let cm = build_cm(&aln, &BuildConfig::default()).unwrap();
    let row = aln.rows.iter().find(|r| r.id.starts_with("2J01")).unwrap().ungapped();
    let dna = row.iter().map(|&b| if b == b'U' { b'T' } else { b }).collect();
    (cm, dna)
}

fn background(seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..GENOME_LEN).map(|_| b"ACGT"[rng.gen_range(0..4)]).collect()
}

fn embedded(seed: u64, insert: &[u8]) -> NucleotideSequence {
    let mut g = background(seed);
    g.splice(EMBED_AT..EMBED_AT + insert.len(), insert.iter().copied());
    NucleotideSequence::new(format!("bg{seed}"), &g, Alphabet::Dna).unwrap()
}

/// Fraction of `[a, b]` covered by `[c, d]`, all 1-based inclusive.
fn coverage((a, b): (usize, usize), (c, d): (usize, usize)) -> f64 {
    let lo = a.max(c);
    let hi = b.min(d);
    if hi < lo {
        0.0
    } else {
        (hi - lo + 1) as f64 / (b - a + 1) as f64
    }
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let (cm, insert) = family_model();
    let span = (EMBED_AT + 1, EMBED_AT + insert.len());
    let cfg = ScanConfig::default();

    let plus = embedded(1, &insert);
    let hits = scan_genome(&cm, &plus, &cfg).map_err(|e| e.to_string())?;
    check(hits.len() == 1, format!("plus embedding gave {} hits", hits.len()))?;
    let h = &hits[0];
    let cov = coverage(span, h.target.bounds());
    check(
        h.target.strand == Strand::Plus && cov >= 0.9,
        format!(
            "plus hit {}-{} {} covers {cov:.2}",
            h.target.start, h.target.end, h.target.strand
        ),
    )?;
    let plus_desc = format!("plus {}-{} {:.2} bits", h.target.start, h.target.end, h.score);

    let minus = reverse_complement(&embedded(2, &insert));
    let rc_span = (GENOME_LEN + 1 - span.1, GENOME_LEN + 1 - span.0);
    let hits = scan_genome(&cm, &minus, &cfg).map_err(|e| e.to_string())?;
    check(hits.len() == 1, format!("reverse embedding gave {} hits", hits.len()))?;
    let h = &hits[0];
    let cov = coverage(rc_span, h.target.bounds());
    check(
        h.target.strand == Strand::Minus && h.target.start > h.target.end && cov >= 0.9,
        format!(
            "minus hit {}-{} {} covers {cov:.2}",
            h.target.start, h.target.end, h.target.strand
        ),
    )?;
    let minus_desc = format!("minus {}-{} {:.2} bits", h.target.start, h.target.end, h.score);

    let mut with_hits = 0;
    let mut best = f64::NEG_INFINITY;
    for seed in 100..120 {
        let g = NucleotideSequence::new(format!("null{seed}"), &background(seed), Alphabet::Dna).unwrap();
        let hits = scan_genome(&cm, &g, &cfg).map_err(|e| e.to_string())?;
        if !hits.is_empty() {
            with_hits += 1;
            best = hits.iter().map(|h| h.score).fold(best, f64::max);
        }
    }
    check(
        with_hits <= 1,
        format!("{with_hits}/20 null genomes had hits, best {best:.2}"),
    )?;
    within(t.elapsed(), Duration::from_secs(120))?;
    Ok(format!(
        "{plus_desc}; {minus_desc}; {with_hits}/20 null genomes with hits; {:.2?}",
        t.elapsed()
    ))
}

fn classify_cli(ct: &Path, forest: &Path) -> Result<(Vec<String>, String), String> {
    let out = Command::new(BIN)
        .args([
            "classify",
            "--ct",
            ct.to_str().unwrap(),
            "--forest",
            forest.to_str().unwrap(),
        ])
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), format!("classify exit {:?}", out.status.code()))?;
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let labels = text
        .lines()
        .filter(|l| l.starts_with("junction "))
        .filter_map(|l| l.split('\t').find_map(|f| f.strip_prefix("label=")))
        .map(str::to_string)
        .collect();
    let status = text
        .lines()
        .find_map(|l| l.strip_prefix("Coax status = "))
        .ok_or("no status line from classify")?
        .to_string();
    Ok((labels, status))
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let (cm, insert) = family_model();
    let params = ThermoParams::default();
    let rows =
        load_dataset(&std::fs::read_to_string(data("junctions.tsv")).unwrap(), &params).map_err(|e| e.to_string())?;
    let forest = train_forest(&rows, &ForestConfig::default()).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let forest_path = dir.path().join("forest.json");
    std::fs::write(&forest_path, forest.to_json().unwrap()).unwrap();

    let genomes = [embedded(1, &insert), reverse_complement(&embedded(2, &insert))];
    let mut reported = 0;
    for g in &genomes {
        let analyses = run_scan_pipeline(&cm, g, &forest, &PipelineConfig::default()).map_err(|e| e.to_string())?;
        check(!analyses.is_empty(), format!("{} reported nothing", g.id))?;
        let report = format_text_report(&analyses, &cm, &g.id);
        let status_lines = report.lines().filter(|l| l.starts_with("Coax status = ")).count();
        check(
            status_lines == analyses.len(),
            format!("{status_lines} status lines for {} hits", analyses.len()),
        )?;
        let sub = dir.path().join(&g.id);
        let paths = write_ct_dir(&analyses, &sub).map_err(|e| e.to_string())?;
        for (a, path) in analyses.iter().zip(&paths) {
            check(
                !a.junctions.is_empty(),
                format!(
                    "hit {}-{} has no three-way junction",
                    a.hit.target.start, a.hit.target.end
                ),
            )?;
            let (labels, status) = classify_cli(path, &forest_path)?;
            let want: Vec<String> = a.junctions.iter().map(|j| j.label.as_str().to_string()).collect();
            check(labels == want, format!("labels {labels:?} vs report {want:?}"))?;
            check(
                status == a.status_text(),
                format!("status {status:?} vs report {:?}", a.status_text()),
            )?;
            reported += 1;
        }
    }
    within(t.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "{reported} hits, labels and status reproduced; {:.2?}",
        t.elapsed()
    ))
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let loose = AlignConfig {
        min_window_fraction: 0.0,
        max_window_factor: 100.0,
    };
    let mut worst = 0.0f64;
    for k in 0..50 {
        let cm = random_model(&mut rng);
        let n = rng.gen_range(1..=12);
        let w: Vec<u8> = (0..n).map(|_| b"ACGU"[rng.gen_range(0..4)]).collect();
        let got = cyk_align(&cm, &w, &loose).map_err(|e| e.to_string())?.score;
        let want = brute_force_cyk(&cm, &w);
        let diff = (got - want).abs();
        worst = worst.max(diff);
        check(diff < 1e-9, format!("model {k}: cyk {got} brute {want}"))?;
    }
    within(t.elapsed(), Duration::from_secs(120))?;
    Ok(format!("50 models, max difference {worst:.1e}; {:.2?}", t.elapsed()))
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..100 {
        let first = parse_ct(&write_ct(&random_ct(&mut rng))).map_err(|e| format!("record {k}: {e}"))?;
        let text = write_ct(&first);
        let second = parse_ct(&text).map_err(|e| format!("record {k}: {e}"))?;
        check(
            second == first && write_ct(&second) == text,
            format!("record {k} changed"),
        )?;
    }
    let fa = parse_fasta(&std::fs::read_to_string(data("1e8o.fa")).unwrap()).map_err(|e| e.to_string())?;
    let sto = parse_stockholm(&std::fs::read_to_string(data("2j01_family.sto")).unwrap()).map_err(|e| e.to_string())?;
    check(
        !fa.is_empty() && sto.rows.len() == 3,
        "fixtures parsed to nothing".into(),
    )?;
    within(t.elapsed(), Duration::from_secs(5))?;
    Ok(format!(
        "100 CT records fixed; FASTA and Stockholm fixtures parse; {:.2?}",
        t.elapsed()
    ))
}

#[test]
fn acceptance() {
    let criteria: [(u32, fn() -> Outcome); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let mut failed = Vec::new();
    for (n, f) in criteria {
        // ACCEPTANCE_ONLY=5 runs a single criterion
        if std::env::var("ACCEPTANCE_ONLY").is_ok_and(|o| o != n.to_string()) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let line = match &outcome {
            Ok(msg) => format!("criterion {n}: PASS {msg}\n"),
            Err(msg) => {
                failed.push(n);
                format!("criterion {n}: FAIL {msg}\n")
            }
        };
        // straight to the stream so the lines show without --nocapture
        let _ = std::io::stdout().write_all(line.as_bytes());
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
