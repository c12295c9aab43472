//! Command-line driver: parsing, checking and replaying CCX documents,
//! running the named constructions, and seeded property campaigns.

use crate::campaigns::{run_campaign, CampaignConfig, ALL_PROPS};
use crate::ccx::{emit_ccx, parse_ccx, CcxDocument};
use crate::rat::rat;
use crate::ring::Ring;
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub struct CliOutcome {
    pub exit_code: i32,
    pub report: String,
}

fn fail(msg: impl Into<String>) -> CliOutcome {
    CliOutcome { exit_code: 2, report: format!("error: {}\n", msg.into()) }
}

struct Args {
    positional: Vec<String>,
    flags: BTreeMap<String, String>,
}

fn parse_args(argv: &[String]) -> Args {
    let mut positional = Vec::new();
    let mut flags = BTreeMap::new();
    let mut i = 0;
    while i < argv.len() {
        let a = &argv[i];
        if let Some(name) = a.strip_prefix("--") {
            let value = argv.get(i + 1).cloned().unwrap_or_default();
            flags.insert(name.to_string(), value);
            i += 2;
        } else {
            positional.push(a.clone());
            i += 1;
        }
    }
    Args { positional, flags }
}

fn load(args: &Args) -> Result<(CcxDocument, String), CliOutcome> {
    let path = args
        .flags
        .get("in")
        .cloned()
        .or_else(|| args.positional.get(1).cloned())
        .ok_or_else(|| fail("no input file; pass --in <file>"))?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| fail(format!("cannot read {path}: {e}")))?;
    let doc = parse_ccx(&text).map_err(|e| fail(format!("{path}: {e}")))?;
    Ok((doc, path))
}

fn write_out(args: &Args, doc: &CcxDocument, report: &mut String) -> i32 {
    if let Some(path) = args.flags.get("out") {
        let text = emit_ccx(doc);
        if let Err(e) = std::fs::write(path, text) {
            let _ = writeln!(report, "error: cannot write {path}: {e}");
            return 2;
        }
        let _ = writeln!(report, "WROTE {path}");
    } else {
        report.push_str(&emit_ccx(doc));
    }
    0
}

pub const USAGE: &str = "\
usage: ccx <command> [flags]
commands:
  check     --in <file>                     verify every block; exit 0 iff all pass
  replay    --in <file>                     re-check every certificate with matrix arithmetic only
  boundary  --in <file> --structure <name> [--out <file>]
  thicken   --in <file> --structure <name> [--out <file>]
  thom      --in <file> --pair <name> [--out <file>]
  fold      --in <file> --structure <name> [--out <file>]
  connect   --in <file> --rep <name> [--out <file>]
  exc       --in <file> --rep <name> --a <subset> --b <subset> [--out <file>]
  mv        --in <file> --rep <name> --piece <structure> [--out <file>]
  signature --in <file> --structure <name>
  certify   --prop <id>|all --seed <n> [--instances <n>] [--max-rank <n>]
            [--max-degree <n>] [--space-size <n>] [--space <file>]
            [--ring z|zmod:<m>] [--out <file>]
";

/// Runs one invocation; returns the exit code and the full report text.
pub fn run_command(argv: &[String]) -> CliOutcome {
    let Some(cmd) = argv.first().map(|s| s.as_str()) else {
        return CliOutcome { exit_code: 2, report: USAGE.to_string() };
    };
    let args = parse_args(argv);
    match cmd {
        "check" => {
            let (doc, path) = match load(&args) {
                Ok(v) => v,
                Err(o) => return o,
            };
            let mut report = String::new();
            let mut ok = true;
            for (name, res) in doc.check_all() {
                match res {
                    Ok(()) => {
                        let _ = writeln!(report, "CHECK {name} PASS");
                    }
                    Err(e) => {
                        ok = false;
                        let _ = writeln!(report, "CHECK {name} FAIL # {e}");
                    }
                }
            }
            let _ = writeln!(report, "CHECK {path} {}", if ok { "PASS" } else { "FAIL" });
            CliOutcome { exit_code: if ok { 0 } else { 1 }, report }
        }
        "replay" => {
            let (doc, path) = match load(&args) {
                Ok(v) => v,
                Err(o) => return o,
            };
            let mut report = String::new();
            let mut ok = true;
            for (name, res) in doc.replay_all() {
                match res {
                    Ok(()) => {
                        let _ = writeln!(report, "REPLAY certificate {name} PASS");
                    }
                    Err(e) => {
                        ok = false;
                        let _ = writeln!(report, "REPLAY certificate {name} FAIL # {e}");
                    }
                }
            }
            let _ = writeln!(report, "REPLAY {path} {}", if ok { "PASS" } else { "FAIL" });
            CliOutcome { exit_code: if ok { 0 } else { 1 }, report }
        }
        "boundary" | "thicken" => {
            let (doc, _) = match load(&args) {
                Ok(v) => v,
                Err(o) => return o,
            };
            let Some(name) = args.flags.get("structure") else {
                return fail("pass --structure <name>");
            };
            let Some(q) = doc.structure(name) else {
                return fail(format!("no structure `{name}` in the document"));
            };
            let data = crate::boundary::boundary_complex(q);
            let mut out_doc = doc.clone();
            let carrier_name = format!("{name}_bd_carrier");
            out_doc
                .complexes
                .insert(carrier_name.clone(), data.structure.carrier.clone());
            out_doc.structures.insert(
                format!("{name}_bd"),
                (carrier_name.clone(), data.structure.clone()),
            );
            let mut report = String::new();
            let _ = writeln!(
                report,
                "BOUNDARY {name} dim {} radius {}",
                data.structure.n,
                crate::rat::format_rat(&data.structure.radius)
            );
            if cmd == "thicken" {
                let dual_name = format!("{name}_dual");
                out_doc
                    .complexes
                    .insert(dual_name.clone(), data.thickening.f.target.clone());
                let map_name = format!("{name}_thickening_map");
                out_doc.chainmaps.insert(
                    map_name.clone(),
                    (carrier_name.clone(), dual_name, data.thickening.f.clone()),
                );
                out_doc.pairs.insert(
                    format!("{name}_thickening"),
                    (map_name, format!("{name}_bd"), data.thickening.clone()),
                );
                let _ = writeln!(report, "THICKENING {name} PASS");
            }
            let code = write_out(&args, &out_doc, &mut report);
            CliOutcome { exit_code: code, report }
        }
        "thom" => {
            let (doc, _) = match load(&args) {
                Ok(v) => v,
                Err(o) => return o,
            };
            let Some(name) = args.flags.get("pair") else {
                return fail("pass --pair <name>");
            };
            let Some((_, _, p)) = doc.pairs.get(name) else {
                return fail(format!("no pair `{name}` in the document"));
            };
            match crate::boundary::thom_complex(p) {
                Ok(t) => {
                    let mut out_doc = doc.clone();
                    let cx = format!("{name}_thom_carrier");
                    out_doc.complexes.insert(cx.clone(), t.carrier.clone());
                    out_doc.structures.insert(format!("{name}_thom"), (cx, t.clone()));
                    let mut report = format!(
                        "THOM {name} dim {} radius {}\n",
                        t.n,
                        crate::rat::format_rat(&t.radius)
                    );
                    let code = write_out(&args, &out_doc, &mut report);
                    CliOutcome { exit_code: code, report }
                }
                Err(e) => fail(format!("{e}")),
            }
        }
        "fold" => {
            let (doc, _) = match load(&args) {
                Ok(v) => v,
                Err(o) => return o,
            };
            let Some(name) = args.flags.get("structure") else {
                return fail("pass --structure <name>");
            };
            let Some(q) = doc.structure(name) else {
                return fail(format!("no structure `{name}`"));
            };
            let eps = crate::rat::rat_max(q.radius.clone(), rat(1));
            let data = crate::boundary::boundary_complex(q);
            let Some(conn) = crate::quad::connected_certify_structure(q, &eps) else {
                return fail("input structure is not connected at its radius");
            };
            let mode = if q.n > 1 {
                crate::boundary::FoldMode::BottomAndTop
            } else {
                crate::boundary::FoldMode::BottomOnly
            };
            match crate::boundary::fold_complex(
                &data.complex,
                Some(&conn),
                mode,
                &(rat(4) * eps.clone()),
                &(rat(12) * eps.clone()),
            ) {
                Ok(out) => {
                    let mut out_doc = doc.clone();
                    out_doc
                        .complexes
                        .insert(format!("{name}_bd_folded"), out.folded.clone());
                    let mut report = format!(
                        "FOLD {name} degrees {}..{} radius {}\n",
                        out.folded.lo(),
                        out.folded.hi(),
                        crate::rat::format_rat(&out.cert.radius)
                    );
                    let code = write_out(&args, &out_doc, &mut report);
                    CliOutcome { exit_code: code, report }
                }
                Err(e) => fail(format!("{e}")),
            }
        }
        "connect" => {
            let (doc, _) = match load(&args) {
                Ok(v) => v,
                Err(o) => return o,
            };
            let Some(name) = args.flags.get("rep") else {
                return fail("pass --rep <name>");
            };
            let rep = match doc.rep(name) {
                Ok(mut r) => {
                    if r.poincare.is_none() || r.connectivity.is_none() {
                        if let Err(e) = r.certify() {
                            return fail(format!("cannot certify rep `{name}`: {e}"));
                        }
                    }
                    r
                }
                Err(e) => return fail(format!("{e}")),
            };
            let mut ledger = crate::ltheory::DecorationLedger::default();
            match crate::ltheory::connecting_boundary(&rep, &mut ledger) {
                Ok(out) => {
                    let mut out_doc = doc.clone();
                    out_doc.complexes.insert(
                        format!("{name}_connect_carrier"),
                        out.rep.structure.carrier.clone(),
                    );
                    out_doc.structures.insert(
                        format!("{name}_connect"),
                        (format!("{name}_connect_carrier"), out.rep.structure.clone()),
                    );
                    let mut report = ledger.report();
                    let _ = writeln!(
                        report,
                        "CONNECT {name} n {} rank {}",
                        out.rep.dec.n,
                        out.rep.structure.carrier.total_rank()
                    );
                    let code = write_out(&args, &out_doc, &mut report);
                    CliOutcome { exit_code: code, report }
                }
                Err(e) => fail(format!("{e}")),
            }
        }
        "exc" => {
            let (doc, _) = match load(&args) {
                Ok(v) => v,
                Err(o) => return o,
            };
            let Some(name) = args.flags.get("rep") else {
                return fail("pass --rep <name>");
            };
            let (Some(a_name), Some(b_name)) = (args.flags.get("a"), args.flags.get("b")) else {
                return fail("pass --a <subset> --b <subset>");
            };
            let rep = match doc.rep(name) {
                Ok(mut r) => {
                    let _ = r.certify();
                    r
                }
                Err(e) => return fail(format!("{e}")),
            };
            let (Some(a_set), Some(b_set)) =
                (doc.subsets.get(a_name), doc.subsets.get(b_name))
            else {
                return fail("unknown subset name");
            };
            let mut ledger = crate::ltheory::DecorationLedger::default();
            match crate::sections::excision(&rep, a_set, b_set, &mut ledger) {
                Ok(out) => {
                    let mut out_doc = doc.clone();
                    out_doc.complexes.insert(
                        format!("{name}_exc_carrier"),
                        out.rep.structure.carrier.clone(),
                    );
                    out_doc.structures.insert(
                        format!("{name}_exc"),
                        (format!("{name}_exc_carrier"), out.rep.structure.clone()),
                    );
                    let mut report = ledger.report();
                    let _ = writeln!(
                        report,
                        "EXC {name} rank {}",
                        out.rep.structure.carrier.total_rank()
                    );
                    let code = write_out(&args, &out_doc, &mut report);
                    CliOutcome { exit_code: code, report }
                }
                Err(e) => fail(format!("{e}")),
            }
        }
        "mv" => {
            // The splitting witness is assembled from named blocks and
            // fully verified before the boundary class is emitted.
            let (doc, _) = match load(&args) {
                Ok(v) => v,
                Err(o) => return o,
            };
            let need = |key: &str| -> Result<String, CliOutcome> {
                args.flags
                    .get(key)
                    .cloned()
                    .ok_or_else(|| fail(format!("pass --{key} <name>")))
            };
            let (name, piece_name, lp, rp, glue_name) = match (
                need("rep"),
                need("piece"),
                need("left-pair"),
                need("right-pair"),
                need("glue"),
            ) {
                (Ok(a), Ok(b), Ok(c), Ok(d), Ok(e)) => (a, b, c, d, e),
                (Err(o), ..) | (_, Err(o), ..) | (_, _, Err(o), ..)
                | (_, _, _, Err(o), _) | (_, _, _, _, Err(o)) => return o,
            };
            let rep = match doc.rep(&name) {
                Ok(r) => r,
                Err(e) => return fail(format!("{e}")),
            };
            let Some(piece) = doc.structure(&piece_name) else {
                return fail(format!("no structure `{piece_name}`"));
            };
            let Some((_, _, left_pair)) = doc.pairs.get(&lp) else {
                return fail(format!("no pair `{lp}`"));
            };
            let Some((_, _, right_pair)) = doc.pairs.get(&rp) else {
                return fail(format!("no pair `{rp}`"));
            };
            let Some((_, _, _, glue)) = doc.cobordisms.get(&glue_name) else {
                return fail(format!("no cobordism `{glue_name}`"));
            };
            let subsets = |key: &str| -> Result<crate::space::Subset, CliOutcome> {
                let n = args
                    .flags
                    .get(key)
                    .ok_or_else(|| fail(format!("pass --{key} <subset>")))?;
                doc.subsets
                    .get(n)
                    .cloned()
                    .ok_or_else(|| fail(format!("unknown subset `{n}`")))
            };
            let (a_set, b_set, w_set) = match (subsets("a"), subsets("b"), subsets("w")) {
                (Ok(a), Ok(b), Ok(w)) => (a, b, w),
                (Err(o), ..) | (_, Err(o), _) | (_, _, Err(o)) => return o,
            };
            let witness = crate::sections::SplittingWitness {
                piece: piece.clone(),
                left_pair: left_pair.clone(),
                right_pair: right_pair.clone(),
                left_free: crate::k0::identity_witness(&piece.carrier),
                right_free: crate::k0::identity_witness(&piece.carrier),
                glue: glue.clone(),
                glue_poincare: None,
                radius: piece.radius.clone(),
            };
            let mut ledger = crate::ltheory::DecorationLedger::default();
            match crate::sections::mv_boundary(&rep, &witness, &a_set, &b_set, &w_set, &mut ledger)
            {
                Ok(out) => {
                    let mut out_doc = doc.clone();
                    out_doc.complexes.insert(
                        format!("{name}_mv_carrier"),
                        out.structure.carrier.clone(),
                    );
                    out_doc.structures.insert(
                        format!("{name}_mv"),
                        (format!("{name}_mv_carrier"), out.structure.clone()),
                    );
                    let mut report = ledger.report();
                    let _ = writeln!(
                        report,
                        "MV {name} piece {piece_name} rank {}",
                        out.structure.carrier.total_rank()
                    );
                    let code = write_out(&args, &out_doc, &mut report);
                    CliOutcome { exit_code: code, report }
                }
                Err(e) => fail(format!("{e}")),
            }
        }
        "signature" => {
            let (doc, _) = match load(&args) {
                Ok(v) => v,
                Err(o) => return o,
            };
            let Some(name) = args.flags.get("structure") else {
                return fail("pass --structure <name>");
            };
            let Some(q) = doc.structure(name) else {
                return fail(format!("no structure `{name}`"));
            };
            match crate::signature::signature(q) {
                Ok(s) => CliOutcome { exit_code: 0, report: format!("{s}\n") },
                Err(e) => fail(format!("{e}")),
            }
        }
        "certify" => {
            let prop = args.flags.get("prop").cloned().unwrap_or_else(|| "all".into());
            let seed: u64 = args
                .flags
                .get("seed")
                .and_then(|s| s.parse().ok())
                .unwrap_or(1);
            let instances: usize = args
                .flags
                .get("instances")
                .and_then(|s| s.parse().ok())
                .unwrap_or(20);
            let max_rank: usize = args
                .flags
                .get("max-rank")
                .and_then(|s| s.parse().ok())
                .unwrap_or(2);
            let max_degree: i64 = args
                .flags
                .get("max-degree")
                .and_then(|s| s.parse().ok())
                .unwrap_or(2);
            let space_points: usize = args
                .flags
                .get("space-size")
                .and_then(|s| s.parse().ok())
                .unwrap_or(4);
            let ring = match args.flags.get("ring").map(|s| s.as_str()) {
                None | Some("z") => Ring::Int,
                Some(spec) => match spec.strip_prefix("zmod:") {
                    Some(m) => match m.parse() {
                        Ok(m) => Ring::Mod(m),
                        Err(_) => return fail("bad modulus in --ring"),
                    },
                    None => return fail("--ring must be z or zmod:<m>"),
                },
            };
            let space = match args.flags.get("space") {
                None => None,
                Some(path) => {
                    let Ok(text) = std::fs::read_to_string(path) else {
                        return fail(format!("cannot read space file {path}"));
                    };
                    let doc = match parse_ccx(&text) {
                        Ok(d) => d,
                        Err(e) => return fail(format!("{path}: {e}")),
                    };
                    match doc.spaces.values().next() {
                        Some(sp) => Some(std::sync::Arc::clone(sp)),
                        None => return fail(format!("{path} declares no space")),
                    }
                }
            };
            let cfg = CampaignConfig {
                seed,
                instances,
                max_rank,
                max_degree,
                space_points,
                ring,
                space,
            };
            let props: Vec<String> = if prop == "all" {
                ALL_PROPS.iter().map(|s| s.to_string()).collect()
            } else {
                vec![prop]
            };
            let threads: usize = std::env::var("CCX_THREADS")
                .ok()
                .and_then(|s| s.parse().ok())
                .filter(|&t| t >= 1)
                .unwrap_or(1);
            let mut results: Vec<(String, Option<crate::campaigns::CampaignReport>)> =
                Vec::new();
            if threads <= 1 || props.len() <= 1 {
                for p in &props {
                    results.push((p.clone(), run_campaign(p, &cfg)));
                }
            } else {
                std::thread::scope(|scope| {
                    let mut handles = Vec::new();
                    for p in &props {
                        let cfg = cfg.clone();
                        handles.push((p.clone(), scope.spawn(move || run_campaign(&p.clone(), &cfg))));
                    }
                    for (p, h) in handles {
                        results.push((p, h.join().expect("campaign thread")));
                    }
                });
                // Deterministic assembly regardless of completion order.
                results.sort_by(|a, b| a.0.cmp(&b.0));
            }
            let mut report = String::new();
            let mut ok = true;
            for (p, res) in results {
                match res {
                    Some(r) => {
                        report.push_str(&r.render());
                        ok &= r.all_pass();
                    }
                    None => {
                        ok = false;
                        let _ = writeln!(report, "PROP {p} UNKNOWN");
                    }
                }
            }
            if let Some(path) = args.flags.get("out") {
                if let Err(e) = std::fs::write(path, &report) {
                    return fail(format!("cannot write {path}: {e}"));
                }
            }
            CliOutcome { exit_code: if ok { 0 } else { 1 }, report }
        }
        "help" | "--help" | "-h" => CliOutcome { exit_code: 0, report: USAGE.into() },
        other => fail(format!("unknown command `{other}`\n{USAGE}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(parts: &[&str]) -> Vec<String> {
        parts.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn check_and_replay_a_sample_file() {
        let dir = std::env::temp_dir().join("ccx_cli_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sample.ccx");
        std::fs::write(
            &path,
            "ccx 1\nring z\nspace X {\n  points a\n  row a 0\n  subset Y a\n}\ncomplex C over X {\n  radius 0\n  degree 0 basis a\n  degree 1 basis a\n  d 1 radius 0 {\n    entry 0 0 1\n  }\n}\ncertificate g contraction for complex C radius 0 over Y {\n  degree 0 radius 0 {\n    entry 0 0 1\n  }\n}\n",
        )
        .unwrap();
        let out = run_command(&argv(&["check", "--in", path.to_str().unwrap()]));
        assert_eq!(out.exit_code, 0, "{}", out.report);
        assert!(out.report.contains("CHECK complex C PASS"));
        let out = run_command(&argv(&["replay", "--in", path.to_str().unwrap()]));
        assert_eq!(out.exit_code, 0, "{}", out.report);
    }

    #[test]
    fn certify_campaign_exit_codes_and_determinism() {
        let out1 = run_command(&argv(&[
            "certify", "--prop", "2.8", "--seed", "7", "--instances", "3",
        ]));
        let out2 = run_command(&argv(&[
            "certify", "--prop", "2.8", "--seed", "7", "--instances", "3",
        ]));
        assert_eq!(out1.exit_code, 0, "{}", out1.report);
        assert_eq!(out1.report, out2.report, "identical seeds give identical reports");
    }

    #[test]
    fn signature_subcommand_prints_the_value() {
        let dir = std::env::temp_dir().join("ccx_cli_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sig.ccx");
        // Rank-one positive form at a point.
        std::fs::write(
            &path,
            "ccx 1\nring z\nspace X {\n  points a\n  row a 0\n}\ncomplex C over X {\n  radius 0\n  degree 0 basis a\n}\nstructure psi on C dim 0 radius 0 {\n  level 0 degree 0 radius 0 {\n    entry 0 0 1\n  }\n}\n",
        )
        .unwrap();
        let out = run_command(&argv(&[
            "signature",
            "--in",
            path.to_str().unwrap(),
            "--structure",
            "psi",
        ]));
        assert_eq!(out.exit_code, 0, "{}", out.report);
        assert_eq!(out.report.trim(), "1");
    }

    #[test]
    fn unknown_command_fails() {
        assert_ne!(run_command(&argv(&["frobnicate"])).exit_code, 0);
    }

    #[test]
    fn threaded_campaigns_assemble_deterministically() {
        // CCX_THREADS caps parallelism; the assembled report is sorted by
        // property id and independent of the scheduling.
        let args = argv(&["certify", "--prop", "all", "--seed", "11", "--instances", "2"]);
        std::env::set_var("CCX_THREADS", "4");
        let threaded = run_command(&args);
        std::env::set_var("CCX_THREADS", "1");
        let sequential_ids: Vec<String> = run_command(&args)
            .report
            .lines()
            .filter(|l| l.contains("SUMMARY"))
            .map(|l| l.to_string())
            .collect();
        std::env::remove_var("CCX_THREADS");
        let threaded_ids: Vec<String> = threaded
            .report
            .lines()
            .filter(|l| l.contains("SUMMARY"))
            .map(|l| l.to_string())
            .collect();
        let mut sorted = sequential_ids.clone();
        sorted.sort();
        assert_eq!(threaded_ids, sorted, "threaded assembly is sorted by id");
        assert_eq!(
            sequential_ids.len(),
            threaded_ids.len(),
            "both runs cover every property"
        );
    }
}
