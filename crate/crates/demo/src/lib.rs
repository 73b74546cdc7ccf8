//! WebAssembly bindings for the browser demo.
//!
//! Every export returns a JSON string: either the result object or
//! `{"error": "..."}`. Nothing here touches JS values directly, so the same
//! functions run natively under `cargo test`.

use serde_json::{json, Value};
use spir_core::metrics::{capacity, secrecy_lower_bound, RateReport};
use spir_core::privacy::{
    entropy_symmetry_check, verify_database_privacy, verify_user_privacy, AuditConfig, AuditMode, Mutant,
};
use spir_core::scheme::{ParamsSpec, SelectionCase};
use spir_core::sim::{decode_message, run_seeded_session, seeded_database, Endpoint, Kind, Loopback};
use spir_core::{Fe, SchemeParams};
use wasm_bindgen::prelude::*;

/// Audits in the page stay well below the native ceiling to keep the tab responsive.
pub const DEMO_CEILING: u128 = 2_000_000;

fn respond(result: Result<Value, String>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn build(n: usize, m: usize, t: usize, k: usize, q: u32) -> Result<SchemeParams, String> {
    let mut spec = ParamsSpec::new(n, m, t, k, q);
    if q as usize == n {
        spec.points = Some((1..=n as u64).map(|v| v % q as u64).collect());
    }
    spec.build().map_err(|e| e.to_string())
}

fn symbols(v: &[Fe]) -> Vec<u32> {
    v.iter().map(|e| e.value()).collect()
}

/// Capacity and secrecy bound for every valid `(N, M, T)` with `N ≤ n_max`.
#[wasm_bindgen]
pub fn rate_table(n_max: usize) -> String {
    let rows: Vec<Value> = (2..=n_max.min(16))
        .flat_map(|n| (1..n).flat_map(move |m| (1..=n - m).map(move |t| (n, m, t))))
        .map(|(n, m, t)| {
            json!({
                "n": n, "m": m, "t": t,
                "capacity": capacity(n, m, t).to_string(),
                "secrecy_bound": secrecy_lower_bound(n, m, t).map(|r| r.to_string()).unwrap_or_default(),
                "file_len": m * (n - m - t + 1),
                "download": n * m,
            })
        })
        .collect();
    json!({ "rows": rows }).to_string()
}

/// Runs one seeded session; `want` is 1-based and `q = 0` picks the modulus.
#[wasm_bindgen]
pub fn run_retrieval(n: usize, m: usize, t: usize, k: usize, q: u32, want: usize, seed: u64) -> String {
    respond(retrieval(n, m, t, k, q, want, seed))
}

fn retrieval(n: usize, m: usize, t: usize, k: usize, q: u32, want: usize, seed: u64) -> Result<Value, String> {
    let p = build(n, m, t, k, q)?;
    if want == 0 || want > k {
        return Err(format!("file index must be in 1..={k}"));
    }
    let tr = run_seeded_session(&p, want - 1, seed, &mut Loopback::new()).map_err(|e| e.to_string())?;
    let mut queries = vec![vec![Vec::new(); p.servers()]; p.rounds()];
    let mut answers = vec![0u32; p.servers() * p.rounds()];
    for msg in tr.messages() {
        let w = decode_message(msg.frame()).map_err(|e| e.to_string())?;
        let r = w.round as usize;
        match (w.kind, msg.from(), msg.to()) {
            (Kind::Query, _, Endpoint::Server(node)) => queries[r - 1][node] = w.payload,
            (Kind::Answer, Endpoint::Server(node), _) => answers[(r - 1) * p.servers() + node] = w.payload[0],
            _ => {}
        }
    }
    let rounds: Vec<Value> = (0..p.rounds())
        .map(|r| json!({ "queries": queries[r], "answers": &answers[r * p.servers()..(r + 1) * p.servers()] }))
        .collect();
    let report = RateReport::from_transcript(&p, &tr).map_err(|e| e.to_string())?;
    let decoded = symbols(tr.decoded().unwrap_or_default());
    let stored = symbols(&seeded_database(&p, seed).file(&p, want - 1));
    let counters = tr.counters();
    Ok(json!({
        "params": p.to_string(),
        "case": match p.selection_case() { SelectionCase::Shifted => "shifted", SelectionCase::Blocked => "blocked" },
        "rounds": rounds,
        "decoded": decoded,
        "stored": stored,
        "correct": decoded == stored,
        "rate": report.achieved_rate.to_string(),
        "capacity": report.capacity.to_string(),
        "secrecy": report.achieved_secrecy.to_string(),
        "secrecy_bound": report.secrecy_bound.to_string(),
        "messages": counters.messages,
        "bytes_to_servers": counters.bytes_to_servers,
        "bytes_to_user": counters.bytes_to_user,
        "transcript": tr.to_text(),
    }))
}

/// `mode` is `user`, `user-structural`, `db` or `entropy`; `mutant` is
/// empty, `no-mask`, `no-randomization` or `short-mask`.
#[wasm_bindgen]
pub fn run_audit(mode: &str, n: usize, m: usize, t: usize, k: usize, q: u32, mutant: &str) -> String {
    respond(audit(mode, n, m, t, k, q, mutant))
}

fn audit(mode: &str, n: usize, m: usize, t: usize, k: usize, q: u32, mutant: &str) -> Result<Value, String> {
    let p = build(n, m, t, k, q)?;
    let mutant = match mutant {
        "" | "none" => Mutant::None,
        "no-mask" => Mutant::NoMask,
        "no-randomization" => Mutant::NoRandomization,
        "short-mask" => Mutant::ShortMask,
        other => return Err(format!("unknown mutant `{other}`")),
    };
    let config = AuditConfig { ceiling: DEMO_CEILING };
    let report = match mode {
        "user" => verify_user_privacy(&p, AuditMode::Exhaustive, mutant, &config),
        "user-structural" => verify_user_privacy(&p, AuditMode::Structural, mutant, &config),
        "db" => verify_database_privacy(&p, mutant, &config),
        "entropy" => entropy_symmetry_check(&p, p.mask_len().min(p.servers()), &config),
        other => return Err(format!("unknown mode `{other}`")),
    }
    .map_err(|e| e.to_string())?;
    Ok(json!({
        "params": p.to_string(),
        "passed": report.passed(),
        "view": format!("{:?}", report.view),
        "events": report.enumeration_size.to_string(),
        "mutual_information_bits": report.mutual_information_bits,
        "witness": report.witness,
        "notes": report.notes,
    }))
}
