//! Regenerates `fixtures/fw_trace.json` from the deterministic construction.

fn main() {
    let trace = xpulse_core::fixtures::fw_equivalence_trace().expect("trace construction");
    trace.check().expect("trace replays");
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/fw_trace.json");
    let text = xpulse::formats::TraceFile::from_trace(&trace).to_json();
    std::fs::write(path, format!("{text}\n")).expect("write fixture");
    println!("{} steps -> {path}", trace.steps.len());
}
