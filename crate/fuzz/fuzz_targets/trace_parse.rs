#![no_main]

use libfuzzer_sys::fuzz_target;
use std::sync::OnceLock;

static FIXTURE: OnceLock<(bpcov::protocol::Protocol, bpcov::topology::Topology)> =
    OnceLock::new();

// Traces are parsed against a fixed protocol and topology; arbitrary text
// must either parse into a structurally valid execution or be rejected,
// and the replayer must never panic on what the parser accepts.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let (p, topo) = FIXTURE.get_or_init(|| {
        let p = bpcov::protocol::parse_protocol(
            "protocol f\nmessages a b c\nstates qin q1 q2 q3 q4 q5\ninit qin\n\
             trans qin !!a q4\ntrans qin !!b q4\ntrans q4 ?c q5\ntrans qin ?b q1\n\
             trans q1 !!a qin\ntrans q1 ?a q2\ntrans q2 !!c q3\ntrans q3 ?a q5\n",
        )
        .unwrap();
        let topo = bpcov::topology::parse_topology("clique:3").unwrap();
        (p, topo)
    });
    if let Ok(exec) = bpcov::semantics::trace::parse_execution(p, topo, text) {
        let _ = bpcov::semantics::replay(p, topo, &exec);
    }
});
