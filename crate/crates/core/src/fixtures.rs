//! Protocols used throughout the unit tests.

use crate::protocol::{Protocol, ProtocolBuilder};

/// The running example: six states, messages a/b/c, eight transitions.
/// Not phase-bounded because of the feedback broadcast (q1, !!a, qin).
pub fn fig1_protocol() -> Protocol {
    let mut b = ProtocolBuilder::new("P");
    for m in ["a", "b", "c"] {
        b.message(m).unwrap();
    }
    for s in ["qin", "q1", "q2", "q3", "q4", "q5"] {
        b.state(s).unwrap();
    }
    b.init("qin");
    b.broadcast("qin", "a", "q4");
    b.broadcast("qin", "b", "q4");
    b.receive("q4", "c", "q5");
    b.receive("qin", "b", "q1");
    b.broadcast("q1", "a", "qin");
    b.receive("q1", "a", "q2");
    b.broadcast("q2", "c", "q3");
    b.receive("q3", "a", "q5");
    b.build().unwrap()
}

/// The running example without (q1, !!a, qin); 2-phase-bounded.
pub fn p_prime_protocol() -> Protocol {
    let mut b = ProtocolBuilder::new("Pprime");
    for m in ["a", "b", "c"] {
        b.message(m).unwrap();
    }
    for s in ["qin", "q1", "q2", "q3", "q4", "q5"] {
        b.state(s).unwrap();
    }
    b.init("qin");
    b.broadcast("qin", "a", "q4");
    b.broadcast("qin", "b", "q4");
    b.receive("q4", "c", "q5");
    b.receive("qin", "b", "q1");
    b.receive("q1", "a", "q2");
    b.broadcast("q2", "c", "q3");
    b.receive("q3", "a", "q5");
    b.build().unwrap()
}

/// A 1-phase-bounded protocol exercising the broadcast-print machinery:
/// the root can walk qin → q1 → q2 by broadcasts, leaves climb the same
/// way, and receptions (?b/?c at q1, ?c at q2) move processes out of the
/// broadcast classes.
pub fn print_example_protocol() -> Protocol {
    let mut b = ProtocolBuilder::new("prints");
    for m in ["a", "b", "c"] {
        b.message(m).unwrap();
    }
    for s in ["qin", "q1", "q2", "q3", "q4", "q5"] {
        b.state(s).unwrap();
    }
    b.init("qin");
    b.broadcast("qin", "a", "q1");
    b.receive("q1", "c", "q5");
    b.receive("q1", "b", "q5");
    b.broadcast("q1", "b", "q1");
    b.broadcast("q1", "a", "q2");
    b.broadcast("q2", "c", "q3");
    b.receive("q2", "c", "q4");
    b.build().unwrap()
}

/// The guard-protocol example: q3 is not coverable because every path to an
/// `a`-broadcast passes through states that must receive `m` and die, yet a
/// naive phase-limited unfolding that drops late receptions covers it.
pub fn pbar_protocol() -> Protocol {
    let mut b = ProtocolBuilder::new("Pbar");
    for m in ["a", "b", "c", "m"] {
        b.message(m).unwrap();
    }
    for s in ["qin", "q1", "q2", "q3", "q4", "q5", "q6", "p"] {
        b.state(s).unwrap();
    }
    b.init("qin");
    b.broadcast("qin", "c", "q1");
    b.receive("qin", "c", "q4");
    b.receive("qin", "m", "p");
    b.broadcast("q1", "m", "q2");
    b.broadcast("q4", "b", "q5");
    b.receive("q4", "m", "p");
    b.receive("q2", "a", "q3");
    b.receive("q5", "m", "p");
    b.broadcast("q5", "a", "q6");
    b.build().unwrap()
}
