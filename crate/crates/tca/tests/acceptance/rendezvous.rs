//! Randomized rendezvous schedules.
//!
//! Two kinds of schedule alternate. In a *direct* schedule each of the
//! eight channels has one sending and one receiving process, and every
//! process performs its sends and plain receives in one global random
//! order, which keeps the schedule deadlock-free and lets the receiver
//! stamp the exact moment each receive begins. In a *contended* schedule
//! one to three senders scatter messages over all channels while the
//! remaining processes take them through muxes registered on every
//! channel; there the receive start is the moment the mux became ready
//! again, which can only be earlier than the true start.
//!
//! Times are ticks of a shared atomic counter, so "before" means before in
//! a single linear order of events.

use std::collections::BTreeMap;
use std::io;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tca::{Channel, Mux, MuxStopper, Runtime};

const PROCESSES: usize = 4;
const CHANNELS: usize = 8;

#[derive(Debug, Clone)]
struct Sent {
    msg: String,
    sender: usize,
    chan: usize,
    seq: usize,
    start: u64,
    done: u64,
}

#[derive(Debug, Clone)]
struct Got {
    msg: String,
    receiver: usize,
    start: u64,
}

#[derive(Clone, Default)]
struct Clock(Arc<AtomicU64>);

impl Clock {
    fn tick(&self) -> u64 {
        self.0.fetch_add(1, Ordering::SeqCst)
    }
}

fn jitter(rng: &mut StdRng) {
    match rng.gen_range(0..8) {
        0 => thread::sleep(Duration::from_micros(rng.gen_range(1..40))),
        1 | 2 => thread::yield_now(),
        _ => {}
    }
}

struct Schedule {
    sent: Vec<Sent>,
    got: Vec<Got>,
    /// Per receiver, the messages it took in order.
    taken: BTreeMap<usize, Vec<String>>,
}

fn direct(seed: u64) -> Schedule {
    let mut rng = StdRng::seed_from_u64(seed);
    let rt = Runtime::with_trace(io::sink());
    let chans: Vec<Channel> = (0..CHANNELS).map(|i| Channel::new(&rt, format!("c{i}"))).collect();
    let owners: Vec<(usize, usize)> = (0..CHANNELS)
        .map(|_| {
            let s = rng.gen_range(0..PROCESSES);
            let mut r = rng.gen_range(0..PROCESSES - 1);
            if r >= s {
                r += 1;
            }
            (s, r)
        })
        .collect();
    let n = rng.gen_range(8..=40);
    let plan: Vec<usize> = (0..n).map(|_| rng.gen_range(0..CHANNELS)).collect();
    let clock = Clock::default();

    let mut handles = Vec::new();
    for p in 0..PROCESSES {
        let ops: Vec<(bool, usize, usize)> = plan
            .iter()
            .enumerate()
            .filter_map(|(k, &c)| {
                if owners[c].0 == p {
                    Some((true, c, k))
                } else if owners[c].1 == p {
                    Some((false, c, k))
                } else {
                    None
                }
            })
            .collect();
        let chans = chans.clone();
        let clock = clock.clone();
        let mut prng = StdRng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(p as u64));
        handles.push(thread::spawn(move || {
            let mut sent = Vec::new();
            let mut got = Vec::new();
            for (is_send, c, k) in ops {
                jitter(&mut prng);
                if is_send {
                    let msg = format!("m{k}");
                    let start = clock.tick();
                    chans[c].send(&msg).unwrap();
                    let done = clock.tick();
                    sent.push(Sent { msg, sender: p, chan: c, seq: k, start, done });
                } else {
                    let start = clock.tick();
                    let m = chans[c].receive().unwrap();
                    got.push(Got { msg: m.into_string(), receiver: p, start });
                }
            }
            (sent, got)
        }));
    }
    collect(handles)
}

fn contended(seed: u64) -> Schedule {
    let mut rng = StdRng::seed_from_u64(seed);
    let rt = Runtime::with_trace(io::sink());
    let chans: Vec<Channel> = (0..CHANNELS).map(|i| Channel::new(&rt, format!("c{i}"))).collect();
    let senders = rng.gen_range(1..PROCESSES);
    let plans: Vec<Vec<usize>> = (0..senders)
        .map(|_| (0..rng.gen_range(4..=20)).map(|_| rng.gen_range(0..CHANNELS)).collect())
        .collect();
    let total: usize = plans.iter().map(Vec::len).sum();
    let clock = Clock::default();
    let received = Arc::new(AtomicUsize::new(0));
    let stoppers: Arc<Vec<MuxStopper>> = Arc::new((senders..PROCESSES).map(|_| MuxStopper::new()).collect());

    let mut handles = Vec::new();
    for (p, plan) in plans.into_iter().enumerate() {
        let chans = chans.clone();
        let clock = clock.clone();
        let mut prng = StdRng::seed_from_u64(seed ^ (0x9e37 + p as u64));
        handles.push(thread::spawn(move || {
            let mut sent = Vec::new();
            for (seq, c) in plan.into_iter().enumerate() {
                jitter(&mut prng);
                let msg = format!("s{p}c{c}n{seq}");
                let start = clock.tick();
                chans[c].send(&msg).unwrap();
                let done = clock.tick();
                sent.push(Sent { msg, sender: p, chan: c, seq, start, done });
            }
            (sent, Vec::new())
        }));
    }
    for (slot, p) in (senders..PROCESSES).enumerate() {
        let (rt, chans, clock) = (rt.clone(), chans.clone(), clock.clone());
        let (received, stoppers) = (Arc::clone(&received), Arc::clone(&stoppers));
        let mut prng = StdRng::seed_from_u64(seed ^ (0x7f4a + p as u64));
        handles.push(thread::spawn(move || {
            let got = Mutex::new(Vec::new());
            let ready = AtomicU64::new(clock.tick());
            let prng = Mutex::new(&mut prng);
            {
                let mut mux = Mux::with_stopper(&rt, stoppers[slot].clone());
                for ch in &chans {
                    let (got, ready, clock, received, stoppers, prng) =
                        (&got, &ready, &clock, &received, &stoppers, &prng);
                    mux.add(ch.receive_source(), move |m| {
                        let start = ready.load(Ordering::SeqCst);
                        got.lock().unwrap().push(Got { msg: m.into_string(), receiver: p, start });
                        jitter(&mut prng.lock().unwrap());
                        if received.fetch_add(1, Ordering::SeqCst) + 1 == total {
                            stoppers.iter().for_each(MuxStopper::stop);
                        }
                        ready.store(clock.tick(), Ordering::SeqCst);
                        Ok(())
                    })
                    .unwrap();
                }
                mux.run().unwrap();
            }
            (Vec::new(), got.into_inner().unwrap())
        }));
    }
    collect(handles)
}

type Outcome = (Vec<Sent>, Vec<Got>);

fn collect(handles: Vec<thread::JoinHandle<Outcome>>) -> Schedule {
    let mut sent = Vec::new();
    let mut got = Vec::new();
    for h in handles {
        let (s, g) = h.join().expect("schedule thread panicked");
        sent.extend(s);
        got.extend(g);
    }
    let mut taken: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for g in &got {
        taken.entry(g.receiver).or_default().push(g.msg.clone());
    }
    Schedule { sent, got, taken }
}

fn verify(s: &Schedule) -> Result<(), String> {
    // exactly once
    let mut sent: Vec<&str> = s.sent.iter().map(|m| m.msg.as_str()).collect();
    let mut got: Vec<&str> = s.got.iter().map(|m| m.msg.as_str()).collect();
    sent.sort_unstable();
    got.sort_unstable();
    if sent != got {
        return Err(format!("sent {sent:?} but received {got:?}"));
    }
    // no buffering: a send completes only after its receive began
    let starts: BTreeMap<&str, u64> = s.got.iter().map(|g| (g.msg.as_str(), g.start)).collect();
    for m in &s.sent {
        let start = starts[m.msg.as_str()];
        if m.done <= start {
            return Err(format!("{} completed at {} before its receive began at {start}", m.msg, m.done));
        }
        if m.start >= m.done {
            return Err(format!("{} has an empty send interval", m.msg));
        }
    }
    // per-sender FIFO within each receiver
    let origin: BTreeMap<&str, &Sent> = s.sent.iter().map(|m| (m.msg.as_str(), m)).collect();
    for (receiver, msgs) in &s.taken {
        let mut last: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for msg in msgs {
            let m = origin[msg.as_str()];
            if let Some(prev) = last.insert((m.sender, m.chan), m.seq) {
                if prev > m.seq {
                    return Err(format!("receiver {receiver} took {msg} after a later message from the same sender"));
                }
            }
        }
    }
    Ok(())
}

/// Runs `schedules` schedules, alternating the two kinds.
pub fn run_suite(schedules: u64) -> Result<String, String> {
    let mut messages = 0;
    for seed in 0..schedules {
        let (kind, s) = if seed % 2 == 0 {
            ("direct", direct(seed))
        } else {
            ("contended", contended(seed))
        };
        verify(&s).map_err(|e| format!("{kind} schedule seed {seed}: {e}"))?;
        messages += s.sent.len();
    }
    Ok(format!(
        "{schedules} schedules on {CHANNELS} channels x {PROCESSES} processes, {messages} messages, exactly-once, no buffering, FIFO"
    ))
}
