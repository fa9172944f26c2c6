//! Zero-capacity rendezvous with multi-way select.
//!
//! A channel holds no messages, only parties waiting for a partner: senders
//! parked with the value they offer, and receivers parked on a [`Waiter`].
//! A receiver waiting on several channels registers the same waiter with
//! each of them; whichever sender claims it first delivers, and the waiter's
//! state lock makes that claim exclusive. A value is therefore taken out of
//! a channel only at the moment it is handed to a receiver that will use it.
//!
//! Lock order is channel, then waiter, then send slot. Interrupting a
//! parked party takes only the party's own lock.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Condvar, Mutex, MutexGuard, Weak};

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

/// Something parked that can be woken without its message.
pub(crate) trait Interrupt: Send + Sync {
    fn interrupt(&self);
}

/// A one-way latch that wakes every party parked on it when raised.
#[derive(Default)]
pub(crate) struct Signal {
    raised: AtomicBool,
    parked: Mutex<Vec<Weak<dyn Interrupt>>>,
}

impl Signal {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn is_raised(&self) -> bool {
        self.raised.load(Ordering::SeqCst)
    }

    pub(crate) fn raise(&self) {
        self.raised.store(true, Ordering::SeqCst);
        let parked = std::mem::take(&mut *lock(&self.parked));
        for party in parked.iter().filter_map(Weak::upgrade) {
            party.interrupt();
        }
    }

    /// Registers `party` for a wake-up. Returns false when already raised.
    fn park(&self, party: &Arc<dyn Interrupt>) -> bool {
        let mut parked = lock(&self.parked);
        if self.is_raised() {
            return false;
        }
        parked.retain(|w| w.strong_count() > 0);
        parked.push(Arc::downgrade(party));
        true
    }

    fn unpark(&self, party: &Arc<dyn Interrupt>) {
        let target = Arc::downgrade(party);
        lock(&self.parked).retain(|w| !w.ptr_eq(&target) && w.strong_count() > 0);
    }
}

fn park_all(signals: &[&Signal], party: &Arc<dyn Interrupt>) {
    for signal in signals {
        if !signal.park(party) {
            party.interrupt();
        }
    }
}

fn unpark_all(signals: &[&Signal], party: &Arc<dyn Interrupt>) {
    for signal in signals {
        signal.unpark(party);
    }
}

enum WaitState<T> {
    Waiting,
    Fired(usize, T),
    Closed(usize),
    Interrupted,
}

struct Waiter<T> {
    state: Mutex<WaitState<T>>,
    ready: Condvar,
}

impl<T> Waiter<T> {
    fn new() -> Self {
        Waiter {
            state: Mutex::new(WaitState::Waiting),
            ready: Condvar::new(),
        }
    }

    /// Hands `value` over if the waiter is still free.
    fn try_fire(&self, index: usize, value: T) -> Result<(), T> {
        let mut state = lock(&self.state);
        if matches!(*state, WaitState::Waiting) {
            *state = WaitState::Fired(index, value);
            self.ready.notify_all();
            Ok(())
        } else {
            Err(value)
        }
    }

    fn close(&self, index: usize) {
        let mut state = lock(&self.state);
        if matches!(*state, WaitState::Waiting) {
            *state = WaitState::Closed(index);
            self.ready.notify_all();
        }
    }

    fn wait(&self) -> WaitState<T> {
        let mut state = lock(&self.state);
        while matches!(*state, WaitState::Waiting) {
            state = self.ready.wait(state).unwrap_or_else(|p| p.into_inner());
        }
        std::mem::replace(&mut *state, WaitState::Interrupted)
    }
}

impl<T: Send> Interrupt for Waiter<T> {
    fn interrupt(&self) {
        let mut state = lock(&self.state);
        if matches!(*state, WaitState::Waiting) {
            *state = WaitState::Interrupted;
            self.ready.notify_all();
        }
    }
}

enum SlotState<T> {
    Pending(T),
    Taken,
    Interrupted,
}

struct SendSlot<T> {
    state: Mutex<SlotState<T>>,
    done: Condvar,
}

impl<T> SendSlot<T> {
    /// Takes the offered value, completing the sender's rendezvous.
    fn take(&self) -> Option<T> {
        let mut state = lock(&self.state);
        match std::mem::replace(&mut *state, SlotState::Taken) {
            SlotState::Pending(value) => {
                self.done.notify_all();
                Some(value)
            }
            other => {
                *state = other;
                None
            }
        }
    }
}

impl<T: Send> Interrupt for SendSlot<T> {
    fn interrupt(&self) {
        let mut state = lock(&self.state);
        if matches!(*state, SlotState::Pending(_)) {
            *state = SlotState::Interrupted;
            self.done.notify_all();
        }
    }
}

struct Inner<T> {
    senders: VecDeque<Arc<SendSlot<T>>>,
    receivers: VecDeque<(Arc<Waiter<T>>, usize)>,
    closed: bool,
}

/// The shared state of one rendezvous channel.
pub(crate) struct ChanCore<T> {
    inner: Mutex<Inner<T>>,
}

#[derive(Debug, PartialEq, Eq)]
pub(crate) enum SendError<T> {
    /// A signal was raised before a receiver took the value.
    Interrupted,
    Closed(T),
}

#[derive(Debug, PartialEq, Eq)]
pub(crate) enum Selected<T> {
    Message(usize, T),
    Closed(usize),
    Interrupted,
}

impl<T: Send + 'static> ChanCore<T> {
    pub(crate) fn new() -> Self {
        ChanCore {
            inner: Mutex::new(Inner {
                senders: VecDeque::new(),
                receivers: VecDeque::new(),
                closed: false,
            }),
        }
    }

    /// Blocks until a receiver takes `value` or a signal is raised.
    pub(crate) fn send(&self, value: T, signals: &[&Signal]) -> Result<(), SendError<T>> {
        if signals.iter().any(|s| s.is_raised()) {
            return Err(SendError::Interrupted);
        }
        let mut inner = lock(&self.inner);
        if inner.closed {
            return Err(SendError::Closed(value));
        }
        let mut value = value;
        while let Some((waiter, index)) = inner.receivers.pop_front() {
            match waiter.try_fire(index, value) {
                Ok(()) => return Ok(()),
                Err(back) => value = back,
            }
        }
        let slot = Arc::new(SendSlot {
            state: Mutex::new(SlotState::Pending(value)),
            done: Condvar::new(),
        });
        inner.senders.push_back(Arc::clone(&slot));
        drop(inner);

        let party: Arc<dyn Interrupt> = slot.clone();
        park_all(signals, &party);
        let taken = {
            let mut state = lock(&slot.state);
            while matches!(*state, SlotState::Pending(_)) {
                state = slot.done.wait(state).unwrap_or_else(|p| p.into_inner());
            }
            matches!(*state, SlotState::Taken)
        };
        unpark_all(signals, &party);
        if taken {
            Ok(())
        } else {
            lock(&self.inner).senders.retain(|s| !Arc::ptr_eq(s, &slot));
            Err(SendError::Interrupted)
        }
    }

    /// Marks the channel finished: current and future receives see it closed.
    pub(crate) fn close(&self) {
        let mut inner = lock(&self.inner);
        inner.closed = true;
        for (waiter, index) in inner.receivers.drain(..) {
            waiter.close(index);
        }
        for slot in inner.senders.drain(..) {
            slot.interrupt();
        }
    }
}

/// Waits for the first of `chans` to deliver, scanning from `start` so that
/// callers can rotate priority among simultaneously ready channels.
pub(crate) fn select<T: Send + 'static>(
    chans: &[&ChanCore<T>],
    start: usize,
    signals: &[&Signal],
) -> Selected<T> {
    if signals.iter().any(|s| s.is_raised()) {
        return Selected::Interrupted;
    }
    let waiter = Arc::new(Waiter::new());
    let count = chans.len();
    let mut registered = Vec::with_capacity(count);
    'scan: for k in 0..count {
        let index = (start + k) % count;
        let mut inner = lock(&chans[index].inner);
        let mut state = lock(&waiter.state);
        if !matches!(*state, WaitState::Waiting) {
            break;
        }
        if inner.closed {
            *state = WaitState::Closed(index);
            break;
        }
        while let Some(slot) = inner.senders.pop_front() {
            if let Some(value) = slot.take() {
                *state = WaitState::Fired(index, value);
                break 'scan;
            }
        }
        drop(state);
        inner.receivers.push_back((Arc::clone(&waiter), index));
        registered.push(index);
    }

    let party: Arc<dyn Interrupt> = waiter.clone();
    park_all(signals, &party);
    let outcome = waiter.wait();
    unpark_all(signals, &party);
    for index in registered {
        lock(&chans[index].inner)
            .receivers
            .retain(|(w, _)| !Arc::ptr_eq(w, &waiter));
    }
    match outcome {
        WaitState::Fired(index, value) => Selected::Message(index, value),
        WaitState::Closed(index) => Selected::Closed(index),
        WaitState::Interrupted | WaitState::Waiting => Selected::Interrupted,
    }
}
