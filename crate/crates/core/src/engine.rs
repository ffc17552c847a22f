//! Discrete-event kernel: clock, event calendar and seeded random streams.
//!
//! Simulated time is measured in minutes since the start of a run. The
//! calendar orders pending events by `(fire_time, seq)` where `seq` is a
//! monotone insertion counter, so simultaneous events fire in the order they
//! were scheduled. Cancelled events stay in the heap and are skipped when
//! they surface (lazy deletion).

use alloc::collections::{BTreeSet, BinaryHeap};
use core::cmp::Ordering;
use core::fmt;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// Simulated time in minutes.
pub type Minutes = f64;

pub const MINUTES_PER_HOUR: Minutes = 60.0;
pub const MINUTES_PER_DAY: Minutes = 1440.0;
pub const MINUTES_PER_WEEK: Minutes = 7.0 * MINUTES_PER_DAY;

/// What a scheduled event means to the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    CustomerArrival,
    BrowseComplete,
    ServiceComplete,
    PatienceExpired,
    HourBoundary,
    DepartmentOpen,
    DepartmentClose,
    EgressDeadline,
}

/// Handle returned by [`Calendar::schedule`], used for cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(u64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub fire_time: Minutes,
    pub kind: EventKind,
    /// Customer, staff or day index the event targets, depending on `kind`.
    pub subject: u32,
    pub seq: u64,
}

impl Event {
    pub fn id(&self) -> EventId {
        EventId(self.seq)
    }
}

// Min-heap adaptor: BinaryHeap is a max-heap, so the ordering is reversed.
#[derive(Debug)]
struct Pending(Event);

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .fire_time
            .total_cmp(&self.0.fire_time)
            .then_with(|| other.0.seq.cmp(&self.0.seq))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EngineError {
    /// An event was scheduled before the current clock value.
    ScheduledInPast { now: Minutes, fire_time: Minutes },
    /// The fire time is NaN or infinite.
    InvalidTime(Minutes),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::ScheduledInPast { now, fire_time } => {
                write!(f, "event scheduled in the past: fire_time {fire_time} < now {now}")
            }
            EngineError::InvalidTime(t) => write!(f, "event fire time is not finite: {t}"),
        }
    }
}

/// Non-decreasing simulation clock.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SimClock {
    now: Minutes,
}

impl SimClock {
    pub fn now(&self) -> Minutes {
        self.now
    }

    fn advance_to(&mut self, t: Minutes) {
        debug_assert!(t >= self.now);
        self.now = t;
    }
}

/// Event bookkeeping counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CalendarStats {
    pub scheduled: u64,
    pub processed: u64,
    pub cancelled: u64,
}

/// Time-ordered event calendar.
#[derive(Debug, Default)]
pub struct Calendar {
    clock: SimClock,
    heap: BinaryHeap<Pending>,
    cancelled: BTreeSet<u64>,
    next_seq: u64,
    stats: CalendarStats,
}

impl Calendar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> Minutes {
        self.clock.now()
    }

    pub fn stats(&self) -> CalendarStats {
        self.stats
    }

    /// Number of live (not cancelled) events still waiting.
    pub fn pending(&self) -> usize {
        self.heap.len() - self.cancelled.len()
    }

    pub fn schedule(
        &mut self,
        fire_time: Minutes,
        kind: EventKind,
        subject: u32,
    ) -> Result<EventId, EngineError> {
        if !fire_time.is_finite() {
            return Err(EngineError::InvalidTime(fire_time));
        }
        if fire_time < self.clock.now() {
            return Err(EngineError::ScheduledInPast {
                now: self.clock.now(),
                fire_time,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Pending(Event {
            fire_time,
            kind,
            subject,
            seq,
        }));
        self.stats.scheduled += 1;
        Ok(EventId(seq))
    }

    /// Void a pending event. Returns `false` if it already fired or was
    /// cancelled before.
    pub fn cancel(&mut self, id: EventId) -> bool {
        if id.0 >= self.next_seq || !self.heap.iter().any(|p| p.0.seq == id.0) {
            return false;
        }
        self.mark_cancelled(id)
    }

    /// Cancel an id the caller knows to be pending. Skips the heap scan.
    pub(crate) fn cancel_pending(&mut self, id: EventId) -> bool {
        self.mark_cancelled(id)
    }

    fn mark_cancelled(&mut self, id: EventId) -> bool {
        let fresh = self.cancelled.insert(id.0);
        if fresh {
            self.stats.cancelled += 1;
        }
        fresh
    }

    /// Fire time of the next live event without removing it.
    pub fn peek_time(&mut self) -> Option<Minutes> {
        self.drop_cancelled_head();
        self.heap.peek().map(|p| p.0.fire_time)
    }

    fn drop_cancelled_head(&mut self) {
        while let Some(head) = self.heap.peek() {
            if self.cancelled.remove(&head.0.seq) {
                self.heap.pop();
            } else {
                break;
            }
        }
    }

    /// Remove the minimum `(fire_time, seq)` live event and move the clock to
    /// its fire time. `None` marks the end of the run.
    pub fn advance(&mut self) -> Option<Event> {
        self.drop_cancelled_head();
        let Pending(event) = self.heap.pop()?;
        self.clock.advance_to(event.fire_time);
        self.stats.processed += 1;
        Some(event)
    }
}

/// Labels for the independent random streams of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamId {
    Arrivals,
    Decisions,
    Durations,
    PoolDraws,
}

impl StreamId {
    pub const ALL: [StreamId; 4] = [
        StreamId::Arrivals,
        StreamId::Decisions,
        StreamId::Durations,
        StreamId::PoolDraws,
    ];

    fn code(self) -> u64 {
        match self {
            StreamId::Arrivals => 1,
            StreamId::Decisions => 2,
            StreamId::Durations => 3,
            StreamId::PoolDraws => 4,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A reproducible random stream keyed by `(seed, replication, stream)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    replication: u64,
    stream: StreamId,
    rng: ChaCha12Rng,
}

/// Derive the stream for one replication. The ChaCha key comes from the
/// master seed and replication index; the stream label selects the ChaCha
/// stream number, so streams never overlap.
pub fn fork_stream(master_seed: u64, replication: u64, stream: StreamId) -> RngStream {
    let mut state = master_seed;
    let mut key = [0u8; 32];
    let rep_mix = splitmix64(&mut state) ^ replication.wrapping_mul(0xD1B5_4A32_D192_ED03);
    let mut state = rep_mix;
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha12Rng::from_seed(key);
    rng.set_stream(stream.code());
    RngStream {
        seed: master_seed,
        replication,
        stream,
        rng,
    }
}

impl RngStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replication(&self) -> u64 {
        self.replication
    }

    pub fn stream_id(&self) -> StreamId {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n` (Lemire's widening multiply, rejection-free
    /// bias is below 2^-32 for the pool sizes used here).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let mut x = self.rng.next_u64();
        let mut m = (x as u128) * (n as u128);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                x = self.rng.next_u64();
                m = (x as u128) * (n as u128);
                low = m as u64;
            }
        }
        (m >> 64) as usize
    }
}
