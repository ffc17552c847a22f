//! The event loop of one replication: arrivals drawn from the pool, the
//! customer state chart, staffed FIFO service points with reneging, and the
//! daily open/close/egress cycle.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::agents::{
    on_browse_end, on_enter, on_help_end, sample_patience, Action, Behaviour, CustomerId,
    CustomerState, ExitCategory, HelpKind, SatisfactionEvent, StaffId, StaffRole, StaffState,
    Stereotype, VisitOutcome,
};
use crate::department::{arrival_segments, ConfigError, Department, DepartmentConfig, PointKind};
use crate::engine::{
    fork_stream, Calendar, CalendarStats, EngineError, Event, EventId, EventKind, Minutes,
    RngStream, StreamId, MINUTES_PER_DAY,
};
use crate::metrics::{finalize, InvariantViolation, MetricsRecord, Tally};
use crate::population::{CustomerPool, PoolError, PoolMix};
use crate::stochastics::sample_interarrival;
use crate::stochastics::sample_triangular;

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    Config(ConfigError),
    Engine(EngineError),
    Pool(PoolError),
    Invariant(InvariantViolation),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Config(e) => write!(f, "configuration error: {e}"),
            SimError::Engine(e) => write!(f, "engine error: {e}"),
            SimError::Pool(e) => write!(f, "pool error: {e}"),
            SimError::Invariant(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for SimError {}

impl From<EngineError> for SimError {
    fn from(e: EngineError) -> Self {
        SimError::Engine(e)
    }
}

impl From<PoolError> for SimError {
    fn from(e: PoolError) -> Self {
        SimError::Pool(e)
    }
}

impl From<InvariantViolation> for SimError {
    fn from(e: InvariantViolation) -> Self {
        SimError::Invariant(e)
    }
}

impl From<ConfigError> for SimError {
    fn from(e: ConfigError) -> Self {
        SimError::Config(e)
    }
}

fn violation(msg: alloc::string::String) -> SimError {
    SimError::Invariant(InvariantViolation(msg))
}

/// What caused a logged state transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Trigger {
    Arrival,
    Decision,
    BrowseEnd,
    ServiceStart,
    ServiceComplete,
    Renege,
    ForcedEgress,
}

impl Trigger {
    pub const ALL: [Trigger; 7] = [
        Trigger::Arrival,
        Trigger::Decision,
        Trigger::BrowseEnd,
        Trigger::ServiceStart,
        Trigger::ServiceComplete,
        Trigger::Renege,
        Trigger::ForcedEgress,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Trigger::Arrival => "arrival",
            Trigger::Decision => "decision",
            Trigger::BrowseEnd => "browse-end",
            Trigger::ServiceStart => "service-start",
            Trigger::ServiceComplete => "service-complete",
            Trigger::Renege => "renege",
            Trigger::ForcedEgress => "forced-egress",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }
}

/// One row of the per-visit event log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionRecord {
    pub time: Minutes,
    pub customer: CustomerId,
    pub stereotype: Stereotype,
    pub from: CustomerState,
    pub to: CustomerState,
    pub weight: i32,
    pub trigger: Trigger,
    pub staff: Option<StaffId>,
}

/// Population and staffing counts after an event has been handled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub time: Minutes,
    pub pool_size: usize,
    pub resting: usize,
    pub in_department: usize,
    /// `(idle, serving)` per [`StaffRole::index`].
    pub staff: [(u32, u32); 4],
    pub open: bool,
}

/// Hooks for logging and external invariant checks. All methods default to
/// no-ops.
pub trait Observer {
    fn on_transition(&mut self, _record: &TransitionRecord) {}

    fn on_event(&mut self, _event: &Event, _snapshot: &Snapshot) {}
}

impl Observer for () {}

impl<O: Observer + ?Sized> Observer for &mut O {
    fn on_transition(&mut self, record: &TransitionRecord) {
        (**self).on_transition(record);
    }

    fn on_event(&mut self, event: &Event, snapshot: &Snapshot) {
        (**self).on_event(event, snapshot);
    }
}

/// Result of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub metrics: MetricsRecord,
    pub calendar: CalendarStats,
    pub pending_at_end: u64,
    /// Longest time between a close and a customer leaving afterwards.
    pub max_egress_latency: Minutes,
}

#[derive(Debug, Clone, Default)]
struct Visit {
    score: i32,
    pending: Option<EventId>,
    queue: Option<PointKind>,
    decided_to_buy: bool,
    server: Option<StaffId>,
}

struct Streams {
    arrivals: RngStream,
    decisions: RngStream,
    durations: RngStream,
    draws: RngStream,
}

pub struct Simulation<'a, O: Observer> {
    config: &'a DepartmentConfig,
    behaviours: [Behaviour; 5],
    calendar: Calendar,
    pool: CustomerPool,
    dept: Department,
    visits: Vec<Visit>,
    present: Vec<CustomerId>,
    present_slot: Vec<usize>,
    streams: Streams,
    tally: Tally,
    end_time: Minutes,
    open: bool,
    segments: Vec<(Minutes, Minutes, f64)>,
    day: Option<u32>,
    segment_end: Minutes,
    segment_rate: f64,
    next_arrival: Option<EventId>,
    next_boundary: Option<EventId>,
    last_close: Option<Minutes>,
    max_egress_latency: Minutes,
    observer: O,
}

const ABSENT: usize = usize::MAX;

impl<'a, O: Observer> Simulation<'a, O> {
    pub fn new(
        config: &'a DepartmentConfig,
        mix: &PoolMix,
        lifespan: Minutes,
        master_seed: u64,
        replication: u64,
        observer: O,
    ) -> Result<Self, SimError> {
        config.validate()?;
        if !(lifespan > 0.0 && lifespan.is_finite()) {
            return Err(SimError::Config(ConfigError::new(
                "lifespan",
                "must be a positive number of minutes",
            )));
        }
        let pool = CustomerPool::create(mix)?;
        let size = pool.size();
        let streams = Streams {
            arrivals: fork_stream(master_seed, replication, StreamId::Arrivals),
            decisions: fork_stream(master_seed, replication, StreamId::Decisions),
            durations: fork_stream(master_seed, replication, StreamId::Durations),
            draws: fork_stream(master_seed, replication, StreamId::PoolDraws),
        };
        let mut sim = Self {
            config,
            behaviours: Stereotype::ALL.map(|s| Behaviour::for_stereotype(config, s)),
            calendar: Calendar::new(),
            pool,
            dept: Department::new(&config.staffing),
            visits: alloc::vec![Visit::default(); size],
            present: Vec::new(),
            present_slot: alloc::vec![ABSENT; size],
            streams,
            tally: Tally::default(),
            end_time: lifespan,
            open: false,
            segments: Vec::new(),
            day: None,
            segment_end: 0.0,
            segment_rate: 0.0,
            next_arrival: None,
            next_boundary: None,
            last_close: None,
            max_egress_latency: 0.0,
            observer,
        };
        sim.schedule_days()?;
        Ok(sim)
    }

    fn schedule_days(&mut self) -> Result<(), SimError> {
        let days = libm::ceil(self.end_time / MINUTES_PER_DAY) as u32;
        for day in 0..days {
            let weekday = (day % 7) as usize;
            let Some((open, close)) = self.config.opening_hours.window(weekday) else {
                continue;
            };
            let base = f64::from(day) * MINUTES_PER_DAY;
            let cal = &mut self.calendar;
            cal.schedule(base + open, EventKind::DepartmentOpen, day)?;
            cal.schedule(base + close, EventKind::DepartmentClose, day)?;
            cal.schedule(
                base + close + self.config.egress_minutes,
                EventKind::EgressDeadline,
                day,
            )?;
        }
        Ok(())
    }

    pub fn pool(&self) -> &CustomerPool {
        &self.pool
    }

    pub fn department(&self) -> &Department {
        &self.dept
    }

    pub fn now(&self) -> Minutes {
        self.calendar.now()
    }

    /// Run to the end of the lifespan and finalise the metrics.
    pub fn run(self) -> Result<RunReport, SimError> {
        self.run_with_pool().map(|(report, _)| report)
    }

    /// As [`Simulation::run`], also handing back the final customer pool.
    pub fn run_with_pool(mut self) -> Result<(RunReport, CustomerPool), SimError> {
        while let Some(t) = self.calendar.peek_time() {
            if t > self.end_time {
                break;
            }
            let event = self.calendar.advance().expect("peeked event exists");
            self.handle(&event)?;
            self.check_conservation(&event)?;
        }
        // close the books on services cut by the end of the lifespan
        let end = self.end_time;
        for s in &self.dept.staff {
            if let StaffState::Serving(_) = s.state {
                self.tally.busy_minutes[s.role.index()] += end - s.busy_since;
            }
        }
        let metrics = finalize(&self.tally, &self.pool, self.dept.roster())?;
        let stats = self.calendar.stats();
        let report = RunReport {
            metrics,
            calendar: stats,
            pending_at_end: self.calendar.pending() as u64,
            max_egress_latency: self.max_egress_latency,
        };
        Ok((report, self.pool))
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            time: self.calendar.now(),
            pool_size: self.pool.size(),
            resting: self.pool.resting(),
            in_department: self.present.len(),
            staff: StaffRole::ALL.map(|r| self.dept.staff_counts(r)),
            open: self.open,
        }
    }

    fn check_conservation(&mut self, event: &Event) -> Result<(), SimError> {
        let snap = self.snapshot();
        if snap.resting + snap.in_department != snap.pool_size {
            return Err(violation(format!(
                "t={}: {} resting + {} inside != pool of {}",
                snap.time, snap.resting, snap.in_department, snap.pool_size
            )));
        }
        if self.pool.in_department() != snap.in_department {
            return Err(violation(format!(
                "t={}: pool marks {} customers out, department holds {}",
                snap.time,
                self.pool.in_department(),
                snap.in_department
            )));
        }
        for role in StaffRole::ALL {
            let (idle, busy) = snap.staff[role.index()];
            if idle + busy != self.dept.roster().count(role) {
                return Err(violation(format!(
                    "t={}: {} idle+serving {} != roster {}",
                    snap.time,
                    role.name(),
                    idle + busy,
                    self.dept.roster().count(role)
                )));
            }
        }
        self.observer.on_event(event, &snap);
        Ok(())
    }

    fn handle(&mut self, event: &Event) -> Result<(), SimError> {
        match event.kind {
            EventKind::DepartmentOpen => self.on_open(event.subject),
            EventKind::HourBoundary => self.start_next_segment(),
            EventKind::CustomerArrival => self.on_arrival(),
            EventKind::BrowseComplete => self.on_browse_complete(event.subject),
            EventKind::ServiceComplete => self.on_service_complete(event.subject),
            EventKind::PatienceExpired => self.on_patience_expired(event.subject),
            EventKind::DepartmentClose => self.on_close(),
            EventKind::EgressDeadline => self.on_egress_deadline(),
        }
    }

    fn on_open(&mut self, day: u32) -> Result<(), SimError> {
        let weekday = (day % 7) as usize;
        let now = self.calendar.now();
        let (_, close) = self
            .config
            .opening_hours
            .window(weekday)
            .expect("open events are only scheduled on open days");
        let duty_end = (f64::from(day) * MINUTES_PER_DAY + close + self.config.egress_minutes)
            .min(self.end_time);
        self.tally.duty_minutes += (duty_end - now).max(0.0);
        self.open = true;
        self.last_close = None;
        self.segments = arrival_segments(self.config, weekday);
        self.segments.reverse();
        self.day = Some(day);
        self.start_next_segment()
    }

    /// Begin the next hourly arrival segment. Gaps are regenerated at every
    /// boundary so each hour uses its own footfall rate.
    fn start_next_segment(&mut self) -> Result<(), SimError> {
        self.next_boundary = None;
        let Some((start, end, rate)) = self.segments.pop() else {
            return Ok(());
        };
        let Some(day) = self.day else {
            return Ok(());
        };
        let base = f64::from(day) * MINUTES_PER_DAY;
        self.segment_end = base + end;
        self.segment_rate = rate;
        if !self.segments.is_empty() {
            self.next_boundary =
                Some(self.calendar.schedule(base + end, EventKind::HourBoundary, day)?);
        }
        let from = self.calendar.now().max(base + start);
        self.schedule_arrival_after(from)
    }

    fn schedule_arrival_after(&mut self, from: Minutes) -> Result<(), SimError> {
        self.next_arrival = None;
        if let Some(gap) = sample_interarrival(self.segment_rate, &mut self.streams.arrivals) {
            let t = from + gap;
            if t < self.segment_end {
                self.next_arrival = Some(self.calendar.schedule(t, EventKind::CustomerArrival, 0)?);
            }
        }
        Ok(())
    }

    fn on_arrival(&mut self) -> Result<(), SimError> {
        let now = self.calendar.now();
        if !self.open {
            return Err(violation(format!("arrival at t={now} while closed")));
        }
        self.schedule_arrival_after(now)?;
        let Some(id) = self.pool.draw(&mut self.streams.draws) else {
            self.tally.starved_arrivals += 1;
            return Ok(());
        };
        self.present_slot[id as usize] = self.present.len();
        self.present.push(id);
        self.visits[id as usize] = Visit::default();
        self.transition(id, CustomerState::Entering, 0, Trigger::Arrival, None);

        let behaviour = self.behaviour(id);
        match on_enter(&behaviour, &mut self.streams.decisions, &mut self.streams.durations) {
            Action::SeekRefund => self.request_service(id, PointKind::Refund),
            Action::Browse(duration) => {
                self.transition(id, CustomerState::Browsing, 0, Trigger::Decision, None);
                let ev = self
                    .calendar
                    .schedule(now + duration, EventKind::BrowseComplete, id)?;
                self.visits[id as usize].pending = Some(ev);
                Ok(())
            }
            other => Err(violation(format!("unexpected entry action {other:?}"))),
        }
    }

    fn behaviour(&self, id: CustomerId) -> Behaviour {
        self.behaviours[self.pool.customer(id).stereotype.index()]
    }

    fn on_browse_complete(&mut self, id: CustomerId) -> Result<(), SimError> {
        self.visits[id as usize].pending = None;
        self.expect_state(id, CustomerState::Browsing)?;
        self.transition(id, CustomerState::Contemplating, 0, Trigger::BrowseEnd, None);
        let behaviour = self.behaviour(id);
        match on_browse_end(&behaviour, &mut self.streams.decisions) {
            Action::SeekHelp(HelpKind::Normal) => self.request_service(id, PointKind::NormalHelp),
            Action::SeekHelp(HelpKind::Expert) => self.request_service(id, PointKind::ExpertHelp),
            Action::QueueToPay => {
                self.visits[id as usize].decided_to_buy = true;
                self.request_service(id, PointKind::Till)
            }
            Action::LeaveEmptyHanded => self.leave(
                id,
                ExitCategory::LeftWithoutFindingAnything,
                SatisfactionEvent::LeftEmptyHanded,
                Trigger::Decision,
            ),
            other => Err(violation(format!("unexpected browse action {other:?}"))),
        }
    }

    fn expect_state(&self, id: CustomerId, state: CustomerState) -> Result<(), SimError> {
        let actual = self.pool.customer(id).state;
        if actual == state {
            Ok(())
        } else {
            Err(violation(format!(
                "customer {id} expected in {} but is {}",
                state.name(),
                actual.name()
            )))
        }
    }

    /// Serve immediately if a suitable staff member is idle, otherwise join
    /// the queue with a patience deadline.
    fn request_service(&mut self, id: CustomerId, kind: PointKind) -> Result<(), SimError> {
        if kind == PointKind::Till && !self.visits[id as usize].decided_to_buy {
            return Err(violation(format!("customer {id} queued to pay without deciding to buy")));
        }
        if let Some(staff) = self.dept.idle_server(kind) {
            return self.start_service(staff, id, kind);
        }
        let now = self.calendar.now();
        self.dept.enqueue(kind, id, now);
        let queue_state = match kind {
            PointKind::NormalHelp => CustomerState::QueueNormalHelp,
            PointKind::ExpertHelp => CustomerState::QueueExpertHelp,
            PointKind::Till => CustomerState::QueuePay,
            PointKind::Refund => CustomerState::QueueRefund,
        };
        self.transition(id, queue_state, 0, Trigger::Decision, None);
        let patience = sample_patience(&self.behaviour(id), &mut self.streams.durations);
        let ev = self
            .calendar
            .schedule(now + patience, EventKind::PatienceExpired, id)?;
        let visit = &mut self.visits[id as usize];
        visit.pending = Some(ev);
        visit.queue = Some(kind);
        Ok(())
    }

    fn start_service(
        &mut self,
        staff: StaffId,
        id: CustomerId,
        kind: PointKind,
    ) -> Result<(), SimError> {
        let now = self.calendar.now();
        let d = &self.config.distributions;
        let (dist, state) = match kind {
            PointKind::NormalHelp => (d.normal_help, CustomerState::ReceivingNormalHelp),
            PointKind::ExpertHelp => (d.expert_help, CustomerState::ReceivingExpertHelp),
            PointKind::Till => (d.pay_service, CustomerState::Paying),
            PointKind::Refund => (d.refund_service, CustomerState::Refunding),
        };
        let duration = sample_triangular(&dist, &mut self.streams.durations);
        let completion = self
            .calendar
            .schedule(now + duration, EventKind::ServiceComplete, staff)?;
        let member = &mut self.dept.staff[staff as usize];
        if member.state != StaffState::Idle {
            return Err(violation(format!("staff {staff} assigned while busy")));
        }
        member.state = StaffState::Serving(id);
        member.busy_since = now;
        member.completion = Some(completion);
        member.serving_point = Some(kind);
        let visit = &mut self.visits[id as usize];
        visit.queue = None;
        visit.server = Some(staff);
        self.transition(id, state, 0, Trigger::ServiceStart, Some(staff));
        Ok(())
    }

    /// Release a staff member, returning the customer it was serving and the
    /// point it served.
    fn release_staff(&mut self, staff: StaffId) -> Result<(CustomerId, PointKind), SimError> {
        let now = self.calendar.now();
        let member = &mut self.dept.staff[staff as usize];
        let StaffState::Serving(id) = member.state else {
            return Err(violation(format!("staff {staff} released while idle")));
        };
        let kind = member.serving_point.take().expect("serving staff has a point");
        self.tally.busy_minutes[member.role.index()] += now - member.busy_since;
        member.state = StaffState::Idle;
        member.completion = None;
        self.visits[id as usize].server = None;
        Ok((id, kind))
    }

    fn on_service_complete(&mut self, staff: StaffId) -> Result<(), SimError> {
        let (id, kind) = self.release_staff(staff)?;
        match kind {
            PointKind::NormalHelp | PointKind::ExpertHelp => {
                let w = self.config.weights.served_help_completed;
                self.visits[id as usize].score += w;
                self.transition(id, CustomerState::Contemplating, w, Trigger::ServiceComplete, Some(staff));
                let behaviour = self.behaviour(id);
                match on_help_end(&behaviour, &mut self.streams.decisions) {
                    Action::QueueToPay => {
                        self.visits[id as usize].decided_to_buy = true;
                        self.request_service(id, PointKind::Till)?;
                    }
                    _ => self.leave(
                        id,
                        ExitCategory::LeftWithoutFindingAnything,
                        SatisfactionEvent::LeftEmptyHanded,
                        Trigger::Decision,
                    )?,
                }
            }
            PointKind::Till => {
                self.finish_happy(id, SatisfactionEvent::PurchaseCompleted, staff, 1)?;
            }
            PointKind::Refund => {
                self.tally.refunds += 1;
                self.finish_happy(id, SatisfactionEvent::RefundCompleted, staff, 0)?;
            }
        }
        if let Some((next_kind, entry)) = self.dept.next_for(staff) {
            let visit = &mut self.visits[entry.customer as usize];
            if let Some(ev) = visit.pending.take() {
                self.calendar.cancel_pending(ev);
            }
            self.start_service(staff, entry.customer, next_kind)?;
        }
        Ok(())
    }

    fn finish_happy(
        &mut self,
        id: CustomerId,
        event: SatisfactionEvent,
        staff: StaffId,
        transactions: u32,
    ) -> Result<(), SimError> {
        let w = self.config.weights.weight(event);
        self.finish_visit(
            id,
            ExitCategory::LeavingHappy,
            w,
            Trigger::ServiceComplete,
            Some(staff),
            transactions,
        )
    }

    fn on_patience_expired(&mut self, id: CustomerId) -> Result<(), SimError> {
        let visit = &mut self.visits[id as usize];
        visit.pending = None;
        let Some(kind) = visit.queue.take() else {
            return Err(violation(format!("patience expired for customer {id} outside a queue")));
        };
        if !self.dept.point_mut(kind).remove(id) {
            return Err(violation(format!("customer {id} missing from {} queue", kind.name())));
        }
        let (category, event) = match kind {
            PointKind::NormalHelp => (ExitCategory::LeftBeforeNormalHelp, SatisfactionEvent::RenegedHelpQueue),
            PointKind::ExpertHelp => (ExitCategory::LeftBeforeExpertHelp, SatisfactionEvent::RenegedHelpQueue),
            PointKind::Till => (ExitCategory::LeftBeforePaying, SatisfactionEvent::RenegedPayQueue),
            PointKind::Refund => (ExitCategory::LeftBeforePaying, SatisfactionEvent::RenegedRefundQueue),
        };
        self.leave(id, category, event, Trigger::Renege)
    }

    fn on_close(&mut self) -> Result<(), SimError> {
        self.open = false;
        self.last_close = Some(self.calendar.now());
        self.segments.clear();
        self.day = None;
        for ev in [self.next_arrival.take(), self.next_boundary.take()].into_iter().flatten() {
            self.calendar.cancel_pending(ev);
        }
        // browsers and help queues leave at once; till, refund and service
        // customers get the egress grace period
        let inside = self.present.clone();
        for id in inside {
            let category = match self.pool.customer(id).state {
                CustomerState::Browsing => ExitCategory::LeftWithoutFindingAnything,
                CustomerState::QueueNormalHelp => ExitCategory::LeftBeforeNormalHelp,
                CustomerState::QueueExpertHelp => ExitCategory::LeftBeforeExpertHelp,
                _ => continue,
            };
            self.evict(id, category)?;
        }
        Ok(())
    }

    fn on_egress_deadline(&mut self) -> Result<(), SimError> {
        let inside = self.present.clone();
        for id in inside {
            let category = match self.pool.customer(id).state {
                CustomerState::ReceivingNormalHelp | CustomerState::ReceivingExpertHelp => {
                    ExitCategory::LeftWithoutFindingAnything
                }
                CustomerState::QueuePay
                | CustomerState::Paying
                | CustomerState::QueueRefund
                | CustomerState::Refunding => ExitCategory::LeftBeforePaying,
                CustomerState::Browsing => ExitCategory::LeftWithoutFindingAnything,
                CustomerState::QueueNormalHelp => ExitCategory::LeftBeforeNormalHelp,
                CustomerState::QueueExpertHelp => ExitCategory::LeftBeforeExpertHelp,
                other => {
                    return Err(violation(format!(
                        "customer {id} in transient state {} at egress deadline",
                        other.name()
                    )))
                }
            };
            self.evict(id, category)?;
        }
        if !self.present.is_empty() {
            return Err(violation(format!(
                "{} customers still inside after the egress deadline",
                self.present.len()
            )));
        }
        Ok(())
    }

    /// Forced departure at closing: void pending events, leave the queue or
    /// free the server.
    fn evict(&mut self, id: CustomerId, category: ExitCategory) -> Result<(), SimError> {
        let visit = &mut self.visits[id as usize];
        if let Some(ev) = visit.pending.take() {
            self.calendar.cancel_pending(ev);
        }
        if let Some(kind) = visit.queue.take() {
            self.dept.point_mut(kind).remove(id);
        }
        if let Some(staff) = visit.server {
            if let Some(ev) = self.dept.staff[staff as usize].completion {
                self.calendar.cancel_pending(ev);
            }
            self.release_staff(staff)?;
        }
        self.leave(id, category, SatisfactionEvent::ForcedEgressAtClose, Trigger::ForcedEgress)
    }

    fn leave(
        &mut self,
        id: CustomerId,
        category: ExitCategory,
        event: SatisfactionEvent,
        trigger: Trigger,
    ) -> Result<(), SimError> {
        let w = self.config.weights.weight(event);
        self.finish_visit(id, category, w, trigger, None, 0)
    }

    fn finish_visit(
        &mut self,
        id: CustomerId,
        category: ExitCategory,
        weight: i32,
        trigger: Trigger,
        staff: Option<StaffId>,
        transactions: u32,
    ) -> Result<(), SimError> {
        let visit = &mut self.visits[id as usize];
        visit.score += weight;
        let outcome = VisitOutcome {
            exit_category: category,
            per_visit_score: visit.score,
            transactions_made: transactions,
        };
        self.transition(id, CustomerState::Leaving, weight, trigger, staff);
        self.tally.record_visit(&outcome);
        self.pool.return_customer(id, &outcome)?;
        let slot = core::mem::replace(&mut self.present_slot[id as usize], ABSENT);
        self.present.swap_remove(slot);
        if let Some(&moved) = self.present.get(slot) {
            self.present_slot[moved as usize] = slot;
        }
        if let Some(close) = self.last_close {
            let latency = self.calendar.now() - close;
            self.max_egress_latency = self.max_egress_latency.max(latency);
        }
        Ok(())
    }

    fn transition(
        &mut self,
        id: CustomerId,
        to: CustomerState,
        weight: i32,
        trigger: Trigger,
        staff: Option<StaffId>,
    ) {
        let customer = self.pool.customer_mut(id);
        let record = TransitionRecord {
            time: self.calendar.now(),
            customer: id,
            stereotype: customer.stereotype,
            from: customer.state,
            to,
            weight,
            trigger,
            staff,
        };
        if to != CustomerState::Leaving {
            customer.state = to;
        }
        self.observer.on_transition(&record);
    }
}

/// Convenience wrapper: build and run one replication.
pub fn simulate<O: Observer>(
    config: &DepartmentConfig,
    mix: &PoolMix,
    lifespan: Minutes,
    master_seed: u64,
    replication: u64,
    observer: O,
) -> Result<RunReport, SimError> {
    Simulation::new(config, mix, lifespan, master_seed, replication, observer)?.run()
}
