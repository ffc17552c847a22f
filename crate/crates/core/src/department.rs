//! Department profile (distributions, probabilities, staffing, opening hours
//! and hourly footfall) and the service points customers queue at.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::agents::{CustomerId, SatisfactionWeights, StaffId, StaffRole, StaffState};
use crate::engine::{EventId, Minutes, MINUTES_PER_DAY, MINUTES_PER_HOUR};
use crate::stochastics::{AdjustRule, EventProbability, TriangularDist};

pub const WEEKDAYS: [&str; 7] = [
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
];

/// Validation failure naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl core::error::Error for ConfigError {}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distributions {
    pub browse: TriangularDist,
    pub normal_help: TriangularDist,
    pub expert_help: TriangularDist,
    pub pay_service: TriangularDist,
    pub refund_service: TriangularDist,
    /// Queue patience, shared by the help, pay and refund queues.
    pub patience: TriangularDist,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probabilities {
    pub buy_after_browse: EventProbability,
    pub need_help: EventProbability,
    pub buy_after_help: EventProbability,
    pub need_refund: EventProbability,
}

/// Which low/high adjustment applies to each decision family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdjustRules {
    pub buy: AdjustRule,
    pub help: AdjustRule,
    pub refund: AdjustRule,
}

impl Default for AdjustRules {
    fn default() -> Self {
        Self {
            buy: AdjustRule::Midpoint,
            help: AdjustRule::Midpoint,
            refund: AdjustRule::Ratio,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Staffing {
    pub normal_sellers: u32,
    pub expert_sellers: u32,
    pub cashiers: u32,
    pub managers: u32,
}

impl Staffing {
    pub fn count(&self, role: StaffRole) -> u32 {
        match role {
            StaffRole::NormalSeller => self.normal_sellers,
            StaffRole::ExpertSeller => self.expert_sellers,
            StaffRole::Cashier => self.cashiers,
            StaffRole::Manager => self.managers,
        }
    }

    pub fn total(&self) -> u32 {
        StaffRole::ALL.iter().map(|&r| self.count(r)).sum()
    }
}

/// Split a fixed pool of `total` customer-facing staff into `cashiers`
/// cashiers and sellers; sellers are divided into expert and normal by
/// `expert_fraction` (at least one of each when two or more sellers).
pub fn staffing_sweep(
    total: u32,
    cashiers: u32,
    expert_fraction: f64,
) -> Result<Staffing, ConfigError> {
    if cashiers < 1 || cashiers + 1 > total {
        return Err(ConfigError::new(
            "cashiers",
            format!("cashier count must lie in 1..={} for {total} staff", total.saturating_sub(1)),
        ));
    }
    if !(0.0..=1.0).contains(&expert_fraction) {
        return Err(ConfigError::new("expert_fraction", "must lie in [0, 1]"));
    }
    let sellers = total - cashiers;
    let mut experts = libm::round(f64::from(sellers) * expert_fraction) as u32;
    if sellers >= 2 {
        experts = experts.clamp(1, sellers - 1);
    }
    Ok(Staffing {
        normal_sellers: sellers - experts,
        expert_sellers: experts,
        cashiers,
        managers: 0,
    })
}

/// Opening window per weekday in minutes after midnight, `None` when closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpeningHours(pub [Option<(u32, u32)>; 7]);

impl OpeningHours {
    pub fn window(&self, weekday: usize) -> Option<(Minutes, Minutes)> {
        self.0[weekday].map(|(o, c)| (f64::from(o), f64::from(c)))
    }

    /// Mon-Wed, Fri, Sat 09:00-18:00; late opening Thu to 20:00; Sun 11:00-17:00.
    pub fn standard() -> Self {
        let day = Some((9 * 60, 18 * 60));
        OpeningHours([
            day,
            day,
            day,
            Some((9 * 60, 20 * 60)),
            day,
            day,
            Some((11 * 60, 17 * 60)),
        ])
    }
}

/// Customers per hour for each (weekday, hour-of-day) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootfallTable(pub [[f64; 24]; 7]);

impl FootfallTable {
    pub fn rate(&self, weekday: usize, hour: usize) -> f64 {
        self.0[weekday][hour]
    }

    /// Weekday plateau around midday tapering into the evening, Sunday at
    /// 1.2x and Saturday at 1.8x the weekday profile, scaled by `weekday_peak`
    /// customers per hour. Cells outside `hours` are zero.
    pub fn synthetic(weekday_peak: f64, hours: &OpeningHours) -> Self {
        const SHAPE: [f64; 24] = [
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, //
            0.55, 0.75, 0.9, 1.0, 1.0, 0.9, 0.85, 0.85, 0.7, // 09-17
            0.55, 0.4, 0.0, 0.0, 0.0, 0.0,
        ];
        let mut table = [[0.0; 24]; 7];
        for (weekday, row) in table.iter_mut().enumerate() {
            let Some((open, close)) = hours.0[weekday] else {
                continue;
            };
            let scale = match weekday {
                5 => 1.8,
                6 => 1.2,
                _ => 1.0,
            };
            for (hour, cell) in row.iter_mut().enumerate() {
                let start = hour as u32 * 60;
                if start + 60 > open && start < close {
                    *cell = libm::round(weekday_peak * scale * SHAPE[hour] * 10.0) / 10.0;
                }
            }
        }
        FootfallTable(table)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepartmentConfig {
    pub name: String,
    pub distributions: Distributions,
    pub probabilities: Probabilities,
    pub adjust_rules: AdjustRules,
    /// Share of help seekers who need an expert.
    pub expert_share: EventProbability,
    /// Share of sellers allocated as experts by [`staffing_sweep`].
    pub expert_fraction: f64,
    pub staffing: Staffing,
    pub opening_hours: OpeningHours,
    pub footfall: FootfallTable,
    /// Grace period after close during which queued and served customers
    /// may finish; anyone still inside at its end is escorted out.
    pub egress_minutes: Minutes,
    pub weights: SatisfactionWeights,
}

fn tri(a: f64, c: f64, b: f64) -> TriangularDist {
    TriangularDist::new(a, c, b).expect("built-in distribution is valid")
}

fn prob(p: f64) -> EventProbability {
    EventProbability::new(p).expect("built-in probability is valid")
}

impl DepartmentConfig {
    /// Audio & TV defaults.
    pub fn atv() -> Self {
        let hours = OpeningHours::standard();
        Self {
            name: "A&TV".to_string(),
            distributions: Distributions {
                browse: tri(1.0, 7.0, 15.0),
                normal_help: tri(3.0, 15.0, 30.0),
                expert_help: tri(3.0, 15.0, 30.0),
                pay_service: tri(2.0, 5.0, 12.0),
                refund_service: tri(2.0, 5.0, 10.0),
                patience: tri(5.0, 12.0, 20.0),
            },
            probabilities: Probabilities {
                buy_after_browse: prob(0.37),
                need_help: prob(0.38),
                buy_after_help: prob(0.56),
                need_refund: prob(0.05),
            },
            adjust_rules: AdjustRules::default(),
            expert_share: prob(0.30),
            expert_fraction: 1.0 / 3.0,
            staffing: staffing_sweep(10, 4, 1.0 / 3.0).expect("valid default staffing"),
            opening_hours: hours,
            footfall: FootfallTable::synthetic(50.0, &hours),
            egress_minutes: 15.0,
            weights: SatisfactionWeights::default(),
        }
    }

    /// Womenswear defaults. Only the qualitative contrasts with audio & TV
    /// are known, so every value here is synthetic.
    pub fn ww() -> Self {
        let hours = OpeningHours::standard();
        Self {
            name: "WW".to_string(),
            distributions: Distributions {
                browse: tri(1.0, 4.0, 10.0),
                normal_help: tri(2.0, 8.0, 15.0),
                expert_help: tri(2.0, 8.0, 15.0),
                pay_service: tri(1.0, 2.5, 6.0),
                refund_service: tri(1.0, 3.0, 6.0),
                patience: tri(5.0, 12.0, 20.0),
            },
            probabilities: Probabilities {
                buy_after_browse: prob(0.48),
                need_help: prob(0.20),
                buy_after_help: prob(0.75),
                need_refund: prob(0.05),
            },
            adjust_rules: AdjustRules::default(),
            expert_share: prob(0.10),
            expert_fraction: 1.0 / 3.0,
            staffing: staffing_sweep(10, 4, 1.0 / 3.0).expect("valid default staffing"),
            opening_hours: hours,
            footfall: FootfallTable::synthetic(65.0, &hours),
            egress_minutes: 15.0,
            weights: SatisfactionWeights::default(),
        }
    }

    pub fn with_staffing(mut self, staffing: Staffing) -> Self {
        self.staffing = staffing;
        self
    }

    /// Check the cross-field invariants the typed fields cannot express.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.is_empty() {
            return Err(ConfigError::new("name", "must not be empty"));
        }
        if !(0.0..=1.0).contains(&self.expert_fraction) {
            return Err(ConfigError::new("expert_fraction", "must lie in [0, 1]"));
        }
        if !(self.egress_minutes >= 0.0 && self.egress_minutes.is_finite()) {
            return Err(ConfigError::new("egress_minutes", "must be a non-negative number"));
        }
        self.weights
            .validate()
            .map_err(|f| ConfigError::new(format!("weights.{f}"), "violates the weight sign rule"))?;
        for (weekday, window) in self.opening_hours.0.iter().enumerate() {
            let day = WEEKDAYS[weekday];
            if let Some((open, close)) = *window {
                if open >= close {
                    return Err(ConfigError::new(
                        format!("opening_hours.{day}"),
                        format!("open ({open}) must be before close ({close})"),
                    ));
                }
                if f64::from(close) + self.egress_minutes > MINUTES_PER_DAY {
                    return Err(ConfigError::new(
                        format!("opening_hours.{day}"),
                        "close plus egress must fall before midnight",
                    ));
                }
            }
            for hour in 0..24 {
                let rate = self.footfall.rate(weekday, hour);
                if !(rate >= 0.0 && rate.is_finite()) {
                    return Err(ConfigError::new(
                        format!("footfall.{day}[{hour}]"),
                        "must be a non-negative number",
                    ));
                }
                let start = hour as u32 * 60;
                let open_this_hour = match *window {
                    Some((open, close)) => start + 60 > open && start < close,
                    None => false,
                };
                if rate > 0.0 && !open_this_hour {
                    return Err(ConfigError::new(
                        format!("footfall.{day}[{hour}]"),
                        "footfall outside opening hours must be 0",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Queue kinds of the department. Each is served by dedicated staff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointKind {
    NormalHelp,
    ExpertHelp,
    Till,
    Refund,
}

impl PointKind {
    pub const ALL: [PointKind; 4] = [
        PointKind::NormalHelp,
        PointKind::ExpertHelp,
        PointKind::Till,
        PointKind::Refund,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            PointKind::NormalHelp => "normal-help",
            PointKind::ExpertHelp => "expert-help",
            PointKind::Till => "till",
            PointKind::Refund => "refund",
        }
    }

    /// Roles able to serve this point, in assignment priority order.
    pub fn server_roles(self) -> &'static [StaffRole] {
        match self {
            PointKind::NormalHelp => &[StaffRole::NormalSeller],
            PointKind::ExpertHelp => &[StaffRole::ExpertSeller, StaffRole::Manager],
            PointKind::Till | PointKind::Refund => &[StaffRole::Cashier],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueEntry {
    pub customer: CustomerId,
    pub joined: Minutes,
    pub order: u64,
}

/// A FIFO queue and the staff assigned to serve it.
#[derive(Debug, Clone)]
pub struct ServicePoint {
    pub kind: PointKind,
    pub queue: VecDeque<QueueEntry>,
    pub servers: Vec<StaffId>,
}

impl ServicePoint {
    pub fn remove(&mut self, customer: CustomerId) -> bool {
        match self.queue.iter().position(|e| e.customer == customer) {
            Some(pos) => {
                self.queue.remove(pos);
                true
            }
            None => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StaffMember {
    pub id: StaffId,
    pub role: StaffRole,
    pub state: StaffState,
    pub busy_since: Minutes,
    pub completion: Option<EventId>,
    pub serving_point: Option<PointKind>,
}

/// Service points plus the rostered staff.
#[derive(Debug, Clone)]
pub struct Department {
    pub points: [ServicePoint; 4],
    pub staff: Vec<StaffMember>,
    roster: Staffing,
    join_counter: u64,
}

impl Department {
    pub fn new(staffing: &Staffing) -> Self {
        let mut staff = Vec::new();
        // experts are listed before managers so they take expert work first
        for role in [
            StaffRole::NormalSeller,
            StaffRole::ExpertSeller,
            StaffRole::Manager,
            StaffRole::Cashier,
        ] {
            for _ in 0..staffing.count(role) {
                staff.push(StaffMember {
                    id: staff.len() as StaffId,
                    role,
                    state: StaffState::Idle,
                    busy_since: 0.0,
                    completion: None,
                    serving_point: None,
                });
            }
        }
        let points = PointKind::ALL.map(|kind| ServicePoint {
            kind,
            queue: VecDeque::new(),
            servers: staff
                .iter()
                .filter(|s| kind.server_roles().contains(&s.role))
                .map(|s| s.id)
                .collect(),
        });
        Self {
            points,
            staff,
            roster: *staffing,
            join_counter: 0,
        }
    }

    pub fn roster(&self) -> &Staffing {
        &self.roster
    }

    pub fn point(&self, kind: PointKind) -> &ServicePoint {
        &self.points[kind.index()]
    }

    pub fn point_mut(&mut self, kind: PointKind) -> &mut ServicePoint {
        &mut self.points[kind.index()]
    }

    /// First idle server of the point in priority order.
    pub fn idle_server(&self, kind: PointKind) -> Option<StaffId> {
        self.point(kind)
            .servers
            .iter()
            .copied()
            .find(|&id| self.staff[id as usize].state == StaffState::Idle)
    }

    pub fn enqueue(&mut self, kind: PointKind, customer: CustomerId, now: Minutes) {
        let order = self.join_counter;
        self.join_counter += 1;
        self.point_mut(kind).queue.push_back(QueueEntry {
            customer,
            joined: now,
            order,
        });
    }

    /// Next customer for a freed staff member: the head of its own queue,
    /// or for cashiers whichever of the till and refund heads joined first.
    pub fn next_for(&mut self, staff: StaffId) -> Option<(PointKind, QueueEntry)> {
        let role = self.staff[staff as usize].role;
        let candidates: &[PointKind] = match role {
            StaffRole::NormalSeller => &[PointKind::NormalHelp],
            StaffRole::ExpertSeller | StaffRole::Manager => &[PointKind::ExpertHelp],
            StaffRole::Cashier => &[PointKind::Till, PointKind::Refund],
        };
        let kind = candidates
            .iter()
            .copied()
            .filter_map(|k| self.point(k).queue.front().map(|e| (k, e.order)))
            .min_by_key(|&(_, order)| order)?
            .0;
        let entry = self.point_mut(kind).queue.pop_front()?;
        Some((kind, entry))
    }

    /// (idle, serving) head counts for a role.
    pub fn staff_counts(&self, role: StaffRole) -> (u32, u32) {
        self.staff
            .iter()
            .filter(|s| s.role == role)
            .fold((0, 0), |(idle, busy), s| match s.state {
                StaffState::Idle => (idle + 1, busy),
                StaffState::Serving(_) => (idle, busy + 1),
            })
    }
}

/// Hourly arrival segments of one open day: `(start, end, footfall)` with
/// segment boundaries at whole hours and at the opening window edges.
pub fn arrival_segments(
    config: &DepartmentConfig,
    weekday: usize,
) -> Vec<(Minutes, Minutes, f64)> {
    let Some((open, close)) = config.opening_hours.window(weekday) else {
        return Vec::new();
    };
    let mut segments = Vec::new();
    let mut start = open;
    while start < close {
        let hour = libm::floor(start / MINUTES_PER_HOUR) as usize;
        let end = (((hour + 1) as Minutes) * MINUTES_PER_HOUR).min(close);
        segments.push((start, end, config.footfall.rate(weekday, hour.min(23))));
        start = end;
    }
    segments
}
