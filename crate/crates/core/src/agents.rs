//! Customer and staff agent definitions, satisfaction weights and the
//! probabilistic decision rules a customer follows at each branch point of
//! a visit.

use core::fmt;

use crate::department::DepartmentConfig;
use crate::engine::{Minutes, RngStream};
use crate::stochastics::{
    adjust_triangular, decide, sample_triangular, EventProbability, LikelihoodLevel,
    TriangularDist,
};

pub type CustomerId = u32;
pub type StaffId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CustomerState {
    RestingInPool,
    Entering,
    Browsing,
    Contemplating,
    QueueNormalHelp,
    ReceivingNormalHelp,
    QueueExpertHelp,
    ReceivingExpertHelp,
    QueuePay,
    Paying,
    QueueRefund,
    Refunding,
    Leaving,
}

impl CustomerState {
    pub const ALL: [CustomerState; 13] = [
        CustomerState::RestingInPool,
        CustomerState::Entering,
        CustomerState::Browsing,
        CustomerState::Contemplating,
        CustomerState::QueueNormalHelp,
        CustomerState::ReceivingNormalHelp,
        CustomerState::QueueExpertHelp,
        CustomerState::ReceivingExpertHelp,
        CustomerState::QueuePay,
        CustomerState::Paying,
        CustomerState::QueueRefund,
        CustomerState::Refunding,
        CustomerState::Leaving,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CustomerState::RestingInPool => "resting-in-pool",
            CustomerState::Entering => "entering",
            CustomerState::Browsing => "browsing",
            CustomerState::Contemplating => "contemplating",
            CustomerState::QueueNormalHelp => "queue-normal-help",
            CustomerState::ReceivingNormalHelp => "receiving-normal-help",
            CustomerState::QueueExpertHelp => "queue-expert-help",
            CustomerState::ReceivingExpertHelp => "receiving-expert-help",
            CustomerState::QueuePay => "queue-pay",
            CustomerState::Paying => "paying",
            CustomerState::QueueRefund => "queue-refund",
            CustomerState::Refunding => "refunding",
            CustomerState::Leaving => "leaving",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stereotype {
    ShoppingEnthusiast,
    SolutionDemander,
    ServiceSeeker,
    DisinterestedShopper,
    InternetShopper,
}

/// A stereotype's likelihood to buy, wait, ask for help and ask for a refund.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Likelihoods {
    pub buy: LikelihoodLevel,
    pub wait: LikelihoodLevel,
    pub ask_help: LikelihoodLevel,
    pub ask_refund: LikelihoodLevel,
}

impl Stereotype {
    pub const ALL: [Stereotype; 5] = [
        Stereotype::ShoppingEnthusiast,
        Stereotype::SolutionDemander,
        Stereotype::ServiceSeeker,
        Stereotype::DisinterestedShopper,
        Stereotype::InternetShopper,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Stereotype::ShoppingEnthusiast => "shopping-enthusiast",
            Stereotype::SolutionDemander => "solution-demander",
            Stereotype::ServiceSeeker => "service-seeker",
            Stereotype::DisinterestedShopper => "disinterested-shopper",
            Stereotype::InternetShopper => "internet-shopper",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn likelihoods(self) -> Likelihoods {
        use LikelihoodLevel::*;
        let (buy, wait, ask_help, ask_refund) = match self {
            Stereotype::ShoppingEnthusiast => (High, Moderate, Moderate, Low),
            Stereotype::SolutionDemander => (High, Low, Low, Low),
            Stereotype::ServiceSeeker => (Moderate, High, High, Low),
            Stereotype::DisinterestedShopper => (Low, Low, Low, High),
            Stereotype::InternetShopper => (Low, High, High, Low),
        };
        Likelihoods {
            buy,
            wait,
            ask_help,
            ask_refund,
        }
    }
}

impl fmt::Display for Stereotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Transition events that move a customer's satisfaction index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SatisfactionEvent {
    ServedHelpCompleted,
    PurchaseCompleted,
    RefundCompleted,
    RenegedHelpQueue,
    RenegedPayQueue,
    RenegedRefundQueue,
    LeftEmptyHanded,
    ForcedEgressAtClose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SatisfactionWeights {
    pub served_help_completed: i32,
    pub purchase_completed: i32,
    pub refund_completed: i32,
    pub reneged_help_queue: i32,
    pub reneged_pay_queue: i32,
    pub reneged_refund_queue: i32,
    pub left_empty_handed: i32,
    pub forced_egress_at_close: i32,
}

impl Default for SatisfactionWeights {
    fn default() -> Self {
        Self {
            served_help_completed: 1,
            purchase_completed: 1,
            refund_completed: 1,
            reneged_help_queue: -1,
            reneged_pay_queue: -1,
            reneged_refund_queue: -1,
            left_empty_handed: 0,
            forced_egress_at_close: 0,
        }
    }
}

impl SatisfactionWeights {
    pub fn weight(&self, event: SatisfactionEvent) -> i32 {
        match event {
            SatisfactionEvent::ServedHelpCompleted => self.served_help_completed,
            SatisfactionEvent::PurchaseCompleted => self.purchase_completed,
            SatisfactionEvent::RefundCompleted => self.refund_completed,
            SatisfactionEvent::RenegedHelpQueue => self.reneged_help_queue,
            SatisfactionEvent::RenegedPayQueue => self.reneged_pay_queue,
            SatisfactionEvent::RenegedRefundQueue => self.reneged_refund_queue,
            SatisfactionEvent::LeftEmptyHanded => self.left_empty_handed,
            SatisfactionEvent::ForcedEgressAtClose => self.forced_egress_at_close,
        }
    }

    /// Completed services positive, reneges negative, neutral exits zero.
    pub fn validate(&self) -> Result<(), &'static str> {
        let positive = [
            ("served_help_completed", self.served_help_completed),
            ("purchase_completed", self.purchase_completed),
            ("refund_completed", self.refund_completed),
        ];
        let negative = [
            ("reneged_help_queue", self.reneged_help_queue),
            ("reneged_pay_queue", self.reneged_pay_queue),
            ("reneged_refund_queue", self.reneged_refund_queue),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, w)| *w <= 0) {
            return Err(name);
        }
        if let Some((name, _)) = negative.iter().find(|(_, w)| *w >= 0) {
            return Err(name);
        }
        if self.left_empty_handed != 0 {
            return Err("left_empty_handed");
        }
        if self.forced_egress_at_close != 0 {
            return Err("forced_egress_at_close");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExitCategory {
    LeavingHappy,
    LeftBeforeNormalHelp,
    LeftBeforeExpertHelp,
    LeftBeforePaying,
    LeftWithoutFindingAnything,
}

impl ExitCategory {
    pub const ALL: [ExitCategory; 5] = [
        ExitCategory::LeavingHappy,
        ExitCategory::LeftBeforeNormalHelp,
        ExitCategory::LeftBeforeExpertHelp,
        ExitCategory::LeftBeforePaying,
        ExitCategory::LeftWithoutFindingAnything,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ExitCategory::LeavingHappy => "leaving_happy",
            ExitCategory::LeftBeforeNormalHelp => "left_before_normal_help",
            ExitCategory::LeftBeforeExpertHelp => "left_before_expert_help",
            ExitCategory::LeftBeforePaying => "left_before_paying",
            ExitCategory::LeftWithoutFindingAnything => "left_without_finding_anything",
        }
    }
}

/// Result of one completed visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VisitOutcome {
    pub exit_category: ExitCategory,
    pub per_visit_score: i32,
    pub transactions_made: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StaffRole {
    NormalSeller,
    ExpertSeller,
    Cashier,
    Manager,
}

impl StaffRole {
    pub const ALL: [StaffRole; 4] = [
        StaffRole::NormalSeller,
        StaffRole::ExpertSeller,
        StaffRole::Cashier,
        StaffRole::Manager,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            StaffRole::NormalSeller => "normal_seller",
            StaffRole::ExpertSeller => "expert_seller",
            StaffRole::Cashier => "cashier",
            StaffRole::Manager => "manager",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaffState {
    Idle,
    Serving(CustomerId),
}

/// The help queue a customer is sent to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HelpKind {
    Normal,
    Expert,
}

/// Decision taken at a branch point of the customer state chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    Browse(Minutes),
    SeekRefund,
    SeekHelp(HelpKind),
    QueueToPay,
    LeaveEmptyHanded,
}

/// Behaviour parameters of one stereotype in one department, with the
/// likelihood adjustments already applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Behaviour {
    pub need_refund: EventProbability,
    pub need_help: EventProbability,
    pub buy_after_browse: EventProbability,
    pub buy_after_help: EventProbability,
    pub expert_share: EventProbability,
    pub browse: TriangularDist,
    pub patience: TriangularDist,
}

impl Behaviour {
    pub fn for_stereotype(config: &DepartmentConfig, stereotype: Stereotype) -> Self {
        let levels = stereotype.likelihoods();
        let probs = &config.probabilities;
        let rules = &config.adjust_rules;
        Self {
            need_refund: rules.refund.apply(probs.need_refund, levels.ask_refund),
            need_help: rules.help.apply(probs.need_help, levels.ask_help),
            buy_after_browse: rules.buy.apply(probs.buy_after_browse, levels.buy),
            buy_after_help: rules.buy.apply(probs.buy_after_help, levels.buy),
            expert_share: config.expert_share,
            browse: config.distributions.browse,
            patience: adjust_triangular(&config.distributions.patience, levels.wait),
        }
    }
}

/// Entering the department: either head for the refund desk or start
/// browsing for a sampled duration.
pub fn on_enter(
    behaviour: &Behaviour,
    decisions: &mut RngStream,
    durations: &mut RngStream,
) -> Action {
    if decide(behaviour.need_refund, decisions) {
        Action::SeekRefund
    } else {
        Action::Browse(sample_triangular(&behaviour.browse, durations))
    }
}

/// End of browsing; the contemplating state is this zero-duration decision.
pub fn on_browse_end(behaviour: &Behaviour, decisions: &mut RngStream) -> Action {
    if decide(behaviour.need_help, decisions) {
        if decide(behaviour.expert_share, decisions) {
            Action::SeekHelp(HelpKind::Expert)
        } else {
            Action::SeekHelp(HelpKind::Normal)
        }
    } else if decide(behaviour.buy_after_browse, decisions) {
        Action::QueueToPay
    } else {
        Action::LeaveEmptyHanded
    }
}

/// End of a help session: buy or leave.
pub fn on_help_end(behaviour: &Behaviour, decisions: &mut RngStream) -> Action {
    if decide(behaviour.buy_after_help, decisions) {
        Action::QueueToPay
    } else {
        Action::LeaveEmptyHanded
    }
}

/// Patience for a queue, drawn from the wait-adjusted distribution.
pub fn sample_patience(behaviour: &Behaviour, durations: &mut RngStream) -> Minutes {
    sample_triangular(&behaviour.patience, durations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::department::DepartmentConfig;
    use crate::engine::{fork_stream, StreamId};
    use LikelihoodLevel::*;

    #[test]
    fn stereotype_levels_match_definitions() {
        let l = Stereotype::ShoppingEnthusiast.likelihoods();
        assert_eq!((l.buy, l.wait, l.ask_help, l.ask_refund), (High, Moderate, Moderate, Low));
        let l = Stereotype::SolutionDemander.likelihoods();
        assert_eq!((l.buy, l.wait, l.ask_help, l.ask_refund), (High, Low, Low, Low));
        let l = Stereotype::ServiceSeeker.likelihoods();
        assert_eq!((l.buy, l.wait, l.ask_help, l.ask_refund), (Moderate, High, High, Low));
        let l = Stereotype::DisinterestedShopper.likelihoods();
        assert_eq!((l.buy, l.wait, l.ask_help, l.ask_refund), (Low, Low, Low, High));
        let l = Stereotype::InternetShopper.likelihoods();
        assert_eq!((l.buy, l.wait, l.ask_help, l.ask_refund), (Low, High, High, Low));
    }

    #[test]
    fn default_weights_follow_sign_rules() {
        let w = SatisfactionWeights::default();
        assert_eq!(w.validate(), Ok(()));
        let bad = SatisfactionWeights {
            reneged_pay_queue: 1,
            ..w
        };
        assert_eq!(bad.validate(), Err("reneged_pay_queue"));
    }

    #[test]
    fn state_names_round_trip() {
        for s in CustomerState::ALL {
            assert_eq!(CustomerState::from_name(s.name()), Some(s));
        }
        for s in Stereotype::ALL {
            assert_eq!(Stereotype::from_name(s.name()), Some(s));
        }
    }

    #[test]
    fn browse_branches_are_deterministic_under_forced_probabilities() {
        let cfg = DepartmentConfig::atv();
        let mut b = Behaviour::for_stereotype(&cfg, Stereotype::ShoppingEnthusiast);
        let mut rng = fork_stream(1, 0, StreamId::Decisions);
        let mut dur = fork_stream(1, 0, StreamId::Durations);

        b.need_help = EventProbability::ZERO;
        b.buy_after_browse = EventProbability::ONE;
        assert_eq!(on_browse_end(&b, &mut rng), Action::QueueToPay);
        b.buy_after_browse = EventProbability::ZERO;
        assert_eq!(on_browse_end(&b, &mut rng), Action::LeaveEmptyHanded);

        b.need_refund = EventProbability::ONE;
        assert_eq!(on_enter(&b, &mut rng, &mut dur), Action::SeekRefund);
        b.need_refund = EventProbability::ZERO;
        match on_enter(&b, &mut rng, &mut dur) {
            Action::Browse(t) => assert!((1.0..=15.0).contains(&t)),
            other => panic!("unexpected {other:?}"),
        }

        b.buy_after_help = EventProbability::ZERO;
        assert_eq!(on_help_end(&b, &mut rng), Action::LeaveEmptyHanded);
    }

    #[test]
    fn pay_queue_patience_for_moderate_customer_in_bounds() {
        let cfg = DepartmentConfig::atv();
        let b = Behaviour::for_stereotype(&cfg, Stereotype::ShoppingEnthusiast);
        let mut dur = fork_stream(5, 0, StreamId::Durations);
        for _ in 0..10_000 {
            let t = sample_patience(&b, &mut dur);
            assert!((5.0..=20.0).contains(&t));
        }
    }
}
