//! Delay-violation bounds for a link whose frames are lost when the receiver
//! rejects or fails to decode them.

pub mod outage;
pub mod queue;
pub mod snc;

pub use outage::{mc_service_outage, service_outage, snr_outage, OutageMode, ServiceOutage, SnrMode, SnrOutageMethod};
pub use queue::{simulate_delay_violations, QueueSimulation};
pub use snc::{delay_violation_bound, mellin_arrival, mellin_service, ArrivalModel, DelayBound, ServiceModel};
