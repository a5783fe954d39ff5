//! The pseudo-metrics `d_{X,Φ}`, ε-nets, separation certificates and the constructions
//! that move nets between operators, coordinates and direct summands.

mod metric;
mod net;
mod regularized;
mod transfer;
mod witness;

pub use metric::{
    distance_matrix, pseudo_metric, separation_witness, Coupling, FeatureMap, PointFeatures,
    PseudoMetricSpec,
};
pub use net::{
    covering_radius, epsilon_net, greedy_net, min_pairwise_distance, total_boundedness_probe,
    verify_family, verify_net, NetReport, ProbeVerdict, SeparatedFamily,
};
pub(crate) use net::{probe_on_features, radius_on_features};
pub use regularized::{regularized_coordinate_net, RegularizedNet};
pub use transfer::{
    directsum_net_transfer, forward_transfer, project_spec, BackwardTransfer, ForwardTransfer,
    TransferReport,
};
pub use witness::{
    noncompactness_witness, noncompactness_witness_for, row_norms, NoncompactnessWitness,
    WitnessOutcome,
};
