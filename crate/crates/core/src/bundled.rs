//! The three LiDAR listings, compiled in.

use crate::model::{FaultTree, GateKind};
use crate::puml::parse_plantuml;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    /// First draft: packages and plain connections, all OR.
    LidarInitial,
    /// After repair: explicit AND/OR gate circles.
    LidarFinal,
    /// Level 4 autonomy variant with a performance-degradation branch.
    LidarPerformance,
}

impl Example {
    pub const ALL: [Example; 3] = [Example::LidarInitial, Example::LidarFinal, Example::LidarPerformance];

    pub fn name(self) -> &'static str {
        match self {
            Example::LidarInitial => "lidar-initial",
            Example::LidarFinal => "lidar-final",
            Example::LidarPerformance => "lidar-performance",
        }
    }

    pub fn from_name(name: &str) -> Option<Example> {
        Example::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn source(self) -> &'static str {
        match self {
            Example::LidarInitial => include_str!("../data/lidar_initial.puml"),
            Example::LidarFinal => include_str!("../data/lidar_final.puml"),
            Example::LidarPerformance => include_str!("../data/lidar_performance.puml"),
        }
    }

    pub fn tree(self) -> FaultTree {
        parse_plantuml(self.source(), GateKind::Or).expect("bundled listings parse")
    }
}
