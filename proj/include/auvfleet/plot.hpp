#pragma once

#include <string>

#include "auvfleet/simulation.hpp"

namespace auvfleet {

/// Static SVG figures rendered directly from the run log:
///   trajectory.svg — oblique 3D projection of agent paths, reference and
///                    obstacles;
///   tracking.svg   — the six pose components of every agent against the
///                    reference over time;
///   controls.svg   — the six applied wrench components over time.
void write_trajectory_svg(const SimLog& log, const ScenarioConfig& config,
                          const std::string& path);
void write_tracking_svg(const SimLog& log, const ScenarioConfig& config,
                        const std::string& path);
void write_controls_svg(const SimLog& log, const ScenarioConfig& config,
                        const std::string& path);

}  // namespace auvfleet
