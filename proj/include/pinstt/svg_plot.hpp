#pragma once

#include "pinstt/scenario.hpp"
#include "pinstt/tube_net.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace pinstt {

/// Static SVG of a scenario: obstacles at a handful of times, tube slices at
/// regular intervals when a network is given, and the output trajectory.
/// 2-D scenarios render one panel, 3-D scenarios three axis-pair panels.
std::string render_plot_svg(const TrasScenario& scen, const std::vector<Vector>& outputs,
                            const TubeNet* net);

/// Output samples (the first block of each row) from a trajectory CSV.
std::vector<Vector> read_trajectory_outputs(const std::filesystem::path& path, int dimension);

}  // namespace pinstt
