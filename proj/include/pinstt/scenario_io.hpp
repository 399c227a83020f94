#pragma once

#include "pinstt/scenario.hpp"
#include "pinstt/simulator.hpp"
#include "pinstt/trainer.hpp"

#include <filesystem>
#include <string>

namespace pinstt {

/// Which built-in plant a scenario drives and where it starts.
struct PlantSpec {
    std::string type;         // "omnibot" or "quadrotor"
    double heading = 0.0;     // omnibot only
    Vector initial_output;    // defaults to the start-set center
    Vector initial_velocity;  // quadrotor only, defaults to zero
};

/// Everything a scenario file carries. Optional fields are resolved to
/// concrete values at parse time, so serializing and re-parsing is stable.
struct ScenarioBundle {
    TrasScenario scenario;
    TrainConfig training;
    GainSet gains;
    FunnelConfig funnel;
    SimConfig simulation;
    PlantSpec plant;
};

/// Strict parse: unknown keys, missing required keys, type mismatches and
/// invariant violations are all errors naming the offending path.
ScenarioBundle parse_scenario_text(const std::string& text);
ScenarioBundle parse_scenario(const std::filesystem::path& path);

std::string serialize_scenario(const ScenarioBundle& bundle);

PlantModel make_plant(const PlantSpec& plant, const TrasScenario& scen);

}  // namespace pinstt
