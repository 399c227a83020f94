#include "pinstt/scenario_io.hpp"

#include "pinstt/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace pinstt {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw FormatError(path + ": " + what);
}

const json& require_key(const json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        fail(path + "." + key, "missing required key");
    }
    return *it;
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        fail(path, "expected an object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : obj.items()) {
        if (!ok.contains(item.key())) {
            fail(path + "." + item.key(), "unknown key");
        }
    }
}

double as_number(const json& value, const std::string& path) {
    if (!value.is_number()) {
        fail(path, "expected a number");
    }
    return value.get<double>();
}

double number_at(const json& obj, const std::string& path, const char* key) {
    return as_number(require_key(obj, path, key), path + "." + key);
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
    const auto it = obj.find(key);
    return it == obj.end() ? fallback : as_number(*it, path + "." + key);
}

long integer_at(const json& obj, const std::string& path, const char* key) {
    const json& value = require_key(obj, path, key);
    if (!value.is_number_integer()) {
        fail(path + "." + key, "expected an integer");
    }
    return value.get<long>();
}

long integer_or(const json& obj, const std::string& path, const char* key, long fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer()) {
        fail(path + "." + key, "expected an integer");
    }
    return it->get<long>();
}

Vector vector_at(const json& obj, const std::string& path, const char* key) {
    const json& value = require_key(obj, path, key);
    if (!value.is_array() || value.empty()) {
        fail(path + "." + key, "expected a non-empty array of numbers");
    }
    Vector out(value.size());
    for (std::size_t i = 0; i < value.size(); ++i) {
        out[i] = as_number(value[i], path + "." + key + "[" + std::to_string(i) + "]");
    }
    return out;
}

Ball ball_at(const json& obj, const std::string& path, const char* key) {
    const json& value = require_key(obj, path, key);
    const std::string sub = path + "." + key;
    reject_unknown(value, sub, {"center", "radius"});
    return {vector_at(value, sub, "center"), number_at(value, sub, "radius")};
}

Obstacle parse_obstacle(const json& value, const std::string& path) {
    reject_unknown(value, path, {"shape", "motion"});
    const json& shape = require_key(value, path, "shape");
    const std::string shape_path = path + ".shape";
    Obstacle obs;
    const std::string shape_type =
        require_key(shape, shape_path, "type").get<std::string>();
    if (shape_type == "ball") {
        reject_unknown(shape, shape_path, {"type", "center", "radius"});
        obs.shape = BallShape{vector_at(shape, shape_path, "center"),
                              number_at(shape, shape_path, "radius")};
    } else if (shape_type == "box") {
        reject_unknown(shape, shape_path, {"type", "min", "max"});
        obs.shape =
            BoxShape{vector_at(shape, shape_path, "min"), vector_at(shape, shape_path, "max")};
    } else {
        fail(shape_path + ".type", "expected \"ball\" or \"box\"");
    }

    const json& motion = require_key(value, path, "motion");
    const std::string motion_path = path + ".motion";
    const std::string motion_type =
        require_key(motion, motion_path, "type").get<std::string>();
    if (motion_type == "static") {
        reject_unknown(motion, motion_path, {"type"});
        obs.motion = StaticMotion{};
    } else if (motion_type == "sinusoidal") {
        reject_unknown(motion, motion_path,
                       {"type", "axis", "amplitude", "angular_frequency", "phase"});
        obs.motion = SinusoidalMotion{
            static_cast<int>(integer_at(motion, motion_path, "axis")),
            number_at(motion, motion_path, "amplitude"),
            number_at(motion, motion_path, "angular_frequency"),
            number_or(motion, motion_path, "phase", 0.0)};
    } else {
        fail(motion_path + ".type", "expected \"static\" or \"sinusoidal\"");
    }
    return obs;
}

TrasScenario parse_scenario_section(const json& section) {
    const std::string path = "scenario";
    reject_unknown(section, path,
                   {"dimension", "space", "start", "target", "prescribed_time", "min_radius",
                    "obstacles"});
    TrasScenario scen;
    scen.dimension = static_cast<int>(integer_at(section, path, "dimension"));
    scen.space = ball_at(section, path, "space");
    scen.start = ball_at(section, path, "start");
    scen.target = ball_at(section, path, "target");
    scen.prescribed_time = number_at(section, path, "prescribed_time");
    scen.min_radius = number_at(section, path, "min_radius");
    if (const auto it = section.find("obstacles"); it != section.end()) {
        if (!it->is_array()) {
            fail(path + ".obstacles", "expected an array");
        }
        for (std::size_t j = 0; j < it->size(); ++j) {
            scen.obstacles.push_back(
                parse_obstacle((*it)[j], path + ".obstacles[" + std::to_string(j) + "]"));
        }
    }
    return scen;
}

TrainConfig parse_training_section(const json& section, const TrasScenario& scen) {
    const std::string path = "training";
    reject_unknown(section, path,
                   {"seed", "epsilon", "center_rate_budget", "radius_rate_budget",
                    "physics_weights", "boundary_weights", "batch_size", "learning_rate",
                    "max_epochs", "tolerance", "hidden_widths"});
    TrainConfig cfg = default_train_config(scen, 0);
    cfg.seed = static_cast<std::uint64_t>(integer_at(section, path, "seed"));
    cfg.epsilon = number_or(section, path, "epsilon", cfg.epsilon);
    cfg.center_rate_budget =
        number_or(section, path, "center_rate_budget", cfg.center_rate_budget);
    cfg.radius_rate_budget =
        number_or(section, path, "radius_rate_budget", cfg.radius_rate_budget);
    if (const auto it = section.find("physics_weights"); it != section.end()) {
        const Vector w = vector_at(section, path, "physics_weights");
        if (w.size() != 5) fail(path + ".physics_weights", "expected 5 entries");
        for (int i = 0; i < 5; ++i) cfg.physics_weights[i] = w[i];
    }
    if (const auto it = section.find("boundary_weights"); it != section.end()) {
        const Vector w = vector_at(section, path, "boundary_weights");
        if (w.size() != 4) fail(path + ".boundary_weights", "expected 4 entries");
        for (int i = 0; i < 4; ++i) cfg.boundary_weights[i] = w[i];
    }
    cfg.batch_size = static_cast<int>(integer_or(section, path, "batch_size", 0));
    cfg.learning_rate = number_or(section, path, "learning_rate", cfg.learning_rate);
    cfg.max_epochs = static_cast<int>(integer_or(section, path, "max_epochs", cfg.max_epochs));
    cfg.tolerance = number_or(section, path, "tolerance", cfg.tolerance);
    if (const auto it = section.find("hidden_widths"); it != section.end()) {
        const Vector w = vector_at(section, path, "hidden_widths");
        cfg.hidden_widths.clear();
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            cfg.hidden_widths.push_back(static_cast<int>(w[i]));
        }
    }
    return cfg;
}

void parse_controller_section(const json& section, ScenarioBundle& bundle) {
    const std::string path = "controller";
    reject_unknown(section, path, {"gains", "funnel"});
    if (section.contains("gains")) {
        const Vector gains = vector_at(section, path, "gains");
        bundle.gains.kappa.assign(gains.data(), gains.data() + gains.size());
        bundle.gains.validate();
    }
    if (const auto it = section.find("funnel"); it != section.end()) {
        const std::string sub = path + ".funnel";
        reject_unknown(*it, sub, {"final_halfwidth", "decay_rate", "initial_scale"});
        bundle.funnel.final_halfwidth =
            number_or(*it, sub, "final_halfwidth", bundle.funnel.final_halfwidth);
        bundle.funnel.decay_rate = number_or(*it, sub, "decay_rate", bundle.funnel.decay_rate);
        bundle.funnel.initial_scale =
            number_or(*it, sub, "initial_scale", bundle.funnel.initial_scale);
    }
    if (bundle.funnel.decay_rate <= 0.0) {
        bundle.funnel.decay_rate = 2.0 / bundle.scenario.prescribed_time;
    }
}

void parse_simulation_section(const json& section, ScenarioBundle& bundle) {
    const std::string path = "simulation";
    reject_unknown(section, path, {"seed", "step", "disturbance_bound", "plant"});
    bundle.simulation.seed = static_cast<std::uint64_t>(integer_at(section, path, "seed"));
    bundle.simulation.step =
        number_or(section, path, "step", 1e-3 * bundle.scenario.prescribed_time);
    bundle.simulation.t_end = bundle.scenario.prescribed_time;
    const json& bound = require_key(section, path, "disturbance_bound");
    if (bound.is_number()) {
        bundle.simulation.disturbance_bound = {bound.get<double>()};
    } else if (bound.is_array()) {
        for (std::size_t i = 0; i < bound.size(); ++i) {
            bundle.simulation.disturbance_bound.push_back(
                as_number(bound[i], path + ".disturbance_bound[" + std::to_string(i) + "]"));
        }
    } else {
        fail(path + ".disturbance_bound", "expected a number or an array");
    }

    const json& plant = require_key(section, path, "plant");
    const std::string sub = path + ".plant";
    bundle.plant.type = require_key(plant, sub, "type").get<std::string>();
    if (bundle.plant.type == "omnibot") {
        reject_unknown(plant, sub, {"type", "heading", "initial_output"});
        bundle.plant.heading = number_or(plant, sub, "heading", 0.0);
    } else if (bundle.plant.type == "quadrotor") {
        reject_unknown(plant, sub, {"type", "initial_output", "initial_velocity"});
        if (plant.contains("initial_velocity")) {
            bundle.plant.initial_velocity = vector_at(plant, sub, "initial_velocity");
        } else {
            bundle.plant.initial_velocity = Vector::Zero(bundle.scenario.dimension);
        }
    } else {
        fail(sub + ".type", "expected \"omnibot\" or \"quadrotor\"");
    }
    if (plant.contains("initial_output")) {
        bundle.plant.initial_output = vector_at(plant, sub, "initial_output");
    } else {
        bundle.plant.initial_output = bundle.scenario.start.center;
    }
    if (bundle.plant.initial_output.size() != bundle.scenario.dimension) {
        fail(sub + ".initial_output", "dimension mismatch");
    }
}

}  // namespace

ScenarioBundle parse_scenario_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        throw FormatError(std::string("scenario file is not valid JSON: ") + err.what());
    }
    reject_unknown(doc, "(root)", {"scenario", "training", "controller", "simulation"});

    ScenarioBundle bundle;
    bundle.scenario = parse_scenario_section(require_key(doc, "(root)", "scenario"));
    validate(bundle.scenario);
    bundle.training =
        parse_training_section(require_key(doc, "(root)", "training"), bundle.scenario);
    parse_controller_section(require_key(doc, "(root)", "controller"), bundle);
    parse_simulation_section(require_key(doc, "(root)", "simulation"), bundle);
    if (bundle.gains.kappa.empty()) {
        // unit gain per stage of the selected plant
        bundle.gains.kappa.assign(bundle.plant.type == "quadrotor" ? 2 : 1, 1.0);
    }
    return bundle;
}

ScenarioBundle parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::ios_base::failure("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str());
}

namespace {

ordered_json ball_json(const Ball& ball) {
    ordered_json out;
    out["center"] = std::vector<double>(ball.center.data(), ball.center.data() + ball.center.size());
    out["radius"] = ball.radius;
    return out;
}

ordered_json obstacle_json(const Obstacle& obs) {
    ordered_json out;
    if (const auto* ball = std::get_if<BallShape>(&obs.shape)) {
        out["shape"] = {{"type", "ball"},
                        {"center", std::vector<double>(ball->center.data(),
                                                       ball->center.data() + ball->center.size())},
                        {"radius", ball->radius}};
    } else {
        const auto& box = std::get<BoxShape>(obs.shape);
        out["shape"] = {{"type", "box"},
                        {"min", std::vector<double>(box.lo.data(), box.lo.data() + box.lo.size())},
                        {"max", std::vector<double>(box.hi.data(), box.hi.data() + box.hi.size())}};
    }
    if (const auto* motion = std::get_if<SinusoidalMotion>(&obs.motion)) {
        out["motion"] = {{"type", "sinusoidal"},
                         {"axis", motion->axis},
                         {"amplitude", motion->amplitude},
                         {"angular_frequency", motion->omega},
                         {"phase", motion->phase}};
    } else {
        out["motion"] = {{"type", "static"}};
    }
    return out;
}

}  // namespace

std::string serialize_scenario(const ScenarioBundle& bundle) {
    ordered_json doc;
    ordered_json& scen = doc["scenario"];
    scen["dimension"] = bundle.scenario.dimension;
    scen["space"] = ball_json(bundle.scenario.space);
    scen["start"] = ball_json(bundle.scenario.start);
    scen["target"] = ball_json(bundle.scenario.target);
    scen["prescribed_time"] = bundle.scenario.prescribed_time;
    scen["min_radius"] = bundle.scenario.min_radius;
    scen["obstacles"] = ordered_json::array();
    for (const Obstacle& obs : bundle.scenario.obstacles) {
        scen["obstacles"].push_back(obstacle_json(obs));
    }

    ordered_json& training = doc["training"];
    training["seed"] = bundle.training.seed;
    training["epsilon"] = bundle.training.epsilon;
    training["center_rate_budget"] = bundle.training.center_rate_budget;
    training["radius_rate_budget"] = bundle.training.radius_rate_budget;
    training["physics_weights"] = bundle.training.physics_weights;
    training["boundary_weights"] = bundle.training.boundary_weights;
    training["batch_size"] = bundle.training.batch_size;
    training["learning_rate"] = bundle.training.learning_rate;
    training["max_epochs"] = bundle.training.max_epochs;
    training["tolerance"] = bundle.training.tolerance;
    training["hidden_widths"] = bundle.training.hidden_widths;

    ordered_json& controller = doc["controller"];
    controller["gains"] = bundle.gains.kappa;
    controller["funnel"] = {{"final_halfwidth", bundle.funnel.final_halfwidth},
                            {"decay_rate", bundle.funnel.decay_rate},
                            {"initial_scale", bundle.funnel.initial_scale}};

    ordered_json& simulation = doc["simulation"];
    simulation["seed"] = bundle.simulation.seed;
    simulation["step"] = bundle.simulation.step;
    simulation["disturbance_bound"] = bundle.simulation.disturbance_bound;
    ordered_json plant;
    plant["type"] = bundle.plant.type;
    if (bundle.plant.type == "omnibot") {
        plant["heading"] = bundle.plant.heading;
    }
    plant["initial_output"] = std::vector<double>(
        bundle.plant.initial_output.data(),
        bundle.plant.initial_output.data() + bundle.plant.initial_output.size());
    if (bundle.plant.type == "quadrotor") {
        plant["initial_velocity"] = std::vector<double>(
            bundle.plant.initial_velocity.data(),
            bundle.plant.initial_velocity.data() + bundle.plant.initial_velocity.size());
    }
    simulation["plant"] = std::move(plant);
    return doc.dump(2) + "\n";
}

PlantModel make_plant(const PlantSpec& plant, const TrasScenario& scen) {
    if (plant.type == "omnibot") {
        if (scen.dimension != 2) {
            throw InvariantError("omnibot scenarios must be 2-dimensional");
        }
        Eigen::Vector3d pose;
        pose << plant.initial_output[0], plant.initial_output[1], plant.heading;
        return omnibot_model(pose);
    }
    if (plant.type == "quadrotor") {
        if (scen.dimension != 3) {
            throw InvariantError("quadrotor scenarios must be 3-dimensional");
        }
        return quadrotor_model(plant.initial_output, plant.initial_velocity);
    }
    throw InvariantError("unknown plant type: " + plant.type);
}

}  // namespace pinstt
