#include "terramap/app/config.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "terramap/defaults_json.hpp"
#include "terramap/error.hpp"

namespace terramap::app {

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

const char* type_label(const Json& v) {
  if (v.is_boolean()) return "a boolean";
  if (v.is_number_integer()) return "an integer";
  if (v.is_number()) return "a number";
  if (v.is_string()) return "a string";
  if (v.is_array()) return "an array";
  if (v.is_object()) return "an object";
  return "null";
}

void check_type(const Json& expected, const Json& given, const std::string& key) {
  bool ok = false;
  if (expected.is_boolean()) {
    ok = given.is_boolean();
  } else if (expected.is_number_integer()) {
    ok = given.is_number_integer();
  } else if (expected.is_number()) {
    ok = given.is_number();
  } else if (expected.is_string()) {
    ok = given.is_string();
  } else if (expected.is_array()) {
    ok = given.is_array();
    if (ok && !expected.empty()) {
      if (given.size() != expected.size()) {
        throw ConfigError(fmt::format("key '{}' must have {} elements, got {}", key,
                                      expected.size(), given.size()));
      }
      for (const auto& e : given) ok = ok && e.is_number();
    }
  }
  if (!ok) {
    throw ConfigError(
        fmt::format("key '{}' must be {}, got {}", key, type_label(expected), type_label(given)));
  }
}

void merge_into(Json& base, const Json& over, const std::string& prefix) {
  if (!over.is_object()) {
    throw ConfigError(prefix.empty() ? std::string("config document must be a JSON object")
                                     : fmt::format("key '{}' must be an object", prefix));
  }
  for (const auto& [k, v] : over.items()) {
    const std::string key = join(prefix, k);
    const auto it = base.find(k);
    if (it == base.end()) throw ConfigError(fmt::format("unknown key '{}'", key));
    if (it->is_object()) {
      merge_into(*it, v, key);
    } else {
      check_type(*it, v, key);
      *it = v;
    }
  }
}

Vec3 vec3(const Json& j) { return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>()); }

simkit::Primitive parse_primitive(const Json& j, const std::string& key) {
  if (!j.is_object()) throw ConfigError(fmt::format("key '{}' must be an object", key));
  simkit::Primitive p;
  bool has_kind = false;
  int rect = 0;
  for (const auto& [k, v] : j.items()) {
    const std::string sub = join(key, k);
    if (k == "kind") {
      if (!v.is_string()) throw ConfigError(fmt::format("key '{}' must be a string", sub));
      try {
        p.kind = simkit::parse_kind(v.get<std::string>());
      } catch (const InvalidInput& e) {
        throw ConfigError(fmt::format("key '{}': {}", sub, e.what()));
      }
      has_kind = true;
      continue;
    }
    double* field = nullptr;
    if (k == "x_min") field = &p.x_min;
    else if (k == "x_max") field = &p.x_max;
    else if (k == "y_min") field = &p.y_min;
    else if (k == "y_max") field = &p.y_max;
    else if (k == "height") field = &p.height;
    else if (k == "slope") field = &p.slope;
    if (!field) throw ConfigError(fmt::format("unknown key '{}'", sub));
    if (!v.is_number()) throw ConfigError(fmt::format("key '{}' must be a number", sub));
    *field = v.get<double>();
    if (k.rfind("x_", 0) == 0 || k.rfind("y_", 0) == 0) ++rect;
  }
  if (!has_kind || rect != 4) {
    throw ConfigError(fmt::format("key '{}' needs kind, x_min, x_max, y_min and y_max", key));
  }
  return p;
}

simkit::TerrainSpec parse_terrain(const Json& t) {
  const std::string family = t["family"].get<std::string>();
  const int level = t["level"].get<int>();
  simkit::TerrainSpec spec;
  if (family == "flat") {
  } else if (family == "gap_course") {
    simkit::GapCourseParams g;
    g.level = level;
    g.start = t["start"].get<double>();
    g.gaps = t["gaps"].get<int>();
    g.landing = t["landing"].get<double>();
    g.width = t["width"].get<double>();
    g.beam = t["beam"].get<bool>();
    spec = simkit::gap_course(g);
  } else if (family == "stepping_stones") {
    spec = simkit::stepping_stones(level, t["start"].get<double>(), t["length"].get<double>());
  } else if (family == "corridor") {
    spec = simkit::corridor(t["length"].get<double>(), t["width"].get<double>(),
                            t["wall_height"].get<double>());
  } else {
    throw ConfigError(fmt::format(
        "key 'terrain.family': unknown family '{}' (flat, gap_course, stepping_stones, corridor)",
        family));
  }
  spec.ground = t["ground"].get<double>();
  spec.gap_depth = t["gap_depth"].get<double>();
  const Json& prims = t["primitives"];
  for (std::size_t i = 0; i < prims.size(); ++i) {
    spec.primitives.push_back(parse_primitive(prims[i], fmt::format("terrain.primitives[{}]", i)));
  }
  spec.validate();
  return spec;
}

simkit::SensorModel parse_sensors(const Json& s) {
  simkit::SensorModel m;
  m.imu_rate = s["imu_rate"].get<double>();
  m.lidar_rate = s["lidar_rate"].get<double>();
  m.rays_per_scan = s["rays_per_scan"].get<int>();
  m.elevation_min = s["elevation_min"].get<double>();
  m.elevation_max = s["elevation_max"].get<double>();
  m.pattern_period = s["pattern_period"].get<int>();
  m.min_range = s["min_range"].get<double>();
  m.max_range = s["max_range"].get<double>();
  m.range_noise = s["range_noise"].get<double>();
  m.gyro_noise = s["gyro_noise"].get<double>();
  m.accel_noise = s["accel_noise"].get<double>();
  m.gyro_bias_walk = s["gyro_bias_walk"].get<double>();
  m.accel_bias_walk = s["accel_bias_walk"].get<double>();
  m.gyro_bias = vec3(s["gyro_bias"]);
  m.accel_bias = vec3(s["accel_bias"]);
  m.gravity = s["gravity"].get<double>();
  m.foot_pos_noise = s["foot_pos_noise"].get<double>();
  m.foot_vel_noise = s["foot_vel_noise"].get<double>();
  m.extrinsics.rot = so3_exp(vec3(s["extrinsics"]["rotation"]));
  m.extrinsics.trans = vec3(s["extrinsics"]["translation"]);
  if (s["noiseless"].get<bool>()) m = m.noiseless();
  m.validate();
  return m;
}

void parse_estimator(const Json& e, RunConfig& cfg) {
  auto& o = cfg.pipeline;
  const Json& n = e["noise"];
  o.noise.gyro_noise = n["gyro_noise"].get<double>();
  o.noise.accel_noise = n["accel_noise"].get<double>();
  o.noise.gyro_bias_walk = n["gyro_bias_walk"].get<double>();
  o.noise.accel_bias_walk = n["accel_bias_walk"].get<double>();
  o.noise.foot_stance_noise = n["foot_stance_noise"].get<double>();
  o.noise.foot_swing_noise = n["foot_swing_noise"].get<double>();
  o.noise.lidar_variance = n["lidar_variance"].get<double>();
  o.noise.contact_vel_variance = n["contact_vel_variance"].get<double>();
  o.noise.contact_pos_variance = n["contact_pos_variance"].get<double>();
  o.plane.neighbors = e["plane"]["neighbors"].get<std::size_t>();
  o.plane.max_plane_residual = e["plane"]["max_plane_residual"].get<double>();
  o.plane.max_neighbor_dist = e["plane"]["max_neighbor_dist"].get<double>();
  o.iekf.max_iterations = e["iekf"]["max_iterations"].get<int>();
  o.iekf.convergence = e["iekf"]["convergence"].get<double>();
  o.sor_k = e["sor_k"].get<std::size_t>();
  o.sor_sigma = e["sor_sigma"].get<double>();
  o.residual_voxel = e["residual_voxel"].get<double>();
  o.max_residual_points = e["max_residual_points"].get<std::size_t>();
  o.max_point_residual = e["max_point_residual"].get<double>();
  o.min_map_points = e["min_map_points"].get<std::size_t>();
  o.map_bucket = e["map_bucket"].get<double>();
  o.map_spacing = e["map_spacing"].get<double>();
  o.max_foot_age = e["max_foot_age"].get<double>();

  const Json& i = e["init"];
  cfg.init.gravity_window = i["gravity_window"].get<double>();
  cfg.init.rot_variance = i["rot_variance"].get<double>();
  cfg.init.pos_variance = i["pos_variance"].get<double>();
  cfg.init.vel_variance = i["vel_variance"].get<double>();
  cfg.init.accel_bias_variance = i["accel_bias_variance"].get<double>();
  cfg.init.gyro_bias_variance = i["gyro_bias_variance"].get<double>();
  cfg.init.foot_variance = i["foot_variance"].get<double>();
  cfg.init.gravity_variance = i["gravity_variance"].get<double>();

  if (o.plane.neighbors < 3) throw InvalidInput("estimator.plane.neighbors must be at least 3");
  if (o.iekf.max_iterations < 1) throw InvalidInput("estimator.iekf.max_iterations must be >= 1");
  if (!(cfg.init.gravity_window > 0.0)) throw InvalidInput("estimator.init.gravity_window must be positive");
}

}  // namespace

const Json& defaults_document() {
  static const Json doc = Json::parse(kDefaultsJson);
  return doc;
}

Json merge_config(const Json& base, const Json& overrides) {
  Json out = base;
  merge_into(out, overrides, "");
  return out;
}

RunConfig parse_config(const Json& doc) {
  RunConfig cfg;
  cfg.document = doc;
  try {
    const int version = doc["schema_version"].get<int>();
    if (version != kSchemaVersion) {
      throw ConfigError(fmt::format("key 'schema_version': unsupported version {} (expected {})",
                                    version, kSchemaVersion));
    }
    auto& sc = cfg.scenario;
    sc.seed = doc["seed"].get<std::uint64_t>();
    sc.duration = doc["duration"].get<double>();
    if (!(sc.duration > 0.0)) throw InvalidInput("duration must be positive");
    cfg.output = doc["output"].get<std::string>();

    sc.terrain = parse_terrain(doc["terrain"]);
    sc.terrain_resolution = doc["terrain"]["resolution"].get<double>();
    if (!(sc.terrain_resolution > 0.0)) throw InvalidInput("terrain.resolution must be positive");

    const Json& g = doc["gait"];
    sc.gait.frequency = g["frequency"].get<double>();
    sc.gait.duty = g["duty"].get<double>();
    sc.gait.step_length = g["step_length"].get<double>();
    sc.gait.base_height = g["base_height"].get<double>();
    sc.gait.swing_height = g["swing_height"].get<double>();
    sc.gait.bob = g["bob"].get<double>();
    sc.gait.roll = g["roll"].get<double>();
    sc.gait.pitch = g["pitch"].get<double>();
    sc.gait.validate();

    const Json& p = doc["path"];
    sc.path.start = Vec3(p["start"][0].get<double>(), p["start"][1].get<double>(), 0.0);
    sc.path.heading = p["heading"].get<double>();
    sc.path.speed = p["speed"].get<double>();
    sc.path.length = p["length"].get<double>();
    sc.path.ramp_time = p["ramp_time"].get<double>();
    sc.path.start_time = p["start_time"].get<double>();
    if (sc.path.speed < 0.0 || sc.path.ramp_time < 0.0 || sc.path.start_time < 0.0) {
      throw InvalidInput("path speed, ramp_time and start_time must be non-negative");
    }

    sc.sensors = parse_sensors(doc["sensors"]);

    parse_estimator(doc["estimator"], cfg);
    cfg.pipeline.extrinsics = sc.sensors.extrinsics;

    const Json& m = doc["map"];
    cfg.grid.size = vec3(m["size"]);
    cfg.grid.resolution = m["resolution"].get<double>();
    cfg.grid.cells();
    cfg.endpoint_extension = m["endpoint_extension"].get<double>();
    if (cfg.endpoint_extension < 0.0 || cfg.endpoint_extension >= cfg.grid.resolution) {
      throw InvalidInput("map.endpoint_extension must be in [0, resolution)");
    }
    const Json& occ = m["occupancy"];
    cfg.occupancy.p_hit = occ["p_hit"].get<double>();
    cfg.occupancy.p_miss = occ["p_miss"].get<double>();
    cfg.occupancy.t_low = occ["t_low"].get<double>();
    cfg.occupancy.t_high = occ["t_high"].get<double>();
    cfg.occupancy.tau_occ = occ["tau_occ"].get<double>();
    cfg.occupancy.validate();
    cfg.policy.pitch = m["policy_grid"]["pitch"].get<double>();
    cfg.policy.unknown_depth = m["policy_grid"]["unknown_depth"].get<double>();
    if (!(cfg.policy.pitch > 0.0)) throw InvalidInput("map.policy_grid.pitch must be positive");

    const Json& r = doc["rewards"];
    cfg.reward_dt = r["dt"].get<double>();
    if (!(cfg.reward_dt > 0.0)) throw InvalidInput("rewards.dt must be positive");
    for (int i = 0; i < rewards::kNumTerms; ++i) {
      const auto term = static_cast<rewards::Term>(i);
      cfg.weights[term] = r["weights"][std::string(rewards::term_name(term))].get<double>();
    }
    cfg.stencil.d1 = r["stencil"]["d1"].get<double>();
    cfg.stencil.d2 = r["stencil"]["d2"].get<double>();
    cfg.stencil.drop = r["stencil"]["drop"].get<double>();

    const Json& f = doc["features"];
    cfg.features.kinematics = f["kinematics"].get<bool>();
    cfg.features.sor = f["sor"].get<bool>();
    cfg.features.interpolation = f["interpolation"].get<bool>();
    cfg.pipeline.use_kinematics = cfg.features.kinematics;
    cfg.pipeline.use_sor = cfg.features.sor;

    cfg.eval.align = doc["evaluation"]["align"].get<bool>();
    cfg.eval.rpe_delta = doc["evaluation"]["rpe_delta"].get<double>();
    if (!(cfg.eval.rpe_delta > 0.0)) throw InvalidInput("evaluation.rpe_delta must be positive");
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed config document: {}", e.what()));
  }
  return cfg;
}

Json load_document(const std::optional<std::filesystem::path>& path) {
  if (!path) return defaults_document();
  std::ifstream in(*path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path->string()));
  Json overrides;
  try {
    overrides = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path->string(), e.what()));
  }
  return merge_config(defaults_document(), overrides);
}

}  // namespace terramap::app
