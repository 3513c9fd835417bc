#include "gaitlab/config.hpp"

#include "gaitlab/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace gaitlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  require(ec == std::errc() && p == v.data() + v.size(), ErrorKind::Config,
          key + ": '" + v + "' is not a number");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  require(ec == std::errc() && p == v.data() + v.size(), ErrorKind::Config,
          key + ": '" + v + "' is not an integer");
  return x;
}

std::string show(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& items, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + f(items[i]);
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& item : split(v, ',')) out.push_back(static_cast<int>(to_int(key, item)));
  return out;
}

std::vector<int> to_dims(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (auto item : split(v, ',')) {
    if (item == "2d" || item == "2D") item = "2";
    if (item == "3d" || item == "3D") item = "3";
    out.push_back(static_cast<int>(to_int(key, item)));
  }
  return out;
}

std::vector<AngleGroup> to_groups(const std::string& key, const std::string& v) {
  std::vector<AngleGroup> out;
  for (const auto& item : split(v, ',')) {
    try {
      out.push_back(parse_angle_group(item));
    } catch (const Error& e) {
      fail(ErrorKind::Config, key + ": " + e.what());
    }
  }
  return out;
}

struct Field {
  std::string key;
  std::function<void(LabConfig&, const std::string&)> set;
  std::function<std::string(const LabConfig&)> get;
};

#define GAITLAB_REAL(KEY, EXPR)                                                         \
  Field {                                                                               \
    KEY, [](LabConfig& c, const std::string& v) { c.EXPR = to_double(KEY, v); },        \
        [](const LabConfig& c) { return show(c.EXPR); }                                 \
  }
#define GAITLAB_INT(KEY, EXPR)                                                                        \
  Field {                                                                                             \
    KEY, [](LabConfig& c, const std::string& v) { c.EXPR = static_cast<int>(to_int(KEY, v)); },       \
        [](const LabConfig& c) { return std::to_string(c.EXPR); }                                     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"seed",
            [](LabConfig& c, const std::string& v) {
              const long long s = to_int("seed", v);
              require(s >= 0, ErrorKind::Config, "seed: must be non-negative");
              c.experiment.master_seed = static_cast<std::uint64_t>(s);
            },
            [](const LabConfig& c) { return std::to_string(c.experiment.master_seed); }},
      Field{"angle_groups",
            [](LabConfig& c, const std::string& v) { c.experiment.angle_groups = to_groups("angle_groups", v); },
            [](const LabConfig& c) {
              return join<AngleGroup>(c.experiment.angle_groups, [](const AngleGroup& g) { return g.label(); });
            }},
      Field{"videos_per_class",
            [](LabConfig& c, const std::string& v) {
              c.experiment.videos_per_class = static_cast<int>(to_int("videos_per_class", v));
            },
            [](const LabConfig& c) { return std::to_string(c.experiment.videos_per_class); }},
      Field{"duration_s",
            [](LabConfig& c, const std::string& v) {
              c.simulation.duration_s = c.experiment.duration_s = to_double("duration_s", v);
            },
            [](const LabConfig& c) { return show(c.simulation.duration_s); }},
      Field{"fps",
            [](LabConfig& c, const std::string& v) {
              c.simulation.fps = c.experiment.fps = static_cast<int>(to_int("fps", v));
            },
            [](const LabConfig& c) { return std::to_string(c.simulation.fps); }},
      Field{"skeleton.affected",
            [](LabConfig& c, const std::string& v) { c.skeleton.affected = split(v, ','); },
            [](const LabConfig& c) {
              return c.skeleton.affected.empty()
                         ? std::string("hip_rear_left")
                         : join<std::string>(c.skeleton.affected, [](const std::string& s) { return s; });
            }},
      GAITLAB_REAL("gait.period_min_s", simulation.gait.period_min_s),
      GAITLAB_REAL("gait.period_max_s", simulation.gait.period_max_s),
      GAITLAB_REAL("gait.amplitude_jitter", simulation.gait.amplitude_jitter),
      GAITLAB_REAL("gait.hip_bob_m", simulation.gait.hip_bob_m),
      GAITLAB_REAL("gait.swing_rad", simulation.gait.swing_rad),
      GAITLAB_REAL("gait.flex_rad", simulation.gait.flex_rad),
      GAITLAB_REAL("gait.foot_rad", simulation.gait.foot_rad),
      GAITLAB_REAL("gait.paw_lift_m", simulation.gait.paw_lift_m),
      GAITLAB_REAL("gait.spine_bob_m", simulation.gait.spine_bob_m),
      GAITLAB_REAL("gait.lame_amplitude_scale", simulation.gait.lame_amplitude_scale),
      GAITLAB_REAL("gait.lame_phase_shift", simulation.gait.lame_phase_shift),
      GAITLAB_REAL("camera.elevation_min_deg", simulation.camera.elevation_min_deg),
      GAITLAB_REAL("camera.elevation_max_deg", simulation.camera.elevation_max_deg),
      GAITLAB_REAL("camera.distance_min_m", simulation.camera.distance_min_m),
      GAITLAB_REAL("camera.distance_max_m", simulation.camera.distance_max_m),
      GAITLAB_REAL("camera.focal_length", simulation.camera.focal_length),
      GAITLAB_REAL("camera.principal_u", simulation.camera.principal_point.x()),
      GAITLAB_REAL("camera.principal_v", simulation.camera.principal_point.y()),
      GAITLAB_REAL("camera.look_at_z", simulation.camera.look_at.z()),
      GAITLAB_REAL("scene.density_per_m2", simulation.scene.density_per_m2),
      GAITLAB_REAL("scene.area_m2", simulation.scene.area_m2),
      GAITLAB_REAL("scene.dog_speed_mps", simulation.scene.dog_speed_mps),
      GAITLAB_REAL("scene.sphere_radius_min", simulation.scene.sphere_radius_min),
      GAITLAB_REAL("scene.sphere_radius_max", simulation.scene.sphere_radius_max),
      GAITLAB_REAL("scene.box_half_min", simulation.scene.box_half_min),
      GAITLAB_REAL("scene.box_half_max", simulation.scene.box_half_max),
      GAITLAB_REAL("scene.min_volume", simulation.scene.min_volume),
      GAITLAB_REAL("scene.max_volume", simulation.scene.max_volume),
      GAITLAB_REAL("scene.corridor_margin_m", simulation.scene.corridor_margin_m),
      Field{"timesteps",
            [](LabConfig& c, const std::string& v) { c.experiment.timesteps = to_int_list("timesteps", v); },
            [](const LabConfig& c) {
              return join<int>(c.experiment.timesteps, [](const int& t) { return std::to_string(t); });
            }},
      Field{"dimensionalities",
            [](LabConfig& c, const std::string& v) { c.experiment.dimensionalities = to_dims("dimensionalities", v); },
            [](const LabConfig& c) {
              return join<int>(c.experiment.dimensionalities, [](const int& d) { return std::to_string(d); });
            }},
      GAITLAB_INT("k_folds", experiment.k_folds),
      GAITLAB_REAL("validation_fraction", experiment.validation_fraction),
      GAITLAB_INT("model.hidden", experiment.hidden),
      GAITLAB_REAL("train.learning_rate", experiment.train.learning_rate),
      GAITLAB_REAL("train.weight_decay", experiment.train.weight_decay),
      GAITLAB_INT("train.batch_size", experiment.train.batch_size),
      GAITLAB_INT("train.max_epochs", experiment.train.max_epochs),
      GAITLAB_INT("train.patience", experiment.train.patience),
      GAITLAB_REAL("train.beta1", experiment.train.beta1),
      GAITLAB_REAL("train.beta2", experiment.train.beta2),
      GAITLAB_REAL("train.epsilon", experiment.train.epsilon),
      GAITLAB_REAL("train.min_improvement", experiment.train.min_improvement),
  };
  return table;
}

#undef GAITLAB_REAL
#undef GAITLAB_INT

}  // namespace

LabConfig::LabConfig() {
  experiment.angle_groups = {{0, 90}, {90, 180}, {180, 270}, {270, 360}};
}

void LabConfig::set(const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(*this, value);
      // The experiment reads 2D projections around the same point the camera aims at.
      experiment.look_at = simulation.camera.look_at;
      return;
    }
  }
  fail(ErrorKind::Config, "unknown key '" + key + "'");
}

std::string LabConfig::snapshot() const {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(*this) + "\n";
  return out;
}

void LabConfig::validate() const {
  experiment.validate();
  const auto& cam = simulation.camera;
  require(cam.elevation_min_deg <= cam.elevation_max_deg, ErrorKind::Config,
          "camera.elevation_min_deg: exceeds camera.elevation_max_deg");
  require(cam.distance_min_m > 0.0 && cam.distance_min_m <= cam.distance_max_m, ErrorKind::Config,
          "camera.distance_min_m: must be positive and at most camera.distance_max_m");
  require(cam.focal_length > 0.0, ErrorKind::Config, "camera.focal_length: must be positive");
  const auto& g = simulation.gait;
  require(g.period_min_s > 0.0 && g.period_min_s <= g.period_max_s, ErrorKind::Config,
          "gait.period_min_s: must be positive and at most gait.period_max_s");
  require(g.amplitude_jitter >= 0.0 && g.amplitude_jitter < 1.0, ErrorKind::Config,
          "gait.amplitude_jitter: must lie in [0, 1)");
  const auto& s = simulation.scene;
  require(s.density_per_m2 >= 0.0, ErrorKind::Config, "scene.density_per_m2: must be non-negative");
  require(s.area_m2 > 0.0, ErrorKind::Config, "scene.area_m2: must be positive");
  require(s.sphere_radius_min > 0.0 && s.sphere_radius_min <= s.sphere_radius_max, ErrorKind::Config,
          "scene.sphere_radius_min: must be positive and at most scene.sphere_radius_max");
  require(s.box_half_min > 0.0 && s.box_half_min <= s.box_half_max, ErrorKind::Config,
          "scene.box_half_min: must be positive and at most scene.box_half_max");
  require(s.min_volume < s.max_volume, ErrorKind::Config, "scene.min_volume: must be below scene.max_volume");
  try {
    build_skeleton(skeleton);
  } catch (const Error& e) {
    fail(ErrorKind::Config, std::string("skeleton.affected: ") + e.what());
  }
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

LabConfig parse_config(const std::string& text) {
  LabConfig config;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::Config,
            "line " + std::to_string(number) + ": expected 'key = value'");
    config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  config.validate();
  return config;
}

LabConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot read config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void apply_grid_subset(ExperimentConfig& config, const std::string& subset) {
  for (const auto& part : split(subset, ';')) {
    const auto eq = part.find('=');
    require(eq != std::string::npos, ErrorKind::Config, "grid-subset: '" + part + "' is not key=values");
    const std::string key = trim(part.substr(0, eq));
    const std::string values = trim(part.substr(eq + 1));
    if (key == "groups") {
      const auto chosen = to_groups("grid-subset groups", values);
      for (const auto& g : chosen)
        require(std::find(config.angle_groups.begin(), config.angle_groups.end(), g) != config.angle_groups.end(),
                ErrorKind::Config, "grid-subset groups: " + g.label() + " is not a configured angle group");
      config.angle_groups = chosen;
    } else if (key == "timesteps") {
      config.timesteps = to_int_list("grid-subset timesteps", values);
    } else if (key == "dims") {
      config.dimensionalities = to_dims("grid-subset dims", values);
    } else {
      fail(ErrorKind::Config, "grid-subset: unknown key '" + key + "'");
    }
  }
  config.validate();
}

}  // namespace gaitlab
