#include "mecrelay/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mecrelay/schemes.hpp"

namespace mecrelay::config {

using nlohmann::json;

namespace {

/// Walks one JSON object, handing each known key to its reader and rejecting
/// everything else.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <class F>
  void opt(const char* key, F&& read) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      read(*it, path_ + "." + key);
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where() + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path + ": must be finite");
  return x;
}

double positive(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (!(x > 0.0)) throw ConfigError(path + ": must be positive");
  return x;
}

double non_negative(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (x < 0.0) throw ConfigError(path + ": must be >= 0");
  return x;
}

std::uint64_t unsigned_int(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
    throw ConfigError(path + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

scenario::Range range(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(path + ": expected [lo, hi]");
  scenario::Range r{positive(v[0], path + "[0]"), positive(v[1], path + "[1]")};
  if (r.lo > r.hi) throw ConfigError(path + ": lo exceeds hi");
  return r;
}

json range_json(const scenario::Range& r) { return json::array({r.lo, r.hi}); }

std::string path_loss_token(scenario::PathLossModelId id) {
  return id == scenario::PathLossModelId::FreeSpace ? "free_space" : "cost231_hata_urban";
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

void validate_run(const RunConfig& cfg) {
  if (cfg.drops < 1) throw ConfigError("drops: must be >= 1");
  if (cfg.tmax_grid.empty()) throw ConfigError("tmax_grid_s: must not be empty");
  for (double t : cfg.tmax_grid) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("tmax_grid_s: values must be positive");
  }
  for (std::size_t i = 1; i < cfg.tmax_grid.size(); ++i) {
    if (!(cfg.tmax_grid[i] > cfg.tmax_grid[i - 1])) throw ConfigError("tmax_grid_s: must be strictly ascending");
  }
  if (cfg.schemes.empty()) throw ConfigError("schemes: must not be empty");
  std::set<SchemeId> uniq(cfg.schemes.begin(), cfg.schemes.end());
  if (uniq.size() != cfg.schemes.size()) throw ConfigError("schemes: duplicate entry");
  if (cfg.min_node_distance_m < 0.0) throw ConfigError("geometry.min_node_distance_m: must be >= 0");
  if (cfg.si_cancellation_db < 0.0) throw ConfigError("si_cancellation_db: must be >= 0");
  if (cfg.out_dir.empty()) throw ConfigError("output.out_dir: must not be empty");
  try {
    harness::check(to_experiment(cfg));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("radio: ") + e.what());
  }
}

}  // namespace

RadioParams RadioConfig::to_params() const {
  RadioParams p;
  p.bandwidth_max = bandwidth_max_hz;
  p.power_max = power_max_mw * 1e-3;
  p.noise_psd = dbm_to_watt(noise_psd_dbm_hz);
  p.background_interference_psd = dbm_to_watt(background_interference_dbm_hz);
  p.carrier_freq = carrier_freq_hz;
  return p;
}

std::vector<SchemeId> parse_scheme_list(const std::string& csv) {
  std::vector<SchemeId> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    if (tok == "all") {
      out.assign(std::begin(kAllSchemes), std::end(kAllSchemes));
      continue;
    }
    auto id = parse_scheme(tok);
    if (!id) throw ConfigError("unknown scheme '" + tok + "'");
    out.push_back(*id);
  }
  if (out.empty()) throw ConfigError("scheme list is empty");
  return out;
}

std::vector<double> parse_number_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw ConfigError("not a number: '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("number list is empty");
  return out;
}

RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  ObjectReader top(j, "");

  top.opt("seed", [&](const json& v, const std::string& p) { cfg.seed = unsigned_int(v, p); });
  top.opt("drops", [&](const json& v, const std::string& p) { cfg.drops = unsigned_int(v, p); });
  top.opt("workers", [&](const json& v, const std::string& p) {
    cfg.workers = static_cast<unsigned>(unsigned_int(v, p));
  });
  top.opt("tmax_grid_s", [&](const json& v, const std::string& p) {
    if (!v.is_array()) throw ConfigError(p + ": expected an array");
    cfg.tmax_grid.clear();
    for (std::size_t i = 0; i < v.size(); ++i) cfg.tmax_grid.push_back(positive(v[i], p));
  });
  top.opt("schemes", [&](const json& v, const std::string& p) {
    if (!v.is_array()) throw ConfigError(p + ": expected an array of scheme tokens");
    cfg.schemes.clear();
    for (const auto& s : v) {
      auto id = parse_scheme(s.get<std::string>());
      if (!id) throw ConfigError(p + ": unknown scheme '" + s.get<std::string>() + "'");
      cfg.schemes.push_back(*id);
    }
  });
  top.opt("radio", [&](const json& v, const std::string& p) {
    ObjectReader r(v, p);
    auto& rc = cfg.radio;
    r.opt("bandwidth_max_hz", [&](const json& x, const std::string& q) { rc.bandwidth_max_hz = positive(x, q); });
    r.opt("power_max_mw", [&](const json& x, const std::string& q) { rc.power_max_mw = positive(x, q); });
    r.opt("noise_psd_dbm_hz", [&](const json& x, const std::string& q) { rc.noise_psd_dbm_hz = number(x, q); });
    r.opt("background_interference_dbm_hz",
          [&](const json& x, const std::string& q) { rc.background_interference_dbm_hz = number(x, q); });
    r.opt("carrier_freq_hz", [&](const json& x, const std::string& q) { rc.carrier_freq_hz = positive(x, q); });
    r.finish();
  });
  top.opt("task", [&](const json& v, const std::string& p) {
    ObjectReader r(v, p);
    auto& t = cfg.task;
    r.opt("data_bits", [&](const json& x, const std::string& q) { t.data_bits = range(x, q); });
    r.opt("cycles_per_bit", [&](const json& x, const std::string& q) { t.cycles_per_bit = range(x, q); });
    r.opt("ue_speed_hz", [&](const json& x, const std::string& q) { t.ue_speed = range(x, q); });
    r.opt("distance_m", [&](const json& x, const std::string& q) { t.distance = range(x, q); });
    r.opt("server_speed_hz", [&](const json& x, const std::string& q) { t.server_speed = positive(x, q); });
    r.finish();
  });
  top.opt("geometry", [&](const json& v, const std::string& p) {
    ObjectReader r(v, p);
    r.opt("relay_zones", [&](const json& x, const std::string& q) {
      if (!x.is_array() || x.size() != 2) throw ConfigError(q + ": expected two zones");
      for (std::size_t i = 0; i < 2; ++i) {
        const std::string zq = q + "[" + std::to_string(i) + "]";
        ObjectReader z(x[i], zq);
        auto& zone = cfg.relay_zones[i];
        z.opt("x_from", [&](const json& y, const std::string& w) { zone.x_from = non_negative(y, w); });
        z.opt("x_to", [&](const json& y, const std::string& w) { zone.x_to = non_negative(y, w); });
        z.opt("half_width_m", [&](const json& y, const std::string& w) { zone.half_width = non_negative(y, w); });
        z.finish();
      }
    });
    r.opt("min_node_distance_m",
          [&](const json& x, const std::string& q) { cfg.min_node_distance_m = non_negative(x, q); });
    r.finish();
  });
  top.opt("path_loss", [&](const json& v, const std::string& p) {
    ObjectReader r(v, p);
    auto& pl = cfg.path_loss;
    r.opt("model", [&](const json& x, const std::string& q) {
      const auto s = x.get<std::string>();
      if (s == "cost231_hata_urban")
        pl.model_id = scenario::PathLossModelId::Cost231HataUrban;
      else if (s == "free_space")
        pl.model_id = scenario::PathLossModelId::FreeSpace;
      else
        throw ConfigError(q + ": expected 'cost231_hata_urban' or 'free_space'");
    });
    r.opt("bs_height_m", [&](const json& x, const std::string& q) { pl.bs_height = positive(x, q); });
    r.opt("min_distance_clamp_m",
          [&](const json& x, const std::string& q) { pl.min_distance_clamp = non_negative(x, q); });
    r.opt("shadowing_sigma_db",
          [&](const json& x, const std::string& q) { pl.shadowing_sigma_db = non_negative(x, q); });
    r.finish();
  });
  top.opt("si_cancellation_db",
          [&](const json& v, const std::string& p) { cfg.si_cancellation_db = non_negative(v, p); });
  top.opt("common_set", [&](const json& v, const std::string& p) {
    try {
      cfg.common_set = harness::parse_common_set(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(p + ": " + e.what());
    }
  });
  top.opt("output", [&](const json& v, const std::string& p) {
    ObjectReader r(v, p);
    r.opt("out_dir", [&](const json& x, const std::string&) { cfg.out_dir = x.get<std::string>(); });
    r.opt("write_drops", [&](const json& x, const std::string&) { cfg.write_drops = x.get<bool>(); });
    r.finish();
  });
  top.opt("oracle_mode", [&](const json& v, const std::string&) { cfg.oracle_mode = v.get<bool>(); });
  top.finish();

  validate_run(cfg);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& cfg) {
  json schemes = json::array();
  for (SchemeId id : cfg.schemes) schemes.push_back(std::string(scheme_token(id)));
  json zones = json::array();
  for (const auto& z : cfg.relay_zones)
    zones.push_back({{"x_from", z.x_from}, {"x_to", z.x_to}, {"half_width_m", z.half_width}});

  return {
      {"seed", cfg.seed},
      {"drops", cfg.drops},
      {"workers", cfg.workers},
      {"tmax_grid_s", cfg.tmax_grid},
      {"schemes", schemes},
      {"radio",
       {{"bandwidth_max_hz", cfg.radio.bandwidth_max_hz},
        {"power_max_mw", cfg.radio.power_max_mw},
        {"noise_psd_dbm_hz", cfg.radio.noise_psd_dbm_hz},
        {"background_interference_dbm_hz", cfg.radio.background_interference_dbm_hz},
        {"carrier_freq_hz", cfg.radio.carrier_freq_hz}}},
      {"task",
       {{"data_bits", range_json(cfg.task.data_bits)},
        {"cycles_per_bit", range_json(cfg.task.cycles_per_bit)},
        {"ue_speed_hz", range_json(cfg.task.ue_speed)},
        {"distance_m", range_json(cfg.task.distance)},
        {"server_speed_hz", cfg.task.server_speed}}},
      {"geometry", {{"relay_zones", zones}, {"min_node_distance_m", cfg.min_node_distance_m}}},
      {"path_loss",
       {{"model", path_loss_token(cfg.path_loss.model_id)},
        {"bs_height_m", cfg.path_loss.bs_height},
        {"min_distance_clamp_m", cfg.path_loss.min_distance_clamp},
        {"shadowing_sigma_db", cfg.path_loss.shadowing_sigma_db}}},
      {"si_cancellation_db", cfg.si_cancellation_db},
      {"common_set", harness::common_set_token(cfg.common_set)},
      {"output", {{"out_dir", cfg.out_dir}, {"write_drops", cfg.write_drops}}},
      {"oracle_mode", cfg.oracle_mode},
  };
}

scenario::DropConfig to_drop_config(const RunConfig& cfg) {
  scenario::DropConfig d;
  d.radio = cfg.radio.to_params();
  d.path_loss = cfg.path_loss;
  d.zones = cfg.relay_zones;
  d.ranges = cfg.task;
  d.si_cancellation_db = cfg.si_cancellation_db;
  d.min_node_distance = cfg.min_node_distance_m;
  return d;
}

harness::ExperimentConfig to_experiment(const RunConfig& cfg) {
  harness::ExperimentConfig e;
  e.seed = cfg.seed;
  e.drops = cfg.drops;
  e.tmax_grid = cfg.tmax_grid;
  e.schemes = cfg.schemes;
  e.drop = to_drop_config(cfg);
  e.common_set = cfg.common_set;
  e.workers = cfg.workers;
  e.oracle_check = cfg.oracle_mode;
  return e;
}

}  // namespace mecrelay::config
