#include "otfs/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

namespace otfs {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
}

}  // namespace

std::vector<Detector> parse_detector_list(const std::string& csv) {
  std::vector<Detector> out;
  for (const auto& name : split_csv(csv)) {
    try {
      out.push_back(parse_detector(name));
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  }
  if (out.empty()) throw ConfigError("detector list is empty");
  return out;
}

LabConfig parse_config(std::istream& is) {
  LabConfig lab;
  SimConfig& cfg = lab.sim;
  bool l_max_set = false;
  bool c_set = false;

  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key '" + key + "' has no value");

    if (key == "M") cfg.M = to_int<int>(key, value);
    else if (key == "N") cfg.N = to_int<int>(key, value);
    else if (key == "P") cfg.P = to_int<int>(key, value);
    else if (key == "l_max") { cfg.l_max = to_int<int>(key, value); l_max_set = true; }
    else if (key == "k_max") cfg.k_max = to_int<int>(key, value);
    else if (key == "qam") cfg.qam = to_int<int>(key, value);
    else if (key == "snr_db") {
      cfg.snr_db.clear();
      for (const auto& s : split_csv(value)) cfg.snr_db.push_back(to_double(key, s));
    }
    else if (key == "frames") cfg.frames = to_int<int>(key, value);
    else if (key == "seed") cfg.seed = to_int<std::uint64_t>(key, value);
    else if (key == "detectors") cfg.detectors = parse_detector_list(value);
    else if (key == "T") cfg.T = to_int<int>(key, value);
    else if (key == "W") cfg.ddip.window = to_int<int>(key, value);
    else if (key == "epsilon") cfg.ddip.epsilon = to_double(key, value);
    else if (key == "lr") cfg.ddip.learning_rate = to_double(key, value);
    else if (key == "max_iter") cfg.ddip.max_iterations = to_int<int>(key, value);
    else if (key == "c") { cfg.ddip.c = to_double(key, value); c_set = true; }
    else if (key == "complexity_I") lab.complexity_iterations = to_int<int>(key, value);
    else if (key == "trial_frame") lab.trial_frame = to_int<int>(key, value);
    else if (key == "trial_snr_db") lab.trial_snr_db = to_double(key, value);
    else if (key == "delta_f") cfg.delta_f_hz = to_double(key, value);
    else if (key == "carrier") cfg.carrier_hz = to_double(key, value);
    else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }

  if (!l_max_set) cfg.l_max = cfg.M - 1;
  if (!c_set) {
    try {
      cfg.ddip.c = Constellation(cfg.qam).amplitude();
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  }
  return lab;
}

LabConfig load_config(const std::filesystem::path& path) {
  std::error_code ec;
  std::ifstream in;
  if (std::filesystem::is_regular_file(path, ec)) in.open(path);
  if (!in.is_open()) throw ConfigError("config not found: " + path.string());
  return parse_config(in);
}

}  // namespace otfs
