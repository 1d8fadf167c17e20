#include "spdgyro/cliconfig.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace spdgyro {

namespace {

std::string strip(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw UsageError("config: key '" + key + "' expects an integer, got '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw UsageError("config: key '" + key + "' expects a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw UsageError("config: key '" + key + "' expects true/false, got '" + value + "'");
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string trimmed = strip(line);
    if (trimmed.empty()) continue;
    const size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << path << ":" << lineno << ": expected 'key = value'";
      throw ParseError(os.str());
    }
    const std::string key = strip(trimmed.substr(0, eq));
    const std::string value = strip(trimmed.substr(eq + 1));
    if (key.empty()) {
      std::ostringstream os;
      os << path << ":" << lineno << ": empty key";
      throw ParseError(os.str());
    }
    kv[key] = value;
  }
  return kv;
}

void apply_config(const std::map<std::string, std::string>& kv, TrainConfig& cfg) {
  for (const auto& [key, value] : kv) {
    if (key == "epochs") cfg.epochs = static_cast<int>(parse_int(key, value));
    else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_int(key, value));
    else if (key == "negatives") cfg.negatives = static_cast<int>(parse_int(key, value));
    else if (key == "lr") cfg.lr = parse_double(key, value);
    else if (key == "weight_decay") cfg.weight_decay = parse_double(key, value);
    else if (key == "burn_in_epochs") cfg.burn_in_epochs = static_cast<int>(parse_int(key, value));
    else if (key == "burn_in_factor") cfg.burn_in_factor = parse_double(key, value);
    else if (key == "plateau_patience")
      cfg.plateau_patience = static_cast<int>(parse_int(key, value));
    else if (key == "plateau_factor") cfg.plateau_factor = parse_double(key, value);
    else if (key == "early_stop_patience")
      cfg.early_stop_patience = static_cast<int>(parse_int(key, value));
    else if (key == "eval_interval") cfg.eval_interval = static_cast<int>(parse_int(key, value));
    else if (key == "seed") cfg.seed = static_cast<uint64_t>(parse_int(key, value));
    else if (key == "n") cfg.n = static_cast<int>(parse_int(key, value));
    else if (key == "model") cfg.model_kind = model_kind_from_name(value);
    else if (key == "metric") cfg.metric = metric_from_name(value);
    else if (key == "deterministic") cfg.deterministic = parse_bool(key, value);
    else if (key == "threads") cfg.threads = static_cast<int>(parse_int(key, value));
    else if (key == "grad_clip") cfg.grad_clip = parse_double(key, value);
    else throw UsageError("config: unknown key '" + key + "'");
  }
}

}  // namespace spdgyro
