#include "replab/config.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "replab/io.hpp"

namespace replab {

namespace {

struct KeyDef {
  const char* section;
  const char* key;
  const char* def;  // default value; nullptr means optional-without-default
};

// The full schema. Values are kept as strings; typed getters parse on access.
const KeyDef kSchema[] = {
    {"experiment", "seed", "1"},
    {"experiment", "model_file", nullptr},
    {"experiment", "substitute_file", nullptr},
    {"experiment", "targets", nullptr},
    {"experiment", "target_protos", nullptr},
    {"experiment", "dims", "5,25,50"},

    {"data", "kind", "gaussians"},
    {"data", "k", "5"},
    {"data", "input_dim", "10"},
    {"data", "center_spread", "1"},
    {"data", "sigma", "0.08"},
    {"data", "n_per_class", "700"},
    {"data", "noise", "0.05"},
    {"data", "file", nullptr},
    {"data", "train_fraction", "0.8"},

    {"prototypes", "file", nullptr},
    {"prototypes", "metric", "L2"},
    {"prototypes", "D", "50"},
    {"prototypes", "r", "1"},
    {"prototypes", "mu", "0.01"},
    {"prototypes", "epochs", "100"},
    {"prototypes", "eps", "1"},
    {"prototypes", "bound", nullptr},

    {"model", "hidden", "64,64"},

    {"training", "regime", "repulsive"},
    {"training", "loss", "squared_distance"},
    {"training", "epochs", "40"},
    {"training", "batch_size", "64"},
    {"training", "momentum", "0.9"},
    {"training", "schedule", "constant"},
    {"training", "lr", "0.01"},
    {"training", "lr_base", "0.001"},
    {"training", "lr_max", "0.02"},
    {"training", "cycle_epochs", "10"},
    {"training", "decay_epochs", "50,100"},
    {"training", "decay_factor", "0.1"},
    {"training", "alpha", "0"},
    {"training", "adv_base", "softmax"},
    {"training", "early_stop", "false"},
    {"training", "eval_every", "5"},
    {"training", "patience", "3"},
    {"training", "es_subset", "200"},
    {"training", "es_iters", "5"},
    {"training", "augment", "false"},

    {"attack", "metric", "Linf"},
    {"attack", "eps", "0.1"},
    {"attack", "eps_mode", "absolute"},
    {"attack", "step_size", "0"},
    {"attack", "iters", "20"},
    {"attack", "restarts", "1"},
    {"attack", "init", "uniform"},
    {"attack", "surrogate", "auto"},
    {"attack", "domain_lo", "0"},
    {"attack", "domain_hi", "1"},

    {"evaluation", "eps_list", "0,0.05,0.1,0.15,0.2"},
    {"evaluation", "max_samples", "0"},
};

const KeyDef* find_key(const std::string& section, const std::string& key) {
  for (const KeyDef& def : kSchema) {
    if (section == def.section && key == def.key) return &def;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  for (const KeyDef& def : kSchema) {
    if (def.def) values_[def.section][def.key] = def.def;
  }
}

void ExperimentConfig::check_known(const std::string& section, const std::string& key) const {
  if (!find_key(section, key)) {
    throw std::invalid_argument("config: unknown key '" + section + "." + key + "'");
  }
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unterminated section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) {
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty section");
      }
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    }
    if (section.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": key outside any [section]");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    cfg.check_known(section, key);
    cfg.values_[section][key] = value;
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  return from_text(read_file(path));
}

void ExperimentConfig::apply_override(const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("override '" + assignment + "': expected section.key=value");
  }
  const std::string path = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const size_t dot = path.find('.');
  if (dot == std::string::npos) {
    throw std::invalid_argument("override '" + assignment + "': key must be section.key");
  }
  const std::string section = path.substr(0, dot);
  const std::string key = path.substr(dot + 1);
  check_known(section, key);
  values_[section][key] = value;
}

bool ExperimentConfig::has(const std::string& section, const std::string& key) const {
  check_known(section, key);
  const auto sit = values_.find(section);
  if (sit == values_.end()) return false;
  const auto kit = sit->second.find(key);
  return kit != sit->second.end() && !kit->second.empty();
}

std::string ExperimentConfig::get_string(const std::string& section,
                                         const std::string& key) const {
  check_known(section, key);
  const auto sit = values_.find(section);
  if (sit != values_.end()) {
    const auto kit = sit->second.find(key);
    if (kit != sit->second.end()) return kit->second;
  }
  throw std::invalid_argument("config: missing required key '" + section + "." + key + "'");
}

long long ExperimentConfig::get_int(const std::string& section, const std::string& key) const {
  return parse_int(get_string(section, key), "config " + section + "." + key);
}

double ExperimentConfig::get_double(const std::string& section, const std::string& key) const {
  return parse_double(get_string(section, key), "config " + section + "." + key);
}

bool ExperimentConfig::get_bool(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config " + section + "." + key + ": bad boolean '" + v + "'");
}

std::vector<double> ExperimentConfig::get_double_list(const std::string& section,
                                                      const std::string& key) const {
  std::vector<double> out;
  for (const std::string& f : split_fields(get_string(section, key), ',')) {
    out.push_back(parse_double(trim(f), "config " + section + "." + key));
  }
  return out;
}

std::vector<int> ExperimentConfig::get_int_list(const std::string& section,
                                                const std::string& key) const {
  std::vector<int> out;
  for (const std::string& f : split_fields(get_string(section, key), ',')) {
    out.push_back(static_cast<int>(parse_int(trim(f), "config " + section + "." + key)));
  }
  return out;
}

void ExperimentConfig::set(const std::string& section, const std::string& key,
                           const std::string& value) {
  check_known(section, key);
  values_[section][key] = value;
}

std::string ExperimentConfig::resolved_text() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, keys] : values_) {
    if (!first) out << "\n";
    first = false;
    out << "[" << section << "]\n";
    for (const auto& [key, value] : keys) {
      out << key << " = " << value << "\n";
    }
  }
  return out.str();
}

}  // namespace replab
