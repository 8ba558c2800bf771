#include "rismec/config_io.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <sstream>

namespace rismec {

double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

double as_double(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) bad(path, "expected a number");
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    bad(path, "expected a number, got '" + n.Scalar() + "'");
  }
}

int as_int(const YAML::Node& n, const std::string& path) {
  const double v = as_double(n, path);
  if (v != std::floor(v) || std::abs(v) > 1e9) bad(path, "expected an integer");
  return static_cast<int>(v);
}

bool as_bool(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) bad(path, "expected true or false");
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    bad(path, "expected true or false, got '" + n.Scalar() + "'");
  }
}

std::string as_string(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) bad(path, "expected a string");
  return n.Scalar();
}

std::vector<double> as_list(const YAML::Node& n, const std::string& path) {
  std::vector<double> out;
  if (n.IsScalar()) {
    out.push_back(as_double(n, path));
    return out;
  }
  if (!n.IsSequence()) bad(path, "expected a number or a list of numbers");
  for (std::size_t i = 0; i < n.size(); ++i)
    out.push_back(as_double(n[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// Scalars broadcast to every user; lists must have one entry per user.
std::vector<double> per_user(const YAML::Node& n, const std::string& path, int K) {
  std::vector<double> v = as_list(n, path);
  if (n.IsScalar()) return std::vector<double>(K, v.front());
  if (static_cast<int>(v.size()) != K)
    bad(path, "needs " + std::to_string(K) + " entries, got " + std::to_string(v.size()));
  return v;
}

using Setter = std::function<void(const YAML::Node&, const std::string&)>;

void apply_table(const YAML::Node& table, const std::string& prefix,
                 const std::map<std::string, Setter>& setters) {
  if (!table.IsMap()) bad(prefix, "expected a table");
  for (const auto& kv : table) {
    const std::string key = kv.first.Scalar();
    const std::string path = prefix + "." + key;
    const auto it = setters.find(key);
    if (it == setters.end()) bad(path, "unknown key");
    it->second(kv.second, path);
  }
}

Setter num(double& x) {
  return [&x](const YAML::Node& n, const std::string& p) { x = as_double(n, p); };
}
Setter integer(int& x) {
  return [&x](const YAML::Node& n, const std::string& p) { x = as_int(n, p); };
}
Setter flag(bool& x) {
  return [&x](const YAML::Node& n, const std::string& p) { x = as_bool(n, p); };
}

void apply_link(const YAML::Node& t, const std::string& prefix, LinkSpec& l) {
  apply_table(t, prefix,
              {{"exponent", num(l.exponent)},
               {"rician", num(l.rician)},
               {"rician_db", [&](const YAML::Node& n, const std::string& p) {
                  l.rician = db_to_lin(as_double(n, p));
                }},
               {"ris_gain", flag(l.ris_gain)}});
}

void apply_system(const YAML::Node& t, SystemConfig& c) {
  if (!t.IsMap()) bad("system", "expected a table");
  for (const char* key : {"n_aps", "n_users", "n_antennas", "n_elements"})
    if (t[key]) {
      const int v = as_int(t[key], std::string("system.") + key);
      if (std::string(key) == "n_aps") c.n_aps = v;
      if (std::string(key) == "n_antennas") c.n_antennas = v;
      if (std::string(key) == "n_elements") c.n_elements = v;
      if (std::string(key) == "n_users") {
        if (v < 1) bad("system.n_users", "must be >= 1");
        const double p = c.user_power_w.empty() ? 0.5 : c.user_power_w.front();
        const double g = c.sinr_target_lin.empty() ? 10.0 : c.sinr_target_lin.front();
        c.n_users = v;
        c.set_uniform_user_power(p);
        c.set_uniform_sinr_target(g);
      }
    }
  const int K = c.n_users;
  auto skip = [](const YAML::Node&, const std::string&) {};
  apply_table(
      t, "system",
      {{"n_aps", skip},
       {"n_users", skip},
       {"n_antennas", skip},
       {"n_elements", skip},
       {"bandwidth_hz", num(c.bandwidth_hz)},
       {"user_power_w",
        [&](const YAML::Node& n, const std::string& p) { c.user_power_w = per_user(n, p, K); }},
       {"user_power_dbm",
        [&](const YAML::Node& n, const std::string& p) {
          c.user_power_w = per_user(n, p, K);
          for (double& x : c.user_power_w) x = dbm_to_watt(x);
        }},
       {"ap_max_power_w", num(c.ap_max_power_w)},
       {"ap_max_power_dbm",
        [&](const YAML::Node& n, const std::string& p) { c.ap_max_power_w = dbm_to_watt(as_double(n, p)); }},
       {"cycles_per_bit", num(c.cycles_per_bit)},
       {"kappa_user", num(c.kappa_user)},
       {"kappa_ap", num(c.kappa_ap)},
       {"ap_total_freq_hz", num(c.ap_total_freq_hz)},
       {"slot_s", num(c.slot_s)},
       {"latency_cap_s", num(c.latency_cap_s)},
       {"task_bits", num(c.task_bits)},
       {"sinr_target_lin",
        [&](const YAML::Node& n, const std::string& p) { c.sinr_target_lin = per_user(n, p, K); }},
       {"sinr_target_db",
        [&](const YAML::Node& n, const std::string& p) {
          c.sinr_target_lin = per_user(n, p, K);
          for (double& x : c.sinr_target_lin) x = db_to_lin(x);
        }},
       {"noise_ap_w", num(c.noise_ap_w)},
       {"noise_ap_dbm",
        [&](const YAML::Node& n, const std::string& p) { c.noise_ap_w = dbm_to_watt(as_double(n, p)); }},
       {"noise_user_w", num(c.noise_user_w)},
       {"noise_user_dbm",
        [&](const YAML::Node& n, const std::string& p) { c.noise_user_w = dbm_to_watt(as_double(n, p)); }},
       {"group_budget",
        [&](const YAML::Node& n, const std::string& p) {
          if (n.IsNull())
            c.group_budget.reset();
          else
            c.group_budget = as_double(n, p);
        }},
       {"phase", [&](const YAML::Node& n, const std::string& p) {
          apply_table(n, p,
                      {{"beta_min", num(c.phase.beta_min)},
                       {"phi", num(c.phase.phi)},
                       {"alpha", num(c.phase.alpha)}});
        }}});
}

void apply_experiment(const YAML::Node& t, ExperimentSpec& s) {
  auto sweep_from = [](const YAML::Node& n, const std::string& p) {
    Sweep sw;
    apply_table(n, p,
                {{"variable", [&](const YAML::Node& v, const std::string& q) { sw.variable = as_string(v, q); }},
                 {"values", [&](const YAML::Node& v, const std::string& q) {
                    if (!v.IsSequence()) bad(q, "expected a list of numbers");
                    sw.values = as_list(v, q);
                  }}});
    if (sw.variable.empty()) bad(p + ".variable", "missing");
    return sw;
  };
  apply_table(
      t, "experiment",
      {{"id", [](const YAML::Node&, const std::string&) {}},  // read before everything else
       {"trials", integer(s.trials)},
       {"threads", integer(s.threads)},
       {"seed",
        [&](const YAML::Node& n, const std::string& p) {
          const double v = as_double(n, p);
          if (v < 0 || v != std::floor(v) || v > 9.007199254740992e15)
            bad(p, "expected a nonnegative integer");
          s.seed = n.as<std::uint64_t>();
        }},
       {"modes",
        [&](const YAML::Node& n, const std::string& p) {
          if (!n.IsSequence()) bad(p, "expected a list of mode names");
          s.modes.clear();
          for (std::size_t i = 0; i < n.size(); ++i) {
            const std::string m = as_string(n[i], p);
            if (m != "am_es") {
              try {
                parse_mode(m);
              } catch (const std::invalid_argument&) {
                bad(p, "unknown mode '" + m + "'");
              }
            }
            s.modes.push_back(m);
          }
        }},
       {"sweep", [&](const YAML::Node& n, const std::string& p) { s.sweeps = {sweep_from(n, p)}; }},
       {"sweeps",
        [&](const YAML::Node& n, const std::string& p) {
          if (!n.IsSequence()) bad(p, "expected a list of sweeps");
          s.sweeps.clear();
          for (std::size_t i = 0; i < n.size(); ++i)
            s.sweeps.push_back(sweep_from(n[i], p + "[" + std::to_string(i) + "]"));
        }},
       {"series_power_w",
        [&](const YAML::Node& n, const std::string& p) { s.series_power_w = as_list(n, p); }},
       {"fixed_distance_m", num(s.fixed_distance_m)}});
}

void apply_network(const YAML::Node& t, NetworkSpec& net) {
  apply_table(t, "network",
              {{"region_side_m", num(net.region_side_m)},
               {"ap_height_m", num(net.ap_height_m)},
               {"user_height_m", num(net.user_height_m)},
               {"ris_pos", [&](const YAML::Node& n, const std::string& p) {
                  const std::vector<double> v = as_list(n, p);
                  if (v.size() != 3 || !n.IsSequence()) bad(p, "expected [x, y, z]");
                  net.ris_pos = {v[0], v[1], v[2]};
                }}});
}

void apply_fading(const YAML::Node& t, FadingSpec& f) {
  apply_table(t, "fading",
              {{"ref_loss", num(f.ref_loss)},
               {"ref_loss_db",
                [&](const YAML::Node& n, const std::string& p) { f.ref_loss = db_to_lin(as_double(n, p)); }},
               {"element_gain", num(f.element_gain)},
               {"element_gain_db",
                [&](const YAML::Node& n, const std::string& p) { f.element_gain = db_to_lin(as_double(n, p)); }},
               {"reciprocal", flag(f.reciprocal)},
               {"ap_ris", [&](const YAML::Node& n, const std::string& p) { apply_link(n, p, f.ap_ris); }},
               {"ap_user", [&](const YAML::Node& n, const std::string& p) { apply_link(n, p, f.ap_user); }},
               {"ris_user", [&](const YAML::Node& n, const std::string& p) { apply_link(n, p, f.ris_user); }}});
}

void apply_driver(const YAML::Node& t, DriverOptions& d) {
  apply_table(t, "driver",
              {{"w0", num(d.w0)},
               {"growth", num(d.growth)},
               {"w_max", num(d.w_max)},
               {"rel_tol", num(d.rel_tol)},
               {"max_outer", integer(d.max_outer)},
               {"max_failures", integer(d.max_failures)},
               {"feasibility_only_phase", flag(d.feasibility_only_phase)},
               {"group_budget_active", flag(d.group_budget_active)},
               {"inner_tol", num(d.inner_tol)},
               {"inner_max", integer(d.inner_max)},
               {"init_rounds", integer(d.init_rounds)}});
}

void apply_penalty(const YAML::Node& t, PenaltyParams& pp) {
  apply_table(t, "penalty",
              {{"mu0", num(pp.mu0)},
               {"growth", num(pp.growth)},
               {"eps1", num(pp.eps1)},
               {"eps2", num(pp.eps2)},
               {"max_outer", integer(pp.max_outer)},
               {"max_inner", integer(pp.max_inner)},
               {"y_cap", num(pp.y_cap)}});
}

}  // namespace

ExperimentSpec parse_spec(const std::string& yaml_text, std::optional<ExperimentId> id) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("config: expected a table at the top level");
  const YAML::Node exp = root["experiment"];
  if (exp && !exp.IsMap()) throw ConfigError("experiment: expected a table");
  if (exp && exp["id"]) {
    const std::string name = as_string(exp["id"], "experiment.id");
    ExperimentId in_file;
    try {
      in_file = parse_experiment_id(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("experiment.id: ") + e.what());
    }
    if (id && *id != in_file)
      throw ConfigError("experiment.id: file says '" + name + "' but '" + to_string(*id) +
                        "' was requested");
    id = in_file;
  }
  if (!id) throw ConfigError("experiment.id: missing");
  ExperimentSpec s = default_spec(*id);
  for (const auto& kv : root) {
    const std::string key = kv.first.Scalar();
    if (key == "experiment")
      apply_experiment(kv.second, s);
    else if (key == "system")
      apply_system(kv.second, s.base);
    else if (key == "network")
      apply_network(kv.second, s.network);
    else if (key == "fading")
      apply_fading(kv.second, s.fading);
    else if (key == "driver")
      apply_driver(kv.second, s.driver);
    else if (key == "penalty")
      apply_penalty(kv.second, s.driver.penalty);
    else
      throw ConfigError(key + ": unknown table");
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

ExperimentSpec load_spec(const std::string& path, std::optional<ExperimentId> id) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_spec(ss.str(), id);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string dump_spec(const ExperimentSpec& s) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;

  e << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "id" << YAML::Value << to_string(s.id);
  e << YAML::Key << "trials" << YAML::Value << s.trials;
  e << YAML::Key << "seed" << YAML::Value << s.seed;
  e << YAML::Key << "threads" << YAML::Value << s.threads;
  e << YAML::Key << "modes" << YAML::Value << YAML::Flow << s.modes;
  e << YAML::Key << "sweeps" << YAML::Value << YAML::BeginSeq;
  for (const Sweep& sw : s.sweeps) {
    e << YAML::BeginMap << YAML::Key << "variable" << YAML::Value << sw.variable;
    e << YAML::Key << "values" << YAML::Value << YAML::Flow << sw.values << YAML::EndMap;
  }
  e << YAML::EndSeq;
  e << YAML::Key << "series_power_w" << YAML::Value << YAML::Flow << s.series_power_w;
  e << YAML::Key << "fixed_distance_m" << YAML::Value << s.fixed_distance_m;
  e << YAML::EndMap;

  const SystemConfig& c = s.base;
  e << YAML::Key << "system" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n_aps" << YAML::Value << c.n_aps;
  e << YAML::Key << "n_users" << YAML::Value << c.n_users;
  e << YAML::Key << "n_antennas" << YAML::Value << c.n_antennas;
  e << YAML::Key << "n_elements" << YAML::Value << c.n_elements;
  e << YAML::Key << "bandwidth_hz" << YAML::Value << c.bandwidth_hz;
  e << YAML::Key << "user_power_w" << YAML::Value << YAML::Flow << c.user_power_w;
  e << YAML::Key << "ap_max_power_w" << YAML::Value << c.ap_max_power_w;
  e << YAML::Key << "cycles_per_bit" << YAML::Value << c.cycles_per_bit;
  e << YAML::Key << "kappa_user" << YAML::Value << c.kappa_user;
  e << YAML::Key << "kappa_ap" << YAML::Value << c.kappa_ap;
  e << YAML::Key << "ap_total_freq_hz" << YAML::Value << c.ap_total_freq_hz;
  e << YAML::Key << "slot_s" << YAML::Value << c.slot_s;
  e << YAML::Key << "latency_cap_s" << YAML::Value << c.latency_cap_s;
  e << YAML::Key << "task_bits" << YAML::Value << c.task_bits;
  e << YAML::Key << "sinr_target_lin" << YAML::Value << YAML::Flow << c.sinr_target_lin;
  e << YAML::Key << "noise_ap_w" << YAML::Value << c.noise_ap_w;
  e << YAML::Key << "noise_user_w" << YAML::Value << c.noise_user_w;
  e << YAML::Key << "group_budget" << YAML::Value;
  if (c.group_budget)
    e << *c.group_budget;
  else
    e << YAML::Null;
  e << YAML::Key << "phase" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "beta_min" << YAML::Value << c.phase.beta_min;
  e << YAML::Key << "phi" << YAML::Value << c.phase.phi;
  e << YAML::Key << "alpha" << YAML::Value << c.phase.alpha;
  e << YAML::EndMap << YAML::EndMap;

  e << YAML::Key << "network" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "region_side_m" << YAML::Value << s.network.region_side_m;
  e << YAML::Key << "ap_height_m" << YAML::Value << s.network.ap_height_m;
  e << YAML::Key << "user_height_m" << YAML::Value << s.network.user_height_m;
  e << YAML::Key << "ris_pos" << YAML::Value << YAML::Flow << std::vector<double>(s.network.ris_pos.begin(), s.network.ris_pos.end());
  e << YAML::EndMap;

  auto link = [&](const char* name, const LinkSpec& l) {
    e << YAML::Key << name << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "exponent" << YAML::Value << l.exponent;
    e << YAML::Key << "rician" << YAML::Value << l.rician;
    e << YAML::Key << "ris_gain" << YAML::Value << l.ris_gain;
    e << YAML::EndMap;
  };
  e << YAML::Key << "fading" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "ref_loss" << YAML::Value << s.fading.ref_loss;
  e << YAML::Key << "element_gain" << YAML::Value << s.fading.element_gain;
  e << YAML::Key << "reciprocal" << YAML::Value << s.fading.reciprocal;
  link("ap_ris", s.fading.ap_ris);
  link("ap_user", s.fading.ap_user);
  link("ris_user", s.fading.ris_user);
  e << YAML::EndMap;

  const DriverOptions& d = s.driver;
  e << YAML::Key << "driver" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "w0" << YAML::Value << d.w0;
  e << YAML::Key << "growth" << YAML::Value << d.growth;
  e << YAML::Key << "w_max" << YAML::Value << d.w_max;
  e << YAML::Key << "rel_tol" << YAML::Value << d.rel_tol;
  e << YAML::Key << "max_outer" << YAML::Value << d.max_outer;
  e << YAML::Key << "max_failures" << YAML::Value << d.max_failures;
  e << YAML::Key << "feasibility_only_phase" << YAML::Value << d.feasibility_only_phase;
  e << YAML::Key << "group_budget_active" << YAML::Value << d.group_budget_active;
  e << YAML::Key << "inner_tol" << YAML::Value << d.inner_tol;
  e << YAML::Key << "inner_max" << YAML::Value << d.inner_max;
  e << YAML::Key << "init_rounds" << YAML::Value << d.init_rounds;
  e << YAML::EndMap;

  const PenaltyParams& p = d.penalty;
  e << YAML::Key << "penalty" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "mu0" << YAML::Value << p.mu0;
  e << YAML::Key << "growth" << YAML::Value << p.growth;
  e << YAML::Key << "eps1" << YAML::Value << p.eps1;
  e << YAML::Key << "eps2" << YAML::Value << p.eps2;
  e << YAML::Key << "max_outer" << YAML::Value << p.max_outer;
  e << YAML::Key << "max_inner" << YAML::Value << p.max_inner;
  e << YAML::Key << "y_cap" << YAML::Value << p.y_cap;
  e << YAML::EndMap;

  e << YAML::EndMap;
  // 17 digits round-trip but read badly; rewrite each decimal in its shortest form.
  static const std::regex decimal(R"(-?\d+\.\d+(e[-+]?\d+)?)");
  const std::string raw = e.c_str();
  std::string out;
  auto last = raw.cbegin();
  for (std::sregex_iterator it(raw.begin(), raw.end(), decimal), end; it != end; ++it) {
    out.append(last, (*it)[0].first);
    out += format_value(std::stod(it->str()));
    last = (*it)[0].second;
  }
  out.append(last, raw.cend());
  return out + "\n";
}

}  // namespace rismec
