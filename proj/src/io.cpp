#include "gesched/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "gesched/errors.hpp"

namespace gesched {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(std::string_view key, std::string_view value, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" +
                          std::string(value) + "'",
                      line);
  }
  return v;
}

int parse_int(std::string_view key, std::string_view value, std::size_t line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("'" + std::string(key) + "' expects an integer, got '" +
                          std::string(value) + "'",
                      line);
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view value, std::size_t line) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("'" + std::string(key) + "' expects true or false", line);
}

}  // namespace

void apply_setting(RunConfig& c, std::string_view key, std::string_view value,
                   std::size_t line) {
  key = trim(key);
  value = trim(value);
  auto& p = c.params;
  auto& s = c.solver;
  if (key == "a") {
    p.a = parse_real(key, value, line);
  } else if (key == "p01") {
    p.p01 = parse_real(key, value, line);
  } else if (key == "p11") {
    p.p11 = parse_real(key, value, line);
  } else if (key == "lambda") {
    p.lambda = parse_real(key, value, line);
  } else if (key == "beta") {
    p.beta = parse_real(key, value, line);
  } else if (key == "allow_memoryless_violation") {
    p.allow_memoryless_violation = parse_bool(key, value, line);
  } else if (key == "e_max") {
    s.e_max = parse_real(key, value, line);
  } else if (key == "n_error") {
    s.n_error = parse_int(key, value, line);
  } else if (key == "n_belief") {
    s.n_belief = parse_int(key, value, line);
  } else if (key == "vi_tolerance") {
    s.vi_tolerance = parse_real(key, value, line);
  } else if (key == "max_iterations") {
    s.max_iterations = parse_int(key, value, line);
  } else if (key == "quadrature") {
    if (value != "grid-trapezoid") {
      throw ConfigError("quadrature must be 'grid-trapezoid'", line);
    }
    s.quadrature = Quadrature::grid_trapezoid;
  } else {
    throw ConfigError("unknown key '" + std::string(key) + "'", line);
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("expected 'key = value'", line_no);
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (!seen.emplace(key).second) {
      throw ConfigError("duplicate key '" + std::string(key) + "'", line_no);
    }
    apply_setting(c, key, line.substr(eq + 1), line_no);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& c) {
  const auto& p = c.params;
  const auto& s = c.solver;
  // to_chars at 17 digits so that a manifest reproduces the run exactly.
  auto exact = [](double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  return {
      {"a", exact(p.a)},
      {"p01", exact(p.p01)},
      {"p11", exact(p.p11)},
      {"lambda", exact(p.lambda)},
      {"beta", exact(p.beta)},
      {"allow_memoryless_violation", p.allow_memoryless_violation ? "true" : "false"},
      {"e_max", exact(s.e_max)},
      {"n_error", std::to_string(s.n_error)},
      {"n_belief", std::to_string(s.n_belief)},
      {"vi_tolerance", exact(s.vi_tolerance)},
      {"max_iterations", std::to_string(s.max_iterations)},
      {"quadrature", "grid-trapezoid"},
  };
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : to_key_values(config)) out += k + " = " + v + "\n";
  return out;
}

void write_table_csv(std::ostream& os, const Grids& grids, const Table2D& table) {
  os << "e\\b";
  for (double b : grids.belief.points) os << ',' << format_number(b);
  os << '\n';
  for (std::size_t i = 0; i < grids.error.size(); ++i) {
    os << format_number(grids.error.points[i]);
    for (double v : table.row(i)) os << ',' << format_number(v);
    os << '\n';
  }
}

void write_q_tables_csv(std::ostream& os, const Grids& grids, const QTable& q,
                        const PolicyTable& policy) {
  os << "e,b,q0,q1,transmit\n";
  for (std::size_t i = 0; i < grids.error.size(); ++i) {
    for (std::size_t j = 0; j < grids.belief.size(); ++j) {
      os << format_number(grids.error.points[i]) << ','
         << format_number(grids.belief.points[j]) << ',' << format_number(q.q0(i, j))
         << ',' << format_number(q.q1(i, j)) << ',' << (policy.at(i, j) ? 1 : 0)
         << '\n';
    }
  }
}

void write_thresholds_csv(std::ostream& os, const ThresholdProfile& profile) {
  os << "e,b_star\n";
  for (std::size_t i = 0; i < profile.b_star.size(); ++i) {
    os << format_number(profile.grids.error.points[i]) << ',';
    if (profile.b_star[i]) os << format_number(*profile.b_star[i]);
    os << '\n';
  }
}

void write_trace_csv(std::ostream& os, const EpisodeTrace& trace) {
  os << "t,x,xhat,e,c,b,u,z,cost\n";
  for (const auto& r : trace.steps) {
    os << r.t << ',' << format_number(r.x) << ',' << format_number(r.xhat) << ','
       << format_number(r.e) << ',' << static_cast<int>(r.c) << ','
       << format_number(r.b) << ',' << static_cast<int>(r.u) << ',';
    if (r.z) os << static_cast<int>(*r.z);
    os << ',' << format_number(r.cost) << '\n';
  }
}

void write_stats_csv(std::ostream& os, const std::vector<SimStats>& stats,
                     const Comparison* comparison) {
  os << "policy,n_episodes,horizon,mean_cost,std_error,estimation_cost,power_cost,"
        "transmit_rate,tail_bound";
  if (comparison) os << ",diff_vs_first,diff_se";
  os << '\n';
  for (std::size_t k = 0; k < stats.size(); ++k) {
    const auto& s = stats[k];
    os << s.policy << ',' << s.n_episodes << ',' << s.horizon << ','
       << format_number(s.mean_cost) << ',' << format_number(s.std_error) << ','
       << format_number(s.mean_estimation_cost) << ','
       << format_number(s.mean_power_cost) << ',' << format_number(s.transmit_rate)
       << ',' << format_number(s.tail_bound);
    if (comparison) {
      os << ',' << format_number(comparison->diff_mean[k]) << ','
         << format_number(comparison->diff_se[k]);
    }
    os << '\n';
  }
}

nlohmann::ordered_json to_json(const RunConfig& config) {
  nlohmann::ordered_json j;
  const auto& p = config.params;
  const auto& s = config.solver;
  j["params"] = {{"a", p.a},
                 {"p01", p.p01},
                 {"p11", p.p11},
                 {"lambda", p.lambda},
                 {"beta", p.beta},
                 {"allow_memoryless_violation", p.allow_memoryless_violation}};
  j["solver"] = {{"e_max", s.e_max},
                 {"n_error", s.n_error},
                 {"n_belief", s.n_belief},
                 {"vi_tolerance", s.vi_tolerance},
                 {"max_iterations", s.max_iterations},
                 {"quadrature", "grid-trapezoid"}};
  return j;
}

nlohmann::ordered_json solution_json(const RunConfig& config, const SolveResult& r) {
  nlohmann::ordered_json j = to_json(config);
  j["mode"] = to_string(r.value.grids.error.mode);
  j["iterations"] = r.value.iteration;
  j["residual"] = r.value.residual;
  j["error_bound"] = r.error_bound;
  j["max_kernel_mass_deficit"] = r.max_mass_deficit;
  j["error_grid"] = r.value.grids.error.points;
  j["belief_grid"] = r.value.grids.belief.points;
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.value.values.rows(); ++i) {
    const auto row = r.value.values.row(i);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["values"] = std::move(rows);
  return j;
}

}  // namespace gesched
