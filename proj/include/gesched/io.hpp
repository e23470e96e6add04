#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gesched/model.hpp"
#include "gesched/sim.hpp"
#include "gesched/solver.hpp"

namespace gesched {

/// 12 significant digits, '.' decimal separator, independent of locale.
std::string format_number(double v);

/// Everything a flat config file can set.
struct RunConfig {
  ModelParams params;
  SolverConfig solver;

  bool operator==(const RunConfig&) const = default;
};

/// Parses `key = value` lines. Blank lines and '#' comments are skipped;
/// unknown keys, duplicates and malformed values throw a line-numbered
/// ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Applies one `key=value` setting (used for command-line overrides).
void apply_setting(RunConfig& config, std::string_view key, std::string_view value,
                   std::size_t line = 0);

/// Every key with its resolved value, in canonical order.
std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& config);
/// The same as config-file text; parse_config(to_text(c)) == c.
std::string to_text(const RunConfig& config);

/// Header row: belief grid; first column: error grid.
void write_table_csv(std::ostream& os, const Grids& grids, const Table2D& table);
/// Long format: e,b,q0,q1,transmit.
void write_q_tables_csv(std::ostream& os, const Grids& grids, const QTable& q,
                        const PolicyTable& policy);
/// e,b_star with an empty b_star for never-transmit rows.
void write_thresholds_csv(std::ostream& os, const ThresholdProfile& profile);
/// t,x,xhat,e,c,b,u,z,cost with an empty z when nothing was sent.
void write_trace_csv(std::ostream& os, const EpisodeTrace& trace);
/// One row per policy; diff columns are filled when a comparison is given.
void write_stats_csv(std::ostream& os, const std::vector<SimStats>& stats,
                     const Comparison* comparison = nullptr);

nlohmann::ordered_json to_json(const RunConfig& config);
/// Self-describing solution document: parameters, config, convergence data,
/// grids and the value table.
nlohmann::ordered_json solution_json(const RunConfig& config, const SolveResult& result);

}  // namespace gesched
