#include "gesched/report.hpp"

#include <algorithm>
#include <iostream>
#include <mutex>
#include <sstream>

#include "gesched/io.hpp"
#include "gesched/log.hpp"

namespace gesched {

namespace {

std::mutex sink_mutex;

WarningSink& sink() {
  static WarningSink s = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return s;
}

}  // namespace

WarningSink set_warning_sink(WarningSink next) {
  std::lock_guard lock(sink_mutex);
  WarningSink prev = std::move(sink());
  sink() = std::move(next);
  return prev;
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex);
  if (sink()) sink()(message);
}

CheckResult make_check(std::string name, double violation, std::string location,
                       double tolerance, std::string note) {
  return {std::move(name), violation <= tolerance, violation, std::move(location),
          tolerance, std::move(note)};
}

bool VerificationReport::overall() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.pass; });
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  auto it = std::find_if(checks.begin(), checks.end(),
                         [&](const CheckResult& c) { return c.name == name; });
  return it == checks.end() ? nullptr : &*it;
}

nlohmann::ordered_json VerificationReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["overall"] = overall();
  auto& out = doc["checks"];
  out = nlohmann::ordered_json::object();
  for (const auto& c : checks) {
    nlohmann::ordered_json entry;
    entry["pass"] = c.pass;
    entry["violation"] = c.violation;
    entry["location"] = c.location;
    entry["tolerance"] = c.tolerance;
    if (!c.note.empty()) entry["note"] = c.note;
    out[c.name] = std::move(entry);
  }
  return doc;
}

std::string VerificationReport::to_text() const {
  std::ostringstream os;
  std::size_t width = 0;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  for (const auto& c : checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name
       << std::string(width - c.name.size() + 2, ' ')
       << "violation=" << format_number(c.violation)
       << " tol=" << format_number(c.tolerance) << " at " << c.location;
    if (!c.note.empty()) os << "  [" << c.note << ']';
    os << '\n';
  }
  os << "overall: " << (overall() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

}  // namespace gesched
