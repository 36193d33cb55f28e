#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "perr/cohort_io.hpp"
#include "perr/errors.hpp"
#include "perr/scenarios.hpp"

namespace perr {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_as(const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError("invalid value '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw DataError("invalid boolean '" + text + "'");
}

std::string b(bool v) { return v ? "true" : "false"; }

struct Field {
  std::function<std::string(const ScenarioSpec&)> get;
  std::function<void(ScenarioSpec&, const std::string&)> set;
};

// Ordered so written configs are stable.
const std::vector<std::pair<std::string, Field>>& fields() {
  using S = ScenarioSpec;
  auto num = [](double S::*m) {
    return Field{[m](const S& s) { return format_number(s.*m); },
                 [m](S& s, const std::string& v) { s.*m = parse_as<double>(v); }};
  };
  auto integer = [](int S::*m) {
    return Field{[m](const S& s) { return std::to_string(s.*m); },
                 [m](S& s, const std::string& v) { s.*m = parse_as<int>(v); }};
  };
  auto flag = [](bool S::*m) {
    return Field{[m](const S& s) { return b(s.*m); },
                 [m](S& s, const std::string& v) { s.*m = parse_bool(v); }};
  };
  static const std::vector<std::pair<std::string, Field>> f{
      {"name", {[](const S& s) { return s.name; }, [](S& s, const std::string& v) { s.name = v; }}},
      {"description",
       {[](const S& s) { return s.description; }, [](S& s, const std::string& v) { s.description = v; }}},
      {"n_prematch", integer(&S::n_prematch)},
      {"kappa1", num(&S::kappa1)},
      {"kappa2", num(&S::kappa2)},
      {"c0", num(&S::c0)},
      {"beta0", num(&S::beta0)},
      {"alpha1", num(&S::alpha1)},
      {"alpha2", num(&S::alpha2)},
      {"z_effect", num(&S::z_effect)},
      {"sigma_omega_sq", num(&S::sigma_omega_sq)},
      {"epsilon_var", num(&S::epsilon_var)},
      {"theta", num(&S::theta)},
      {"theta_second",
       {[](const S& s) { return s.theta_second ? format_number(*s.theta_second) : std::string("none"); },
        [](S& s, const std::string& v) {
          if (v == "none" || v.empty()) {
            s.theta_second.reset();
          } else {
            s.theta_second = parse_as<double>(v);
          }
        }}},
      {"delta", num(&S::delta)},
      {"beta", num(&S::beta)},
      {"tau_min", num(&S::tau_min)},
      {"tau_max", num(&S::tau_max)},
      {"confounder",
       {[](const S& s) { return to_string(s.confounder); },
        [](S& s, const std::string& v) { s.confounder = parse_confounder(v); }}},
      {"replicates", integer(&S::replicates)},
      {"seed",
       {[](const S& s) { return std::to_string(s.seed); },
        [](S& s, const std::string& v) { s.seed = parse_as<std::uint64_t>(v); }}},
      {"min_pairs", integer(&S::min_pairs)},
      {"window",
       {[](const S& s) {
          return s.window ? format_number(s.window->prior_days) + "/" + format_number(s.window->post_days)
                          : std::string("none");
        },
        [](S& s, const std::string& v) {
          if (v == "none") {
            s.window.reset();
            return;
          }
          const auto slash = v.find('/');
          if (slash == std::string::npos) throw DataError("window must be 'prior/post' or 'none'");
          s.window = AnalysisWindow{parse_as<double>(trim(v.substr(0, slash))),
                                    parse_as<double>(trim(v.substr(slash + 1)))};
        }}},
      {"run_original", flag(&S::run_original)},
      {"bootstrap_reps", integer(&S::bootstrap_reps)},
      {"run_cox", flag(&S::run_cox)},
      {"run_ag", flag(&S::run_ag)},
      {"run_edt", flag(&S::run_edt)},
      {"gaps", integer(&S::gaps)},
      {"gap_width", num(&S::gap_width)},
      {"use_true_edt", flag(&S::use_true_edt)},
  };
  return f;
}

}  // namespace

std::string write_scenario_config(const ScenarioSpec& spec) {
  std::ostringstream out;
  for (const auto& [key, field] : fields()) out << key << " = " << field.get(spec) << '\n';
  return out.str();
}

ScenarioSpec parse_scenario_config(std::istream& in, const std::string& source_name,
                                   const ScenarioSpec& base) {
  ScenarioSpec spec = base;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source_name + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw DataError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& fs = fields();
    auto it = std::find_if(fs.begin(), fs.end(), [&](const auto& kv) { return kv.first == key; });
    if (it == fs.end()) throw DataError(where + ": unknown key '" + key + "'");
    try {
      it->second.set(spec, value);
    } catch (const DataError& e) {
      throw DataError(where + ": " + key + ": " + e.what());
    }
  }
  validate_spec(spec);
  return spec;
}

}  // namespace perr
