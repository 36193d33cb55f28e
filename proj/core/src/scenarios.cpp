#include <cmath>
#include <sstream>

#include "perr/errors.hpp"
#include "perr/scenarios.hpp"

namespace perr {
namespace {

std::string theta_label(double theta) {
  std::ostringstream os;
  os << theta;
  return os.str();
}

ScenarioSpec edt_base() {
  ScenarioSpec s;
  s.run_edt = true;
  s.run_original = false;
  return s;
}

std::vector<ScenarioSpec> build_presets() {
  std::vector<ScenarioSpec> out;

  for (double b0 : {-6.5, -7.5}) {
    for (double s2 : {0.0, 0.5, 1.0}) {
      ScenarioSpec s;
      std::ostringstream name;
      name << "t1" << b0 << '-' << std::fixed;
      name.precision(1);
      name << s2;
      s.name = name.str();
      s.description = "PERR vs PERR_Cox vs PERR_AG; beta0=" + theta_label(b0) +
                      ", frailty variance " + theta_label(s2);
      s.beta0 = b0;
      s.sigma_omega_sq = s2;
      s.run_original = true;
      s.bootstrap_reps = 200;
      out.push_back(s);
    }
  }

  {
    ScenarioSpec s = edt_base();
    s.name = "edt-neg";
    s.description = "negative control: events do not affect treatment (delta=0, theta=1)";
    out.push_back(s);
  }
  for (double d : {20.0, 30.0}) {
    for (double th : {0.25, 0.5, 2.0, 4.0}) {
      ScenarioSpec s = edt_base();
      s.delta = d;
      s.theta = th;
      s.name = "edt-" + theta_label(d) + "-" + theta_label(th);
      s.description = "EDT delta=" + theta_label(d) + " theta=" + theta_label(th);
      out.push_back(s);
    }
  }
  for (auto [a, b] : {std::pair{0.25, 0.5}, std::pair{4.0, 2.0}}) {
    ScenarioSpec s = edt_base();
    s.delta = 30.0;
    s.theta = a;
    s.theta_second = b;
    s.name = "edt-30-" + theta_label(a) + "+" + theta_label(b);
    s.description = "two-phase EDT: theta=" + theta_label(a) + " for 15 days then " +
                    theta_label(b) + " for 15 days";
    out.push_back(s);
  }

  struct Variant {
    int table;
    std::string what;
    void (*apply)(ScenarioSpec&);
  };
  const std::vector<Variant> variants{
      {1, "correction uses the true (delta, theta)", [](ScenarioSpec& s) { s.use_true_edt = true; }},
      {2, "no treatment effect (beta=0)", [](ScenarioSpec& s) { s.beta = 0.0; }},
      {3, "harmful treatment (beta=ln 2)", [](ScenarioSpec& s) { s.beta = std::log(2.0); }},
      {4, "continuous confounder, exp(X) ~ Gamma(4, 1/4)",
       [](ScenarioSpec& s) { s.confounder = ConfounderKind::gamma_4_quarter; }},
      {5, "opposite confounding (alpha2=-0.5, beta0=-6.5)",
       [](ScenarioSpec& s) {
         s.alpha2 = -0.5;
         s.beta0 = -6.5;
       }},
      {6, "stronger confounding (alpha1=alpha2=1, c0=-8.5, beta0=-7.5)",
       [](ScenarioSpec& s) {
         s.alpha1 = 1.0;
         s.alpha2 = 1.0;
         s.c0 = -8.5;
         s.beta0 = -7.5;
       }},
      {7, "flatter event hazard (kappa2=1.0, beta0=-5.5)",
       [](ScenarioSpec& s) {
         s.kappa2 = 1.0;
         s.beta0 = -5.5;
       }},
      {8, "steeper event hazard (kappa2=1.5, beta0=-8.5)",
       [](ScenarioSpec& s) {
         s.kappa2 = 1.5;
         s.beta0 = -8.5;
       }},
      {9, "flatter treatment hazard (kappa1=1.0, c0=-6.5)",
       [](ScenarioSpec& s) {
         s.kappa1 = 1.0;
         s.c0 = -6.5;
       }},
      {10, "steeper treatment hazard (kappa1=1.5, c0=-9.5)",
       [](ScenarioSpec& s) {
         s.kappa1 = 1.5;
         s.c0 = -9.5;
       }},
      {11,
       "more variable follow-up, tau ~ uniform(150, 350); one table heading reads (150, 300), "
       "the parameter list reads (150, 350)",
       [](ScenarioSpec& s) {
         s.tau_min = 150.0;
         s.tau_max = 350.0;
       }},
  };
  for (const auto& v : variants) {
    for (double th : {0.25, 0.5, 2.0, 4.0}) {
      ScenarioSpec s = edt_base();
      s.delta = 30.0;
      s.theta = th;
      v.apply(s);
      s.name = "s" + std::to_string(v.table) + "-" + theta_label(th);
      s.description = v.what + "; delta=30 theta=" + theta_label(th);
      out.push_back(s);
    }
  }
  return out;
}

std::vector<PresetGroup> build_groups(const std::vector<ScenarioSpec>& presets) {
  std::vector<PresetGroup> groups{
      {"t1", "original PERR, PERR_Cox and PERR_AG under frailty", {}},
      {"edt", "EDT detection and correction grid (delta x theta, two-phase, negative control)", {}},
  };
  for (int t = 1; t <= 11; ++t) groups.push_back({"s" + std::to_string(t), "sensitivity variant " + std::to_string(t), {}});
  for (const auto& s : presets) {
    if (s.name.rfind("t1", 0) == 0) {
      groups[0].members.push_back(s.name);
    } else if (s.name.rfind("edt-", 0) == 0) {
      groups[1].members.push_back(s.name);
    } else {
      const int t = std::stoi(s.name.substr(1, s.name.find('-') - 1));
      groups[static_cast<std::size_t>(t + 1)].members.push_back(s.name);
    }
  }
  return groups;
}

}  // namespace

const std::vector<ScenarioSpec>& scenario_presets() {
  static const std::vector<ScenarioSpec> presets = build_presets();
  return presets;
}

const std::vector<PresetGroup>& preset_groups() {
  static const std::vector<PresetGroup> groups = build_groups(scenario_presets());
  return groups;
}

std::vector<ScenarioSpec> resolve_scenario(const std::string& name) {
  for (const auto& s : scenario_presets()) {
    if (s.name == name) return {s};
  }
  for (const auto& g : preset_groups()) {
    if (g.name != name) continue;
    std::vector<ScenarioSpec> out;
    for (const auto& m : g.members) out.push_back(resolve_scenario(m).front());
    return out;
  }
  std::ostringstream msg;
  msg << "unknown scenario '" << name << "'. Groups:";
  for (const auto& g : preset_groups()) msg << ' ' << g.name;
  msg << ". Presets:";
  for (const auto& s : scenario_presets()) msg << ' ' << s.name;
  throw DataError(msg.str());
}

std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return out;
}

}  // namespace perr
