#include "betatrial/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "betatrial/borrowing.hpp"

namespace betatrial {

using nlohmann::json;

namespace {

class Validator {
 public:
  std::vector<ConfigError> errors;

  void error(const std::string& path, const std::string& message) {
    errors.push_back({path, message});
  }

  // Rejects unknown keys; returns false if the node is not an object.
  bool check_object(const json& node, const std::string& path,
                    const std::set<std::string>& allowed) {
    if (!node.is_object()) {
      error(path, "expected an object");
      return false;
    }
    for (const auto& [key, value] : node.items()) {
      if (!allowed.count(key)) error(path + "." + key, "unknown key");
    }
    return true;
  }

  std::optional<double> number(const json& node, const std::string& path,
                               const std::string& key, bool required,
                               std::optional<double> fallback = std::nullopt) {
    if (!node.contains(key)) {
      if (required) error(path + "." + key, "missing required field");
      return fallback;
    }
    const json& v = node.at(key);
    if (!v.is_number()) {
      error(path + "." + key, "expected a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<long long> integer(const json& node, const std::string& path,
                                   const std::string& key, bool required,
                                   std::optional<long long> fallback = std::nullopt) {
    if (!node.contains(key)) {
      if (required) error(path + "." + key, "missing required field");
      return fallback;
    }
    const json& v = node.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
      error(path + "." + key, "expected an integer");
      return std::nullopt;
    }
    return v.get<long long>();
  }

  std::optional<std::string> string(const json& node, const std::string& path,
                                    const std::string& key, bool required,
                                    std::optional<std::string> fallback = std::nullopt) {
    if (!node.contains(key)) {
      if (required) error(path + "." + key, "missing required field");
      return fallback;
    }
    const json& v = node.at(key);
    if (!v.is_string()) {
      error(path + "." + key, "expected a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }
};

BinomialSummary build_binomial(const json& node, const std::string& path, Validator& v) {
  v.check_object(node, path, {"successes", "trials"});
  const auto y = v.integer(node, path, "successes", true);
  const auto n = v.integer(node, path, "trials", true);
  if (!y || !n) return BinomialSummary(0, 0);
  try {
    return BinomialSummary(static_cast<int>(*y), static_cast<int>(*n));
  } catch (const std::exception& e) {
    v.error(path, e.what());
    return BinomialSummary(0, 0);
  }
}

BetaParams build_beta(const json& node, const std::string& path, Validator& v) {
  v.check_object(node, path, {"alpha", "beta"});
  const auto a = v.number(node, path, "alpha", true);
  const auto b = v.number(node, path, "beta", true);
  if (!a || !b) return BetaParams(1.0, 1.0);
  try {
    return BetaParams(*a, *b);
  } catch (const std::exception& e) {
    v.error(path, e.what());
    return BetaParams(1.0, 1.0);
  }
}

std::vector<BinomialSummary> build_studies(const json& node, const std::string& path,
                                           Validator& v) {
  std::vector<BinomialSummary> out;
  if (!node.is_array() || node.empty()) {
    v.error(path, "expected a non-empty array of {successes, trials}");
    return out;
  }
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(build_binomial(node[i], path + "[" + std::to_string(i) + "]", v));
  return out;
}

Dist build_prior_checked(const json& spec, const std::string& path, Validator& v) {
  const Dist fallback = BetaParams(1.0, 1.0);
  if (!spec.is_object()) {
    v.error(path, "expected a prior object");
    return fallback;
  }
  const auto type = v.string(spec, path, "type", true);
  if (!type) return fallback;

  try {
    if (*type == "beta") {
      v.check_object(spec, path, {"type", "alpha", "beta"});
      const auto a = v.number(spec, path, "alpha", true);
      const auto b = v.number(spec, path, "beta", true);
      if (!a || !b) return fallback;
      return BetaParams(*a, *b);
    }
    if (*type == "mixture") {
      v.check_object(spec, path, {"type", "components"});
      if (!spec.contains("components") || !spec["components"].is_array() ||
          spec["components"].empty()) {
        v.error(path + ".components", "expected a non-empty array");
        return fallback;
      }
      std::vector<BetaMixture::Component> comps;
      for (std::size_t i = 0; i < spec["components"].size(); ++i) {
        const std::string cpath = path + ".components[" + std::to_string(i) + "]";
        const json& c = spec["components"][i];
        v.check_object(c, cpath, {"weight", "alpha", "beta"});
        const auto w = v.number(c, cpath, "weight", true);
        const auto a = v.number(c, cpath, "alpha", true);
        const auto b = v.number(c, cpath, "beta", true);
        if (w && a && b) comps.push_back({*w, BetaParams(*a, *b)});
      }
      if (comps.empty()) return fallback;
      return BetaMixture(std::move(comps));
    }
    if (*type == "power") {
      v.check_object(spec, path, {"type", "baseline", "discount", "historical"});
      const auto d = v.number(spec, path, "discount", true);
      if (!spec.contains("baseline") || !spec.contains("historical") || !d) return fallback;
      const BetaParams base = build_beta(spec["baseline"], path + ".baseline", v);
      const BinomialSummary hist = build_binomial(spec["historical"], path + ".historical", v);
      return power_prior(PowerPriorSpec(*d, base), hist);
    }
    if (*type == "map") {
      v.check_object(spec, path, {"type", "historical"});
      if (!spec.contains("historical")) {
        v.error(path + ".historical", "missing required field");
        return fallback;
      }
      const auto studies = build_studies(spec["historical"], path + ".historical", v);
      if (studies.empty()) return fallback;
      return map_prior(HistoricalData(studies), MapHyperGrid::standard());
    }
    if (*type == "robust_map") {
      v.check_object(spec, path, {"type", "map_weight", "vague", "historical"});
      const auto w = v.number(spec, path, "map_weight", true);
      if (!spec.contains("vague") || !spec.contains("historical") || !w) return fallback;
      const BetaParams vague = build_beta(spec["vague"], path + ".vague", v);
      const auto studies = build_studies(spec["historical"], path + ".historical", v);
      if (studies.empty()) return fallback;
      const BetaMixture map = map_prior(HistoricalData(studies), MapHyperGrid::standard());
      return robustify(map, RobustMixSpec(*w, vague));
    }
    if (*type == "commensurate") {
      v.check_object(spec, path,
                     {"type", "historical_posterior", "tau_grid", "tau_weights",
                      "grid_points"});
      if (!spec.contains("historical_posterior") || !spec.contains("tau_grid") ||
          !spec.contains("tau_weights")) {
        v.error(path, "commensurate prior needs historical_posterior, tau_grid, tau_weights");
        return fallback;
      }
      const BetaParams hist =
          build_beta(spec["historical_posterior"], path + ".historical_posterior", v);
      if (!spec["tau_grid"].is_array() || !spec["tau_weights"].is_array()) {
        v.error(path + ".tau_grid", "expected arrays");
        return fallback;
      }
      const auto taus = spec["tau_grid"].get<std::vector<double>>();
      const auto weights = spec["tau_weights"].get<std::vector<double>>();
      const auto points = v.integer(spec, path, "grid_points", false, 2001);
      const CommensurateSpec cs(taus, weights, static_cast<int>(*points));
      return commensurate_prior(hist, cs).density;
    }
    v.error(path + ".type", "unknown prior type '" + *type + "'");
  } catch (const std::exception& e) {
    v.error(path, e.what());
  }
  return fallback;
}

std::vector<LookSizes> build_looks(const json& node, const std::string& path, int arms,
                                   Validator& v) {
  std::vector<LookSizes> out;
  if (!node.is_array() || node.empty()) {
    v.error(path, "expected a non-empty array of looks");
    return out;
  }
  for (std::size_t k = 0; k < node.size(); ++k) {
    const std::string lpath = path + "[" + std::to_string(k) + "]";
    const json& look = node[k];
    LookSizes sizes;
    if (look.is_number_integer() || look.is_number_unsigned()) {
      if (arms == 2) {
        v.error(lpath, "two-arm looks need {treatment, control}");
        continue;
      }
      sizes.treatment = look.get<int>();
    } else if (look.is_object()) {
      v.check_object(look, lpath, {"treatment", "control"});
      const auto t = v.integer(look, lpath, "treatment", true);
      if (t) sizes.treatment = static_cast<int>(*t);
      if (arms == 2) {
        const auto c = v.integer(look, lpath, "control", true);
        if (c) sizes.control = static_cast<int>(*c);
      } else if (look.contains("control")) {
        v.error(lpath + ".control", "one-arm design has no control allocation");
      }
    } else {
      v.error(lpath, "expected an integer or {treatment, control}");
      continue;
    }
    out.push_back(sizes);
  }
  return out;
}

void build_design(const json& node, DesignConfig& cfg, Validator& v) {
  const std::string path = "design";
  if (!v.check_object(node, path,
                      {"arms", "looks", "analysis_prior", "success", "futility",
                       "monitoring"}))
    return;

  TrialDesign d;
  const auto arms = v.integer(node, path, "arms", false, 1);
  d.arms = arms ? static_cast<int>(*arms) : 1;
  if (d.arms != 1 && d.arms != 2) {
    v.error(path + ".arms", "arms must be 1 or 2");
    return;
  }

  if (node.contains("looks")) d.allocation = build_looks(node["looks"], path + ".looks", d.arms, v);
  else v.error(path + ".looks", "missing required field");

  if (node.contains("analysis_prior")) {
    const json& ap = node["analysis_prior"];
    if (v.check_object(ap, path + ".analysis_prior", {"treatment", "control"})) {
      if (ap.contains("treatment"))
        d.analysis_prior_t = build_prior_checked(ap["treatment"], path + ".analysis_prior.treatment", v);
      else
        v.error(path + ".analysis_prior.treatment", "missing required field");
      if (d.arms == 2) {
        if (ap.contains("control"))
          d.analysis_prior_c = build_prior_checked(ap["control"], path + ".analysis_prior.control", v);
        else
          v.error(path + ".analysis_prior.control", "missing required field");
      } else if (ap.contains("control")) {
        v.error(path + ".analysis_prior.control", "one-arm design has no control prior");
      }
    }
  } else {
    v.error(path + ".analysis_prior", "missing required field");
  }

  if (node.contains("success")) {
    const json& su = node["success"];
    if (v.check_object(su, path + ".success", {"effect_threshold", "posterior_cutoff"})) {
      const auto a = v.number(su, path + ".success", "effect_threshold", true);
      const auto c = v.number(su, path + ".success", "posterior_cutoff", true);
      if (a && c) {
        try {
          d.success = SuccessRule(*a, *c,
                                  d.arms == 2 ? Comparison::TwoArmDifference
                                              : Comparison::OneArmVsConstant);
        } catch (const std::exception& e) {
          v.error(path + ".success.posterior_cutoff", e.what());
        }
      }
    }
  } else {
    v.error(path + ".success", "missing required field");
  }

  if (node.contains("futility")) {
    const json& fu = node["futility"];
    if (v.check_object(fu, path + ".futility", {"ppos_cutoff"})) {
      const auto c = v.number(fu, path + ".futility", "ppos_cutoff", true);
      if (c) {
        try {
          d.futility = FutilityRule(*c);
        } catch (const std::exception& e) {
          v.error(path + ".futility.ppos_cutoff", e.what());
        }
      }
    }
  }

  if (node.contains("monitoring")) {
    const json& mo = node["monitoring"];
    if (v.check_object(mo, path + ".monitoring", {"kind", "efficacy_cutoff"})) {
      const auto kind = v.string(mo, path + ".monitoring", "kind", false, "posterior");
      if (kind == "posterior") d.monitoring.kind = MonitoringKind::PosteriorRule;
      else if (kind == "ppos") d.monitoring.kind = MonitoringKind::PposRule;
      else v.error(path + ".monitoring.kind", "expected 'posterior' or 'ppos'");
      const auto cut = v.number(mo, path + ".monitoring", "efficacy_cutoff", false);
      if (cut) {
        if (*cut > 0.0 && *cut < 1.0) d.monitoring.efficacy_cutoff = *cut;
        else v.error(path + ".monitoring.efficacy_cutoff", "must lie in (0,1)");
      }
    }
  }

  if (!v.errors.empty()) {
    cfg.design = std::move(d);  // keep partial design; caller checks errors
    return;
  }
  try {
    d.validate();
  } catch (const std::exception& e) {
    v.error(path, e.what());
  }
  cfg.design = std::move(d);
}

void build_scenarios(const json& node, DesignConfig& cfg, Validator& v) {
  const std::string path = "scenarios";
  if (!node.is_array()) {
    v.error(path, "expected an array");
    return;
  }
  const int arms = cfg.design ? cfg.design->arms : 1;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string spath = path + "[" + std::to_string(i) + "]";
    const json& sn = node[i];
    if (!v.check_object(sn, spath, {"label", "treatment_rate", "control_rate", "drift"}))
      continue;
    Scenario sc;
    sc.label = v.string(sn, spath, "label", false, "scenario-" + std::to_string(i)).value();
    const auto t = v.number(sn, spath, "treatment_rate", true);
    if (t) {
      if (*t < 0.0 || *t > 1.0) v.error(spath + ".treatment_rate", "must lie in [0,1]");
      else sc.treatment_rate = *t;
    }
    if (sn.contains("control_rate")) {
      if (arms != 2) {
        v.error(spath + ".control_rate", "control rate only applies to two-arm designs");
      } else {
        const auto c = v.number(sn, spath, "control_rate", true);
        if (c) {
          if (*c < 0.0 || *c > 1.0) v.error(spath + ".control_rate", "must lie in [0,1]");
          else sc.control_rate = *c;
        }
      }
    } else if (arms == 2) {
      v.error(spath + ".control_rate", "missing required field");
    }
    if (sn.contains("drift")) {
      if (arms != 2) {
        v.error(spath + ".drift", "drift applies to the control arm of two-arm designs");
      } else if (!sn["drift"].is_array()) {
        v.error(spath + ".drift", "expected an array of per-look offsets");
      } else {
        sc.drift = sn["drift"].get<std::vector<double>>();
      }
    }
    cfg.scenarios.push_back(std::move(sc));
  }
}

void build_design_prior(const json& node, DesignConfig& cfg, Validator& v) {
  const std::string path = "design_prior";
  if (!v.check_object(node, path, {"beta", "control_rate", "atoms", "grid_points"})) return;
  try {
    if (node.contains("atoms")) {
      if (node.contains("beta"))
        v.error(path, "give either atoms or a beta spec, not both");
      DesignPrior dp;
      const json& atoms = node["atoms"];
      if (!atoms.is_array() || atoms.empty()) {
        v.error(path + ".atoms", "expected a non-empty array");
        return;
      }
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        const std::string apath = path + ".atoms[" + std::to_string(i) + "]";
        const json& an = atoms[i];
        if (!v.check_object(an, apath, {"weight", "treatment_rate", "control_rate", "label"}))
          continue;
        DesignPrior::Atom atom;
        const auto w = v.number(an, apath, "weight", true);
        const auto t = v.number(an, apath, "treatment_rate", true);
        if (!w || !t) continue;
        atom.weight = *w;
        atom.scenario.treatment_rate = *t;
        atom.scenario.control_rate = v.number(an, apath, "control_rate", false, 0.0).value();
        atom.scenario.label = v.string(an, apath, "label", false, "").value();
        dp.atoms.push_back(std::move(atom));
      }
      dp.validate();
      cfg.design_prior = std::move(dp);
    } else if (node.contains("beta")) {
      const BetaParams b = build_beta(node["beta"], path + ".beta", v);
      const auto control = v.number(node, path, "control_rate", false, 0.0);
      const auto points = v.integer(node, path, "grid_points", false,
                                    EngineSettings::defaults().design_prior_atoms);
      cfg.design_prior =
          DesignPrior::from_beta(b, control.value(), static_cast<int>(*points));
    } else {
      v.error(path, "expected atoms or a beta spec");
    }
  } catch (const std::exception& e) {
    v.error(path, e.what());
  }
}

void build_calibration(const json& node, DesignConfig& cfg, Validator& v) {
  const std::string path = "calibration";
  if (!v.check_object(node, path,
                      {"alpha", "null_scenario", "cutoff_grid_step", "assurance",
                       "gs_spending_fractions"}))
    return;
  CalibrationSection cal;
  const auto alpha = v.number(node, path, "alpha", false);
  if (alpha) {
    if (*alpha <= 0.0 || *alpha >= 1.0) v.error(path + ".alpha", "must lie in (0,1)");
    else cal.alpha = *alpha;
  }
  cal.null_scenario = v.string(node, path, "null_scenario", false, "").value();
  cal.cutoff_grid_step = v.number(node, path, "cutoff_grid_step", false, 1e-4).value();
  if (!(cal.cutoff_grid_step > 0.0))
    v.error(path + ".cutoff_grid_step", "must be positive");

  if (node.contains("assurance")) {
    const json& an = node["assurance"];
    if (v.check_object(an, path + ".assurance",
                       {"target", "parameter", "n_lo", "n_hi", "cutoff_lo", "cutoff_hi"})) {
      AssuranceSection a;
      const auto target = v.number(an, path + ".assurance", "target", true);
      if (target) {
        if (*target <= 0.0 || *target >= 1.0)
          v.error(path + ".assurance.target", "must lie in (0,1)");
        else a.target = *target;
      }
      const auto param = v.string(an, path + ".assurance", "parameter", false, "final_n");
      if (param == "final_n") a.param = AssuranceParam::FinalN;
      else if (param == "cutoff") a.param = AssuranceParam::Cutoff;
      else v.error(path + ".assurance.parameter", "expected 'final_n' or 'cutoff'");
      a.n_lo = static_cast<int>(v.integer(an, path + ".assurance", "n_lo", false, 10).value());
      a.n_hi = static_cast<int>(v.integer(an, path + ".assurance", "n_hi", false, 400).value());
      a.cutoff_lo = v.number(an, path + ".assurance", "cutoff_lo", false, 0.5).value();
      a.cutoff_hi = v.number(an, path + ".assurance", "cutoff_hi", false, 0.9999).value();
      cal.assurance = a;
    }
  }
  if (node.contains("gs_spending_fractions")) {
    if (!node["gs_spending_fractions"].is_array())
      v.error(path + ".gs_spending_fractions", "expected an array");
    else
      cal.gs_spending_fractions = node["gs_spending_fractions"].get<std::vector<double>>();
  }
  if (!cal.alpha && !cal.assurance)
    v.error(path, "calibration needs alpha and/or an assurance target");
  // Cross-reference: the null scenario label must resolve.
  if (cal.alpha || cal.gs_spending_fractions) {
    const bool found = std::any_of(cfg.scenarios.begin(), cfg.scenarios.end(),
                                   [&](const Scenario& s) { return s.label == cal.null_scenario; });
    if (!found)
      v.error(path + ".null_scenario",
              "unresolved reference: no scenario labelled '" + cal.null_scenario + "'");
  }
  cfg.calibration = std::move(cal);
}

void build_dose(const json& node, DesignConfig& cfg, Validator& v) {
  const std::string path = "dose_finding";
  if (!v.check_object(node, path,
                      {"design", "target", "cohort_size", "max_n", "start_dose", "n_doses",
                       "truth", "crm", "ei", "elimination", "decision_table_max_n",
                       "replicates"}))
    return;
  DoseSection ds;
  auto& d = ds.design;
  const auto kind = v.string(node, path, "design", true);
  if (kind) {
    if (*kind == "3+3") d.kind = dose::DesignKind::ThreePlusThree;
    else if (*kind == "i3+3") d.kind = dose::DesignKind::I3p3;
    else if (*kind == "boin") d.kind = dose::DesignKind::Boin;
    else if (*kind == "mtpi") d.kind = dose::DesignKind::Mtpi;
    else if (*kind == "mtpi2") d.kind = dose::DesignKind::Mtpi2;
    else if (*kind == "crm") d.kind = dose::DesignKind::Crm;
    else v.error(path + ".design", "unknown design '" + *kind + "'");
  }
  d.target = v.number(node, path, "target", false, 0.3).value();
  d.cohort_size = static_cast<int>(v.integer(node, path, "cohort_size", false, 3).value());
  d.max_n = static_cast<int>(v.integer(node, path, "max_n", false, 30).value());
  d.start_dose = static_cast<int>(v.integer(node, path, "start_dose", false, 0).value());
  const auto n_doses = v.integer(node, path, "n_doses", true);
  if (n_doses) d.n_doses = static_cast<int>(*n_doses);

  if (node.contains("ei")) {
    const json& ei = node["ei"];
    if (v.check_object(ei, path + ".ei", {"low", "high"})) {
      d.ei_low = v.number(ei, path + ".ei", "low", true, -1.0).value();
      d.ei_high = v.number(ei, path + ".ei", "high", true, -1.0).value();
    }
  }
  if (node.contains("crm")) {
    const json& cn = node["crm"];
    if (v.check_object(cn, path + ".crm", {"skeleton", "prior_sd", "no_skip"})) {
      try {
        if (!cn.contains("skeleton") || !cn["skeleton"].is_array()) {
          v.error(path + ".crm.skeleton", "expected an array");
        } else {
          dose::CrmSpec spec(cn["skeleton"].get<std::vector<double>>(), d.target);
          spec.prior_sd = v.number(cn, path + ".crm", "prior_sd", false, 1.34).value();
          if (cn.contains("no_skip")) {
            if (!cn["no_skip"].is_boolean()) v.error(path + ".crm.no_skip", "expected a boolean");
            else spec.no_skip = cn["no_skip"].get<bool>();
          }
          spec.validate();
          d.crm = std::move(spec);
        }
      } catch (const std::exception& e) {
        v.error(path + ".crm", e.what());
      }
    }
  }
  if (node.contains("elimination")) {
    const json& el = node["elimination"];
    if (v.check_object(el, path + ".elimination", {"enabled", "cutoff"})) {
      if (el.contains("enabled")) {
        if (!el["enabled"].is_boolean()) v.error(path + ".elimination.enabled", "expected a boolean");
        else d.eliminate_overdose = el["enabled"].get<bool>();
      }
      d.elimination_cutoff = v.number(el, path + ".elimination", "cutoff", false, 0.95).value();
    }
  }
  if (node.contains("truth")) {
    const json& tn = node["truth"];
    if (!tn.is_array() || tn.empty()) {
      v.error(path + ".truth", "expected a non-empty array of per-dose rate vectors");
    } else {
      for (std::size_t i = 0; i < tn.size(); ++i) {
        const std::string tpath = path + ".truth[" + std::to_string(i) + "]";
        if (!tn[i].is_array()) {
          v.error(tpath, "expected an array of rates");
          continue;
        }
        DoseScenario sc;
        sc.truth = tn[i].get<std::vector<double>>();
        sc.label = "truth-" + std::to_string(i);
        if (static_cast<int>(sc.truth.size()) != d.n_doses)
          v.error(tpath, "length must equal n_doses");
        for (double p : sc.truth)
          if (p < 0.0 || p > 1.0) {
            v.error(tpath, "rates must lie in [0,1]");
            break;
          }
        ds.scenarios.push_back(std::move(sc));
      }
    }
  }
  ds.replicates = v.integer(node, path, "replicates", false, 1000).value();
  ds.decision_table_max_n =
      static_cast<int>(v.integer(node, path, "decision_table_max_n", false, 12).value());
  if (v.errors.empty()) {
    try {
      d.validate();
    } catch (const std::exception& e) {
      v.error(path, e.what());
    }
  }
  cfg.dose = std::move(ds);
}

void build_sensitivity(const json& node, DesignConfig& cfg, Validator& v) {
  const std::string path = "sensitivity";
  if (!v.check_object(node, path, {"alternative_priors"})) return;
  if (!node.contains("alternative_priors")) {
    v.error(path + ".alternative_priors", "missing required field");
    return;
  }
  const json& alts = node["alternative_priors"];
  if (!alts.is_array()) {
    v.error(path + ".alternative_priors", "expected an array");
    return;
  }
  const int arms = cfg.design ? cfg.design->arms : 1;
  for (std::size_t i = 0; i < alts.size(); ++i) {
    const std::string apath = path + ".alternative_priors[" + std::to_string(i) + "]";
    const json& an = alts[i];
    if (!v.check_object(an, apath, {"treatment", "control"})) continue;
    ArmPriors ap;
    ap.spec = an;
    if (an.contains("treatment"))
      ap.treatment = build_prior_checked(an["treatment"], apath + ".treatment", v);
    else
      v.error(apath + ".treatment", "missing required field");
    if (arms == 2) {
      if (an.contains("control"))
        ap.control = build_prior_checked(an["control"], apath + ".control", v);
      else
        v.error(apath + ".control", "missing required field");
    } else if (an.contains("control")) {
      v.error(apath + ".control", "one-arm design has no control prior");
    }
    cfg.alternative_priors.push_back(std::move(ap));
  }
}

void build_execution(const json& node, DesignConfig& cfg, Validator& v) {
  const std::string path = "execution";
  if (!v.check_object(node, path, {"replicates", "master_seed", "workers", "mode"})) return;
  auto& ex = cfg.execution;
  ex.replicates = v.integer(node, path, "replicates", false, 10000).value();
  if (ex.replicates < 1) v.error(path + ".replicates", "must be >= 1");
  const auto seed = v.integer(node, path, "master_seed", false, 0);
  if (seed) ex.master_seed = static_cast<std::uint64_t>(*seed);
  ex.workers = static_cast<int>(v.integer(node, path, "workers", false, 1).value());
  if (ex.workers < 1) v.error(path + ".workers", "must be >= 1");
  const auto mode = v.string(node, path, "mode", false, "auto");
  if (mode == "auto") ex.mode = RunMode::Auto;
  else if (mode == "exact") ex.mode = RunMode::Exact;
  else if (mode == "monte-carlo") ex.mode = RunMode::MonteCarlo;
  else v.error(path + ".mode", "expected 'auto', 'exact' or 'monte-carlo'");
}

}  // namespace

Dist build_prior(const nlohmann::json& spec) {
  Validator v;
  Dist d = build_prior_checked(spec, "prior", v);
  if (!v.errors.empty())
    throw std::invalid_argument(v.errors.front().path + ": " + v.errors.front().message);
  return d;
}

ParseResult parse_config(const nlohmann::json& j) {
  ParseResult result;
  Validator v;
  DesignConfig cfg;
  cfg.raw = j;

  if (!v.check_object(j, "$",
                      {"schema_version", "design", "scenarios", "design_prior",
                       "calibration", "dose_finding", "sensitivity", "execution"})) {
    result.errors = std::move(v.errors);
    return result;
  }

  const auto version = v.integer(j, "$", "schema_version", true);
  if (version) {
    cfg.schema_version = static_cast<int>(*version);
    if (cfg.schema_version != 1) v.error("$.schema_version", "unsupported schema version");
  }

  if (j.contains("design")) build_design(j["design"], cfg, v);
  if (j.contains("scenarios")) build_scenarios(j["scenarios"], cfg, v);
  if (j.contains("design_prior")) build_design_prior(j["design_prior"], cfg, v);
  if (j.contains("calibration")) build_calibration(j["calibration"], cfg, v);
  if (j.contains("dose_finding")) build_dose(j["dose_finding"], cfg, v);
  if (j.contains("sensitivity")) build_sensitivity(j["sensitivity"], cfg, v);
  if (j.contains("execution")) build_execution(j["execution"], cfg, v);

  if (!cfg.design && !cfg.dose)
    v.error("$", "config needs a design and/or a dose_finding section");
  if (cfg.design && cfg.scenarios.empty() && !cfg.dose)
    v.error("scenarios", "need at least one scenario for a sequential design");

  result.errors = std::move(v.errors);
  if (result.errors.empty()) result.config = std::move(cfg);
  return result;
}

ParseResult parse_config(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    ParseResult r;
    r.errors.push_back({"$", "not valid JSON"});
    return r;
  }
  return parse_config(j);
}

}  // namespace betatrial
