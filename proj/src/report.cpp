#include "betatrial/report.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace betatrial {

using nlohmann::json;

Subcommand subcommand_from_string(const std::string& name) {
  if (name == "simulate") return Subcommand::Simulate;
  if (name == "oc") return Subcommand::Oc;
  if (name == "calibrate") return Subcommand::Calibrate;
  if (name == "dose-find") return Subcommand::DoseFind;
  if (name == "report") return Subcommand::Report;
  throw std::invalid_argument("unknown subcommand '" + name + "'");
}

namespace {

const char* subcommand_name(Subcommand s) {
  switch (s) {
    case Subcommand::Simulate: return "simulate";
    case Subcommand::Oc: return "oc";
    case Subcommand::Calibrate: return "calibrate";
    case Subcommand::DoseFind: return "dose-find";
    case Subcommand::Report: return "report";
  }
  return "?";
}

std::string format_double(double v) {
  if (!std::isfinite(v)) throw std::logic_error("non-finite value in report");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_canonical(std::string& out, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (const auto& [key, value] : j.items()) {  // std::map order: sorted keys
        out += pad_in;
        out += json(key).dump();
        out += ": ";
        write_canonical(out, value, indent, depth + 1);
        if (++i < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += pad_in;
        write_canonical(out, j[i], indent, depth + 1);
        if (i + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "]";
      return;
    }
    case json::value_t::string:
      out += j.dump();
      return;
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string canonical_json(const json& j, int indent) {
  std::string out;
  write_canonical(out, j, indent, 0);
  out += "\n";
  return out;
}

std::string config_digest(const json& config) {
  const std::string text = canonical_json(config);
  unsigned char hash[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, text.data(), text.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, hash, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("config_digest: SHA-256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::string hex;
  hex.reserve(2 * len);
  static const char* digits = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    hex += digits[hash[i] >> 4];
    hex += digits[hash[i] & 0xF];
  }
  return hex;
}

std::string RunReport::to_json() const { return canonical_json(body); }

namespace {

json settings_json(const EngineSettings& s) {
  return json{{"inc_beta_abs_tol", s.inc_beta_abs_tol},
              {"quantile_tol", s.quantile_tol},
              {"two_arm_quadrature_tol", s.two_arm_quadrature_tol},
              {"mixture_prune_weight", s.mixture_prune_weight},
              {"default_grid_points", s.default_grid_points},
              {"map_mu_points", s.map_mu_points},
              {"map_mu_lo", s.map_mu_lo},
              {"map_mu_hi", s.map_mu_hi},
              {"map_nu_points", s.map_nu_points},
              {"map_nu_lo", s.map_nu_lo},
              {"map_nu_hi", s.map_nu_hi},
              {"commensurate_logit_span", s.commensurate_logit_span},
              {"commensurate_grid_points", s.commensurate_grid_points},
              {"ppos_cell_budget", s.ppos_cell_budget},
              {"exact_one_arm_max_n", s.exact_one_arm_max_n},
              {"exact_two_arm_max_n", s.exact_two_arm_max_n},
              {"dp_cell_budget", s.dp_cell_budget},
              {"design_prior_atoms", s.design_prior_atoms},
              {"cutoff_grid_step", s.cutoff_grid_step}};
}

json oc_json(const OCReport& oc) {
  json j{{"scenario", oc.scenario_label},
         {"mode", oc.mode == OcMode::Exact ? "exact" : "monte-carlo"},
         {"reject_prob", oc.reject_prob},
         {"stop_efficacy", oc.stop_efficacy},
         {"stop_futility", oc.stop_futility},
         {"expected_n",
          {{"treatment", oc.expected_n_treatment}, {"control", oc.expected_n_control}}}};
  if (oc.assurance) j["assurance"] = *oc.assurance;
  if (oc.pcd) j["pcd"] = *oc.pcd;
  if (oc.mc_replicates) {
    j["mc"] = json{{"replicates", *oc.mc_replicates}};
    if (oc.mc_se_reject) j["mc"]["se_reject"] = *oc.mc_se_reject;
    if (!oc.mc_se_stop_efficacy.empty()) {
      j["mc"]["se_stop_efficacy"] = oc.mc_se_stop_efficacy;
      j["mc"]["se_stop_futility"] = oc.mc_se_stop_futility;
    }
  }
  return j;
}

struct RunContext {
  const DesignConfig& config;
  std::uint64_t seed;
  int workers;
  const EngineSettings& settings;
  json modes = json::object();
};

OcMode pick_mode(const TrialDesign& design, RunMode requested, bool force_mc,
                 const EngineSettings& s) {
  if (force_mc) return OcMode::MonteCarlo;
  switch (requested) {
    case RunMode::Exact:
      if (!exact_feasible(design, s))
        throw std::runtime_error("exact mode requested but the design exceeds the DP budget");
      return OcMode::Exact;
    case RunMode::MonteCarlo: return OcMode::MonteCarlo;
    case RunMode::Auto: return exact_feasible(design, s) ? OcMode::Exact : OcMode::MonteCarlo;
  }
  return OcMode::Exact;
}

json scenario_ocs(RunContext& ctx, const TrialDesign& design, bool force_mc) {
  const OcMode mode = pick_mode(design, ctx.config.execution.mode, force_mc, ctx.settings);
  json out = json::array();
  for (std::size_t i = 0; i < ctx.config.scenarios.size(); ++i) {
    const Scenario& sc = ctx.config.scenarios[i];
    const OCReport oc =
        mode == OcMode::Exact
            ? exact_oc(design, sc, ctx.settings)
            : monte_carlo_oc(design, sc, ctx.config.execution.replicates, ctx.seed,
                             ctx.workers, static_cast<std::uint64_t>(i), ctx.settings);
    out.push_back(oc_json(oc));
  }
  ctx.modes["oc"] = mode == OcMode::Exact ? "exact" : "monte-carlo";
  return out;
}

json bayesian_block(RunContext& ctx, const TrialDesign& design, bool force_mc) {
  const OcMode mode = pick_mode(design, ctx.config.execution.mode, force_mc, ctx.settings);
  const OCReport oc =
      bayesian_oc(design, *ctx.config.design_prior, mode, ctx.config.execution.replicates,
                  ctx.seed, ctx.workers, ctx.settings);
  ctx.modes["bayesian"] = mode == OcMode::Exact ? "exact" : "monte-carlo";
  return oc_json(oc);
}

json sensitivity_block(RunContext& ctx, const TrialDesign& base, bool force_mc) {
  json out = json::array();
  for (const ArmPriors& alt : ctx.config.alternative_priors) {
    TrialDesign variant = base;
    variant.analysis_prior_t = alt.treatment;
    if (variant.arms == 2) variant.analysis_prior_c = alt.control;
    json entry{{"prior", alt.spec}};
    entry["oc"] = scenario_ocs(ctx, variant, force_mc);
    out.push_back(std::move(entry));
  }
  return out;
}

const Scenario& resolve_scenario(const DesignConfig& config, const std::string& label) {
  for (const auto& s : config.scenarios)
    if (s.label == label) return s;
  throw std::invalid_argument("no scenario labelled '" + label + "'");
}

json calibration_block(RunContext& ctx, std::optional<TrialDesign>& calibrated_out) {
  if (!ctx.config.calibration.has_value())
    throw std::invalid_argument("calibrate: config has no calibration section");
  if (!ctx.config.design.has_value())
    throw std::invalid_argument("calibrate: config has no design section");
  const CalibrationSection& cal = *ctx.config.calibration;
  json block;

  std::optional<TrialDesign> calibrated;
  if (cal.alpha) {
    CalibrationProblem problem{*ctx.config.design,
                               resolve_scenario(ctx.config, cal.null_scenario), *cal.alpha,
                               cal.cutoff_grid_step};
    const CalibrationResult res = calibrate_cutoff(problem, ctx.settings);
    block["cutoff"] = json{{"value", res.cutoff},
                           {"type_i_error", res.type_i_error},
                           {"type_i_below_cutoff", res.type_i_below_cutoff},
                           {"alpha", *cal.alpha},
                           {"grid_step", cal.cutoff_grid_step},
                           {"certificate",
                            res.type_i_error <= *cal.alpha &&
                                res.type_i_below_cutoff > *cal.alpha}};
    calibrated = res.calibrated;
  }
  if (cal.assurance) {
    if (!ctx.config.design_prior.has_value())
      throw std::invalid_argument("calibrate: assurance target needs a design_prior");
    AssuranceProblem problem;
    problem.design = calibrated.value_or(*ctx.config.design);
    problem.dprior = *ctx.config.design_prior;
    problem.target = cal.assurance->target;
    problem.param = cal.assurance->param;
    problem.n_lo = cal.assurance->n_lo;
    problem.n_hi = cal.assurance->n_hi;
    problem.cutoff_lo = cal.assurance->cutoff_lo;
    problem.cutoff_hi = cal.assurance->cutoff_hi;
    const AssuranceResult res = calibrate_assurance(problem, ctx.settings);
    block["assurance"] = json{
        {"parameter", cal.assurance->param == AssuranceParam::FinalN ? "final_n" : "cutoff"},
        {"value", res.parameter},
        {"achieved", res.assurance},
        {"target", cal.assurance->target}};
    calibrated = res.calibrated;
  }
  if (cal.gs_spending_fractions) {
    const TrialDesign& d = calibrated.value_or(*ctx.config.design);
    if (d.arms != 1)
      throw std::invalid_argument("calibrate: group-sequential comparator is one-arm only");
    if (!cal.alpha)
      throw std::invalid_argument("calibrate: group-sequential comparator needs alpha");
    std::vector<int> schedule;
    for (const auto& look : d.allocation) schedule.push_back(look.treatment);
    const Scenario& null_sc = resolve_scenario(ctx.config, cal.null_scenario);
    block["gs_boundaries"] =
        json{{"critical_counts", exact_gs_boundaries(schedule, *cal.alpha,
                                                     *cal.gs_spending_fractions,
                                                     null_sc.treatment_rate)},
             {"spending_fractions", *cal.gs_spending_fractions},
             {"schedule", schedule}};
  }

  // Calibrated designs are reported under both frequentist and Bayesian
  // operating metrics; the reviewer weighs them.
  if (calibrated) {
    block["oc"] = scenario_ocs(ctx, *calibrated, false);
    if (ctx.config.design_prior) block["bayesian"] = bayesian_block(ctx, *calibrated, false);
  }
  ctx.modes["calibration"] = "exact";
  calibrated_out = std::move(calibrated);
  return block;
}

json dose_block(RunContext& ctx) {
  if (!ctx.config.dose.has_value())
    throw std::invalid_argument("dose-find: config has no dose_finding section");
  const DoseSection& ds = *ctx.config.dose;
  json block;

  if (ds.design.kind != dose::DesignKind::Crm) {
    json table = json::array();
    for (const auto& row : dose::decision_table(ds.design, ds.decision_table_max_n)) {
      table.push_back(json{{"n", row.n},
                           {"y", row.y},
                           {"decision", dose::to_string(row.decision)},
                           {"eliminate", row.eliminate}});
    }
    block["decision_table"] = std::move(table);
  }

  json scenarios = json::array();
  for (std::size_t si = 0; si < ds.scenarios.size(); ++si) {
    const DoseScenario& sc = ds.scenarios[si];
    const int n_doses = ds.design.n_doses;
    std::vector<long long> selections(n_doses + 1, 0);  // last slot: none
    std::vector<long long> treated(n_doses, 0), dlts(n_doses, 0);
    long long safety_stops = 0;
    for (long long r = 0; r < ds.replicates; ++r) {
      // Dose streams live in their own scenario-index block so sequential
      // and dose simulations never share draws.
      const ReplicateStream stream(ctx.seed, (1ull << 32) + si,
                                   static_cast<std::uint64_t>(r));
      const dose::EscalationResult res = dose::simulate_escalation(ds.design, sc.truth, stream);
      ++selections[res.mtd >= 0 ? res.mtd : n_doses];
      for (int j = 0; j < n_doses; ++j) {
        treated[j] += res.treated[j];
        dlts[j] += res.dlts[j];
      }
      if (res.stopped_for_safety) ++safety_stops;
    }
    const double R = static_cast<double>(ds.replicates);
    json sel = json::array(), mean_treated = json::array(), mean_dlts = json::array();
    for (int j = 0; j < n_doses; ++j) {
      sel.push_back(selections[j] / R);
      mean_treated.push_back(treated[j] / R);
      mean_dlts.push_back(dlts[j] / R);
    }
    scenarios.push_back(json{{"label", sc.label},
                             {"truth", sc.truth},
                             {"replicates", ds.replicates},
                             {"selection_prob", sel},
                             {"select_none_prob", selections[n_doses] / R},
                             {"mean_treated", mean_treated},
                             {"mean_dlts", mean_dlts},
                             {"safety_stop_prob", safety_stops / R}});
  }
  block["scenarios"] = std::move(scenarios);
  ctx.modes["dose"] = "monte-carlo";
  return block;
}

}  // namespace

RunReport run(const DesignConfig& config, Subcommand subcommand,
              const RunOverrides& overrides, const EngineSettings& settings) {
  RunContext ctx{config, overrides.master_seed.value_or(config.execution.master_seed),
                 overrides.workers.value_or(config.execution.workers), settings};

  json results;
  const bool wants_trial_ocs = subcommand == Subcommand::Simulate ||
                               subcommand == Subcommand::Oc ||
                               subcommand == Subcommand::Report;
  if (wants_trial_ocs) {
    if (!config.design.has_value())
      throw std::invalid_argument("subcommand needs a design section");
    const bool force_mc = subcommand == Subcommand::Simulate;
    results["oc"] = scenario_ocs(ctx, *config.design, force_mc);
    if (config.design_prior)
      results["bayesian"] = bayesian_block(ctx, *config.design, force_mc);
  }
  std::optional<TrialDesign> calibrated;
  if (subcommand == Subcommand::Calibrate ||
      (subcommand == Subcommand::Report && config.calibration.has_value())) {
    results["calibration"] = calibration_block(ctx, calibrated);
  }
  if (subcommand == Subcommand::DoseFind ||
      (subcommand == Subcommand::Report && config.dose.has_value())) {
    results["dose"] = dose_block(ctx);
  }
  // Sensitivity results accompany every analysis that runs the trial
  // engine with analysis priors; after a calibration pass they probe the
  // design that would actually be locked in.
  if (!config.alternative_priors.empty() && config.design.has_value() &&
      subcommand != Subcommand::DoseFind) {
    const TrialDesign& base = calibrated.value_or(*config.design);
    results["sensitivity"] = sensitivity_block(ctx, base, subcommand == Subcommand::Simulate);
  }

  json manifest{{"tool", kToolName},
                {"version", kToolVersion},
                {"config_digest", config_digest(config.raw)},
                {"master_seed", ctx.seed},
                {"workers", ctx.workers},
                {"timestamp", overrides.timestamp.value_or("")},
                {"modes", ctx.modes},
                {"settings", settings_json(settings)}};

  RunReport report;
  report.body = json{{"schema_version", 1},
                     {"subcommand", subcommand_name(subcommand)},
                     {"config", config.raw},
                     {"manifest", std::move(manifest)},
                     {"results", std::move(results)}};
  return report;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::ios_base::failure("write failed for " + path.string());
}

std::string csv_cell(const json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void append_oc_rows(std::string& summary, std::string& stopping, const json& oc_array,
                    const std::string& prior_label) {
  for (const auto& oc : oc_array) {
    summary += prior_label + "," + csv_cell(oc["scenario"]) + "," + csv_cell(oc["mode"]) +
               "," + csv_cell(oc["reject_prob"]) + "," +
               csv_cell(oc["expected_n"]["treatment"]) + "," +
               csv_cell(oc["expected_n"]["control"]) + "\n";
    const auto& eff = oc["stop_efficacy"];
    for (std::size_t k = 0; k < eff.size(); ++k) {
      stopping += prior_label + "," + csv_cell(oc["scenario"]) + "," + std::to_string(k) +
                  "," + csv_cell(eff[k]) + "," + csv_cell(oc["stop_futility"][k]) + "\n";
    }
  }
}

}  // namespace

std::vector<std::filesystem::path> emit(const RunReport& report, EmitFormat format,
                                        const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::ios_base::failure("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  if (format == EmitFormat::Json) {
    const auto path = out_dir / "report.json";
    write_file(path, report.to_json());
    written.push_back(path);
    return written;
  }

  // CSV bundle: one table per section, manifest always included.
  const auto manifest_path = out_dir / "manifest.json";
  write_file(manifest_path, canonical_json(report.body.at("manifest")));
  written.push_back(manifest_path);

  const json& results = report.body.at("results");
  if (results.contains("oc")) {
    std::string summary = "prior,scenario,mode,reject_prob,expected_n_treatment,expected_n_control\n";
    std::string stopping = "prior,scenario,look,stop_efficacy,stop_futility\n";
    append_oc_rows(summary, stopping, results["oc"], "analysis");
    if (results.contains("sensitivity")) {
      for (std::size_t i = 0; i < results["sensitivity"].size(); ++i)
        append_oc_rows(summary, stopping, results["sensitivity"][i]["oc"],
                       "alternative-" + std::to_string(i));
    }
    const auto p1 = out_dir / "oc_summary.csv";
    write_file(p1, summary);
    written.push_back(p1);
    const auto p2 = out_dir / "stopping.csv";
    write_file(p2, stopping);
    written.push_back(p2);
  }
  if (results.contains("bayesian")) {
    const json& b = results["bayesian"];
    std::string text = "quantity,value\n";
    text += "assurance," + csv_cell(b["assurance"]) + "\n";
    text += "pcd," + csv_cell(b["pcd"]) + "\n";
    text += "expected_n_treatment," + csv_cell(b["expected_n"]["treatment"]) + "\n";
    text += "expected_n_control," + csv_cell(b["expected_n"]["control"]) + "\n";
    const auto p = out_dir / "bayesian.csv";
    write_file(p, text);
    written.push_back(p);
  }
  if (results.contains("calibration")) {
    const json& cal = results["calibration"];
    std::string text = "quantity,value\n";
    if (cal.contains("cutoff")) {
      text += "cutoff," + csv_cell(cal["cutoff"]["value"]) + "\n";
      text += "type_i_error," + csv_cell(cal["cutoff"]["type_i_error"]) + "\n";
      text += "type_i_below_cutoff," + csv_cell(cal["cutoff"]["type_i_below_cutoff"]) + "\n";
      text += "alpha," + csv_cell(cal["cutoff"]["alpha"]) + "\n";
    }
    if (cal.contains("assurance")) {
      text += "assurance_parameter," + csv_cell(cal["assurance"]["value"]) + "\n";
      text += "assurance_achieved," + csv_cell(cal["assurance"]["achieved"]) + "\n";
    }
    if (cal.contains("gs_boundaries")) {
      const auto& counts = cal["gs_boundaries"]["critical_counts"];
      for (std::size_t k = 0; k < counts.size(); ++k)
        text += "gs_critical_count_look" + std::to_string(k) + "," + csv_cell(counts[k]) + "\n";
    }
    const auto p = out_dir / "calibration.csv";
    write_file(p, text);
    written.push_back(p);
  }
  if (results.contains("dose")) {
    const json& dose = results["dose"];
    if (dose.contains("decision_table")) {
      std::string text = "n,y,decision,eliminate\n";
      for (const auto& row : dose["decision_table"]) {
        text += csv_cell(row["n"]) + "," + csv_cell(row["y"]) + "," +
                csv_cell(row["decision"]) + "," + (row["eliminate"].get<bool>() ? "1" : "0") +
                "\n";
      }
      const auto p = out_dir / "dose_decision_table.csv";
      write_file(p, text);
      written.push_back(p);
    }
    std::string text = "label,dose,truth,selection_prob,mean_treated,mean_dlts\n";
    for (const auto& sc : dose["scenarios"]) {
      const auto& truth = sc["truth"];
      for (std::size_t j = 0; j < truth.size(); ++j) {
        text += csv_cell(sc["label"]) + "," + std::to_string(j) + "," +
                csv_cell(truth[j]) + "," + csv_cell(sc["selection_prob"][j]) + "," +
                csv_cell(sc["mean_treated"][j]) + "," + csv_cell(sc["mean_dlts"][j]) + "\n";
      }
    }
    const auto p = out_dir / "dose_scenarios.csv";
    write_file(p, text);
    written.push_back(p);
  }
  return written;
}

}  // namespace betatrial
