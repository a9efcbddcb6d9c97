// Python bindings for the betatrial core: probability kernel, borrowing
// priors, decision rules, trial engine, calibration, dose finding and the
// config-driven report pipeline.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "betatrial/borrowing.hpp"
#include "betatrial/calibration.hpp"
#include "betatrial/dose.hpp"
#include "betatrial/engine.hpp"
#include "betatrial/report.hpp"

namespace py = pybind11;
using namespace betatrial;

namespace {

void bind_prob(py::module_& m) {
  py::class_<BetaParams>(m, "BetaParams")
      .def(py::init<double, double>(), py::arg("alpha"), py::arg("beta"))
      .def_readonly("alpha", &BetaParams::alpha)
      .def_readonly("beta", &BetaParams::beta)
      .def("mean", &BetaParams::mean)
      .def("__repr__", [](const BetaParams& p) {
        return "BetaParams(" + std::to_string(p.alpha) + ", " + std::to_string(p.beta) + ")";
      });

  py::class_<BinomialSummary>(m, "BinomialSummary")
      .def(py::init<int, int>(), py::arg("successes"), py::arg("trials"))
      .def_readonly("successes", &BinomialSummary::successes)
      .def_readonly("trials", &BinomialSummary::trials);

  py::class_<BetaMixture::Component>(m, "MixtureComponent")
      .def(py::init([](double w, const BetaParams& p) {
             return BetaMixture::Component{w, p};
           }),
           py::arg("weight"), py::arg("params"))
      .def_readonly("weight", &BetaMixture::Component::weight)
      .def_readonly("params", &BetaMixture::Component::params);

  py::class_<BetaMixture>(m, "BetaMixture")
      .def(py::init<std::vector<BetaMixture::Component>>(), py::arg("components"))
      .def(py::init([](const std::vector<std::pair<double, BetaParams>>& parts) {
             std::vector<BetaMixture::Component> comps;
             for (const auto& [w, p] : parts) comps.push_back({w, p});
             return BetaMixture(std::move(comps));
           }),
           py::arg("components"))
      .def_readonly("components", &BetaMixture::components)
      .def("mean", &BetaMixture::mean);

  py::class_<GridDensity>(m, "GridDensity")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("grid"),
           py::arg("masses"))
      .def_static("uniform", &GridDensity::uniform, py::arg("lo"), py::arg("hi"),
                  py::arg("points"))
      .def_readonly("grid", &GridDensity::grid)
      .def_readonly("masses", &GridDensity::masses)
      .def("mean", &GridDensity::mean);

  py::class_<Interval>(m, "Interval")
      .def_readonly("low", &Interval::low)
      .def_readonly("high", &Interval::high)
      .def_readonly("level", &Interval::level);

  m.def("update_beta", &update_beta, py::arg("prior"), py::arg("data"));
  m.def("update_beta_mixture", &update_beta_mixture, py::arg("prior"), py::arg("data"),
        py::arg("prune_weight") = 1e-8);
  m.def("update_grid",
        py::overload_cast<const GridDensity&, const std::function<double(double)>&>(
            &update_grid),
        py::arg("prior"), py::arg("log_likelihood"));
  m.def("update_grid_binomial", &update_grid_binomial, py::arg("prior"), py::arg("data"));
  m.def("update", &update, py::arg("prior"), py::arg("data"),
        "Conjugate, mixture or grid update, chosen by the prior's type");
  m.def("prob_exceeds", py::overload_cast<const Dist&, double>(&prob_exceeds),
        py::arg("dist"), py::arg("threshold"));
  m.def("cdf", py::overload_cast<const Dist&, double>(&cdf), py::arg("dist"), py::arg("x"));
  m.def("quantile", &quantile, py::arg("dist"), py::arg("q"));
  m.def("credible_interval", &credible_interval, py::arg("dist"), py::arg("level"));
  m.def("prior_ess", &prior_ess, py::arg("prior"));
  m.def("dist_mean", &mean, py::arg("dist"));
  m.def("beta_binomial_marginal", &beta_binomial_marginal, py::arg("prior"), py::arg("n"),
        py::arg("y"));
  m.def("predictive_pmf", &predictive_pmf, py::arg("dist"), py::arg("n"), py::arg("y"));
}

void bind_borrowing(py::module_& m) {
  py::class_<HistoricalData>(m, "HistoricalData")
      .def(py::init<std::vector<BinomialSummary>, std::vector<std::string>>(),
           py::arg("studies"), py::arg("labels") = std::vector<std::string>{})
      .def_readonly("studies", &HistoricalData::studies)
      .def_readonly("labels", &HistoricalData::labels);

  py::class_<PowerPriorSpec>(m, "PowerPriorSpec")
      .def(py::init<double, BetaParams>(), py::arg("discount"), py::arg("baseline"))
      .def_readonly("discount", &PowerPriorSpec::discount)
      .def_readonly("baseline", &PowerPriorSpec::baseline);

  py::class_<MapHyperGrid>(m, "MapHyperGrid")
      .def(py::init<std::vector<double>, std::vector<double>, std::vector<double>>(),
           py::arg("mean_grid"), py::arg("concentration_grid"), py::arg("hyper_weights"))
      .def_static("standard", [] { return MapHyperGrid::standard(); })
      .def_readonly("mean_grid", &MapHyperGrid::mean_grid)
      .def_readonly("concentration_grid", &MapHyperGrid::concentration_grid);

  py::class_<RobustMixSpec>(m, "RobustMixSpec")
      .def(py::init<double, BetaParams>(), py::arg("map_weight"), py::arg("vague"));

  py::class_<CommensurateSpec>(m, "CommensurateSpec")
      .def(py::init<std::vector<double>, std::vector<double>, int>(), py::arg("tau_grid"),
           py::arg("tau_weights"), py::arg("theta_grid_size") = 2001);

  py::class_<CommensuratePrior>(m, "CommensuratePrior")
      .def_readonly("density", &CommensuratePrior::density)
      .def_readonly("moment_match_warning", &CommensuratePrior::moment_match_warning);

  m.def("power_prior", &power_prior, py::arg("spec"), py::arg("hist"));
  m.def("map_prior", &map_prior, py::arg("hist"), py::arg("hyper"),
        py::arg("prune_weight") = 1e-8);
  m.def("robustify", &robustify, py::arg("map"), py::arg("spec"));
  m.def(
      "commensurate_prior",
      [](const BetaParams& hist, const CommensurateSpec& spec) {
        return commensurate_prior(hist, spec);
      },
      py::arg("hist_posterior"), py::arg("spec"));
}

void bind_rules(py::module_& m) {
  py::enum_<Comparison>(m, "Comparison")
      .value("ONE_ARM", Comparison::OneArmVsConstant)
      .value("TWO_ARM_DIFFERENCE", Comparison::TwoArmDifference);

  py::class_<SuccessRule>(m, "SuccessRule")
      .def(py::init<double, double, Comparison>(), py::arg("effect_threshold"),
           py::arg("posterior_cutoff"), py::arg("comparison") = Comparison::OneArmVsConstant)
      .def_readonly("effect_threshold", &SuccessRule::effect_threshold)
      .def_readonly("posterior_cutoff", &SuccessRule::posterior_cutoff)
      .def_readonly("comparison", &SuccessRule::comparison);

  py::class_<FutilityRule>(m, "FutilityRule")
      .def(py::init<double>(), py::arg("ppos_cutoff"))
      .def_readonly("ppos_cutoff", &FutilityRule::ppos_cutoff);

  py::enum_<MonitoringKind>(m, "MonitoringKind")
      .value("POSTERIOR", MonitoringKind::PosteriorRule)
      .value("PPOS", MonitoringKind::PposRule);

  py::class_<MonitoringSpec>(m, "MonitoringSpec")
      .def(py::init([](MonitoringKind kind, std::optional<double> cutoff) {
             return MonitoringSpec{kind, cutoff};
           }),
           py::arg("kind") = MonitoringKind::PosteriorRule,
           py::arg("efficacy_cutoff") = std::nullopt)
      .def_readwrite("kind", &MonitoringSpec::kind)
      .def_readwrite("efficacy_cutoff", &MonitoringSpec::efficacy_cutoff);

  py::class_<LossSpec>(m, "LossSpec")
      .def(py::init<double, double>(), py::arg("false_positive_loss"),
           py::arg("false_negative_loss"));

  py::class_<LookSizes>(m, "LookSizes")
      .def(py::init([](int t, int c) {
             return LookSizes{t, c};
           }),
           py::arg("treatment"), py::arg("control") = 0)
      .def_readwrite("treatment", &LookSizes::treatment)
      .def_readwrite("control", &LookSizes::control);

  py::class_<InterimState>(m, "InterimState")
      .def(py::init([](BinomialSummary treatment, std::optional<BinomialSummary> control,
                       int look_index, std::vector<LookSizes> planned) {
             return InterimState{treatment, control, look_index, std::move(planned)};
           }),
           py::arg("treatment"), py::arg("control"), py::arg("look_index"),
           py::arg("planned"))
      .def_readwrite("treatment", &InterimState::treatment)
      .def_readwrite("control", &InterimState::control)
      .def_readwrite("look_index", &InterimState::look_index)
      .def_readwrite("planned", &InterimState::planned);

  py::enum_<DecisionKind>(m, "DecisionKind")
      .value("STOP_EFFICACY", DecisionKind::StopEfficacy)
      .value("STOP_FUTILITY", DecisionKind::StopFutility)
      .value("CONTINUE", DecisionKind::Continue)
      .value("FINAL_SUCCESS", DecisionKind::FinalSuccess)
      .value("FINAL_FAILURE", DecisionKind::FinalFailure);

  py::class_<Decision>(m, "Decision")
      .def_readonly("kind", &Decision::kind)
      .def_readonly("evidence", &Decision::evidence)
      .def("terminal", &Decision::terminal)
      .def("success", &Decision::success);

  py::class_<RuleOutcome>(m, "RuleOutcome")
      .def_readonly("success", &RuleOutcome::success)
      .def_readonly("evidence", &RuleOutcome::evidence);

  m.def("effect_prob_two_arm", &effect_prob_two_arm, py::arg("post_t"), py::arg("post_c"),
        py::arg("a"), py::arg("abs_tol") = 1e-8);
  m.def("posterior_success",
        py::overload_cast<const Dist&, const SuccessRule&>(&posterior_success),
        py::arg("posterior"), py::arg("rule"));
  m.def("posterior_success",
        py::overload_cast<const Dist&, const Dist&, const SuccessRule&>(&posterior_success),
        py::arg("post_t"), py::arg("post_c"), py::arg("rule"));
  m.def(
      "ppos",
      [](const InterimState& state, const Dist& prior_t, const std::optional<Dist>& prior_c,
         const SuccessRule& rule) { return ppos(state, prior_t, prior_c, rule); },
      py::arg("state"), py::arg("prior_t"), py::arg("prior_c"), py::arg("final_rule"));
  m.def("conditional_power",
        py::overload_cast<int, int, double, int>(&conditional_power),
        py::arg("current_successes"), py::arg("remaining"), py::arg("assumed_rate"),
        py::arg("final_critical_count"));
  m.def("loss_threshold", &loss_threshold, py::arg("spec"));
  m.def(
      "evaluate_interim",
      [](const InterimState& state, const Dist& prior_t, const std::optional<Dist>& prior_c,
         const SuccessRule& success, const std::optional<FutilityRule>& futility,
         const MonitoringSpec& monitoring) {
        return evaluate_interim(state, prior_t, prior_c, success, futility, monitoring);
      },
      py::arg("state"), py::arg("prior_t"), py::arg("prior_c"), py::arg("success"),
      py::arg("futility"), py::arg("monitoring"));
}

void bind_engine(py::module_& m) {
  py::class_<ReplicateStream>(m, "ReplicateStream")
      .def(py::init<std::uint64_t, std::uint64_t, std::uint64_t>(), py::arg("master_seed"),
           py::arg("scenario_index"), py::arg("replicate_index"))
      .def("uniform", &ReplicateStream::uniform, py::arg("look"), py::arg("arm"),
           py::arg("counter"))
      .def("binomial", &ReplicateStream::binomial, py::arg("look"), py::arg("arm"),
           py::arg("n"), py::arg("p"));

  py::class_<TrialDesign>(m, "TrialDesign")
      .def(py::init<>())
      .def_readwrite("arms", &TrialDesign::arms)
      .def_readwrite("allocation", &TrialDesign::allocation)
      .def_readwrite("analysis_prior_t", &TrialDesign::analysis_prior_t)
      .def_readwrite("analysis_prior_c", &TrialDesign::analysis_prior_c)
      .def_readwrite("success", &TrialDesign::success)
      .def_readwrite("futility", &TrialDesign::futility)
      .def_readwrite("monitoring", &TrialDesign::monitoring)
      .def("validate", &TrialDesign::validate);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init([](double treatment_rate, double control_rate,
                       std::vector<double> drift, std::string label) {
             return Scenario{treatment_rate, control_rate, std::move(drift),
                             std::move(label)};
           }),
           py::arg("treatment_rate"), py::arg("control_rate") = 0.0,
           py::arg("drift") = std::vector<double>{}, py::arg("label") = "")
      .def_readwrite("treatment_rate", &Scenario::treatment_rate)
      .def_readwrite("control_rate", &Scenario::control_rate)
      .def_readwrite("drift", &Scenario::drift)
      .def_readwrite("label", &Scenario::label);

  py::class_<DesignPrior::Atom>(m, "DesignPriorAtom")
      .def(py::init([](double weight, Scenario scenario) {
             return DesignPrior::Atom{weight, std::move(scenario)};
           }),
           py::arg("weight"), py::arg("scenario"))
      .def_readwrite("weight", &DesignPrior::Atom::weight)
      .def_readwrite("scenario", &DesignPrior::Atom::scenario);

  py::class_<DesignPrior>(m, "DesignPrior")
      .def(py::init<>())
      .def_readwrite("atoms", &DesignPrior::atoms)
      .def_static("from_beta", &DesignPrior::from_beta, py::arg("treatment_prior"),
                  py::arg("control_rate"), py::arg("points") = 201);

  py::enum_<OcMode>(m, "OcMode")
      .value("EXACT", OcMode::Exact)
      .value("MONTE_CARLO", OcMode::MonteCarlo);

  py::class_<OCReport>(m, "OCReport")
      .def_readonly("mode", &OCReport::mode)
      .def_readonly("scenario_label", &OCReport::scenario_label)
      .def_readonly("reject_prob", &OCReport::reject_prob)
      .def_readonly("stop_efficacy", &OCReport::stop_efficacy)
      .def_readonly("stop_futility", &OCReport::stop_futility)
      .def_readonly("expected_n_treatment", &OCReport::expected_n_treatment)
      .def_readonly("expected_n_control", &OCReport::expected_n_control)
      .def_readonly("assurance", &OCReport::assurance)
      .def_readonly("pcd", &OCReport::pcd)
      .def_readonly("mc_replicates", &OCReport::mc_replicates)
      .def_readonly("mc_se_reject", &OCReport::mc_se_reject)
      .def_readonly("mc_se_stop_efficacy", &OCReport::mc_se_stop_efficacy)
      .def_readonly("mc_se_stop_futility", &OCReport::mc_se_stop_futility);

  py::class_<TrialResult>(m, "TrialResult")
      .def_readonly("decision", &TrialResult::decision)
      .def_readonly("stop_look", &TrialResult::stop_look)
      .def_readonly("enrolled_treatment", &TrialResult::enrolled_treatment)
      .def_readonly("enrolled_control", &TrialResult::enrolled_control);

  m.def(
      "simulate_trial",
      [](const TrialDesign& d, const Scenario& s, const ReplicateStream& stream) {
        return simulate_trial(d, s, stream);
      },
      py::arg("design"), py::arg("scenario"), py::arg("stream"));
  m.def(
      "exact_feasible",
      [](const TrialDesign& d) { return exact_feasible(d); }, py::arg("design"));
  m.def(
      "exact_oc", [](const TrialDesign& d, const Scenario& s) { return exact_oc(d, s); },
      py::arg("design"), py::arg("scenario"));
  m.def(
      "monte_carlo_oc",
      [](const TrialDesign& d, const Scenario& s, long long replicates,
         std::uint64_t master_seed, int workers, std::uint64_t scenario_index) {
        return monte_carlo_oc(d, s, replicates, master_seed, workers, scenario_index);
      },
      py::arg("design"), py::arg("scenario"), py::arg("replicates"), py::arg("master_seed"),
      py::arg("workers") = 1, py::arg("scenario_index") = 0,
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "bayesian_oc",
      [](const TrialDesign& d, const DesignPrior& dp, OcMode mode, long long mc_replicates,
         std::uint64_t master_seed, int workers) {
        return bayesian_oc(d, dp, mode, mc_replicates, master_seed, workers);
      },
      py::arg("design"), py::arg("dprior"), py::arg("mode") = OcMode::Exact,
      py::arg("mc_replicates") = 0, py::arg("master_seed") = 0, py::arg("workers") = 1,
      py::call_guard<py::gil_scoped_release>());
}

void bind_calibration(py::module_& m) {
  py::class_<CalibrationProblem>(m, "CalibrationProblem")
      .def(py::init([](TrialDesign design, Scenario null_scenario, double alpha,
                       double step) {
             return CalibrationProblem{std::move(design), std::move(null_scenario), alpha,
                                       step};
           }),
           py::arg("design"), py::arg("null_scenario"), py::arg("alpha"),
           py::arg("cutoff_grid_step") = 1e-4);

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("cutoff", &CalibrationResult::cutoff)
      .def_readonly("type_i_error", &CalibrationResult::type_i_error)
      .def_readonly("type_i_below_cutoff", &CalibrationResult::type_i_below_cutoff)
      .def_readonly("calibrated", &CalibrationResult::calibrated);

  m.def(
      "calibrate_cutoff",
      [](const CalibrationProblem& p) { return calibrate_cutoff(p); }, py::arg("problem"),
      py::call_guard<py::gil_scoped_release>());

  py::enum_<AssuranceParam>(m, "AssuranceParam")
      .value("FINAL_N", AssuranceParam::FinalN)
      .value("CUTOFF", AssuranceParam::Cutoff);

  py::class_<AssuranceProblem>(m, "AssuranceProblem")
      .def(py::init<>())
      .def_readwrite("design", &AssuranceProblem::design)
      .def_readwrite("dprior", &AssuranceProblem::dprior)
      .def_readwrite("target", &AssuranceProblem::target)
      .def_readwrite("param", &AssuranceProblem::param)
      .def_readwrite("n_lo", &AssuranceProblem::n_lo)
      .def_readwrite("n_hi", &AssuranceProblem::n_hi)
      .def_readwrite("cutoff_lo", &AssuranceProblem::cutoff_lo)
      .def_readwrite("cutoff_hi", &AssuranceProblem::cutoff_hi)
      .def_readwrite("cutoff_step", &AssuranceProblem::cutoff_step);

  py::class_<AssuranceResult>(m, "AssuranceResult")
      .def_readonly("parameter", &AssuranceResult::parameter)
      .def_readonly("assurance", &AssuranceResult::assurance)
      .def_readonly("calibrated", &AssuranceResult::calibrated);

  m.def(
      "calibrate_assurance",
      [](const AssuranceProblem& p) { return calibrate_assurance(p); }, py::arg("problem"),
      py::call_guard<py::gil_scoped_release>());

  m.def("exact_gs_boundaries", &exact_gs_boundaries, py::arg("schedule"), py::arg("alpha"),
        py::arg("spending_fractions"), py::arg("null_rate"));
}

void bind_dose(py::module_& m) {
  using namespace betatrial::dose;
  auto d = m.def_submodule("dose", "Phase-I dose-finding designs");

  py::class_<DoseToxState>(d, "DoseToxState")
      .def(py::init<int>(), py::arg("n_doses"))
      .def_readwrite("treated", &DoseToxState::treated)
      .def_readwrite("dlts", &DoseToxState::dlts)
      .def_readwrite("eliminated", &DoseToxState::eliminated)
      .def_readwrite("current_dose", &DoseToxState::current_dose)
      .def("n_doses", &DoseToxState::n_doses);

  py::enum_<EscalationKind>(d, "EscalationKind")
      .value("ESCALATE", EscalationKind::Escalate)
      .value("STAY", EscalationKind::Stay)
      .value("DE_ESCALATE", EscalationKind::DeEscalate)
      .value("ELIMINATE", EscalationKind::Eliminate)
      .value("STOP_TRIAL", EscalationKind::StopTrial);

  py::class_<EscalationDecision>(d, "EscalationDecision")
      .def_readonly("kind", &EscalationDecision::kind);

  py::class_<BoinBoundaries>(d, "BoinBoundaries")
      .def_readonly("target", &BoinBoundaries::target)
      .def_readonly("phi1", &BoinBoundaries::phi1)
      .def_readonly("phi2", &BoinBoundaries::phi2)
      .def_readonly("lambda_e", &BoinBoundaries::lambda_e)
      .def_readonly("lambda_d", &BoinBoundaries::lambda_d);

  py::enum_<MtpiVariant>(d, "MtpiVariant")
      .value("MTPI", MtpiVariant::Mtpi)
      .value("MTPI2", MtpiVariant::Mtpi2);

  py::class_<MtpiSpec>(d, "MtpiSpec")
      .def(py::init<double, double, double, BetaParams, MtpiVariant>(), py::arg("target"),
           py::arg("eps1") = 0.05, py::arg("eps2") = 0.05,
           py::arg("prior") = BetaParams(1.0, 1.0),
           py::arg("variant") = MtpiVariant::Mtpi);

  py::class_<MtpiDecision>(d, "MtpiDecision")
      .def_readonly("kind", &MtpiDecision::kind)
      .def_readonly("upm_under", &MtpiDecision::upm_under)
      .def_readonly("upm_target", &MtpiDecision::upm_target)
      .def_readonly("upm_over", &MtpiDecision::upm_over);

  py::class_<CrmSpec>(d, "CrmSpec")
      .def(py::init<std::vector<double>, double>(), py::arg("skeleton"), py::arg("target"))
      .def_readwrite("skeleton", &CrmSpec::skeleton)
      .def_readwrite("target", &CrmSpec::target)
      .def_readwrite("prior_sd", &CrmSpec::prior_sd)
      .def_readwrite("no_skip", &CrmSpec::no_skip);

  py::class_<CrmRecommendation>(d, "CrmRecommendation")
      .def_readonly("dose", &CrmRecommendation::dose)
      .def_readonly("post_means", &CrmRecommendation::post_means);

  py::enum_<DesignKind>(d, "DesignKind")
      .value("THREE_PLUS_THREE", DesignKind::ThreePlusThree)
      .value("I3P3", DesignKind::I3p3)
      .value("BOIN", DesignKind::Boin)
      .value("MTPI", DesignKind::Mtpi)
      .value("MTPI2", DesignKind::Mtpi2)
      .value("CRM", DesignKind::Crm);

  py::class_<EscalationDesign>(d, "EscalationDesign")
      .def(py::init<>())
      .def_readwrite("kind", &EscalationDesign::kind)
      .def_readwrite("target", &EscalationDesign::target)
      .def_readwrite("cohort_size", &EscalationDesign::cohort_size)
      .def_readwrite("max_n", &EscalationDesign::max_n)
      .def_readwrite("start_dose", &EscalationDesign::start_dose)
      .def_readwrite("n_doses", &EscalationDesign::n_doses)
      .def_readwrite("ei_low", &EscalationDesign::ei_low)
      .def_readwrite("ei_high", &EscalationDesign::ei_high)
      .def_readwrite("crm", &EscalationDesign::crm)
      .def_readwrite("eliminate_overdose", &EscalationDesign::eliminate_overdose)
      .def_readwrite("elimination_cutoff", &EscalationDesign::elimination_cutoff);

  py::class_<EscalationResult>(d, "EscalationResult")
      .def_readonly("mtd", &EscalationResult::mtd)
      .def_readonly("treated", &EscalationResult::treated)
      .def_readonly("dlts", &EscalationResult::dlts)
      .def_readonly("stopped_for_safety", &EscalationResult::stopped_for_safety);

  py::class_<DecisionTableRow>(d, "DecisionTableRow")
      .def_readonly("n", &DecisionTableRow::n)
      .def_readonly("y", &DecisionTableRow::y)
      .def_readonly("decision", &DecisionTableRow::decision)
      .def_readonly("eliminate", &DecisionTableRow::eliminate);

  d.def("rule_3p3", &rule_3p3, py::arg("state"));
  d.def("rule_i3p3", &rule_i3p3, py::arg("state"), py::arg("target"), py::arg("ei_low"),
        py::arg("ei_high"));
  d.def("boin_boundaries", &boin_boundaries, py::arg("target"), py::arg("phi1") = -1.0,
        py::arg("phi2") = -1.0);
  d.def("boin_decide", &boin_decide, py::arg("state"), py::arg("boundaries"));
  d.def("mtpi_decide", &mtpi_decide, py::arg("state"), py::arg("spec"));
  d.def("crm_recommend", &crm_recommend, py::arg("state"), py::arg("spec"));
  d.def("overdose_eliminate", &overdose_eliminate, py::arg("state"), py::arg("target"),
        py::arg("prob_cutoff"));
  d.def("isotonic_fit", &isotonic_fit, py::arg("values"), py::arg("weights"));
  d.def("simulate_escalation", &simulate_escalation, py::arg("design"), py::arg("truth"),
        py::arg("stream"));
  d.def("decision_table", &decision_table, py::arg("design"), py::arg("max_n"));
}

void bind_report(py::module_& m) {
  m.def(
      "validate_config",
      [](const std::string& text) {
        const ParseResult r = parse_config(text);
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& e : r.errors) out.emplace_back(e.path, e.message);
        return out;
      },
      py::arg("text"), "Returns a list of (path, message) validation errors; empty if valid");

  m.def(
      "run_config",
      [](const std::string& text, const std::string& subcommand,
         std::optional<std::uint64_t> seed, std::optional<int> workers,
         std::optional<std::string> timestamp) {
        const ParseResult parsed = parse_config(text);
        if (!parsed.ok()) {
          std::string msg = "config validation failed:";
          for (const auto& e : parsed.errors) msg += "\n  " + e.path + ": " + e.message;
          throw std::invalid_argument(msg);
        }
        RunOverrides overrides{seed, workers, timestamp};
        const RunReport report =
            run(*parsed.config, subcommand_from_string(subcommand), overrides);
        return report.to_json();
      },
      py::arg("text"), py::arg("subcommand"), py::arg("seed") = std::nullopt,
      py::arg("workers") = std::nullopt, py::arg("timestamp") = std::nullopt,
      "Run a subcommand (simulate | oc | calibrate | dose-find | report) on a JSON "
      "config and return the canonical report text");

  m.def("config_digest",
        [](const std::string& text) { return config_digest(nlohmann::json::parse(text)); },
        py::arg("text"));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayesian binary-endpoint trial designs: exact conjugate/grid posteriors, "
            "borrowing priors, sequential decision rules, operating characteristics, "
            "calibration and dose finding";
  m.attr("__version__") = kToolVersion;

  bind_prob(m);
  bind_borrowing(m);
  bind_rules(m);
  bind_engine(m);
  bind_calibration(m);
  bind_dose(m);
  bind_report(m);
}
