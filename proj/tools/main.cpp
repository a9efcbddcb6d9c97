// betatrial command line: validate a JSON config, run a subcommand, and
// emit deterministic reports.

#include <CLI11.hpp>

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "betatrial/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitComputation = 2;
constexpr int kExitIo = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in && !in.eof()) throw std::ios_base::failure("read failed for " + path);
  return ss.str();
}

int run_subcommand(const std::string& name, const std::string& config_path,
                   const std::string& out_dir, const std::string& format,
                   const std::optional<std::uint64_t>& seed,
                   const std::optional<int>& workers, const std::string& stamp) {
  std::string text;
  try {
    text = read_file(config_path);
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  }

  const betatrial::ParseResult parsed = betatrial::parse_config(text);
  if (!parsed.ok()) {
    std::cerr << "config validation failed (" << parsed.errors.size() << " error"
              << (parsed.errors.size() == 1 ? "" : "s") << "):\n";
    for (const auto& e : parsed.errors)
      std::cerr << "  " << e.path << ": " << e.message << "\n";
    return kExitValidation;
  }

  betatrial::RunOverrides overrides;
  overrides.master_seed = seed;
  overrides.workers = workers;
  if (!stamp.empty()) overrides.timestamp = stamp;

  betatrial::RunReport report;
  try {
    report = betatrial::run(*parsed.config, betatrial::subcommand_from_string(name),
                            overrides);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "computation error: " << e.what() << "\n";
    return kExitComputation;
  }

  try {
    const auto fmt = format == "csv" ? betatrial::EmitFormat::CsvBundle
                                     : betatrial::EmitFormat::Json;
    const auto files = betatrial::emit(report, fmt, out_dir);
    for (const auto& f : files) std::cout << f.string() << "\n";
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian binary-endpoint trial designs: operating characteristics, "
               "calibration and dose finding"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", format = "json", stamp;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--format", format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", seed, "override execution.master_seed");
    sub->add_option("--workers", workers, "override execution.workers");
    sub->add_option("--stamp", stamp,
                    "timestamp string recorded in the manifest (off by default so "
                    "identical runs emit identical bytes)");
  };

  for (const char* name : {"simulate", "oc", "calibrate", "dose-find", "report"})
    add_common(app.add_subcommand(
        name, std::string("run the '") + name + "' pipeline for a config"));

  CLI11_PARSE(app, argc, argv);

  const std::string sub = app.get_subcommands().front()->get_name();
  return run_subcommand(sub, config_path, out_dir, format, seed, workers, stamp);
}
