// Command-line driver for the experiment presets.
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shockrom/error.hpp"
#include "shockrom/scenario.hpp"

namespace {

using shockrom::Error;
using shockrom::ErrorCategory;

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config:
    case ErrorCategory::lookup: return 2;
    case ErrorCategory::io: return 4;
    default: return 3;
  }
}

int report(ErrorCategory c, const std::string& message) {
  const int code = exit_code(c);
  const nlohmann::json line{
      {"error", std::string(shockrom::to_string(c))}, {"exit", code}, {"message", message}};
  std::cerr << line.dump() << '\n';
  return code;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) shockrom::fail(ErrorCategory::io, "cannot read '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    shockrom::fail(ErrorCategory::config, "'" + path + "' is not valid JSON: " + e.what());
  }
}

struct RunRequest {
  std::vector<std::string> scenarios;
  std::string pipeline = "physics-dmd";
  std::string out;
  std::optional<double> eps;
  std::optional<double> delta;
  std::string json_config;
  std::string model_out;
  unsigned parallel = 1;
};

shockrom::Scenario configure(const RunRequest& req, const std::string& name) {
  shockrom::Scenario s = shockrom::find_scenario(name);
  if (!req.json_config.empty()) s = shockrom::Scenario::from_json(read_json(req.json_config), s);
  if (req.eps) s.eps = *req.eps;
  if (req.delta) s.delta = *req.delta;
  return s;
}

std::filesystem::path output_path(const RunRequest& req, const std::string& name) {
  if (req.scenarios.size() == 1) return req.out;
  return std::filesystem::path(req.out) / (name + "-" + req.pipeline + ".csv");
}

void run_one(const RunRequest& req, const std::string& name) {
  const auto pipeline = shockrom::parse_pipeline(req.pipeline);
  const auto out = shockrom::run(configure(req, name), pipeline);
  shockrom::write_outputs(out, output_path(req, name));
  if (!req.model_out.empty()) {
    if (!out.model) shockrom::fail(ErrorCategory::config, "pipeline " + req.pipeline + " has no model");
    std::filesystem::path path = req.model_out;
    if (req.scenarios.size() > 1) path = path / (name + "-model.json");
    std::ofstream js(path);
    if (!js) shockrom::fail(ErrorCategory::io, "cannot write '" + path.string() + "'");
    js << out.model->to_json().dump() << '\n';
  }
  std::string summary = name + " " + req.pipeline;
  for (const auto& e : out.diagnostics["errors"]) {
    char buf[96];
    std::snprintf(buf, sizeof buf, " t=%g rel_l2=%.3e", e["t"].get<double>(), e["relative_l2"].get<double>());
    summary += buf;
  }
  if (out.diagnostics.contains("rank")) summary += " r=" + out.diagnostics["rank"].dump();
  std::cout << summary << '\n';
}

int run_command(const RunRequest& req) {
  if (req.scenarios.size() > 1) std::filesystem::create_directories(req.out);
  std::vector<std::pair<ErrorCategory, std::string>> failures;
  std::mutex lock;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < req.scenarios.size(); i = next++) {
      try {
        run_one(req, req.scenarios[i]);
      } catch (const Error& e) {
        const std::lock_guard guard(lock);
        failures.emplace_back(e.category(), e.what());
      } catch (const std::filesystem::filesystem_error& e) {
        const std::lock_guard guard(lock);
        failures.emplace_back(ErrorCategory::io, e.what());
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(req.parallel, req.scenarios.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  int code = 0;
  for (const auto& [category, message] : failures) code = std::max(code, report(category, message));
  return code;
}

int predict_command(const std::string& model_path, const std::vector<double>& times) {
  const auto model = shockrom::DmdModel::from_json(read_json(model_path));
  std::cout << "t,index,value\n";
  for (double t : times) {
    const Eigen::VectorXd y = model.predict_at_time(t);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      std::printf("%.17g,%ld,%.17g\n", t, static_cast<long>(i), y(i));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-aware reduced-order models for scalar conservation laws"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List the built-in scenarios");
  bool as_json = false;
  list->add_flag("--json", as_json, "Print the full scenario definitions as JSON");

  RunRequest req;
  auto* run = app.add_subcommand("run", "Run a pipeline on one or more scenarios");
  run->add_option("--scenario", req.scenarios, "Scenario name (repeatable)")->required();
  run->add_option("--pipeline", req.pipeline, "upwind-only | lagrangian-dmd | lagrangian-pod | physics-dmd")
      ->capture_default_str();
  run->add_option("--out", req.out, "CSV output (a directory when several scenarios run)")->required();
  run->add_option("--eps", req.eps, "Energy threshold for the SVD truncation");
  run->add_option("--delta", req.delta, "Width of the tanh regularization");
  run->add_option("--json-config", req.json_config, "JSON file overriding scenario fields");
  run->add_option("--model-out", req.model_out, "Write the fitted DMD model as JSON");
  run->add_option("--parallel", req.parallel, "Worker threads for independent scenarios")
      ->check(CLI::PositiveNumber);

  std::string model_path;
  std::vector<double> times;
  auto* predict = app.add_subcommand("predict", "Evaluate a saved DMD model");
  predict->add_option("--model", model_path, "Model JSON written by run --model-out")->required();
  predict->add_option("--time", times, "Forecast time (repeatable)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(ErrorCategory::config, e.what());
  }

  try {
    if (*list) {
      for (const auto& s : shockrom::builtin_scenarios()) {
        if (as_json) {
          std::cout << s.to_json().dump() << '\n';
        } else {
          std::cout << s.name << '\t' << s.flux << "\tJ=" << s.J << "\tM=" << s.M
                    << "\tT_train=" << s.T_train << "\tT_predict=" << s.T_predict << "\tsource="
                    << shockrom::to_string(s.source) << '\n';
        }
      }
      return 0;
    }
    if (*run) return run_command(req);
    return predict_command(model_path, times);
  } catch (const Error& e) {
    return report(e.category(), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report(ErrorCategory::io, e.what());
  }
}
