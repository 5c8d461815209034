// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <exception>
#include <istream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "burstkernel/parallel.hpp"
#include "common.hpp"

namespace burstkernel::cli {
namespace {

// JSON config reader. Keys use the flag spelling with '_' allowed for '-'.
// Nested objects address subcommands; flat keys that are not top-level
// options go to the subcommand given on the command line.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConfigError(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) throw CLI::ConfigError("config: top level must be an object");
    std::vector<CLI::ConfigItem> items;
    collect(doc, {}, items);
    return items;
  }

 private:
  static std::string option_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
  }

  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConfigError("config: unsupported value " + v.dump());
  }

  std::vector<std::string> default_parents(const std::string& name) const {
    if (root_->get_option_no_throw("--" + name) != nullptr) return {};
    const auto active = root_->get_subcommands();
    if (active.size() == 1) return {active.front()->get_name()};
    return {};
  }

  void collect(const nlohmann::json& obj, const std::vector<std::string>& parents,
               std::vector<CLI::ConfigItem>& items) const {
    for (const auto& [key, value] : obj.items()) {
      const std::string name = option_name(key);
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        collect(value, nested, items);
        continue;
      }
      if (value.is_null()) continue;
      CLI::ConfigItem item;
      item.parents = parents.empty() ? default_parents(name) : parents;
      item.name = name;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }

  const CLI::App* root_;
};

void add_noise_flags(CLI::App* cmd, NoiseChoice& noise) {
  cmd->add_option("--gain", noise.gain, "Noise gain preset (1, 2, 4 or 8)");
  cmd->add_option("--sigma-r", noise.sigma_r, "Signal-independent noise std");
  cmd->add_option("--sigma-s", noise.sigma_s, "Signal-dependent noise std");
}

void add_estimator_flags(CLI::App* cmd, EstimatorOptions& e) {
  cmd->add_option("--estimator", e.estimator, "Kernel estimator: nlm or delta")
      ->capture_default_str();
  cmd->add_option("--kernel-size,-K", e.kernel_size, "Odd kernel size K")->capture_default_str();
  cmd->add_option("--patch-radius", e.patch_radius, "NLM patch radius")->capture_default_str();
  cmd->add_option("--bandwidth", e.bandwidth, "NLM bandwidth in noise std units")
      ->capture_default_str();
  cmd->add_flag("--per-channel", e.per_channel, "Separate kernels per color channel");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Burst denoising with per-pixel kernels", "burstkernel"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  app.allow_config_extras(CLI::config_extras_mode::error);

  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0 uses all cores)")
      ->envname("BURSTKERNEL_THREADS")
      ->check(CLI::NonNegativeNumber);
  app.set_config("--config", "", "JSON config file; explicit flags take precedence");
  app.config_formatter(std::make_shared<JsonConfig>(&app));

  SimulateOptions sim;
  std::string sim_out;
  auto* simulate_cmd = app.add_subcommand("simulate", "Synthesize a clean and noisy burst");
  simulate_cmd->add_option("--input", sim.input, "PNG scene (synthetic when omitted)");
  simulate_cmd->add_option("--out-dir,-o", sim_out, "Output directory")->required();
  simulate_cmd->add_option("--height", sim.height, "Synthetic scene height")->capture_default_str();
  simulate_cmd->add_option("--width", sim.width, "Synthetic scene width")->capture_default_str();
  simulate_cmd->add_option("--channels", sim.channels, "1 or 3")->capture_default_str();
  add_noise_flags(simulate_cmd, sim.noise);
  simulate_cmd->add_option("--frames,-T", sim.frames, "Burst length")->capture_default_str();
  simulate_cmd->add_option("--max-shift", sim.max_shift, "Largest frame offset in pixels")
      ->capture_default_str();
  simulate_cmd->add_option("--jitter", sim.jitter, "Per-frame random offset on top of the drift")
      ->capture_default_str();
  simulate_cmd->add_option("--seed", sim.seed, "Random seed")->capture_default_str();

  DenoiseOptions den;
  std::string den_noisy;
  std::string den_out;
  std::string den_backend = "direct";
  auto* denoise_cmd = app.add_subcommand("denoise", "Estimate kernels and filter a burst");
  denoise_cmd->add_option("noisy,--noisy", den_noisy, "Burst tensor or simulate directory")
      ->required();
  denoise_cmd->add_option("--clean", den.clean, "Clean reference tensor");
  denoise_cmd->add_option("--metadata", den.metadata, "Simulate metadata.json");
  add_noise_flags(denoise_cmd, den.noise);
  add_estimator_flags(denoise_cmd, den.estimator);
  denoise_cmd->add_option("--B,--basis-size", den.basis_size, "Basis size (0 keeps the dense field)")
      ->capture_default_str();
  denoise_cmd->add_flag("--project", den.project, "Renormalize compressed kernels");
  denoise_cmd->add_option("--backend", den_backend, "direct, factored or fourier")
      ->capture_default_str();
  denoise_cmd->add_option("--precision", den.precision, "f32 or f64")->capture_default_str();
  denoise_cmd->add_option("--tile", den.tile, "Fourier tile size (0 for whole frame)")
      ->capture_default_str();
  denoise_cmd->add_option("--out-dir,-o", den_out, "Output directory")->required();
  denoise_cmd->add_flag("--save-kernels", den.save_kernels, "Also write kernel tensors");

  BenchOptions bench_opts;
  std::vector<std::string> bench_backends{"direct", "fourier"};
  auto* bench_cmd = app.add_subcommand("bench", "Time the filtering backends");
  bench_cmd->add_option("--height", bench_opts.height)->capture_default_str();
  bench_cmd->add_option("--width", bench_opts.width)->capture_default_str();
  bench_cmd->add_option("--frames,-T", bench_opts.frames)->capture_default_str();
  bench_cmd->add_option("--channels", bench_opts.channels)->capture_default_str();
  bench_cmd->add_option("--kernel-sizes", bench_opts.kernel_sizes)
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--B,--basis-size", bench_opts.basis_size)->capture_default_str();
  bench_cmd->add_option("--backends", bench_backends)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--trials", bench_opts.trials)->capture_default_str();
  bench_cmd->add_option("--warmup", bench_opts.warmup)->capture_default_str();
  bench_cmd->add_option("--tile", bench_opts.tile, "Fourier tile size")->capture_default_str();
  bench_cmd->add_option("--direct-tile", bench_opts.direct_tile, "Direct backend tile size")
      ->capture_default_str();
  bench_cmd->add_option("--precision", bench_opts.precision)->capture_default_str();
  bench_cmd->add_option("--seed", bench_opts.seed)->capture_default_str();

  AnalyzeOptions an;
  std::vector<std::string> an_inputs;
  std::optional<std::string> an_labels;
  auto* analyze_cmd = app.add_subcommand("analyze", "Basis rank and subspace overlap statistics");
  analyze_cmd->add_option("inputs,--inputs", an_inputs, "Burst tensors or simulate directories")
      ->required();
  add_noise_flags(analyze_cmd, an.noise);
  add_estimator_flags(analyze_cmd, an.estimator);
  analyze_cmd->add_option("--B,--basis-size", an.basis_size)->capture_default_str();
  analyze_cmd->add_option("--kmeans", an.kmeans, "Cluster count (0 disables)")
      ->capture_default_str();
  analyze_cmd->add_option("--kmeans-iters", an.kmeans_iters)->capture_default_str();
  analyze_cmd->add_option("--seed", an.seed)->capture_default_str();
  analyze_cmd->add_option("--labels-dir", an_labels, "Where to write label PNGs");
  analyze_cmd->add_option("--tolerance", an.tolerance, "Relative singular value cutoff")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    set_max_threads(threads);
    Json doc;
    if (app.got_subcommand(simulate_cmd)) {
      sim.out_dir = sim_out;
      doc = simulate(sim);
    } else if (app.got_subcommand(denoise_cmd)) {
      den.noisy = den_noisy;
      den.out_dir = den_out;
      den.backend = parse_backend(den_backend);
      doc = denoise(den);
    } else if (app.got_subcommand(bench_cmd)) {
      bench_opts.backends.clear();
      for (const auto& b : bench_backends) bench_opts.backends.push_back(parse_backend(b));
      doc = bench(bench_opts);
    } else {
      an.inputs.assign(an_inputs.begin(), an_inputs.end());
      if (an_labels) an.labels_dir = fs::path(*an_labels);
      doc = analyze(an);
    }
    out << doc.dump(2) << '\n';
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace burstkernel::cli
