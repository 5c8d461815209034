// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "burstkernel/error.hpp"
#include "burstkernel/png_io.hpp"
#include "burstkernel/sim.hpp"
#include "burstkernel/tensor_io.hpp"
#include "common.hpp"

namespace burstkernel::cli {

Json simulate(const SimulateOptions& options) {
  if (options.frames < 1) throw UsageError("--frames must be >= 1");
  if (options.max_shift < 0) throw UsageError("--max-shift must be >= 0");
  if (options.jitter < 0) throw UsageError("--jitter must be >= 0");
  if (options.channels != 1 && options.channels != 3) throw UsageError("--channels must be 1 or 3");
  if (options.out_dir.empty()) throw UsageError("--out-dir is required");
  check_noise_choice(options.noise);

  NoiseChoice noise = options.noise;
  if (!noise.gain && !noise.sigma_r) noise.gain = 1;
  const NoiseParams params = *resolve_noise(noise, std::nullopt);

  Rng rng(options.seed);
  ImageF scene;
  if (options.input) {
    scene = read_png(*options.input);
  } else {
    if (options.height < 1 || options.width < 1) throw UsageError("scene size must be positive");
    scene = make_synthetic_scene<float>(options.height, options.width, options.channels, rng);
  }

  MotionConfig motion;
  motion.max_shift = options.max_shift;
  motion.jitter = options.jitter;
  motion.seed = options.seed;
  const auto moved = synth_motion(scene, options.frames, motion, rng);
  const auto noisy = add_noise(moved.burst, params, rng);

  fs::create_directories(options.out_dir);
  save_tensor(options.out_dir / "clean.bkt", to_tensor(moved.burst));
  save_tensor(options.out_dir / "noisy.bkt", to_tensor(noisy));
  write_png(options.out_dir / "clean_reference.png", moved.burst.reference());
  write_png(options.out_dir / "noisy_reference.png", noisy.reference());

  Json shifts = Json::array();
  for (const auto& s : moved.shifts) shifts.push_back(Json{{"dy", s.dy}, {"dx", s.dx}});

  Json doc;
  doc["command"] = "simulate";
  doc["version"] = kVersion;
  doc["source"] = options.input ? Json(options.input->filename().string()) : Json("synthetic");
  doc["seed"] = options.seed;
  doc["frames"] = noisy.num_frames();
  doc["height"] = noisy.height();
  doc["width"] = noisy.width();
  doc["channels"] = noisy.channels();
  doc["max_shift"] = options.max_shift;
  doc["jitter"] = options.jitter;
  if (noise.gain) {
    const auto preset = gain_preset(*noise.gain);
    doc["gain"] = preset.level;
    doc["outside_training_range"] = preset.outside_training_range;
  } else {
    doc["gain"] = nullptr;
    doc["outside_training_range"] = nullptr;
  }
  doc["noise"] = noise_json(params);
  doc["shifts"] = shifts;
  doc["files"] = Json{{"clean", "clean.bkt"},
                      {"noisy", "noisy.bkt"},
                      {"clean_png", "clean_reference.png"},
                      {"noisy_png", "noisy_reference.png"}};
  write_json_file(options.out_dir / "metadata.json", doc);
  return doc;
}

}  // namespace burstkernel::cli
