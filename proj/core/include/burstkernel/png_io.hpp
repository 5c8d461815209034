// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "burstkernel/image.hpp"

namespace burstkernel {

/// Reads an 8- or 16-bit PNG, scaling samples linearly onto [0, 1].
/// Grayscale yields 1 channel, everything else 3; alpha is dropped.
ImageF read_png(const std::filesystem::path& path);

/// Writes 1- or 3-channel images, clamping to [0, 1] and rounding to the
/// nearest code value. bit_depth is 8 or 16.
void write_png(const std::filesystem::path& path, const ImageF& image, int bit_depth = 8);

}  // namespace burstkernel
