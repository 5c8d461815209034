// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "burstkernel/basis.hpp"
#include "burstkernel/cluster.hpp"
#include "burstkernel/error.hpp"
#include "burstkernel/filter.hpp"
#include "burstkernel/fourier.hpp"
#include "burstkernel/image.hpp"
#include "burstkernel/kernel_field.hpp"
#include "burstkernel/metrics.hpp"
#include "burstkernel/nlm.hpp"
#include "burstkernel/normalize.hpp"
#include "burstkernel/parallel.hpp"
#include "burstkernel/png_io.hpp"
#include "burstkernel/sim.hpp"
#include "burstkernel/tensor_io.hpp"
