#pragma once

// Umbrella header for the whole toolkit.

#include "mwdenoise/dataset.hpp"
#include "mwdenoise/errors.hpp"
#include "mwdenoise/gradcheck.hpp"
#include "mwdenoise/image.hpp"
#include "mwdenoise/io.hpp"
#include "mwdenoise/manifest.hpp"
#include "mwdenoise/metrics.hpp"
#include "mwdenoise/model.hpp"
#include "mwdenoise/ops.hpp"
#include "mwdenoise/optim.hpp"
#include "mwdenoise/parallel.hpp"
#include "mwdenoise/phantom.hpp"
#include "mwdenoise/rng.hpp"
#include "mwdenoise/runconfig.hpp"
#include "mwdenoise/tensor.hpp"
#include "mwdenoise/trainer.hpp"
#include "mwdenoise/wavelet.hpp"
