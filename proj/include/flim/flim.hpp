#pragma once

// Umbrella header for the whole library. flim/manifest.hpp is not included
// here: it needs nlohmann/json on the include path, which the core does not.

#include "flim/convolve.hpp"
#include "flim/deconv.hpp"
#include "flim/field.hpp"
#include "flim/field_io.hpp"
#include "flim/fft.hpp"
#include "flim/kernel.hpp"
#include "flim/lifetime.hpp"
#include "flim/metrics.hpp"
#include "flim/outputs.hpp"
#include "flim/phantom.hpp"
#include "flim/phasor.hpp"
#include "flim/plane.hpp"
#include "flim/rng.hpp"
#include "flim/version.hpp"
