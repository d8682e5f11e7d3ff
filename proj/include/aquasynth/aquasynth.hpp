#pragma once

// Umbrella header.

#include "aquasynth/batch.hpp"
#include "aquasynth/color.hpp"
#include "aquasynth/config.hpp"
#include "aquasynth/depth.hpp"
#include "aquasynth/errors.hpp"
#include "aquasynth/field.hpp"
#include "aquasynth/image.hpp"
#include "aquasynth/io.hpp"
#include "aquasynth/optics.hpp"
#include "aquasynth/pipeline.hpp"
#include "aquasynth/spectra.hpp"
#include "aquasynth/spectral_io.hpp"
