#pragma once

// Umbrella header for the vitalwave library: synthetic capillary-fiber
// wearable signals plus the analysis chain that turns intensity traces into
// respiration, cadence, pulse fiducials, PRV and pulse-wave-velocity figures.

#include "vitalwave/errors.hpp"
#include "vitalwave/random.hpp"
#include "vitalwave/trace.hpp"
#include "vitalwave/dsp.hpp"
#include "vitalwave/synth.hpp"
#include "vitalwave/pulse.hpp"
#include "vitalwave/vitals.hpp"
