#pragma once

// Umbrella header for the isochronous trajectory toolkit.

#include "isotraj/chords.hpp"
#include "isotraj/config.hpp"
#include "isotraj/errors.hpp"
#include "isotraj/frames.hpp"
#include "isotraj/ingest.hpp"
#include "isotraj/obstacle.hpp"
#include "isotraj/predict.hpp"
#include "isotraj/replay.hpp"
#include "isotraj/segmentation.hpp"
#include "isotraj/store.hpp"
#include "isotraj/surface.hpp"
#include "isotraj/util.hpp"
