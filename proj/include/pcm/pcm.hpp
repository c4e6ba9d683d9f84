// Umbrella header.
#pragma once

#include "pcm/calibration.hpp"
#include "pcm/complex3.hpp"
#include "pcm/datacube.hpp"
#include "pcm/detector.hpp"
#include "pcm/em.hpp"
#include "pcm/parallel.hpp"
#include "pcm/rng.hpp"
#include "pcm/scenario.hpp"
#include "pcm/structures.hpp"
