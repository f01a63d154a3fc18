#pragma once

// Umbrella header: dense-descriptor fingerprint template matching.

#include "bench.hpp"
#include "binarize.hpp"
#include "core.hpp"
#include "correspondence.hpp"
#include "evaluate.hpp"
#include "hungarian.hpp"
#include "relaxation.hpp"
#include "rng.hpp"
#include "serialization.hpp"
#include "similarity.hpp"
#include "synth.hpp"
#include "template.hpp"
