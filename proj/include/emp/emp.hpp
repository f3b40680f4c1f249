#pragma once

// Umbrella header for the inference library (the CLI layer is separate:
// include "emp/cli.hpp").

#include "emp/entropy.hpp"
#include "emp/error.hpp"
#include "emp/graph.hpp"
#include "emp/hmm.hpp"
#include "emp/learning.hpp"
#include "emp/propagation.hpp"
#include "emp/semiring.hpp"
