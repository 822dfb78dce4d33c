#pragma once
// Umbrella header for the simulation core. The CLI front end lives in
// noonlab/cli.hpp and additionally needs CLI11 and nlohmann/json.

#include "noonlab/analysis.hpp"
#include "noonlab/config.hpp"
#include "noonlab/detection.hpp"
#include "noonlab/errors.hpp"
#include "noonlab/fock.hpp"
#include "noonlab/noon.hpp"
#include "noonlab/optics.hpp"
#include "noonlab/parallel.hpp"
