#pragma once
// Umbrella header.

#include "oirs/geometry.hpp"
#include "oirs/linalg.hpp"
#include "oirs/quadrature.hpp"
#include "oirs/channel.hpp"
#include "oirs/coherence.hpp"
#include "oirs/codebook.hpp"
#include "oirs/interpolation.hpp"
#include "oirs/estimator.hpp"
#include "oirs/scenario.hpp"
#include "oirs/io.hpp"
#include "oirs/experiments.hpp"
