#pragma once

// Umbrella header.

#include "fracdrift/bayes.hpp"
#include "fracdrift/drift_basis.hpp"
#include "fracdrift/estimator.hpp"
#include "fracdrift/fbm.hpp"
#include "fracdrift/harness.hpp"
#include "fracdrift/hurst.hpp"
#include "fracdrift/io.hpp"
#include "fracdrift/quadrature.hpp"
#include "fracdrift/rng.hpp"
#include "fracdrift/sample_path.hpp"
#include "fracdrift/special.hpp"
#include "fracdrift/time_grid.hpp"
#include "fracdrift/transform.hpp"
