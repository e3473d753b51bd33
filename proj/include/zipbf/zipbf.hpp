#pragma once

// Objective Bayes factors for Poisson vs zero-inflated Poisson models, with
// and without log-linear regression structure.

#include "zipbf/cli.hpp"
#include "zipbf/errors.hpp"
#include "zipbf/exact_bf.hpp"
#include "zipbf/integrate.hpp"
#include "zipbf/io.hpp"
#include "zipbf/linalg.hpp"
#include "zipbf/monte_carlo.hpp"
#include "zipbf/partial_prior.hpp"
#include "zipbf/poisson_fit.hpp"
#include "zipbf/priors.hpp"
#include "zipbf/rank_deficient.hpp"
#include "zipbf/regression_bf.hpp"
#include "zipbf/regression_data.hpp"
#include "zipbf/rng.hpp"
#include "zipbf/special.hpp"
