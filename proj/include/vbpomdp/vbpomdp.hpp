#pragma once

// Umbrella header: Gaussian-mixture CPOMDP planning with variational-Bayes
// softmax observation products, clustering-based mixture condensation, a
// Gauss-sum belief filter and a target-search simulation harness.

#include "vbpomdp/condense.hpp"
#include "vbpomdp/filter.hpp"
#include "vbpomdp/gaussian.hpp"
#include "vbpomdp/mixture.hpp"
#include "vbpomdp/model.hpp"
#include "vbpomdp/parallel.hpp"
#include "vbpomdp/pbvi.hpp"
#include "vbpomdp/quadrature.hpp"
#include "vbpomdp/random_mixture.hpp"
#include "vbpomdp/rng.hpp"
#include "vbpomdp/scenarios.hpp"
#include "vbpomdp/serialization.hpp"
#include "vbpomdp/sim.hpp"
#include "vbpomdp/softmax.hpp"
#include "vbpomdp/stats.hpp"
#include "vbpomdp/vb.hpp"
