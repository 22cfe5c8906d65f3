#pragma once

#include "distinctness.hpp"
#include "distributions.hpp"
#include "estimators.hpp"
#include "harness.hpp"
#include "instances.hpp"
#include "mean_estimation.hpp"
#include "oracle.hpp"
#include "quantum_counting.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "verify.hpp"
