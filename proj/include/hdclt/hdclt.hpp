#pragma once

#include "hdclt/distributions.hpp"
#include "hdclt/exact.hpp"
#include "hdclt/gaussian.hpp"
#include "hdclt/lattice.hpp"
#include "hdclt/logdomain.hpp"
#include "hdclt/mc_estimator.hpp"
#include "hdclt/model.hpp"
#include "hdclt/nonuniform_be.hpp"
#include "hdclt/phase_transition.hpp"
#include "hdclt/product_factorization.hpp"
#include "hdclt/theorem_bounds.hpp"
#include "hdclt/version.hpp"
