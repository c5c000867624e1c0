#pragma once

#include "hdclt/gaussian.hpp"
#include "hdclt/lattice.hpp"
#include "hdclt/model.hpp"
