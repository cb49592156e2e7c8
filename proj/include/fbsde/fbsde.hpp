#ifndef FBSDE_FBSDE_HPP
#define FBSDE_FBSDE_HPP

#include "fbsde/backward.hpp"
#include "fbsde/bounds.hpp"
#include "fbsde/common.hpp"
#include "fbsde/condexp.hpp"
#include "fbsde/config.hpp"
#include "fbsde/constants.hpp"
#include "fbsde/forward.hpp"
#include "fbsde/grid.hpp"
#include "fbsde/harness.hpp"
#include "fbsde/model.hpp"
#include "fbsde/oracles.hpp"
#include "fbsde/quadrature.hpp"
#include "fbsde/rng.hpp"
#include "fbsde/validate.hpp"
#include "fbsde/value_table.hpp"

#endif
