#pragma once

#include "harris/analysis.hpp"
#include "harris/cli.hpp"
#include "harris/config.hpp"
#include "harris/covariance.hpp"
#include "harris/errors.hpp"
#include "harris/flow.hpp"
#include "harris/format.hpp"
#include "harris/psd.hpp"
#include "harris/quadrature.hpp"
#include "harris/report.hpp"
#include "harris/rng.hpp"
#include "harris/runner.hpp"
#include "harris/stats.hpp"
#include "harris/svg.hpp"
#include "harris/test_functions.hpp"
#include "harris/version.hpp"
