#pragma once

#include "unimet/core.hpp"
#include "unimet/errors.hpp"
#include "unimet/experiments.hpp"
#include "unimet/haar.hpp"
#include "unimet/hermitian.hpp"
#include "unimet/matrix_io.hpp"
#include "unimet/metrics.hpp"
#include "unimet/property_suite.hpp"
#include "unimet/resources.hpp"
#include "unimet/rng.hpp"
