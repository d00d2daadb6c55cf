#pragma once

#include "rexkit/dataset.hpp"
#include "rexkit/discretize.hpp"
#include "rexkit/error.hpp"
#include "rexkit/fixtures.hpp"
#include "rexkit/network.hpp"
#include "rexkit/pipeline.hpp"
#include "rexkit/rex.hpp"
#include "rexkit/benchmarks.hpp"
