#pragma once

#include "algomarket/analysis.hpp"
#include "algomarket/baselines.hpp"
#include "algomarket/cellular.hpp"
#include "algomarket/common.hpp"
#include "algomarket/distribution.hpp"
#include "algomarket/io.hpp"
#include "algomarket/market.hpp"
#include "algomarket/parallel.hpp"
#include "algomarket/rng.hpp"
#include "algomarket/spearman.hpp"
#include "algomarket/turing.hpp"
