#pragma once

#include "analysis.hpp"
#include "boa_network.hpp"
#include "cnf.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "da.hpp"
#include "experiment.hpp"
#include "genotype.hpp"
#include "knapsack.hpp"
#include "nade.hpp"
#include "optimizer.hpp"
#include "problem.hpp"
#include "rng.hpp"
#include "selection.hpp"
