#pragma once

#include "asgc/dataset.hpp"
#include "asgc/error.hpp"
#include "asgc/experiments.hpp"
#include "asgc/filters.hpp"
#include "asgc/graph.hpp"
#include "asgc/least_squares.hpp"
#include "asgc/logistic.hpp"
#include "asgc/parallel.hpp"
#include "asgc/report.hpp"
#include "asgc/rng.hpp"
#include "asgc/synthetic.hpp"
