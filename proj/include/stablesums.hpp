#pragma once

#include "stablesums/classical.hpp"
#include "stablesums/error.hpp"
#include "stablesums/experiments.hpp"
#include "stablesums/io/json.hpp"
#include "stablesums/io/pipeline.hpp"
#include "stablesums/io/station_table.hpp"
#include "stablesums/multi_series.hpp"
#include "stablesums/optimize.hpp"
#include "stablesums/parallel.hpp"
#include "stablesums/random.hpp"
#include "stablesums/simulators.hpp"
#include "stablesums/stable/density.hpp"
#include "stablesums/stable/fit.hpp"
#include "stablesums/stable/params.hpp"
#include "stablesums/stable/random.hpp"
#include "stablesums/stable/table.hpp"
#include "stablesums/stable_sums.hpp"
#include "stablesums/stats.hpp"
#include "stablesums/tail_index.hpp"
