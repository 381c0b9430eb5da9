#pragma once

#include "discrim/csv.hpp"
#include "discrim/dataset.hpp"
#include "discrim/histogram.hpp"
#include "discrim/objective.hpp"
#include "discrim/oracle.hpp"
#include "discrim/parallel.hpp"
#include "discrim/report.hpp"
#include "discrim/search.hpp"
#include "discrim/types.hpp"
