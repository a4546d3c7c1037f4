#pragma once

#include "semicont/diagnostics.hpp"
#include "semicont/normal.hpp"
#include "semicont/numopt.hpp"
#include "semicont/random.hpp"
#include "semicont/stats.hpp"
#include "semicont/copula.hpp"
#include "semicont/margins.hpp"
#include "semicont/copula_fit.hpp"
#include "semicont/binary_part.hpp"
#include "semicont/positive_part.hpp"
#include "semicont/two_part.hpp"
#include "semicont/baseline.hpp"
#include "semicont/dgp.hpp"
#include "semicont/parallel.hpp"
#include "semicont/simulation.hpp"
#include "semicont/bootstrap.hpp"
#include "semicont/io.hpp"
