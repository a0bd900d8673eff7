#pragma once

#include "fdrsmooth/admm.hpp"
#include "fdrsmooth/density.hpp"
#include "fdrsmooth/em.hpp"
#include "fdrsmooth/errors.hpp"
#include "fdrsmooth/graph.hpp"
#include "fdrsmooth/io.hpp"
#include "fdrsmooth/path.hpp"
#include "fdrsmooth/report.hpp"
#include "fdrsmooth/sim.hpp"
