// mapsearch.hpp -- umbrella include.
#ifndef MAPSEARCH_MAPSEARCH_HPP
#define MAPSEARCH_MAPSEARCH_HPP

#include "bn.hpp"
#include "experiments.hpp"
#include "factor.hpp"
#include "graph.hpp"
#include "inference.hpp"
#include "io.hpp"
#include "netgen.hpp"
#include "rng.hpp"
#include "scaled_real.hpp"
#include "search.hpp"
#include "trace.hpp"

#endif
