#pragma once

#include "macnet/classify.hpp"
#include "macnet/distributions.hpp"
#include "macnet/enrichment.hpp"
#include "macnet/error.hpp"
#include "macnet/graph.hpp"
#include "macnet/inference.hpp"
#include "macnet/io.hpp"
#include "macnet/matrix.hpp"
#include "macnet/network.hpp"
#include "macnet/numkernel.hpp"
#include "macnet/parallel.hpp"
#include "macnet/random.hpp"
#include "macnet/similarity.hpp"
#include "macnet/simulation.hpp"
