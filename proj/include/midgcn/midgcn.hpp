#pragma once

#include "midgcn/analysis.hpp"
#include "midgcn/attack.hpp"
#include "midgcn/commands.hpp"
#include "midgcn/csr.hpp"
#include "midgcn/data.hpp"
#include "midgcn/errors.hpp"
#include "midgcn/experiment.hpp"
#include "midgcn/filter.hpp"
#include "midgcn/graph.hpp"
#include "midgcn/model.hpp"
#include "midgcn/operators.hpp"
#include "midgcn/rng.hpp"
#include "midgcn/spectral.hpp"
