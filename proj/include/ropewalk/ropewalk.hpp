#pragma once

#include "error.hpp"
#include "geometry.hpp"
#include "segment.hpp"
#include "thickness.hpp"
#include "gradients.hpp"
#include "nnls.hpp"
#include "metric.hpp"
#include "solver.hpp"
#include "smoothing.hpp"
#include "contactmap.hpp"
#include "io.hpp"
#include "seeds.hpp"
